"""extend: continue a short path until it ends in O_U."""
from __future__ import annotations

import argparse

from posipath.cli.common import emit, load_path
from posipath.core.settings import Settings
from posipath.services.export_service import resolve_output, write_path_json
from posipath.services.steering import extension_route


def register(subparsers) -> None:
    p = subparsers.add_parser("extend", help="Extend a short path into O_U")
    p.add_argument("-i", "--input", required=True, help="Short path JSON")
    p.add_argument("-o", "--output", default="extended.json", help="Path JSON output")


def run(args: argparse.Namespace, settings: Settings) -> int:
    route = extension_route(load_path(args.input), settings.samples)
    out = write_path_json(route.path, resolve_output(args.output, settings.output_dir))
    emit({"path": out, "duration": route.path.duration, "legs": route.describe()})
    return 0
