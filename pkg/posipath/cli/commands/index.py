"""index: positivity, shortness, Conley-Zehnder index and itinerary of a path."""
from __future__ import annotations

import argparse

from posipath.cli.common import emit, load_path
from posipath.core.settings import Settings
from posipath.services.index import diagnose


def register(subparsers) -> None:
    p = subparsers.add_parser("index", help="Diagnostics of a path starting at Id")
    p.add_argument("-i", "--input", required=True, help="Path JSON file")


def run(args: argparse.Namespace, settings: Settings) -> int:
    emit(diagnose(load_path(args.input), settings.samples, settings.tol_circle).to_dict())
    return 0
