"""connect: positive path from A (default Id) to B, optionally short."""
from __future__ import annotations

import argparse

import numpy as np

from posipath.cli.common import emit, load_matrix
from posipath.core.exceptions import ValidationError
from posipath.core.settings import Settings
from posipath.services.export_service import resolve_output, write_path_json
from posipath.services.positive_paths import verify_positive
from posipath.services.steering import connect_route, short_route


def register(subparsers) -> None:
    p = subparsers.add_parser("connect", help="Construct a positive path between two matrices")
    p.add_argument("-a", "--from", dest="source", default=None, help="Start matrix JSON (default Id)")
    p.add_argument("-b", "--to", dest="target", required=True, help="End matrix JSON")
    p.add_argument("-o", "--output", default="path.json", help="Path JSON output")
    p.add_argument("--short", action="store_true", help="Require a short path from Id")
    p.add_argument("--no-audit", action="store_true", help="Skip the itinerary legality audit")


def run(args: argparse.Namespace, settings: Settings) -> int:
    B = load_matrix(args.target, settings)
    A = load_matrix(args.source, settings) if args.source else np.eye(B.shape[0])
    if args.short:
        if np.max(np.abs(A - np.eye(A.shape[0]))) > 1e-12:
            raise ValidationError("Short paths start at Id", field="from")
        route = short_route(B, settings.samples, audit=not args.no_audit)
    else:
        route = connect_route(A, B, settings.blend_width, audit=not args.no_audit)
    out = write_path_json(route.path, resolve_output(args.output, settings.output_dir))
    cert = verify_positive(route.path)
    emit({"path": out, "positive": cert.positive, "margin": cert.margin,
          "duration": route.path.duration, "segments": len(route.path.segments),
          "legs": route.describe()})
    return 0
