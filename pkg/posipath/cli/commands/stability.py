"""stability: matrix or monodromy stability report, or an excursion check over paths."""
from __future__ import annotations

import argparse

from posipath.cli.common import emit, load_matrix, load_path, load_system
from posipath.core.exceptions import ValidationError
from posipath.core.settings import Settings
from posipath.services.export_service import resolve_output, write_report_jsonl
from posipath.services.stability import excursion_index_check, monodromy, stability_report


def register(subparsers) -> None:
    p = subparsers.add_parser("stability", help="Stability and strong stability")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("-i", "--input", help="Matrix JSON file")
    src.add_argument("--system", help="Periodic system JSON file")
    src.add_argument("--paths", nargs="+", help="Sp(4) path JSON files for the excursion check")
    p.add_argument("--mu", type=float, default=1.0, help="Scaling of the system generators")
    p.add_argument("-o", "--output", default=None, help="JSON lines report (with --paths)")


def run(args: argparse.Namespace, settings: Settings) -> int:
    if args.paths:
        rows = excursion_index_check([load_path(p) for p in args.paths], settings.samples,
                                     settings.tol_circle)
        if args.output:
            write_report_jsonl(rows, resolve_output(args.output, settings.output_dir))
        for row in rows:
            emit(row)
        return 0
    if args.system:
        A = monodromy(load_system(args.system), args.mu)
    elif args.input:
        A = load_matrix(args.input, settings)
    else:
        raise ValidationError("Nothing to analyse", field="input")
    emit(stability_report(A, settings.tol_circle, settings.power_check_k))
    return 0
