"""
posipath command line.

    python -m posipath classify -i matrix.json
    python -m posipath connect -a id.json -b rot1.json -o path.json
    python -m posipath index -i path.json

Exit codes: 0 success, 2 invalid input, 3 infeasible route, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from typing import List, Optional

from posipath import __version__
from posipath.cli.commands import VERBS
from posipath.core.errors import create_error_response
from posipath.core.exceptions import PosipathException, exit_code_for
from posipath.core.logger import log_event, log_exception, log_performance
from posipath.core.settings import Settings
from posipath.services.export_service import dumps_json


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="posipath", description="Positive paths in Sp(2n, R)")
    parser.add_argument("--version", action="version", version=f"posipath {__version__}")
    parser.add_argument("--tol-circle", type=float, default=None, help="Unit circle snapping tolerance")
    parser.add_argument("--samples", type=int, default=None, help="Samples per path (default 512)")
    parser.add_argument("--seed", type=int, default=None, help="Random seed (default 0)")
    parser.add_argument("--output-dir", default=None, help="Directory for relative output names")
    sub = parser.add_subparsers(dest="verb", required=True)
    for module in VERBS.values():
        module.register(sub)
    return parser


def _settings(args: argparse.Namespace) -> Settings:
    s = Settings.load()
    overrides = {}
    if args.tol_circle is not None:
        overrides["tol_circle"] = args.tol_circle
    if args.samples is not None:
        overrides["samples"] = args.samples
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.output_dir is not None:
        overrides["output_dir"] = args.output_dir
    return replace(s, **overrides) if overrides else s


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    try:
        settings = _settings(args)
        log_event("CLI", f"verb={args.verb}")
        code = VERBS[args.verb].run(args, settings)
    except PosipathException as e:
        log_exception("CLI", e)
        sys.stderr.write(dumps_json(create_error_response(e)))
        code = e.exit_code
    except Exception as e:
        log_exception("CLI", e)
        sys.stderr.write(dumps_json(create_error_response(e)))
        code = exit_code_for(e)
    log_performance("CLI", (time.perf_counter() - start) * 1000.0, verb=args.verb, exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
