"""selftest: run the acceptance suite."""
from __future__ import annotations

import argparse

from posipath.core.settings import Settings
from posipath.services.selftest import run_selftest


def register(subparsers) -> None:
    p = subparsers.add_parser("selftest", help="Run the acceptance checks")
    p.add_argument("--fraction", type=float, default=1.0, help="Scale factor for sample counts")
    p.add_argument("--only", nargs="*", default=None, help="Run checks whose name contains these words")


def run(args: argparse.Namespace, settings: Settings) -> int:
    runner = run_selftest(settings, args.fraction, args.only)
    return 0 if runner.print_summary() else 4
