"""sweep: critical parameter μ₀ and a μ-grid stability table."""
from __future__ import annotations

import argparse
import math

import numpy as np

from posipath.cli.common import emit, load_system
from posipath.core.settings import Settings
from posipath.services.export_service import resolve_output, write_sweep_csv
from posipath.services.stability import critical_mu, mu_sweep


def register(subparsers) -> None:
    p = subparsers.add_parser("sweep", help="Scan μ for a periodic system")
    p.add_argument("--system", required=True, help="Periodic system JSON file")
    p.add_argument("--mu-max", type=float, default=None, help="Upper end of the scan")
    p.add_argument("--points", type=int, default=101, help="Grid points in [0, mu_max]")
    p.add_argument("-o", "--output", default="sweep.csv", help="Sweep CSV")


def run(args: argparse.Namespace, settings: Settings) -> int:
    sys_ = load_system(args.system)
    mu_max = args.mu_max if args.mu_max is not None else settings.mu_max
    mu0 = critical_mu(sys_, mu_max)
    rows = mu_sweep(sys_, np.linspace(0.0, mu_max, max(2, args.points)), settings.tol_circle,
                    settings.power_check_k)
    out = write_sweep_csv(rows, resolve_output(args.output, settings.output_dir))
    emit({"mu0": None if math.isinf(mu0) else mu0, "mu_max": mu_max, "csv": out, "rows": len(rows)})
    return 0
