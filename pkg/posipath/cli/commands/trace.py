"""trace: eigenvalue trajectory CSV and an optional SVG of the trails."""
from __future__ import annotations

import argparse

from posipath.cli.common import emit, load_path
from posipath.core.settings import Settings
from posipath.services.export_service import resolve_output, write_trajectory_csv, write_trajectory_svg
from posipath.services.tracking import eigen_trajectory


def register(subparsers) -> None:
    p = subparsers.add_parser("trace", help="Track eigenvalues along a path")
    p.add_argument("-i", "--input", required=True, help="Path JSON file")
    p.add_argument("-o", "--output", default="trajectory.csv", help="Trajectory CSV")
    p.add_argument("--svg", default=None, help="Also write an SVG plot of the trails")


def run(args: argparse.Namespace, settings: Settings) -> int:
    path = load_path(args.input)
    traj = eigen_trajectory(path, settings.samples, settings.tol_circle, settings.tol_real)
    out = write_trajectory_csv(traj, resolve_output(args.output, settings.output_dir))
    result = {"csv": out, "samples": int(len(traj.times)), "events": len(traj.events),
              "itinerary": [e.to_dict() for e in traj.itinerary]}
    if args.svg:
        result["svg"] = write_trajectory_svg(traj, resolve_output(args.svg, settings.output_dir))
    emit(result)
    return 0
