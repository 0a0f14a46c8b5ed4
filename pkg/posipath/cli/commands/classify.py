"""classify: stratum label and eigenvalue structure of a matrix."""
from __future__ import annotations

import argparse

from posipath.cli.common import emit, load_matrix
from posipath.core.settings import Settings
from posipath.core.spectral import eigen_structure
from posipath.core.strata import classify as classify_matrix


def register(subparsers) -> None:
    p = subparsers.add_parser("classify", help="Print the stratum of a symplectic matrix")
    p.add_argument("-i", "--input", required=True, help="Matrix JSON file")


def run(args: argparse.Namespace, settings: Settings) -> int:
    A = load_matrix(args.input, settings)
    structure = eigen_structure(A, settings.tol_circle, settings.tol_real)
    label = classify_matrix(A, settings.tol_circle, settings.tol_real, structure=structure)
    emit({**label.to_dict(), "groups": structure.to_dict()["groups"]})
    return 0
