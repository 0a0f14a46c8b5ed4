"""Shared plumbing for the CLI verbs: input loading and stdout emission."""
from __future__ import annotations

import sys
from typing import Any

import numpy as np

from posipath.core.settings import Settings
from posipath.core.symplectic import certify
from posipath.models.domain import PeriodicSystem, PositivePath
from posipath.models.schemas import MatrixModel, PathModel, SystemModel, load_model
from posipath.services.export_service import dumps_json


def emit(obj: Any) -> None:
    """One newline-terminated JSON object on stdout."""
    sys.stdout.write(dumps_json(obj))
    sys.stdout.flush()


def load_matrix(file_path: str, settings: Settings) -> np.ndarray:
    A = load_model(MatrixModel, file_path).to_array()
    return certify(A, settings.tol_symp).rows


def load_path(file_path: str) -> PositivePath:
    return load_model(PathModel, file_path).to_path()


def load_system(file_path: str) -> PeriodicSystem:
    return load_model(SystemModel, file_path).to_system()
