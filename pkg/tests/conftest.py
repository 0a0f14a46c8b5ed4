"""Shared fixtures for the posipath test suite."""
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


@pytest.fixture
def rng():
    """Seeded generator so every run sees the same random matrices."""
    return np.random.default_rng(20240607)


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch, tmp_path):
    """Keep environment overrides and default outputs away from the checkout."""
    for name in ("POSIPATH_TOL_SYMP", "POSIPATH_TOL_CIRCLE", "POSIPATH_TOL_REAL",
                 "POSIPATH_SAMPLES", "POSIPATH_SEED", "POSIPATH_BLEND_WIDTH", "DEBUG"):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setenv("POSIPATH_OUTPUT_DIR", str(tmp_path / "output"))
    yield
