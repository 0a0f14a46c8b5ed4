"""Small numerical helpers shared by the core and the services."""
from __future__ import annotations

from typing import Any, Optional

import numpy as np
from scipy import linalg as sla

from posipath.core.exceptions import DimensionError, ValidationError


def as_matrix(obj: Any, dtype: Any = float) -> np.ndarray:
    """Unwrap SympMatrix / Generator / array-likes into a square ndarray."""
    raw = getattr(obj, "rows", None)
    if raw is None:
        raw = getattr(obj, "P", obj)
    arr = np.asarray(raw, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError("Expected a square matrix", shape=list(arr.shape))
    return arr


def as_even_matrix(obj: Any) -> np.ndarray:
    arr = as_matrix(obj)
    if arr.shape[0] % 2:
        raise DimensionError("Symplectic matrices need even dimension", shape=list(arr.shape))
    if not np.all(np.isfinite(arr)):
        raise ValidationError("Matrix has non-finite entries", field="rows")
    return arr


def sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def inf_norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, ord=np.inf))


def min_eigenvalue(P: np.ndarray) -> float:
    """Smallest eigenvalue of the symmetric part of P."""
    return float(np.linalg.eigvalsh(sym(np.asarray(P, dtype=float)))[0])


def is_positive_definite(P: np.ndarray, tol: float = 0.0) -> bool:
    """Cholesky-based definiteness test; tol shifts the spectrum down before factoring."""
    Ps = sym(np.asarray(P, dtype=float))
    try:
        np.linalg.cholesky(Ps - tol * np.eye(Ps.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


def min_singular_value(M: np.ndarray) -> float:
    return float(sla.svdvals(M)[-1])


def angle_step(z0: complex, z1: complex) -> float:
    """Signed angle from z0 to z1 in (-π, π]."""
    return float(np.angle(z1 / z0)) if z0 != 0 else 0.0


def phase_normalize(v: np.ndarray, rel: float = 1e-8) -> np.ndarray:
    """Rotate the phase of v so its first entry of (near-)maximal modulus is real positive."""
    mods = np.abs(v)
    top = mods.max()
    idx = int(np.flatnonzero(mods >= (1.0 - rel) * top)[0])
    return v * (np.conj(v[idx]) / mods[idx])


def random_symmetric(rng: np.random.Generator, dim: int, scale: float = 1.0) -> np.ndarray:
    G = rng.standard_normal((dim, dim))
    return scale * sym(G)


def random_positive_definite(rng: np.random.Generator, dim: int, floor: float = 0.1,
                             scale: Optional[float] = None) -> np.ndarray:
    G = rng.standard_normal((dim, dim))
    P = G @ G.T / dim + floor * np.eye(dim)
    if scale is not None:
        P *= scale
    return P
