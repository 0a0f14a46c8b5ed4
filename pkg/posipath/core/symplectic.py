"""
Symplectic linear algebra in the interleaved basis (x1, y1, x2, y2, ...).

J e_{2i-1} = e_{2i}, J e_{2i} = -e_{2i-1}; ω(X, Y) = Yᵀ J X.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Any, Optional

import numpy as np
from scipy import linalg as sla

from posipath.core.exceptions import DimensionError, NumericalError, ValidationError
from posipath.models.domain import Generator, SympMatrix
from posipath.utils.numerics import as_even_matrix, as_matrix, inf_norm, sym

_J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


@lru_cache(maxsize=16)
def _standard_J(n: int) -> np.ndarray:
    J = np.kron(np.eye(n), _J2)
    J.setflags(write=False)
    return J


def standard_J(n: int) -> np.ndarray:
    """Interleaved complex structure of dimension 2n."""
    if n < 1:
        raise ValidationError("n must be a positive integer", field="n")
    return _standard_J(int(n))


def J_like(A: np.ndarray) -> np.ndarray:
    if A.shape[0] % 2:
        raise DimensionError("Symplectic matrices need even dimension", shape=list(A.shape))
    return _standard_J(A.shape[0] // 2)


def omega(x: np.ndarray, y: np.ndarray) -> complex:
    """ω(x, y) = yᵀ J x (bilinear, also on complex vectors)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape or x.shape[0] % 2:
        raise DimensionError("ω needs two vectors of equal even length", shape=[x.shape, y.shape])
    return y @ (_standard_J(x.shape[0] // 2) @ x)


def symplectic_residual(A: Any) -> float:
    """‖AᵀJA − J‖∞ / ‖A‖∞²."""
    M = as_even_matrix(A)
    J = J_like(M)
    scale = max(inf_norm(M) ** 2, 1e-300)
    return inf_norm(M.T @ J @ M - J) / scale


def is_symplectic(A: Any, tol: float = 1e-9) -> bool:
    return symplectic_residual(A) <= tol


def certify(A: Any, tol: float = 1e-9) -> SympMatrix:
    """Wrap A as a SympMatrix, raising ValidationError when it is not symplectic."""
    M = as_even_matrix(A)
    res = symplectic_residual(M)
    if res > tol:
        raise ValidationError("Matrix is not symplectic within tolerance", field="rows",
                              details={"residual": res, "tol": tol})
    det = float(np.linalg.det(M))
    if abs(det - 1.0) > max(1e-6, 1e3 * tol * inf_norm(M) ** M.shape[0]):
        raise ValidationError("Symplectic matrix must have determinant 1", field="rows",
                              details={"det": det})
    return SympMatrix(rows=M, residual=res)


def in_lie_algebra(X: Any, tol: float = 1e-9) -> bool:
    """True iff XᵀJ + JX vanishes, i.e. JX is symmetric."""
    M = as_even_matrix(X)
    J = J_like(M)
    return inf_norm(M.T @ J + J @ M) <= tol * max(1.0, inf_norm(M))


def symp_inverse(A: Any) -> np.ndarray:
    """A⁻¹ = −J Aᵀ J for symplectic A."""
    M = as_even_matrix(A)
    J = J_like(M)
    return -J @ M.T @ J


def _expm_2x2(a: float, b: float, c: float, d: float) -> np.ndarray:
    s = (a + d) * 0.5
    p = (a - d) * 0.5
    delta_sq = p * p + b * c
    exp_s = math.exp(s)
    if abs(delta_sq) < 1e-30:
        return exp_s * np.array([[1.0 + p, b], [c, 1.0 - p]])
    if delta_sq > 0:
        delta = math.sqrt(delta_sq)
        ch = math.cosh(delta)
        shd = math.sinh(delta) / delta
        return exp_s * np.array([[ch + p * shd, b * shd], [c * shd, ch - p * shd]])
    delta = math.sqrt(-delta_sq)
    co = math.cos(delta)
    sid = math.sin(delta) / delta
    return exp_s * np.array([[co + p * sid, b * sid], [c * sid, co - p * sid]])


def hamiltonian_matrix(P: Any) -> np.ndarray:
    """JP for a symmetric generator P."""
    M = as_even_matrix(P)
    return J_like(M) @ sym(M)


def expm(X: np.ndarray) -> np.ndarray:
    """Matrix exponential: closed form for 2×2, Padé scaling-and-squaring otherwise."""
    if X.shape == (2, 2):
        return _expm_2x2(X[0, 0], X[0, 1], X[1, 0], X[1, 1])
    return sla.expm(X)


def symp_exp(P: Any, t: float = 1.0) -> np.ndarray:
    """e^{tJP}."""
    G = as_even_matrix(P.P if isinstance(P, Generator) else P)
    X = t * hamiltonian_matrix(G)
    if not np.all(np.isfinite(X)):
        raise NumericalError("Non-finite generator entries", details={"t": t})
    E = expm(X)
    if not np.all(np.isfinite(E)):
        raise NumericalError("Matrix exponential overflowed", details={"t": t, "norm": inf_norm(X)})
    return E


def conjugate(A: Any, X: Any, tol: float = 1e-9) -> np.ndarray:
    """X⁻¹ A X; X must be symplectic (its inverse is taken as −J Xᵀ J)."""
    M = as_even_matrix(A)
    Y = as_even_matrix(X)
    if M.shape != Y.shape:
        raise DimensionError("Conjugator has the wrong shape", shape=[list(M.shape), list(Y.shape)])
    if abs(np.linalg.det(Y)) < 1e-14:
        raise ValidationError("Conjugator is singular", field="X")
    if not is_symplectic(Y, max(tol, 1e-8)):
        raise ValidationError("Conjugator is not symplectic", field="X",
                              details={"residual": symplectic_residual(Y)})
    return symp_inverse(Y) @ M @ Y


def random_symplectic(rng: np.random.Generator, n: int, spread: float = 1.0) -> np.ndarray:
    """Product of 2–4 factors e^{JP_i} with random symmetric P_i scaled by spread."""
    if spread < 0:
        raise ValidationError("spread must be non-negative", field="spread")
    dim = 2 * n
    k = int(rng.integers(2, 5))
    A = np.eye(dim)
    for _ in range(k):
        G = rng.standard_normal((dim, dim))
        P = spread * sym(G) / math.sqrt(dim)
        A = symp_exp(P, 1.0) @ A
    return A


def rotation(theta: float) -> np.ndarray:
    """ρ(θ) = e^{Jθ} on ℝ²."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def hyperbolic(lam: float) -> np.ndarray:
    return np.diag([lam, 1.0 / lam])


def direct_sum(*blocks: Any) -> np.ndarray:
    return sla.block_diag(*[as_matrix(b) for b in blocks])


def identity(n: int) -> np.ndarray:
    return np.eye(2 * n)


def ensure_same_dim(A: np.ndarray, B: np.ndarray, what: Optional[str] = None) -> None:
    if A.shape != B.shape:
        raise DimensionError(f"Dimension mismatch{': ' + what if what else ''}",
                             shape=[list(A.shape), list(B.shape)])
