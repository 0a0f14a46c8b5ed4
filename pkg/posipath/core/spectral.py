"""
Krein-form spectral analysis of symplectic matrices.

Eigenvalues of a symplectic matrix come in pairs λ, λ̄ on the unit circle,
pairs λ, 1/λ on the real line, or quadruplets λ, λ̄, 1/λ, 1/λ̄. Groups are
labelled by the orbit element with |λ| ≥ 1 and Im λ ≥ 0.

The Krein form is β(v, w) = −i·w̄ᵀJv; the splitting number of a circle
eigenvalue is the signature of β on its generalized eigenspace.
"""
from __future__ import annotations

import cmath
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg as sla

from posipath.core.exceptions import DimensionError, NumericalError, ValidationError
from posipath.core.symplectic import J_like
from posipath.models.domain import EigenGroup, EigenKind, EigenStructure
from posipath.utils.numerics import as_even_matrix, inf_norm

# Discriminant band for the palindromic reduction, relative to (1 + scale²).
DISC_BAND = 1e-7
# Eigenvalues whose orbit labels are closer than this are merged into one group.
CLUSTER_TOL = 1e-6
# Gram eigenvalues below this fraction of the largest count as degenerate.
DEGENERACY_BAND = 1e-8


def _palindromic_roots(A: np.ndarray) -> np.ndarray:
    """Eigenvalues for 2n ≤ 4 through t = λ + 1/λ; double roots inside DISC_BAND are made exact."""
    dim = A.shape[0]
    tr = float(np.trace(A))
    if dim == 2:
        ts = [tr]
    else:
        tr2 = float(np.trace(A @ A))
        sigma2 = 0.5 * (tr * tr - tr2)
        disc = sigma2 - tr * tr / 4.0 - 2.0
        if abs(disc) <= DISC_BAND * (1.0 + tr * tr):
            ts = [tr / 2.0, tr / 2.0]
        else:
            root = cmath.sqrt(-disc)
            ts = [tr / 2.0 + root, tr / 2.0 - root]
    out: List[complex] = []
    for t in ts:
        q = t * t / 4.0 - 1.0
        if abs(q) <= DISC_BAND * (1.0 + abs(t) ** 2):
            out.extend([t / 2.0, t / 2.0])
        else:
            r = cmath.sqrt(q)
            out.extend([t / 2.0 + r, t / 2.0 - r])
    return np.array(out, dtype=complex)


def raw_eigenvalues(A: np.ndarray) -> np.ndarray:
    if A.shape[0] <= 4:
        return _palindromic_roots(A)
    try:
        return np.linalg.eigvals(A).astype(complex)
    except np.linalg.LinAlgError as e:
        raise NumericalError("Eigensolver did not converge", details={"reason": str(e)})


def snap(z: complex, tol_circle: float = 1e-8, tol_real: float = 1e-8) -> complex:
    """Snap onto S¹ and/or ℝ; both at once lands on ±1."""
    z = complex(z)
    r = abs(z)
    on_circle = abs(r - 1.0) <= tol_circle
    on_real = abs(z.imag) <= tol_real
    if on_circle and on_real:
        return complex(1.0 if z.real > 0 else -1.0, 0.0)
    if on_circle:
        z = z / r
    if on_real:
        z = complex(z.real, 0.0)
    return z


def orbit_label(z: complex) -> complex:
    """Representative of {z, z̄, 1/z, 1/z̄} with |λ| ≥ 1 and Im λ ≥ 0."""
    if z == 0:
        raise NumericalError("Zero eigenvalue in a symplectic matrix")
    if abs(z) < 1.0:
        z = 1.0 / z
    if z.imag < 0:
        z = z.conjugate()
    return complex(z)


def _kind_of(label: complex) -> EigenKind:
    on_circle = abs(abs(label) - 1.0) <= 1e-12
    if label.imag == 0.0 and on_circle:
        return EigenKind.PlusOne if label.real > 0 else EigenKind.MinusOne
    if on_circle:
        return EigenKind.CirclePair
    if label.imag == 0.0:
        return EigenKind.RealPair
    return EigenKind.Quadruplet


def kind_of(z: complex, tol_circle: float = 1e-8, tol_real: float = 1e-8) -> EigenKind:
    """Orbit kind of a single (unsnapped) eigenvalue."""
    return _kind_of(orbit_label(snap(z, tol_circle, tol_real)))


_ORBIT_SIZE = {
    EigenKind.PlusOne: 1,
    EigenKind.MinusOne: 1,
    EigenKind.CirclePair: 2,
    EigenKind.RealPair: 2,
    EigenKind.Quadruplet: 4,
}


def krein_form(v: np.ndarray, w: np.ndarray) -> complex:
    """β(v, w) = −i·w̄ᵀJv."""
    v = np.asarray(v, dtype=complex)
    w = np.asarray(w, dtype=complex)
    if v.shape != w.shape or v.ndim != 1 or v.shape[0] % 2:
        raise DimensionError("β needs two vectors of equal even length", shape=[v.shape, w.shape])
    J = J_like(np.empty((v.shape[0], v.shape[0])))
    return complex(-1j * (np.conj(w) @ (J @ v)))


def krein_gram(B: np.ndarray) -> np.ndarray:
    """Hermitian matrix G[i, j] = β(b_j, b_i) for the columns b of B."""
    J = J_like(np.empty((B.shape[0], B.shape[0])))
    G = -1j * (B.conj().T @ J @ B)
    return 0.5 * (G + G.conj().T)


def invariant_subspace(A, lam: complex, tol: float = 1e-5, count: Optional[int] = None) -> np.ndarray:
    """Orthonormal basis (columns) of the generalized eigenspace of lam.

    Eigenvalues within tol·max(1, |lam|) of lam are selected by a sorted
    complex Schur decomposition. With count given, the radius is placed
    between the count-th and next nearest eigenvalue instead, so a cluster
    snapped to a multiple eigenvalue is selected whole.
    """
    M = as_even_matrix(A)
    radius = tol * max(1.0, abs(lam))
    if count is not None:
        dist = np.sort(np.abs(np.linalg.eigvals(M) - lam))
        radius = 0.5 * (dist[count - 1] + dist[count]) if count < dist.shape[0] else np.inf
    T, Z, sdim = sla.schur(M.astype(complex), output="complex",
                           sort=lambda x: abs(x - lam) <= radius)
    if sdim == 0 or (count is not None and sdim != count):
        raise ValidationError("λ is not an eigenvalue within tolerance", field="lambda",
                              details={"lambda": lam, "tol": tol, "selected": int(sdim)})
    return Z[:, :sdim]


def signature(G: np.ndarray, band: float = DEGENERACY_BAND) -> int:
    ev = np.linalg.eigvalsh(G)
    scale = max(float(np.max(np.abs(ev))), 1e-300)
    if np.any(np.abs(ev) <= band * scale):
        raise NumericalError("Krein form is degenerate on the invariant subspace",
                             details={"gram_eigenvalues": ev.tolist()})
    return int(np.sum(ev > 0) - np.sum(ev < 0))


def splitting_number(A, lam: complex, tol_circle: float = 1e-8, tol: float = 1e-5,
                     count: Optional[int] = None) -> int:
    """Signature of β on the generalized eigenspace of a circle eigenvalue."""
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > tol_circle:
        raise ValidationError("Splitting numbers are defined on the unit circle only",
                              field="lambda", details={"abs": abs(lam)})
    B = invariant_subspace(A, lam, tol, count=count)
    return signature(krein_gram(B))


def krein_velocity(A, P, lam: complex, tol: float = 1e-5) -> float:
    """Angular velocity ⟨Px, x⟩/β(x, x) of a simple circle eigenvalue along the tangent JPA."""
    M = as_even_matrix(A)
    Pm = np.asarray(getattr(P, "P", P), dtype=float)
    lam = complex(lam)
    radius = tol * max(1.0, abs(lam))
    mult = int(np.sum(np.abs(np.linalg.eigvals(M) - lam) <= radius))
    if mult == 0:
        raise ValidationError("λ is not an eigenvalue within tolerance", field="lambda",
                              details={"lambda": lam, "tol": tol})
    if mult != 1:
        raise ValidationError("Krein velocity needs a simple eigenvalue", field="lambda",
                              details={"multiplicity": mult})
    x = invariant_subspace(M, lam, tol, count=1)[:, 0]
    beta = krein_form(x, x).real
    if abs(beta) <= DEGENERACY_BAND:
        raise NumericalError("β(x, x) vanishes for the eigenvector", details={"beta": beta})
    return float(np.real(np.conj(x) @ (0.5 * (Pm + Pm.T)) @ x) / beta)


def _diagonalizable(M: np.ndarray, lam: complex, mult: int, scale: float) -> bool:
    if mult == 1:
        return True
    s = sla.svdvals(M.astype(complex) - lam * np.eye(M.shape[0]))
    kernel = int(np.sum(s <= 1e-6 * scale))
    return kernel >= mult


def _group_labels(values: np.ndarray) -> List[Tuple[complex, List[int]]]:
    clusters: List[Tuple[complex, List[int]]] = []
    for idx, z in enumerate(values):
        rep = orbit_label(z)
        for k, (c, members) in enumerate(clusters):
            if abs(rep - c) <= CLUSTER_TOL * max(1.0, abs(c)):
                members.append(idx)
                break
        else:
            clusters.append((rep, [idx]))
    out = []
    for c, members in clusters:
        reps = np.array([orbit_label(values[i]) for i in members])
        mean = complex(np.mean(reps))
        out.append((mean, members))
    return out


def eigen_structure(A, tol_circle: float = 1e-8, tol_real: float = 1e-8) -> EigenStructure:
    """Grouped, snapped spectrum with multiplicities, splitting numbers and diagonalizability."""
    M = as_even_matrix(A)
    scale = max(1.0, inf_norm(M))
    raw = raw_eigenvalues(M)
    values = np.array([snap(z, tol_circle, tol_real) for z in raw], dtype=complex)
    groups: List[EigenGroup] = []
    total = 0
    for label, members in _group_labels(values):
        label = snap(label, tol_circle, tol_real)
        kind = _kind_of(label)
        count = len(members)
        orbit = _ORBIT_SIZE[kind]
        if count % orbit:
            raise NumericalError("Spectrum is not closed under λ ↦ λ̄, 1/λ",
                                 details={"label": label, "count": count})
        mult = count // orbit
        total += count
        diag = _diagonalizable(M, label, mult, scale)
        splitting: Optional[int] = None
        if kind in (EigenKind.PlusOne, EigenKind.MinusOne):
            splitting = 0
        elif kind is EigenKind.CirclePair:
            splitting = splitting_number(M, label, tol_circle=max(tol_circle, 1e-8), count=mult)
            if abs(splitting) > mult or (splitting - mult) % 2:
                raise NumericalError("Splitting number inconsistent with multiplicity",
                                     details={"label": label, "mult": mult, "splitting": splitting})
            # nonzero splitting forces a diagonalizable double circle eigenvalue
            if mult == 2 and splitting != 0 and not diag:
                raise NumericalError("Non-diagonalizable double circle eigenvalue with nonzero splitting",
                                     details={"label": label, "splitting": splitting,
                                              "residual": _backward_residual(M, raw, scale)})
        groups.append(EigenGroup(label=label, kind=kind, mult=mult,
                                 diagonalizable=diag, splitting=splitting))
    if total != M.shape[0]:
        raise NumericalError("Eigenvalue count mismatch", details={"count": total, "dim": M.shape[0]})
    groups.sort(key=lambda g: (_kind_order(g.kind), abs(g.label), np.angle(g.label)))
    residual = _backward_residual(M, values, scale)
    return EigenStructure(groups=groups, residual=residual, values=values)


def _kind_order(kind: EigenKind) -> int:
    return [EigenKind.CirclePair, EigenKind.PlusOne, EigenKind.MinusOne,
            EigenKind.RealPair, EigenKind.Quadruplet].index(kind)


def _backward_residual(M: np.ndarray, values: np.ndarray, scale: float) -> float:
    I = np.eye(M.shape[0])
    worst = 0.0
    for z in values:
        worst = max(worst, float(sla.svdvals(M - z * I)[-1]))
    return worst / scale


def eigenvalue_splitting(structure: EigenStructure, z: complex) -> Optional[int]:
    """Per-eigenvalue splitting: the group's value shared over its multiplicity, negated below ℝ."""
    rep = orbit_label(z)
    for g in structure.groups:
        if abs(rep - g.label) <= 10 * CLUSTER_TOL * max(1.0, abs(g.label)):
            if g.splitting is None:
                return None
            per = int(round(g.splitting / g.mult))
            return -per if z.imag < 0 else per
    return None
