"""
Conjugacy strata of Sp(2) and Sp(4).

Open regions: O_U (all eigenvalues on S¹ − {±1}), O_C (a quadruplet),
O_R± (real eigenvalues only), O_UR (one circle pair, one real pair).
Codimension-one boundaries: B_U, B_R, B_UR, B_RU, and for n = 1 the
nilpotent classes at ±1.

The nilpotent flavor of a double eigenvalue λ is the sign of
q(x) = Re(−i·λ̄·β(Nx, x)), N = A − λ on the generalized eigenspace. For a
circle eigenvalue in the normalized basis Av = λv, Aw = λw + μv with
β(v,v) = β(w,w) = 0, β(v,w) = i this is the sign of Re(λ̄μ).
"""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy import linalg as sla

from posipath.core.exceptions import NumericalError, UnsupportedError, ValidationError
from posipath.core.logger import log_metrics
from posipath.core.spectral import (
    DISC_BAND,
    eigen_structure,
    invariant_subspace,
    krein_form,
    krein_gram,
)
from posipath.core.symplectic import (
    J_like,
    hamiltonian_matrix,
    hyperbolic,
    is_symplectic,
    rotation,
    symp_inverse,
)
from posipath.models.domain import EigenGroup, EigenKind, EigenStructure, Region, StratumLabel, SymFuncs
from posipath.utils.numerics import as_even_matrix, inf_norm, phase_normalize

SQ2 = math.sqrt(2.0)
# J-invariant splitting ℝ⁴ ⊗ ℂ = V ⊕ V̄ with V = span(v0, w0), w0 = −J v0.
V0 = np.array([1.0, 0.0, 1.0j, 0.0]) / SQ2
W0 = np.array([0.0, -1.0, 0.0, -1.0j]) / SQ2
X0 = np.column_stack([V0, W0, V0.conj(), W0.conj()])


# ── Canonical representatives ───────────────────────────────────────

def _from_V_block(B: np.ndarray) -> np.ndarray:
    """Real 4×4 matrix acting as B on V (basis v0, w0) and as B̄ on V̄."""
    D = sla.block_diag(B, B.conj())
    M = X0 @ D @ X0.conj().T
    return np.real_if_close(M, tol=1e6).real


def quadruplet_block(lam: complex) -> np.ndarray:
    """Canonical O_C element with label lam: λ on v0, 1/λ̄ on w0."""
    lam = complex(lam)
    return _from_V_block(np.diag([lam, 1.0 / lam.conjugate()]))


def nilpotent_circle_block(lam: complex, sign: int) -> np.ndarray:
    """Canonical N_λ^±: A v0 = λ v0, A w0 = λ w0 ± λ v0."""
    lam = complex(lam)
    return _from_V_block(np.array([[lam, sign * lam], [0.0, lam]]))


def nilpotent_unit_block(lam: float, sign: int) -> np.ndarray:
    """Canonical 2×2 nilpotent class at ±1: [[λ, 0], [±λ, λ]]."""
    return np.array([[lam, 0.0], [sign * lam, lam]])


def real_jordan_block(lam: float, alpha: float = 1.0) -> np.ndarray:
    """Non-diagonalizable real double pair λ, 1/λ (alpha ≠ 0 sets the Jordan coupling)."""
    return np.array([
        [lam, 0.0, 0.0, 0.0],
        [0.0, 1.0 / lam, 0.0, -alpha / lam ** 2],
        [alpha, 0.0, lam, 0.0],
        [0.0, 0.0, 0.0, 1.0 / lam],
    ])


def hermitian_generator(H: np.ndarray) -> np.ndarray:
    """Real symmetric P acting as the Hermitian H on V and H̄ on V̄."""
    D = sla.block_diag(H, H.conj())
    P = X0 @ D @ X0.conj().T
    P = np.real_if_close(P, tol=1e6).real
    return 0.5 * (P + P.T)


# ── Symmetric functions ─────────────────────────────────────────────

def sym_funcs(A) -> SymFuncs:
    M = as_even_matrix(A)
    if M.shape[0] != 4:
        raise ValidationError("Symmetric functions are defined here for 2n = 4", field="dim",
                              details={"dim": M.shape[0]})
    s1 = float(np.trace(M))
    s2 = 0.5 * (s1 * s1 - float(np.trace(M @ M)))
    return SymFuncs(sigma1=s1, sigma2=s2, disc=s2 - s1 * s1 / 4.0 - 2.0)


def disc_derivative(A, P) -> float:
    """d/dt disc((Id + tJP)A) at t = 0."""
    M = as_even_matrix(A)
    T = hamiltonian_matrix(np.asarray(getattr(P, "P", P), dtype=float)) @ M
    f = sym_funcs(M)
    d1 = float(np.trace(T))
    d2 = f.sigma1 * d1 - float(np.trace(M @ T))
    return d2 - f.sigma1 * d1 / 2.0


def disc_on_boundary(f: SymFuncs) -> bool:
    return abs(f.disc) <= DISC_BAND * (1.0 + f.sigma1 ** 2)


# ── Nilpotent flavor ────────────────────────────────────────────────

def cluster_flavor(A, center: complex, radius: float = 1e-5,
                   count: Optional[int] = None) -> Tuple[int, float]:
    """Sign and strength of q(x) = Re(−i·λ̄·β(Nx, x)) on the cluster of eigenvalues near center.

    Works at exact boundary points and next to them, where the cluster
    consists of two nearby simple eigenvalues.
    """
    M = as_even_matrix(A)
    E = invariant_subspace(M, center, radius, count=count)
    J = J_like(M)
    N = M.astype(complex) - center * np.eye(M.shape[0])
    K = -np.conj(center) * (E.conj().T @ J @ N @ E)
    H = 0.5 * (K + K.conj().T)
    ev = np.linalg.eigvalsh(H)
    top = ev[np.argmax(np.abs(ev))]
    return (1 if top > 0 else -1), float(abs(top))


def nilpotent_sign(A, lam: complex, tol: float = 1e-5) -> int:
    """± class of a non-diagonalizable double eigenvalue (circle or ±1)."""
    M = as_even_matrix(A)
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-6:
        raise ValidationError("Nilpotent classes with a sign live on the unit circle",
                              field="lambda", details={"lambda": lam})
    E = invariant_subspace(M, lam, tol, count=2)
    if E.shape[1] != 2:
        raise ValidationError("Nilpotent sign needs an eigenvalue of multiplicity 2",
                              field="lambda", details={"multiplicity": E.shape[1]})
    N = M.astype(complex) - lam * np.eye(M.shape[0])
    scale = max(1.0, inf_norm(M))
    if np.linalg.norm(N @ E, 2) <= 1e-7 * scale:
        raise ValidationError("Matrix is diagonalizable on the eigenspace", field="lambda")
    sign, strength = cluster_flavor(M, lam, tol, count=2)
    if strength <= 1e-10 * scale:
        raise NumericalError("Nilpotent flavor is numerically zero", details={"strength": strength})
    return sign


def trace_derivative_check(N, P) -> float:
    """−sign(tr N)·tr(JP·N) at a nilpotent point of Sp(2): positive when the flow moves onto the circle.

    Positive at N⁺ and negative at N⁻ for every positive definite P.
    """
    M = as_even_matrix(N)
    rate = float(np.trace(hamiltonian_matrix(np.asarray(getattr(P, "P", P), dtype=float)) @ M))
    return -math.copysign(1.0, float(np.trace(M))) * rate


# ── Classification ──────────────────────────────────────────────────

def _is_scalar(M: np.ndarray, c: float) -> bool:
    return inf_norm(M - c * np.eye(M.shape[0])) <= 1e-9 * max(1.0, inf_norm(M))


def _classify_n1(M: np.ndarray, es: EigenStructure) -> StratumLabel:
    labels = [g.label for g in es.groups]
    tr = float(np.trace(M))
    band = DISC_BAND * (1.0 + tr * tr)
    if abs(tr * tr - 4.0) <= band:
        lam = 1.0 if tr > 0 else -1.0
        region = Region.AtPlusOne if tr > 0 else Region.AtMinusOne
        if _is_scalar(M, lam):
            return StratumLabel(region=region, labels=labels)
        return StratumLabel(region=region, nilpotent_sign=_unit_flavor_2x2(M, lam), labels=labels)
    if abs(tr) < 2.0:
        region = Region.O_U_plus if M[1, 0] > 0 else Region.O_U_minus
        return StratumLabel(region=region, labels=labels)
    return StratumLabel(region=Region.O_R_plus if tr > 0 else Region.O_R_minus, labels=labels)


def _unit_flavor_2x2(M: np.ndarray, lam: float) -> int:
    val = lam * (M[1, 0] - M[0, 1])
    if val == 0.0:
        raise NumericalError("Nilpotent flavor is numerically zero at ±1")
    return 1 if val > 0 else -1


def _real_region(real_labels: List[float]) -> Region:
    dominant = max(real_labels, key=abs)
    return Region.O_R_plus if dominant > 0 else Region.O_R_minus


def _classify_n2(M: np.ndarray, es: EigenStructure) -> StratumLabel:
    groups = es.groups
    labels = [g.label for g in groups]
    kinds = sorted(g.kind.value for g in groups)
    by_kind = {g.kind: g for g in groups}

    def label(region: Region, sign: Optional[int] = None) -> StratumLabel:
        return StratumLabel(region=region, nilpotent_sign=sign, labels=labels)

    if len(groups) == 1:
        g = groups[0]
        if g.kind is EigenKind.Quadruplet:
            return label(Region.O_C)
        if g.kind is EigenKind.CirclePair and g.mult == 2:
            if g.diagonalizable and g.splitting != 0:
                return label(Region.O_U)
            if not g.diagonalizable and g.splitting == 0:
                return label(Region.B_U, nilpotent_sign(M, g.label))
            if not g.diagonalizable:
                raise NumericalError("Non-diagonalizable double circle eigenvalue with nonzero splitting",
                                     details={"label": g.label, "splitting": g.splitting})
            return label(Region.NonGeneric)
        if g.kind is EigenKind.RealPair and g.mult == 2:
            return label(Region.B_R if not g.diagonalizable else Region.NonGeneric)
        return label(Region.NonGeneric)
    if len(groups) == 2 and all(g.mult == 1 for g in groups if g.kind not in (EigenKind.PlusOne, EigenKind.MinusOne)):
        if kinds == ["CirclePair", "CirclePair"]:
            return label(Region.O_U)
        if kinds == ["RealPair", "RealPair"]:
            return label(_real_region([g.label.real for g in groups]))
        if kinds == ["CirclePair", "RealPair"]:
            return label(Region.O_UR)
        unit = by_kind.get(EigenKind.PlusOne) or by_kind.get(EigenKind.MinusOne)
        if unit is not None and unit.mult == 2 and not unit.diagonalizable:
            other = [g for g in groups if g is not unit][0]
            sign = nilpotent_sign(M, unit.label)
            if other.kind is EigenKind.CirclePair:
                return label(Region.B_UR, sign)
            if other.kind is EigenKind.RealPair:
                return label(Region.B_RU, sign)
    return label(Region.NonGeneric)


def classify(A, tol_circle: float = 1e-8, tol_real: float = 1e-8,
             structure: Optional[EigenStructure] = None) -> StratumLabel:
    """Stratum of A ∈ Sp(2) or Sp(4); a precomputed eigen_structure may be passed in."""
    M = as_even_matrix(A)
    if M.shape[0] > 4:
        raise UnsupportedError("Stratum classification is available for 2n ∈ {2, 4}",
                               details={"dim": M.shape[0]})
    es = structure if structure is not None else eigen_structure(M, tol_circle, tol_real)
    if M.shape[0] == 2:
        return _classify_n1(M, es)
    return _classify_n2(M, es)


def is_generic(A, tol_circle: float = 1e-8) -> bool:
    """Open stratum, or a codimension-one boundary carrying a definite flavor."""
    lab = classify(A, tol_circle)
    if lab.region.is_open:
        return True
    if lab.region is Region.B_R:
        return True
    return lab.region is not Region.NonGeneric and lab.nilpotent_sign is not None


# ── Normal forms ────────────────────────────────────────────────────

def _circle_columns(M: np.ndarray, g: EigenGroup) -> List[Tuple[float, np.ndarray]]:
    """(angle, [Re y, −Im y]) blocks for a diagonalizable circle group."""
    E = invariant_subspace(M, g.label, count=g.mult)
    G = krein_gram(E)
    d, U = np.linalg.eigh(G)
    out = []
    for k in range(E.shape[1]):
        y = E @ U[:, k]
        theta = float(np.angle(g.label))
        if d[k] < 0:
            y = y.conj()
            theta = -theta
        y = phase_normalize(y)
        y = y * math.sqrt(2.0 / abs(krein_form(y, y).real))
        out.append((theta, np.column_stack([y.real, -y.imag])))
    return out


def _real_columns(M: np.ndarray, lam: float) -> np.ndarray:
    """Columns [u, v] with Au = λu, Av = v/λ and ω(u, v) = 1."""
    J = J_like(M)
    u = _real_kernel_vector(M, lam)
    v = _real_kernel_vector(M, 1.0 / lam)
    u = phase_normalize(u.astype(complex)).real
    return np.column_stack([u, v / (v @ J @ u)])


def _real_kernel_vector(M: np.ndarray, lam: float) -> np.ndarray:
    _, s, Vh = np.linalg.svd(M - lam * np.eye(M.shape[0]))
    return Vh[-1].real.copy()


def _unit_nilpotent_columns(M: np.ndarray, lam: float, sign: int) -> np.ndarray:
    """Columns [w, v] on the ±1 eigenspace with A w = λw + sλ v, A v = λv, ω(w, v) = 1."""
    J = J_like(M)
    E = invariant_subspace(M, lam, count=2)
    Er = _real_basis(E)
    N = M - lam * np.eye(M.shape[0])
    NE = N @ Er
    w = Er[:, int(np.argmax(np.linalg.norm(NE, axis=0)))]
    Nw = N @ w
    pair = float(Nw @ J @ w)  # ω(w, Nw)
    c2 = sign * lam / pair
    if c2 <= 0:
        raise NumericalError("Nilpotent flavor disagrees with the requested class",
                             details={"lambda": lam, "sign": sign})
    w = w * math.sqrt(c2)
    v = (N @ w) / (sign * lam)
    return np.column_stack([w, v])


def _real_basis(E: np.ndarray) -> np.ndarray:
    """Real orthonormal basis spanning the real subspace whose complexification is span(E)."""
    R = np.hstack([E.real, E.imag])
    U, s, _ = np.linalg.svd(R, full_matrices=False)
    return U[:, : E.shape[1]]


def _quadruplet_X(M: np.ndarray, lam: complex) -> np.ndarray:
    v = invariant_subspace(M, lam, count=1)[:, 0]
    w = invariant_subspace(M, 1.0 / lam.conjugate(), count=1)[:, 0]
    v = phase_normalize(v)
    b = krein_form(v, w)
    w = w * np.conj(1j / b)
    return _realize(v, w)


def _realize(v: np.ndarray, w: np.ndarray) -> np.ndarray:
    Y = np.column_stack([v, w, v.conj(), w.conj()])
    X = Y @ X0.conj().T
    return np.real_if_close(X, tol=1e6).real


def _nilpotent_circle_X(M: np.ndarray, lam: complex) -> Tuple[np.ndarray, int]:
    E = invariant_subspace(M, lam, count=2)
    N = M.astype(complex) - lam * np.eye(4)
    _, _, Vh = np.linalg.svd(N @ E)
    v = E @ Vh[-1].conj()
    w = E @ Vh[0].conj()
    bvw = krein_form(v, w)
    w = w - (krein_form(w, w) / (2.0 * bvw)) * v
    v = v * (1j / krein_form(v, w))
    mu = complex(np.vdot(v, N @ w) / np.vdot(v, v))
    r = (np.conj(lam) * mu).real
    sign = 1 if r > 0 else -1
    c = math.sqrt(abs(r))
    cv = phase_normalize(c * v)
    phase = cv[np.argmax(np.abs(cv))] / (c * v)[np.argmax(np.abs(cv))]
    v2 = c * phase * v
    w2 = w / np.conj(c * phase)
    return _realize(v2, w2), sign


def _real_jordan_X(M: np.ndarray, lam: float) -> np.ndarray:
    J = J_like(M)
    Eb = _real_basis(invariant_subspace(M, lam, count=2))
    Fb = _real_basis(invariant_subspace(M, 1.0 / lam, count=2))
    N = M - lam * np.eye(4)
    NE = N @ Eb
    u1 = Eb[:, int(np.argmax(np.linalg.norm(NE, axis=0)))]
    u3 = N @ u1
    # u2, u4 in E_{1/λ} with ω(u1,u2)=1, ω(u3,u2)=0, ω(u1,u4)=0, ω(u3,u4)=1
    W = np.array([[f @ J @ u for f in Fb.T] for u in (u1, u3)])
    coeff = np.linalg.solve(W, np.eye(2))
    u2 = Fb @ coeff[:, 0]
    u4 = Fb @ coeff[:, 1]
    return np.column_stack([u1, u2, u3, u4])


def normal_form(A, tol_circle: float = 1e-8) -> Tuple[np.ndarray, np.ndarray]:
    """Symplectic X and canonical N with X⁻¹AX = N.

    Block conventions: circle blocks ρ(θ) sorted by θ ∈ (−π, π) (θ < 0
    encodes splitting −1 at e^{i|θ|}), then nilpotent ±1 blocks, then real
    blocks diag(λ, 1/λ) sorted by |λ| descending.
    """
    M = as_even_matrix(A)
    dim = M.shape[0]
    for c in (1.0, -1.0):
        if _is_scalar(M, c):
            return np.eye(dim), c * np.eye(dim)
    lab = classify(M, tol_circle) if dim <= 4 else None
    if lab is not None and lab.region is Region.NonGeneric:
        raise UnsupportedError("Normal forms are not provided for codimension ≥ 2 strata",
                               details={"labels": lab.labels})
    es = eigen_structure(M, tol_circle)
    if lab is not None and lab.region in (Region.O_C, Region.B_U, Region.B_R):
        g = es.groups[0]
        if lab.region is Region.O_C:
            X, N = _quadruplet_X(M, g.label), quadruplet_block(g.label)
        elif lab.region is Region.B_U:
            X, sign = _nilpotent_circle_X(M, g.label)
            N = nilpotent_circle_block(g.label, sign)
        else:
            X, N = _real_jordan_X(M, g.label.real), real_jordan_block(g.label.real)
        return _verified(M, X, N)
    circle: List[Tuple[float, np.ndarray]] = []
    unit: List[Tuple[np.ndarray, np.ndarray]] = []
    real: List[Tuple[float, np.ndarray]] = []
    for g in es.groups:
        if g.kind is EigenKind.CirclePair:
            if not g.diagonalizable:
                raise UnsupportedError("Non-diagonalizable circle group outside B_U",
                                       details={"label": g.label})
            circle.extend(_circle_columns(M, g))
        elif g.kind in (EigenKind.PlusOne, EigenKind.MinusOne):
            lam = g.label.real
            if g.diagonalizable or g.mult != 2:
                raise UnsupportedError("Only the nilpotent 2×2 classes at ±1 are supported",
                                       details={"label": lam, "mult": g.mult})
            sign = nilpotent_sign(M, lam)
            unit.append((_unit_nilpotent_columns(M, lam, sign), nilpotent_unit_block(lam, sign)))
        elif g.kind is EigenKind.RealPair:
            if g.mult != 1:
                raise UnsupportedError("Repeated real pairs need the 4×4 Jordan form",
                                       details={"label": g.label})
            real.append((g.label.real, _real_columns(M, g.label.real)))
        else:
            raise UnsupportedError("Quadruplets are supported in Sp(4) only", details={"dim": dim})
    circle.sort(key=lambda item: item[0])
    real.sort(key=lambda item: -abs(item[0]))
    cols = [c for _, c in circle] + [c for c, _ in unit] + [c for _, c in real]
    blocks = [rotation(t) for t, _ in circle] + [b for _, b in unit] + [hyperbolic(l) for l, _ in real]
    X = np.hstack(cols)
    N = sla.block_diag(*blocks)
    return _verified(M, X, N)


def _verified(M: np.ndarray, X: np.ndarray, N: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    if not is_symplectic(X, 1e-7):
        raise NumericalError("Normal-form conjugator lost symplecticity",
                             details={"cond": float(np.linalg.cond(X))})
    err = inf_norm(symp_inverse(X) @ M @ X - N)
    scale = max(1.0, inf_norm(N)) * max(1.0, float(np.linalg.cond(X)))
    if err > 1e-7 * scale:
        raise NumericalError("Normal form residual too large", details={"residual": err})
    log_metrics("NORMAL_FORM", {"residual": err, "cond": float(np.linalg.cond(X))})
    return X, N
