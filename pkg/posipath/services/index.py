"""
Conley-Zehnder index, shortness and excursion counts of positive paths.

The index counts the times t > 0 at which the perturbed path
A'_t = e^{Jεt}·A_t meets det(A - Id) = 0, each with multiplicity
dim ker(A'_t - Id). ε is halved until two consecutive counts agree.
"""
from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from posipath.core.exceptions import NumericalError, ValidationError
from posipath.core.logger import log_event, log_metrics
from posipath.core.symplectic import symp_exp
from posipath.models.domain import ItineraryEntry, PathDiagnostics, PositivePath, Region
from posipath.services.positive_paths import evaluate, evaluate_many, verify_positive
from posipath.services.tracking import eigen_trajectory
from posipath.utils.numerics import inf_norm

# σ_min(A - Id) below this (relative) is a crossing.
CROSSING_TOL = 1e-6
# Singular values below this (relative) count towards the kernel dimension.
KERNEL_TOL = 1e-5

_NO_CIRCLE = (Region.O_C, Region.O_R_plus, Region.O_R_minus)


def _require_identity_origin(path: PositivePath) -> None:
    if inf_norm(path.origin - np.eye(path.dim)) > 1e-12:
        raise ValidationError("Index and shortness are defined for paths starting at Id",
                              field="origin")


def _shifted(path: PositivePath, eps: float, t: float) -> np.ndarray:
    A = evaluate(path, t)
    if eps:
        A = symp_exp(np.eye(path.dim), eps * t) @ A
    return A - np.eye(path.dim)


def _sigma_min(path: PositivePath, eps: float, t: float) -> float:
    return float(np.linalg.svd(_shifted(path, eps, t), compute_uv=False)[-1])


def _det(path: PositivePath, eps: float, t: float) -> float:
    return float(np.linalg.det(_shifted(path, eps, t)))


def _start_time(path: PositivePath, samples: int) -> float:
    """First time considered: half the first grid step, earlier for fast paths."""
    step = path.duration / max(1, samples - 1)
    rate = max(float(np.linalg.norm(path.segments[0].P, 2)), 1e-12) if path.segments else 1.0
    return min(0.5 * step, 0.5 / rate)


def crossings(path: PositivePath, eps: float = 0.0, samples: int = 512) -> List[Tuple[float, int]]:
    """(t, kernel dimension) for every t ≥ t₀ where e^{Jεt}·A_t has eigenvalue 1."""
    if not path.segments:
        return []
    T = path.duration
    t0 = _start_time(path, samples)
    ts = np.linspace(t0, T, max(3, samples))
    mats = evaluate_many(path, ts)
    shifted = []
    for t, A in zip(ts, mats):
        if eps:
            A = symp_exp(np.eye(path.dim), eps * t) @ A
        shifted.append(A - np.eye(path.dim))
    sig = np.array([np.linalg.svd(M, compute_uv=False)[-1] for M in shifted])
    dets = np.array([np.linalg.det(M) for M in shifted])
    scale = max(1.0, max(inf_norm(M) for M in mats))

    roots: List[float] = []
    for i in range(1, len(ts) - 1):
        if sig[i] <= sig[i - 1] and sig[i] <= sig[i + 1]:
            res = minimize_scalar(lambda t: _sigma_min(path, eps, t), bounds=(ts[i - 1], ts[i + 1]),
                                  method="bounded", options={"xatol": 1e-12})
            if float(res.fun) <= CROSSING_TOL * scale:
                roots.append(float(res.x))
    for i in range(len(ts) - 1):
        if dets[i] == 0.0:
            roots.append(float(ts[i]))
        elif dets[i] * dets[i + 1] < 0.0:
            roots.append(float(brentq(lambda t: _det(path, eps, t), ts[i], ts[i + 1], xtol=1e-14)))
    if sig[-1] <= CROSSING_TOL * scale:
        roots.append(float(T))

    roots.sort()
    merged: List[float] = []
    for r in roots:
        if not merged or r - merged[-1] > 1e-6 * max(1.0, T):
            merged.append(r)
    out = []
    for r in merged:
        s = np.linalg.svd(_shifted(path, eps, r), compute_uv=False)
        out.append((r, max(1, int(np.sum(s <= KERNEL_TOL * scale)))))
    return out


def conley_zehnder_index(path: PositivePath, samples: int = 512, eps0: float = 1e-3,
                         max_halvings: int = 12) -> int:
    """Stabilized crossing count of the positively perturbed path."""
    _require_identity_origin(path)
    eps = eps0
    prev = sum(m for _, m in crossings(path, eps, samples))
    history = [(eps, prev)]
    for _ in range(max_halvings):
        eps *= 0.5
        count = sum(m for _, m in crossings(path, eps, samples))
        history.append((eps, count))
        log_event("CZ_INDEX", f"eps={eps:.3e} count={count}")
        if count == prev:
            log_metrics("CZ_INDEX", {"index": count, "eps": eps, "halvings": len(history) - 1})
            return int(count)
        prev = count
    raise NumericalError("Crossing count did not stabilize under shrinking perturbation",
                         details={"history": history})


def crossing_times(path: PositivePath, samples: int = 512) -> List[float]:
    return [t for t, _ in crossings(path, 0.0, samples)]


def tangencies(path: PositivePath, samples: int = 512) -> List[float]:
    """Unperturbed crossings with a two-dimensional kernel."""
    return [t for t, m in crossings(path, 0.0, samples) if m >= 2]


def is_short(path: PositivePath, samples: int = 512) -> bool:
    """No eigenvalue 1 for t ≥ t₀ and vanishing index."""
    _require_identity_origin(path)
    if crossings(path, 0.0, samples):
        return False
    return conley_zehnder_index(path, samples) == 0


def count_excursions(entries: List[ItineraryEntry], s: float, any_stratum: bool = False) -> int:
    """Completed returns to O_U within (0, s] after a stay in a circle-free open stratum.

    O_UR is neutral unless any_stratum is set, so O_R → O_UR → O_U still
    counts once.
    """
    away = set(_NO_CIRCLE)
    if any_stratum:
        away.add(Region.O_UR)
    count = 0
    out = False
    for e in entries:
        if e.t_start > s:
            break
        region = e.label.region
        if region in away:
            out = True
        elif region is Region.O_U and e.t_end > e.t_start:
            if out:
                count += 1
            out = False
    return count


def excursions(path: PositivePath, s: Optional[float] = None, any_stratum: bool = False,
               samples: int = 512, tol_circle: float = 1e-8) -> int:
    """e_A(s) on Sp(4); s defaults to the full duration."""
    if path.dim != 4:
        raise ValidationError("Excursions are counted on Sp(4) paths", field="dim",
                              details={"dim": path.dim})
    s = path.duration if s is None else float(s)
    traj = eigen_trajectory(path, samples, tol_circle)
    return count_excursions(traj.itinerary, s, any_stratum)


def complexity(path: PositivePath, samples: int = 512, tol_circle: float = 1e-8) -> int:
    """Number of boundary crossings along the itinerary."""
    return len(eigen_trajectory(path, samples, tol_circle).events)


def diagnose(path: PositivePath, samples: int = 512, tol_circle: float = 1e-8) -> PathDiagnostics:
    _require_identity_origin(path)
    cert = verify_positive(path)
    hits = crossings(path, 0.0, samples)
    cz = conley_zehnder_index(path, samples)
    diag = PathDiagnostics(
        positive=cert.positive,
        margin=cert.margin,
        short=not hits and cz == 0,
        cz_index=cz,
        crossing_times=[t for t, _ in hits],
        tangencies=[t for t, m in hits if m >= 2],
    )
    if path.dim <= 4:
        traj = eigen_trajectory(path, samples, tol_circle)
        diag.itinerary = traj.itinerary
        diag.complexity = len(traj.events)
        if path.dim == 4:
            diag.excursions = count_excursions(traj.itinerary, path.duration)
    log_metrics("DIAGNOSE", {"cz_index": cz, "short": diag.short, "margin": cert.margin})
    return diag
