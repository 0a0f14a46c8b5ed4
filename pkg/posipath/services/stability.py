"""
Periodic quadratic Hamiltonian systems ẋ = μ·J·P_t·x with P_{t+1} = P_t.

The fundamental solution over one period (the monodromy A_μ) decides
stability: bounded powers, or strong stability when the spectrum sits on
S¹ − {±1} with maximal splitting numbers. For positive definite schedules
A_μ stays strongly stable until an eigenvalue first reaches −1 at μ₀.
"""
from __future__ import annotations

import math
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from posipath.core.exceptions import ValidationError
from posipath.core.logger import log_event, log_json, log_metrics, log_performance
from posipath.core.spectral import eigen_structure, raw_eigenvalues
from posipath.core.symplectic import symp_exp
from posipath.models.domain import EigenKind, PeriodicSystem, PositivePath, Segment
from posipath.services.index import conley_zehnder_index, count_excursions, crossings, excursions
from posipath.services.positive_paths import evaluate, make_segment, rescale, truncate
from posipath.services.tracking import eigen_trajectory
from posipath.utils.numerics import as_even_matrix, inf_norm, is_positive_definite, min_singular_value, random_symmetric

# Powers growing by more than this factor between the two halves of the window count as unbounded.
POWER_GROWTH = 1.5
# Perturbed spectra further than this from S¹ are unstable.
OFF_CIRCLE = 1e-7


def make_system(schedule: Sequence[Tuple[float, Any]]) -> PeriodicSystem:
    """Validate a one-period generator schedule."""
    segs = tuple(s if isinstance(s, Segment) else make_segment(*s) for s in schedule)
    if not segs:
        raise ValidationError("A periodic system needs at least one segment", field="segments")
    total = sum(s.duration for s in segs)
    if abs(total - 1.0) > 1e-12:
        raise ValidationError("Segment durations of a periodic system must sum to 1", field="segments",
                              details={"total": total})
    dims = {s.P.shape for s in segs}
    if len(dims) != 1:
        raise ValidationError("All generators must share one dimension", field="segments",
                              details={"shapes": [list(d) for d in dims]})
    return PeriodicSystem(segments=segs)


def system_path(sys: PeriodicSystem, mu: float = 1.0, periods: int = 1) -> PositivePath:
    """t ↦ A_t on [0, periods] starting at Id, generators scaled by μ."""
    if periods < 1:
        raise ValidationError("periods must be at least 1", field="periods")
    one = tuple(Segment(duration=s.duration, P=float(mu) * s.P) for s in sys.segments)
    return PositivePath(segments=one * int(periods), origin=np.eye(sys.dim))


def monodromy(sys: PeriodicSystem, mu: float = 1.0) -> np.ndarray:
    """Time-1 map A₁ = e^{μJP_k d_k}⋯e^{μJP_1 d_1}."""
    A = np.eye(sys.dim)
    for s in sys.segments:
        A = symp_exp(float(mu) * s.P, s.duration) @ A
    return A


def fundamental_solution(sys: PeriodicSystem, t: float, mu: float = 1.0) -> np.ndarray:
    """A_t for any t ≥ 0, using A_{k+s} = A_s·A₁^k."""
    if t < 0.0:
        raise ValidationError("Time must be non-negative", field="t")
    k = int(math.floor(t))
    s = t - k
    A = np.linalg.matrix_power(monodromy(sys, mu), k)
    if s > 0.0:
        A = evaluate(system_path(sys, mu), s) @ A
    return A


def power_growth(A, k_max: int = 64) -> float:
    """max‖A^k‖ over the second half of k ≤ k_max divided by the max over the first half."""
    M = as_even_matrix(A)
    norms = []
    P = np.eye(M.shape[0])
    for _ in range(int(k_max)):
        P = P @ M
        norms.append(inf_norm(P))
    half = max(1, len(norms) // 2)
    return float(max(norms[half:]) / max(norms[:half]))


def is_stable(A, tol_circle: float = 1e-8, power_check_k: int = 64) -> bool:
    """Spectrum on S¹, circle groups diagonalizable and powers bounded."""
    es = eigen_structure(A, tol_circle)
    for g in es.groups:
        if not g.kind.on_circle or not g.diagonalizable:
            return False
    return power_growth(A, power_check_k) < POWER_GROWTH


def is_strongly_stable(A, tol_circle: float = 1e-8, unit_ball: float = 1e-6) -> bool:
    """Spectrum on S¹ − {±1} and |splitting| = multiplicity for every group."""
    M = as_even_matrix(A)
    vals = raw_eigenvalues(M)
    if np.min(np.abs(vals - 1.0)) <= unit_ball or np.min(np.abs(vals + 1.0)) <= unit_ball:
        return False
    es = eigen_structure(M, tol_circle)
    for g in es.groups:
        if g.kind is not EigenKind.CirclePair or g.splitting is None:
            return False
        if abs(g.splitting) != g.mult:
            return False
    return True


def _off_circle(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.abs(raw_eigenvalues(A)) - 1.0)))


def perturbation_stable(A, trials: int = 1000, size: float = 1e-4,
                        rng: Optional[np.random.Generator] = None) -> Tuple[bool, Optional[np.ndarray]]:
    """Sample e^{JS}·A with ‖S‖₂ = size; returns (all stable, first destabilizing S)."""
    M = as_even_matrix(A)
    rng = rng if rng is not None else np.random.default_rng(0)
    dim = M.shape[0]
    for _ in range(int(trials)):
        S = random_symmetric(rng, dim)
        S *= size / max(float(np.linalg.norm(S, 2)), 1e-300)
        if _off_circle(symp_exp(S, 1.0) @ M) > OFF_CIRCLE:
            return False, S
    return True, None


def _require_positive_schedule(sys: PeriodicSystem) -> None:
    for k, s in enumerate(sys.segments):
        if not is_positive_definite(s.P):
            raise ValidationError("Critical parameter search needs positive definite generators",
                                  field="segments", details={"segment": k})


def _minus_one_distance(sys: PeriodicSystem, mu: float) -> float:
    return min_singular_value(monodromy(sys, mu) + np.eye(sys.dim))


def _det_plus(sys: PeriodicSystem, mu: float) -> float:
    return float(np.linalg.det(monodromy(sys, mu) + np.eye(sys.dim)))


def critical_mu(sys: PeriodicSystem, mu_max: float = 10.0, scan: int = 1000,
                touch_tol: float = 1e-8) -> float:
    """Smallest μ ∈ (0, μ_max] with −1 ∈ spec(A_μ); math.inf when there is none."""
    _require_positive_schedule(sys)
    if not mu_max > 0.0:
        raise ValidationError("mu_max must be positive", field="mu_max")
    start = time.perf_counter()
    grid = np.linspace(0.0, float(mu_max), int(scan) + 1)
    sig = np.array([_minus_one_distance(sys, m) for m in grid])
    dets = np.array([_det_plus(sys, m) for m in grid])
    for i in range(1, len(grid)):
        lo, hi = float(grid[i - 1]), float(grid[i])
        hits: List[float] = []
        if dets[i - 1] * dets[i] < 0.0:
            hits.append(brentq(lambda m: _det_plus(sys, m), lo, hi, xtol=1e-14, rtol=1e-13))
        nxt = sig[i + 1] if i + 1 < len(grid) else np.inf
        if sig[i] <= sig[i - 1] and sig[i] <= nxt:
            right = float(grid[i + 1]) if i + 1 < len(grid) else hi
            res = minimize_scalar(lambda m: _minus_one_distance(sys, m), bounds=(lo, right),
                                  method="bounded", options={"xatol": 1e-13, "maxiter": 500})
            if float(res.fun) <= touch_tol:
                hits.append(float(res.x))
        if hits:
            mu0 = min(hits)
            log_json("CRITICAL_MU", "bracket found", bracket=[lo, hi], mu0=mu0)
            log_performance("CRITICAL_MU", (time.perf_counter() - start) * 1000.0, scan=int(scan))
            return mu0
    log_event("CRITICAL_MU", f"no eigenvalue -1 up to mu_max={mu_max}")
    return math.inf


def stability_report(A, tol_circle: float = 1e-8, power_check_k: int = 64) -> Dict[str, Any]:
    es = eigen_structure(A, tol_circle)
    return {
        "stable": is_stable(A, tol_circle, power_check_k),
        "strongly_stable": is_strongly_stable(A, tol_circle),
        "power_growth": power_growth(A, power_check_k),
        **es.to_dict(),
    }


def mu_sweep(sys: PeriodicSystem, mus: Sequence[float], tol_circle: float = 1e-8,
             power_check_k: int = 64) -> List[Dict[str, Any]]:
    """Rows mu, stable, strongly_stable, min_abs_det_plus over a μ grid."""
    rows = []
    for m in mus:
        A = monodromy(sys, float(m))
        rows.append({
            "mu": float(m),
            "stable": is_stable(A, tol_circle, power_check_k),
            "strongly_stable": is_strongly_stable(A, tol_circle),
            "min_abs_det_plus": abs(_det_plus(sys, float(m))),
        })
    return rows


def _unit_time(path: PositivePath) -> PositivePath:
    return path if abs(path.duration - 1.0) <= 1e-12 else rescale(path, 1.0)


def excursion_index_check(paths: Sequence[PositivePath], samples: int = 256,
                          tol_circle: float = 1e-8) -> List[Dict[str, Any]]:
    """e_A(1) ≤ i_A(1) + 1 for every path, and e_A(1) ≤ 1 for short ones."""
    report = []
    for k, path in enumerate(paths):
        if path.dim != 4:
            raise ValidationError("Excursion checks run on Sp(4) paths", field="dim",
                                  details={"index": k, "dim": path.dim})
        p = _unit_time(path)
        e = excursions(p, 1.0, samples=samples, tol_circle=tol_circle)
        i = conley_zehnder_index(p, samples)
        short = not crossings(p, 0.0, samples) and i == 0
        violations = []
        if e > i + 1:
            violations.append("e > i + 1")
        if short and e > 1:
            violations.append("short path with e > 1")
        row = {"path": k, "excursions": e, "cz_index": i, "short": short, "violations": violations}
        log_json("EXCURSION_CHECK", "path checked", **row)
        report.append(row)
    return report


def restricted_growth_report(sys: PeriodicSystem, ts: Sequence[float] = (1.0, 2.0, 3.0, 4.0, 5.0),
                             mu: float = 1.0, samples: int = 256,
                             tol_circle: float = 1e-8) -> Dict[str, Any]:
    """e_A(t) and i_A(t) along the iterated system, with the smallest C for e ≤ i_A(1)·⌊t⌋·C + 1."""
    if sys.dim != 4:
        raise ValidationError("Growth reports run on Sp(4) systems", field="dim", details={"dim": sys.dim})
    if any(t < 1.0 for t in ts):
        raise ValidationError("Report times start at t = 1", field="ts")
    periods = int(math.ceil(max(ts)))
    path = system_path(sys, mu, periods)
    traj = eigen_trajectory(path, samples * periods, tol_circle)
    i1 = conley_zehnder_index(truncate(path, 1.0), samples)
    rows = []
    constant = 0.0
    for t in ts:
        e = count_excursions(traj.itinerary, float(t))
        e_any = count_excursions(traj.itinerary, float(t), any_stratum=True)
        i_t = conley_zehnder_index(truncate(path, float(t)), samples * int(math.ceil(t)))
        if i1 > 0:
            constant = max(constant, (e - 1) / (i1 * math.floor(t)))
        rows.append({"t": float(t), "excursions": e, "excursions_any": e_any, "cz_index": i_t,
                     "within_3_i_plus_1": e_any <= 3 * (i_t + 1)})
    if i1 == 0 and any(r["excursions"] > 1 for r in rows):
        constant = math.inf
    report = {"mu": float(mu), "cz_index_1": i1, "empirical_constant": constant, "rows": rows}
    log_metrics("GROWTH_REPORT", {"cz_index_1": i1, "empirical_constant": constant, "times": len(rows)})
    return report
