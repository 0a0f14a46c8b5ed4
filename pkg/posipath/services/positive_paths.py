"""
Positive paths with piecewise constant generators.

A path is an origin A_0 and segments (d_k, P_k); on the k-th segment the
value is e^{JP_k τ}·A_{t_{k-1}}. Positivity is certified per segment by a
Cholesky test of P_k.
"""
from __future__ import annotations

import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg as sla

from posipath.core.exceptions import DimensionError, NumericalError, ValidationError
from posipath.core.logger import log_metrics
from posipath.core.symplectic import J_like, symp_exp, symp_inverse, symplectic_residual
from posipath.models.domain import PositivePath, PositivityCertificate, SampledPath, Segment
from posipath.utils.numerics import as_even_matrix, inf_norm, min_eigenvalue, sym

AnyPath = Union[PositivePath, SampledPath]

# Relative slack when comparing a time against the path duration.
TIME_SLACK = 1e-12


def make_segment(duration: float, P) -> Segment:
    d = float(duration)
    if not math.isfinite(d) or d <= 0.0:
        raise ValidationError("Segment durations must be positive", field="duration",
                              details={"duration": duration})
    Pm = as_even_matrix(P)
    if inf_norm(Pm - Pm.T) > 1e-10 * max(1.0, inf_norm(Pm)):
        raise ValidationError("Generators must be symmetric", field="generator_P")
    return Segment(duration=d, P=sym(Pm))


def make_path(segments: Iterable[Tuple[float, np.ndarray]], origin=None) -> PositivePath:
    """Build a PositivePath from (duration, P) pairs; origin defaults to the identity."""
    segs = tuple(s if isinstance(s, Segment) else make_segment(*s) for s in segments)
    if not segs and origin is None:
        raise ValidationError("A path needs at least one segment or an origin", field="segments")
    dim = segs[0].P.shape[0] if segs else as_even_matrix(origin).shape[0]
    O = np.eye(dim) if origin is None else as_even_matrix(origin)
    for s in segs:
        if s.P.shape != O.shape:
            raise DimensionError("Generator and origin dimensions differ",
                                 shape=[list(s.P.shape), list(O.shape)])
    return PositivePath(segments=segs, origin=O.copy())


def endpoint(path: PositivePath) -> np.ndarray:
    A = path.origin.copy()
    for s in path.segments:
        A = symp_exp(s.P, s.duration) @ A
    return A


def _check_time(path: PositivePath, t: float) -> float:
    T = path.duration
    t = float(t)
    if t < -TIME_SLACK * max(1.0, T) or t > T + TIME_SLACK * max(1.0, T):
        raise ValidationError("Time outside the path domain", field="t",
                              details={"t": t, "duration": T})
    return min(max(t, 0.0), T)


def evaluate(path: PositivePath, t: float) -> np.ndarray:
    """Exact value at time t: full segment exponentials, then a partial last one."""
    t = _check_time(path, t)
    A = path.origin.copy()
    elapsed = 0.0
    for s in path.segments:
        if elapsed + s.duration <= t:
            A = symp_exp(s.P, s.duration) @ A
            elapsed += s.duration
            continue
        tau = t - elapsed
        if tau > 0.0:
            A = symp_exp(s.P, tau) @ A
        break
    return A


def evaluate_many(path: PositivePath, times: Sequence[float]) -> np.ndarray:
    """Values at sorted times, reusing the product up to the current segment."""
    ts = np.asarray([_check_time(path, t) for t in times], dtype=float)
    if ts.size and np.any(np.diff(ts) < 0):
        raise ValidationError("Sample times must be non-decreasing", field="times")
    out = np.empty((ts.size, path.dim, path.dim))
    bps = path.breakpoints
    base = path.origin.copy()
    k = 0
    for i, t in enumerate(ts):
        while k < len(path.segments) and bps[k + 1] <= t:
            base = symp_exp(path.segments[k].P, path.segments[k].duration) @ base
            k += 1
        if k < len(path.segments) and t > bps[k]:
            out[i] = symp_exp(path.segments[k].P, t - bps[k]) @ base
        else:
            out[i] = base
    return out


def sample(path: PositivePath, count: int) -> SampledPath:
    if count < 2:
        raise ValidationError("Need at least two samples", field="samples")
    ts = np.linspace(0.0, path.duration, int(count))
    return SampledPath(times=ts, matrices=evaluate_many(path, ts))


def _segment_index(path: PositivePath, t: float) -> Tuple[int, bool]:
    """Index of the segment active just after t, and whether t sits on an interior corner."""
    bps = path.breakpoints
    n = len(path.segments)
    scale = max(1.0, path.duration)
    for k in range(1, n):
        if abs(t - bps[k]) <= 1e-12 * scale:
            return k, True
    k = int(np.searchsorted(bps, t, side="right")) - 1
    return min(max(k, 0), n - 1), False


def _sampled_generator(sp: SampledPath, t: float) -> Tuple[np.ndarray, bool]:
    ts = np.asarray(sp.times, dtype=float)
    As = np.asarray(sp.matrices, dtype=float)
    if ts.ndim != 1 or ts.size < 2 or As.shape[0] != ts.size:
        raise ValidationError("Sampled path needs matching times and matrices", field="times")
    if t < ts[0] - TIME_SLACK or t > ts[-1] + TIME_SLACK:
        raise ValidationError("Time outside the sampled range", field="t",
                              details={"t": t, "range": [float(ts[0]), float(ts[-1])]})
    J = J_like(As[0])

    def recover(dA: np.ndarray, A: np.ndarray) -> np.ndarray:
        return sym(-J @ dA @ symp_inverse(A))

    i = int(np.argmin(np.abs(ts - t)))
    if abs(ts[i] - t) <= 1e-12 * max(1.0, abs(t)):
        left = recover((As[i] - As[i - 1]) / (ts[i] - ts[i - 1]), As[i]) if i > 0 else None
        right = recover((As[i + 1] - As[i]) / (ts[i + 1] - ts[i]), As[i]) if i + 1 < ts.size else None
        if left is not None and right is not None:
            if 0 < i < ts.size - 1:
                central = recover((As[i + 1] - As[i - 1]) / (ts[i + 1] - ts[i - 1]), As[i])
            else:
                central = 0.5 * (left + right)
            corner = inf_norm(left - right) > 1e-3 * max(1.0, inf_norm(central))
            return central, corner
        return (left if right is None else right), False
    k = int(np.searchsorted(ts, t)) - 1
    k = min(max(k, 0), ts.size - 2)
    h = ts[k + 1] - ts[k]
    mid = 0.5 * (As[k] + As[k + 1])
    return recover((As[k + 1] - As[k]) / h, mid), False


def generator_at(path: AnyPath, t: float) -> Tuple[np.ndarray, bool]:
    """(P_t, corner) with P_t = −J·A′_t·A_t⁻¹ symmetrized.

    Segment paths return the active segment's P exactly; at an interior
    breakpoint the right-sided value is returned with corner=True.
    """
    if isinstance(path, SampledPath):
        return _sampled_generator(path, float(t))
    t = _check_time(path, t)
    if not path.segments:
        raise ValidationError("Path has no segments", field="segments")
    k, corner = _segment_index(path, t)
    return path.segments[k].P.copy(), corner


def verify_positive(path: AnyPath, grid: int = 64) -> PositivityCertificate:
    """Certificate with margin = min λ_min(P) over segments (or over the sample grid)."""
    if isinstance(path, SampledPath):
        ts = np.asarray(path.times, dtype=float)
        idx = np.unique(np.linspace(0, ts.size - 1, min(grid, ts.size)).round().astype(int))
        margin = min(min_eigenvalue(_sampled_generator(path, float(ts[i]))[0]) for i in idx)
    elif not path.segments:
        return PositivityCertificate(positive=False, margin=0.0)
    else:
        margin = min(min_eigenvalue(s.P) for s in path.segments)
    return PositivityCertificate(positive=bool(margin > 0.0), margin=float(margin))


def conjugate_path(path: PositivePath, X) -> PositivePath:
    """Path t ↦ X⁻¹·A_t·X: generators XᵀPX, origin X⁻¹·A_0·X."""
    Xm = as_even_matrix(X)
    if Xm.shape != path.origin.shape:
        raise DimensionError("Conjugator has the wrong shape",
                             shape=[list(Xm.shape), list(path.origin.shape)])
    Xi = symp_inverse(Xm)
    segs = tuple(Segment(duration=s.duration, P=sym(Xm.T @ s.P @ Xm)) for s in path.segments)
    return PositivePath(segments=segs, origin=Xi @ path.origin @ Xm)


def right_translate(path: PositivePath, B) -> PositivePath:
    """Path t ↦ A_t·B; the tangent JP·A_t·B keeps the same generators."""
    Bm = as_even_matrix(B)
    return PositivePath(segments=path.segments, origin=path.origin @ Bm)


def rescale(path: PositivePath, duration: float) -> PositivePath:
    """Same values on [0, duration]: durations scaled by c, generators by 1/c."""
    if duration <= 0.0 or path.duration <= 0.0:
        raise ValidationError("Rescaling needs positive durations", field="duration")
    c = duration / path.duration
    segs = tuple(Segment(duration=s.duration * c, P=s.P / c) for s in path.segments)
    return PositivePath(segments=segs, origin=path.origin)


def subdivide(path: PositivePath, max_motion: float = 0.2) -> PositivePath:
    """Split segments so that duration·‖P‖₂ ≤ max_motion on each piece."""
    segs: List[Segment] = []
    for s in path.segments:
        rate = float(np.linalg.norm(s.P, 2))
        pieces = max(1, int(math.ceil(s.duration * rate / max_motion)))
        segs.extend(Segment(duration=s.duration / pieces, P=s.P) for _ in range(pieces))
    return PositivePath(segments=tuple(segs), origin=path.origin)


def concat(paths: Sequence[PositivePath], tol: float = 1e-8) -> PositivePath:
    """Raw concatenation; each origin must match the previous endpoint and is re-based onto it."""
    if not paths:
        raise ValidationError("Nothing to concatenate", field="paths")
    segs: List[Segment] = list(paths[0].segments)
    end = endpoint(paths[0])
    for i, p in enumerate(paths[1:], start=1):
        if p.origin.shape != end.shape:
            raise DimensionError("Paths have different dimensions",
                                 shape=[list(end.shape), list(p.origin.shape)])
        gap = inf_norm(p.origin - end)
        if gap > tol * max(1.0, inf_norm(end)):
            raise ValidationError("Path endpoints do not match", field="paths",
                                  details={"index": i, "gap": gap})
        segs.extend(p.segments)
        end = endpoint(PositivePath(segments=p.segments, origin=end))
    return PositivePath(segments=tuple(segs), origin=paths[0].origin)


def smooth_concat(paths: Sequence[PositivePath], blend_width: float = 1e-3,
                  mollify: bool = True, tol: float = 1e-8) -> PositivePath:
    """Concatenate, optionally replacing each corner by a short blended segment.

    The blend has width blend_width·min(adjacent durations) and generator
    ½(P_left + P_right), which stays positive definite when both are.
    """
    if not 0.0 <= blend_width < 1.0:
        raise ValidationError("blend_width must lie in [0, 1)", field="blend_width")
    raw = concat(paths, tol)
    if not mollify or len(paths) < 2 or blend_width == 0.0:
        return raw
    junctions = set(np.cumsum([len(p.segments) for p in paths[:-1]]).tolist())
    out: List[Segment] = []
    segs = list(raw.segments)
    carry = 0.0
    for k, s in enumerate(segs):
        d = s.duration - carry
        carry = 0.0
        if (k + 1) in junctions and k + 1 < len(segs):
            nxt = segs[k + 1]
            w = blend_width * min(s.duration, nxt.duration)
            out.append(Segment(duration=d - 0.5 * w, P=s.P))
            out.append(Segment(duration=w, P=0.5 * (s.P + nxt.P)))
            carry = 0.5 * w
        else:
            out.append(Segment(duration=d, P=s.P))
    return PositivePath(segments=tuple(out), origin=raw.origin)


def direct_sum_paths(paths: Sequence[PositivePath], duration: Optional[float] = None) -> PositivePath:
    """Block-diagonal path from block paths rescaled to a common duration."""
    if not paths:
        raise ValidationError("Nothing to combine", field="paths")
    if any(not p.segments for p in paths):
        raise ValidationError("Every block needs a non-empty path; positive paths cannot hold still",
                              field="paths")
    T = float(duration if duration is not None else max(p.duration for p in paths))
    scaled = [rescale(p, T) if abs(p.duration - T) > 1e-15 * T else p for p in paths]
    cuts = sorted(set(np.round(np.concatenate([p.breakpoints for p in scaled]), 15).tolist()))
    cuts = [c for c in cuts if 0.0 <= c <= T]
    merged: List[float] = []
    for c in cuts:
        if not merged or c - merged[-1] > 1e-13 * T:
            merged.append(c)
    merged[-1] = T
    segs: List[Segment] = []
    for a, b in zip(merged[:-1], merged[1:]):
        mid = 0.5 * (a + b)
        blocks = [p.segments[_segment_index(p, mid)[0]].P for p in scaled]
        segs.append(Segment(duration=b - a, P=sla.block_diag(*blocks)))
    origin = sla.block_diag(*[p.origin for p in scaled])
    return PositivePath(segments=tuple(segs), origin=origin)


def conservation_residual(path: PositivePath, samples: int = 64) -> float:
    """Largest symplecticity residual ‖AᵀJA − J‖ over a uniform grid."""
    ts = np.linspace(0.0, path.duration, max(2, samples))
    worst = max(symplectic_residual(A) for A in evaluate_many(path, ts))
    log_metrics("CONSERVATION", {"residual": worst, "samples": int(ts.size)})
    return worst


def generator_mass(path: PositivePath) -> float:
    return float(sum(s.duration * np.linalg.norm(s.P, 2) for s in path.segments))


def land_exactly(path: PositivePath, target, max_iter: int = 6, tol: float = 1e-12) -> PositivePath:
    """Replace the tail of the last segment so the endpoint equals target.

    The tail generator solves e^{JP′δ}·S = target, S the value before the
    tail, via P′ = −J·log(target·S⁻¹)/δ, symmetrized and iterated.
    """
    B = as_even_matrix(target)
    if not path.segments:
        raise ValidationError("Cannot correct an empty path", field="segments")
    last = path.segments[-1]
    rate = max(float(np.linalg.norm(last.P, 2)), 1e-12)
    delta = min(0.5 * last.duration, 0.25 / rate)
    head = list(path.segments[:-1]) + [Segment(duration=last.duration - delta, P=last.P)]
    S = endpoint(PositivePath(segments=tuple(head), origin=path.origin))
    J = J_like(B)
    P = last.P.copy()
    scale = max(1.0, inf_norm(B))
    iterations = 0
    err = inf_norm(symp_exp(P, delta) @ S - B)
    while err > tol * scale and iterations < max_iter:
        L = sla.logm(B @ symp_inverse(symp_exp(P, delta) @ S))
        if np.max(np.abs(np.imag(L))) > 1e-8:
            raise NumericalError("Endpoint correction left the principal logarithm branch",
                                 details={"iteration": iterations, "residual": err})
        P = P + sym(-J @ np.real(L)) / delta
        iterations += 1
        err = inf_norm(symp_exp(P, delta) @ S - B)
    log_metrics("ENDPOINT_CORRECTION", {"residual": err, "delta": delta,
                                        "margin": min_eigenvalue(P), "iterations": iterations})
    if min_eigenvalue(P) <= 0.0:
        raise NumericalError("Endpoint correction lost positivity",
                             details={"margin": min_eigenvalue(P), "residual": err})
    if err > 1e-9 * scale:
        raise NumericalError("Endpoint correction did not converge", details={"residual": err})
    head.append(Segment(duration=delta, P=P))
    return PositivePath(segments=tuple(head), origin=path.origin)


def truncate(path: PositivePath, s: float) -> PositivePath:
    """Restriction of the path to [0, s]."""
    s = _check_time(path, s)
    if s <= 0.0:
        raise ValidationError("Truncation time must be positive", field="t")
    segs: List[Segment] = []
    elapsed = 0.0
    for seg in path.segments:
        if elapsed + seg.duration <= s:
            segs.append(seg)
            elapsed += seg.duration
            continue
        if s - elapsed > 0.0:
            segs.append(Segment(duration=s - elapsed, P=seg.P))
        break
    return PositivePath(segments=tuple(segs), origin=path.origin)
