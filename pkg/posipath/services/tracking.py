"""
Eigenvalue tracking and stratum itineraries along positive paths.

Eigenvalues are matched between consecutive samples by a minimum-cost
assignment; an interval is halved while the largest matched move exceeds
half the smallest gap between distinct eigenvalue clusters. Stratum
changes between samples are located by bisection on the classifier and
recorded as zero-length boundary entries of the itinerary.
"""
from __future__ import annotations

from collections import deque
from typing import Deque, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from posipath.core.exceptions import NumericalError, PosipathException, UnsupportedError
from posipath.core.logger import log_event, log_metrics
from posipath.core.spectral import eigen_structure, eigenvalue_splitting, kind_of, raw_eigenvalues, snap
from posipath.core.strata import classify, cluster_flavor
from posipath.models.domain import (
    BoundaryEvent,
    EigenKind,
    EigenStructure,
    ItineraryEntry,
    PositivePath,
    Region,
    StratumLabel,
    Trajectory,
)
from posipath.services.positive_paths import evaluate, evaluate_many
from posipath.utils.numerics import angle_step

# Eigenvalues closer than this are one cluster when measuring gaps.
MERGE_TOL = 1e-6
# Matched moves below this are accepted even when the gap test fails.
AMBIGUITY_FLOOR = 1e-3
# Bisection stops at this fraction of the path duration.
EVENT_RESOLUTION = 1e-11

_R_REGIONS = (Region.O_R_plus, Region.O_R_minus)


def _cluster_gap(values: np.ndarray) -> float:
    reps: List[complex] = []
    for z in values:
        if all(abs(z - r) > MERGE_TOL * max(1.0, abs(r)) for r in reps):
            reps.append(complex(z))
    if len(reps) < 2:
        return np.inf
    return float(min(abs(a - b) for i, a in enumerate(reps) for b in reps[i + 1:]))


def match_eigenvalues(prev: np.ndarray, cur: np.ndarray) -> Tuple[np.ndarray, float]:
    """Reorder cur to follow prev; returns the reordered values and the largest move."""
    cost = np.abs(prev[:, None] - cur[None, :])
    rows, cols = linear_sum_assignment(cost)
    ordered = np.empty_like(cur)
    ordered[rows] = cur[cols]
    return ordered, float(cost[rows, cols].max())


def _safe_structure(M: np.ndarray, tol_circle: float, tol_real: float) -> Optional[EigenStructure]:
    try:
        return eigen_structure(M, tol_circle, tol_real)
    except NumericalError as e:
        log_event("TRACKING", f"eigen structure unavailable: {e.message}")
        return None


def _safe_label(M: np.ndarray, es: Optional[EigenStructure], tol_circle: float,
                tol_real: float) -> Optional[StratumLabel]:
    if M.shape[0] > 4:
        return None
    try:
        return classify(M, tol_circle, tol_real, structure=es)
    except (NumericalError, UnsupportedError) as e:
        log_event("TRACKING", f"classification unavailable: {e.message}")
        return None


def _label_at(path: PositivePath, t: float, tol_circle: float, tol_real: float
              ) -> Tuple[np.ndarray, Optional[StratumLabel]]:
    M = evaluate(path, t)
    return M, _safe_label(M, _safe_structure(M, tol_circle, tol_real), tol_circle, tol_real)


def _same(a: Optional[StratumLabel], b: Optional[StratumLabel]) -> bool:
    if a is None or b is None:
        return a is b
    if a.region.is_open and b.region.is_open:
        return a.region is b.region
    return a.key() == b.key()


def _circle_pairs(region: Region, n: int) -> Optional[int]:
    if region.on_circle:
        return n
    if region is Region.O_UR:
        return 1
    if region is Region.O_C or region in _R_REGIONS:
        return 0
    return None


def _unit_center(M: np.ndarray) -> float:
    vals = raw_eigenvalues(M)
    return 1.0 if np.min(np.abs(vals - 1.0)) <= np.min(np.abs(vals + 1.0)) else -1.0


def _circle_collision(M: np.ndarray) -> complex:
    vals = [z for z in raw_eigenvalues(M) if z.imag > 0]
    best = None
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            if best is None or abs(a - b) < abs(best[0] - best[1]):
                best = (a, b)
    if best is None:
        raise NumericalError("No colliding circle pair near the boundary")
    c = 0.5 * (best[0] + best[1])
    return complex(c / abs(c))


def boundary_label(before: StratumLabel, after: StratumLabel, M_before: np.ndarray,
                   M_after: np.ndarray) -> Optional[StratumLabel]:
    """Label of the boundary crossed between two open regions; None for a mere relabel."""
    ra, rb = before.region, after.region
    n = M_before.shape[0] // 2
    pair = {ra, rb}
    if n == 1:
        if ra.on_circle != rb.on_circle:
            M_u = M_before if ra.on_circle else M_after
            c = _unit_center(M_u)
            sign, _ = cluster_flavor(M_u, c, count=2)
            region = Region.AtPlusOne if c > 0 else Region.AtMinusOne
            return StratumLabel(region=region, nilpotent_sign=sign, labels=[complex(c)])
        return StratumLabel(region=Region.NonGeneric)
    if pair <= set(_R_REGIONS):
        return None
    if pair == {Region.O_U, Region.O_C}:
        M_u = M_before if ra is Region.O_U else M_after
        c = _circle_collision(M_u)
        sign, _ = cluster_flavor(M_u, c, count=2)
        return StratumLabel(region=Region.B_U, nilpotent_sign=sign, labels=[c])
    if Region.O_C in pair and pair & set(_R_REGIONS):
        M_r = M_after if ra is Region.O_C else M_before
        vals = sorted((z.real for z in raw_eigenvalues(M_r) if abs(z) > 1.0), key=abs)
        return StratumLabel(region=Region.B_R, labels=[complex(float(np.mean(vals)))])
    if pair == {Region.O_U, Region.O_UR} or (Region.O_UR in pair and pair & set(_R_REGIONS)):
        c = _unit_center(M_before)
        sign, _ = cluster_flavor(M_before, c, count=2)
        region = Region.B_UR if Region.O_U in pair else Region.B_RU
        return StratumLabel(region=region, nilpotent_sign=sign, labels=[complex(c)])
    return StratumLabel(region=Region.NonGeneric)


def _bisect_change(path: PositivePath, ta: float, la: StratumLabel, Ma: np.ndarray,
                   tb: float, lb: Optional[StratumLabel], Mb: np.ndarray,
                   tol_circle: float, tol_real: float):
    width = EVENT_RESOLUTION * max(1.0, path.duration)
    for _ in range(80):
        if tb - ta <= width:
            break
        tm = 0.5 * (ta + tb)
        Mm, lm = _label_at(path, tm, tol_circle, tol_real)
        if _same(lm, la):
            ta, Ma = tm, Mm
        else:
            tb, lb, Mb = tm, lm, Mm
    return ta, Ma, tb, lb, Mb


def _fill_events(path: PositivePath, ta: float, la: StratumLabel, Ma: np.ndarray,
                 tb: float, lb: Optional[StratumLabel], Mb: np.ndarray,
                 tol_circle: float, tol_real: float
                 ) -> List[Tuple[float, Optional[StratumLabel], StratumLabel, Optional[StratumLabel]]]:
    """(t, boundary label, before, after) for every change between ta and tb."""
    out = []
    cur_t, cur_l, cur_M = ta, la, Ma
    for _ in range(8):
        if _same(cur_l, lb):
            break
        a, Ma_, b, after, Mb_ = _bisect_change(path, cur_t, cur_l, cur_M, tb, lb, Mb,
                                              tol_circle, tol_real)
        if after is None:
            after = StratumLabel(region=Region.NonGeneric)
        if cur_l.region.is_open and after.region.is_open:
            try:
                mark = boundary_label(cur_l, after, Ma_, Mb_)
            except PosipathException as e:
                log_event("TRACKING", f"boundary flavor unavailable at t={b:.6g}: {e.message}")
                mark = StratumLabel(region=Region.NonGeneric)
        else:
            mark = after if not after.region.is_open else None
        out.append((b, mark, cur_l, after))
        cur_t, cur_l, cur_M = b, after, Mb_
    return out


def eigen_trajectory(path: PositivePath, samples: int = 512, tol_circle: float = 1e-8,
                     tol_real: float = 1e-8, max_refine: int = 20) -> Trajectory:
    """Tracked eigenvalues, per-sample kinds and splittings, and (2n ≤ 4) the itinerary."""
    if samples < 2:
        raise NumericalError("Tracking needs at least two samples", details={"samples": samples})
    T = path.duration
    ts0 = np.linspace(0.0, T, int(samples))
    mats0 = evaluate_many(path, ts0)
    width_min = (T / (samples - 1)) * 2.0 ** (-max_refine)
    budget = 64 * samples
    times: List[float] = [float(ts0[0])]
    mats: List[np.ndarray] = [mats0[0]]
    vals: List[np.ndarray] = [raw_eigenvalues(mats0[0])]
    pending: Deque[Tuple[float, np.ndarray, np.ndarray]] = deque(
        (float(t), M, raw_eigenvalues(M)) for t, M in zip(ts0[1:], mats0[1:]))
    refinements = 0
    while pending:
        t1, M1, v1 = pending[0]
        ordered, move = match_eigenvalues(vals[-1], v1)
        gap = _cluster_gap(vals[-1])
        if move > 0.5 * gap:
            if t1 - times[-1] > width_min and refinements < budget:
                tm = 0.5 * (times[-1] + t1)
                Mm = evaluate(path, tm)
                pending.appendleft((tm, Mm, raw_eigenvalues(Mm)))
                refinements += 1
                continue
            scale = max(1.0, float(np.max(np.abs(v1))))
            if move > AMBIGUITY_FLOOR * scale:
                raise NumericalError("Eigenvalue tracking is ambiguous after refinement",
                                     details={"bracket": [times[-1], t1], "move": move, "gap": gap})
        pending.popleft()
        times.append(t1)
        mats.append(M1)
        vals.append(ordered)

    kinds: List[List[str]] = []
    splittings: List[List[Optional[int]]] = []
    labels: List[Optional[StratumLabel]] = []
    for M, v in zip(mats, vals):
        es = _safe_structure(M, tol_circle, tol_real)
        row_kinds, row_split = [], []
        for z in v:
            k = kind_of(z, tol_circle, tol_real)
            row_kinds.append(k.value)
            if k in (EigenKind.PlusOne, EigenKind.MinusOne):
                row_split.append(0)
            elif k is EigenKind.CirclePair and es is not None:
                row_split.append(eigenvalue_splitting(es, snap(z, tol_circle, tol_real)))
            else:
                row_split.append(None)
        kinds.append(row_kinds)
        splittings.append(row_split)
        labels.append(_safe_label(M, es, tol_circle, tol_real))

    itinerary: List[ItineraryEntry] = []
    events: List[BoundaryEvent] = []
    if path.dim <= 4 and len(times) > 1:
        itinerary, events = _build_itinerary(path, times, mats, labels, tol_circle, tol_real)
    log_metrics("TRACKING", {"samples": len(times), "refinements": refinements,
                             "events": len(events)})
    return Trajectory(times=np.asarray(times), values=np.asarray(vals), kinds=kinds,
                      splittings=splittings, labels=labels, itinerary=itinerary,
                      events=events, refinements=refinements)


def _build_itinerary(path, times, mats, labels, tol_circle, tol_real):
    T = path.duration
    entries: List[ItineraryEntry] = []
    events: List[BoundaryEvent] = []
    start = 0.0
    idx = next((i for i in range(1, len(times)) if labels[i] is not None), None)
    if idx is None:
        return entries, events
    cur = labels[idx]
    cur_t, cur_M = times[idx], mats[idx]
    for i in range(idx + 1, len(times)):
        if labels[i] is not None and _same(labels[i], cur):
            cur_t, cur_M = times[i], mats[i]
            continue
        for t_ev, mark, before, after in _fill_events(path, cur_t, cur, cur_M, times[i],
                                                      labels[i], mats[i], tol_circle, tol_real):
            entries.append(ItineraryEntry(t_start=start, t_end=t_ev, label=before))
            if mark is not None and mark is not after:
                entries.append(ItineraryEntry(t_start=t_ev, t_end=t_ev, label=mark))
            if mark is not None:
                events.append(BoundaryEvent(t=t_ev, label=mark, before=before.region, after=after.region))
            start, cur = t_ev, after
        if labels[i] is not None:
            cur = labels[i]
        cur_t, cur_M = times[i], mats[i]
    last = ItineraryEntry(t_start=start, t_end=T, label=cur)
    if not (entries and last.t_start == last.t_end == entries[-1].t_end
            and _same(entries[-1].label, cur)):
        entries.append(last)
    return entries, events


def itinerary(path: PositivePath, samples: int = 512, tol_circle: float = 1e-8) -> List[ItineraryEntry]:
    return eigen_trajectory(path, samples, tol_circle).itinerary


# ── Property checks on trajectories ─────────────────────────────────

def krein_monotonicity_violations(traj: Trajectory, atol: float = 1e-12) -> List[dict]:
    """Moves of splitting-(+1) circle eigenvalues that are not anticlockwise."""
    out = []
    for i in range(1, len(traj.times)):
        for c in range(traj.values.shape[1]):
            if traj.kinds[i - 1][c] != EigenKind.CirclePair.value or traj.kinds[i][c] != EigenKind.CirclePair.value:
                continue
            if traj.splittings[i - 1][c] != 1 or traj.splittings[i][c] != 1:
                continue
            step = angle_step(traj.values[i - 1, c], traj.values[i, c])
            if step < -atol:
                out.append({"t0": float(traj.times[i - 1]), "t1": float(traj.times[i]),
                            "column": c, "step": step})
    return out


def _splitting_before(traj: Trajectory, i: int, c: int, partner: int) -> Optional[int]:
    """Summed splitting of columns c and partner at the last sample before i where both are known."""
    circle = EigenKind.CirclePair.value
    for k in range(i - 1, -1, -1):
        if traj.kinds[k][c] != circle or traj.kinds[k][partner] != circle:
            return None
        s_c, s_p = traj.splittings[k][c], traj.splittings[k][partner]
        if s_c is not None and s_p is not None:
            return int(s_c + s_p)
    return None


def circle_departures(traj: Trajectory) -> List[dict]:
    """Circle eigenvalues leaving S¹, with the summed splitting of their colliding cluster.

    When the splittings are unknown at the last sample on the circle (no
    eigenstructure near the collision), earlier samples are used; a departure
    that stays unresolved is flagged indeterminate.
    """
    out = []
    on = {EigenKind.CirclePair.value, EigenKind.PlusOne.value, EigenKind.MinusOne.value}
    for i in range(1, len(traj.times)):
        for c in range(traj.values.shape[1]):
            if traj.kinds[i - 1][c] not in on or traj.kinds[i][c] in on:
                continue
            z = traj.values[i, c]
            prev = traj.values[i - 1]
            # eigenvalues leaving together end up near z's reflection 1/z̄
            partner = int(np.argmin([abs(w - 1.0 / np.conj(z)) if j != c else np.inf
                                     for j, w in enumerate(traj.values[i])]))
            if traj.kinds[i - 1][c] != EigenKind.CirclePair.value:
                total = 0
            else:
                total = _splitting_before(traj, i, c, partner)
            out.append({"t": float(traj.times[i]), "column": c, "partner": partner,
                        "value": complex(prev[c]), "splitting": total,
                        "indeterminate": total is None})
    return out


def leaving_circle_violations(traj: Trajectory) -> List[dict]:
    """Departures with nonzero summed splitting, and departures whose splitting stays unknown."""
    return [d for d in circle_departures(traj) if d["splitting"] != 0]


def legality_violations(events: Sequence[BoundaryEvent], n: int) -> List[dict]:
    """Boundary crossings whose nilpotent flavor contradicts the direction of travel.

    Leaving the circle needs the − flavor and entering it the + flavor.
    """
    out = []
    for ev in events:
        if ev.label.nilpotent_sign is None:
            continue
        before, after = _circle_pairs(ev.before, n), _circle_pairs(ev.after, n)
        if before is None or after is None or before == after:
            continue
        required = -1 if before > after else 1
        if ev.label.nilpotent_sign != required:
            out.append({"t": ev.t, "region": ev.label.region.value, "before": ev.before.value,
                        "after": ev.after.value, "sign": ev.label.nilpotent_sign})
    return out
