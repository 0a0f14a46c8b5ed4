"""
Constructive positive paths through the conjugacy strata.

Routes are assembled leg by leg in normal-form coordinates. Each leg is a
short positive path whose origin has the same normal form as the current
endpoint; it is glued on by conjugating it with X_L·X_E⁻¹, which keeps
the generators positive definite. Block-diagonal stages (circle and real
blocks) are direct sums of 2×2 primitives; quadruplet stages work on the
J-invariant splitting of ℝ⁴ ⊗ ℂ. A final conjugation moves the canonical
route onto the requested target and a short tail correction lands on it
exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment, root

from posipath.core.exceptions import (
    InfeasibleRouteError,
    NumericalError,
    UnsupportedError,
    ValidationError,
)
from posipath.core.logger import log_json, log_metrics
from posipath.core.spectral import eigen_structure, orbit_label, raw_eigenvalues
from posipath.core.strata import (
    classify,
    disc_derivative,
    hermitian_generator,
    nilpotent_circle_block,
    nilpotent_unit_block,
    normal_form,
    quadruplet_block,
    real_jordan_block,
)
from posipath.core.symplectic import (
    ensure_same_dim,
    hyperbolic,
    is_symplectic,
    rotation,
    symp_exp,
    symp_inverse,
)
from posipath.models.domain import Crossing, Leg, LegKind, PositivePath, Region, Route, Segment
from posipath.services.index import is_short
from posipath.services.positive_paths import (
    concat,
    conjugate_path,
    direct_sum_paths,
    endpoint,
    land_exactly,
    make_path,
    rescale,
    smooth_concat,
    subdivide,
    verify_positive,
)
from posipath.services.tracking import eigen_trajectory, legality_violations
from posipath.utils.numerics import as_even_matrix, inf_norm, min_eigenvalue

TWO_PI = 2.0 * math.pi

# Generators increasing / decreasing |λ| on diag(λ, 1/λ).
SLIDE_UP = np.array([[2.0, -1.0], [-1.0, 1.0]])
SLIDE_DOWN = np.array([[2.0, 1.0], [1.0, 1.0]])
SLIDE_STEP = 0.05

# Generator along which a double real pair bifurcates into O_C or O_R.
BIFURCATION_P = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.0, 5.0, -2.0, 0.0],
    [0.0, -2.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
])
BIFURCATION_RADIUS = 2.0
BIFURCATION_TAU = 0.005

CROSSING_TAU = 0.02
QUADRUPLET_STEP = 0.05
HOLD = 0.05
GLUE_TOL = 1e-6


# ── 2×2 and 4×4 primitives ──────────────────────────────────────────

def rotate_block(theta_from: float, theta_to: float) -> PositivePath:
    """ρ(θ_from) → ρ(θ_to) over unit time with generator (θ_to − θ_from)·Id."""
    delta = float(theta_to) - float(theta_from)
    if not delta > 0.0:
        raise InfeasibleRouteError("Circle blocks only rotate anticlockwise along positive paths",
                                   rule="anticlockwise rotation",
                                   details={"theta_from": theta_from, "theta_to": theta_to})
    return make_path([(1.0, delta * np.eye(2))], origin=rotation(theta_from))


def _real_frame(A: np.ndarray) -> Tuple[float, np.ndarray]:
    """Dominant real eigenvalue μ and symplectic X with A = X·diag(μ, 1/μ)·X⁻¹."""
    vals, vecs = np.linalg.eig(A)
    if np.max(np.abs(vals.imag)) > 1e-9 * max(1.0, np.max(np.abs(vals))):
        raise NumericalError("Real slide left the real axis", details={"eigenvalues": vals.tolist()})
    i = int(np.argmax(np.abs(vals)))
    u = vecs[:, i].real
    v = vecs[:, 1 - i].real
    v = v / (u[0] * v[1] - u[1] * v[0])
    return float(vals[i].real), np.column_stack([u, v])


def _slide_to(A: np.ndarray, radius: float) -> Tuple[Segment, np.ndarray]:
    mu, X = _real_frame(A)
    Xi = symp_inverse(X)
    base = SLIDE_UP if radius > abs(mu) else SLIDE_DOWN
    P = Xi.T @ base @ Xi
    P = 0.5 * (P + P.T)

    def gap(h: float) -> float:
        return abs(_real_frame(symp_exp(P, h) @ A)[0]) - radius

    hi = 2.0 * abs(math.log(radius / abs(mu))) + 1e-3
    for _ in range(30):
        if gap(0.0) * gap(hi) <= 0.0:
            break
        hi *= 2.0
    else:
        raise NumericalError("Real slide step could not be bracketed", details={"radius": radius, "mu": mu})
    h = brentq(gap, 0.0, hi, xtol=1e-15, rtol=1e-14)
    return Segment(duration=h, P=P), symp_exp(P, h) @ A


def _slide_segments(A: np.ndarray, radius_to: float) -> Tuple[List[Segment], np.ndarray]:
    mu = abs(_real_frame(A)[0])
    steps = max(1, int(math.ceil(abs(math.log(radius_to / mu)) / SLIDE_STEP)))
    segs: List[Segment] = []
    for k in range(1, steps + 1):
        seg, A = _slide_to(A, mu * (radius_to / mu) ** (k / steps))
        segs.append(seg)
    return segs, A


def real_slide(lam_from: float, lam_to: float) -> PositivePath:
    """Path from diag(λ_from, 1/λ_from) moving the real pair monotonically to λ_to."""
    a, b = float(lam_from), float(lam_to)
    for v in (a, b):
        if v == 0.0 or abs(abs(v) - 1.0) <= 1e-9:
            raise ValidationError("Real slides need eigenvalues off the unit circle", field="lambda",
                                  details={"lambda": v})
    a_big = a if abs(a) > 1.0 else 1.0 / a
    b_big = b if abs(b) > 1.0 else 1.0 / b
    if a_big * b_big < 0.0:
        raise InfeasibleRouteError("Real eigenvalues cannot change sign without leaving ℝ",
                                   rule="real slide stays in one component",
                                   details={"lambda_from": a, "lambda_to": b})
    A = hyperbolic(a)
    if abs(abs(a_big) - abs(b_big)) <= 1e-12 * abs(a_big):
        up, A = _slide_segments(A, abs(a_big) * math.exp(SLIDE_STEP))
        down, A = _slide_segments(A, abs(a_big))
        segs = up + down
    else:
        segs, A = _slide_segments(A, abs(b_big))
    return PositivePath(segments=tuple(segs), origin=hyperbolic(a))


def _crossing_regions(path: PositivePath) -> Tuple[Region, Region]:
    return classify(path.origin).region, classify(endpoint(path)).region


def exit_enter_via_N(lam: complex, direction, sign: Optional[int] = None,
                     tau: float = CROSSING_TAU) -> PositivePath:
    """Short path with generator Id crossing the nilpotent class at λ at time τ.

    λ on S¹ − {±1} gives a 4×4 crossing between O_U and O_C; λ = ±1 gives
    the 2×2 crossing between the circle and the real axis.
    """
    direction = Crossing(direction)
    required = -1 if direction is Crossing.ExitToC else 1
    if sign is not None and int(sign) != required:
        rule = "exit only via N-" if direction is Crossing.ExitToC else "entry only via N+"
        raise InfeasibleRouteError("Positive paths leave the circle only through N⁻ and enter only through N⁺",
                                   rule=rule, details={"lambda": complex(lam), "sign": int(sign)})
    lam = complex(lam)
    if abs(abs(lam) - 1.0) > 1e-9:
        raise ValidationError("Crossing points lie on the unit circle", field="lambda",
                              details={"lambda": lam})
    if abs(lam.imag) <= 1e-12:
        N = nilpotent_unit_block(1.0 if lam.real > 0 else -1.0, required)
    else:
        N = nilpotent_circle_block(lam if lam.imag > 0 else lam.conjugate(), required)
    I = np.eye(N.shape[0])
    path = make_path([(2.0 * tau, I)], origin=symp_exp(I, -tau) @ N)
    start, end = _crossing_regions(path)
    outside = end if direction is Crossing.ExitToC else start
    inside = start if direction is Crossing.ExitToC else end
    expected_out = Region.O_C if N.shape[0] == 4 else (Region.O_R_plus if lam.real > 0 else Region.O_R_minus)
    if not inside.on_circle or outside is not expected_out:
        raise NumericalError("Crossing leg does not cross the expected boundary",
                             details={"start": start.value, "end": end.value, "tau": tau})
    return path


def _quadruplet_generator(x: complex, margin: float) -> np.ndarray:
    a = abs(x) + margin
    return hermitian_generator(np.array([[a, np.conj(x)], [x, a]]))


def _quadruplet_step(lam: complex, lam_next: complex, margin: float = 0.02) -> PositivePath:
    """One unit-time leg from quadruplet_block(λ) whose endpoint carries the label λ_next."""
    Q = quadruplet_block(lam)
    target = np.log(lam_next)

    def label_after(x: np.ndarray) -> complex:
        vals = raw_eigenvalues(symp_exp(_quadruplet_generator(complex(x[0], x[1]), margin), 1.0) @ Q)
        return min((orbit_label(z) for z in vals), key=lambda z: abs(z - lam_next))

    def residual(x: np.ndarray) -> List[float]:
        d = np.log(label_after(x)) - target
        return [d.real, d.imag]

    x0 = target - np.log(lam)
    sol = root(residual, [x0.real, x0.imag], method="hybr", options={"xtol": 1e-14})
    err = float(np.max(np.abs(residual(sol.x))))
    if err > 1e-10:
        raise NumericalError("Quadruplet step did not reach its label",
                             details={"from": lam, "to": lam_next, "residual": err})
    return make_path([(1.0, _quadruplet_generator(complex(sol.x[0], sol.x[1]), margin))], origin=Q)


def quadruplet_move(lam_from: complex, lam_to: complex) -> PositivePath:
    """Move a quadruplet label inside O_C along the straight line in log coordinates."""
    for v in (lam_from, lam_to):
        z = complex(v)
        if abs(abs(z) - 1.0) <= 1e-9 or abs(z.imag) <= 1e-9:
            raise ValidationError("Quadruplet labels lie off the circle and the real axis",
                                  field="lambda", details={"lambda": z})
    b = _Builder(quadruplet_block(orbit_label(complex(lam_from))))
    _move_quadruplet(b, orbit_label(complex(lam_to)), LegKind.QuadrupletMove)
    return b.path


def _jordan_alpha(r0: float, disc_sign: int) -> float:
    for alpha in (1.0, -1.0):
        d = disc_derivative(real_jordan_block(r0, alpha), BIFURCATION_P)
        if d * disc_sign > 0.0:
            return alpha
    raise NumericalError("No coupling gives the requested bifurcation direction", details={"r0": r0})


def real_pair_bifurcation(r0: float = BIFURCATION_RADIUS, merge: bool = True,
                          tau: float = BIFURCATION_TAU) -> PositivePath:
    """Cross B_R at a double real pair r0 > 1: O_C → O_R⁺ (merge) or O_R⁺ → O_C (split)."""
    if r0 <= 1.0:
        raise ValidationError("Bifurcation radius must exceed 1", field="r0")
    alpha = _jordan_alpha(r0, -1 if merge else 1)
    RJ = real_jordan_block(r0, alpha)
    path = make_path([(2.0 * tau, BIFURCATION_P)], origin=symp_exp(BIFURCATION_P, -tau) @ RJ)
    start, end = _crossing_regions(path)
    want = (Region.O_C, Region.O_R_plus) if merge else (Region.O_R_plus, Region.O_C)
    if (start, end) != want:
        raise NumericalError("Bifurcation leg does not cross B_R as expected",
                             details={"start": start.value, "end": end.value})
    return path


# ── Leg gluing ──────────────────────────────────────────────────────

@dataclass
class _Block:
    role: str
    kind: str  # "circle" | "real"
    value: float  # signed angle, or the real eigenvalue with |μ| > 1


def _block_info(B: np.ndarray) -> Tuple[str, float]:
    tr = B[0, 0] + B[1, 1]
    if abs(tr) < 2.0:
        return "circle", math.atan2(B[1, 0], B[0, 0])
    mu = B[0, 0] if abs(B[0, 0]) >= abs(B[1, 1]) else B[1, 1]
    return "real", float(mu)


def _split_blocks(N: np.ndarray) -> List[np.ndarray]:
    n = N.shape[0] // 2
    mask = np.kron(np.eye(n), np.ones((2, 2)))
    if inf_norm(N * (1.0 - mask)) > 1e-9 * max(1.0, inf_norm(N)):
        raise NumericalError("Normal form is not block diagonal")
    return [N[2 * k:2 * k + 2, 2 * k:2 * k + 2] for k in range(n)]


def _match(states: Sequence[_Block], infos: Sequence[Tuple[str, float]]) -> List[int]:
    """states index for each block position."""
    cost = np.full((len(infos), len(states)), 1e6)
    for i, (kind, value) in enumerate(infos):
        for j, s in enumerate(states):
            if s.kind != kind:
                continue
            if kind == "circle":
                cost[i, j] = abs(np.exp(1j * value) - np.exp(1j * s.value))
            else:
                cost[i, j] = abs(value - s.value)
    rows, cols = linear_sum_assignment(cost)
    if cost[rows, cols].max() > 1e-5:
        raise NumericalError("Lost track of a block while routing",
                             details={"cost": float(cost[rows, cols].max())})
    out = [0] * len(infos)
    for r, c in zip(rows, cols):
        out[r] = int(c)
    return out


def _lift(theta: float) -> float:
    return theta if theta > 0.0 else theta + TWO_PI


def _gap(theta: float, target: float) -> float:
    g = (target - theta) % TWO_PI
    return g if g > 1e-12 else TWO_PI


def _circle_filler(theta: float) -> float:
    return HOLD if theta > 0.0 else min(HOLD, 0.5 * abs(theta))


@lru_cache(maxsize=8)
def _exit_angle(sign: int, tau: float = CROSSING_TAU) -> float:
    leg = exit_enter_via_N(float(sign), Crossing.ExitToC, tau=tau)
    return _block_info(normal_form(leg.origin)[1])[1]


@lru_cache(maxsize=8)
def _entry_value(sign: int, tau: float = CROSSING_TAU) -> float:
    leg = exit_enter_via_N(float(sign), Crossing.EnterFromC, tau=tau)
    return _block_info(normal_form(leg.origin)[1])[1]


def _quadruplet_label(A: np.ndarray) -> complex:
    groups = eigen_structure(A).groups
    if len(groups) != 1 or groups[0].label.imag == 0.0 or abs(abs(groups[0].label) - 1.0) < 1e-12:
        raise NumericalError("Expected a single quadruplet", details={"groups": [g.to_dict() for g in groups]})
    return groups[0].label


Action = Tuple[str, float]


class _Builder:
    """Accumulates glued legs starting from a fixed origin."""

    def __init__(self, origin: np.ndarray, short: bool = False):
        self.origin = as_even_matrix(origin).copy()
        self.end = self.origin.copy()
        self.segments: List[Segment] = []
        self.legs: List[Leg] = []
        self.short = short

    @property
    def dim(self) -> int:
        return self.origin.shape[0]

    @property
    def path(self) -> PositivePath:
        return PositivePath(segments=tuple(self.segments), origin=self.origin.copy())

    def append(self, leg: PositivePath, kind: LegKind, blocks: Tuple[int, ...] = (), **params) -> None:
        X_E, N_E = normal_form(self.end)
        X_L, N_L = normal_form(leg.origin)
        mismatch = inf_norm(N_E - N_L)
        if mismatch > GLUE_TOL * max(1.0, inf_norm(N_E)):
            raise NumericalError("Leg does not start in the conjugacy class of the current endpoint",
                                 details={"leg": kind.value, "mismatch": mismatch})
        glued = conjugate_path(leg, X_L @ symp_inverse(X_E))
        self.segments.extend(glued.segments)
        self.end = endpoint(PositivePath(segments=glued.segments, origin=self.end))
        margin = min(min_eigenvalue(s.P) for s in glued.segments)
        self.legs.append(Leg(kind=kind, blocks=tuple(blocks), params=params, margin=float(margin)))

    def hold(self, duration: float) -> None:
        I = np.eye(self.dim)
        self.segments.append(Segment(duration=duration, P=I))
        self.end = symp_exp(I, duration) @ self.end
        self.legs.append(Leg(kind=LegKind.Hold, blocks=(), params={"duration": duration}, margin=1.0))

    def rotate_from_identity(self, roles: Sequence[str], amounts: Sequence[float]) -> List[_Block]:
        legs = [rotate_block(0.0, a) for a in amounts]
        leg = legs[0] if len(legs) == 1 else direct_sum_paths(legs, 1.0)
        self.append(leg, LegKind.RotateCircle, tuple(range(len(amounts))),
                    angles=[float(a) for a in amounts])
        return [_Block(r, "circle", math.remainder(a, TWO_PI)) for r, a in zip(roles, amounts)]

    def block_leg(self, states: Sequence[_Block], actions: Dict[str, Action], kind: LegKind) -> List[_Block]:
        """One direct-sum leg: each block runs its action (or a filler) over unit time."""
        _, N_E = normal_form(self.end)
        blocks = _split_blocks(N_E)
        infos = [_block_info(B) for B in blocks]
        order = _match(states, infos)
        paths: List[PositivePath] = []
        new_states: List[_Block] = []
        touched: List[int] = []
        for i, (B, (bkind, value)) in enumerate(zip(blocks, infos)):
            st = states[order[i]]
            act = actions.get(st.role)
            if act is None:
                act = ("rot", _circle_filler(value)) if bkind == "circle" else ("slide", value)
            else:
                touched.append(i)
            p = rescale(self._block_path(bkind, value, act), 1.0)
            nk, nv = _block_info(normal_form(endpoint(p))[1])
            paths.append(p)
            new_states.append(_Block(st.role, nk, nv))
        leg = paths[0] if len(paths) == 1 else direct_sum_paths(paths, 1.0)
        self.append(leg, kind, tuple(touched),
                    actions={k: [v[0], float(v[1])] for k, v in actions.items()})
        return new_states

    def _block_path(self, kind: str, value: float, act: Action) -> PositivePath:
        op, arg = act
        if op == "rot":
            if kind != "circle":
                raise NumericalError("Rotation requested on a real block", details={"value": value})
            if self.short and ((value < 0.0 <= value + arg) or value + arg >= TWO_PI):
                raise NumericalError("Rotation would pass eigenvalue 1 on a short route",
                                     details={"theta": value, "delta": arg})
            return rotate_block(value, value + arg)
        if op == "slide":
            return real_slide(value, arg)
        sign = int(arg)
        if op == "exit":
            if kind != "circle" or abs(value - _exit_angle(sign)) > 1e-7:
                raise NumericalError("Block is not positioned for its exit", details={"theta": value})
            return exit_enter_via_N(float(sign), Crossing.ExitToC)
        if op == "enter":
            if kind != "real" or abs(value - _entry_value(sign)) > 1e-7 * abs(value):
                raise NumericalError("Block is not positioned for its entry", details={"mu": value})
            return exit_enter_via_N(float(sign), Crossing.EnterFromC)
        raise ValidationError(f"Unknown block action {op}", field="action")

    def states(self) -> List[_Block]:
        blocks = _split_blocks(normal_form(self.end)[1])
        infos = [_block_info(B) for B in blocks]
        circles = [v for k, v in infos if k == "circle"]
        reals = sorted((v for k, v in infos if k == "real"), key=lambda v: -abs(v))
        out = [_Block(f"c{i}", "circle", v) for i, v in enumerate(circles)]
        out += [_Block(role, "real", v) for role, v in zip(("ra", "rb"), reals)]
        return out


def _by_role(states: Sequence[_Block]) -> Dict[str, _Block]:
    return {s.role: s for s in states}


def _sign(x: float) -> int:
    return 1 if x > 0 else -1


# ── Route pieces ────────────────────────────────────────────────────

def _move_quadruplet(b: _Builder, lam_to: complex, kind: LegKind) -> None:
    target = np.log(lam_to)
    for _ in range(100000):
        lam = _quadruplet_label(b.end)
        d = target - np.log(lam)
        if abs(d) <= 1e-12:
            return
        step = d if abs(d) <= QUADRUPLET_STEP else d * (QUADRUPLET_STEP / abs(d))
        nxt = complex(np.exp(np.log(lam) + step))
        b.append(_quadruplet_step(lam, nxt), kind, (0, 1), label=[nxt.real, nxt.imag])
    raise NumericalError("Quadruplet move did not terminate", details={"target": lam_to})


def _crossing_angle(lam: complex) -> float:
    return min(max(float(np.angle(lam)), 0.3), math.pi - 0.3)


def _exit_to_C_from_identity(b: _Builder, theta: float) -> None:
    leg = exit_enter_via_N(np.exp(1j * theta), Crossing.ExitToC)
    _, N_O = normal_form(leg.origin)
    angles = [_block_info(B)[1] for B in _split_blocks(N_O)]
    b.rotate_from_identity(["c0", "c1"], [_lift(a) for a in angles])
    b.append(leg, LegKind.ExitViaN, (0, 1), sign="-", theta=theta)


def _enter_from_C(b: _Builder) -> None:
    theta = _crossing_angle(_quadruplet_label(b.end))
    leg = exit_enter_via_N(np.exp(1j * theta), Crossing.EnterFromC)
    _move_quadruplet(b, _quadruplet_label(leg.origin), LegKind.RayDescent)
    b.append(leg, LegKind.EnterViaN, (0, 1), sign="+", theta=theta)


def _slide_pair(b: _Builder, states: List[_Block], targets: Sequence[float],
                extra: Optional[Callable[[Dict[str, _Block]], Dict[str, Action]]] = None) -> List[_Block]:
    """Move two real blocks to exact targets without their eigenvalues meeting."""
    roles = _by_role(states)
    a, c = roles["ra"], roles["rb"]
    ta, tb = sorted(targets, key=lambda v: -abs(v))
    if _sign(a.value) != _sign(ta) or _sign(c.value) != _sign(tb):
        raise NumericalError("Real blocks would have to change sign", details={"targets": list(targets)})
    up = max(abs(a.value), abs(ta)) * math.exp(0.1)
    down = 1.0 + 0.5 * (min(abs(c.value), abs(tb)) - 1.0)
    acts = {"ra": ("slide", _sign(ta) * up), "rb": ("slide", _sign(tb) * down)}
    if extra:
        acts.update(extra(roles))
    states = b.block_leg(states, acts, LegKind.RealSlide)
    acts = {"ra": ("slide", ta), "rb": ("slide", tb)}
    if extra:
        acts.update(extra(_by_role(states)))
    return b.block_leg(states, acts, LegKind.RealSlide)


def _from_identity_blocks(b: _Builder, circles: Sequence[float], reals: Sequence[float]) -> None:
    """Id → canonical block-diagonal target (circle angles, real eigenvalues)."""
    reals = sorted(reals, key=lambda v: -abs(v))
    targets = {f"c{k}": th for k, th in enumerate(circles)}
    roles, amounts = [], []
    for role, th in targets.items():
        phi = _lift(th)
        roles.append(role)
        amounts.append(phi - (min(0.1, 0.25 * phi) if reals else 0.0))
    if reals:
        roles.append("ra")
        amounts.append(_lift(_exit_angle(_sign(reals[0]))))
    if len(reals) == 2:
        roles.append("rb")
        amounts.append(_lift(_exit_angle(_sign(reals[1]))) - 0.3)
    states = b.rotate_from_identity(roles, amounts)
    if not reals:
        return

    def circle_moves(st: Dict[str, _Block], frac: float) -> Dict[str, Action]:
        return {r: ("rot", frac * _gap(st[r].value, th)) for r, th in targets.items()}

    st = _by_role(states)
    acts = {**circle_moves(st, 0.1), "ra": ("exit", _sign(reals[0]))}
    if len(reals) == 2:
        acts["rb"] = ("rot", _gap(st["rb"].value, _exit_angle(_sign(reals[1]))))
    states = b.block_leg(states, acts, LegKind.ExitViaN)
    st = _by_role(states)
    if len(reals) == 2:
        up = max(abs(reals[0]), abs(reals[1])) * math.exp(0.1)
        acts = {**circle_moves(st, 0.1), "rb": ("exit", _sign(reals[1])),
                "ra": ("slide", _sign(reals[0]) * up)}
        states = b.block_leg(states, acts, LegKind.ExitViaN)
        st = _by_role(states)
    acts = {**circle_moves(st, 1.0), "ra": ("slide", reals[0])}
    if len(reals) == 2:
        acts["rb"] = ("slide", reals[1])
    b.block_leg(states, acts, LegKind.RealSlide)


def _enter_U_blocks(b: _Builder, allow_plus: bool) -> List[_Block]:
    states = b.states()
    st = _by_role(states)
    reals = [st[r] for r in ("ra", "rb") if r in st]
    if not allow_plus and any(r.value > 0 for r in reals):
        raise ValidationError("A short path cannot end with this real spectrum", field="path",
                              details={"reals": [r.value for r in reals]})
    if len(reals) == 2:
        a, c = reals
        acts = {"rb": ("slide", _entry_value(_sign(c.value))),
                "ra": ("slide", _sign(a.value) * abs(a.value) * math.exp(0.05))}
        states = b.block_leg(states, acts, LegKind.RealSlide)
        states = b.block_leg(states, {"rb": ("enter", _sign(c.value)),
                                      "ra": ("slide", _entry_value(_sign(a.value)))}, LegKind.EnterViaN)
        states = b.block_leg(states, {"ra": ("enter", _sign(a.value))}, LegKind.EnterViaN)
    elif len(reals) == 1:
        a = reals[0]
        states = b.block_leg(states, {"ra": ("slide", _entry_value(_sign(a.value)))}, LegKind.RealSlide)
        states = b.block_leg(states, {"ra": ("enter", _sign(a.value))}, LegKind.EnterViaN)
    return states


def _settle(b: _Builder) -> Region:
    """Leave boundary strata with short Id holds."""
    d = HOLD
    for _ in range(6):
        region = classify(b.end).region
        if region.is_open:
            return region
        b.hold(d)
        d *= 0.5
    region = classify(b.end).region
    if not region.is_open:
        raise NumericalError("Could not leave the boundary stratum", details={"region": region.value})
    return region


def _enter_U(b: _Builder, allow_plus: bool) -> None:
    region = _settle(b)
    if region.on_circle:
        return
    if region is Region.O_C:
        _enter_from_C(b)
        return
    if b.dim == 4 and region is Region.O_R_plus and not allow_plus:
        reals = [s.value for s in b.states()]
        if all(v > 0 for v in reals):
            split = real_pair_bifurcation(merge=False)
            s_vals = [_block_info(B)[1] for B in _split_blocks(normal_form(split.origin)[1])]
            _slide_pair(b, b.states(), s_vals)
            b.append(split, LegKind.MergeRealPairs, (0, 1), direction="split")
            _enter_from_C(b)
            return
    _enter_U_blocks(b, allow_plus)


def _rotate_home(b: _Builder) -> None:
    states = b.states()
    acts = {s.role: ("rot", _gap(s.value, 0.0)) for s in states}
    b.block_leg(states, acts, LegKind.RotateCircle)


# ── Planned routes ──────────────────────────────────────────────────

def _check_planner_dim(A: np.ndarray) -> None:
    if A.shape[0] > 4:
        raise UnsupportedError("Route planning is available for 2n ≤ 4", details={"dim": A.shape[0]})


def _require_symplectic(A, name: str) -> np.ndarray:
    M = as_even_matrix(A)
    if not is_symplectic(M, 1e-8):
        raise ValidationError(f"{name} is not symplectic", field=name)
    return M


def _generic_stand_in(C: np.ndarray) -> Tuple[np.ndarray, float]:
    """C itself when open, else e^{−δJ}·C in an open stratum with δ > 0."""
    if classify(C).region.is_open:
        return C, 0.0
    d = HOLD
    for _ in range(8):
        C0 = symp_exp(np.eye(C.shape[0]), -d) @ C
        if classify(C0).region.is_open:
            return C0, d
        d *= 0.5
    raise NumericalError("No generic stand-in found near the target", details={"region": classify(C).region.value})


def _canonical_from_identity(C: np.ndarray, short: bool) -> _Builder:
    """Route from Id to a matrix with the normal form of C (open stratum)."""
    dim = C.shape[0]
    b = _Builder(np.eye(dim), short=short)
    region = classify(C).region
    if region is Region.O_C:
        lam_T = _quadruplet_label(C)
        _exit_to_C_from_identity(b, _crossing_angle(lam_T))
        _move_quadruplet(b, lam_T, LegKind.RayAscent)
        return b
    infos = [_block_info(B) for B in _split_blocks(normal_form(C)[1])]
    circles = [v for k, v in infos if k == "circle"]
    reals = [v for k, v in infos if k == "real"]
    if short and dim == 4 and len(reals) == 2 and all(v > 0 for v in reals):
        merge = real_pair_bifurcation(merge=True)
        _exit_to_C_from_identity(b, 0.5)
        _move_quadruplet(b, _quadruplet_label(merge.origin), LegKind.RayAscent)
        b.append(merge, LegKind.MergeRealPairs, (0, 1), direction="merge")
        _slide_pair(b, b.states(), reals)
        return b
    _from_identity_blocks(b, circles, reals)
    return b


def _lift_onto(b: _Builder, C: np.ndarray) -> PositivePath:
    """Conjugate a canonical route from Id so that it ends exactly at C."""
    E = b.end
    X_E, N_E = normal_form(E)
    X_C, N_C = normal_form(C)
    mismatch = inf_norm(N_E - N_C)
    if mismatch > GLUE_TOL * max(1.0, inf_norm(N_C)):
        raise NumericalError("Route endpoint is not conjugate to the target", details={"mismatch": mismatch})
    lifted = conjugate_path(b.path, X_E @ symp_inverse(X_C))
    lifted = PositivePath(segments=lifted.segments, origin=np.eye(C.shape[0]))
    return land_exactly(lifted, C)


def route_from_identity(C, short: bool = False) -> Route:
    """Positive path from Id to C; short=True keeps it away from eigenvalue 1."""
    C = _require_symplectic(C, "target")
    _check_planner_dim(C)
    C0, delta = _generic_stand_in(C)
    b = _canonical_from_identity(C0, short)
    path = _lift_onto(b, C0)
    legs = list(b.legs)
    if delta > 0.0:
        path = PositivePath(segments=path.segments + (Segment(duration=delta, P=np.eye(C.shape[0])),),
                            origin=path.origin)
        path = land_exactly(path, C)
        legs.append(Leg(kind=LegKind.Hold, blocks=(), params={"duration": delta}, margin=1.0))
    legs.append(Leg(kind=LegKind.Correction, blocks=(), params={}, margin=float(verify_positive(path).margin)))
    return Route(legs=legs, path=subdivide(path, 0.2))


def path_from_identity(C, short: bool = False) -> PositivePath:
    return route_from_identity(C, short).path


def route_to_identity(A) -> Route:
    """Enter O_U through legal crossings, then wind every circle block up to Id."""
    A = _require_symplectic(A, "origin")
    _check_planner_dim(A)
    b = _Builder(A)
    _enter_U(b, allow_plus=True)
    _rotate_home(b)
    path = land_exactly(b.path, np.eye(A.shape[0]))
    return Route(legs=b.legs, path=subdivide(path, 0.2))


def path_to_identity(A) -> PositivePath:
    return route_to_identity(A).path


def audit_route(path: PositivePath, samples: int = 128) -> None:
    """Raise when the tracked itinerary crosses a nilpotent boundary against its flavor."""
    if path.dim > 4:
        return
    traj = eigen_trajectory(path, samples)
    bad = legality_violations(traj.events, path.dim // 2)
    if bad:
        raise NumericalError("Constructed route crosses a boundary illegally", details={"violations": bad})
    log_metrics("ROUTE_AUDIT", {"events": len(traj.events), "samples": samples})


def _log_route(name: str, route: Route) -> None:
    margin = verify_positive(route.path).margin
    log_json("ROUTE", name, legs=route.describe(), margin=margin,
             segments=len(route.path.segments), duration=route.path.duration)


def connect_route(A, B, blend_width: float = 1e-3, audit: bool = True,
                  audit_samples: int = 128) -> Route:
    A = _require_symplectic(A, "A")
    B = _require_symplectic(B, "B")
    ensure_same_dim(A, B, "connect")
    _check_planner_dim(A)
    I = np.eye(A.shape[0])
    pieces: List[PositivePath] = []
    legs: List[Leg] = []
    if inf_norm(A - I) > 1e-12:
        first = route_to_identity(A)
        pieces.append(first.path)
        legs.extend(first.legs)
    second = route_from_identity(B, short=False)
    pieces.append(second.path)
    legs.extend(second.legs)
    path = smooth_concat(pieces, blend_width=blend_width) if len(pieces) > 1 else pieces[0]
    path = land_exactly(path, B)
    residual = inf_norm(endpoint(path) - B)
    if residual > 1e-6 * max(1.0, inf_norm(B)):
        raise NumericalError("Connected path misses its endpoint", details={"residual": residual})
    if not verify_positive(path).positive:
        raise NumericalError("Connected path lost positivity", details={"margin": verify_positive(path).margin})
    if audit:
        audit_route(path, audit_samples)
    route = Route(legs=legs, path=path)
    _log_route("connect", route)
    return route


def connect(A, B, blend_width: float = 1e-3, audit: bool = True) -> PositivePath:
    """Certified positive path from A to B (2n ≤ 4)."""
    return connect_route(A, B, blend_width, audit).path


def parity_count(B, tol: float = 1e-8) -> int:
    """Number of real eigenvalues λ > 1, with multiplicity."""
    vals = raw_eigenvalues(as_even_matrix(B))
    return int(sum(1 for z in vals if abs(z.imag) <= tol and z.real > 1.0 + tol))


def _in_S1(B: np.ndarray, tol: float = 1e-8) -> bool:
    return bool(np.min(np.abs(raw_eigenvalues(B) - 1.0)) <= tol)


def short_route(B, samples: int = 512, audit: bool = True, audit_samples: int = 128) -> Route:
    B = _require_symplectic(B, "target")
    _check_planner_dim(B)
    if _in_S1(B):
        raise ValidationError("Short paths never reach matrices with eigenvalue 1", field="target")
    count = parity_count(B)
    if count % 2:
        raise InfeasibleRouteError(
            "A short positive path from Id ends at B only if B has an even number of real eigenvalues > 1",
            rule="short-path parity", details={"real_eigenvalues_above_one": count})
    route = route_from_identity(B, short=True)
    path = route.path
    if not verify_positive(path).positive:
        raise NumericalError("Short route lost positivity", details={"margin": verify_positive(path).margin})
    if not is_short(path, samples):
        raise NumericalError("Constructed route is not short")
    if audit:
        audit_route(path, audit_samples)
    _log_route("short_path_to", route)
    return route


def short_path_to(B, samples: int = 512, audit: bool = True) -> PositivePath:
    return short_route(B, samples, audit).path


def extension_route(path: PositivePath, samples: int = 512, audit: bool = True,
                    audit_samples: int = 128) -> Route:
    if path.dim > 4:
        raise UnsupportedError("Route planning is available for 2n ≤ 4", details={"dim": path.dim})
    if not verify_positive(path).positive:
        raise ValidationError("Only positive paths can be extended", field="path")
    if not is_short(path, samples):
        raise ValidationError("Only short paths can be extended into O_U", field="path")
    E = endpoint(path)
    if classify(E).region.on_circle:
        cap = Segment(duration=1e-6 * path.duration, P=np.eye(path.dim))
        out = PositivePath(segments=path.segments + (cap,), origin=path.origin)
        return Route(legs=[Leg(kind=LegKind.Hold, blocks=(), params={"duration": cap.duration}, margin=1.0)],
                     path=out)
    b = _Builder(E, short=True)
    _enter_U(b, allow_plus=False)
    out = concat([path, subdivide(b.path, 0.2)], tol=1e-8)
    if not classify(endpoint(out)).region.on_circle:
        raise NumericalError("Extension does not end in O_U",
                             details={"region": classify(endpoint(out)).region.value})
    if not is_short(out, samples):
        raise NumericalError("Extension is not short")
    if audit:
        audit_route(out, audit_samples)
    route = Route(legs=b.legs, path=out)
    _log_route("extend_to_U", route)
    return route


def extend_to_U(path: PositivePath, samples: int = 512, audit: bool = True) -> PositivePath:
    """Extend a short positive path so that it stays short and ends in O_U."""
    return extension_route(path, samples, audit).path
