from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np


class Region(str, Enum):
    O_U_plus = "O_U_plus"
    O_U_minus = "O_U_minus"
    O_U = "O_U"
    O_C = "O_C"
    O_R_plus = "O_R_plus"
    O_R_minus = "O_R_minus"
    O_UR = "O_UR"
    B_U = "B_U"
    B_R = "B_R"
    B_UR = "B_UR"
    B_RU = "B_RU"
    AtPlusOne = "AtPlusOne"
    AtMinusOne = "AtMinusOne"
    NonGeneric = "NonGeneric"

    @property
    def is_open(self) -> bool:
        return self in OPEN_REGIONS

    @property
    def on_circle(self) -> bool:
        return self in (Region.O_U, Region.O_U_plus, Region.O_U_minus)


OPEN_REGIONS = frozenset({
    Region.O_U_plus, Region.O_U_minus, Region.O_U, Region.O_C,
    Region.O_R_plus, Region.O_R_minus, Region.O_UR,
})


class EigenKind(str, Enum):
    CirclePair = "CirclePair"
    RealPair = "RealPair"
    Quadruplet = "Quadruplet"
    PlusOne = "PlusOne"
    MinusOne = "MinusOne"

    @property
    def on_circle(self) -> bool:
        return self in (EigenKind.CirclePair, EigenKind.PlusOne, EigenKind.MinusOne)


@dataclass(frozen=True, eq=False)
class SympMatrix:
    """Real 2n×2n matrix certified symplectic at construction (see core.symplectic.certify)."""
    rows: np.ndarray
    residual: float = 0.0

    @property
    def dim(self) -> int:
        return int(self.rows.shape[0])

    @property
    def n(self) -> int:
        return self.dim // 2


@dataclass(frozen=True, eq=False)
class Generator:
    """Symmetric generator P of the flow x ↦ e^{JPt}x; definiteness is queried, not enforced."""
    P: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.P.shape[0])


@dataclass
class EigenGroup:
    label: complex
    kind: EigenKind
    mult: int
    diagonalizable: bool = True
    splitting: Optional[int] = None  # None off the circle ("n/a")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_re": float(self.label.real),
            "lambda_im": float(self.label.imag),
            "kind": self.kind.value,
            "mult": int(self.mult),
            "diagonalizable": bool(self.diagonalizable),
            "splitting": "n/a" if self.splitting is None else int(self.splitting),
        }


@dataclass
class EigenStructure:
    groups: List[EigenGroup]
    residual: float = 0.0
    values: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=complex))  # snapped full spectrum

    def to_dict(self) -> Dict[str, Any]:
        return {"groups": [g.to_dict() for g in self.groups], "residual": float(self.residual)}


@dataclass
class StratumLabel:
    region: Region
    nilpotent_sign: Optional[int] = None  # +1 | -1 | None
    labels: List[complex] = field(default_factory=list)

    def key(self) -> Tuple[str, Optional[int]]:
        return (self.region.value, self.nilpotent_sign)

    def to_dict(self) -> Dict[str, Any]:
        sign = None if self.nilpotent_sign is None else ("+" if self.nilpotent_sign > 0 else "-")
        return {
            "region": self.region.value,
            "nilpotent_sign": sign,
            "labels": [{"re": float(z.real), "im": float(z.imag)} for z in self.labels],
        }


@dataclass
class SymFuncs:
    sigma1: float
    sigma2: float
    disc: float


@dataclass(frozen=True, eq=False)
class Segment:
    duration: float
    P: np.ndarray


@dataclass(frozen=True, eq=False)
class PositivePath:
    """Piecewise constant-generator path; value(t) = e^{JP_k τ}…e^{JP_1 d_1}·origin."""
    segments: Tuple[Segment, ...]
    origin: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.origin.shape[0])

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @property
    def breakpoints(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([s.duration for s in self.segments])])


@dataclass(frozen=True, eq=False)
class SampledPath:
    """Externally supplied path known only at sample times."""
    times: np.ndarray
    matrices: np.ndarray  # shape (k, 2n, 2n)

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])


@dataclass
class PositivityCertificate:
    positive: bool
    margin: float


@dataclass
class ItineraryEntry:
    t_start: float
    t_end: float
    label: StratumLabel

    def to_dict(self) -> Dict[str, Any]:
        return {"t_start": self.t_start, "t_end": self.t_end, **self.label.to_dict()}


@dataclass
class BoundaryEvent:
    t: float
    label: StratumLabel
    before: Region
    after: Region


@dataclass
class Trajectory:
    times: np.ndarray
    values: np.ndarray  # (samples, 2n) complex, columns are tracked eigenvalues
    kinds: List[List[str]] = field(default_factory=list)
    splittings: List[List[Optional[int]]] = field(default_factory=list)
    labels: List[Optional[StratumLabel]] = field(default_factory=list)
    itinerary: List[ItineraryEntry] = field(default_factory=list)
    events: List[BoundaryEvent] = field(default_factory=list)
    refinements: int = 0


@dataclass
class PathDiagnostics:
    positive: bool
    margin: float
    short: bool
    cz_index: int
    excursions: Optional[int] = None
    complexity: Optional[int] = None
    itinerary: List[ItineraryEntry] = field(default_factory=list)
    crossing_times: List[float] = field(default_factory=list)
    tangencies: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "positive": self.positive,
            "margin": self.margin,
            "short": self.short,
            "cz_index": self.cz_index,
            "excursions": self.excursions,
            "complexity": self.complexity,
            "crossing_times": list(self.crossing_times),
            "tangencies": list(self.tangencies),
            "itinerary": [e.to_dict() for e in self.itinerary],
        }


class LegKind(str, Enum):
    RotateCircle = "RotateCircle"
    RayDescent = "RayDescent"
    RayAscent = "RayAscent"
    QuadrupletMove = "QuadrupletMove"
    RealSlide = "RealSlide"
    MergeRealPairs = "MergeRealPairs"
    EnterViaN = "EnterViaN"
    ExitViaN = "ExitViaN"
    Hold = "Hold"
    Correction = "Correction"


@dataclass
class Leg:
    kind: LegKind
    blocks: Tuple[int, ...]
    params: Dict[str, Any] = field(default_factory=dict)
    margin: float = 0.0


@dataclass
class Route:
    legs: List[Leg] = field(default_factory=list)
    path: Optional[PositivePath] = None

    def describe(self) -> List[Dict[str, Any]]:
        return [{"kind": leg.kind.value, "blocks": list(leg.blocks), **leg.params} for leg in self.legs]


@dataclass(frozen=True, eq=False)
class PeriodicSystem:
    segments: Tuple[Segment, ...]

    @property
    def dim(self) -> int:
        return int(self.segments[0].P.shape[0])


class Crossing(str, Enum):
    ExitToC = "exit"
    EnterFromC = "enter"
