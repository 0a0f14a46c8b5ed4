"""Random positive paths and test matrices for the property suites."""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from posipath.core.exceptions import NumericalError
from posipath.core.symplectic import conjugate, direct_sum, random_symplectic, rotation
from posipath.models.domain import PositivePath, Segment
from posipath.services.index import is_short
from posipath.services.positive_paths import endpoint, generator_mass
from posipath.utils.numerics import random_positive_definite


def random_positive_path(rng: np.random.Generator, n: int, segments: int = 4,
                         mass: Optional[float] = None, floor: float = 0.1) -> PositivePath:
    """Path from Id with random positive definite generators; mass = Σ d_k·‖P_k‖₂ when given."""
    dim = 2 * n
    durations = rng.uniform(0.2, 1.0, size=segments)
    durations /= durations.sum()
    segs = [Segment(duration=float(d), P=random_positive_definite(rng, dim, floor)) for d in durations]
    path = PositivePath(segments=tuple(segs), origin=np.eye(dim))
    if mass is not None:
        c = mass / generator_mass(path)
        path = PositivePath(segments=tuple(Segment(duration=s.duration, P=c * s.P) for s in segs),
                            origin=path.origin)
    return path


def random_short_path(rng: np.random.Generator, n: int, segments: int = 4,
                      max_mass: float = 1.8 * math.pi, samples: int = 256,
                      max_tries: int = 200) -> PositivePath:
    """Rejection sample until the path is short."""
    for _ in range(max_tries):
        path = random_positive_path(rng, n, segments, mass=float(rng.uniform(0.3, max_mass)))
        if is_short(path, samples):
            return path
    raise NumericalError("No short path found", details={"tries": max_tries, "n": n})


def random_stable_path(rng: np.random.Generator, n: int, short: bool, segments: int = 4,
                       max_mass: float = 4.0 * math.pi, samples: int = 256,
                       max_tries: int = 200) -> PositivePath:
    """Positive path whose endpoint has its whole spectrum on S¹ (and short when asked)."""
    from posipath.services.stability import is_stable

    for _ in range(max_tries):
        if short:
            path = random_short_path(rng, n, segments, samples=samples)
        else:
            path = random_positive_path(rng, n, segments, mass=float(rng.uniform(0.3, max_mass)))
        if is_stable(endpoint(path)):
            return path
    raise NumericalError("No stable endpoint found", details={"tries": max_tries, "n": n})


def _conj(rng: np.random.Generator, A: np.ndarray, spread: float) -> np.ndarray:
    return conjugate(A, random_symplectic(rng, A.shape[0] // 2, spread))


def stable_test_matrices(rng: np.random.Generator, count: int = 50,
                         spread: float = 0.3) -> List[Tuple[np.ndarray, bool]]:
    """(matrix, strongly stable) pairs in Sp(4), alternating the two kinds."""
    out: List[Tuple[np.ndarray, bool]] = []
    for k in range(count):
        if k % 2 == 0:
            a, b = rng.uniform(0.3, math.pi - 0.3, size=2)
            A = direct_sum(rotation(a), rotation(b))
            out.append((_conj(rng, A, spread), True))
            continue
        theta = float(rng.uniform(0.3, math.pi - 0.3))
        choice = (k // 2) % 4
        if choice == 0:
            A = -np.eye(4)
        elif choice == 1:
            A = direct_sum(rotation(theta), rotation(-theta))
        elif choice == 2:
            A = np.eye(4)
        else:
            A = direct_sum(rotation(theta), -np.eye(2))
        out.append((_conj(rng, A, spread), False))
    return out
