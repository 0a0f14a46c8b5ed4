"""
Acceptance suite run by the `selftest` verb.

Each check raises AssertionError with a readable message on failure. The
runner records one TestResult per check and prints a summary; sample sizes
scale with `fraction` so the pytest suite can run the same checks smaller.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from posipath.core.exceptions import InfeasibleRouteError
from posipath.core.logger import log_json, log_performance
from posipath.core.settings import Settings
from posipath.core.spectral import krein_form, splitting_number
from posipath.core.strata import classify, disc_derivative, quadruplet_block, real_jordan_block, sym_funcs
from posipath.core.symplectic import direct_sum, hyperbolic, symp_exp
from posipath.models.domain import PositivePath, Region
from posipath.services import sampling
from posipath.services.index import conley_zehnder_index, excursions, is_short
from posipath.services.positive_paths import conservation_residual, endpoint, make_path, verify_positive
from posipath.services.stability import (
    critical_mu,
    is_strongly_stable,
    make_system,
    monodromy,
    perturbation_stable,
)
from posipath.services.steering import BIFURCATION_P, extend_to_U, short_path_to
from posipath.services.tracking import (
    eigen_trajectory,
    krein_monotonicity_violations,
    leaving_circle_violations,
    legality_violations,
)


@dataclass
class TestResult:
    """Stores one check outcome for reporting."""
    name: str
    passed: bool
    message: str = ""
    duration: float = 0.0


@dataclass
class TestRunner:
    """Runs checks in order and keeps a tally."""
    results: List[TestResult] = field(default_factory=list)
    verbose: bool = True

    @property
    def passed(self) -> int:
        return sum(1 for r in self.results if r.passed)

    @property
    def failed(self) -> int:
        return sum(1 for r in self.results if not r.passed)

    def run_test(self, name: str, test_func: Callable[[], None]) -> TestResult:
        if self.verbose:
            print(f"\n{'=' * 80}\nRunning: {name}\n{'=' * 80}")
        start = time.time()
        try:
            test_func()
            result = TestResult(name, True, "Passed", time.time() - start)
        except AssertionError as e:
            result = TestResult(name, False, str(e) or "Assertion failed", time.time() - start)
        except Exception as e:
            result = TestResult(name, False, f"{type(e).__name__}: {e}", time.time() - start)
        self.results.append(result)
        if self.verbose:
            mark = "PASSED" if result.passed else "FAILED"
            tail = "" if result.passed else f": {result.message}"
            print(f"{mark} in {result.duration:.2f}s{tail}")
        log_performance("SELFTEST", result.duration * 1000.0, check=name, passed=result.passed)
        return result

    def print_summary(self) -> bool:
        total = len(self.results)
        print(f"\n{'=' * 80}\nSELFTEST SUMMARY\n{'=' * 80}")
        print(f"\nTotal: {total}")
        print(f"Passed: {self.passed} ({100 * self.passed // total if total > 0 else 0}%)")
        print(f"Failed: {self.failed} ({100 * self.failed // total if total > 0 else 0}%)")
        if self.failed:
            print("\nFailed checks:")
            for r in self.results:
                if not r.passed:
                    print(f"  - {r.name}: {r.message}")
        print(f"\n{'=' * 80}")
        return self.failed == 0


def _n(full: int, fraction: float) -> int:
    return max(1, int(round(full * fraction)))


# ── Checks ──────────────────────────────────────────────────────────

def check_krein_form() -> None:
    v = np.array([1.0, -1.0j])
    beta = krein_form(v, v)
    assert abs(beta - 2.0) <= 1e-12, f"β((1,-i),(1,-i)) = {beta}, expected 2"
    A = symp_exp(np.eye(2), math.pi / 2)
    assert splitting_number(A, 1j) == 1, "splitting at i should be +1"
    assert splitting_number(A, -1j) == -1, "splitting at -i should be -1"


def _disc_fd(A: np.ndarray, P: np.ndarray, h: float = 1e-5) -> float:
    JP = np.kron(np.eye(2), np.array([[0.0, -1.0], [1.0, 0.0]])) @ P
    I = np.eye(4)
    plus = sym_funcs((I + h * JP) @ A).disc
    minus = sym_funcs((I - h * JP) @ A).disc
    return (plus - minus) / (2.0 * h)


def check_real_pair_bifurcation() -> None:
    for alpha in (-1.0, 1.0):
        A = real_jordan_block(2.0, alpha)
        fd = _disc_fd(A, BIFURCATION_P)
        assert abs(fd - (-2.25 * alpha)) <= 1e-4, f"alpha={alpha}: finite difference {fd}"
        assert abs(disc_derivative(A, BIFURCATION_P) - fd) <= 1e-4, "analytic derivative disagrees"
        path = make_path([(0.01, BIFURCATION_P)], origin=A)
        traj = eigen_trajectory(path, 64)
        regions = [e.label.region for e in traj.itinerary]
        want = Region.O_C if alpha < 0 else Region.O_R_plus
        assert want in regions, f"alpha={alpha}: itinerary {[r.value for r in regions]} never enters {want.value}"


def check_parity_gate() -> None:
    try:
        short_path_to(hyperbolic(2.0))
    except InfeasibleRouteError as e:
        assert e.details.get("rule") == "short-path parity", f"wrong rule {e.details}"
    else:
        raise AssertionError("diag(2, 1/2) should fail the parity gate")
    B = direct_sum(hyperbolic(2.0), hyperbolic(3.0))
    path = short_path_to(B)
    cert = verify_positive(path)
    assert cert.positive and cert.margin > 0.0, f"margin {cert.margin}"
    assert is_short(path), "route to diag(2,1/2,3,1/3) is not short"
    res = float(np.max(np.abs(endpoint(path) - B)))
    assert res <= 1e-6, f"endpoint residual {res}"


def _short_path_into(rng: np.random.Generator, region: Region) -> PositivePath:
    targets = {
        Region.O_C: lambda: _quadruplet(rng),
        Region.O_R_minus: lambda: direct_sum(hyperbolic(-float(rng.uniform(1.3, 3.0))),
                                             hyperbolic(-float(rng.uniform(1.3, 3.0)))),
        Region.O_UR: lambda: direct_sum(symp_exp(np.eye(2), float(rng.uniform(0.3, 2.5))),
                                        hyperbolic(-float(rng.uniform(1.3, 3.0)))),
    }
    B = sampling._conj(rng, targets[region](), 0.2)
    return short_path_to(B)


def _quadruplet(rng: np.random.Generator) -> np.ndarray:
    r = float(rng.uniform(1.2, 2.0))
    phi = float(rng.uniform(0.4, math.pi - 0.4))
    return quadruplet_block(r * np.exp(1j * phi))


def check_extension(rng: np.random.Generator, per_region: int) -> None:
    failures = []
    for region in (Region.O_C, Region.O_R_minus, Region.O_UR):
        for k in range(per_region):
            path = _short_path_into(rng, region)
            out = extend_to_U(path)
            final = classify(endpoint(out)).region
            if not final.on_circle or not is_short(out):
                failures.append({"region": region.value, "k": k, "final": final.value})
    assert not failures, f"extension failures: {failures[:5]}"


def check_n1_suite(rng: np.random.Generator, count: int) -> None:
    bad = []
    for k in range(count):
        path = sampling.random_short_path(rng, 1)
        traj = eigen_trajectory(path, 256)
        first = traj.itinerary[0].label.region if traj.itinerary else None
        problems = []
        if krein_monotonicity_violations(traj):
            problems.append("theta not monotone")
        if first is not Region.O_U_plus:
            problems.append(f"first stratum {first}")
        if any(e.label.region is Region.O_R_plus for e in traj.itinerary):
            problems.append("visits O_R_plus")
        if legality_violations(traj.events, 1):
            problems.append("illegal crossing")
        if problems:
            bad.append((k, problems))
    assert not bad, f"n=1 violations: {bad[:5]}"


def check_krein_monotonicity(rng: np.random.Generator, count: int) -> None:
    bad = []
    for k in range(count):
        path = sampling.random_positive_path(rng, 2, mass=float(rng.uniform(0.5, 4.0 * math.pi)))
        traj = eigen_trajectory(path, 256)
        v1 = krein_monotonicity_violations(traj)
        v2 = leaving_circle_violations(traj)
        if v1 or v2:
            bad.append((k, len(v1), len(v2)))
    assert not bad, f"monotonicity / departure violations: {bad[:5]}"


def check_strong_stability(rng: np.random.Generator, count: int, trials: int) -> None:
    bad = []
    for k, (A, strong) in enumerate(sampling.stable_test_matrices(rng, count)):
        flagged = is_strongly_stable(A)
        if flagged != strong:
            bad.append((k, "classification"))
            continue
        if strong:
            ok, _ = perturbation_stable(A, trials, 1e-4, rng)
            if not ok:
                bad.append((k, "perturbed out of stability"))
        else:
            ok, _ = perturbation_stable(A, trials, 1e-3, rng)
            if ok:
                bad.append((k, "no destabilizing perturbation"))
    assert not bad, f"strong stability disagreements: {bad[:5]}"


def check_critical_mu() -> None:
    for scale, expected in ((1.0, math.pi), (2.0, math.pi / 2)):
        sys = make_system([(1.0, scale * np.eye(2))])
        mu0 = critical_mu(sys, 10.0)
        assert abs(mu0 - expected) <= 1e-8, f"mu0={mu0}, expected {expected}"
        for frac in (0.1, 0.5, 0.9):
            assert is_strongly_stable(monodromy(sys, frac * mu0)), f"not strongly stable at {frac}·mu0"


def check_excursions(rng: np.random.Generator, count: int) -> None:
    bad = []
    for k in range(count):
        path = sampling.random_stable_path(rng, 2, short=True)
        e = excursions(path, 1.0, samples=256)
        if e > 1:
            bad.append(("short", k, e))
    for k in range(count):
        path = sampling.random_stable_path(rng, 2, short=False)
        e = excursions(path, 1.0, samples=256)
        i = conley_zehnder_index(path, 256)
        if e > i + 1:
            bad.append(("general", k, e, i))
    assert not bad, f"excursion bound violations: {bad[:5]}"


def check_conservation(rng: np.random.Generator, count: int) -> None:
    worst = 0.0
    for _ in range(count):
        worst = max(worst, conservation_residual(sampling.random_positive_path(rng, 2, mass=6.0)))
    assert worst <= 1e-8, f"symplecticity residual {worst}"
    rot = make_path([(2.0 * math.pi + 0.5, np.eye(2))])
    cz = conley_zehnder_index(rot)
    assert cz == 2, f"CZ index of the rotation is {cz}, expected 2"


def build_checks(rng: np.random.Generator, fraction: float = 1.0) -> Dict[str, Callable[[], None]]:
    return {
        "krein form and splitting numbers": check_krein_form,
        "real pair bifurcation": check_real_pair_bifurcation,
        "short-path parity gate": check_parity_gate,
        "extension into O_U": lambda: check_extension(rng, _n(25, fraction)),
        "n=1 short path suite": lambda: check_n1_suite(rng, _n(300, fraction)),
        "Krein monotonicity in Sp(4)": lambda: check_krein_monotonicity(rng, _n(200, fraction)),
        "strong stability vs sampling": lambda: check_strong_stability(rng, _n(50, fraction),
                                                                       _n(1000, fraction)),
        "critical mu": check_critical_mu,
        "excursion bounds": lambda: check_excursions(rng, _n(200, fraction)),
        "conservation and rotation index": lambda: check_conservation(rng, _n(20, fraction)),
    }


def run_selftest(settings: Optional[Settings] = None, fraction: float = 1.0,
                 only: Optional[List[str]] = None, verbose: bool = True) -> TestRunner:
    settings = settings or Settings.load()
    rng = np.random.default_rng(settings.seed)
    runner = TestRunner(verbose=verbose)
    for name, fn in build_checks(rng, fraction).items():
        if only and not any(o.lower() in name.lower() for o in only):
            continue
        runner.run_test(name, fn)
    log_json("SELFTEST", "finished", passed=runner.passed, failed=runner.failed, fraction=fraction)
    return runner
