#!/usr/bin/env python3
"""
Tests for route construction: block primitives, boundary crossings,
connect, short paths and extensions into O_U.

Usage:
    python -m pytest tests/test_steering.py -v
"""
import cmath
import math

import numpy as np
import pytest

from posipath.core.exceptions import DimensionError, InfeasibleRouteError, UnsupportedError, ValidationError
from posipath.core.spectral import raw_eigenvalues
from posipath.core.strata import classify, quadruplet_block
from posipath.core.symplectic import conjugate, direct_sum, hyperbolic, random_symplectic, rotation
from posipath.models.domain import LegKind, Region
from posipath.services.index import is_short
from posipath.services.tracking import eigen_trajectory, legality_violations
from posipath.services.positive_paths import endpoint, make_path, verify_positive
from posipath.services.steering import (
    connect,
    connect_route,
    exit_enter_via_N,
    extend_to_U,
    parity_count,
    path_from_identity,
    path_to_identity,
    quadruplet_move,
    real_pair_bifurcation,
    real_slide,
    rotate_block,
    short_path_to,
)


def _residual(path, B):
    return float(np.max(np.abs(endpoint(path) - B)))


def _real_spectrum(A):
    return sorted(z.real for z in raw_eigenvalues(A))


# ============================================================================
# Primitives
# ============================================================================

class TestBlockPrimitives:
    def test_rotate_block(self):
        path = rotate_block(0.0, 1.0)
        assert np.allclose(endpoint(path), rotation(1.0), atol=1e-13)
        assert path.duration == pytest.approx(1.0)

    def test_rotate_block_only_forward(self):
        with pytest.raises(InfeasibleRouteError) as info:
            rotate_block(1.0, 0.5)
        assert info.value.details["rule"] == "anticlockwise rotation"

    def test_real_slide_up(self):
        path = real_slide(2.0, 3.0)
        assert verify_positive(path).positive
        assert np.allclose(_real_spectrum(endpoint(path)), [1.0 / 3.0, 3.0], atol=1e-10)

    def test_real_slide_negative_component(self):
        path = real_slide(-2.0, -0.25)
        assert verify_positive(path).positive
        assert np.allclose(_real_spectrum(endpoint(path)), [-4.0, -0.25], atol=1e-10)

    def test_real_slide_round_trip(self):
        path = real_slide(2.0, 2.0)
        assert path.duration > 0.0, "positive paths cannot stand still"
        assert np.allclose(_real_spectrum(endpoint(path)), [0.5, 2.0], atol=1e-10)

    def test_real_slide_cannot_change_sign(self):
        with pytest.raises(InfeasibleRouteError) as info:
            real_slide(2.0, -3.0)
        assert info.value.rule == "real slide stays in one component"

    def test_real_slide_rejects_circle(self):
        with pytest.raises(ValidationError):
            real_slide(2.0, 1.0)


class TestCrossings:
    def test_exit_into_C(self):
        path = exit_enter_via_N(cmath.exp(1.0j), "exit")
        assert classify(path.origin).region is Region.O_U
        assert classify(endpoint(path)).region is Region.O_C
        assert verify_positive(path).positive

    def test_enter_from_real_axis_at_minus_one(self):
        path = exit_enter_via_N(-1.0, "enter")
        assert classify(path.origin).region is Region.O_R_minus
        assert classify(endpoint(path)).region.on_circle

    def test_wrong_flavor_is_infeasible(self):
        with pytest.raises(InfeasibleRouteError) as info:
            exit_enter_via_N(cmath.exp(1.0j), "exit", sign=1)
        assert info.value.rule == "exit only via N-"
        with pytest.raises(InfeasibleRouteError) as info:
            exit_enter_via_N(1.0, "enter", sign=-1)
        assert info.value.rule == "entry only via N+"

    def test_crossing_point_must_be_on_circle(self):
        with pytest.raises(ValidationError):
            exit_enter_via_N(1.5, "exit")

    def test_real_pair_bifurcation(self):
        merge = real_pair_bifurcation(merge=True)
        assert classify(merge.origin).region is Region.O_C
        assert classify(endpoint(merge)).region is Region.O_R_plus
        split = real_pair_bifurcation(merge=False)
        assert classify(split.origin).region is Region.O_R_plus
        assert classify(endpoint(split)).region is Region.O_C

    def test_quadruplet_move(self):
        start, target = 1.5 * cmath.exp(0.7j), 1.8 * cmath.exp(1.0j)
        path = quadruplet_move(start, target)
        assert verify_positive(path).positive
        lab = classify(endpoint(path))
        assert lab.region is Region.O_C
        assert abs(lab.labels[0] - target) <= 1e-8, f"label {lab.labels[0]}"

    def test_quadruplet_move_rejects_circle_labels(self):
        with pytest.raises(ValidationError):
            quadruplet_move(cmath.exp(0.5j), 1.5 * cmath.exp(0.5j))


# ============================================================================
# Routes from and to the identity
# ============================================================================

class TestRoutesFromIdentity:
    @pytest.mark.parametrize("B", [
        rotation(1.0),
        rotation(-2.0),
        hyperbolic(2.0),
        hyperbolic(-0.5),
    ])
    def test_sp2_targets(self, B):
        path = path_from_identity(B)
        assert np.allclose(path.origin, np.eye(2))
        assert verify_positive(path).positive
        assert _residual(path, B) <= 1e-8

    def test_sp4_mixed_target(self, rng):
        B = conjugate(direct_sum(rotation(1.0), hyperbolic(-2.0)), random_symplectic(rng, 2, 0.3))
        path = path_from_identity(B)
        assert verify_positive(path).positive
        assert _residual(path, B) <= 1e-8

    def test_sp4_quadruplet_target(self, rng):
        B = conjugate(quadruplet_block(1.6 * cmath.exp(2.0j)), random_symplectic(rng, 2, 0.3))
        path = path_from_identity(B)
        assert verify_positive(path).positive
        assert _residual(path, B) <= 1e-8

    def test_path_to_identity(self):
        A = hyperbolic(-2.0)
        path = path_to_identity(A)
        assert np.allclose(path.origin, A)
        assert verify_positive(path).positive
        assert _residual(path, np.eye(2)) <= 1e-8


class TestConnect:
    def test_connect_sp2(self):
        A, B = rotation(1.0), hyperbolic(-2.0)
        path = connect(A, B)
        assert np.allclose(path.origin, A)
        assert verify_positive(path).positive
        assert _residual(path, B) <= 1e-8

    def test_connect_to_minus_identity(self):
        path = connect(hyperbolic(2.0), -np.eye(2))
        assert verify_positive(path).positive
        assert _residual(path, -np.eye(2)) <= 1e-8
        traj = eigen_trajectory(path, 256)
        assert traj.itinerary[0].label.region is Region.O_R_plus
        assert traj.events, "the real pair has to reach the circle"
        ev = traj.events[0]
        assert ev.before is Region.O_R_plus
        assert ev.label.region is Region.AtPlusOne, "real pair meets the circle at +1"
        assert ev.label.nilpotent_sign == 1, "entry into the circle goes through N+"
        assert ev.after is Region.O_U_plus
        assert not legality_violations(traj.events, 1)

    @pytest.mark.parametrize("n,seed", [(1, 11), (1, 12), (1, 13), (2, 21), (2, 22)])
    def test_connect_loop_at_random_matrix(self, n, seed):
        A = random_symplectic(np.random.default_rng(seed), n, 0.5)
        path = connect(A, A)
        assert np.allclose(path.origin, A)
        assert path.duration > 0.0
        assert verify_positive(path).positive, "loop must be positive"
        assert _residual(path, A) <= 1e-8 * max(1.0, float(np.max(np.abs(A)))), "loop must close exactly"

    def test_route_legs_are_described(self):
        route = connect_route(np.eye(2), hyperbolic(2.0))
        kinds = {leg["kind"] for leg in route.describe()}
        assert LegKind.ExitViaN.value in kinds, f"kinds {kinds}"

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            connect(np.eye(2), np.eye(4))

    def test_unsupported_dimension(self):
        with pytest.raises(UnsupportedError):
            connect(np.eye(6), np.eye(6))

    def test_non_symplectic_input(self):
        with pytest.raises(ValidationError):
            connect(np.eye(2), np.array([[1.0, 1.0], [0.0, 2.0]]))


# ============================================================================
# Short paths and extensions
# ============================================================================

class TestShortPaths:
    def test_parity_count(self):
        assert parity_count(hyperbolic(2.0)) == 1
        assert parity_count(hyperbolic(-2.0)) == 0
        assert parity_count(direct_sum(hyperbolic(2.0), hyperbolic(3.0))) == 2
        assert parity_count(rotation(1.0)) == 0

    def test_odd_parity_is_infeasible(self):
        with pytest.raises(InfeasibleRouteError) as info:
            short_path_to(hyperbolic(2.0))
        assert info.value.details["rule"] == "short-path parity"
        assert info.value.exit_code == 3

    def test_eigenvalue_one_is_rejected(self):
        with pytest.raises(ValidationError):
            short_path_to(np.eye(2))

    @pytest.mark.parametrize("B", [rotation(2.0), hyperbolic(-3.0)])
    def test_sp2_short_targets(self, B):
        path = short_path_to(B)
        assert is_short(path, 256)
        assert _residual(path, B) <= 1e-8

    def test_even_parity_in_sp4(self):
        B = direct_sum(hyperbolic(2.0), hyperbolic(3.0))
        path = short_path_to(B)
        assert verify_positive(path).positive
        assert is_short(path, 256)
        assert _residual(path, B) <= 1e-6


class TestExtension:
    def test_extend_from_negative_real_axis(self):
        base = short_path_to(hyperbolic(-3.0))
        out = extend_to_U(base)
        assert classify(endpoint(out)).region.on_circle
        assert is_short(out, 256)
        assert verify_positive(out).positive

    def test_extend_from_quadruplet(self, rng):
        base = short_path_to(conjugate(quadruplet_block(1.5 * cmath.exp(1.2j)), random_symplectic(rng, 2, 0.2)))
        out = extend_to_U(base)
        assert classify(endpoint(out)).region.on_circle
        assert is_short(out, 256)

    def test_already_on_circle(self):
        base = make_path([(1.0, np.eye(2))])
        out = extend_to_U(base)
        assert classify(endpoint(out)).region.on_circle
        assert out.duration > base.duration

    def test_long_paths_are_rejected(self):
        with pytest.raises(ValidationError):
            extend_to_U(make_path([(2.0 * math.pi + 0.5, np.eye(2))]))


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
