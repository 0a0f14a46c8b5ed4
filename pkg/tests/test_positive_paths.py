#!/usr/bin/env python3
"""
Tests for piecewise constant-generator paths: evaluation, positivity,
concatenation, direct sums and endpoint correction.

Usage:
    python -m pytest tests/test_positive_paths.py -v
"""

import numpy as np
import pytest

from posipath.core.exceptions import DimensionError, ValidationError
from posipath.core.symplectic import direct_sum, random_symplectic, rotation, symp_exp, symp_inverse
from posipath.services.positive_paths import (
    concat,
    conjugate_path,
    conservation_residual,
    direct_sum_paths,
    endpoint,
    evaluate,
    evaluate_many,
    generator_at,
    land_exactly,
    make_path,
    rescale,
    right_translate,
    sample,
    smooth_concat,
    subdivide,
    truncate,
    verify_positive,
)
from posipath.services.sampling import random_positive_path


# ============================================================================
# Construction and evaluation
# ============================================================================

class TestConstruction:
    def test_rejects_non_positive_duration(self):
        with pytest.raises(ValidationError):
            make_path([(0.0, np.eye(2))])
        with pytest.raises(ValidationError):
            make_path([(-1.0, np.eye(2))])

    def test_rejects_non_symmetric_generator(self):
        with pytest.raises(ValidationError):
            make_path([(1.0, np.array([[1.0, 0.5], [0.0, 1.0]]))])

    def test_rejects_mismatched_origin(self):
        with pytest.raises(DimensionError):
            make_path([(1.0, np.eye(2))], origin=np.eye(4))


class TestEvaluation:
    def test_rotation_endpoint(self):
        path = make_path([(1.3, np.eye(2))])
        assert np.allclose(endpoint(path), rotation(1.3), atol=1e-13)

    def test_evaluate_inside_second_segment(self):
        P1, P2 = np.diag([2.0, 1.0]), np.array([[1.0, 0.2], [0.2, 3.0]])
        path = make_path([(0.5, P1), (0.7, P2)])
        want = symp_exp(P2, 0.3) @ symp_exp(P1, 0.5)
        assert np.allclose(evaluate(path, 0.8), want, atol=1e-12)

    def test_evaluate_many_agrees_with_evaluate(self, rng):
        path = random_positive_path(rng, 2, segments=3, mass=4.0)
        ts = np.linspace(0.0, path.duration, 17)
        many = evaluate_many(path, ts)
        for t, A in zip(ts, many):
            assert np.allclose(A, evaluate(path, t), atol=1e-11), f"t={t}"

    def test_time_outside_domain(self):
        path = make_path([(1.0, np.eye(2))])
        with pytest.raises(ValidationError):
            evaluate(path, 1.5)

    def test_generator_at_corner(self):
        P1, P2 = np.diag([2.0, 1.0]), np.diag([1.0, 3.0])
        path = make_path([(0.5, P1), (0.5, P2)])
        P, corner = generator_at(path, 0.5)
        assert corner and np.allclose(P, P2), "right-sided generator at an interior breakpoint"
        P, corner = generator_at(path, 0.25)
        assert not corner and np.allclose(P, P1)

    def test_sampled_generator_recovers_P(self):
        P = np.array([[2.0, 0.3], [0.3, 1.0]])
        sp = sample(make_path([(1.0, P)]), 4001)
        Q, corner = generator_at(sp, 0.5001)
        assert not corner
        assert np.allclose(Q, P, atol=1e-5), f"recovered\n{Q}"


# ============================================================================
# Positivity and conservation
# ============================================================================

class TestPositivity:
    def test_margin_is_smallest_eigenvalue(self):
        path = make_path([(1.0, np.diag([2.0, 0.5])), (1.0, np.diag([1.0, 0.7]))])
        cert = verify_positive(path)
        assert cert.positive and cert.margin == pytest.approx(0.5)

    def test_indefinite_segment(self):
        path = make_path([(1.0, np.diag([1.0, -0.1]))])
        cert = verify_positive(path)
        assert not cert.positive and cert.margin == pytest.approx(-0.1)

    def test_conservation(self, rng):
        path = random_positive_path(rng, 2, mass=6.0)
        assert conservation_residual(path) <= 1e-10


# ============================================================================
# Transformations
# ============================================================================

class TestTransformations:
    def test_conjugate_path(self, rng):
        path = random_positive_path(rng, 2, mass=3.0)
        X = random_symplectic(rng, 2, 0.3)
        out = conjugate_path(path, X)
        assert np.allclose(endpoint(out), symp_inverse(X) @ endpoint(path) @ X, atol=1e-9)
        assert verify_positive(out).positive, "XᵀPX stays positive definite"

    def test_right_translate(self, rng):
        path = make_path([(1.0, np.eye(2))])
        B = random_symplectic(rng, 1, 0.5)
        assert np.allclose(endpoint(right_translate(path, B)), rotation(1.0) @ B, atol=1e-12)

    def test_rescale_keeps_endpoint(self, rng):
        path = random_positive_path(rng, 1, mass=2.0)
        out = rescale(path, 3.0)
        assert out.duration == pytest.approx(3.0)
        assert np.allclose(endpoint(out), endpoint(path), atol=1e-12)

    def test_subdivide_bounds_motion(self):
        path = make_path([(1.0, 5.0 * np.eye(2))])
        out = subdivide(path, 0.25)
        assert len(out.segments) == 20
        assert np.allclose(endpoint(out), endpoint(path), atol=1e-12)

    def test_truncate(self, rng):
        path = random_positive_path(rng, 2, segments=4, mass=3.0)
        s = 0.6 * path.duration
        assert np.allclose(endpoint(truncate(path, s)), evaluate(path, s), atol=1e-12)
        with pytest.raises(ValidationError):
            truncate(path, 0.0)


class TestConcatenation:
    def test_concat_matches_product(self):
        a = make_path([(1.0, np.eye(2))])
        b = make_path([(0.5, np.diag([2.0, 1.0]))], origin=rotation(1.0))
        out = concat([a, b])
        assert np.allclose(endpoint(out), symp_exp(np.diag([2.0, 1.0]), 0.5) @ rotation(1.0), atol=1e-12)

    def test_concat_rejects_gap(self):
        a = make_path([(1.0, np.eye(2))])
        b = make_path([(0.5, np.eye(2))], origin=rotation(1.1))
        with pytest.raises(ValidationError) as info:
            concat([a, b])
        assert info.value.details["index"] == 1

    def test_smooth_concat_stays_positive(self):
        a = make_path([(1.0, np.diag([2.0, 1.0]))])
        b = make_path([(1.0, np.diag([1.0, 3.0]))], origin=endpoint(a))
        out = smooth_concat([a, b], blend_width=0.01)
        assert verify_positive(out).positive
        assert out.duration == pytest.approx(2.0)
        assert len(out.segments) == 3, "one blended segment at the corner"
        assert np.allclose(out.segments[1].P, np.diag([1.5, 2.0]))


class TestDirectSums:
    def test_direct_sum_endpoint(self):
        a = make_path([(1.0, np.eye(2))])
        b = make_path([(0.4, np.diag([3.0, 1.0])), (0.6, np.eye(2))])
        out = direct_sum_paths([a, b])
        assert np.allclose(endpoint(out), direct_sum(endpoint(a), endpoint(b)), atol=1e-12)
        assert verify_positive(out).positive

    def test_direct_sum_rescales(self):
        a = make_path([(2.0, np.eye(2))])
        b = make_path([(1.0, np.eye(2))])
        out = direct_sum_paths([a, b])
        assert out.duration == pytest.approx(2.0)
        assert np.allclose(endpoint(out), direct_sum(rotation(2.0), rotation(1.0)), atol=1e-12)


class TestLandExactly:
    def test_small_correction(self):
        path = make_path([(1.0, np.eye(2))])
        target = rotation(1.001)
        out = land_exactly(path, target)
        assert np.max(np.abs(endpoint(out) - target)) <= 1e-9
        assert verify_positive(out).positive

    def test_sp4_correction(self, rng):
        path = random_positive_path(rng, 2, segments=3, mass=3.0)
        G = rng.standard_normal((4, 4))
        target = symp_exp(1e-4 * (G + G.T), 1.0) @ endpoint(path)
        out = land_exactly(path, target)
        assert np.max(np.abs(endpoint(out) - target)) <= 1e-9
        assert verify_positive(out).positive


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
