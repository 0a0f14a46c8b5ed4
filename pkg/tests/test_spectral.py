#!/usr/bin/env python3
"""
Tests for eigenvalue grouping, the Krein form and splitting numbers.

Usage:
    python -m pytest tests/test_spectral.py -v
"""
import cmath
import math

import numpy as np
import pytest

from posipath.core.exceptions import ValidationError
from posipath.core.spectral import (
    eigen_structure,
    eigenvalue_splitting,
    kind_of,
    krein_form,
    krein_velocity,
    orbit_label,
    raw_eigenvalues,
    snap,
    splitting_number,
)
from posipath.core.symplectic import conjugate, direct_sum, hyperbolic, random_symplectic, rotation
from posipath.models.domain import EigenKind


# ============================================================================
# Labels and snapping
# ============================================================================

class TestLabels:
    def test_orbit_label_prefers_outside_upper_half(self):
        assert orbit_label(0.5j) == pytest.approx(2.0j), "1/(0.5i) = −2i, conjugated to 2i"
        assert orbit_label(complex(2.0, -1.0)) == pytest.approx(complex(2.0, 1.0)), "conjugate below ℝ"
        assert orbit_label(cmath.exp(-0.4j)) == pytest.approx(cmath.exp(0.4j)), "circle eigenvalues"

    def test_snap(self):
        assert snap(1.0 + 1e-10) == 1.0, "near 1 snaps to 1"
        z = snap(cmath.exp(0.7j) * (1.0 + 1e-10))
        assert abs(abs(z) - 1.0) <= 1e-15, "radius snapped to 1"
        assert snap(2.0 + 1e-12j).imag == 0.0, "imaginary noise removed"

    def test_kind_of(self):
        assert kind_of(cmath.exp(1.0j)) is EigenKind.CirclePair
        assert kind_of(-1.0) is EigenKind.MinusOne
        assert kind_of(1.0) is EigenKind.PlusOne
        assert kind_of(3.0) is EigenKind.RealPair
        assert kind_of(1.5 * cmath.exp(0.5j)) is EigenKind.Quadruplet


# ============================================================================
# Krein form
# ============================================================================

class TestKreinForm:
    def test_normalization(self):
        v = np.array([1.0, -1.0j])
        assert krein_form(v, v) == pytest.approx(2.0), "β((1,−i),(1,−i)) = 2"

    def test_hermitian(self, rng):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        w = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert krein_form(v, w) == pytest.approx(np.conj(krein_form(w, v))), "β(v,w) = conj β(w,v)"

    def test_splitting_of_quarter_turn(self):
        A = rotation(math.pi / 2)
        assert splitting_number(A, 1j) == 1, "+1 at i"
        assert splitting_number(A, -1j) == -1, "−1 at −i"

    def test_splitting_off_circle_rejected(self):
        with pytest.raises(ValidationError):
            splitting_number(hyperbolic(2.0), 2.0)

    def test_splitting_is_conjugation_invariant(self, rng):
        A = direct_sum(rotation(1.0), rotation(-2.0))
        B = conjugate(A, random_symplectic(rng, 2, 0.4))
        assert splitting_number(B, cmath.exp(1.0j)) == 1, "ρ(1) block"
        assert splitting_number(B, cmath.exp(2.0j)) == -1, "ρ(−2) block"

    def test_krein_velocity_is_positive_for_positive_generators(self):
        A = rotation(0.8)
        speed = krein_velocity(A, np.diag([2.0, 1.0]), cmath.exp(0.8j))
        assert speed > 0.0, f"splitting +1 eigenvalue should turn anticlockwise, got {speed}"

    def test_krein_velocity_rejects_double_eigenvalue(self):
        A = direct_sum(rotation(1.0), rotation(1.0))
        with pytest.raises(ValidationError, match="simple eigenvalue") as exc:
            krein_velocity(A, np.eye(4), cmath.exp(1j))
        assert exc.value.details["multiplicity"] == 2

    def test_krein_velocity_rejects_non_eigenvalue(self):
        with pytest.raises(ValidationError, match="not an eigenvalue"):
            krein_velocity(rotation(1.0), np.eye(2), cmath.exp(0.5j))


# ============================================================================
# Eigen structure
# ============================================================================

class TestEigenStructure:
    def test_rotation(self):
        es = eigen_structure(rotation(1.0))
        assert len(es.groups) == 1
        g = es.groups[0]
        assert g.kind is EigenKind.CirclePair and g.mult == 1 and g.splitting == 1
        assert g.label == pytest.approx(cmath.exp(1.0j))

    def test_clockwise_rotation(self):
        es = eigen_structure(rotation(-1.0))
        g = es.groups[0]
        assert g.label == pytest.approx(cmath.exp(1.0j)), "label lives in the upper half plane"
        assert g.splitting == -1, "ρ(−θ) has splitting −1 at e^{iθ}"
        assert eigenvalue_splitting(es, cmath.exp(-1.0j)) == 1, "+1 at e^{−iθ}"

    def test_hyperbolic(self):
        es = eigen_structure(hyperbolic(2.0))
        g = es.groups[0]
        assert g.kind is EigenKind.RealPair and g.splitting is None
        assert g.label == pytest.approx(2.0)
        assert g.to_dict()["splitting"] == "n/a"

    def test_minus_identity(self):
        es = eigen_structure(-np.eye(2))
        g = es.groups[0]
        assert g.kind is EigenKind.MinusOne and g.mult == 2 and g.splitting == 0
        assert g.diagonalizable, "−Id is diagonalizable"

    def test_nilpotent_unit_is_not_diagonalizable(self):
        es = eigen_structure(np.array([[1.0, 0.0], [1.0, 1.0]]))
        g = es.groups[0]
        assert g.kind is EigenKind.PlusOne and not g.diagonalizable

    def test_double_circle_group(self):
        es = eigen_structure(direct_sum(rotation(0.9), rotation(0.9)))
        assert len(es.groups) == 1
        g = es.groups[0]
        assert g.mult == 2 and g.splitting == 2 and g.diagonalizable

    def test_mixed_group_has_zero_splitting(self):
        es = eigen_structure(direct_sum(rotation(0.9), rotation(-0.9)))
        g = es.groups[0]
        assert g.mult == 2 and g.splitting == 0

    def test_ordering_circle_before_real(self):
        es = eigen_structure(direct_sum(hyperbolic(3.0), rotation(2.0)))
        kinds = [g.kind for g in es.groups]
        assert kinds == [EigenKind.CirclePair, EigenKind.RealPair]

    def test_palindromic_roots_match_numpy(self, rng):
        A = conjugate(direct_sum(rotation(0.4), hyperbolic(-2.5)), random_symplectic(rng, 2, 0.3))
        ours = np.sort_complex(raw_eigenvalues(A))
        ref = np.sort_complex(np.linalg.eigvals(A))
        assert np.allclose(ours, ref, atol=1e-8), f"{ours} vs {ref}"


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
