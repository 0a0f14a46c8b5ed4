#!/usr/bin/env python3
"""
Tests for eigenvalue tracking, itineraries, the Conley–Zehnder index,
shortness and excursion counting.

Usage:
    python -m pytest tests/test_tracking_index.py -v
"""
import math

import numpy as np
import pytest

from posipath.core.exceptions import ValidationError
from posipath.core.symplectic import rotation
from posipath.models.domain import EigenKind, ItineraryEntry, Region, StratumLabel, Trajectory
from posipath.services.index import (
    complexity,
    conley_zehnder_index,
    count_excursions,
    crossing_times,
    diagnose,
    excursions,
    is_short,
    tangencies,
)
from posipath.services.positive_paths import make_path
from posipath.services.sampling import random_positive_path
from posipath.services.steering import exit_enter_via_N
from posipath.services.tracking import (
    circle_departures,
    eigen_trajectory,
    itinerary,
    krein_monotonicity_violations,
    leaving_circle_violations,
    legality_violations,
    match_eigenvalues,
)


def _entries(*regions):
    return [ItineraryEntry(t_start=float(k), t_end=float(k + 1), label=StratumLabel(region=r))
            for k, r in enumerate(regions)]


def _collision_trajectory(splittings):
    """Two circle eigenvalues meeting at e^{i} and leaving S¹ together at the last sample."""
    z = np.exp(1j)
    on = [z, z]
    off = [1.2 * z, z / 1.2]
    circle, quad = EigenKind.CirclePair.value, EigenKind.Quadruplet.value
    return Trajectory(
        times=np.arange(4.0),
        values=np.array([on, on, on, off]),
        kinds=[[circle, circle]] * 3 + [[quad, quad]],
        splittings=list(splittings) + [[None, None]],
    )


# ============================================================================
# Tracking
# ============================================================================

class TestTracking:
    def test_matching_follows_nearest(self):
        prev = np.array([1.0 + 0.0j, 2.0, 3.0])
        cur = np.array([3.01, 1.01, 2.01])
        ordered, move = match_eigenvalues(prev, cur)
        assert np.allclose(ordered, [1.01, 2.01, 3.01])
        assert move == pytest.approx(0.01)

    def test_two_speed_rotation(self):
        path = make_path([(1.0, np.diag([1.0, 1.0, 2.0, 2.0]))])
        traj = eigen_trajectory(path, 64)
        assert traj.values.shape[1] == 4
        assert [e.label.region for e in traj.itinerary] == [Region.O_U]
        assert not krein_monotonicity_violations(traj), "all eigenvalues have splitting +1 on one side"
        last = sorted(traj.values[-1], key=lambda z: (round(z.real, 9), z.imag))
        want = sorted([np.exp(1j), np.exp(-1j), np.exp(2j), np.exp(-2j)], key=lambda z: (round(z.real, 9), z.imag))
        assert np.allclose(last, want, atol=1e-9)
        assert set(traj.splittings[-1]) == {1, -1}

    def test_sp2_rotation_itinerary(self):
        path = make_path([(1.0, np.eye(2))])
        regions = [e.label.region for e in itinerary(path, 32)]
        assert regions == [Region.O_U_plus]

    def test_exit_through_minus_flavor(self):
        path = exit_enter_via_N(1.0, "exit")
        traj = eigen_trajectory(path, 64)
        assert traj.itinerary[0].label.region.on_circle
        assert traj.itinerary[-1].label.region is Region.O_R_plus
        assert len(traj.events) == 1
        ev = traj.events[0]
        assert ev.label.region is Region.AtPlusOne and ev.label.nilpotent_sign == -1
        assert not legality_violations(traj.events, 1)
        assert complexity(path, 64) == 1

    def test_random_sp4_paths_are_monotone(self, rng):
        for _ in range(3):
            traj = eigen_trajectory(random_positive_path(rng, 2, mass=3.0), 256)
            assert not krein_monotonicity_violations(traj)
            assert not leaving_circle_violations(traj)

    def test_departure_uses_last_known_splitting(self):
        traj = _collision_trajectory([[1, -1], [1, -1], [None, None]])
        deps = circle_departures(traj)
        assert len(deps) == 2
        assert all(d["splitting"] == 0 and not d["indeterminate"] for d in deps)
        assert not leaving_circle_violations(traj)

    def test_departure_with_nonzero_splitting_is_a_violation(self):
        traj = _collision_trajectory([[1, 1], [None, 1], [None, None]])
        bad = leaving_circle_violations(traj)
        assert len(bad) == 2 and all(d["splitting"] == 2 for d in bad), f"got {bad}"

    def test_unresolved_departure_is_reported(self):
        traj = _collision_trajectory([[None, None]] * 3)
        bad = leaving_circle_violations(traj)
        assert len(bad) == 2, "unknown splittings must not pass silently"
        assert all(d["indeterminate"] and d["splitting"] is None for d in bad)


# ============================================================================
# Index and shortness
# ============================================================================

class TestConleyZehnder:
    def test_half_turn_is_short(self):
        path = make_path([(math.pi, np.eye(2))])
        assert conley_zehnder_index(path, 256) == 0
        assert is_short(path, 256)

    def test_full_turn_counts_two(self):
        path = make_path([(2.0 * math.pi + 0.5, np.eye(2))])
        assert conley_zehnder_index(path, 256) == 2
        assert not is_short(path, 256)
        times = crossing_times(path, 256)
        assert len(times) == 1 and times[0] == pytest.approx(2.0 * math.pi, abs=1e-6)
        assert tangencies(path, 256) == times, "Id is hit with a two-dimensional kernel"

    def test_sp4_full_turn_counts_four(self):
        path = make_path([(2.0 * math.pi + 0.5, np.eye(4))])
        assert conley_zehnder_index(path, 256) == 4

    def test_origin_must_be_identity(self):
        path = make_path([(1.0, np.eye(2))], origin=rotation(0.5))
        with pytest.raises(ValidationError):
            conley_zehnder_index(path)


class TestExcursions:
    def test_simple_return(self):
        assert count_excursions(_entries(Region.O_U, Region.O_C, Region.O_U), 10.0) == 1

    def test_unfinished_excursion_does_not_count(self):
        assert count_excursions(_entries(Region.O_U, Region.O_C), 10.0) == 0

    def test_mixed_region_is_neutral(self):
        entries = _entries(Region.O_U, Region.O_R_plus, Region.O_UR, Region.O_U)
        assert count_excursions(entries, 10.0) == 1
        only_mixed = _entries(Region.O_U, Region.O_UR, Region.O_U)
        assert count_excursions(only_mixed, 10.0) == 0
        assert count_excursions(only_mixed, 10.0, any_stratum=True) == 1

    def test_cutoff(self):
        entries = _entries(Region.O_U, Region.O_C, Region.O_U, Region.O_C, Region.O_U)
        assert count_excursions(entries, 2.5) == 1
        assert count_excursions(entries, 10.0) == 2

    def test_excursions_need_sp4(self):
        with pytest.raises(ValidationError):
            excursions(make_path([(1.0, np.eye(2))]))


class TestDiagnose:
    def test_sp2(self):
        diag = diagnose(make_path([(1.0, np.eye(2))]), 128)
        assert diag.positive and diag.short and diag.cz_index == 0
        assert diag.excursions is None and diag.complexity == 0

    def test_sp4(self):
        diag = diagnose(make_path([(1.0, np.diag([1.0, 1.0, 2.0, 2.0]))]), 128)
        assert diag.short and diag.excursions == 0
        payload = diag.to_dict()
        assert payload["itinerary"][0]["region"] == "O_U"


def run_all_tests():
    """Run all tests in this file without pytest."""
    import sys
    sys.exit(pytest.main([__file__, "-v"]))


if __name__ == "__main__":
    run_all_tests()
