"""Semantic distances, similarity bounds, case-count rules, pivot choice."""

import math
import random

import numpy as np
import pytest

from semogp.semantics import (
    DISTANCE_RULES,
    RULE_ABOVE,
    RULE_BAND,
    Pivot,
    SimilarityBounds,
    count_distances,
    distance_above_ubss,
    distance_in_band,
    select_pivot,
    ssc_distance,
)


P = np.array([0.9, 0.2, 0.5])
V = np.array([0.1, 0.25, 0.5])
BOUNDS = SimilarityBounds(lbss=0.01, ubss=0.5)


class TestBounds:
    def test_defaults(self):
        bounds = SimilarityBounds()
        assert (bounds.lbss, bounds.ubss) == (0.01, 0.5)

    def test_validation(self):
        with pytest.raises(ValueError):
            SimilarityBounds(lbss=-0.1, ubss=0.5)
        with pytest.raises(ValueError):
            SimilarityBounds(lbss=0.6, ubss=0.5)
        with pytest.raises(ValueError):
            SimilarityBounds(lbss=float("nan"), ubss=0.5)

    def test_infinite_upper_bound_allowed(self):
        bounds = SimilarityBounds(lbss=0.0, ubss=float("inf"))
        assert math.isinf(bounds.ubss)


class TestSscDistance:
    def test_hand_case(self):
        assert ssc_distance(np.array([0.0, 0.0]), np.array([1.0, 3.0])) == 2.0

    def test_zero_for_identical(self):
        sem = np.array([0.4, -1.2, 9.0])
        assert ssc_distance(sem, sem) == 0.0

    def test_symmetric(self):
        rng = random.Random(0)
        for _ in range(50):
            a = np.array([rng.uniform(-5, 5) for _ in range(8)])
            b = np.array([rng.uniform(-5, 5) for _ in range(8)])
            assert ssc_distance(a, b) == ssc_distance(b, a)

    def test_subset_restricts_cases(self):
        a = np.array([0.0, 0.0, 0.0, 0.0])
        b = np.array([4.0, 0.0, 2.0, 0.0])
        assert ssc_distance(a, b, subset=[0, 2]) == 3.0
        assert ssc_distance(a, b, subset=[1, 3]) == 0.0
        assert ssc_distance(a, b) == 1.5

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            ssc_distance(np.zeros(3), np.zeros(4))


class TestCaseCountRules:
    def test_above_hand_case(self):
        # |diffs| = (0.8, 0.05, 0.0); only 0.8 exceeds ubss.
        assert distance_above_ubss(P, V, BOUNDS) == 1

    def test_band_hand_case(self):
        # Only 0.05 falls inside [0.01, 0.5].
        assert distance_in_band(P, V, BOUNDS) == 1

    def test_identical_vectors_count_zero_above(self):
        assert distance_above_ubss(V, V, BOUNDS) == 0

    def test_band_endpoints_are_inclusive(self):
        bounds = SimilarityBounds(lbss=0.1, ubss=0.5)
        p = np.array([0.1, 0.5, 0.0999999, 0.5000001])
        v = np.zeros(4)
        assert distance_in_band(p, v, bounds) == 2

    def test_above_is_strict(self):
        bounds = SimilarityBounds(lbss=0.0, ubss=0.5)
        p = np.array([0.5, 0.5000001])
        v = np.zeros(2)
        assert distance_above_ubss(p, v, bounds) == 1

    def test_partition_identity(self):
        # above-count + band-count + below-lbss-count covers every case once.
        rng = random.Random(1)
        for _ in range(300):
            length = rng.randint(1, 30)
            p = np.array([rng.uniform(-2, 2) for _ in range(length)])
            v = np.array([rng.uniform(-2, 2) for _ in range(length)])
            lbss = rng.uniform(0, 1)
            bounds = SimilarityBounds(lbss=lbss, ubss=lbss + rng.uniform(0, 1))
            above = distance_above_ubss(p, v, bounds)
            band = distance_in_band(p, v, bounds)
            below = int((np.abs(p - v) < bounds.lbss).sum())
            assert above + band + below == length

    def test_infinite_ubss_means_nothing_above(self):
        bounds = SimilarityBounds(lbss=0.0, ubss=float("inf"))
        p = np.array([1e9, -1e9])
        assert distance_above_ubss(p, np.zeros(2), bounds) == 0
        assert distance_in_band(p, np.zeros(2), bounds) == 2

    def test_count_distances_matches_per_row(self):
        rng = random.Random(2)
        matrix = np.array([[rng.uniform(-1, 1) for _ in range(6)] for _ in range(10)])
        pivot = np.array([rng.uniform(-1, 1) for _ in range(6)])
        for rule, scalar in ((RULE_ABOVE, distance_above_ubss), (RULE_BAND, distance_in_band)):
            counts = count_distances(matrix, pivot, BOUNDS, rule)
            assert counts.tolist() == [scalar(row, pivot, BOUNDS) for row in matrix]

    def test_count_distances_unknown_rule(self):
        with pytest.raises(ValueError, match="unknown distance rule"):
            count_distances(np.zeros((2, 2)), np.zeros(2), BOUNDS, "nearest")

    def test_rule_names(self):
        assert DISTANCE_RULES == ("above", "band")


class TestSelectPivot:
    SEMS = [np.array([0.0, 0.0]), np.array([1.0, 1.0]), np.array([2.0, 2.0])]

    def test_max_finite_crowding_wins(self):
        crowding = [float("inf"), 2.0, float("inf")]
        pivot = select_pivot(self.SEMS, crowding, random.Random(0))
        assert pivot.source_index == 1
        assert np.array_equal(pivot.semantics, self.SEMS[1])

    def test_tie_breaks_to_lowest_index(self):
        sems = [np.zeros(2)] * 4
        crowding = [float("inf"), 3.0, 3.0, float("inf")]
        pivot = select_pivot(sems, crowding, random.Random(0))
        assert pivot.source_index == 1

    def test_two_members_choose_uniformly(self):
        sems = self.SEMS[:2]
        crowding = [float("inf"), float("inf")]
        picks = {
            select_pivot(sems, crowding, random.Random(seed)).source_index
            for seed in range(30)
        }
        assert picks == {0, 1}

    def test_two_member_choice_is_deterministic_per_seed(self):
        sems = self.SEMS[:2]
        crowding = [float("inf"), float("inf")]
        a = select_pivot(sems, crowding, random.Random(7)).source_index
        b = select_pivot(sems, crowding, random.Random(7)).source_index
        assert a == b

    def test_all_infinite_crowding_falls_back_to_uniform(self):
        crowding = [float("inf")] * 3
        picks = {
            select_pivot(self.SEMS, crowding, random.Random(seed)).source_index
            for seed in range(40)
        }
        assert picks == {0, 1, 2}

    def test_empty_front_rejected(self):
        with pytest.raises(ValueError, match="non-empty"):
            select_pivot([], [], random.Random(0))

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError, match="match"):
            select_pivot(self.SEMS, [1.0], random.Random(0))

    def test_pivot_is_immutable(self):
        pivot = Pivot(np.zeros(2), 0)
        import dataclasses

        with pytest.raises(dataclasses.FrozenInstanceError):
            pivot.source_index = 3
