import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cutselect.model import (Cut, InstanceFeatures, MilpInstance, Row, Sense, compute_features,
                             min_pairwise_distance, read_features_csv, select_diverse_subset,
                             write_features_csv)


def make(rows, n=4, lower=None, upper=None, integ=None, c=None):
    return MilpInstance("t", c if c is not None else np.ones(n), rows,
                        lower if lower is not None else np.zeros(n),
                        upper if upper is not None else np.ones(n),
                        integ if integ is not None else np.ones(n, dtype=bool))


class TestInstanceValidation:
    def test_rejects_unsorted_row(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            make([Row([1, 0], [1.0, 1.0], Sense.LE, 1.0)])

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            make([Row([0, 4], [1.0, 1.0], Sense.LE, 1.0)])

    def test_rejects_crossed_bounds(self):
        with pytest.raises(ValueError, match="lower > upper"):
            make([], lower=np.array([0, 2, 0, 0.0]), upper=np.ones(4))

    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            make([Row([0], [np.nan], Sense.LE, 1.0)])


class TestCut:
    def test_invariants(self):
        with pytest.raises(ValueError):
            Cut([], [], 0.0)
        with pytest.raises(ValueError):
            Cut([0, 1], [1.0, 0.0], 1.0)
        with pytest.raises(ValueError):
            Cut([1, 0], [1.0, 1.0], 1.0)
        cut = Cut.from_dense([0.0, 3.0, 0.0, 4.0], 2.0)
        assert cut.nnz == 2 and cut.norm == 5.0
        with pytest.raises(ValueError):
            cut.dense(3)


class TestFeatures:
    def test_row_fractions(self):
        inst = make([Row([0], [1.0], Sense.LE, 1), Row([1], [1.0], Sense.LE, 1),
                     Row([2], [1.0], Sense.EQ, 1)])
        f = compute_features(inst)
        assert f.frac_rows_le == pytest.approx(2 / 3)
        assert f.frac_rows_eq == pytest.approx(1 / 3)
        assert f.frac_rows_ge == 0.0

    def test_all_binary(self):
        f = compute_features(make([Row([0], [1.0], Sense.LE, 1)]))
        assert (f.frac_vars_binary, f.frac_vars_integer, f.frac_vars_continuous) == (1.0, 0.0, 0.0)

    def test_densities(self):
        inst = make([Row([0, 1], [1.0, 1.0], Sense.LE, 1),
                     Row([0, 1, 2, 3], [1.0] * 4, Sense.GE, 0)],
                    c=np.array([1.0, 0, 0, 0]))
        f = compute_features(inst)
        assert f.avg_row_density == 0.75
        assert f.max_row_density == 1.0
        assert f.objective_density == 0.25

    def test_variable_types(self):
        inst = make([], integ=np.array([True, True, False, False]),
                    upper=np.array([1.0, 5.0, 1.0, 1.0]))
        f = compute_features(inst)
        assert (f.frac_vars_binary, f.frac_vars_integer, f.frac_vars_continuous) == (0.25, 0.25, 0.5)

    def test_no_rows(self):
        f = compute_features(make([]))
        assert f.frac_rows_le == f.avg_row_density == f.max_row_density == 0.0

    @settings(max_examples=50, deadline=None)
    @given(st.randoms(use_true_random=False), st.integers(0, 10_000))
    def test_row_permutation_invariance(self, rnd, seed):
        from conftest import random_milp
        inst = random_milp(np.random.default_rng(seed), int_frac=0.6)
        rows = list(inst.rows)
        rnd.shuffle(rows)
        other = MilpInstance(inst.name, inst.objective, rows, inst.lower, inst.upper,
                             inst.integrality)
        a, b = compute_features(inst).vector(), compute_features(other).vector()
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
        assert np.all((a >= 0) & (a <= 1))
        assert a[3] + a[4] + a[5] == pytest.approx(1.0, abs=1e-9)

    def test_csv_round_trip(self):
        feats = [InstanceFeatures(*np.random.default_rng(i).random(9)) for i in range(3)]
        names, back = read_features_csv(write_features_csv(["a", "b", "c"], feats))
        assert names == ["a", "b", "c"]
        assert back == feats


class TestDiverseSubset:
    def test_full_population(self):
        pts = np.random.default_rng(0).random((6, 3))
        assert sorted(select_diverse_subset(pts, 6)) == list(range(6))

    def test_collinear_endpoints(self):
        pts = [[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]]
        assert sorted(select_diverse_subset(pts, 2)) == [0, 2]

    def test_too_many(self):
        with pytest.raises(ValueError):
            select_diverse_subset([[0.0]], 2)

    def test_ties_lowest_index(self):
        pts = [[0.0], [1.0], [-1.0]]  # both ends equally far from the centroid
        assert select_diverse_subset(pts, 2) == [1, 2]

    def test_deterministic(self):
        pts = np.random.default_rng(3).random((20, 9))
        assert select_diverse_subset(pts, 5, seed=7, restarts=4) == \
            select_diverse_subset(pts, 5, seed=7, restarts=4)

    def test_beats_random_subsets(self):
        # each random 3-subset draw is a trial; the greedy pick must match or beat
        # at least 95% of them, pooled over several 10-point feature sets
        rng = np.random.default_rng(2024)
        wins = []
        for _ in range(20):
            pts = rng.random((10, 9))
            ours = min_pairwise_distance(pts[select_diverse_subset(pts, 3)])
            wins += [min_pairwise_distance(pts[rng.choice(10, 3, replace=False)]) <= ours
                     for _ in range(1000)]
        assert np.mean(wins) >= 0.95

    def test_restarts_never_worse(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            pts = rng.random((15, 4))
            base = min_pairwise_distance(pts[select_diverse_subset(pts, 4)])
            more = min_pairwise_distance(pts[select_diverse_subset(pts, 4, seed=1, restarts=8)])
            assert more >= base

    def test_greedy_is_two_approximation(self):
        # farthest-point traversal is within factor 2 of the best max-min subset
        rng = np.random.default_rng(9)
        for _ in range(5):
            pts = rng.random((9, 3))
            best = max(min_pairwise_distance(pts[list(c)]) for c in itertools.combinations(range(9), 3))
            ours = min_pairwise_distance(pts[select_diverse_subset(pts, 3)])
            assert ours >= best / 2 - 1e-12
