import math

import numpy as np
import pytest

from degmatch import (CorrelatedErParams, FailureReason, Graph, Permutation,
                      ProfileConfig, ScoreMatrix, WignerParams, accuracy,
                      apply_permutation, centered_binned_profile,
                      degree_profile, match_by_smallest_n,
                      match_degree_profile, sample_correlated_er,
                      sample_correlated_wigner, score_grid, w1_distance,
                      z_distance)
from degmatch.profiles import EMPTY_PROFILE_DISTANCE, EmpiricalDistribution

from test_graph import random_graph


class TestScoreMatrix:
    def test_validation(self):
        with pytest.raises(ValueError):
            ScoreMatrix(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            ScoreMatrix(np.array([[np.inf]]))
        m = ScoreMatrix(np.array([[1.0, 2.0], [3.0, 4.0]]), "larger")
        assert np.array_equal(m.ascending_values(), -m.values)


class TestScoreGrid:
    def test_noiseless_diagonal_zero(self):
        rng = np.random.default_rng(41)
        g = random_graph(25, 0.3, rng)
        cfg = ProfileConfig(q=0.3, mode="outdegree", distance="binned_l1")
        grid = score_grid(g, g, cfg)
        assert np.allclose(np.diag(grid.values), 0.0)
        cfg_w = ProfileConfig(q=0.3, mode="outdegree", distance="w1")
        grid_w = score_grid(g, g, cfg_w)
        assert np.allclose(np.diag(grid_w.values), 0.0)

    @pytest.mark.parametrize("distance", ["binned_l1", "w1"])
    @pytest.mark.parametrize("mode", ["outdegree", "plain"])
    def test_matches_per_pair_recomputation(self, distance, mode):
        rng = np.random.default_rng(42)
        a = random_graph(15, 0.35, rng)
        b = random_graph(15, 0.35, rng)
        cfg = ProfileConfig(q=0.3, L=7, mode=mode, distance=distance)
        grid = score_grid(a, b, cfg).values
        for i in range(15):
            di = degree_profile(a, i, cfg)
            for k in range(15):
                dk = degree_profile(b, k, cfg)
                if len(di) == 0 or len(dk) == 0:
                    if distance == "w1":
                        assert grid[i, k] == EMPTY_PROFILE_DISTANCE
                    continue
                if distance == "w1":
                    expected = w1_distance(di, dk)
                else:
                    pi_ = centered_binned_profile(di, a.n - a.degree(i) - 1
                                                  if mode == "outdegree" else a.n - 1,
                                                  cfg.q, 7)
                    pk_ = centered_binned_profile(dk, b.n - b.degree(k) - 1
                                                  if mode == "outdegree" else b.n - 1,
                                                  cfg.q, 7)
                    expected = z_distance(pi_, pk_)
                assert grid[i, k] == pytest.approx(expected, abs=1e-10)

    def test_relabeling_covariance(self):
        rng = np.random.default_rng(43)
        a = random_graph(18, 0.3, rng)
        b = random_graph(18, 0.3, rng)
        sigma = Permutation.random(18, rng)
        cfg = ProfileConfig(q=0.25, mode="outdegree", distance="w1")
        base = score_grid(a, b, cfg).values
        moved = score_grid(a, apply_permutation(b, sigma), cfg).values
        for k in range(18):
            assert np.allclose(moved[:, sigma(k)], base[:, k], atol=1e-12)

    def test_matrix_inputs_require_w1(self):
        m, _, _ = sample_correlated_wigner(WignerParams(10, 0.1, seed=1))
        with pytest.raises(ValueError):
            score_grid(m, m, ProfileConfig(q=0.5, distance="binned_l1"))
        with pytest.raises(TypeError):
            score_grid(m, Graph(10), ProfileConfig(q=0.5, distance="w1"))

    def test_matrix_grid_matches_row_w1(self):
        a, b, _ = sample_correlated_wigner(WignerParams(12, 0.3, seed=2))
        grid = score_grid(a, b, ProfileConfig(q=0.5, distance="w1")).values
        for i in range(12):
            for k in range(12):
                expected = w1_distance(EmpiricalDistribution(a.entries[i]),
                                       EmpiricalDistribution(b.entries[k]))
                assert grid[i, k] == pytest.approx(expected, abs=1e-12)


class TestMatchBySmallestN:
    def test_diagonal_grid_gives_identity(self):
        values = np.ones((4, 4))
        np.fill_diagonal(values, 0.0)
        res = match_by_smallest_n(ScoreMatrix(values))
        assert res.ok and res.permutation == Permutation.identity(4)

    def test_all_equal_strict_fails_permissive_identity(self):
        grid = ScoreMatrix(np.ones((5, 5)))
        strict = match_by_smallest_n(grid, strict=True)
        assert strict.failure_reason == FailureReason.TIED_SCORES
        permissive = match_by_smallest_n(grid, strict=False)
        assert permissive.permutation == Permutation.identity(5)

    def test_hand_sorted_case(self):
        values = np.array([[0.1, 0.5, 0.9], [0.6, 0.2, 0.8], [0.7, 0.4, 0.3]])
        res = match_by_smallest_n(ScoreMatrix(values))
        assert res.permutation == Permutation.identity(3)

    def test_not_a_matching(self):
        values = np.full((3, 3), 5.0)
        values[0, 1] = 0.0
        values[0, 2] = 0.1
        values[1, 0] = 0.2
        res = match_by_smallest_n(ScoreMatrix(values))
        assert res.failure_reason == FailureReason.NOT_A_PERFECT_MATCHING

    def test_larger_orientation(self):
        values = np.zeros((3, 3))
        np.fill_diagonal(values, 1.0)
        res = match_by_smallest_n(ScoreMatrix(values, "larger"))
        assert res.permutation == Permutation.identity(3)


class TestMatchDegreeProfile:
    def test_noiseless_er_recovery(self):
        # Z_ii = 0 exactly in the noiseless case; fake pairs are positive.
        n = 300
        q = math.log(n) ** 2 / n
        hits = 0
        for trial in range(10):
            a, b, pi = sample_correlated_er(
                CorrelatedErParams(n, q, 1.0, seed=100 + trial))
            cfg = ProfileConfig(q=q, mode="outdegree", distance="w1")
            res = match_degree_profile(a, b, cfg)
            if res.ok and accuracy(res.permutation, pi) == 1.0:
                hits += 1
        assert hits >= 9

    def test_empty_graphs_fail(self):
        cfg = ProfileConfig(q=0.5, distance="w1")
        res = match_degree_profile(Graph(5), Graph(5), cfg)
        assert not res.ok
        res2 = match_degree_profile(Graph(5), Graph(5), cfg, fallback=True)
        assert res2.ok and res2.info["fallback"]

    def test_wigner_sigma_zero_exact(self):
        a, b, pi = sample_correlated_wigner(WignerParams(100, 0.0, seed=3))
        res = match_degree_profile(a, b, ProfileConfig(q=0.5, distance="w1"))
        assert res.ok and accuracy(res.permutation, pi) == 1.0

    def test_equivariance(self):
        rng = np.random.default_rng(44)
        n, q = 120, 0.15
        a, b, _ = sample_correlated_er(CorrelatedErParams(n, q, 1.0, seed=7))
        cfg = ProfileConfig(q=q, mode="outdegree", distance="w1")
        base = match_degree_profile(a, b, cfg)
        assert base.ok
        sigma = Permutation.random(n, rng)
        moved = match_degree_profile(a, apply_permutation(b, sigma), cfg)
        assert moved.ok
        assert moved.permutation == sigma.compose(base.permutation)

    def test_size_mismatch(self):
        with pytest.raises(ValueError):
            match_degree_profile(Graph(3), Graph(4), ProfileConfig(q=0.5))
