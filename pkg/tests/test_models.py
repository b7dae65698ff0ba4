import numpy as np
import pytest

from degmatch import (CorrelatedErParams, WignerParams,
                      apply_permutation, sample_correlated_er,
                      sample_correlated_er_conditional,
                      sample_correlated_wigner)


def edge_set(g):
    return set(map(tuple, g.edges().tolist()))


def joint_edge_stats(a, b, pi_star):
    """Counts of (A_e, B_{pi*(e)}) over all vertex pairs."""
    amat = a.adjacency_matrix()
    bmat = b.adjacency_matrix()[np.ix_(pi_star.image, pi_star.image)]
    iu = np.triu_indices(a.n, k=1)
    return amat[iu], bmat[iu]


class TestCorrelatedEr:
    def test_param_validation(self):
        with pytest.raises(ValueError):
            CorrelatedErParams(10, q=0.5, s=0.4)  # parent p > 1
        with pytest.raises(ValueError):
            CorrelatedErParams(10, q=0.9, s=0.05)
        CorrelatedErParams(10, q=0.5, s=1.0)  # boundary q(1-s)=0 is fine

    def test_s_one_gives_relabeled_copy(self):
        a, b, pi = sample_correlated_er(CorrelatedErParams(40, 0.3, 1.0, seed=1))
        assert edge_set(b) == edge_set(apply_permutation(a, pi))

    def test_q_zero_empty(self):
        a, b, _ = sample_correlated_er(CorrelatedErParams(30, 0.0, 0.5, seed=2))
        assert a.num_edges == 0 and b.num_edges == 0

    def test_marginal_and_joint_frequencies(self):
        n, q, s = 200, 0.1, 0.8
        a, b, pi = sample_correlated_er(CorrelatedErParams(n, q, s, seed=3))
        m = n * (n - 1) / 2
        se_q = np.sqrt(q * (1 - q) / m)
        assert abs(a.num_edges / m - q) <= 4 * se_q
        assert abs(b.num_edges / m - q) <= 4 * se_q
        ae, be = joint_edge_stats(a, b, pi)
        joint = float((ae * be).mean())
        se_joint = np.sqrt(q * s * (1 - q * s) / m)
        assert abs(joint - q * s) <= 4 * se_joint

    def test_determinism_and_seed_independence(self):
        params = CorrelatedErParams(50, 0.2, 0.9, seed=11)
        a1, b1, p1 = sample_correlated_er(params)
        a2, b2, p2 = sample_correlated_er(params)
        assert edge_set(a1) == edge_set(a2)
        assert edge_set(b1) == edge_set(b2)
        assert p1 == p2
        a3, _, _ = sample_correlated_er(CorrelatedErParams(50, 0.2, 0.9, seed=12))
        assert edge_set(a3) != edge_set(a1)

    def test_identity_mode(self):
        _, _, pi = sample_correlated_er(CorrelatedErParams(20, 0.2, 0.9, seed=4),
                                        identity_permutation=True)
        assert pi == pi.inverse()
        assert np.array_equal(pi.image, np.arange(20))


class TestConditionalSampler:
    def test_s_one_gives_relabeled_copy(self):
        a, b, pi = sample_correlated_er_conditional(
            CorrelatedErParams(40, 0.3, 1.0, seed=5))
        assert edge_set(b) == edge_set(apply_permutation(a, pi))

    def test_boundary_parameters_valid(self):
        sample_correlated_er_conditional(CorrelatedErParams(20, 0.5, 1.0, seed=6))

    def test_moments_match_parent_sampler(self):
        # Same marginal and joint edge frequencies as the parent-graph
        # construction, within 4 standard errors of the pooled comparison.
        n, q, s = 200, 0.1, 0.8
        m = n * (n - 1) / 2
        a1, b1, p1 = sample_correlated_er(CorrelatedErParams(n, q, s, seed=7))
        a2, b2, p2 = sample_correlated_er_conditional(
            CorrelatedErParams(n, q, s, seed=8))
        for stat1, stat2, p in [
            (a1.num_edges / m, a2.num_edges / m, q),
            (b1.num_edges / m, b2.num_edges / m, q),
        ]:
            se = np.sqrt(2 * p * (1 - p) / m)
            assert abs(stat1 - stat2) <= 4 * se
        j1 = float(np.multiply(*joint_edge_stats(a1, b1, p1)).mean())
        j2 = float(np.multiply(*joint_edge_stats(a2, b2, p2)).mean())
        se = np.sqrt(2 * q * s * (1 - q * s) / m)
        assert abs(j1 - j2) <= 4 * se


class TestWigner:
    def test_sigma_zero_is_relabeled_copy(self):
        a, b, pi = sample_correlated_wigner(WignerParams(60, 0.0, seed=9))
        realigned = b.entries[np.ix_(pi.image, pi.image)]
        assert np.allclose(realigned, a.entries, atol=1e-12)

    def test_output_symmetry(self):
        _, b, _ = sample_correlated_wigner(WignerParams(50, 0.4, seed=10))
        assert np.array_equal(b.entries, b.entries.T)

    def test_entry_correlation(self):
        n, sigma = 500, 0.3
        a, b, pi = sample_correlated_wigner(WignerParams(n, sigma, seed=11))
        aligned = b.entries[np.ix_(pi.image, pi.image)]
        iu = np.triu_indices(n)
        r = float(np.corrcoef(a.entries[iu], aligned[iu])[0, 1])
        rho = np.sqrt(1 - sigma ** 2)
        m = iu[0].shape[0]
        # Fisher-z confidence interval for a sample correlation.
        assert abs(np.arctanh(r) - np.arctanh(rho)) <= 4 / np.sqrt(m - 3)

    def test_determinism(self):
        a1, b1, _ = sample_correlated_wigner(WignerParams(30, 0.2, seed=12))
        a2, b2, _ = sample_correlated_wigner(WignerParams(30, 0.2, seed=12))
        assert np.array_equal(a1.entries, a2.entries)
        assert np.array_equal(b1.entries, b2.entries)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            WignerParams(10, sigma=1.0)
