"""Samplers for correlated Erdős–Rényi graph pairs and correlated Gaussian
Wigner matrix pairs, with reproducible substream seeding.

Seeding contract: every sampler derives independent substreams from a single
64-bit seed via ``numpy.random.SeedSequence(seed, spawn_key=(purpose,))``.
Purposes are fixed small integers (see ``substream``), so results are
reproducible regardless of call order or parallel scheduling. The benchmark
harness derives per-trial seeds the same way, with the trial index as part
of the spawn key.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph, Permutation

# Substream purposes. Fixed integers; never renumber.
PURPOSE_PARENT = 0      # parent-graph edges / base matrix
PURPOSE_KEEP_A = 1      # subsampling mask for A
PURPOSE_KEEP_B = 2      # subsampling mask for B / noise matrix
PURPOSE_PERMUTATION = 3  # latent permutation
PURPOSE_TRIAL = 4       # per-trial seed derivation in the harness


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for (seed, key...) via SeedSequence spawn keys."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def trial_seed(master_seed: int, trial: int, purpose: int = PURPOSE_TRIAL) -> int:
    """Derive a 63-bit per-trial seed from a master seed (harness contract)."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(purpose, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


@dataclass(frozen=True)
class CorrelatedErParams:
    """Parameters of the correlated Erdős–Rényi pair: each observed graph is
    marginally G(n, q); corresponding edge indicators are kept jointly with
    probability q*s."""

    n: int
    q: float
    s: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not (0.0 <= self.q < 1.0):
            raise ValueError("q must lie in [0, 1)")
        if not (0.0 < self.s <= 1.0):
            raise ValueError("s must lie in (0, 1]")
        if self.q > self.s:
            raise ValueError("need q <= s so the parent edge probability q/s <= 1")
        if self.q * (1.0 - self.s) > 1.0 - self.q + 1e-15:
            raise ValueError("need q(1-s) <= 1-q for the conditional construction")


@dataclass(frozen=True)
class WignerParams:
    n: int
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not (0.0 <= self.sigma < 1.0):
            raise ValueError("sigma must lie in [0, 1)")


class SymMatrix:
    """Symmetric real matrix wrapper (adjacency analogue for Wigner inputs)."""

    __slots__ = ("entries",)

    def __init__(self, entries: np.ndarray, check: bool = True):
        arr = np.asarray(entries, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("entries must be a square matrix")
        if check and not np.allclose(arr, arr.T, atol=1e-12, rtol=0.0):
            raise ValueError("matrix is not symmetric")
        arr.setflags(write=False)
        self.entries = arr

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def __repr__(self) -> str:
        return f"SymMatrix(n={self.n})"


def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.triu_indices(n, k=1)


def _graph_from_mask(n: int, iu: np.ndarray, iv: np.ndarray, mask: np.ndarray) -> Graph:
    return Graph.from_edge_array(n, np.column_stack([iu[mask], iv[mask]]))


def _latent_permutation(params, rng: np.random.Generator,
                        identity: bool) -> Permutation:
    if identity:
        return Permutation.identity(params.n)
    return Permutation.random(params.n, rng)


def sample_correlated_er(
    params: CorrelatedErParams,
    identity_permutation: bool = False,
) -> tuple[Graph, Graph, Permutation]:
    """Sample (A, B, pi*) via the parent-graph construction.

    A parent graph G ~ G(n, q/s) is sampled once; A and B keep each parent
    edge independently with probability s, and B is relabeled by pi*.
    """
    n = params.n
    iu, iv = _pair_index(n)
    m = iu.shape[0]
    p_parent = params.q / params.s if params.q > 0 else 0.0
    parent = substream(params.seed, PURPOSE_PARENT).random(m) < p_parent
    keep_a = substream(params.seed, PURPOSE_KEEP_A).random(m) < params.s
    keep_b = substream(params.seed, PURPOSE_KEEP_B).random(m) < params.s
    pi_star = _latent_permutation(
        params, substream(params.seed, PURPOSE_PERMUTATION), identity_permutation)
    a = _graph_from_mask(n, iu, iv, parent & keep_a)
    mask_b = parent & keep_b
    b_edges = np.column_stack([pi_star.image[iu[mask_b]], pi_star.image[iv[mask_b]]])
    return a, Graph.from_edge_array(n, b_edges), pi_star


def sample_correlated_er_conditional(
    params: CorrelatedErParams,
    identity_permutation: bool = False,
) -> tuple[Graph, Graph, Permutation]:
    """Sample (A, B, pi*) via the conditional construction: A ~ G(n, q), then
    B_e' = Bern(s) where A_e = 1 and Bern(q(1-s)/(1-q)) where A_e = 0.

    Distributionally identical to :func:`sample_correlated_er`; kept for
    cross-validation of the two constructions.
    """
    n = params.n
    iu, iv = _pair_index(n)
    m = iu.shape[0]
    a_mask = substream(params.seed, PURPOSE_PARENT).random(m) < params.q
    p_flip_in = params.s
    p_flip_out = params.q * (1.0 - params.s) / (1.0 - params.q)
    u = substream(params.seed, PURPOSE_KEEP_B).random(m)
    b_mask = np.where(a_mask, u < p_flip_in, u < p_flip_out)
    pi_star = _latent_permutation(
        params, substream(params.seed, PURPOSE_PERMUTATION), identity_permutation)
    a = _graph_from_mask(n, iu, iv, a_mask)
    b_edges = np.column_stack([pi_star.image[iu[b_mask]], pi_star.image[iv[b_mask]]])
    return a, Graph.from_edge_array(n, b_edges), pi_star


def sample_correlated_wigner(
    params: WignerParams,
    identity_permutation: bool = False,
) -> tuple[SymMatrix, SymMatrix, Permutation]:
    """Sample correlated Wigner matrices B' = sqrt(1-sigma^2) A + sigma Z with
    iid N(0,1) upper-triangle entries (diagonal included), B relabeled by pi*."""
    n = params.n

    def _wigner(rng: np.random.Generator) -> np.ndarray:
        x = rng.standard_normal((n, n))
        return np.triu(x) + np.triu(x, k=1).T

    a = _wigner(substream(params.seed, PURPOSE_PARENT))
    z = _wigner(substream(params.seed, PURPOSE_KEEP_B))
    b_aligned = np.sqrt(1.0 - params.sigma ** 2) * a + params.sigma * z
    pi_star = _latent_permutation(
        params, substream(params.seed, PURPOSE_PERMUTATION), identity_permutation)
    inv = pi_star.inverse().image
    b = b_aligned[np.ix_(inv, inv)]
    return SymMatrix(a, check=False), SymMatrix(b, check=False), pi_star
