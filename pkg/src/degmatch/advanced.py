"""Dense-regime matching (degree-profile seeds from high-degree vertices plus
seeded matching) and sparse-regime matching (neighbors' degree profiles with a
bipartite-matching similarity)."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gammaln
from scipy.stats import norm

from . import _kernels
from .dp import ScoreMatrix, greedy_permutation, match_by_smallest_n, score_grid
from .graph import FailureReason, Graph, MatchResult
from .models import SymMatrix
from .profiles import (DegenerateStandardizationWarning, ProfileConfig,
                       _bin_fractions, _standardize,
                       standardized_binomial_bin_masses)
from .seeded import SeedMap, BipartiteGraph, hopcroft_karp, seeded_match


class SeedSelectionError(RuntimeError):
    """Raised when the thresholded seed set is empty or not a matching."""

    def __init__(self, reason: str, detail: str = ""):
        self.reason = reason
        super().__init__(f"seed selection failed ({reason}){': ' + detail if detail else ''}")


def binomial_upper_tail(n: int, q: float, k: int) -> float:
    """Exact P(Binom(n, q) >= k), summed in log space."""
    if k <= 0:
        return 1.0
    if k > n:
        return 0.0
    if q <= 0.0:
        return 0.0
    if q >= 1.0:
        return 1.0
    xs = np.arange(k, n + 1)
    logpmf = (gammaln(n + 1) - gammaln(xs + 1) - gammaln(n - xs + 1)
              + xs * math.log(q) + (n - xs) * math.log1p(-q))
    peak = logpmf.max()
    return float(min(1.0, math.exp(peak) * np.exp(logpmf - peak).sum()))


def tau_threshold(n: int, q: float, alpha: float) -> int:
    """Smallest k in [0, n] with P(Binom(n-1, q) >= k) <= alpha."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError("alpha must lie in (0, 1]")
    lo, hi = 0, n
    while lo < hi:
        mid = (lo + hi) // 2
        if binomial_upper_tail(n - 1, q, mid) <= alpha:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class DenseParams:
    """Dense-regime thresholds. alpha0, C_xi, L0 are pilot-calibrated
    absolute constants (see scripts/calibrate_constants.py).

    ``distance`` selects the seed grid backend. The binned statistic is the
    theory-faithful choice but at desk scale its value is dominated by the
    degree mismatch |deg(i) - deg(k)|, which does not separate true from fake
    pairs among high-degree vertices; the W1 backend does, and is the
    calibrated default.
    """

    q: float
    s: float
    alpha0: float = 4.0
    C_xi: float = 1.0
    L: int | None = None
    L0: float = 3.0
    mode: str = "plain"
    distance: str = "w1"
    xi_scale: str = "adaptive"

    def __post_init__(self):
        if not (0.0 < self.q < 1.0) or not (0.0 < self.s <= 1.0):
            raise ValueError("q in (0,1) and s in (0,1] required")
        if self.q >= self.s:
            raise ValueError("need q < s strictly (parent probability p = q/s < 1)")
        if self.alpha0 <= 0 or self.C_xi <= 0 or self.L0 <= 0:
            raise ValueError("constants must be positive")
        if self.distance not in ("w1", "binned_l1"):
            raise ValueError(f"unknown distance {self.distance!r}")
        if self.xi_scale not in ("adaptive", "static"):
            raise ValueError(f"unknown xi_scale {self.xi_scale!r}")

    def seed_rate(self, n: int) -> float:
        """alpha = (alpha0 log n / (n q)) ^ ((1-p) s / (1-q)), capped at 1."""
        p = self.q / self.s
        base = self.alpha0 * math.log(n) / (n * self.q)
        if base >= 1.0:
            return 1.0
        return base ** ((1.0 - p) * self.s / (1.0 - self.q))

    def bins_for(self, n: int) -> int:
        if self.L is not None:
            return self.L
        return max(1, math.ceil(self.L0 * max(math.log(n) ** (1.0 / 3.0),
                                              math.log(math.log(n) / self.q))))

    def profile_threshold(self, n: int) -> float:
        if self.distance == "w1":
            return self.C_xi * math.sqrt(1.0 / (n * self.q))
        return self.C_xi * math.sqrt(self.bins_for(n) / (n * self.q))


@dataclass(frozen=True)
class SparseParams:
    """Sparse-regime bin count and similarity threshold eta = eta0 sqrt(L/(nq))."""

    q: float
    eta0: float = 0.12
    L: int | None = None
    L0: float = 3.0
    window_scale: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError("q must lie in (0, 1)")
        if self.eta0 <= 0 or self.L0 <= 0:
            raise ValueError("constants must be positive")

    def bins_for(self, n: int) -> int:
        if self.L is not None:
            return self.L
        return max(1, math.ceil(self.L0 * math.log(max(n * self.q, 2.0))))

    def similarity_threshold(self, n: int) -> float:
        return self.eta0 * math.sqrt(self.bins_for(n) / (n * self.q))


def _seed_pairs(deg_a, deg_b, values: np.ndarray, tau_a: float, tau_b: float,
                xi: float) -> SeedMap:
    rows = np.flatnonzero(deg_a >= tau_a)
    cols = np.flatnonzero(deg_b >= tau_b)
    if rows.size == 0 or cols.size == 0:
        raise SeedSelectionError("empty", "no vertex passes the degree threshold")
    block = values[np.ix_(rows, cols)] <= xi
    ridx, cidx = np.nonzero(block)
    if ridx.size == 0:
        raise SeedSelectionError("empty", "no pair passes the profile threshold")
    lefts, rights = rows[ridx], cols[cidx]
    if len(np.unique(lefts)) != lefts.size or len(np.unique(rights)) != rights.size:
        raise SeedSelectionError("not-a-matching", "a vertex appears in two pairs")
    return SeedMap.from_pairs(zip(lefts.tolist(), rights.tolist()))


def build_degree_seed_set(a: Graph, b: Graph, scores: ScoreMatrix, tau: int,
                          xi: float) -> SeedMap:
    """Seed pairs (i, k) with deg_A(i) >= tau, deg_B(k) >= tau + 1 and profile
    distance <= xi. Raises SeedSelectionError if empty or not a matching."""
    if scores.orientation != "smaller":
        raise ValueError("seed selection expects a smaller-is-better grid")
    return _seed_pairs(a.degrees, b.degrees, scores.values, tau, tau + 1, xi)


def _adaptive_xi(values: np.ndarray, deg_a, deg_b, tau_a: float, tau_b: float,
                 c_xi: float) -> float:
    """xi = C_xi * median over candidate rows of the best (smallest) score.

    Row minima over the high-degree candidate block estimate the true-pair
    score scale without ground truth; the paper's absolute-constant xi is
    this quantile scale at desk size.
    """
    rows = np.flatnonzero(deg_a >= tau_a)
    cols = np.flatnonzero(deg_b >= tau_b)
    if rows.size == 0 or cols.size == 0:
        raise SeedSelectionError("empty", "no vertex passes the degree threshold")
    return float(c_xi * np.median(values[np.ix_(rows, cols)].min(axis=1)))


def match_dense(a, b, params: DenseParams, strict: bool = True,
                fallback: bool = False) -> MatchResult:
    """Seed from high-degree vertices with close degree profiles, then extend
    by seeded matching.

    Wigner-style matrix inputs use standardized row sums in place of binomial
    degrees, W1 row distances in place of the binned statistic, and the
    corresponding Gaussian thresholds.
    """
    n = a.n
    if b.n != n:
        raise ValueError("size mismatch")
    alpha = params.seed_rate(n)
    is_matrix = isinstance(a, SymMatrix)
    if is_matrix:
        grid = score_grid(a, b, ProfileConfig(q=params.q, distance="w1"))
        deg_a = a.entries.sum(axis=1) / math.sqrt(n)
        deg_b = b.entries.sum(axis=1) / math.sqrt(n)
        tau = norm.isf(alpha)
        kappa_scale = math.sqrt(params.s)
        try:
            xi = _adaptive_xi(grid.values, deg_a, deg_b, tau, tau, params.C_xi)
            seeds = _seed_pairs(deg_a, deg_b, grid.values, tau, tau, xi)
        except SeedSelectionError as err:
            return _seed_failure(err, alpha, float(tau), float("nan"))
    else:
        cfg = ProfileConfig(q=params.q, L=params.bins_for(n), mode=params.mode,
                            distance=params.distance)
        grid = score_grid(a, b, cfg)
        tau = tau_threshold(n, params.q, alpha)
        kappa_scale = None
        try:
            if params.xi_scale == "adaptive":
                xi = _adaptive_xi(grid.values, a.degrees, b.degrees, tau,
                                  tau + 1, params.C_xi)
            else:
                xi = params.profile_threshold(n)
            seeds = build_degree_seed_set(a, b, grid, tau, xi)
        except SeedSelectionError as err:
            return _seed_failure(err, alpha, float(tau), float("nan"))
    if is_matrix:
        kappa = 0.5 * len(seeds) * kappa_scale
    else:
        # Midpoint between the fake count mean m q^2 and the true count mean
        # m q s; reduces to the usual m q s / 2 when q << s but stays above
        # the fake mean for dense graphs.
        kappa = 0.5 * len(seeds) * params.q * (params.q + params.s)
    result = seeded_match(a, b, seeds, q=params.q, s=params.s, kappa=kappa,
                          strict=strict, fallback=fallback)
    extra = {"alpha": alpha, "tau": float(tau), "xi": xi}
    if result.ok:
        return MatchResult.success(result.permutation, **{**extra, **result.info})
    return MatchResult(failure_reason=result.failure_reason,
                       info={**extra, **result.info})


def _seed_failure(err: SeedSelectionError, alpha: float, tau: float,
                  xi: float) -> MatchResult:
    reason = (FailureReason.DEGENERATE_INPUT if err.reason == "empty"
              else FailureReason.NOT_A_PERFECT_MATCHING)
    return MatchResult.failure(reason, seed_error=err.reason, alpha=alpha,
                               tau=tau, xi=xi)


# ---------------------------------------------------------------------------
# Sparse regime: 3-hop similarity.
# ---------------------------------------------------------------------------

def two_hop_neighborhood(g: Graph, i: int) -> np.ndarray:
    """Sorted vertex set {i} ∪ N(i) ∪ N(N(i))."""
    nbrs = g.neighbors(i)
    if nbrs.shape[0] == 0:
        return np.array([i], dtype=np.int64)
    second = np.concatenate([g.neighbors(j) for j in nbrs])
    return np.unique(np.concatenate([[i], nbrs, second]))


def two_hop_outdegree(g: Graph, i: int, ell: int, q: float) -> float:
    """Standardized count of ell's neighbors outside the closed 2-hop
    neighborhood of i.

    Profile construction only requests ell in N(j) \\ N[i] for neighbors j of
    i, but the statistic is well defined for any ell outside N[i] and that is
    all this op requires.
    """
    if ell == i or g.has_edge(i, ell):
        raise ValueError(f"vertex {ell} lies in the closed neighborhood of {i}")
    tilde = two_hop_neighborhood(g, i)
    raw = g.degree(ell) - np.intersect1d(g.neighbors(ell), tilde,
                                         assume_unique=True).shape[0]
    return float(_standardize(raw, g.n - tilde.shape[0], q))


def _two_hop_profile_rows(g: Graph, i: int, L: int, q: float,
                          window_scale: float) -> np.ndarray:
    """Centered binned two-hop profiles, one row per neighbor j of i.

    The profile of j collects the two-hop outdegrees of j's neighbors outside
    N[i]; a neighbor with no such vertices contributes the (negated) reference
    row, i.e. its empirical part is the zero measure.
    """
    nbrs = g.neighbors(i)
    d = nbrs.shape[0]
    if d == 0:
        return np.empty((0, L))
    tilde = two_hop_neighborhood(g, i)
    n_eff = g.n - tilde.shape[0]
    mask = np.zeros(g.n)
    mask[tilde] = 1.0
    # |N(x) ∩ tilde(i)| for every x in one sparse matvec.
    overlap = g.csr() @ mask
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateStandardizationWarning)
        values = _standardize(g.degrees - overlap, n_eff, q)
    ref = standardized_binomial_bin_masses(n_eff, q, L, window_scale)
    closed = np.concatenate([[i], nbrs])
    rows = np.empty((d, L))
    for t, j in enumerate(nbrs):
        cand = np.setdiff1d(g.neighbors(j), closed, assume_unique=False)
        rows[t] = _bin_fractions(values[cand], cand.shape[0], L, window_scale) - ref
    return rows


def w_similarity(a: Graph, b: Graph, i: int, k: int, params: SparseParams) -> int:
    """Size of the maximum bipartite matching between neighbors of i and of k
    whose two-hop profile distance is below eta."""
    n = a.n
    L = params.bins_for(n)
    eta = params.similarity_threshold(n)
    rows_a = _two_hop_profile_rows(a, i, L, params.q, params.window_scale)
    rows_b = _two_hop_profile_rows(b, k, L, params.q, params.window_scale)
    if rows_a.shape[0] == 0 or rows_b.shape[0] == 0:
        return 0
    hit = cdist(rows_a, rows_b, "cityblock") <= eta
    return len(hopcroft_karp(BipartiteGraph.from_bool_matrix(hit)))


def similarity_grid(a: Graph, b: Graph, params: SparseParams) -> ScoreMatrix:
    """All-pairs w_similarity values (larger is better), computed in bulk."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    n = a.n
    L = params.bins_for(n)
    eta = params.similarity_threshold(n)
    prof_a = [_two_hop_profile_rows(a, i, L, params.q, params.window_scale)
              for i in range(n)]
    prof_b = [_two_hop_profile_rows(b, k, L, params.q, params.window_scale)
              for k in range(n)]
    offsets = np.concatenate([[0], np.cumsum([p.shape[0] for p in prof_b])]).astype(np.int64)
    stacked_b = np.vstack([p for p in prof_b if p.shape[0]]) if offsets[-1] else np.empty((0, L))
    w = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        if prof_a[i].shape[0] == 0 or stacked_b.shape[0] == 0:
            continue
        hit = cdist(prof_a[i], stacked_b, "cityblock") <= eta
        w[i] = _kernels.matching_sizes_for_row_block(hit, offsets)
    return ScoreMatrix(w.astype(np.float64), "larger")


def match_sparse(a: Graph, b: Graph, params: SparseParams, strict: bool = True,
                 fallback: bool = False) -> MatchResult:
    """Match by the 3-hop neighbor-profile similarity: best-n selection over
    the w_similarity grid."""
    grid = similarity_grid(a, b, params)
    result = match_by_smallest_n(grid, strict=strict)
    if result.ok or not fallback:
        return result
    return MatchResult.success(greedy_permutation(grid), fallback=True,
                               strict_failure=result.failure_reason.value)
