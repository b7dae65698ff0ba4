"""Greedy matching by sorting pairwise degree-profile distances.

The matcher attaches a profile to every vertex of each graph, computes the
n x n grid of pairwise profile distances, and reads the permutation off the
n smallest entries. Wigner-style symmetric matrices are matched the same
way with row empirical distributions as profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.spatial.distance import cdist

from . import _kernels
from .graph import FailureReason, MatchResult, Permutation
from .models import SymMatrix
from .profiles import (EMPTY_PROFILE_DISTANCE, ProfileConfig,
                       binned_profile_matrix, profile_sample_sets,
                       w1_distance_grid)


@dataclass(frozen=True)
class ScoreMatrix:
    """Dense n x n grid of pairwise scores with an explicit orientation."""

    values: np.ndarray
    orientation: Literal["smaller", "larger"] = "smaller"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", v)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError("score matrix must be square")
        if not np.isfinite(v).all():
            raise ValueError("score matrix entries must be finite")
        if self.orientation not in ("smaller", "larger"):
            raise ValueError(f"unknown orientation {self.orientation!r}")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def ascending_values(self) -> np.ndarray:
        """Values negated if necessary so that smaller always means better."""
        return self.values if self.orientation == "smaller" else -self.values


def _sorted_flat_order(scores: ScoreMatrix) -> np.ndarray:
    # Stable sort on the flattened grid = lexicographic (i, k) tie-breaking.
    return np.argsort(scores.ascending_values(), axis=None, kind="stable")


def greedy_permutation(scores: ScoreMatrix) -> Permutation:
    """Scan entries best-first (ties lexicographic), pairing free vertices;
    always yields a full permutation."""
    order = _sorted_flat_order(scores)
    return Permutation(_kernels.greedy_assignment_from_order(order, scores.n))


def match_by_smallest_n(scores: ScoreMatrix, strict: bool = True) -> MatchResult:
    """Select the n best entries of the grid and return them as a permutation.

    In strict mode the selection fails with ``TIED_SCORES`` when the n-th and
    (n+1)-th sorted values tie (the best-n set is then ambiguous) and with
    ``NOT_A_PERFECT_MATCHING`` when the selected pairs do not form a
    permutation. In permissive mode the scan instead pairs vertices greedily
    best-first, which always produces a permutation.
    """
    n = scores.n
    if n == 0:
        return MatchResult.success(Permutation.identity(0))
    if not strict:
        return MatchResult.success(greedy_permutation(scores), selection="greedy")
    asc = scores.ascending_values()
    order = _sorted_flat_order(scores)
    flat = asc.ravel()
    if order.shape[0] > n and flat[order[n - 1]] == flat[order[n]]:
        return MatchResult.failure(FailureReason.TIED_SCORES,
                                   boundary_value=float(flat[order[n - 1]]))
    top = order[:n]
    rows, cols = top // n, top % n
    image = np.full(n, -1, dtype=np.int64)
    image[rows] = cols
    if len(np.unique(rows)) != n or len(np.unique(cols)) != n:
        return MatchResult.failure(FailureReason.NOT_A_PERFECT_MATCHING,
                                   distinct_rows=int(len(np.unique(rows))),
                                   distinct_cols=int(len(np.unique(cols))))
    return MatchResult.success(Permutation(image))


def score_grid(a, b, cfg: ProfileConfig) -> ScoreMatrix:
    """Pairwise profile distances between vertices of a and b (smaller is
    better). Pairs involving an empty profile get the max-float sentinel."""
    if isinstance(a, SymMatrix) != isinstance(b, SymMatrix):
        raise TypeError("inputs must both be graphs or both be symmetric matrices")
    if isinstance(a, SymMatrix):
        if a.n != b.n:
            raise ValueError("size mismatch")
        if cfg.distance != "w1":
            raise ValueError("matrix inputs support only the 'w1' distance")
        if a.n == 0:
            return ScoreMatrix(np.zeros((0, 0)))
        rows_a = np.sort(a.entries, axis=1)
        rows_b = np.sort(b.entries, axis=1)
        # Equal sample counts: W1 = (1/n) * L1 distance of sorted rows.
        return ScoreMatrix(cdist(rows_a, rows_b, "cityblock") / a.n)
    if a.n != b.n:
        raise ValueError("size mismatch")
    if cfg.distance == "w1":
        samples_a, _ = profile_sample_sets(a, cfg)
        samples_b, _ = profile_sample_sets(b, cfg)
        return ScoreMatrix(w1_distance_grid(samples_a, samples_b))
    values = cdist(binned_profile_matrix(a, cfg), binned_profile_matrix(b, cfg),
                   "cityblock")
    values[a.degrees == 0, :] = EMPTY_PROFILE_DISTANCE
    values[:, b.degrees == 0] = EMPTY_PROFILE_DISTANCE
    return ScoreMatrix(values)


def match_degree_profile(a, b, cfg: ProfileConfig, strict: bool = True,
                         fallback: bool = False) -> MatchResult:
    """Match two graphs (or symmetric matrices) by degree-profile distances.

    With ``fallback=True`` a failed strict selection is completed greedily
    over the same grid and the result is flagged ``fallback``.
    """
    grid = score_grid(a, b, cfg)
    result = match_by_smallest_n(grid, strict=strict)
    if result.ok or not fallback:
        return result
    perm = greedy_permutation(grid)
    return MatchResult.success(perm, fallback=True,
                               strict_failure=result.failure_reason.value)
