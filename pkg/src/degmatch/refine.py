"""Post-processing: greedy matching, exact linear assignment, and the
iterative clean-up loop (projected power iteration on A @ Pi @ B)."""

from __future__ import annotations

import numpy as np
import scipy.optimize

from .dp import ScoreMatrix, greedy_permutation
from .graph import Permutation
from .models import SymMatrix


def greedy_match(w: ScoreMatrix) -> Permutation:
    """Scan entries in decreasing order (ties lexicographic by (i, j)), adding
    a pair whenever both endpoints are free; leftovers complete ascending."""
    if w.orientation != "larger":
        raise ValueError("greedy_match expects a larger-is-better score matrix")
    return greedy_permutation(w)


def linear_assignment(w: ScoreMatrix, prefer: Permutation | None = None) -> Permutation:
    """Exact argmax over permutations of <Pi, W>.

    When ``prefer`` attains the optimum (within a tiny relative tolerance for
    float grids) it is returned, which makes repeated exact clean-up steps
    stable at their fixed points.
    """
    if w.orientation != "larger":
        raise ValueError("linear_assignment expects a larger-is-better score matrix")
    rows, cols = scipy.optimize.linear_sum_assignment(w.values, maximize=True)
    image = np.empty(w.n, dtype=np.int64)
    image[rows] = cols
    best = float(w.values[rows, cols].sum())
    if prefer is not None:
        if prefer.n != w.n:
            raise ValueError("prefer permutation has wrong size")
        val = float(w.values[np.arange(w.n), prefer.image].sum())
        if val >= best - 1e-9 * max(1.0, abs(best)):
            return prefer
    return Permutation(image)


def _propagated_scores(a, b, pi: Permutation) -> np.ndarray:
    """(A Pi B)_{ik}: common-neighbor mass between i and k under pi."""
    if isinstance(a, SymMatrix):
        return a.entries @ b.entries[pi.image]
    return np.asarray((a.csr() @ b.csr()[pi.image]).todense())


def iterative_cleanup(a, b, pi_init: Permutation, max_iters: int = 100,
                      solver: str = "greedy") -> Permutation:
    """Repeatedly re-match against A @ Pi_t @ B until the permutation repeats
    or the iteration cap is hit.

    ``solver='greedy'`` uses the greedy matching scan (the fast default);
    ``solver='exact'`` solves the linear assignment with a prefer-current
    tie-break, so a repeated permutation is a genuine fixed point.
    """
    n = a.n if isinstance(a, SymMatrix) else a.n
    if n != (b.n if isinstance(b, SymMatrix) else b.n) or pi_init.n != n:
        raise ValueError("size mismatch")
    if solver not in ("greedy", "exact"):
        raise ValueError(f"unknown solver {solver!r}")
    current = pi_init
    previous: Permutation | None = None
    for _ in range(max_iters):
        scores = ScoreMatrix(_propagated_scores(a, b, current), "larger")
        if solver == "exact":
            nxt = linear_assignment(scores, prefer=current)
        else:
            nxt = greedy_match(scores)
        if nxt == current:
            return nxt
        if previous is not None and nxt == previous:
            # Two-cycle: oscillation between two permutations; stop early.
            return nxt
        previous, current = current, nxt
    return current
