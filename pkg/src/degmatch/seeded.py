"""Seeded graph matching: extend a correct partial matching to a full
permutation via thresholded common-neighbor counts, maximum bipartite
matching, and a final best-n refinement pass."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .dp import ScoreMatrix, greedy_permutation, match_by_smallest_n
from .graph import Graph, MatchResult, Permutation
from .models import SymMatrix


@dataclass(frozen=True)
class SeedMap:
    """Injective partial map S -> T of already-matched vertex pairs."""

    pairs: Mapping[int, int]

    def __post_init__(self):
        object.__setattr__(self, "pairs", dict(self.pairs))
        targets = set(self.pairs.values())
        if len(targets) != len(self.pairs):
            raise ValueError("seed map is not injective")

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def sources(self) -> np.ndarray:
        return np.array(sorted(self.pairs), dtype=np.int64)

    @property
    def targets(self) -> np.ndarray:
        return np.array([self.pairs[i] for i in sorted(self.pairs)], dtype=np.int64)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "SeedMap":
        d = {}
        for i, k in pairs:
            if i in d:
                raise ValueError(f"repeated source vertex {i}")
            d[int(i)] = int(k)
        return cls(d)

    @classmethod
    def from_permutation(cls, p: Permutation, subset: Iterable[int]) -> "SeedMap":
        return cls({int(i): int(p.image[i]) for i in subset})


@dataclass(frozen=True)
class BipartiteGraph:
    """Bipartite graph with per-left-vertex sorted adjacency arrays."""

    left_size: int
    right_size: int
    adjacency: tuple

    def __post_init__(self):
        if len(self.adjacency) != self.left_size:
            raise ValueError("adjacency must have one entry per left vertex")
        for nbrs in self.adjacency:
            if len(nbrs) and (min(nbrs) < 0 or max(nbrs) >= self.right_size):
                raise ValueError("right vertex id out of range")

    @classmethod
    def from_bool_matrix(cls, h: np.ndarray) -> "BipartiteGraph":
        h = np.asarray(h, dtype=bool)
        adjacency = tuple(np.flatnonzero(row) for row in h)
        return cls(h.shape[0], h.shape[1], adjacency)


def hopcroft_karp(bg: BipartiteGraph) -> list[tuple[int, int]]:
    """Maximum-cardinality matching, returned as disjoint (left, right) pairs."""
    INF = np.iinfo(np.int64).max
    match_l = [-1] * bg.left_size
    match_r = [-1] * bg.right_size
    dist = [0] * bg.left_size

    def bfs() -> bool:
        queue = deque()
        for u in range(bg.left_size):
            if match_l[u] == -1:
                dist[u] = 0
                queue.append(u)
            else:
                dist[u] = INF
        found = False
        while queue:
            u = queue.popleft()
            for v in bg.adjacency[u]:
                w = match_r[v]
                if w == -1:
                    found = True
                elif dist[w] == INF:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return found

    def dfs(u: int) -> bool:
        for v in bg.adjacency[u]:
            w = match_r[v]
            if w == -1 or (dist[w] == dist[u] + 1 and dfs(w)):
                match_l[u] = v
                match_r[v] = u
                return True
        dist[u] = INF
        return False

    while bfs():
        for u in range(bg.left_size):
            if match_l[u] == -1:
                dfs(u)
    return [(u, v) for u, v in enumerate(match_l) if v != -1]


def _dense(x) -> np.ndarray:
    return x.entries if isinstance(x, SymMatrix) else x.adjacency_matrix()


def count_common_neighbors_under(a, b, p: Permutation) -> ScoreMatrix:
    """w_{ik} = sum_j A_{ij} B_{k, p(j)}: common-neighbor counts when the two
    graphs are aligned by p (larger is better)."""
    if a.n != b.n or p.n != a.n:
        raise ValueError("size mismatch")
    if isinstance(a, SymMatrix) or isinstance(b, SymMatrix):
        w = _dense(a) @ _dense(b)[p.image]
    else:
        w = np.asarray((a.csr() @ b.csr()[p.image]).todense())
    return ScoreMatrix(w, "larger")


def estimate_edge_probability(a: Graph, b: Graph) -> float:
    """q-hat = (|E_A| + |E_B|) / (2 C(n,2)), the pooled edge density."""
    n = a.n
    if n < 2:
        return 0.0
    return (a.num_edges + b.num_edges) / (2.0 * n * (n - 1) / 2.0)


def seeded_match(a, b, seeds: SeedMap, q: float, s: float,
                 kappa: float | None = None, strict: bool = True,
                 fallback: bool = False) -> MatchResult:
    """Extend a correct partial matching to all vertices.

    Stage 1 counts, for every unseeded pair (i, k), the seeds j with i ~ j in
    A and k ~ seeds(j) in B, thresholds the counts at kappa = |S| q s / 2, and
    takes a maximum bipartite matching of the resulting indicator graph;
    unmatched vertices are paired in ascending index order. Stage 2 re-scores
    every pair by common-neighbor counts under the stage-1 permutation and
    selects the best n entries as in the profile matcher.
    """
    n = a.n
    if b.n != n:
        raise ValueError("size mismatch")
    if len(seeds) == 0:
        raise ValueError("seed map must be nonempty")
    src, tgt = seeds.sources, seeds.targets
    if (src.max() >= n) or (tgt.max() >= n):
        raise ValueError("seed vertex out of range")
    if kappa is None:
        kappa = 0.5 * len(seeds) * q * s
    comp_s = np.setdiff1d(np.arange(n), src)
    comp_t = np.setdiff1d(np.arange(n), tgt)
    image = np.full(n, -1, dtype=np.int64)
    image[src] = tgt
    h_size = 0
    if comp_s.size:
        da, db = _dense(a), _dense(b)
        counts = da[np.ix_(comp_s, src)] @ db[np.ix_(comp_t, tgt)].T
        matching = hopcroft_karp(BipartiteGraph.from_bool_matrix(counts >= kappa))
        h_size = len(matching)
        for u, v in matching:
            image[comp_s[u]] = comp_t[v]
        # Deterministic completion: leftover vertices pair in ascending order.
        left_over = comp_s[image[comp_s] == -1]
        right_over = np.setdiff1d(comp_t, image[comp_s[image[comp_s] >= 0]])
        image[left_over] = right_over
    pi_1 = Permutation(image)
    w = count_common_neighbors_under(a, b, pi_1)
    result = match_by_smallest_n(w, strict=strict)
    info = {"seed_count": len(seeds), "h_matching_size": h_size,
            "h_perfect": h_size == comp_s.size}
    if result.ok:
        return MatchResult.success(result.permutation, **{**info, **result.info})
    if fallback:
        return MatchResult.success(greedy_permutation(w), fallback=True,
                                   strict_failure=result.failure_reason.value,
                                   **info)
    return MatchResult(failure_reason=result.failure_reason,
                       info={**info, **result.info})
