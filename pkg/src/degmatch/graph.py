"""Core graph and permutation primitives shared by all matchers.

Graphs are immutable, undirected and simple, with vertices 0..n-1.
Adjacency is stored in CSR-like flat arrays so neighbor lists are cheap
to slice and membership tests are binary searches on sorted arrays.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import IO, Any, Iterable, Mapping

import numpy as np
import scipy.sparse as sp


class EdgeListParseError(ValueError):
    """Raised when an edge-list line cannot be parsed; carries the line number."""

    def __init__(self, line_no: int, line: str, reason: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {reason}: {line!r}")


class Permutation:
    """A bijection on {0..n-1}, stored as the image array i -> pi(i)."""

    __slots__ = ("image",)

    def __init__(self, image: Iterable[int]):
        arr = np.array(image, dtype=np.int64)
        if arr.ndim != 1:
            raise ValueError("permutation image must be one-dimensional")
        n = arr.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise ValueError("permutation image values out of range")
        seen[arr] = True
        if not seen.all():
            raise ValueError("permutation image is not a bijection")
        arr.setflags(write=False)
        self.image = arr

    @property
    def n(self) -> int:
        return self.image.shape[0]

    def __call__(self, i: int) -> int:
        return int(self.image[i])

    def inverse(self) -> "Permutation":
        inv = np.empty(self.n, dtype=np.int64)
        inv[self.image] = np.arange(self.n)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """Return self after other: i -> self(other(i))."""
        if self.n != other.n:
            raise ValueError("size mismatch in composition")
        return Permutation(self.image[other.image])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n, dtype=np.int64))

    @classmethod
    def random(cls, n: int, rng: np.random.Generator) -> "Permutation":
        return cls(rng.permutation(n))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self.image, other.image))

    def __hash__(self):
        return hash(self.image.tobytes())

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Permutation({self.image.tolist()})"


class FailureReason(enum.Enum):
    NOT_A_PERFECT_MATCHING = "not-a-perfect-matching"
    TIED_SCORES = "tied-scores"
    DEGENERATE_INPUT = "degenerate-input"


@dataclass(frozen=True)
class MatchResult:
    """Outcome of a matcher: exactly one of permutation / failure_reason is set."""

    permutation: Permutation | None = None
    failure_reason: FailureReason | None = None
    info: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if (self.permutation is None) == (self.failure_reason is None):
            raise ValueError("exactly one of permutation / failure_reason must be set")

    @property
    def ok(self) -> bool:
        return self.permutation is not None

    @classmethod
    def success(cls, permutation: Permutation, **info: Any) -> "MatchResult":
        return cls(permutation=permutation, info=info)

    @classmethod
    def failure(cls, reason: FailureReason, **info: Any) -> "MatchResult":
        return cls(failure_reason=reason, info=info)


class Graph:
    """Immutable undirected simple graph.

    Neighbor lists are sorted ascending; self-loops are dropped and duplicate
    edges collapse at construction.
    """

    __slots__ = ("n", "_indptr", "_indices", "_degrees", "_num_edges",
                 "_dense", "_csr")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        uv = np.array([(u, v) for u, v in edges], dtype=np.int64).reshape(-1, 2)
        g = Graph.from_edge_array(n, uv)
        self.n = g.n
        self._indptr = g._indptr
        self._indices = g._indices
        self._degrees = g._degrees
        self._num_edges = g._num_edges
        self._dense = None
        self._csr = None

    @classmethod
    def from_edge_array(cls, n: int, uv: np.ndarray) -> "Graph":
        """Build a graph from an (m, 2) integer array, collapsing duplicates
        and dropping self-loops."""
        self = cls.__new__(cls)
        uv = np.asarray(uv, dtype=np.int64).reshape(-1, 2)
        if uv.size and (uv.min() < 0 or uv.max() >= n):
            raise ValueError("vertex id out of range")
        u = np.minimum(uv[:, 0], uv[:, 1])
        v = np.maximum(uv[:, 0], uv[:, 1])
        keep = u != v
        u, v = u[keep], v[keep]
        codes = np.unique(u * n + v)
        u, v = codes // n, codes % n
        heads = np.concatenate([u, v])
        tails = np.concatenate([v, u])
        order = np.lexsort((tails, heads))
        heads, tails = heads[order], tails[order]
        self.n = n
        self._indices = tails
        self._degrees = np.bincount(heads, minlength=n).astype(np.int64)
        self._indptr = np.concatenate([[0], np.cumsum(self._degrees)]).astype(np.int64)
        self._num_edges = int(codes.shape[0])
        self._dense = None
        self._csr = None
        for arr in (self._indices, self._degrees, self._indptr):
            arr.setflags(write=False)
        return self

    @property
    def num_edges(self) -> int:
        return self._num_edges

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees

    def degree(self, i: int) -> int:
        return int(self._degrees[i])

    def neighbors(self, i: int) -> np.ndarray:
        """Sorted array of neighbors of i (read-only view)."""
        return self._indices[self._indptr[i]:self._indptr[i + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return pos < nbrs.shape[0] and nbrs[pos] == v

    def edges(self) -> np.ndarray:
        """(m, 2) array of edges with u < v, lexicographically sorted."""
        u = np.repeat(np.arange(self.n), self._degrees)
        v = self._indices
        keep = u < v
        return np.column_stack([u[keep], v[keep]])

    def adjacency_matrix(self) -> np.ndarray:
        """Dense float64 adjacency (cached). Fine at desk scale n <~ 2000."""
        if self._dense is None:
            a = np.zeros((self.n, self.n))
            u = np.repeat(np.arange(self.n), self._degrees)
            a[u, self._indices] = 1.0
            a.setflags(write=False)
            self._dense = a
        return self._dense

    def csr(self) -> sp.csr_matrix:
        """Sparse float64 adjacency in CSR form (cached)."""
        if self._csr is None:
            data = np.ones(self._indices.shape[0])
            self._csr = sp.csr_matrix(
                (data, self._indices.copy(), self._indptr.copy()),
                shape=(self.n, self.n))
        return self._csr

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.num_edges})"


def apply_permutation(g: Graph, p: Permutation) -> Graph:
    """Relabel g by p: edge {u, v} in the result iff {p^-1(u), p^-1(v)} in g."""
    if p.n != g.n:
        raise ValueError(f"size mismatch: graph n={g.n}, permutation n={p.n}")
    uv = g.edges()
    return Graph.from_edge_array(g.n, p.image[uv])


def accuracy(pi_hat: Permutation, pi_star: Permutation) -> float:
    """Fraction of indices where the two permutations agree."""
    if pi_hat.n != pi_star.n:
        raise ValueError("size mismatch between estimate and ground truth")
    if pi_hat.n == 0:
        return 1.0
    return float(np.mean(pi_hat.image == pi_star.image))


def parse_edge_pairs(
    stream: IO[str] | Iterable[str],
    max_vertex_id: int | None = None,
) -> np.ndarray:
    """Parse '#'-commented whitespace-separated id pairs into an (m, 2) array.

    Pairs touching an id above max_vertex_id (when given) are dropped;
    malformed lines raise :class:`EdgeListParseError` with the line number.
    """
    pairs: list[tuple[int, int]] = []
    for line_no, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(line_no, line, "expected two tokens")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(line_no, line, "non-integer token") from None
        if max_vertex_id is not None and (u > max_vertex_id or v > max_vertex_id):
            continue
        if u < 0 or v < 0:
            raise EdgeListParseError(line_no, line, "negative vertex id")
        pairs.append((u, v))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def ingest_edge_list(
    stream: IO[str] | Iterable[str],
    max_vertex_id: int | None = None,
) -> tuple[Graph, dict[int, int]]:
    """Parse a SNAP-style edge list into a graph plus external-id map.

    Lines hold two whitespace-separated integer ids; lines starting with '#'
    are comments. Direction is collapsed (an edge is present if either
    orientation appears), self-loops and duplicates are dropped, and vertices
    with id > max_vertex_id (when given) are removed entirely. Retained ids
    are re-indexed densely to 0..n-1 in ascending id order.

    Returns:
        (graph, id_map) where id_map maps external id -> internal index.
    """
    uv = parse_edge_pairs(stream, max_vertex_id)
    ids = np.unique(uv) if uv.size else np.empty(0, dtype=np.int64)
    id_map = {int(ext): idx for idx, ext in enumerate(ids)}
    remapped = np.searchsorted(ids, uv) if uv.size else uv
    return Graph.from_edge_array(len(ids), remapped), id_map
