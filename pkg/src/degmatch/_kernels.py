"""Numba kernels for the two hot inner loops: greedy assignment over a sorted
score order, and batched maximum-bipartite-matching sizes (Kuhn's algorithm)."""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def greedy_assignment_from_order(order: np.ndarray, n: int) -> np.ndarray:
    """Scan flattened (i*n + k) indices in the given order, pairing i with k
    whenever both are free; complete leftover vertices in ascending index
    order. Returns the image array of the resulting permutation."""
    image = np.full(n, -1, dtype=np.int64)
    row_free = np.ones(n, dtype=np.bool_)
    col_free = np.ones(n, dtype=np.bool_)
    matched = 0
    for t in range(order.shape[0]):
        idx = order[t]
        i = idx // n
        k = idx - i * n
        if row_free[i] and col_free[k]:
            image[i] = k
            row_free[i] = False
            col_free[k] = False
            matched += 1
            if matched == n:
                break
    if matched < n:
        free_cols = np.empty(n - matched, dtype=np.int64)
        c = 0
        for k in range(n):
            if col_free[k]:
                free_cols[c] = k
                c += 1
        c = 0
        for i in range(n):
            if row_free[i]:
                image[i] = free_cols[c]
                c += 1
    return image


@njit(cache=True)
def matching_sizes_for_row_block(hit: np.ndarray, col_offsets: np.ndarray) -> np.ndarray:
    """Maximum-matching sizes of the bipartite graphs formed by the rows of
    ``hit`` (left side) against each column block ``col_offsets[k]:[k+1]``.

    Kuhn's augmenting-path algorithm per block; exact (agrees with
    Hopcroft-Karp), fast enough at neighborhood scale.
    """
    n_left = hit.shape[0]
    n_blocks = col_offsets.shape[0] - 1
    out = np.zeros(n_blocks, dtype=np.int64)
    if n_left == 0:
        return out
    cap = n_left + 2
    stack_row = np.empty(cap, dtype=np.int64)
    stack_col = np.empty(cap, dtype=np.int64)
    cursor = np.empty(cap, dtype=np.int64)
    for b in range(n_blocks):
        lo = col_offsets[b]
        width = col_offsets[b + 1] - lo
        if width == 0:
            continue
        match_col = np.full(width, -1, dtype=np.int64)
        visited = np.empty(width, dtype=np.bool_)
        size = 0
        limit = min(n_left, width)
        for u in range(n_left):
            if size == limit:
                break
            visited[:] = False
            depth = 0
            stack_row[0] = u
            cursor[0] = 0
            found = False
            while depth >= 0:
                r = stack_row[depth]
                c = cursor[depth]
                progressed = False
                while c < width:
                    if hit[r, lo + c] and not visited[c]:
                        visited[c] = True
                        stack_col[depth] = c
                        cursor[depth] = c + 1
                        owner = match_col[c]
                        if owner < 0:
                            for d in range(depth + 1):
                                match_col[stack_col[d]] = stack_row[d]
                            found = True
                        else:
                            depth += 1
                            stack_row[depth] = owner
                            cursor[depth] = 0
                        progressed = True
                        break
                    c += 1
                if found:
                    break
                if not progressed:
                    depth -= 1
            if found:
                size += 1
        out[b] = size
    return out
