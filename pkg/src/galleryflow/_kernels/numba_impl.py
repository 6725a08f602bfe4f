"""Numba-jitted kernel implementations.

Arithmetic mirrors ``numpy_impl`` exactly (no fastmath), so both backends
produce the same merge structures and matching floats; only summation order
inside silhouette reductions can differ at the last ulp.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def _jaccard_matrix(indptr, indices, n_cols):
    n = indptr.shape[0] - 1
    d = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        a0, a1 = indptr[i], indptr[i + 1]
        for j in range(i + 1, n):
            b0, b1 = indptr[j], indptr[j + 1]
            inter = 0
            p, q = a0, b0
            while p < a1 and q < b1:
                ai, bj = indices[p], indices[q]
                if ai == bj:
                    inter += 1
                    p += 1
                    q += 1
                elif ai < bj:
                    p += 1
                else:
                    q += 1
            union = (a1 - a0) + (b1 - b0) - inter
            dist = 1.0 - inter / union
            d[i, j] = dist
            d[j, i] = dist
    return d


@njit(cache=True)
def _upgma_linkage(dist):
    n = dist.shape[0]
    work = dist.copy()
    sizes = np.ones(n, dtype=np.float64)
    node_id = np.arange(n, dtype=np.int64)
    active = np.ones(n, dtype=np.bool_)
    merges = np.zeros((n - 1, 4), dtype=np.float64)

    for i in range(n):
        work[i, i] = np.inf

    # cached per-row minima; inactive slots and the diagonal hold inf
    row_min = np.empty(n, dtype=np.float64)
    for i in range(n):
        m = np.inf
        for k in range(n):
            if work[i, k] < m:
                m = work[i, k]
        row_min[i] = m

    for step in range(n - 1):
        best = np.inf
        for k in range(n):
            if active[k] and row_min[k] < best:
                best = row_min[k]
        # smallest-node-id tied row, then its smallest-node-id tied partner,
        # gives the lexicographically smallest (left, right) pair
        r = -1
        for k in range(n):
            if active[k] and row_min[k] == best and (r < 0 or node_id[k] < node_id[r]):
                r = k
        c = -1
        for k in range(n):
            if work[r, k] == best and (c < 0 or node_id[k] < node_id[c]):
                c = k
        p = node_id[r]
        q = node_id[c]
        if r < c:
            i, j = r, c
        else:
            i, j = c, r
        size = sizes[i] + sizes[j]
        merges[step, 0] = p
        merges[step, 1] = q
        merges[step, 2] = best
        merges[step, 3] = size

        stale = np.zeros(n, dtype=np.bool_)
        for k in range(n):
            if k == i or k == j or not active[k]:
                continue
            if work[k, i] == row_min[k] or work[k, j] == row_min[k]:
                stale[k] = True
            nd = (sizes[i] * work[i, k] + sizes[j] * work[j, k]) / size
            work[i, k] = nd
            work[k, i] = nd
        active[j] = False
        for k in range(n):
            work[j, k] = np.inf
            work[k, j] = np.inf
        sizes[i] = size
        node_id[i] = n + step

        # merged distances are means of the old pair, so no row's min can
        # drop; only rows whose min sat in column i or j need a rescan
        row_min[j] = np.inf
        m = np.inf
        for k in range(n):
            if work[i, k] < m:
                m = work[i, k]
        row_min[i] = m
        for k in range(n):
            if stale[k]:
                m2 = np.inf
                for jj in range(n):
                    if work[k, jj] < m2:
                        m2 = work[k, jj]
                row_min[k] = m2
    return merges


@njit(cache=True)
def _silhouette_samples(dist, labels, k):
    n = dist.shape[0]
    counts = np.zeros(k, dtype=np.float64)
    for i in range(n):
        counts[labels[i]] += 1.0

    sums = np.zeros((n, k), dtype=np.float64)
    for i in range(n):
        for j in range(n):
            sums[i, labels[j]] += dist[i, j]

    s = np.zeros(n, dtype=np.float64)
    for i in range(n):
        own = labels[i]
        if counts[own] <= 1.0:
            s[i] = 0.0
            continue
        a = sums[i, own] / (counts[own] - 1.0)
        b = np.inf
        for c in range(k):
            if c != own and counts[c] > 0.0:
                m = sums[i, c] / counts[c]
                if m < b:
                    b = m
        denom = a if a > b else b
        s[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return s


def jaccard_matrix(indptr: np.ndarray, indices: np.ndarray, n_cols: int) -> np.ndarray:
    return _jaccard_matrix(
        np.ascontiguousarray(indptr, dtype=np.int64),
        np.ascontiguousarray(indices, dtype=np.int64),
        n_cols,
    )


def upgma_linkage(dist: np.ndarray) -> np.ndarray:
    return _upgma_linkage(np.ascontiguousarray(dist, dtype=np.float64))


def silhouette_samples(dist: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    return _silhouette_samples(
        np.ascontiguousarray(dist, dtype=np.float64),
        np.ascontiguousarray(labels, dtype=np.int64),
        k,
    )
