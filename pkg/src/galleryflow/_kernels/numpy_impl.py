"""Pure-numpy kernel implementations.

These are the always-available fallback path. The numba twins in
``numba_impl`` follow the same arithmetic step-for-step: intersections and
unions are exact small integers, and the linkage update applies the identical
elementwise expression, so merge structures agree exactly across backends and
heights agree to the last ulp.
"""

from __future__ import annotations

import numpy as np


def jaccard_matrix(indptr: np.ndarray, indices: np.ndarray, n_cols: int) -> np.ndarray:
    """Full symmetric Jaccard distance matrix from CSR set membership.

    Row i of the implied binary matrix holds the sorted object columns
    ``indices[indptr[i]:indptr[i+1]]``.
    """
    n = indptr.shape[0] - 1
    sizes = np.diff(indptr).astype(np.float64)
    m = np.zeros((n, n_cols), dtype=np.float64)
    rows = np.repeat(np.arange(n), np.diff(indptr))
    m[rows, indices] = 1.0
    inter = m @ m.T
    union = sizes[:, None] + sizes[None, :] - inter
    d = 1.0 - inter / union
    np.fill_diagonal(d, 0.0)
    return d


def upgma_linkage(dist: np.ndarray) -> np.ndarray:
    """Average-linkage merge table for a symmetric distance matrix.

    Returns an (n-1, 4) array of (left_node, right_node, height, size).
    Leaves are nodes 0..n-1; merge t creates node n+t. Each step merges the
    globally closest active pair; exact ties resolve to the smallest
    (left, right) node-id pair. Cluster distances follow the size-weighted
    average update, which equals the mean over all cross pairs.
    """
    n = dist.shape[0]
    work = dist.astype(np.float64, copy=True)
    sizes = np.ones(n, dtype=np.float64)
    node_id = np.arange(n, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    merges = np.zeros((n - 1, 4), dtype=np.float64)

    np.fill_diagonal(work, np.inf)
    # cached per-row minima; inactive slots and the diagonal hold inf, so a
    # full-row min equals the min over active partners
    row_min = work.min(axis=1) if n > 1 else np.full(n, np.inf)

    for step in range(n - 1):
        best = row_min[active].min()
        # every slot incident to a tied pair has row_min == best, so the
        # lexicographically smallest (left, right) node pair is: the tied
        # slot with the smallest node id, joined to its smallest-id partner
        cand = np.nonzero(active & (row_min == best))[0]
        r = int(cand[np.argmin(node_id[cand])])
        cols = np.nonzero(work[r] == best)[0]
        c = int(cols[np.argmin(node_id[cols])])
        p, q = int(node_id[r]), int(node_id[c])
        i, j = (r, c) if r < c else (c, r)
        size = sizes[i] + sizes[j]
        merges[step] = (p, q, best, size)

        others = active.copy()
        others[i] = others[j] = False
        col_i_old = work[:, i].copy()
        col_j_old = work[:, j].copy()
        work[i, others] = (sizes[i] * work[i, others] + sizes[j] * work[j, others]) / size
        work[others, i] = work[i, others]
        active[j] = False
        work[j, :] = np.inf
        work[:, j] = np.inf
        sizes[i] = size
        node_id[i] = n + step

        # merged distances are means of the old pair, so no row's min can
        # drop; only rows whose min sat in column i or j need a rescan
        row_min[j] = np.inf
        row_min[i] = work[i].min()
        stale = np.nonzero(others & ((col_i_old == row_min) | (col_j_old == row_min)))[0]
        if stale.size:
            row_min[stale] = work[stale].min(axis=1)
    return merges


def silhouette_samples(dist: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Per-point silhouette widths for a labelled distance matrix.

    ``labels`` are 0-based cluster indices. Members of singleton clusters
    score 0, as do points where both the intra and nearest-other mean
    distances vanish.
    """
    n = dist.shape[0]
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((n, k), dtype=np.float64)
    for c in range(k):
        sums[:, c] = dist[:, labels == c].sum(axis=1)

    s = np.zeros(n, dtype=np.float64)
    for i in range(n):
        own = labels[i]
        if counts[own] <= 1:
            s[i] = 0.0
            continue
        a = sums[i, own] / (counts[own] - 1.0)
        b = np.inf
        for c in range(k):
            if c != own and counts[c] > 0:
                m = sums[i, c] / counts[c]
                if m < b:
                    b = m
        denom = max(a, b)
        s[i] = 0.0 if denom == 0.0 else (b - a) / denom
    return s
