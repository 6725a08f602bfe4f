"""Small statistics helpers: ranks, correlations, normalized entropy.

Kept dependency-free so analytic stages stay RNG- and scipy-free; the test
suite cross-checks these against scipy.
"""

from __future__ import annotations

import math

import numpy as np


def rankdata(values) -> np.ndarray:
    """Midrank transform (average rank for ties), ranks starting at 1."""
    a = np.asarray(values, dtype=np.float64)
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size, dtype=np.float64)
    sorted_a = a[order]
    i = 0
    while i < a.size:
        j = i
        while j + 1 < a.size and sorted_a[j + 1] == sorted_a[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def pearson(x, y) -> float:
    """Pearson correlation; nan when either side has zero variance."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size:
        raise ValueError("pearson: length mismatch")
    if x.size < 2:
        return float("nan")
    if np.all(x == x[0]) or np.all(y == y[0]):
        return float("nan")
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        return float("nan")
    return float(np.clip((xc @ yc) / (sx * sy), -1.0, 1.0))


def spearman(x, y) -> float:
    """Spearman rank correlation with midranks for ties."""
    return pearson(rankdata(x), rankdata(y))


def normalized_entropy(counts, n_positions: int) -> float:
    """Shannon entropy of an empirical distribution over ``n_positions``
    possible outcomes, normalized to [0, 1]; 0 for a point mass."""
    if n_positions < 1:
        raise ValueError("need at least one position")
    c = np.asarray(counts, dtype=np.float64)
    total = c.sum()
    if total <= 0:
        raise ValueError("entropy of empty distribution")
    if n_positions == 1:
        return 0.0
    p = c[c > 0] / total
    h = float(-(p * np.log(p)).sum())
    return h / math.log(n_positions) + 0.0
