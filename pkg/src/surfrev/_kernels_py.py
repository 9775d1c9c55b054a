"""Pure numpy lattice kernels (reference and fallback for the compiled ones).

Chebyshev series live on [0, 1]; evaluation mirrors numpy's Clenshaw loop
with the domain map ``y = -1 + 2 x`` so both backends agree bit for bit.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


def cheb01(coef: np.ndarray, x):
    y = -1.0 + 2.0 * np.asarray(x, dtype=float)
    if len(coef) == 1:
        return coef[0] + 0.0 * y
    y2 = 2.0 * y
    c0 = coef[-2]
    c1 = coef[-1]
    for i in range(3, len(coef) + 1):
        tmp = c0
        c0 = coef[-i] - c1
        c1 = tmp + c1 * y2
    return c0 + c1 * y


def norm_at(rho: np.ndarray, p1, p2):
    """``X(p1, p2)`` for ``p1 > 0`` and ``|p2| <= p1``."""
    p1 = np.asarray(p1, dtype=float)
    r = np.minimum(np.abs(p2) / p1, 1.0)
    return p1 * cheb01(rho, r)


def column_counts(rho: np.ndarray, g: np.ndarray, R: float, l0: int, l1: int) -> np.ndarray:
    """Number of ``k >= l`` with ``X(k + 1/2, l) <= R`` for ``l0 <= l < l1``."""
    l = np.arange(l0, l1, dtype=np.int64)
    if len(l) == 0:
        return np.zeros(0, dtype=np.int64)
    lf = l.astype(float)
    u = np.minimum(lf / R, 1.0)
    k = np.floor(R * cheb01(g, u) - 0.5).astype(np.int64)
    k = np.maximum(k, l - 1)
    # pull down while the top point is outside, push up while the next is inside
    while True:
        over = (k >= l) & (norm_at(rho, k + 0.5, lf) > R)
        if not over.any():
            break
        k[over] -= 1
    while True:
        under = norm_at(rho, k + 1.5, lf) <= R
        if not under.any():
            break
        k[under] += 1
    return np.maximum(k - l + 1, 0)


def fill_norms(rho: np.ndarray, counts: np.ndarray, l0: int) -> np.ndarray:
    """All ``X(k + 1/2, l)`` for the first ``counts[l - l0]`` admissible ``k``."""
    counts = np.asarray(counts, dtype=np.int64)
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0)
    l = np.repeat(np.arange(l0, l0 + len(counts), dtype=np.int64), counts)
    starts = np.cumsum(counts) - counts
    offs = np.arange(total, dtype=np.int64) - np.repeat(starts, counts)
    k = l + offs
    return norm_at(rho, k + 0.5, l.astype(float))
