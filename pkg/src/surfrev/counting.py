"""Bohr-Sommerfeld lattice counts and the normalized Weyl remainder F(R).

``N_BS(R)`` counts ``(k + 1/2, l)`` with ``|l| <= k`` and ``X <= R``.  Each
column ``l`` is an interval in ``k`` (X increases with p1 at fixed p2), whose
top is estimated from ``R g(l/R)`` and then fixed against X itself, so the
count is exactly the set ``{X <= R}`` as X is evaluated.

For a whole R-grid every norm below ``R_max`` is computed once and sorted;
``N(R)`` is then a ``searchsorted``.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .bscurve import SpectralCurve

__all__ = [
    "ErrorSeries",
    "count_bs",
    "count_shifted",
    "sorted_norms",
    "error_series",
    "cache_key",
    "write_series_csv",
]

CACHE_VERSION = 1


@dataclass(frozen=True)
class ErrorSeries:
    R_grid: np.ndarray
    N_vals: np.ndarray
    area_coeff: float
    phi_subtracted: bool
    F_vals: np.ndarray
    Lambda_vals: np.ndarray
    diagnostics: tuple = ()
    phi_vals: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.R_grid)

    @property
    def step(self) -> float:
        return float(self.R_grid[1] - self.R_grid[0]) if len(self) > 1 else math.inf

    @property
    def window(self) -> float:
        return float(self.R_grid[-1] - self.R_grid[0])

    def with_F(self, F: np.ndarray) -> "ErrorSeries":
        """Same grid, different F (used for synthetic and linearity checks)."""
        return ErrorSeries(self.R_grid, self.N_vals, self.area_coeff, self.phi_subtracted,
                           np.asarray(F, dtype=float), self.Lambda_vals, self.diagnostics)


def synthetic_series(R: np.ndarray, F: np.ndarray) -> ErrorSeries:
    R = np.asarray(R, dtype=float)
    zeros = np.zeros(len(R), dtype=np.int64)
    return ErrorSeries(R, zeros, 0.0, False, np.asarray(F, dtype=float), np.zeros(len(R)))


def _columns(R: float) -> int:
    return int(math.floor(R)) + 1


def _chunks(n: int, parts: int):
    edges = np.linspace(0, n, max(parts, 1) + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def count_bs(curve: SpectralCurve, R: float, shift=None) -> int:
    """Lattice points ``(k + 1/2, l)``, ``|l| <= k``, with ``X <= R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    if shift is not None:
        return count_shifted(curve, R, shift)
    counts = kernels.column_counts(curve.rho_coefficients, curve.g_coefficients, float(R), 0, _columns(R))
    return int(counts[0] + 2 * counts[1:].sum())


def count_shifted(curve: SpectralCurve, R: float, alpha) -> int:
    """``#{n in Z^2 : n + alpha in the sector, X(n + alpha) <= R}``.

    With ``alpha = (1/2, 0)`` this is exactly the default count: ``|l| <= k + 1/2``
    and ``|l| <= k`` agree on integers.
    """
    a1, a2 = (float(v) for v in alpha)
    rho, g = curve.rho_coefficients, curve.g_coefficients
    l = np.arange(math.floor(-R - a2) - 1, math.ceil(R - a2) + 2)
    p2 = l + a2
    p2 = p2[np.abs(p2) <= R]
    ap2 = np.abs(p2)
    kmin = np.ceil(ap2 - a1).astype(np.int64)
    kmin = np.where(kmin + a1 <= 0, np.floor(-a1).astype(np.int64) + 1, kmin)
    k = np.floor(R * kernels.cheb01(g, np.minimum(ap2 / R, 1.0)) - a1).astype(np.int64)
    k = np.maximum(k, kmin - 1)
    while True:
        over = (k >= kmin) & (kernels.norm_at(rho, np.maximum(k + a1, 1e-300), p2) > R)
        if not over.any():
            break
        k[over] -= 1
    while True:
        under = kernels.norm_at(rho, k + 1 + a1, p2) <= R
        if not under.any():
            break
        k[under] += 1
    return int(np.maximum(k - kmin + 1, 0).sum())


def sorted_norms(curve: SpectralCurve, R_max: float, threads: int = 1):
    """Sorted X values ``<= R_max`` on the column ``l = 0`` and on ``l > 0``."""
    rho, g = curve.rho_coefficients, curve.g_coefficients
    ncol = _columns(R_max)

    def work(span):
        a, b = span
        counts = kernels.column_counts(rho, g, float(R_max), a, b)
        return kernels.fill_norms(rho, counts, a), counts

    spans = _chunks(ncol, 4 * threads if threads > 1 else 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, spans))
    else:
        parts = [work(s) for s in spans]
    counts0 = int(parts[0][1][0])
    x = np.concatenate([p[0] for p in parts])
    x0 = np.sort(x[:counts0])
    xp = np.sort(x[counts0:])
    return x0, xp


def cache_key(curve: SpectralCurve, R_min: float, R_max: float, samples: int) -> str:
    payload = {
        "version": CACHE_VERSION,
        "profile": curve.profile.descriptor(),
        "grid_size": len(curve.nodes),
        "R": [repr(float(R_min)), repr(float(R_max)), int(samples)],
    }
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:32]


def _counts_on_grid(curve, R, threads):
    x0, xp = sorted_norms(curve, float(R[-1]), threads)
    return (np.searchsorted(x0, R, side="right") + 2 * np.searchsorted(xp, R, side="right")).astype(np.int64)


def error_series(curve: SpectralCurve, R_min: float, R_max: float, samples: int,
                 subtract_phi: bool = False, *, phi_terms: int = 8, threads: int = 1,
                 cache_dir: str | Path | None = None) -> ErrorSeries:
    """Sample N_BS and ``F(R) = (N - A R^2 [- R^(2/3) sum Phi_k]) / sqrt(R)``."""
    if not (0 < R_min < R_max):
        raise ValueError("need 0 < R_min < R_max")
    if samples < 2:
        raise ValueError("samples must be at least 2")
    rational = [c for c in curve.critical if c.rational_flag]
    if subtract_phi and not rational:
        raise ValueError("subtract_phi requested but no rational inflection point exists")
    R = np.linspace(R_min, R_max, samples)

    N = None
    path = None
    if cache_dir is not None:
        path = Path(cache_dir) / f"counts-{cache_key(curve, R_min, R_max, samples)}.npz"
        if path.exists():
            with np.load(path) as data:
                N = data["N"]
    if N is None:
        N = _counts_on_grid(curve, R, threads)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            np.savez_compressed(path, N=N, R=R)

    A = curve.area
    lam = N - A * R * R
    diag = []
    if curve.degenerate:
        diag.append("degenerate curve (omega constant): remainder is O(R), not a B2 almost periodic series")
    phi = None
    corrected = lam
    if subtract_phi:
        from .analysis import phi_k
        phi = sum(phi_k(curve.profile, c, R, phi_terms) for c in rational)
        corrected = lam - R ** (2.0 / 3.0) * phi
    F = corrected / np.sqrt(R)
    if not np.all(np.isfinite(F)):
        raise FloatingPointError("non-finite values in F")
    return ErrorSeries(R, N, A, bool(subtract_phi), F, lam, tuple(diag), phi)


def write_series_csv(series: ErrorSeries, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["R", "N", "Lambda", "F"])
        for r, n, lam, f in zip(series.R_grid, series.N_vals, series.Lambda_vals, series.F_vals):
            wr.writerow([repr(float(r)), int(n), repr(float(lam)), repr(float(f))])
    return path
