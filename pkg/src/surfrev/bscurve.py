"""The Bohr-Sommerfeld curve and its homogeneous norm.

The curve is the graph ``p1 = g(p2)`` with ``g(u) = |u| + J(|u|)``, where
``J`` is the action integral of the meridian motion.  Together with the two
diagonal segments it bounds the sector domain Omega; ``X(p)`` is the norm
whose unit ball is Omega, so ``X(k + 1/2, l) <= R`` is the Bohr-Sommerfeld
counting condition.

``g``, ``omega``, ``tau`` are held as Chebyshev interpolants on [0, 1]
sampled at Chebyshev-Lobatto points (dense near both ends).  ``X`` is
evaluated as ``p1 * rho(|p2| / p1)`` with ``rho`` interpolated the same way.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import chebyshev as C

from . import geodesics as geo
from .profiles import SurfaceProfile

__all__ = [
    "SpectralCurve",
    "build_curve",
    "x_norm",
    "x_norm_bisect",
    "curvature",
    "support_Y",
    "write_curve_csv",
]

MIN_GRID = 64


def _lobatto(n: int) -> np.ndarray:
    # ascending points on [0, 1]
    return 0.5 * (1.0 - np.cos(np.pi * np.arange(n) / (n - 1)))


def _fit(x01: np.ndarray, y: np.ndarray) -> C.Chebyshev:
    return C.Chebyshev.fit(x01, y, len(x01) - 1, domain=[0.0, 1.0])


@dataclass(frozen=True)
class SpectralCurve:
    profile: SurfaceProfile = field(repr=False)
    nodes: np.ndarray = field(repr=False)
    g_series: C.Chebyshev = field(repr=False)
    omega_series: C.Chebyshev = field(repr=False)
    tau_series: C.Chebyshev = field(repr=False)
    rho_series: C.Chebyshev = field(repr=False)
    area: float
    z0: tuple[float, float]
    z1: tuple[float, float]
    inflections: tuple = ()
    critical: tuple = field(default=(), repr=False)

    def g(self, u):
        return self.g_series(np.abs(u))

    def g_prime(self, u):
        u = np.asarray(u, dtype=float)
        return np.sign(u) * self.g_series.deriv()(np.abs(u))

    def omega(self, u):
        u = np.asarray(u, dtype=float)
        return np.sign(u) * self.omega_series(np.abs(u))

    def omega_prime(self, u):
        return self.omega_series.deriv()(np.abs(np.asarray(u, dtype=float)))

    def tau(self, u):
        return self.tau_series(np.abs(u))

    def rho(self, r):
        return self.rho_series(np.abs(r))

    @property
    def rho_coefficients(self) -> np.ndarray:
        """Coefficients of ``rho`` in the variable ``2r - 1``."""
        return np.ascontiguousarray(self.rho_series.coef, dtype=float)

    @property
    def g_coefficients(self) -> np.ndarray:
        return np.ascontiguousarray(self.g_series.coef, dtype=float)

    @property
    def degenerate(self) -> bool:
        """True when all normals coincide (omega constant), as on the sphere."""
        vals = self.omega_series(self.nodes)
        return bool(np.ptp(vals) < 1e-8)


def _solve_ratio(g_series: C.Chebyshev, r: np.ndarray) -> np.ndarray:
    """Find ``u`` in [0, 1] with ``u / g(u) = r`` (Newton with bisection guard)."""
    dg = g_series.deriv()
    lo = np.zeros_like(r)
    hi = np.ones_like(r)
    u = np.clip(r * g_series(r), 0.0, 1.0)
    for _ in range(100):
        F = u - r * g_series(u)
        lo = np.where(F < 0, u, lo)
        hi = np.where(F >= 0, u, hi)
        step = F / (1.0 - r * dg(u))
        u_new = u - step
        bad = (u_new <= lo) | (u_new >= hi) | ~np.isfinite(u_new)
        u_new = np.where(bad, 0.5 * (lo + hi), u_new)
        if np.max(np.abs(u_new - u)) < 1e-16:
            u = u_new
            break
        u = u_new
    return u


def build_curve(profile: SurfaceProfile, grid_size: int = 129, crit=None) -> SpectralCurve:
    """Sample the curve by the explicit action formula (no root finding in p1)."""
    if grid_size < MIN_GRID:
        raise ValueError(f"grid_size must be at least {MIN_GRID}")
    x = _lobatto(grid_size)
    vals = np.array([geo.phase_integrals(profile, float(u)) for u in x])
    tau_v, om_v, act_v = vals[:, 0], vals[:, 1], vals[:, 2]
    g_series = _fit(x, x + act_v)
    omega_series = _fit(x, om_v)
    tau_series = _fit(x, tau_v)
    u = _solve_ratio(g_series, x)
    rho_series = _fit(x, 1.0 / g_series(u))
    area = 2.0 * float(_fit(x, act_v).integ(lbnd=0.0)(1.0))
    g1 = float(g_series(1.0))
    if crit is None:
        try:
            crit = geo.critical_points(profile)
        except geo.DegenerateSurfaceError:
            crit = []
    infl = tuple((float(g_series(c.I_k)), c.I_k) for c in crit)
    return SpectralCurve(profile=profile, nodes=x, g_series=g_series, omega_series=omega_series,
                         tau_series=tau_series, rho_series=rho_series, area=area,
                         z0=(g1, -1.0), z1=(g1, 1.0), inflections=infl, critical=tuple(crit))


def _as_points(p):
    p = np.asarray(p, dtype=float)
    if p.shape[-1] != 2:
        raise ValueError("points must have a trailing dimension of 2")
    p1, p2 = p[..., 0], p[..., 1]
    if np.any(p1 <= 0) or np.any(np.abs(p2) > p1 * (1 + 1e-15)):
        raise ValueError("points must lie in the closed sector |p2| <= p1, p != 0")
    return p1, p2


def x_norm(curve: SpectralCurve, p):
    """Homogeneous norm of degree 1 whose level set 1 is the curve."""
    p1, p2 = _as_points(p)
    return p1 * curve.rho(np.minimum(np.abs(p2) / p1, 1.0))


def x_norm_bisect(curve: SpectralCurve, p, rtol: float = 1e-12) -> float:
    """Scalar reference: bisection on lambda for ``p / lambda`` on the curve."""
    p1, p2 = (float(v) for v in _as_points(p))
    size = math.hypot(p1, p2)

    def inside(lam: float) -> bool:
        u = abs(p2) / lam
        return u <= 1.0 and p1 / lam <= float(curve.g(u))

    lo, hi = size / 2.0, 2.0 * size
    while inside(lo):
        lo /= 2.0
    while not inside(hi):
        hi *= 2.0
    while hi - lo > rtol * size:
        mid = 0.5 * (lo + hi)
        if inside(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def curvature(curve: SpectralCurve, I):
    """Signed curvature at ``(g(I), I)``: omega' / (1 + omega^2)^(3/2)."""
    w = curve.omega(I)
    return curve.omega_prime(I) / (1.0 + w * w) ** 1.5


def support_Y(curve: SpectralCurve, I):
    """``p . n`` at ``p = (g(I), I)`` with outward normal along ``(1, omega(I))``."""
    I = np.asarray(I, dtype=float)
    w = curve.omega(I)
    return (curve.g(I) + I * w) / np.sqrt(1.0 + w * w)


def write_curve_csv(curve: SpectralCurve, path: str | Path, samples: int = 201) -> Path:
    path = Path(path)
    I = np.linspace(0.0, 1.0, samples)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["I", "g", "curvature", "Y"])
        for row in zip(I, curve.g(I), curvature(curve, I), support_Y(curve, I)):
            wr.writerow([repr(float(v)) for v in row])
    return path
