"""Geodesic flow on a surface of revolution through its Clairaut integral.

For a Clairaut value ``I`` in [0, 1] the geodesic oscillates between the two
parallels ``f(a) = f(b) = I``.  This module computes the phase function
``omega(I)`` (net turn per meridian oscillation in units of 2 pi, minus 1),
the return time ``tau(I)``, the action ``J(I)`` that defines the spectral
curve, derivatives, critical points, and enumerates closed geodesics.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from .profiles import SurfaceProfile
from .quadrature import phi_rule

__all__ = [
    "GeodesicClass",
    "CriticalPoint",
    "DegenerateSurfaceError",
    "QuadratureWarning",
    "turning_points",
    "turning_params",
    "phase_integrals",
    "omega",
    "tau",
    "action",
    "omega_prime",
    "omega_second",
    "write_geodesics_csv",
    "critical_points",
    "classify",
    "enumerate_closed_geodesics",
    "rational_approximation",
]

Q_MAX = 64
RATIONAL_TOL = 1e-9
OMEGA_PRIME_FLAG = 1e-6
CLASS_TOL = 1e-10


class DegenerateSurfaceError(ValueError):
    """omega is (numerically) constant: closed geodesics form continua."""


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class GeodesicClass:
    I: float
    m: int
    n: int
    length: float
    omega_prime: float
    is_equator_class: bool = False

    @property
    def is_meridian_class(self) -> bool:
        return self.I == 0.0

    @property
    def is_inflection_class(self) -> bool:
        return self.omega_prime == 0.0 and not self.is_equator_class


@dataclass(frozen=True)
class CriticalPoint:
    I_k: float
    omega_value: float
    omega_second: float
    rational_flag: bool
    rational_pq: Optional[tuple[int, int]] = None


# ---------------------------------------------------------------- turning points

def _bisect(fun, lo, hi, target, increasing, iters=64):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        below = fun(mid) < target
        go_right = below if increasing else ~below
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi), lo, hi


def _turning(profile: SurfaceProfile, I):
    """Turning points as ``(t_a, 1 - t_b)``.

    For I <= 1/2 the roots of ``f = I`` are found in pole-relative
    coordinates; above 1/2 the deficit ``1 - f = 1 - I`` is solved instead so
    that the flat maximum does not destroy the conditioning.
    """
    I = np.asarray(I, dtype=float)
    tm = profile.t_max
    zeros = np.zeros_like(I)
    if np.all(I <= 0.5):
        ta, lo, hi = _bisect(profile.f, zeros, zeros + tm, I, True)
        north = lambda x: profile.f(1.0 - x, x)
        tbc, lo2, hi2 = _bisect(north, zeros, zeros + (1.0 - tm), I, True)
        # bisection is absolute in t; Newton restores relative accuracy near the poles
        for _ in range(2):
            da = profile.dfdt(ta)
            ok = da > 0
            ta = np.where(ok, np.clip(ta - (profile.f(ta) - I) / np.where(ok, da, 1.0), lo, hi), ta)
            db = -profile.dfdt(1.0 - tbc, tbc)
            ok = db > 0
            tbc = np.where(ok, np.clip(tbc - (north(tbc) - I) / np.where(ok, db, 1.0), lo2, hi2), tbc)
        return ta, tbc
    if np.all(I > 0.5):
        e = 1.0 - I
        ta, _, _ = _bisect(profile.deficit, zeros, zeros + tm, e, False)
        tb, _, _ = _bisect(profile.deficit, zeros + tm, zeros + 1.0, e, True)
        return ta, 1.0 - tb
    lo_mask = I <= 0.5
    ta = np.empty_like(I)
    tbc = np.empty_like(I)
    ta[lo_mask], tbc[lo_mask] = _turning(profile, I[lo_mask])
    ta[~lo_mask], tbc[~lo_mask] = _turning(profile, I[~lo_mask])
    return ta, tbc


def turning_params(profile: SurfaceProfile, I):
    """Parameter values ``(t_a, t_b)`` with ``f(t_a) = f(t_b) = I``."""
    ta, tbc = _turning(profile, I)
    return ta, 1.0 - tbc


def turning_points(profile: SurfaceProfile, I: float) -> tuple[float, float]:
    """Arclength positions ``a < s_max < b`` where ``f = I``."""
    if not 0.0 < I <= 1.0:
        raise ValueError("turning points need 0 < I <= 1")
    if I == 1.0:
        return profile.s_max, profile.s_max
    ta, tb = turning_params(profile, I)
    return float(profile.s(ta)), float(profile.s(tb))


# ---------------------------------------------------------------- integrals

def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def _raw_integrals(profile: SurfaceProfile, I: float, order: int):
    ta, tbc = _turning(profile, I)
    ta, tbc = float(ta), float(tbc)
    h = (1.0 - tbc) - ta
    nodes, weights = phi_rule(0.25 * math.sqrt(I), order)
    sh = np.sin(0.5 * nodes)
    ch = np.cos(0.5 * nodes)
    root = h * sh * ch
    left = nodes <= 0.5 * math.pi
    # exact offset from the nearer turning point; t itself is rounded
    delta = np.where(left, h * sh * sh, h * ch * ch)
    t = np.where(left, ta + delta, 1.0 - (tbc + delta))
    tc = np.where(left, 1.0 - t, tbc + delta)
    if I <= 0.5:
        gap = profile.f(t, tc) - I
    else:
        gap = (1.0 - I) - profile.deficit(t)
    near = delta < 0.05
    if np.any(near):
        x, w = _gauss(16)
        u = 0.5 * delta[near, None] * (x + 1.0)
        lft = left[near, None]
        pt = np.where(lft, ta + u, 1.0 - (tbc + u))
        ptc = np.where(lft, 1.0 - pt, tbc + u)
        slope = np.where(lft, 1.0, -1.0) * profile.dfdt(pt, ptc)
        gap[near] = 0.5 * delta[near] * (slope @ w)
    gap = np.maximum(gap, 1e-300)
    f = I + gap
    d = gap * (f + I)
    sp = profile.speed(t, tc)
    sqrt_h = np.sqrt(d) / root
    tau_v = 2.0 * np.dot(weights, f * sp / sqrt_h)
    om_v = np.dot(weights, I * sp / (f * sqrt_h)) / math.pi - 1.0
    act_v = np.dot(weights, np.sqrt(d) * root * sp / f) / math.pi
    return tau_v, om_v, act_v


def phase_integrals(profile: SurfaceProfile, I: float, with_error: bool = False):
    """Return ``(tau, omega, action)`` at one Clairaut value.

    ``action`` is ``J(I) = pi^-1 int_a^b sqrt(1 - I^2 f^-2) ds``.  I = 0 and
    I = 1 use the analytic limits (meridian round trip, harmonic
    oscillation about the equator).
    """
    I = float(I)
    if not 0.0 <= I <= 1.0:
        raise ValueError("Clairaut integral must lie in [0, 1]")
    if I == 0.0:
        out = (2.0 * profile.L, 0.0, profile.L / math.pi)
        err = 0.0
    elif I == 1.0:
        k = math.sqrt(profile.curvature)
        out = (2.0 * math.pi / k, 1.0 / k - 1.0, 0.0)
        err = 0.0
    else:
        out = _raw_integrals(profile, I, 24)
        if with_error:
            low = _raw_integrals(profile, I, 16)
            err = max(abs(x - y) for x, y in zip(out, low))
    if with_error:
        return out, err
    return out


def omega(profile: SurfaceProfile, I: float) -> float:
    """Phase function on the branch with omega(0) = 0; odd extension for I < 0."""
    if I < 0:
        return -omega(profile, -I)
    return float(phase_integrals(profile, I)[1])


def tau(profile: SurfaceProfile, I: float) -> float:
    """Length of one full meridian oscillation (tau(-I) = tau(I))."""
    return float(phase_integrals(profile, abs(I))[0])


def action(profile: SurfaceProfile, I: float) -> float:
    return float(phase_integrals(profile, abs(I))[2])


# ---------------------------------------------------------------- derivatives

def _richardson(values: list[float], order: int) -> tuple[float, float]:
    """Romberg table for step halving; error term ~ h^order, h^(order+step)..."""
    table = [list(values)]
    p = order
    while len(table[-1]) > 1:
        prev = table[-1]
        fac = 2.0 ** p
        table.append([(fac * prev[i + 1] - prev[i]) / (fac - 1) for i in range(len(prev) - 1)])
        p += 2 if order == 2 else 1
    best = table[-1][0]
    err = abs(best - table[-2][-1]) if len(table) > 1 else float("inf")
    return best, err


def omega_prime(profile: SurfaceProfile, I: float, h: float | None = None,
                with_error: bool = False):
    """dω/dI by central differences with Richardson extrapolation.

    Oddness of ω gives a central stencil at I = 0; at I = 1 a one-sided
    stencil is used.
    """
    if not 0.0 <= I <= 1.0:
        raise ValueError("I must lie in [0, 1]")
    if I > 0.98:
        if h is None:
            h = 0.04
        hs = [h / 2 ** k for k in range(5)]
        # one-sided: D(h) = (w(I) - w(I-h))/h expanded at the midpoint
        w0 = omega(profile, I)
        ests = [(w0 - omega(profile, I - s)) / s for s in hs]
        # backward differences have error ~ h, h^2, ...
        best, err = _richardson(ests, 1)
    else:
        if h is None:
            h = min(0.05, 0.5 * (1.0 - I)) if I > 0 else 0.05
        hs = [h / 2 ** k for k in range(4)]
        ests = [(omega(profile, I + s) - omega(profile, I - s)) / (2 * s) for s in hs]
        best, err = _richardson(ests, 2)
    if with_error:
        return best, err
    return best


def omega_second(profile: SurfaceProfile, I: float, h: float = 0.02) -> float:
    hs = [h / 2 ** k for k in range(4)]
    w0 = omega(profile, I)
    ests = [(omega(profile, I + s) - 2 * w0 + omega(profile, I - s)) / (s * s) for s in hs]
    return _richardson(ests, 2)[0]


# ---------------------------------------------------------------- critical points

def rational_approximation(x: float, q_max: int = Q_MAX, tol: float = RATIONAL_TOL):
    """``(p, q)`` with ``q <= q_max`` and ``|x - p/q| <= tol``, else None."""
    frac = Fraction(x).limit_denominator(q_max)
    if abs(float(frac) - x) <= tol:
        return frac.numerator, frac.denominator
    return None


def _omega_prime_samples(profile: SurfaceProfile, grid: np.ndarray) -> np.ndarray:
    return np.array([omega_prime(profile, float(I)) for I in grid])


def critical_points(profile: SurfaceProfile, grid_size: int = 81, q_max: int = Q_MAX,
                    tol: float = RATIONAL_TOL, report: list | None = None) -> list[CriticalPoint]:
    """Interior zeros of ω′ located by sign changes and refined by bisection.

    Raises ``DegenerateSurfaceError`` when ω′ vanishes on the whole grid.
    Degenerate endpoints (ω′(0) = 0 or ω′(1) = 0) are appended to ``report``.
    """
    grid = np.linspace(0.0, 1.0, grid_size)
    wp = _omega_prime_samples(profile, grid)
    scale = np.max(np.abs(wp))
    if scale < 1e-7:
        raise DegenerateSurfaceError("omega' vanishes identically (degenerate surface)")
    if report is not None:
        for end, val in ((0.0, wp[0]), (1.0, wp[-1])):
            if abs(val) < 1e-7 * scale:
                report.append(f"omega' vanishes at I={end:g}")
    out = []
    for i in range(len(grid) - 1):
        if wp[i] == 0 or np.sign(wp[i]) == np.sign(wp[i + 1]):
            continue
        lo, hi = float(grid[i]), float(grid[i + 1])
        if lo == 0.0 or hi == 1.0:
            # sign change in the end cell: still interior, bisect normally
            pass
        root = brentq(lambda x: omega_prime(profile, x), lo, hi, xtol=1e-12)
        val = omega(profile, root)
        pq = rational_approximation(val, q_max, tol)
        out.append(CriticalPoint(I_k=root, omega_value=val,
                                 omega_second=omega_second(profile, root, h=min(0.02, root / 2, (1 - root) / 2)),
                                 rational_flag=pq is not None, rational_pq=pq))
    return out


def classify(profile: SurfaceProfile, q_max: int = Q_MAX) -> dict:
    """Twist / Diophantine classification summary."""
    try:
        report: list[str] = []
        crit = critical_points(profile, q_max=q_max, report=report)
    except DegenerateSurfaceError:
        return {"status": "degenerate", "message": "degenerate: omega' == 0", "critical": []}
    if not crit:
        sign = np.sign(omega_prime(profile, 0.5))
        label = ">0" if sign > 0 else "<0"
        return {"status": "TH", "message": f"TH holds, omega'{label}", "critical": [],
                "notes": report}
    return {"status": "DH", "message": f"DH case: K={len(crit)} critical points",
            "critical": crit, "notes": report}


# ---------------------------------------------------------------- enumeration

def _monotone_pieces(profile: SurfaceProfile, crit: list[CriticalPoint]):
    cuts = [0.0] + [c.I_k for c in crit] + [1.0]
    return list(zip(cuts[:-1], cuts[1:]))


def enumerate_closed_geodesics(profile: SurfaceProfile, length_cutoff: float,
                               crit: list[CriticalPoint] | None = None) -> list[GeodesicClass]:
    """All closed geodesic classes with ``I >= 0`` and length <= cutoff.

    Classes are (I, m, n) with ω(I) = n/m − 1; multiples of primitive
    geodesics are separate classes.  The meridian family is I = 0 (n = m);
    equator classes sit at I = 1 and need ``m (ω(1) + 1)`` to be an integer.
    Sorted by length.
    """
    if length_cutoff <= 0:
        raise ValueError("length_cutoff must be positive")
    if crit is None:
        crit = critical_points(profile)
    tau_min = min(tau(profile, x) for x in np.linspace(0.0, 1.0, 41))
    m_max = int(math.floor(length_cutoff / (0.999 * tau_min)))
    out: list[GeodesicClass] = []

    tau0 = 2.0 * profile.L
    for m in range(1, m_max + 1):
        if m * tau0 <= length_cutoff:
            out.append(GeodesicClass(0.0, m, m, m * tau0, omega_prime(profile, 0.0)))

    w1 = omega(profile, 1.0)
    tau1 = tau(profile, 1.0)
    for m in range(1, m_max + 1):
        n = m * (w1 + 1.0)
        if abs(n - round(n)) <= 1e-9 * max(1.0, abs(n)) and m * tau1 <= length_cutoff and round(n) > 0:
            out.append(GeodesicClass(1.0, m, int(round(n)), m * tau1,
                                     omega_prime(profile, 1.0), is_equator_class=True))

    crit_vals = {c.I_k: c.omega_value for c in crit}
    for lo, hi in _monotone_pieces(profile, crit):
        w_lo, w_hi = omega(profile, lo), omega(profile, hi)
        v_min, v_max = min(w_lo, w_hi), max(w_lo, w_hi)
        for m in range(1, m_max + 1):
            n_lo = math.floor(m * (v_min + 1.0))
            n_hi = math.ceil(m * (v_max + 1.0))
            for n in range(n_lo, n_hi + 1):
                v = n / m - 1.0
                if not v_min < v < v_max:
                    continue
                if abs(v - w_lo) < CLASS_TOL or abs(v - w_hi) < CLASS_TOL:
                    continue
                I = brentq(lambda x: omega(profile, x) - v, lo, hi, xtol=1e-15, rtol=1e-15)
                length = m * tau(profile, I)
                if length <= length_cutoff:
                    out.append(GeodesicClass(I, m, n, length, omega_prime(profile, I)))
    # inflection classes: rational critical values
    for I_k, val in crit_vals.items():
        for m in range(1, m_max + 1):
            n = m * (val + 1.0)
            if abs(n - round(n)) <= 1e-9 * max(1.0, abs(n)):
                length = m * tau(profile, I_k)
                if length <= length_cutoff:
                    out.append(GeodesicClass(I_k, m, int(round(n)), length, 0.0))
    out.sort(key=lambda g: (g.length, g.I, g.m))
    return out


def write_geodesics_csv(classes, path) -> None:
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["I", "m", "n", "length", "omega_prime", "is_equator_class"])
        for c in classes:
            wr.writerow([repr(float(c.I)), c.m, c.n, repr(float(c.length)), repr(float(c.omega_prime)),
                         int(c.is_equator_class)])
