"""Independent reference computations used by the tests.

None of these reuse the package's quadrature, curve interpolation or
lattice kernels; they only read the profile's pointwise evaluators.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq


def turning_t(profile, I):
    """Turning parameters by plain brentq on f(t) = I on each side of t_max."""
    tm = profile.t_max
    a = brentq(lambda t: profile.f(t) - I, 0.0, tm, xtol=1e-15)
    b = brentq(lambda t: profile.f(t) - I, tm, 1.0, xtol=1e-15)
    return a, b


def geodesic_period(profile, I, periods=1, rtol=1e-10):
    """Integrate the geodesic ODE from the southern turning point.

    State (t, v, phi) with v = ds/dl:  dt/dl = v / speed,
    dv/dl = I^2 f_s / f^3,  dphi/dl = I / f^2.  Returns (length, phi) after
    ``periods`` returns to the turning point.
    """
    a, _ = turning_t(profile, I)

    def rhs(_, y):
        t, v, _phi = y
        f = profile.f(t)
        sp = profile.speed(t)
        fs = profile.dfdt(t) / sp
        return [v / sp, I * I * fs / f ** 3, I / f ** 2]

    def back_at_a(_, y):
        return y[1]
    back_at_a.direction = 1.0

    y0 = [a, 0.0, 0.0]
    l0 = 0.0
    for _ in range(periods):
        # leave the turning point, then wait for v to cross zero upward
        sol = solve_ivp(rhs, (l0, l0 + 1e3), y0, method="DOP853", rtol=rtol, atol=1e-12,
                        events=back_at_a, first_step=1e-6)
        ev = [e for e in sol.t_events[0] if e > l0 + 1e-3]
        if not ev:
            raise RuntimeError("no return to the turning point")
        idx = list(sol.t_events[0]).index(ev[0])
        l0 = ev[0]
        y0 = list(sol.y_events[0][idx])
        y0[1] = 0.0
    return l0, y0[2]


def brute_force_counts(curve, R_values, K=None):
    """N_BS(R) by scanning the whole (k, l) rectangle with the test p1 <= R g(p2/R)."""
    R_values = np.atleast_1d(np.asarray(R_values, dtype=float))
    Rm = float(R_values.max())
    if K is None:
        K = int(Rm * float(np.max(curve.g(np.linspace(0, 1, 201))))) + 3
    k = np.arange(0, K)
    l = np.arange(-K, K + 1)
    kk, ll = np.meshgrid(k, l)
    mask = np.abs(ll) <= kk
    p1 = (kk + 0.5)[mask]
    p2 = ll[mask].astype(float)
    out = []
    for R in R_values:
        u = np.abs(p2) / R
        ok = u <= 1.0
        inside = ok & (p1 <= R * curve.g(np.minimum(u, 1.0)))
        out.append(int(inside.sum()))
    return out


def volume_quad(profile):
    """2 pi int f ds through the parameter t with adaptive quadrature."""
    val, _ = quad(lambda t: profile.f(t) * profile.speed(t), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=400)
    return 2.0 * math.pi * val


def length_quad(profile):
    val, _ = quad(lambda t: profile.speed(t), 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=400)
    return val


def phase_quad(profile, I):
    """(tau, omega) from the s-integrals with scipy's algebraic-weight quadrature."""
    a, b = turning_t(profile, I)

    h = b - a
    lim_a = 2.0 * I * profile.dfdt(a) / h
    lim_b = -2.0 * I * profile.dfdt(b) / h

    def reg(t):
        # f^2 - I^2 has simple zeros at a and b; divide them out
        if t - a <= 1e-9 * h:
            return lim_a
        if b - t <= 1e-9 * h:
            return lim_b
        f = profile.f(t)
        return (f * f - I * I) / ((t - a) * (b - t))

    def tau_int(t):
        f = profile.f(t)
        return 2.0 * f * profile.speed(t) / math.sqrt(reg(t))

    def om_int(t):
        f = profile.f(t)
        return I * profile.speed(t) / (f * math.sqrt(reg(t)))

    opts = dict(weight="alg", wvar=(-0.5, -0.5), epsabs=1e-13, epsrel=1e-12, limit=400)
    tau_v, _ = quad(tau_int, a, b, **opts)
    om_v, _ = quad(om_int, a, b, **opts)
    return tau_v, om_v / math.pi - 1.0


def partial_sum_loop(modes, R):
    total = 0.0
    for md in modes:
        total += md.weight * md.amplitude * math.cos(md.frequency * R - md.phase)
    return total
