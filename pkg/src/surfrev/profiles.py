"""Meridian profiles of surfaces of revolution.

A profile is stored parametrically: an internal parameter ``t`` in [0, 1]
runs from the south pole (t=0) to the north pole (t=1), and the profile
exposes ``s(t)``, ``f(t)`` and the Jacobian ``ds/dt``.  Integrals over the
meridian arclength are pulled back to ``t`` so no arclength inversion is ever
needed.  Every profile is rescaled isotropically so that the maximal radius
is exactly 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

__all__ = [
    "ProfileError",
    "SurfaceProfile",
    "make_profile",
    "load_descriptor",
    "volume",
    "BELL_DEFAULT",
]

SIGN_TOL = 1e-9
VALIDATION_GRID = 4097


class ProfileError(ValueError):
    """Raised when a descriptor does not define a surface of simple structure."""


# default bell: wide skirt near the south pole, narrow crown
# height tuned so that the maximum of omega equals 1/2 exactly
BELL_DEFAULT = (2.021505242683628, 0.6, 0.0)


def _trig(t, tc):
    """``(sin(pi t), cos(pi t))`` accurate near both poles."""
    t = np.asarray(t, dtype=float)
    if tc is None:
        tc = 1.0 - t
    north = t > 0.5
    x = np.pi * np.where(north, tc, t)
    s = np.sin(x)
    c = np.cos(x)
    return s, np.where(north, -c, c)


class _Meridian:
    """Raw (unnormalized) meridian curve ``t -> (r(t), z(t))``.

    Methods take the parameter ``t`` and optionally its complement
    ``tc = 1 - t``, which carries the relative distance to the north pole.
    """

    def r(self, t, tc=None):
        raise NotImplementedError

    def dr(self, t, tc=None):
        raise NotImplementedError

    def d2r(self, t, tc=None):
        raise NotImplementedError

    def speed(self, t, tc=None):
        raise NotImplementedError

    def arclength(self, t):
        raise NotImplementedError


class _Ellipse(_Meridian):
    # r = a sin(pi t), z = -b cos(pi t); the sphere is a = b = 1
    def __init__(self, a: float, b: float):
        self.a, self.b = float(a), float(b)
        self._m = 1.0 - (self.b / self.a) ** 2

    def r(self, t, tc=None):
        return self.a * _trig(t, tc)[0]

    def dr(self, t, tc=None):
        return self.a * np.pi * _trig(t, tc)[1]

    def d2r(self, t, tc=None):
        return -self.a * np.pi ** 2 * _trig(t, tc)[0]

    def speed(self, t, tc=None):
        s, c = _trig(t, tc)
        return np.pi * np.hypot(self.a * c, self.b * s)

    def arclength(self, t):
        from scipy.special import ellipeinc

        t = np.asarray(t, dtype=float)
        if self.a == self.b:
            return self.a * np.pi * t
        # s(theta) = a E(theta | 1 - (b/a)^2), symmetric about theta = pi/2
        th = np.pi * t
        quarter = ellipeinc(np.pi / 2, self._m)
        half = np.where(th <= np.pi / 2, ellipeinc(np.minimum(th, np.pi / 2), self._m),
                        2 * quarter - ellipeinc(np.maximum(np.pi - th, 0.0), self._m))
        return self.a * half


class _Bell(_Meridian):
    """Bell-like meridian.

    ``r = sin(theta) * (1 + skew*cos(theta)) * (1 + bulge*sin(theta)**2)``,
    ``z = -height*cos(theta)`` with ``theta = pi t``.  ``skew`` pushes the
    widest parallel toward the south pole; ``bulge`` sharpens it.
    """

    def __init__(self, height: float, skew: float, bulge: float):
        self.h, self.c, self.e = float(height), float(skew), float(bulge)
        self._arc = _cheb_arclength(self.speed)

    def _parts(self, t, tc):
        s, c = _trig(t, tc)
        u = 1 + self.c * c
        w = 1 + self.e * s * s
        return s, c, u, w

    def r(self, t, tc=None):
        s, _, u, w = self._parts(t, tc)
        return s * u * w

    def dr(self, t, tc=None):
        s, c, u, w = self._parts(t, tc)
        du = -self.c * s
        dw = 2 * self.e * s * c
        return np.pi * (c * u * w + s * du * w + s * u * dw)

    def d2r(self, t, tc=None):
        s, c, u, w = self._parts(t, tc)
        du, d2u = -self.c * s, -self.c * c
        dw, d2w = 2 * self.e * s * c, 2 * self.e * (c * c - s * s)
        val = (-s * u * w + s * d2u * w + s * u * d2w
               + 2 * (c * du * w + c * u * dw + s * du * dw))
        return np.pi ** 2 * val

    def speed(self, t, tc=None):
        s, _ = _trig(t, tc)
        return np.hypot(self.dr(t, tc), np.pi * self.h * s)

    def arclength(self, t):
        return self._arc(np.asarray(t, dtype=float))


class _Tabulated(_Meridian):
    # t = s / L; r(s) is a C^2 cubic spline through the samples
    def __init__(self, s, f):
        s = np.asarray(s, dtype=float)
        f = np.asarray(f, dtype=float)
        self.L = float(s[-1] - s[0])
        self.spline = CubicSpline(s - s[0], f)
        self.d1 = self.spline.derivative(1)
        self.d2 = self.spline.derivative(2)

    def r(self, t, tc=None):
        return self.spline(self.L * np.asarray(t, dtype=float))

    def dr(self, t, tc=None):
        return self.L * self.d1(self.L * np.asarray(t, dtype=float))

    def d2r(self, t, tc=None):
        return self.L ** 2 * self.d2(self.L * np.asarray(t, dtype=float))

    def speed(self, t, tc=None):
        return np.full_like(np.asarray(t, dtype=float), self.L)

    def arclength(self, t):
        return self.L * np.asarray(t, dtype=float)


def _cheb_arclength(speed: Callable, tol: float = 1e-15) -> Callable:
    """Spectral antiderivative of ``speed`` on [0, 1], with s(0) = 0."""
    for deg in (32, 64, 128, 256, 512):
        series = C.Chebyshev.interpolate(speed, deg, domain=[0.0, 1.0])
        tail = np.max(np.abs(series.coef[-4:]))
        if tail < tol * np.max(np.abs(series.coef)):
            break
    return series.integ(lbnd=0.0)


def _gauss16():
    return np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True)
class SurfaceProfile:
    """Normalized meridian of a surface of revolution (f_max = 1).

    Attributes are in normalized units.  ``scale`` is the factor the raw
    descriptor was multiplied by.
    """

    kind: str
    params: Mapping[str, Any]
    L: float
    s_max: float
    t_max: float
    curvature: float
    scale: float
    meridian: _Meridian = field(repr=False, compare=False)
    f_max: float = 1.0

    def f(self, t, tc=None):
        return self.scale * self.meridian.r(t, tc)

    def dfdt(self, t, tc=None):
        return self.scale * self.meridian.dr(t, tc)

    def speed(self, t, tc=None):
        """Jacobian ds/dt."""
        return self.scale * self.meridian.speed(t, tc)

    def s(self, t):
        return self.scale * self.meridian.arclength(t)

    def dfds(self, t, tc=None):
        return self.meridian.dr(t, tc) / self.meridian.speed(t, tc)

    def deficit(self, t):
        """``1 - f(t)`` without cancellation near the maximum."""
        t = np.asarray(t, dtype=float)
        out = 1.0 - self.f(t)
        near = np.abs(t - self.t_max) < 0.05
        if np.any(near):
            x, w = _gauss16()
            tn = t[near] if t.ndim else t
            lo, hi = tn, self.t_max
            nodes = 0.5 * (hi - lo)[..., None] * x + 0.5 * (hi + lo)[..., None]
            vals = 0.5 * (hi - lo) * (self.dfdt(nodes) @ w)
            if t.ndim:
                out[near] = vals
            else:
                out = vals
        return out

    def evaluate(self, t):
        """Return ``(s, f, df/ds)`` at parameter values ``t``."""
        return self.s(t), self.f(t), self.dfds(t)

    def descriptor(self) -> dict:
        return {"kind": self.kind, **dict(self.params)}


def _validate(mer: _Meridian) -> tuple[float, float]:
    """Check simple structure and return (t_max, r_max)."""
    t = np.linspace(0.0, 1.0, VALIDATION_GRID)
    r = mer.r(t)
    if not np.all(r[1:-1] > 0):
        raise ProfileError("radius must be positive strictly between the poles")
    if abs(r[0]) > 1e-12 * r.max() or abs(r[-1]) > 1e-12 * r.max():
        raise ProfileError("radius must vanish at both poles")
    dr = mer.dr(t) / mer.speed(t)
    scale = np.max(np.abs(dr))
    sig = np.where(np.abs(dr) <= SIGN_TOL * scale, 0, np.sign(dr))
    nz = sig[sig != 0]
    changes = np.count_nonzero(np.diff(nz) != 0)
    if changes != 1 or nz[0] < 0:
        raise ProfileError(f"f' must change sign exactly once (found {changes} sign changes)")
    # interior zero of f' away from the maximum
    i = int(np.argmax(r))
    zeros = np.flatnonzero(sig[1:-1] == 0) + 1
    if np.any(np.abs(zeros - i) > 1):
        raise ProfileError("f' vanishes away from the maximum")
    lo, hi = t[max(i - 1, 0)], t[min(i + 1, len(t) - 1)]
    if mer.dr(lo) * mer.dr(hi) > 0:
        t_max = t[i]
    else:
        t_max = brentq(lambda x: float(mer.dr(x)), lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return float(t_max), float(mer.r(t_max))


def make_profile(spec: Mapping[str, Any] | str) -> SurfaceProfile:
    """Build a validated, normalized profile from a descriptor.

    Supported kinds: ``sphere``; ``ellipsoid`` with ``a``, ``b``; ``bell``
    with ``params`` = [height, skew, bulge]; ``tabulated`` with arrays ``s``
    and ``f`` (at least 16 interior samples).
    """
    if isinstance(spec, str):
        spec = {"kind": spec}
    kind = str(spec.get("kind", "")).lower()
    params: dict[str, Any]
    if kind == "sphere":
        mer: _Meridian = _Ellipse(1.0, 1.0)
        params = {}
    elif kind == "ellipsoid":
        a, b = float(spec["a"]), float(spec["b"])
        if not (a > 0 and b > 0):
            raise ProfileError("ellipsoid semi-axes must be positive")
        mer = _Ellipse(a, b)
        params = {"a": a, "b": b}
    elif kind == "bell":
        p = tuple(float(x) for x in spec.get("params", BELL_DEFAULT))
        if len(p) != 3 or p[0] <= 0:
            raise ProfileError("bell params are [height>0, skew, bulge]")
        mer = _Bell(*p)
        params = {"params": list(p)}
    elif kind == "tabulated":
        s = np.asarray(spec["s"], dtype=float)
        f = np.asarray(spec["f"], dtype=float)
        if s.shape != f.shape or s.ndim != 1:
            raise ProfileError("tabulated s and f must be 1-d arrays of equal length")
        if np.count_nonzero(f[1:-1] > 0) < 16 or len(s) < 18:
            raise ProfileError("tabulated profile needs at least 16 interior samples")
        if np.any(np.diff(s) <= 0):
            raise ProfileError("tabulated s must be strictly increasing")
        mer = _Tabulated(s, f)
        params = {"s": s.tolist(), "f": f.tolist()}
    else:
        raise ProfileError(f"unknown profile kind {kind!r}")

    t_max, r_max = _validate(mer)
    scale = 1.0 / r_max
    speed_max = float(mer.speed(t_max))
    f2 = scale * float(mer.d2r(t_max)) / (scale * speed_max) ** 2
    if not f2 < -SIGN_TOL:
        raise ProfileError("f''(s_max) must be strictly negative")
    L = scale * float(mer.arclength(1.0))
    s_max = scale * float(mer.arclength(t_max))
    return SurfaceProfile(kind=kind, params=params, L=L, s_max=s_max, t_max=t_max,
                          curvature=-f2, scale=scale, meridian=mer)


def load_descriptor(path: str | Path) -> dict:
    """Read a profile descriptor (or a run config holding one under ``profile``)."""
    data = json.loads(Path(path).read_text())
    return data.get("profile", data)


def volume(profile: SurfaceProfile) -> float:
    """Surface area ``2 pi int_0^L f ds``."""
    mer = profile.meridian
    if isinstance(mer, _Tabulated):
        raw = float(mer.spline.integrate(0.0, mer.L))
        return 2 * math.pi * raw * profile.scale ** 2
    x, w = np.polynomial.legendre.leggauss(64)
    edges = np.linspace(0.0, 1.0, 17)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        t = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
        total += 0.5 * (hi - lo) * np.dot(w, profile.f(t) * profile.speed(t))
    return 2 * math.pi * total
