"""Quadrature between two simple turning points.

Integrals of the form ``int_a^b F(t) / sqrt((t-a)(b-t)) dt`` become smooth
after ``t = a + (b-a) sin^2(phi/2)``, which maps them onto ``int_0^pi F dphi``.
When the turning points sit close to a pole the transformed integrand is
still sharply peaked near ``phi = 0, pi``, so the phi-interval is split into
panels that grow geometrically away from both ends.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

__all__ = ["graded_panels", "phi_rule", "turning_map"]


@lru_cache(maxsize=8)
def _gauss(n: int):
    return np.polynomial.legendre.leggauss(n)


def graded_panels(width0: float, ratio: float = 2.0) -> np.ndarray:
    """Breakpoints on [0, pi], geometric toward both ends from ``width0``."""
    half = np.pi / 2
    width0 = min(max(width0, 1e-12), half)
    edges = [0.0]
    w = width0
    while edges[-1] + w < half * 0.999:
        edges.append(edges[-1] + w)
        w *= ratio
    edges.append(half)
    left = np.asarray(edges)
    return np.concatenate([left, np.pi - left[-2::-1]])


@lru_cache(maxsize=256)
def _phi_rule_cached(width0: float, order: int):
    x, w = _gauss(order)
    edges = graded_panels(width0)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (hi - lo) * x + 0.5 * (hi + lo)).ravel()
    weights = (0.5 * (hi - lo) * w).ravel()
    return nodes, weights


def phi_rule(width0: float, order: int = 24):
    """Composite Gauss-Legendre nodes and weights on [0, pi]."""
    # quantize so the cache stays small
    key = float(2.0 ** np.floor(np.log2(max(width0, 1e-12))))
    return _phi_rule_cached(key, order)


def turning_map(a: float, b: float, phi: np.ndarray):
    """Return ``t(phi)`` and ``sqrt((t-a)(b-t))`` for the half-angle map."""
    h = b - a
    sh = np.sin(0.5 * phi)
    ch = np.cos(0.5 * phi)
    t = a + h * sh * sh
    # guard against rounding past the turning points
    t = np.clip(t, a, b)
    root = h * sh * ch
    return t, root
