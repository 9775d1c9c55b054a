"""Predicted Fourier modes of F(R), the inflection terms, and empirical checks.

A closed geodesic class gamma (I, m) contributes

    A cos(|gamma| R - phi),   A = (-1)^m |omega'(I)|^(-1/2) m^(-3/2) / pi,
    phi = pi/2 + (pi/4) sgn omega'(I),

once per orientation.  Time averages over R are uniform-grid means.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import airy

from . import geodesics as geo
from .bscurve import SpectralCurve, support_Y
from .counting import ErrorSeries

__all__ = [
    "FourierMode",
    "DistributionSummary",
    "ProjectionError",
    "EQUATOR_WEIGHT",
    "predicted_modes",
    "phi_k",
    "phi_coefficient",
    "project_mode",
    "partial_sum",
    "b2_distance",
    "parseval_variance",
    "merge_collisions",
    "distribution",
    "tv_distance",
    "write_modes_csv",
    "write_histogram_csv",
]

EQUATOR_WEIGHT = 0.5
MIN_PERIODS = 20
SAMPLES_PER_PERIOD = 8
FREQ_TOL = 1e-9
AI0 = float(airy(0.0)[0])  # 3^(-2/3) / Gamma(2/3)


class ProjectionError(ValueError):
    """Window too short or grid too coarse for the requested frequency."""


@dataclass(frozen=True)
class FourierMode:
    frequency: float
    amplitude: float
    phase: float
    source: object = field(default=None, compare=False)
    weight: float = 1.0
    multiplicity: int = 1

    @property
    def effective_amplitude(self) -> float:
        """Coefficient of ``cos(frequency R - phase)`` in F."""
        return self.weight * self.amplitude


@dataclass(frozen=True)
class DistributionSummary:
    bin_edges: np.ndarray
    bin_masses: np.ndarray
    moments: dict
    tail_fractions: dict

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])


def _amplitude(omega_prime: float, m: int) -> float:
    return (-1) ** m * abs(omega_prime) ** -0.5 * m ** -1.5 / math.pi


def predicted_modes(profile, curve: SpectralCurve, length_cutoff: float,
                    classes=None, equator_weight: float = EQUATOR_WEIGHT) -> list[FourierMode]:
    """One mode per non-inflection class with length <= cutoff, sorted by frequency.

    Classes with I > 0 count both orientations (multiplicity 2; for the
    equator these are the two sector corners), meridian classes count once,
    and equator classes carry the corner weight ``equator_weight``.
    """
    if length_cutoff <= 0:
        raise ValueError("length_cutoff must be positive")
    if curve.degenerate:
        raise geo.DegenerateSurfaceError("degenerate surface: omega is constant, no TH/DH")
    if classes is None:
        classes = geo.enumerate_closed_geodesics(profile, length_cutoff, crit=list(curve.critical))
    modes = []
    for c in classes:
        if c.length > length_cutoff or c.is_inflection_class:
            continue
        mult = 2 if c.I > 0.0 else 1
        weight = equator_weight if c.is_equator_class else 1.0
        amp = mult * _amplitude(c.omega_prime, c.m)
        phase = 0.5 * math.pi + 0.25 * math.pi * math.copysign(1.0, c.omega_prime)
        modes.append(FourierMode(c.length, amp, phase, c, weight, mult))
    modes.sort(key=lambda md: md.frequency)
    return modes


def _admitted_multiples(critical: geo.CriticalPoint) -> int:
    # classes need m * (p/q + 1) to be an integer, i.e. q | m
    p, q = critical.rational_pq
    return q


def phi_coefficient(profile, critical: geo.CriticalPoint, tau_k: float | None = None) -> float:
    """Prefactor multiplying ``sum (-1)^m |gamma|^(-4/3) sin(|gamma| R)``.

    Both inflection images ``+-I_k`` are included (factor 2), and the Airy
    constant enters as ``Ai(0) = 3^(-2/3) / Gamma(2/3)``.
    """
    if tau_k is None:
        tau_k = geo.tau(profile, critical.I_k)
    w2 = abs(critical.omega_second)
    return 2.0 * 2.0 * AI0 * math.pi ** (-1.0 / 3.0) * w2 ** (-1.0 / 3.0) * tau_k ** (4.0 / 3.0)


def phi_k(profile, critical: geo.CriticalPoint, R, term_cutoff: int = 8):
    """Periodic inflection term; multiply by ``R^(2/3)`` to get its share of N."""
    if not critical.rational_flag or critical.rational_pq is None:
        raise ValueError("phi_k needs a critical point with a rational value")
    if term_cutoff < 1:
        raise ValueError("term_cutoff must be at least 1")
    tau_k = geo.tau(profile, critical.I_k)
    q = _admitted_multiples(critical)
    coef = phi_coefficient(profile, critical, tau_k)
    R = np.asarray(R, dtype=float)
    total = np.zeros_like(R)
    for j in range(1, term_cutoff + 1):
        m = q * j
        length = m * tau_k
        total = total + (-1) ** m * length ** (-4.0 / 3.0) * np.sin(length * R)
    out = coef * total
    return float(out) if out.ndim == 0 else out


def phi_period(profile, critical: geo.CriticalPoint) -> float:
    q = _admitted_multiples(critical)
    return 2.0 * math.pi / (q * geo.tau(profile, critical.I_k))


def _check_window(series: ErrorSeries, frequency: float) -> None:
    if frequency <= 0:
        raise ProjectionError("frequency must be positive")
    if len(series) < 2:
        raise ProjectionError("window too short: fewer than two samples")
    period = 2.0 * math.pi / frequency
    if series.window < MIN_PERIODS * period:
        raise ProjectionError(f"window too short for frequency {frequency:g}")
    if series.step > period / SAMPLES_PER_PERIOD:
        raise ProjectionError(f"grid too coarse for frequency {frequency:g}")


def project_mode(series: ErrorSeries, frequency: float, phase: float, with_error: bool = False,
                 blocks: int = 20):
    """``2 mean(F cos(frequency R - phase))`` over the grid.

    The standard error is the spread of the same projection over ``blocks``
    equal sub-windows divided by ``sqrt(blocks)``; with ``with_error`` returns
    ``(coef, stderr)``.
    """
    _check_window(series, frequency)
    c = np.cos(frequency * series.R_grid - phase)
    prod = series.F_vals * c
    coef = 2.0 * float(np.mean(prod))
    if not with_error:
        return coef
    nb = max(2, min(blocks, len(series) // 2))
    parts = np.array_split(prod, nb)
    vals = np.array([2.0 * p.mean() for p in parts])
    stderr = float(vals.std(ddof=1) / math.sqrt(nb))
    return coef, stderr


def partial_sum(modes, R):
    R = np.asarray(R, dtype=float)
    out = np.zeros_like(R)
    for md in modes:
        out = out + md.effective_amplitude * np.cos(md.frequency * R - md.phase)
    return float(out) if out.ndim == 0 else out


def b2_distance(series: ErrorSeries, modes) -> float:
    if modes:
        _check_window(series, max(md.frequency for md in modes))
    diff = series.F_vals - partial_sum(modes, series.R_grid)
    return float(np.mean(diff * diff))


def merge_collisions(modes, tol: float = FREQ_TOL) -> list[FourierMode]:
    """Combine modes whose frequencies agree within ``tol`` by phasor addition."""
    out: list[FourierMode] = []
    for md in sorted(modes, key=lambda x: x.frequency):
        if out and abs(md.frequency - out[-1].frequency) <= tol * max(1.0, md.frequency):
            prev = out.pop()
            z = prev.effective_amplitude * np.exp(1j * prev.phase) + md.effective_amplitude * np.exp(1j * md.phase)
            out.append(FourierMode(prev.frequency, float(abs(z)), float(np.angle(z)), prev.source, 1.0,
                                   prev.multiplicity + md.multiplicity))
        else:
            out.append(md)
    return out


def parseval_variance(modes, tol: float = FREQ_TOL) -> float:
    """``(1/2) sum (weight * amplitude)^2`` after merging equal frequencies."""
    freqs = np.sort([md.frequency for md in modes])
    if len(freqs) > 1 and np.min(np.diff(freqs)) <= tol * max(1.0, freqs[-1]):
        modes = merge_collisions(modes, tol)
    return 0.5 * sum(md.effective_amplitude ** 2 for md in modes)


def distribution(series: ErrorSeries, bins: int = 50, thresholds=(1.0, 2.0, 3.0),
                 edges=None) -> DistributionSummary:
    if bins < 10 and edges is None:
        raise ValueError("bins must be at least 10")
    F = np.asarray(series.F_vals, dtype=float)
    if edges is None:
        lo, hi = float(F.min()), float(F.max())
        if hi <= lo:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
    counts, edges = np.histogram(F, bins=edges)
    masses = counts / max(counts.sum(), 1)
    mean = float(F.mean())
    var = float(F.var())
    if var > 0:
        z = (F - mean) / math.sqrt(var)
        skew = float(np.mean(z ** 3))
        kurt = float(np.mean(z ** 4))
    else:
        skew, kurt = 0.0, 0.0
    tails = {float(t): float(np.mean(np.abs(F) > t)) for t in thresholds}
    return DistributionSummary(edges, masses, {"mean": mean, "variance": var, "skewness": skew,
                                               "kurtosis": kurt}, tails)


def tv_distance(a: DistributionSummary, b: DistributionSummary) -> float:
    if not np.array_equal(a.bin_edges, b.bin_edges):
        raise ValueError("histograms must share bin edges")
    return 0.5 * float(np.abs(a.bin_masses - b.bin_masses).sum())


def split_halves(series: ErrorSeries):
    n = len(series) // 2
    lo = series.with_F(series.F_vals)
    return (ErrorSeries(lo.R_grid[:n], lo.N_vals[:n], lo.area_coeff, lo.phi_subtracted, lo.F_vals[:n],
                        lo.Lambda_vals[:n]),
            ErrorSeries(lo.R_grid[n:], lo.N_vals[n:], lo.area_coeff, lo.phi_subtracted, lo.F_vals[n:],
                        lo.Lambda_vals[n:]))


def frequency_from_curve(curve: SpectralCurve, cls) -> float:
    """``2 pi Y(I) |xi|`` with ``|xi| = m sqrt(1 + omega^2)``."""
    w = float(curve.omega(cls.I))
    return 2.0 * math.pi * float(support_Y(curve, cls.I)) * cls.m * math.sqrt(1.0 + w * w)


def write_modes_csv(rows, path: str | Path) -> Path:
    """Rows of ``(frequency, predicted, empirical, stderr, relative_error)``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["frequency", "predicted_amplitude", "empirical_amplitude", "stderr", "relative_error"])
        for r in rows:
            wr.writerow([repr(float(v)) for v in r])
    return path


def write_histogram_csv(summary: DistributionSummary, path: str | Path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["bin_center", "mass"])
        for c, m in zip(summary.bin_centers, summary.bin_masses):
            wr.writerow([repr(float(c)), repr(float(m))])
    return path


def summary_json(summary: DistributionSummary) -> str:
    return json.dumps({"moments": summary.moments,
                       "tail_fractions": {repr(k): v for k, v in summary.tail_fractions.items()}},
                      indent=2, sort_keys=True)
