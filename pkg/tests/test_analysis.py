import math

import mpmath
import numpy as np
import pytest

import oracles
from surfrev import analysis as an
from surfrev import geodesics as geo
from surfrev.bscurve import support_Y
from surfrev.counting import synthetic_series


@pytest.fixture(scope="module")
def grid():
    # 200 pi holds a whole number of periods of every integer frequency
    return np.linspace(0.0, 200 * math.pi, 40000, endpoint=False)


def test_synthetic_projection(grid):
    s = synthetic_series(grid, 0.7 * np.cos(3 * grid - 1))
    coef, se = an.project_mode(s, 3.0, 1.0, with_error=True)
    tol = 2 / math.sqrt(len(grid) * s.window)
    assert coef == pytest.approx(0.7, abs=tol)
    assert an.project_mode(s, 4.0, 1.0) == pytest.approx(0.0, abs=tol)


def test_projection_linearity(grid):
    f1 = 0.3 * np.cos(2.2 * grid) + np.sin(0.7 * grid)
    f2 = -0.5 * np.cos(5.1 * grid - 0.4)
    s1, s2, s12 = (synthetic_series(grid, f) for f in (f1, f2, f1 + f2))
    for nu, ph in [(2.2, 0.0), (5.1, 0.4), (3.3, 1.0)]:
        assert an.project_mode(s12, nu, ph) == pytest.approx(
            an.project_mode(s1, nu, ph) + an.project_mode(s2, nu, ph), abs=1e-12)


def test_projection_guards(grid):
    s = synthetic_series(grid, np.zeros_like(grid))
    with pytest.raises(an.ProjectionError):
        an.project_mode(s, 0.1, 0.0)  # fewer than 20 periods
    with pytest.raises(an.ProjectionError):
        an.project_mode(s, 100.0, 0.0)  # fewer than 8 samples per period
    short = synthetic_series(np.array([1.0, 2.0]), np.zeros(2))
    with pytest.raises(an.ProjectionError):
        an.project_mode(short, 1.0, 0.0)


def test_partial_sum_basics():
    assert an.partial_sum([], 3.0) == 0.0
    md = an.FourierMode(2.5, -0.4, 1.0)
    assert an.partial_sum([md], 1.0 / 2.5) == pytest.approx(-0.4, abs=1e-15)


def test_partial_sum_against_loop(prolate, prolate_curve):
    modes = an.predicted_modes(prolate, prolate_curve, 40.0)
    rng = np.random.default_rng(2)
    R = rng.uniform(50, 2000, 100)
    vals = an.partial_sum(modes, R)
    ref = [oracles.partial_sum_loop(modes, r) for r in R]
    assert np.allclose(vals, ref, atol=1e-12)


def test_b2_distance_synthetic(grid):
    modes = [an.FourierMode(3.0, 0.5, 0.2), an.FourierMode(4.5, -0.2, 2.0, weight=0.5)]
    s = synthetic_series(grid, an.partial_sum(modes, grid))
    assert an.b2_distance(s, modes) < 1e-20
    assert an.b2_distance(s, []) == pytest.approx(float(np.mean(s.F_vals ** 2)))


def test_distribution_constant():
    s = synthetic_series(np.linspace(0, 1, 100), np.full(100, 0.3))
    d = an.distribution(s, bins=10)
    assert d.bin_masses.sum() == pytest.approx(1.0)
    assert np.count_nonzero(d.bin_masses) == 1
    assert d.moments["variance"] == 0.0


def test_distribution_tails(grid):
    s = synthetic_series(grid, 2.5 * np.cos(grid))
    d = an.distribution(s, bins=40)
    assert d.moments["variance"] == pytest.approx(2.5 ** 2 / 2, rel=1e-3)
    assert d.tail_fractions[3.0] == 0.0
    assert 0 < d.tail_fractions[2.0] < d.tail_fractions[1.0] < 1
    with pytest.raises(ValueError):
        an.distribution(s, bins=5)


def test_modes_sphere_refused(sphere, sphere_curve):
    with pytest.raises(geo.DegenerateSurfaceError):
        an.predicted_modes(sphere, sphere_curve, 30.0)


def test_prolate_modes(prolate, prolate_curve):
    modes = an.predicted_modes(prolate, prolate_curve, 30.0)
    freqs = [m.frequency for m in modes]
    assert all(f > 0 for f in freqs) and freqs == sorted(freqs)
    first = modes[0]
    assert first.frequency == pytest.approx(2 * prolate.L)
    w0 = geo.omega_prime(prolate, 0.0)
    assert first.amplitude == pytest.approx(-1 / (math.pi * math.sqrt(w0)))
    # TH with omega' > 0: one phase value only
    assert {round(m.phase, 12) for m in modes} == {round(3 * math.pi / 4, 12)}
    eq = [m for m in modes if m.source.is_equator_class]
    assert eq and all(m.weight == 0.5 and m.multiplicity == 2 for m in eq)


def test_oblate_phase(oblate, oblate_curve):
    modes = an.predicted_modes(oblate, oblate_curve, 20.0)
    assert {round(m.phase, 12) for m in modes} == {round(math.pi / 4, 12)}


def test_mode_dictionary(prolate, prolate_curve):
    classes = geo.enumerate_closed_geodesics(prolate, 40.0)
    for c in classes:
        assert an.frequency_from_curve(prolate_curve, c) == pytest.approx(c.length, rel=1e-8)


def test_bell_modes_skip_inflection(bell, bell_curve):
    modes = an.predicted_modes(bell, bell_curve, 40.0)
    assert not any(m.source.is_inflection_class for m in modes)
    phases = {round(m.phase, 12) for m in modes}
    assert phases == {round(math.pi / 4, 12), round(3 * math.pi / 4, 12)}


def test_phi_k_basic(bell, bell_curve):
    (c,) = bell_curve.critical
    assert an.phi_k(bell, c, 0.0, 6) == 0.0
    period = an.phi_period(bell, c)
    R = np.linspace(3, 40, 25)
    assert np.allclose(an.phi_k(bell, c, R + period, 6), an.phi_k(bell, c, R, 6), atol=1e-12, rtol=0)


def test_phi_k_rejects_irrational(bell):
    c = geo.CriticalPoint(0.3, math.sqrt(2) - 1, -1.0, False, None)
    with pytest.raises(ValueError):
        an.phi_k(bell, c, 1.0, 3)


def test_phi_coefficient_high_precision(bell, bell_curve):
    (c,) = bell_curve.critical
    tau_k = geo.tau(bell, c.I_k)
    mpmath.mp.dps = 30
    ai0 = mpmath.mpf(3) ** (-mpmath.mpf(2) / 3) / mpmath.gamma(mpmath.mpf(2) / 3)
    assert abs(ai0 - mpmath.airyai(0)) < mpmath.mpf(10) ** -25
    ref = 4 * ai0 * mpmath.pi ** (-mpmath.mpf(1) / 3) * mpmath.mpf(abs(c.omega_second)) ** (-mpmath.mpf(1) / 3) \
        * mpmath.mpf(tau_k) ** (mpmath.mpf(4) / 3)
    assert an.phi_coefficient(bell, c) == pytest.approx(float(ref), rel=1e-14)
    # leading term: q = 2 so the shortest inflection class has length 2 tau_k
    lead = float(ref) * (2 * tau_k) ** (-4.0 / 3.0)
    R = 0.01
    assert an.phi_k(bell, c, R, 1) == pytest.approx(lead * math.sin(2 * tau_k * R), rel=1e-12)


def test_parseval_and_merge():
    a = an.FourierMode(3.0, 0.4, 0.0)
    b = an.FourierMode(3.0, 0.3, math.pi / 2)
    merged = an.merge_collisions([a, b])
    assert len(merged) == 1 and merged[0].amplitude == pytest.approx(0.5)
    assert an.parseval_variance([a, b]) == pytest.approx(0.125)
    assert an.parseval_variance([a, an.FourierMode(4.0, 0.3, 0.0, weight=0.5)]) == pytest.approx(
        0.5 * (0.16 + 0.0225))


def test_support_dictionary(prolate, prolate_curve):
    for c in geo.enumerate_closed_geodesics(prolate, 25.0):
        w = geo.omega(prolate, c.I)
        xi = c.m * math.sqrt(1 + w * w)
        assert 2 * math.pi * float(support_Y(prolate_curve, c.I)) * xi == pytest.approx(c.length, rel=1e-8)


def test_exports(tmp_path):
    an.write_modes_csv([(1.0, 0.5, 0.49, 0.01, 0.02)], tmp_path / "m.csv")
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == \
        "frequency,predicted_amplitude,empirical_amplitude,stderr,relative_error"
    s = synthetic_series(np.linspace(0, 1, 50), np.linspace(-1, 1, 50))
    an.write_histogram_csv(an.distribution(s, 10), tmp_path / "h.csv")
    assert len((tmp_path / "h.csv").read_text().splitlines()) == 11
