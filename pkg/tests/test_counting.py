import numpy as np
import pytest

import oracles
from surfrev import counting as ct
from surfrev import kernels


def test_sphere_closed_form(sphere_curve):
    assert ct.count_bs(sphere_curve, 10.6) == 121
    for R in [0.6, 3.2, 25.9]:
        kmax = int(np.floor(R - 0.5))
        assert ct.count_bs(sphere_curve, R) == sum(2 * k + 1 for k in range(kmax + 1))


def test_empty_below_first_point(prolate_curve):
    from surfrev.bscurve import x_norm
    first = float(x_norm(prolate_curve, (0.5, 0.0)))
    assert ct.count_bs(prolate_curve, 0.999 * first) == 0
    assert ct.count_bs(prolate_curve, first) == 1


def test_rejects_nonpositive_radius(prolate_curve):
    with pytest.raises(ValueError):
        ct.count_bs(prolate_curve, 0.0)


@pytest.mark.parametrize("name", ["prolate_curve", "oblate_curve", "bell_curve"])
def test_brute_force(name, request):
    curve = request.getfixturevalue(name)
    rng = np.random.default_rng(5)
    R = np.concatenate([[25.0], rng.uniform(0.5, 60.0, 30)])
    assert [ct.count_bs(curve, r) for r in R] == oracles.brute_force_counts(curve, R)


def test_shifted_half_reproduces_default(prolate_curve):
    for R in [7.3, 19.0, 44.4]:
        assert ct.count_bs(prolate_curve, R, shift=(0.5, 0.0)) == ct.count_bs(prolate_curve, R)


def test_shifted_general(prolate_curve):
    # direct scan of n + alpha over a box
    from surfrev.bscurve import x_norm
    alpha = (0.3, 0.25)
    R = 17.5
    n = np.arange(-60, 61)
    n1, n2 = np.meshgrid(n, n)
    p1 = (n1 + alpha[0]).ravel()
    p2 = (n2 + alpha[1]).ravel()
    ok = (p1 > 0) & (np.abs(p2) <= p1)
    x = x_norm(prolate_curve, np.column_stack([p1[ok], p2[ok]]))
    assert ct.count_bs(prolate_curve, R, shift=alpha) == int(np.sum(x <= R))


def test_monotone_and_scaling(prolate_curve):
    R = np.linspace(5, 400, 400)
    N = [ct.count_bs(prolate_curve, r) for r in R]
    assert all(a <= b for a, b in zip(N, N[1:]))
    for r in [100.0, 200.0, 400.0]:
        ratio = ct.count_bs(prolate_curve, 2 * r) / ct.count_bs(prolate_curve, r)
        assert abs(ratio - 4) <= 40 / r


def test_grid_counts_match_single_counts(bell_curve):
    s = ct.error_series(bell_curve, 10.0, 80.0, 57)
    assert list(s.N_vals) == [ct.count_bs(bell_curve, r) for r in s.R_grid]


def test_threads_do_not_change_results(prolate_curve):
    a = ct.error_series(prolate_curve, 10, 300, 1000, threads=1)
    b = ct.error_series(prolate_curve, 10, 300, 1000, threads=3)
    assert np.array_equal(a.N_vals, b.N_vals)


def test_two_sample_series(prolate_curve):
    s = ct.error_series(prolate_curve, 10.0, 20.0, 2)
    assert len(s) == 2 and np.all(np.isfinite(s.F_vals))
    expected = (s.N_vals - prolate_curve.area * s.R_grid ** 2) / np.sqrt(s.R_grid)
    assert np.allclose(s.F_vals, expected)


def test_series_preconditions(prolate_curve):
    with pytest.raises(ValueError):
        ct.error_series(prolate_curve, 20, 10, 5)
    with pytest.raises(ValueError):
        ct.error_series(prolate_curve, 10, 20, 1)
    with pytest.raises(ValueError):
        ct.error_series(prolate_curve, 10, 20, 5, subtract_phi=True)


def test_sphere_series_flagged(sphere_curve):
    s = ct.error_series(sphere_curve, 10, 200, 500)
    assert s.diagnostics and "degenerate" in s.diagnostics[0]


def test_prolate_series_mean(prolate_series):
    assert np.all(np.diff(prolate_series.N_vals) >= 0)
    assert abs(prolate_series.F_vals.mean()) <= 0.05
    # running means over growing windows stay bounded
    csum = np.cumsum(prolate_series.F_vals) / np.arange(1, len(prolate_series) + 1)
    assert np.max(np.abs(csum[1000:])) < 0.5


def test_cache_roundtrip(tmp_path, bell_curve):
    a = ct.error_series(bell_curve, 10, 100, 300, cache_dir=tmp_path)
    files = list(tmp_path.glob("counts-*.npz"))
    assert len(files) == 1
    b = ct.error_series(bell_curve, 10, 100, 300, cache_dir=tmp_path)
    assert np.array_equal(a.N_vals, b.N_vals)
    assert ct.cache_key(bell_curve, 10, 100, 300) != ct.cache_key(bell_curve, 10, 100, 301)


def test_series_csv(tmp_path, bell_curve):
    s = ct.error_series(bell_curve, 10, 20, 5)
    path = ct.write_series_csv(s, tmp_path / "s.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "R,N,Lambda,F" and len(lines) == 6


def test_backends_agree(prolate_curve):
    rho, g = prolate_curve.rho_coefficients, prolate_curve.g_coefficients
    py = kernels.python_impl
    c1 = kernels.column_counts(rho, g, 300.0, 0, 301)
    c2 = py.column_counts(rho, g, 300.0, 0, 301)
    assert np.array_equal(c1, c2)
    assert np.array_equal(kernels.fill_norms(rho, c1, 0), py.fill_norms(rho, c2, 0))
    x = np.linspace(0, 1, 101)
    assert np.array_equal(kernels.cheb01(rho, x), prolate_curve.rho_series(x))
