import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from afshar_sim.field import make_grid
from afshar_sim.metrics import (
    DetectorDistribution,
    NoExtremaError,
    detector_distribution,
    distinguishability_K,
    find_fringe_minima,
    gy_quantity,
    sample_detections,
    side_of,
    traceback_tally,
    visibility_direct,
    visibility_inferred,
)

LAMBDA = 532e-9
PERIOD = 100e-6


@pytest.fixture
def grid():
    return make_grid(2**14, 1e-6, LAMBDA)


def fringes(grid, i1=1.0, i2=1.0, period=PERIOD):
    return i1 + i2 + 2 * np.sqrt(i1 * i2) * np.cos(2 * np.pi * grid.x / period)


def test_minima_of_two_wave_pattern(grid):
    mins = find_fringe_minima(fringes(grid), grid, 1e-3)
    # analytic minima: odd multiples of period/2
    expected = (np.arange(-5, 5) + 0.5) * PERIOD
    np.testing.assert_allclose(mins, expected, atol=grid.dx)
    assert np.all(np.abs(np.diff(mins) - PERIOD) < grid.dx)


def test_minima_refined_below_one_cell():
    g = make_grid(2**14, 1e-6, LAMBDA)
    period = 97.3e-6  # minima fall between samples
    mins = find_fringe_minima(fringes(g, period=period), g, 0.8e-3)
    k = np.round(mins / period - 0.5)
    np.testing.assert_allclose(mins, (k + 0.5) * period, atol=0.05 * g.dx)


def test_gaussian_profile_has_no_minima(grid):
    with pytest.raises(NoExtremaError):
        find_fringe_minima(np.exp(-2 * grid.x**2 / (200e-6) ** 2), grid, 1e-3)


def test_flat_profile_has_no_minima(grid):
    with pytest.raises(NoExtremaError):
        find_fringe_minima(np.ones(grid.n), grid, 1e-3)


def test_symmetric_profile_symmetric_minima(grid):
    prof = fringes(grid) * np.exp(-2 * grid.x**2 / (400e-6) ** 2)
    mins = find_fringe_minima(prof, grid, 1.2e-3)
    np.testing.assert_allclose(mins, -mins[::-1], atol=grid.dx)


def test_window_outside_grid(grid):
    with pytest.raises(ValueError):
        find_fringe_minima(fringes(grid), grid, 2 * grid.span)


def test_prominence_filters_ripple(grid):
    ripple = 0.2 * np.random.default_rng(0).random(grid.n)
    prof = fringes(grid) + 2 + ripple
    assert len(find_fringe_minima(prof, grid, 1e-3)) > 100
    assert len(find_fringe_minima(prof, grid, 1e-3, prominence=0.1)) == 10


def test_visibility_equal_beams(grid):
    assert visibility_direct(fringes(grid), grid, 1e-3) == pytest.approx(1.0, abs=0.01)


def test_visibility_single_beam_raises(grid):
    with pytest.raises(NoExtremaError):
        visibility_direct(np.exp(-2 * grid.x**2 / (200e-6) ** 2), grid, 1e-3)


def test_visibility_unequal_beams(grid):
    # analytic V = 2 sqrt(I1 I2) / (I1 + I2)
    expected = 2 * np.sqrt(3) / 4
    assert expected == pytest.approx(0.866, abs=1e-3)
    assert visibility_direct(fringes(grid, 1.0, 3.0), grid, 1e-3) == pytest.approx(expected, abs=0.01)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 1e6))
def test_visibility_scale_invariant(c):
    g = make_grid(1024, 1e-6, LAMBDA)
    prof = fringes(g, 1.0, 2.0)
    assert visibility_direct(c * prof, g, 0.8e-3) == pytest.approx(
        visibility_direct(prof, g, 0.8e-3), rel=1e-12
    )


@pytest.mark.parametrize("c", [0.25, 2.0, 1024.0])
def test_visibility_scale_invariant_exact_for_powers_of_two(c, grid):
    prof = fringes(grid, 1.0, 2.0)
    assert visibility_direct(c * prof, grid, 1e-3) == visibility_direct(prof, grid, 1e-3)


def test_visibility_inferred_examples():
    assert visibility_inferred(0.0, 0.05) == 1.0
    assert visibility_inferred(0.05, 0.05) == 0.0
    assert visibility_inferred(0.1, 0.05) == 0.0
    assert visibility_inferred(0.01, 0.04) == pytest.approx(0.75)
    with pytest.raises(ValueError):
        visibility_inferred(0.01, 0.0)


def test_K_examples():
    assert distinguishability_K(detector_distribution(1, 0), detector_distribution(0, 1)) == 1.0
    d = detector_distribution(0.3, 0.7)
    assert distinguishability_K(d, d) == 0.0
    # 0.5 * (|0.9 - 0.1| + |0.1 - 0.9|) = 0.8
    K = distinguishability_K(DetectorDistribution((0.9, 0.1), 1.0), DetectorDistribution((0.1, 0.9), 1.0))
    assert K == pytest.approx(0.8, abs=1e-15)


def test_K_zero_normalization():
    with pytest.raises(ValueError):
        distinguishability_K(detector_distribution(0, 0), detector_distribution(1, 0))


@given(st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3), st.floats(0, 1e3))
def test_K_symmetric_and_bounded(a, b, c, d):
    d1, d2 = detector_distribution(a, b), detector_distribution(c, d)
    if d1.normalization == 0 or d2.normalization == 0:
        return
    k = distinguishability_K(d1, d2)
    assert k == distinguishability_K(d2, d1)
    assert 0 <= k <= 1 + 1e-15


def test_gy_quantity():
    assert gy_quantity(1.0, 0.0) == 1.0
    assert gy_quantity(0.6, 0.8) == pytest.approx(1.0, abs=1e-15)
    assert gy_quantity(0.99, 0.99) == pytest.approx(1.9602, abs=1e-12)
    with pytest.raises(ValueError):
        gy_quantity(1.1, 0.0)
    with pytest.raises(ValueError):
        gy_quantity(0.5, -0.1)


def test_sampling_delta_profile(grid):
    prof = np.zeros(grid.n)
    prof[9000] = 1.0
    x = sample_detections(prof, grid, 1000, seed=3)
    c = grid.x[9000]
    assert np.all((x >= c - grid.dx / 2) & (x < c + grid.dx / 2))


def test_sampling_flat_profile_mean(grid):
    n = 100_000
    x = sample_detections(np.ones(grid.n), grid, n, seed=11)
    center = grid.x[0] - grid.dx / 2 + grid.span / 2
    sigma = grid.span / np.sqrt(12 * n)
    assert abs(x.mean() - center) < 3 * sigma


def _binned(grid, profile, positions, bins):
    edges = np.linspace(grid.x[0] - grid.dx / 2, grid.x[-1] + grid.dx / 2, bins + 1)
    counts, _ = np.histogram(positions, edges)
    # each bin holds grid.n / bins whole cells
    mass = profile.reshape(bins, -1).sum(axis=1)
    return counts, mass / mass.sum()


def test_sampling_chi_square_on_fringes():
    g = make_grid(2**12, 1e-6, LAMBDA)
    prof = fringes(g, period=500e-6) * np.exp(-2 * g.x**2 / (1.2e-3) ** 2)
    n = 100_000
    counts, p = _binned(g, prof, sample_detections(prof, g, n, seed=2024), 64)
    keep = p * n >= 5
    obs = counts[keep]
    exp = p[keep] * n
    exp *= obs.sum() / exp.sum()
    assert chisquare(obs, exp).pvalue > 1e-3


def test_sampling_histogram_l1_convergence():
    g = make_grid(2**12, 1e-6, LAMBDA)
    prof = fringes(g, 1.0, 2.0, period=700e-6)
    n, bins = 100_000, 64
    bound = 2 * np.sqrt(bins / n)
    failures = 0
    for seed in range(20):
        counts, p = _binned(g, prof, sample_detections(prof, g, n, seed), bins)
        failures += np.abs(counts / n - p).sum() > bound
    assert failures <= 1


def test_sampling_deterministic_and_validated(grid):
    prof = fringes(grid)
    np.testing.assert_array_equal(
        sample_detections(prof, grid, 100, 5), sample_detections(prof, grid, 100, 5)
    )
    with pytest.raises(ValueError):
        sample_detections(np.zeros(grid.n), grid, 10, 0)
    with pytest.raises(ValueError):
        sample_detections(prof, grid, 0, 0)


def test_tally_empty_and_sides():
    assert traceback_tally([], 0.0).tolist() == [[0, 0], [0, 0]]
    t = traceback_tally([-1.0, -2.0, 3.0], 0.0)
    assert t.tolist() == [[2, 0], [0, 1]]
    assert t.total == 3


def test_tally_custom_origin_rule_and_bounds():
    def always_first(x):
        return np.zeros(len(x), int)

    t = traceback_tally([-1.0, 1.0], 0.0, always_first)
    assert t.tolist() == [[1, 0], [1, 0]]
    with pytest.raises(ValueError):
        traceback_tally([5.0], 0.0, side_of(0.0), bounds=(-1.0, 1.0))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1, 1), max_size=200))
def test_tally_sums_to_photon_count(xs):
    assert traceback_tally(xs, 0.1).total == len(xs)
