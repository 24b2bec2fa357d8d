import numpy as np
import pytest
from scipy.special import erf

from afshar_sim.field import make_grid
from afshar_sim.metrics import find_fringe_minima
from afshar_sim.scenarios import (
    ApparatusPlan,
    Variant,
    beam_radius,
    build_classic,
    build_modified,
    check_conservation,
    run_variant,
)

from conftest import default_plan

LAMBDA = 532e-9


def gaussian_strip_fraction(centers, width, w):
    """Fraction of exp(-2 x^2 / w^2) lying inside strips of ``width`` at ``centers``."""
    c = np.asarray(centers)
    s = np.sqrt(2) / w
    return float(np.sum(0.5 * (erf(s * (c + width / 2)) - erf(s * (c - width / 2)))))


def centroid(x, I, sel):
    return np.sum(x[sel] * I[sel]) / np.sum(I[sel])


class TestClassic:
    def test_no_wires_images_slits(self):
        plan = default_plan("classic", n_wires=0)
        assert plan.wire_centers == ()
        rep = run_variant(plan, Variant("both"))
        M = plan.info["magnification"]
        x, I = plan.grid.x, rep.profile_at_det
        sep = 500e-6
        # geometric imaging: spots at -/+ M * separation / 2
        assert centroid(x, I, np.abs(x + M * sep / 2) < M * sep / 4) == pytest.approx(-M * sep / 2, abs=plan.grid.dx)
        assert centroid(x, I, np.abs(x - M * sep / 2) < M * sep / 4) == pytest.approx(M * sep / 2, abs=plan.grid.dx)

    def test_path1_lands_on_detector_1(self, classic_plan):
        for grid_in in (False, True):
            rep = run_variant(classic_plan, Variant("path1", grid_in))
            assert rep.detector_flux[0] / sum(rep.detector_flux) >= 0.99

    def test_imaging_condition_enforced(self):
        g = make_grid(2**14, 5e-6, LAMBDA)
        with pytest.raises(ValueError, match="slit images"):
            build_classic(g, 500e-6, 25e-6, 1.0, 0.5, 0.75 * 1.1, 1.5, 106e-6, 5)

    def test_wires_sit_at_simulated_minima(self, classic_plan):
        period = LAMBDA * 1.0 / 500e-6
        np.testing.assert_allclose(
            np.array(classic_plan.wire_centers) / period, [-2.5, -1.5, -0.5, 0.5, 1.5], atol=0.01
        )


class TestModified:
    def test_fringe_period(self, modified_plan):
        period = LAMBDA / (2 * np.sin(2.66e-3))
        assert period == pytest.approx(100e-6, rel=1e-5)
        assert modified_plan.fringe_period == pytest.approx(period)
        prof = run_variant(modified_plan, Variant("both")).profile_at_grid
        mins = find_fringe_minima(prof, modified_plan.grid, 1e-3, 0.1)
        assert np.all(np.abs(np.diff(mins) - period) < modified_plan.grid.dx)

    def test_wire_centers_nearest_axis(self, modified_plan):
        np.testing.assert_allclose(
            np.array(modified_plan.wire_centers) / modified_plan.fringe_period,
            [-2.5, -1.5, -0.5, 0.5, 1.5],
            atol=1e-3,
        )

    def test_crossing_visibility(self, modified_matrix):
        assert modified_matrix.V_direct == pytest.approx(1.0, abs=0.01)

    def test_separation_precondition(self):
        g = make_grid(2**14, 2e-6, LAMBDA)
        with pytest.raises(ValueError, match="not separated"):
            build_modified(g, 1.5e-3, 2.66e-3, 0.2, 0.8, 10e-6, 5)

    def test_period_resolution_precondition(self):
        g = make_grid(2**14, 20e-6, LAMBDA)
        with pytest.raises(ValueError, match="8 samples"):
            build_modified(g, 1.5e-3, 2.66e-3, 0.2, 3.0, 40e-6, 5)

    def test_symmetric_detectors(self, modified_plan):
        F1, F2 = run_variant(modified_plan, Variant("both")).detector_flux
        assert F1 == pytest.approx(F2, rel=1e-3)

    def test_single_path_grid_loss_matches_strip_oracle(self, modified_plan):
        w = beam_radius(1.5e-3, 0.2, LAMBDA)
        expected = gaussian_strip_fraction(modified_plan.wire_centers, 10e-6, w)
        for paths in ("path1", "path2"):
            rep = run_variant(modified_plan, Variant(paths, True))
            loss = 1 - rep.flux_at["grid_out"] / rep.flux_at["grid_in"]
            assert loss == pytest.approx(expected, rel=0.05)

    def test_both_paths_nearly_transparent(self, modified_plan):
        rep = run_variant(modified_plan, Variant("both", True))
        assert rep.flux_at["grid_out"] / rep.flux_at["grid_in"] >= 0.998


@pytest.mark.parametrize("scenario", ["classic", "modified"])
def test_superposition(scenario, classic_plan, modified_plan):
    plan = classic_plan if scenario == "classic" else modified_plan
    for grid_in in (False, True):
        both = run_variant(plan, Variant("both", grid_in)).field_at_det.amp
        p1 = run_variant(plan, Variant("path1", grid_in)).field_at_det.amp
        p2 = run_variant(plan, Variant("path2", grid_in)).field_at_det.amp
        assert np.linalg.norm(both - (p1 + p2)) / np.linalg.norm(both) < 1e-10


@pytest.mark.parametrize("scenario", ["classic", "modified"])
def test_flux_monotone_along_plan(scenario, classic_matrix, modified_matrix):
    exp = classic_matrix if scenario == "classic" else modified_matrix
    for rep in exp.runs.values():
        trace = np.array(rep.flux_trace)
        assert np.all(np.diff(trace) <= 1e-10)
        assert sum(rep.detector_flux) <= trace[0]
        assert all(f >= 0 for f in rep.flux_at.values())
        check_conservation(rep)


def test_run_variant_deterministic(modified_plan):
    a = run_variant(modified_plan, Variant("both", True, photons=1000, seed=99))
    b = run_variant(modified_plan, Variant("both", True, photons=1000, seed=99))
    np.testing.assert_array_equal(a.field_at_det.amp, b.field_at_det.amp)
    np.testing.assert_array_equal(a.positions, b.positions)
    assert a.tallies.tolist() == b.tallies.tolist()
    assert a.flux_trace == b.flux_trace


@pytest.mark.parametrize("scenario", ["classic", "modified"])
def test_K_unchanged_by_grid(scenario, classic_matrix, modified_matrix):
    exp = classic_matrix if scenario == "classic" else modified_matrix
    assert abs(exp.K_grid - exp.K_nogrid) <= 0.01


@pytest.mark.parametrize("scenario", ["classic", "modified"])
def test_same_ensemble_bound(scenario, classic_matrix, modified_matrix):
    exp = classic_matrix if scenario == "classic" else modified_matrix
    assert exp.V_single == 0.0
    assert exp.gy_same_ensemble <= 1 + 1e-9
    assert exp.gy_inferred > 1


def test_traceback_single_path(modified_plan):
    rep = run_variant(modified_plan, Variant("path1", False, photons=100_000, seed=1))
    counts = rep.tallies.counts
    assert counts.sum() == 100_000
    assert counts[:, 0].sum() / 100_000 >= 0.99
    # cross-check against the detector-plane flux split
    x = modified_plan.grid.x
    left = rep.profile_at_det[x < 0].sum() / rep.profile_at_det.sum()
    assert counts[:, 0].sum() / 100_000 == pytest.approx(left, abs=3 * np.sqrt(left * (1 - left) / 1e5) + 1e-6)


def test_variant_validation():
    with pytest.raises(ValueError):
        Variant("path3")
    with pytest.raises(ValueError):
        Variant(photons=-1)


def test_plan_validation(modified_plan):
    with pytest.raises(ValueError):
        ApparatusPlan(
            grid=modified_plan.grid,
            source_kind="crossed_beams",
            sources=modified_plan.sources,
            steps=(),
            z0=0.0,
            z_grid=2.0,
            z_det=1.0,
        )
