"""Classic (lens) and modified (crossed-beam) wire-grid apparatus.

A plan is an ordered list of steps acting on a ScalarField.  Both
apparatus share one source convention: path 1 lands on detector 1', which
always sits at ``x < detector_split``.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace

import numpy as np

from . import metrics
from .field import ScalarField, gaussian_beam, slit, total_flux, intensity
from .optics import apply_mask, edge_absorber, propagate, thin_lens, wire_grid

__all__ = [
    "Propagate",
    "MaskStep",
    "Lens",
    "WirePlane",
    "ApparatusPlan",
    "Variant",
    "RunReport",
    "Experiment",
    "build_classic",
    "build_modified",
    "beam_radius",
    "run_variant",
    "run_matrix",
    "ConservationError",
    "check_conservation",
]

WIRES = "wires"
MINIMA_PROMINENCE = 0.1


@dataclass(frozen=True)
class Propagate:
    dz: float


@dataclass(frozen=True, eq=False)
class MaskStep:
    mask: object
    kind: str = "absorber"


@dataclass(frozen=True)
class Lens:
    focal: float


@dataclass(frozen=True, eq=False)
class WirePlane:
    """Marks the wire plane; ``mask`` is None when the plan has no wires."""

    mask: object = None


@dataclass(frozen=True, eq=False)
class ApparatusPlan:
    """Source fields plus ordered steps up to a single detection plane.

    ``steps`` holds ``(label, element)`` pairs.  The wire mask, when present,
    is the step labelled ``"wires"``; ``z_grid`` marks where it sits.
    ``windows`` optionally restricts each detector to ``(center, half_width)``;
    otherwise detectors are the half planes either side of ``detector_split``.
    """

    grid: object
    source_kind: str
    sources: tuple
    steps: tuple
    z0: float
    z_grid: float
    z_det: float
    detector_split: float = 0.0
    windows: tuple = None
    wire_centers: tuple = ()
    wire_width: float = 0.0
    fringe_period: float = 0.0
    analysis_window: tuple = None
    info: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        if self.source_kind not in ("slit_pair", "crossed_beams"):
            raise ValueError(f"unknown source kind {self.source_kind!r}")
        if not self.z0 < self.z_grid < self.z_det:
            raise ValueError("wire plane must lie strictly between source and detector")
        if len(self.sources) != 2:
            raise ValueError("a plan needs exactly two path sources")

    @property
    def plane_labels(self):
        return {"source": self.z0, "grid": self.z_grid, "detector": self.z_det}


@dataclass(frozen=True)
class Variant:
    paths: str = "both"
    grid_in: bool = False
    photons: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.paths not in ("both", "path1", "path2"):
            raise ValueError(f"paths must be both, path1 or path2, got {self.paths!r}")
        if self.photons < 0:
            raise ValueError("photons must be >= 0")

    @property
    def label(self):
        return f"{self.paths}_{'grid' if self.grid_in else 'nogrid'}"


@dataclass(frozen=True, eq=False)
class RunReport:
    variant: Variant
    flux_at: dict
    flux_trace: tuple
    detector_flux: tuple
    profile_at_grid: np.ndarray
    profile_at_det: np.ndarray
    field_at_det: ScalarField
    tallies: object = None
    positions: np.ndarray = None
    rng_id: str = metrics.RNG_ID


def _segmented(label, dz, absorber, segments):
    out = []
    for _ in range(segments):
        out.append((label, Propagate(dz / segments)))
        out.append(("absorber", MaskStep(absorber, "absorber")))
    return out


def _execute(plan, fld, grid_in, stop_at_grid=False):
    """Run the plan's steps; returns (field, flux trace, flux_at, profile at wire plane)."""
    trace = [total_flux(fld)]
    flux_at = {"source": trace[0]}
    at_grid = None
    for label, el in plan.steps:
        if isinstance(el, WirePlane):
            at_grid = intensity(fld)
            flux_at["grid_in"] = trace[-1]
            if stop_at_grid:
                return fld, trace, flux_at, at_grid
            if grid_in and el.mask is not None:
                fld = apply_mask(fld, el.mask)
                trace.append(total_flux(fld))
            flux_at["grid_out"] = trace[-1]
            continue
        if isinstance(el, Propagate):
            fld = propagate(fld, el.dz)
        elif isinstance(el, MaskStep):
            fld = apply_mask(fld, el.mask)
        elif isinstance(el, Lens):
            fld = thin_lens(fld, el.focal)
        else:
            raise TypeError(f"unknown plan element {el!r}")
        trace.append(total_flux(fld))
        if label == "lens":
            flux_at["lens"] = trace[-1]
    flux_at["detector"] = trace[-1]
    return fld, trace, flux_at, at_grid


def _source(plan, paths):
    s1, s2 = plan.sources
    return {"both": s1 + s2, "path1": s1, "path2": s2}[paths]


def _detector_fluxes(plan, profile):
    x = plan.grid.x
    dx = plan.grid.dx
    if plan.windows is None:
        sel = (x < plan.detector_split, x >= plan.detector_split)
    else:
        sel = tuple(np.abs(x - c) <= hw for c, hw in plan.windows)
    return tuple(float(np.sum(profile[s]) * dx) for s in sel)


def _grid_plane_profile(plan, paths="both"):
    return _execute(plan, _source(plan, paths), False, stop_at_grid=True)[3]


def run_variant(plan, variant):
    """Execute one (paths, grid) variant of a plan.

    Records fluxes along the plan, the intensity arriving at the wire plane
    and at the detector plane, and the detector fluxes.  With
    ``variant.photons > 0`` single photons are drawn from the detector
    profile and tallied against the side-of-split origin rule.
    """
    fld, trace, flux_at, prof_grid = _execute(plan, _source(plan, variant.paths), variant.grid_in)
    prof_det = intensity(fld)
    tallies = positions = None
    if variant.photons > 0:
        positions = metrics.sample_detections(prof_det, plan.grid, variant.photons, variant.seed)
        x = plan.grid.x
        tallies = metrics.traceback_tally(
            positions,
            plan.detector_split,
            metrics.side_of(plan.detector_split),
            bounds=(x[0] - plan.grid.dx / 2, x[-1] + plan.grid.dx / 2),
        )
    return RunReport(
        variant=variant,
        flux_at=flux_at,
        flux_trace=tuple(trace),
        detector_flux=_detector_fluxes(plan, prof_det),
        profile_at_grid=prof_grid,
        profile_at_det=prof_det,
        field_at_det=fld,
        tallies=tallies,
        positions=positions,
    )


def _pick_wires(plan_nogrid, n_wires, wire_width, window):
    prof = _grid_plane_profile(plan_nogrid)
    minima = metrics.find_fringe_minima(prof, plan_nogrid.grid, window, MINIMA_PROMINENCE)
    # nearest to axis first; ties broken towards negative x
    chosen = sorted(minima, key=lambda c: (round(abs(c) / plan_nogrid.grid.dx, 6), c))[:n_wires]
    if len(chosen) < n_wires:
        raise ValueError(f"only {len(chosen)} fringe minima found, {n_wires} wires requested")
    return tuple(sorted(float(c) for c in chosen))


def _with_wires(plan, n_wires, wire_width, window):
    """Return ``plan`` with the wire mask placed at the simulated minima."""
    if n_wires == 0:
        return plan
    centers = _pick_wires(plan, n_wires, wire_width, window)
    mask = wire_grid(plan.grid, centers, wire_width)
    steps = tuple((lab, WirePlane(mask)) if lab == WIRES else (lab, el) for lab, el in plan.steps)
    return replace(plan, steps=steps, wire_centers=centers)


def _analysis_half_width(n_wires):
    return max(n_wires / 2 + 1.5, 3.0)


def build_classic(
    grid,
    slit_separation,
    slit_width,
    L1,
    L2,
    focal,
    L3,
    wire_width,
    n_wires,
    segments=30,
    absorber_margin=0.1,
):
    """Double slit, wire plane at ``L1``, lens at ``L1 + L2``, detectors ``L3`` further.

    The detectors sit at the images of the slits, so ``1/(L1+L2) + 1/L3``
    must equal ``1/focal`` to within 1%.  Detector windows are centered on the
    images at ``-/+ M*separation/2`` with half-width ``M*separation/4``,
    ``M = L3/(L1+L2)``.  Slit 1 sits at ``+separation/2``; the lens inverts
    it onto detector 1' at negative x.
    """
    s = L1 + L2
    if focal == 0 or abs((1 / s + 1 / L3) * focal - 1) > 0.01:
        raise ValueError(
            f"detectors are not at the slit images: 1/{s} + 1/{L3} != 1/{focal} within 1%"
        )
    if n_wires and wire_width < 2 * grid.dx:
        raise ValueError(f"wire width {wire_width} is under 2 samples")
    if not slit_separation > slit_width or slit_width < 4 * grid.dx:
        raise ValueError("slits overlap or are unresolvable")
    M = L3 / s
    absorber = edge_absorber(grid, absorber_margin)
    steps = (
        _segmented("L1", L1, absorber, segments)
        + [(WIRES, WirePlane())]
        + _segmented("L2", L2, absorber, segments)
        + [("lens", Lens(focal))]
        + _segmented("L3", L3, absorber, segments)
    )
    period = grid.wavelength * L1 / slit_separation
    plan = ApparatusPlan(
        grid=grid,
        source_kind="slit_pair",
        sources=(slit(grid, slit_separation / 2, slit_width), slit(grid, -slit_separation / 2, slit_width)),
        steps=tuple(steps),
        z0=0.0,
        z_grid=L1,
        z_det=L1 + L2 + L3,
        windows=((-M * slit_separation / 2, M * slit_separation / 4), (M * slit_separation / 2, M * slit_separation / 4)),
        wire_width=wire_width,
        fringe_period=period,
        analysis_window=(-_analysis_half_width(n_wires) * period, _analysis_half_width(n_wires) * period),
        info={"magnification": M},
    )
    return _with_wires(plan, n_wires, wire_width, plan.analysis_window)


def beam_radius(waist, z, wavelength):
    """Gaussian 1/e^2 radius after distance ``z`` from the waist."""
    zr = np.pi * waist**2 / wavelength
    return waist * np.sqrt(1 + (z / zr) ** 2)


def build_modified(
    grid,
    beam_waist,
    half_angle,
    crossing_z,
    L_far,
    wire_width,
    n_wires,
    segments=8,
    absorber_margin=0.1,
    window_factor=1.5,
):
    """Two Gaussian beams tilted by ``-/+ half_angle`` that cross at ``crossing_z``.

    Beam waists sit at the source plane.  Wires go at the simulated minima
    in the crossing plane; the detectors are at ``L_far`` from the source,
    where the beams have separated again.  Detector windows are centered on
    the geometric beam axes with half-width ``window_factor`` times the beam
    radius there.  Raises ``ValueError`` when the beams still overlap at the
    detectors or the fringe period is under 8 samples.
    """
    if not 0 < crossing_z < L_far:
        raise ValueError("need 0 < crossing_z < L_far")
    period = grid.wavelength / (2 * np.sin(half_angle))
    if period < 8 * grid.dx:
        raise ValueError(f"fringe period {period:.3g} m is under 8 samples")
    if n_wires and wire_width < 2 * grid.dx:
        raise ValueError(f"wire width {wire_width} is under 2 samples")
    w_det = beam_radius(beam_waist, L_far, grid.wavelength)
    offset = (L_far - crossing_z) * np.tan(half_angle)
    if not 2 * offset > 4 * w_det:
        raise ValueError(
            f"beams not separated at the detectors: 2*{offset:.3g} <= 4*{w_det:.3g}"
        )
    x0 = crossing_z * np.tan(half_angle)
    b1 = gaussian_beam(grid, beam_waist, center=x0, tilt=-half_angle)
    b2 = gaussian_beam(grid, beam_waist, center=-x0, tilt=half_angle)
    absorber = edge_absorber(grid, absorber_margin)
    steps = (
        _segmented("approach", crossing_z, absorber, max(1, segments // 4))
        + [(WIRES, WirePlane())]
        + _segmented("far", L_far - crossing_z, absorber, segments)
    )
    half = _analysis_half_width(n_wires)
    plan = ApparatusPlan(
        grid=grid,
        source_kind="crossed_beams",
        sources=(b1, b2),
        steps=tuple(steps),
        z0=0.0,
        z_grid=crossing_z,
        z_det=L_far,
        windows=((-offset, window_factor * w_det), (offset, window_factor * w_det)),
        wire_width=wire_width,
        fringe_period=period,
        analysis_window=(-half * period, half * period),
        info={"beam_radius_at_detector": w_det, "beam_radius_at_grid": beam_radius(beam_waist, crossing_z, grid.wavelength)},
    )
    return _with_wires(plan, n_wires, wire_width, plan.analysis_window)


class ConservationError(RuntimeError):
    """A run created flux or broke the duality bookkeeping."""


def check_conservation(report, tol=1e-10):
    """Raise :class:`ConservationError` unless flux never grows along the plan."""
    trace = np.asarray(report.flux_trace)
    scale = max(trace[0], np.finfo(float).tiny)
    if np.any(np.diff(trace) > tol * scale):
        k = int(np.argmax(np.diff(trace)))
        raise ConservationError(f"{report.variant.label}: flux grew at step {k}")
    if sum(report.detector_flux) > trace[0] * (1 + tol):
        raise ConservationError(f"{report.variant.label}: detectors saw more flux than the source")


@dataclass(frozen=True, eq=False)
class Experiment:
    """Variant matrix of one plan and the figures of merit derived from it.

    ``K`` is taken from the runs with the grid in place when the plan has
    wires.  ``gy_same_ensemble`` pairs K with the visibility of a
    single-path run (zero when that run shows no fringes);
    ``gy_inferred`` pairs K with the grid-inferred visibility of the
    both-path runs.
    """

    plan: ApparatusPlan
    runs: dict
    seed: int
    V_direct: float
    V_single: float
    V_inferred: float
    losses: dict
    grid_transmission: dict
    K: float
    K_nogrid: float
    K_grid: float
    gy_same_ensemble: float
    gy_inferred: float
    tallies: object


def _loss(runs, paths):
    with_grid = sum(runs[f"{paths}_grid"].detector_flux)
    without = sum(runs[f"{paths}_nogrid"].detector_flux)
    return 1 - with_grid / without


def _K(runs, grid):
    tag = "grid" if grid else "nogrid"
    d1 = metrics.detector_distribution(*runs[f"path1_{tag}"].detector_flux)
    d2 = metrics.detector_distribution(*runs[f"path2_{tag}"].detector_flux)
    return metrics.distinguishability_K(d1, d2)


def _visibility_or_zero(profile, plan):
    try:
        return metrics.visibility_direct(profile, plan.grid, plan.analysis_window, MINIMA_PROMINENCE)
    except metrics.NoExtremaError:
        return 0.0


def sim_threads():
    """Worker cap from ``SIM_THREADS`` (default: CPU count, at most 6)."""
    env = os.environ.get("SIM_THREADS")
    if env:
        return max(1, int(env))
    return min(6, os.cpu_count() or 1)


def run_matrix(plan, photons=0, seed=0, threads=None, check=True):
    """Run both/path1/path2 with and without the grid and derive V, K and V^2+K^2.

    Losses are fractional drops in total detected flux (both detectors)
    when the grid is inserted.  Results do not depend on ``threads``.
    """
    variants = [
        Variant(paths, grid_in, photons, seed)
        for paths in ("both", "path1", "path2")
        for grid_in in (False, True)
    ]
    workers = threads or sim_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(lambda v: run_variant(plan, v), variants))
    else:
        reports = [run_variant(plan, v) for v in variants]
    runs = {r.variant.label: r for r in reports}
    if check:
        for r in reports:
            check_conservation(r)

    has_wires = len(plan.wire_centers) > 0
    V_direct = _visibility_or_zero(runs["both_nogrid"].profile_at_grid, plan)
    V_single = _visibility_or_zero(runs["path1_nogrid"].profile_at_grid, plan)
    losses = {p: _loss(runs, p) for p in ("both", "path1", "path2")}
    transmission = {
        p: runs[f"{p}_grid"].flux_at["grid_out"] / runs[f"{p}_grid"].flux_at["grid_in"]
        for p in ("both", "path1", "path2")
    }
    K_nogrid = _K(runs, False)
    K_grid = _K(runs, True)
    K = K_grid if has_wires else K_nogrid
    single = 0.5 * (losses["path1"] + losses["path2"])
    if has_wires and single > 0:
        V_inferred = metrics.visibility_inferred(max(losses["both"], 0.0), min(single, 1.0))
    else:
        V_inferred = float("nan")
    gy_same = metrics.gy_quantity(V_single, K)
    gy_inf = metrics.gy_quantity(V_inferred, K) if np.isfinite(V_inferred) else float("nan")
    if check and gy_same > 1 + 1e-9:
        raise ConservationError(f"same-ensemble V^2+K^2 = {gy_same} exceeds 1")
    headline = runs["both_grid" if has_wires else "both_nogrid"]
    return Experiment(
        plan=plan,
        runs=runs,
        seed=seed,
        V_direct=V_direct,
        V_single=V_single,
        V_inferred=V_inferred,
        losses=losses,
        grid_transmission=transmission,
        K=K,
        K_nogrid=K_nogrid,
        K_grid=K_grid,
        gy_same_ensemble=gy_same,
        gy_inferred=gy_inf,
        tallies=headline.tallies,
    )
