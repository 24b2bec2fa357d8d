"""Serialization of experiment results to summary.json / profiles.csv / tallies.csv."""

import csv
import json
import math
import os

from .metrics import RNG_ID

__all__ = ["summary_dict", "sg_summary_dict", "emit_report", "write_summary"]


def _num(v):
    v = float(v)
    return v if math.isfinite(v) else None


def summary_dict(experiment, scenario):
    """Plain-data summary of an optics experiment.

    ``fluxes`` and ``detectors`` come from the headline run: both paths with
    the grid in place (or without it when the plan has no wires).
    """
    has_wires = len(experiment.plan.wire_centers) > 0
    head = experiment.runs["both_grid" if has_wires else "both_nogrid"]
    tallies = experiment.tallies.tolist() if experiment.tallies is not None else [[0, 0], [0, 0]]
    return {
        "scenario": scenario,
        "seed": int(experiment.seed),
        "rng_id": RNG_ID,
        "fluxes": {k: _num(v) for k, v in head.flux_at.items()},
        "detectors": [_num(f) for f in head.detector_flux],
        "V_direct": _num(experiment.V_direct),
        "V_inferred": _num(experiment.V_inferred),
        "K": _num(experiment.K),
        "gy_same_ensemble": _num(experiment.gy_same_ensemble),
        "gy_inferred": _num(experiment.gy_inferred),
        "tallies": [[int(c) for c in row] for row in tallies],
        "K_nogrid": _num(experiment.K_nogrid),
        "V_single": _num(experiment.V_single),
        "losses": {k: _num(v) for k, v in experiment.losses.items()},
        "wire_centers": [_num(c) for c in experiment.plan.wire_centers],
        "variants": {
            label: {"detectors": [_num(f) for f in r.detector_flux]}
            for label, r in experiment.runs.items()
        },
    }


def sg_summary_dict(report, seed, names):
    return {
        "scenario": "sg",
        "seed": int(seed),
        "rng_id": RNG_ID,
        "fluxes": {"input": _num(report.total_in)}
        | {name: {k: _num(v) for k, v in ports.items()} for name, ports in zip(names, report.port_flux)},
        "absorbed": {name: _num(a) for name, a in zip(names, report.absorbed)},
        "detectors": [_num(f) for f in report.detector_flux.values()],
        "detector_labels": list(report.detector_flux),
        "total_in": _num(report.total_in),
        "total_out": _num(report.total_out),
    }


def write_summary(summary, destination):
    os.makedirs(destination, exist_ok=True)
    path = os.path.join(destination, "summary.json")
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(summary, indent=2, allow_nan=False) + "\n")
    return path


def _write_profiles(experiment, destination):
    has_wires = len(experiment.plan.wire_centers) > 0
    head = experiment.runs["both_grid" if has_wires else "both_nogrid"]
    x = experiment.plan.grid.x
    path = os.path.join(destination, "profiles.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_m", "I_grid", "I_det"])
        for row in zip(x, head.profile_at_grid, head.profile_at_det):
            w.writerow([repr(float(v)) for v in row])
    return path


def _write_tallies(summary, destination):
    path = os.path.join(destination, "tallies.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["detector", "origin_1", "origin_2"])
        for det, row in enumerate(summary["tallies"], start=1):
            w.writerow([det, *row])
    return path


def emit_report(experiment, fmt, destination, scenario):
    """Write ``summary.json`` (fmt ``json``) or ``profiles.csv`` + ``tallies.csv`` (``csv``).

    Returns the list of written paths.  Output bytes depend only on the
    experiment contents.
    """
    os.makedirs(destination, exist_ok=True)
    summary = summary_dict(experiment, scenario)
    if fmt == "json":
        return [write_summary(summary, destination)]
    if fmt == "csv":
        return [_write_profiles(experiment, destination), _write_tallies(summary, destination)]
    raise ValueError(f"unknown format {fmt!r}")
