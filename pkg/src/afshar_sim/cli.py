"""Command line front end: ``afshar-sim simulate --config run.json --out results/``.

Exit codes: 0 success, 1 configuration or I/O error, 2 numerical failure
(flux created somewhere along a plan, or the same-ensemble V^2+K^2 above 1).
"""

import argparse
import logging
import math
import sys

from . import spin
from .config import ConfigError, load_config, parse_config
from .field import make_grid
from .report import emit_report, sg_summary_dict, write_summary
from .scenarios import ConservationError, build_classic, build_modified, run_matrix

log = logging.getLogger("afshar_sim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def _parser():
    p = argparse.ArgumentParser(prog="afshar-sim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("simulate", help="run one configured apparatus")
    s.add_argument("--config", required=True, help="JSON run configuration")
    s.add_argument("--out", default=".", help="output directory (default: .)")
    s.add_argument("--seed", type=int, help="RNG seed, overrides the config")
    s.add_argument("--photons", type=int, help="photons per variant, overrides the config")
    s.add_argument("--format", choices=("json", "csv"), help="write only this format")
    s.add_argument("-v", "--verbose", action="store_true")
    return p


def build_plan(cfg):
    grid = make_grid(**cfg.grid_params())
    if cfg.scenario == "classic":
        return build_classic(grid, **cfg.classic.model_dump())
    return build_modified(grid, **cfg.modified.model_dump())


def _sg_elements(cfg):
    elements = []
    for item in cfg.sg.elements:
        if hasattr(item, "device"):
            d = item.device
            elements.append(
                spin.Device(
                    math.radians(d.axis_deg),
                    block_up=d.block in ("up", "both"),
                    block_down=d.block in ("down", "both"),
                    name=d.name,
                )
            )
        elif hasattr(item, "merge"):
            elements.append(spin.Merge(item.merge.name))
        else:
            elements.append(spin.Detect())
    return elements


def _run_sg(cfg, out):
    elements = _sg_elements(cfg)
    inp = cfg.sg.input
    beam = spin.Beam(complex(inp.weight), spin.eigenstate(math.radians(inp.axis_deg), inp.sign))
    rep = spin.run_pipeline(elements, beam)
    names = spin.element_names(elements)[:-1]
    balance = rep.total_in - rep.total_out - rep.total_absorbed
    if abs(balance) > 1e-12 * max(rep.total_in, 1.0):
        raise ConservationError(f"SG flux balance off by {balance}")
    return [write_summary(sg_summary_dict(rep, cfg.seed, names), out)]


def run_cli(argv=None):
    """Parse ``argv``, run the configured scenario, write reports; return exit code."""
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config)
        updates = {}
        if args.seed is not None:
            updates["seed"] = args.seed
        if args.photons is not None:
            updates["photons"] = args.photons
        if updates:
            cfg = parse_config(cfg.model_dump() | updates)
        if cfg.scenario == "sg":
            written = _run_sg(cfg, args.out)
        else:
            plan = build_plan(cfg)
            exp = run_matrix(plan, photons=cfg.photons, seed=cfg.seed)
            formats = [args.format] if args.format else ["json", "csv"]
            written = []
            for fmt in formats:
                written += emit_report(exp, fmt, args.out, cfg.scenario)
    except (ConfigError, spin.PipelineError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except ConservationError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"cannot write output: {err}", file=sys.stderr)
        return EXIT_CONFIG
    for path in written:
        log.info("wrote %s", path)
    return EXIT_OK


def main():
    sys.exit(run_cli())
