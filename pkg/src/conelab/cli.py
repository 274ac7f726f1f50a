"""Command line interface.

Subcommands: dist (one pair of ray points, all three metrics), sweep
(almost-isometry grid), compare (thin-part metric comparison), diverge
(twist divergence table), project (systole projection of a trace triple).
A config file of `key = value` lines supplies defaults; explicit flags
override it.  Exit codes: 0 success, 2 configuration error, 3 a report with
property violations was written.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import lab, modelmap
from .hypgeom import TraceCoord, minsky_teich_estimate
from .conemodel import quotient_ray_distance_s11
from .lab import ConfigError, DivergenceConfig, SweepConfig


def _add_shared(p: argparse.ArgumentParser):
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-step", type=float, default=None)
    p.add_argument("--height", type=int, default=None, metavar="Q",
                   help="slope enumeration height")
    p.add_argument("--orbit-radius", type=int, default=None, metavar="R",
                   help="mapping-class ball radius")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--out", type=str, default=None, metavar="PATH")
    p.add_argument("--config", type=str, default=None, metavar="PATH",
                   help="key = value config file; flags override it")
    p.add_argument("--jobs", type=int, default=None,
                   help="parallel workers for grid rows (default 1)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conelab")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dist", help="all three metrics for one pair of ray points")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    _add_shared(p)

    p = sub.add_parser("sweep", help="almost-isometry grid sweep")
    _add_shared(p)

    p = sub.add_parser("compare", help="thin-part Teichmueller comparison sweep")
    _add_shared(p)

    p = sub.add_parser("diverge", help="twist divergence sequence")
    p.add_argument("--n-max", type=int, default=None)
    _add_shared(p)

    p = sub.add_parser("project", help="project a trace triple to the model ray")
    p.add_argument("x", type=float)
    p.add_argument("y", type=float)
    p.add_argument("z", type=float)
    _add_shared(p)
    return parser


_SWEEP_FLAGS = {
    "grid_min": "grid_min",
    "grid_max": "grid_max",
    "grid_step": "grid_step",
    "height": "enum_height",
    "orbit_radius": "orbit_radius",
    "tol": "tol",
    "out": "out",
    "jobs": "jobs",
}


def _merge_config(args, base, flag_map):
    if args.config is not None:
        base = lab.config_from_file(args.config, base)
    overrides = {}
    for flag, field_name in flag_map.items():
        val = getattr(args, flag, None)
        if val is not None:
            overrides[field_name] = val
    return replace(base, **overrides)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        lab.emit_report(text, out)


def _cmd_dist(args) -> int:
    cfg = _merge_config(args, SweepConfig(), _SWEEP_FLAGS)
    cfg.validate()
    if args.x < 0 or args.y < 0:
        raise ConfigError("ray points must be nonnegative")
    d_v = quotient_ray_distance_s11(args.x, args.y)
    d_l = modelmap.moduli_ls_distance(
        modelmap.psi(args.x), modelmap.psi(args.y), cfg.enum_height, cfg.orbit_radius
    )
    d_t = minsky_teich_estimate(
        modelmap.psi_fn(args.x), modelmap.psi_fn(args.y), modelmap.EPSILON0
    )
    print(f"d_V = {lab._fmt(d_v)}")
    print(f"d_L_lower = {lab._fmt(d_l.lower)} (height={d_l.enum_height}, "
          f"orbit_radius={d_l.orbit_radius})")
    print(f"d_T_est = {lab._fmt(d_t)}")
    return 0


def _cmd_sweep(args) -> int:
    cfg = _merge_config(args, SweepConfig(), _SWEEP_FLAGS)
    rows, summary = lab.sweep_almost_isometry(cfg)
    _emit(lab.render_sweep(cfg, rows, summary), cfg.out)
    return 3 if summary.wolpert_violations else 0


def _cmd_compare(args) -> int:
    cfg = _merge_config(args, SweepConfig(), _SWEEP_FLAGS)
    rows, summary = lab.sweep_teich_comparison(cfg)
    _emit(lab.render_compare(cfg, rows, summary), cfg.out)
    bad = summary.degeneration_violations or summary.wolpert_violations
    return 3 if bad else 0


def _cmd_diverge(args) -> int:
    flag_map = {"height": "enum_height", "out": "out", "n_max": "n_max"}
    cfg = _merge_config(args, DivergenceConfig(), flag_map)
    rows = lab.divergence_sequence(cfg)
    _emit(lab.render_divergence(cfg, rows), cfg.out)
    return 0


def _cmd_project(args) -> int:
    cfg = _merge_config(args, SweepConfig(enum_height=50), _SWEEP_FLAGS)
    cfg.validate()
    try:
        t = TraceCoord(args.x, args.y, args.z)
    except ValueError as err:
        raise ConfigError(f"invalid trace triple: {err}") from err
    report = modelmap.systole_search(t, cfg.enum_height)
    point = modelmap.bers_project(t, cfg.enum_height)
    print(f"model_coordinate = {lab._fmt(point.coordinate)}")
    print(f"systole_slope = {report.slope}")
    print(f"systole_length = {lab._fmt(report.length)}")
    print(f"enumeration_exact = {report.exact} "
          f"(certified once height >= {report.certified_height})")
    return 0


_COMMANDS = {
    "dist": _cmd_dist,
    "sweep": _cmd_sweep,
    "compare": _cmd_compare,
    "diverge": _cmd_diverge,
    "project": _cmd_project,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
