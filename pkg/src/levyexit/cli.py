"""Command-line front end: exit-time and escape-probability curves, sweeps,
figure presets, Monte Carlo cross-checks, and the validation suite.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import Sequence

import numpy as np

from .config import FLAG_DESTS, ConfigError, RunConfig, resolve_run
from .mc import mc_escape_probability, mc_mean_exit_time
from .report import csv_text, mc_report_text, write_text
from .solver import (EscapeTarget, SingularMatrixError, build_grid,
                     escape_probability, mean_exit_time)

__all__ = ["main"]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

# Curve-parameter lists for figure presets whose definitions fix only the
# per-panel values.  These are tool defaults, flagged in output metadata.
DEFAULT_ALPHA_CURVES = (0.1, 0.5, 1.0, 1.5)
DEFAULT_EPS_CURVES = (0.1, 0.3, 0.5, 0.7)
DEFAULT_A_CURVES = (0.0, 0.25, 0.5, 0.75)

_PANEL_LETTERS = ("a", "b", "c", "d")
_NUMERICAL_ERRORS = (SingularMatrixError, FloatingPointError, np.linalg.LinAlgError)


def _add_shared_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="FILE",
                   help="JSON config file (sections model/noise/domain/mc/output)")
    p.add_argument("--drift", choices=("tumor", "zero"),
                   help="drift field: the tumor model or f=0 (default tumor)")
    p.add_argument("--theta", type=float, help="tumor model theta (default 0.1)")
    p.add_argument("--beta", type=float, help="tumor model beta (default 3.0)")
    p.add_argument("--a", type=float, help="Gaussian diffusion coefficient (default 0)")
    p.add_argument("--eps", type=float, help="stable noise intensity (default 0.5)")
    p.add_argument("--alpha", type=float, help="stability index in (0, 2) (default 1.0)")
    p.add_argument("--c", type=float, help="left endpoint (default: extinction state 0)")
    p.add_argument("--d", type=float, help="right endpoint (default: tumor state x3)")
    p.add_argument("--h", type=float, help="grid spacing (default (d-c)/500)")
    p.add_argument("--dt", type=float, help="Monte Carlo time step (default 1e-3)")
    p.add_argument("--paths", type=int, help="Monte Carlo path count (default 10000)")
    p.add_argument("--max-time", dest="max_time", type=float,
                   help="censoring horizon (default: 100x the solver estimate)")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--out", metavar="PATH", help="output file (figure: directory); default stdout")
    p.add_argument("--scheme", choices=("corrected", "uncorrected"), default="corrected",
                   help="difference scheme variant (default corrected)")


def _parse_values(text: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("--values must contain at least one number")
    return vals


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levyexit",
        description="Mean exit times and escape probabilities under combined "
                    "Gaussian and symmetric stable noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_met = sub.add_parser("met", help="mean exit time curve u(x) as CSV")
    _add_shared_flags(p_met)
    p_met.add_argument("--plot", action="store_true", help="also render an SVG next to --out")
    p_met.set_defaults(func=cmd_met)

    p_esc = sub.add_parser("escape", help="escape probability curve p(x) as CSV")
    _add_shared_flags(p_esc)
    p_esc.add_argument("--target", choices=("left", "right"), default="left",
                       help="exterior side whose hitting probability is computed")
    p_esc.add_argument("--plot", action="store_true", help="also render an SVG next to --out")
    p_esc.set_defaults(func=cmd_escape)

    p_mc = sub.add_parser("mc", help="Monte Carlo cross-check against the solver")
    _add_shared_flags(p_mc)
    p_mc.add_argument("--quantity", choices=("met", "escape"), required=True)
    p_mc.add_argument("--x0", type=float, required=True, help="starting point in (c, d)")
    p_mc.add_argument("--target", choices=("left", "right"), default="left")
    p_mc.set_defaults(func=cmd_mc)

    p_sweep = sub.add_parser("sweep", help="curves over a list of parameter values")
    _add_shared_flags(p_sweep)
    p_sweep.add_argument("--param", choices=("a", "epsilon", "alpha", "x0"), required=True)
    p_sweep.add_argument("--values", type=_parse_values, required=True,
                         metavar="V1,V2,...", help="comma-separated values to sweep")
    p_sweep.add_argument("--quantity", choices=("met", "escape"), default="met")
    p_sweep.add_argument("--target", choices=("left", "right"), default="left")
    p_sweep.add_argument("--plot", action="store_true", help="also render an SVG next to --out")
    p_sweep.set_defaults(func=cmd_sweep)

    p_fig = sub.add_parser("figure", help="four-panel parameter-study preset as CSV files")
    _add_shared_flags(p_fig)
    p_fig.add_argument("--preset", required=True,
                       choices=tuple(f"fig{k}" for k in range(2, 12)))
    p_fig.add_argument("--no-plot", action="store_true", help="skip the per-panel SVGs")
    p_fig.set_defaults(func=cmd_figure)

    p_val = sub.add_parser("validate", help="run the full invariant and acceptance suite")
    p_val.add_argument("--quick", action="store_true",
                       help="reduced Monte Carlo sizes (smoke test, ~15 s)")
    p_val.set_defaults(func=cmd_validate)

    return parser


def _resolve(args: argparse.Namespace) -> RunConfig:
    flags = {dest: getattr(args, dest) for dest in FLAG_DESTS}
    cfg = resolve_run(args.config, flags, scheme=args.scheme)
    if getattr(args, "plot", False):
        cfg = dataclasses.replace(cfg, out_format="csv+svg")
    if cfg.out_format == "csv+svg" and cfg.out_path is None:
        raise ConfigError("SVG rendering needs a file path: combine --plot with --out")
    return cfg


def _svg_path(path: str) -> str:
    return (path[:-4] if path.endswith(".csv") else path) + ".svg"


def _solve_field(cfg: RunConfig, quantity: str, target: EscapeTarget, noise=None):
    grid = build_grid(cfg.c, cfg.d, cfg.h)
    n = cfg.noise if noise is None else noise
    if quantity == "met":
        return mean_exit_time(grid, cfg.drift_spec(), n, scheme=cfg.scheme)
    return escape_probability(grid, cfg.drift_spec(), n, target, scheme=cfg.scheme)


def _emit_curve(cfg: RunConfig, command: str, column: str, params: dict) -> int:
    target = EscapeTarget(params["target"]) if "target" in params else None
    field = _solve_field(cfg, command, target)
    xs = field.grid.node_x()
    ys = field.values()
    text = csv_text(command, params, ("x", column), zip(xs, ys))
    write_text(cfg.out_path, text)
    if cfg.out_format == "csv+svg":
        from .plotting import render_curves
        render_curves(_svg_path(cfg.out_path), [("", xs, ys)], "x", column)
    return EXIT_OK


def cmd_met(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    return _emit_curve(cfg, "met", "u", cfg.echo())


def cmd_escape(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    params = cfg.echo()
    params["target"] = args.target
    return _emit_curve(cfg, "escape", "p", params)


def cmd_mc(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    x0 = args.x0
    if not cfg.c < x0 < cfg.d:
        raise ConfigError(f"--x0 must lie inside ({cfg.c}, {cfg.d}), got {x0}")
    met_field = _solve_field(cfg, "met", None)
    u0 = met_field.value_at(x0)
    if cfg.max_time is not None:
        horizon = cfg.max_time
    else:
        base = 100.0 * u0 if u0 > 0 else 1e4
        horizon = max(base, 100.0 * cfg.dt)
    sim = cfg.sim(max_time=horizon)
    bounds = (cfg.c, cfg.d)
    target = EscapeTarget(args.target)
    if args.quantity == "met":
        solver_value = u0
        est = mc_mean_exit_time(x0, cfg.drift_spec(), cfg.noise, bounds, sim)
    else:
        esc_field = _solve_field(cfg, "escape", target)
        solver_value = esc_field.value_at(x0)
        est = mc_escape_probability(x0, cfg.drift_spec(), cfg.noise, bounds, sim, target)
    z = (est.mean - solver_value) / est.stderr if est.stderr > 0 else float("nan")
    params = cfg.echo()
    params["quantity"] = args.quantity
    if args.quantity == "escape":
        params["target"] = args.target
    params["x0"] = x0
    params["max_time"] = horizon
    text = mc_report_text(args.quantity, params, est.mean, est.stderr, est.n_censored,
                          est.n_paths, solver_value, z,
                          est.unreliable or not est.stderr_defined)
    write_text(cfg.out_path, text)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    param, values = args.param, sorted(args.values)
    target = EscapeTarget(args.target)
    column = "u" if args.quantity == "met" else "p"

    params = cfg.echo()
    params["quantity"] = args.quantity
    if args.quantity == "escape":
        params["target"] = args.target
    params["sweep_param"] = param
    params["sweep_values"] = values

    # validate every point up front so bad values fail as config errors
    if param == "x0":
        for v in values:
            if not cfg.c < v < cfg.d:
                raise ConfigError(f"x0 value {v} outside the domain ({cfg.c}, {cfg.d})")
    else:
        for v in values:
            dataclasses.replace(cfg.noise, **{param: v})

    rows: list[tuple[float, float, float]] = []
    curves = []
    if param == "x0":
        field = _solve_field(cfg, args.quantity, target)
        probes = [(v, v, field.value_at(v)) for v in values]
        rows.extend(probes)
        curves.append((f"{column}(x0)", values, [r[2] for r in probes]))
    else:
        for v in values:
            noise_v = dataclasses.replace(cfg.noise, **{param: v})
            try:
                field = _solve_field(cfg, args.quantity, target, noise=noise_v)
            except _NUMERICAL_ERRORS as exc:
                text = csv_text("sweep", params, ("swept_value", "x", "value"), rows)
                text += f"# PARTIAL OUTPUT: failed at {param}={v:g}: {exc}\n"
                write_text(cfg.out_path, text)
                print(f"numerical failure at {param}={v:g}: {exc}", file=sys.stderr)
                return EXIT_NUMERICAL
            xs = field.grid.node_x()
            ys = field.values()
            rows.extend(zip([v] * len(xs), xs, ys))
            curves.append((f"{param}={v:g}", xs, ys))

    text = csv_text("sweep", params, ("swept_value", "x", "value"), rows)
    write_text(cfg.out_path, text)
    if cfg.out_format == "csv+svg":
        from .plotting import render_curves
        render_curves(_svg_path(cfg.out_path), curves, "x", column)
    return EXIT_OK


def _figure_preset(preset: str):
    """Panel layout for one preset: (quantity, curve_param, curve_values,
    [(letter, fixed-noise dict), ...]).  Curve values are tool defaults."""
    number = int(preset[3:])
    quantity = "met" if number <= 6 else "escape"
    layout = number if number <= 6 else number - 5
    if layout in (2, 4):
        a = 0.0 if layout == 2 else 0.5
        panels = [(letter, {"a": a, "epsilon": e})
                  for letter, e in zip(_PANEL_LETTERS, (0.1, 0.3, 0.5, 0.7))]
        return quantity, "alpha", DEFAULT_ALPHA_CURVES, panels
    if layout in (3, 5):
        a = 0.0 if layout == 3 else 0.5
        panels = [(letter, {"a": a, "alpha": al})
                  for letter, al in zip(_PANEL_LETTERS, (0.1, 0.5, 1.0, 1.5))]
        return quantity, "epsilon", DEFAULT_EPS_CURVES, panels
    pairs = ((0.1, 0.5), (0.1, 1.5), (0.5, 0.5), (0.5, 1.5))
    panels = [(letter, {"epsilon": e, "alpha": al})
              for letter, (e, al) in zip(_PANEL_LETTERS, pairs)]
    return quantity, "a", DEFAULT_A_CURVES, panels


def cmd_figure(args: argparse.Namespace) -> int:
    cfg = _resolve(args)
    quantity, curve_param, curve_values, panels = _figure_preset(args.preset)
    column = "u" if quantity == "met" else "p"
    target = EscapeTarget.LEFT_EXTINCTION
    outdir = cfg.out_path if cfg.out_path is not None else args.preset
    os.makedirs(outdir, exist_ok=True)
    note = (f"curve list over {curve_param} is a tool default, "
            "not part of the preset definition")
    for letter, fixed in panels:
        params = cfg.echo()
        params.update(fixed)
        params["quantity"] = quantity
        if quantity == "escape":
            params["target"] = target.value
        params["preset"] = f"{args.preset}{letter}"
        params["curve_param"] = curve_param
        params["curve_values"] = list(curve_values)
        params["curve_values_default"] = True
        rows: list[tuple[float, float, float]] = []
        curves = []
        for v in curve_values:
            noise_v = dataclasses.replace(cfg.noise, **fixed, **{curve_param: v})
            field = _solve_field(cfg, quantity, target, noise=noise_v)
            xs = field.grid.node_x()
            ys = field.values()
            rows.extend(zip([v] * len(xs), xs, ys))
            curves.append((f"{curve_param}={v:g}", xs, ys))
        stem = os.path.join(outdir, f"{args.preset}{letter}")
        write_text(stem + ".csv",
                   csv_text("figure", params, ("swept_value", "x", "value"), rows,
                            notes=(note,)))
        if not args.no_plot:
            from .plotting import render_curves
            fixed_label = ", ".join(f"{k}={v:g}" for k, v in fixed.items())
            render_curves(stem + ".svg", curves, "x", column, title=fixed_label)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    from .validation import run_all

    results = run_all(quick=args.quick)
    failed = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        failed += 0 if r.passed else 1
        print(f"{status} {r.name}: measured {r.measured}; expected {r.expected}")
    total = len(results)
    print(f"{total - failed}/{total} checks passed")
    return EXIT_OK if failed == 0 else EXIT_VALIDATION


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError, grid/model/noise validation
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
