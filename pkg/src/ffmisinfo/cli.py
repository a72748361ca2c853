"""Command-line entry point.

Exit codes: 0 success, 1 computation error, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import sys
import time
from dataclasses import replace
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import analysis as an
from .config import KERNELS, ScenarioConfig, parse_config, with_overrides
from .errors import ConfigError, DivergedError, DomainError
from .export import emit_plot_svg, write_trajectory_csv
from .model import COMPARTMENTS, RATE_NAMES
from .report import (
    build_run_report,
    compare_bounds,
    flatten,
    lyapunov_columns,
    run_scenario,
    threshold_summary,
)


class _UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ffmisinfo",
        description="Simulate and analyse the seven-compartment harmful-information model.",
    )
    sub = ap.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="scenario JSON file")
        return sp

    def add_run_overrides(sp):
        sp.add_argument("--kernel", choices=KERNELS)
        sp.add_argument("--alpha", type=float)
        sp.add_argument("--eta", type=float)
        sp.add_argument("--h", type=float)
        sp.add_argument("--t-end", type=float, dest="t_end")
        sp.add_argument("--backend", choices=("cython", "python"))

    sp = add("simulate", "integrate the scenario, write CSV (+ SVG) and a run report")
    add_run_overrides(sp)
    sp.add_argument("--csv", help="trajectory CSV path (overrides the config)")
    sp.add_argument("--svg", help="plot path (overrides the config)")
    sp.add_argument("--report", help="run report JSON path (overrides the config)")

    add("equilibria", "print disease-free and endemic equilibria")
    add("r0", "print the reproduction and strength numbers")
    add("stability", "print the Jacobian spectrum at the disease-free state")

    sp = add("bounds", "compare a trajectory with its positivity lower bounds")
    add_run_overrides(sp)
    sp.add_argument("--family", choices=[f.value for f in an.OperatorFamily])
    sp.add_argument("--out", help="write the per-node comparison as CSV")

    sp = add("lyapunov", "append L, dL/dt, d2L/dt2 along a trajectory")
    add_run_overrides(sp)
    sp.add_argument("--out", help="CSV path (default: standard output)")

    sp = add("sweep", "tabulate R0, SN, final I and stability over one parameter")
    add_run_overrides(sp)
    sp.add_argument("--param", required=True, choices=RATE_NAMES)
    sp.add_argument("--from", type=float, required=True, dest="start")
    sp.add_argument("--to", type=float, required=True, dest="stop")
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--jobs", type=int, default=1, help="worker processes")
    sp.add_argument("--out", help="CSV path (default: standard output)")
    return ap


def _load(args) -> ScenarioConfig:
    try:
        cfg = parse_config(args.config)
    except FileNotFoundError:
        raise _UsageError(f"config file not found: {args.config}") from None
    except OSError as exc:
        raise _UsageError(f"cannot read config {args.config}: {exc}") from None
    except ConfigError as exc:
        raise _UsageError(f"{args.config}: {exc}") from None
    over = {k: getattr(args, k, None) for k in ("kernel", "alpha", "eta", "h", "t_end")}
    if any(v is not None for v in over.values()):
        try:
            cfg = with_overrides(cfg, **over)
        except ConfigError as exc:
            raise _UsageError(str(exc)) from None
    return cfg


def _emit(lines, out) -> None:
    out.write("\n".join(lines) + "\n")


def _write_table(header, rows, path, out) -> None:
    text = ",".join(header) + "\n" + "".join(
        ",".join(v if isinstance(v, str) else format(float(v), ".17g") for v in r) + "\n"
        for r in rows
    )
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def _cmd_simulate(args, cfg, out):
    t0 = time.perf_counter()
    traj = run_scenario(cfg, args.backend)
    wall = time.perf_counter() - t0
    csv_path = Path(args.csv) if args.csv else cfg.resolve(cfg.outputs.csv_path)
    svg_path = Path(args.svg) if args.svg else cfg.resolve(cfg.outputs.svg_path)
    rep_path = Path(args.report) if args.report else cfg.resolve(cfg.outputs.report_path)
    write_trajectory_csv(traj, csv_path)
    if svg_path is not None:
        emit_plot_svg(traj, svg_path, cfg.outputs.svg_compartments,
                      title=f"{traj.kernel.value} alpha={traj.alpha:g} eta={traj.eta:g}")
    report = build_run_report(cfg, traj, wall, args.backend)
    lines = [f"csv = {csv_path}"]
    if svg_path is not None:
        lines.append(f"svg = {svg_path}")
    if rep_path is not None:
        rep_path.write_text(report.to_json(), encoding="utf-8")
        lines.append(f"report = {rep_path}")
    d = report.to_dict()
    lines += flatten({"R0": d["thresholds"]["R0"], "final_state": d["final_state"]})
    _emit(lines, out)


def _cmd_equilibria(args, cfg, out):
    s = threshold_summary(cfg.params)
    _emit(flatten({"equilibria": s["equilibria"]}), out)


def _cmd_r0(args, cfg, out):
    s = threshold_summary(cfg.params)
    keys = ("R0", "strength_number", "ngm_spectral_radius")
    _emit(flatten({k: s[k] for k in keys}), out)


def _cmd_stability(args, cfg, out):
    rep = an.stability_spectrum(cfg.params)
    lines = [f"classification = {rep.classification}"]
    lines += [
        f"eigenvalue[{i}] = {float(z.real)!r} {float(z.imag):+.17g}j"
        for i, z in enumerate(rep.eigenvalues)
    ]
    lines.append(f"threshold_eigenvalue = {float(rep.threshold_eigenvalue.real)!r}")
    _emit(lines, out)


def _cmd_bounds(args, cfg, out):
    traj = run_scenario(cfg, args.backend)
    family = args.family or cfg.bound_check or an.OperatorFamily.Classical
    bounds, viol = compare_bounds(cfg, traj, family)
    if args.out:
        header = ["t"] + [f"{c}" for c in COMPARTMENTS] + [f"{c}_bound" for c in COMPARTMENTS]
        rows = np.column_stack([traj.t, traj.states, bounds])
        _write_table(header, rows, args.out, out)
    total = sum(v for v in viol.values() if isinstance(v, int))
    lines = [f"family = {an.OperatorFamily(family).value}"]
    lines += [f"violations.{c} = {v}" for c, v in viol.items()]
    lines.append(f"violations.total = {total}")
    _emit(lines, out)


def _cmd_lyapunov(args, cfg, out):
    eq = an.endemic_equilibrium(cfg.params).point
    traj = run_scenario(cfg, args.backend)
    cols = lyapunov_columns(cfg.params, traj, eq)
    header = ["t", *COMPARTMENTS, "L", "dL_dt", "d2L_dt2"]
    rows = np.column_stack([traj.t, traj.states, cols])
    _write_table(header, rows, args.out, out)


def _sweep_point(args):
    cfg, name, value, backend = args
    p = cfg.params.with_(**{name: value})
    row = {"value": value}
    for key, fn in (("R0", an.reproduction_number), ("SN", an.strength_number)):
        try:
            row[key] = fn(p)
        except DomainError:
            row[key] = float("nan")
    try:
        row["stability"] = an.stability_spectrum(p).classification
    except DomainError:
        row["stability"] = "inapplicable"
    try:
        traj = run_scenario(replace(cfg, params=p), backend)
        row["final_I"] = float(traj.states[-1, 1])
    except (DomainError, DivergedError):
        row["final_I"] = float("nan")
    return row


def _cmd_sweep(args, cfg, out):
    if args.steps < 1:
        raise _UsageError("--steps must be >= 1")
    values = np.linspace(args.start, args.stop, args.steps)
    if np.any(values < 0):
        raise _UsageError(f"--param {args.param} values must be >= 0")
    jobs = [(cfg, args.param, float(v), args.backend) for v in values]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    header = [args.param, "R0", "SN", "final_I", "stability"]
    table = [[r["value"], r["R0"], r["SN"], r["final_I"], r["stability"]] for r in rows]
    _write_table(header, table, args.out, out)


_COMMANDS = {
    "simulate": _cmd_simulate,
    "equilibria": _cmd_equilibria,
    "r0": _cmd_r0,
    "stability": _cmd_stability,
    "bounds": _cmd_bounds,
    "lyapunov": _cmd_lyapunov,
    "sweep": _cmd_sweep,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = _parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = _load(args)
        _COMMANDS[args.command](args, cfg, out)
    except _UsageError as exc:
        err.write(f"ffmisinfo {args.command}: {exc}\n")
        return 2
    except (DomainError, DivergedError, ArithmeticError, OSError) as exc:
        err.write(f"ffmisinfo {args.command}: error: {exc}\n")
        return 1
    return 0


cli_main = main


if __name__ == "__main__":
    sys.exit(main())
