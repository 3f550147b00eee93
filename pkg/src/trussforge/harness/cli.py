"""``trussforge`` command line: run, sweep, validate and report.

Exit codes: 0 success, 2 configuration error, 3 simulation divergence,
4 grasp dropped (scenarios with ``grasp_required``).
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ..errors import ConfigError, TrussError
from ..scenarios.loader import build_scenario, load_scenario_file
from .metrics import compute_report, report_json
from .runner import EXIT_CONFIG, EXIT_OK, run
from .sweep import SUITE_GRID, format_table, summary_rows, sweep
from .trace import read_trace, write_trace

log = logging.getLogger("trussforge")


def _setup_logging():
    level = os.environ.get("TRUSSFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _parse_grid(items) -> dict:
    grid = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"grid entry {item!r} must look like path=v1,v2")
        path, values = item.split("=", 1)
        parsed = []
        for v in values.split(","):
            try:
                parsed.append(json.loads(v))
            except json.JSONDecodeError:
                parsed.append(v)
        grid[path] = parsed
    return grid


def cmd_run(args) -> int:
    data = load_scenario_file(args.scenario)
    scn = build_scenario(data, ideal=True if args.ideal else None)
    res = run(scn, seed=args.seed, deterministic=args.deterministic)
    report = compute_report(res, scn, res.seed, res.exit_code, res.error)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if scn.outputs.get("trace", True):
        write_trace(out / "trace.csv", res.columns, res.rows)
    if scn.outputs.get("report", True):
        (out / "report.json").write_text(report_json(report), encoding="utf-8")
    if scn.outputs.get("plots", True) and not args.no_plots and len(res.rows) > 1:
        from .plots import write_plots
        write_plots(res, out)
    _print_summary(report)
    return res.exit_code


def _print_summary(report: dict):
    print(f"scenario {report['scenario']} seed {report['seed']} exit {report['exit_code']}"
          + (f" ({report['error']})" if report.get("error") else ""))
    if report.get("position_rmse_m"):
        r = report["position_rmse_m"]
        print(f"  position RMSE [m]: x {r['x']:.4f}  y {r['y']:.4f}  z {r['z']:.4f}")
    if report.get("force_rmse_N") is not None:
        print(f"  force RMSE [N]: {report['force_rmse_N']:.3f}")
    if report.get("holding_error_pct") is not None:
        print(f"  holding error: {report['holding_error_pct']:.2f} %  overshoot: {report['overshoot_pct']:.2f} %")
    for obj in report.get("objects", []):
        d = obj["displacement_m"]
        print(f"  {obj['name']}: displacement ({d[0]:+.3f}, {d[1]:+.3f}, {d[2]:+.3f}) m, final {obj['final_status']}")


def cmd_sweep(args) -> int:
    data = load_scenario_file(args.scenario)
    if args.ideal:
        data = {**data, "ideal_actuators": True}
    grid = _parse_grid(args.grid)
    if not grid and data["program"]["type"] == "suite":
        grid = dict(SUITE_GRID)
    cells = sweep(data, grid, repeats=args.repeats, base_seed=args.seed, workers=args.workers,
                  deterministic=args.deterministic)
    rows = summary_rows(cells)
    table = format_table(rows)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps({"grid": grid, "repeats": args.repeats, "rows": rows,
                                                 "cells": [{"overrides": c.overrides, "reports": c.reports}
                                                           for c in cells]}, sort_keys=True, indent=2) + "\n",
                                    encoding="utf-8")
    (out / "table.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return EXIT_OK


def cmd_validate(args) -> int:
    data = load_scenario_file(args.scenario)
    scn = build_scenario(data)
    print(f"{args.scenario}: ok ({scn.configuration.id.value}, {scn.mode} mode, "
          f"{len(scn.program.segments)} segments, {scn.program.duration:.1f} s)")
    return EXIT_OK


def cmd_report(args) -> int:
    scn = build_scenario(load_scenario_file(args.scenario), ideal=True if args.ideal else None)
    trace_path = Path(args.trace) if args.trace else Path(args.out) / "trace.csv"
    try:
        trace = read_trace(trace_path)
    except OSError as exc:
        raise ConfigError(f"cannot read trace {trace_path}: {exc}") from exc
    meta = {"seed": scn.seed if args.seed is None else args.seed, "exit_code": EXIT_OK, "error": None}
    sibling = trace_path.with_name("report.json")
    if sibling.exists() and args.seed is None:
        prev = json.loads(sibling.read_text(encoding="utf-8"))
        meta = {k: prev.get(k, meta[k]) for k in meta}
    report = compute_report(trace, scn, meta["seed"], meta["exit_code"], meta["error"])
    text = report_json(report)
    if args.write:
        sibling.write_text(text, encoding="utf-8")
    print(text, end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trussforge", description="Variable-topology truss simulation harness")
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p, out_default="out"):
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--seed", type=int, default=None, help="RNG seed (default: the scenario's)")
        p.add_argument("--out", default=out_default, help="output directory")
        p.add_argument("--ideal", action="store_true", help="ideal actuators: no dead zone, no sensor noise")

    p = sub.add_parser("run", help="run one scenario")
    common(p)
    p.add_argument("--deterministic", action="store_true", help="disable load-cell noise")
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a parameter grid with repeats")
    common(p, "sweep_out")
    p.add_argument("--grid", action="append", metavar="PATH=V1,V2",
                   help="dotted scenario path and values; repeat for more axes (suite default: all trajectories)")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--deterministic", action="store_true", help="disable load-cell noise")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check a scenario against the schema and build it")
    p.add_argument("--scenario", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("report", help="recompute a report from a saved trace")
    common(p)
    p.add_argument("--trace", default=None, help="trace CSV (default: <out>/trace.csv)")
    p.add_argument("--write", action="store_true", help="overwrite report.json next to the trace")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TrussError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
