"""Command-line entry point: plan, simulate, sweep, tune, report.

All subcommands are reproducible from (config, seed): outputs carry a
header embedding the config hash and seed, and no wall-clock data enters
the trace CSVs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from gaittune import csvio
from gaittune.config import ConfigError, load_config
from gaittune.lipm import ComState
from gaittune.pipeline import (
    ObjectiveConfig, build_params, build_task, evaluate_detailed,
    run_scenario, weight_sweep,
)
from gaittune.qp import GaitWeights, QpError, plan_gait

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaittune",
        description="Gait QP planning, closed-loop simulation and "
                    "Bayesian weight tuning.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("plan", "solve the gait QP and export the plan CSV"),
            ("simulate", "run the tracking controller against the plant"),
            ("sweep", "evaluate a weight grid"),
            ("tune", "Bayesian optimization of the cost weights"),
            ("report", "aggregate tune outputs into plot-ready series")):
        p = sub.add_parser(name, help=help_text)
        if name != "report":
            p.add_argument("--config", required=True, help="scenario config JSON")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "tune":
            p.add_argument("--budget", type=int, default=None,
                           help="budget override")
        if name == "sweep":
            p.add_argument("--grid", default=None,
                           help="grid spec, e.g. 'beta=0,10,70;gamma=0'")
        if name == "report":
            p.add_argument("--tune-dir", required=True,
                           help="directory holding a tune trace.csv")
    return parser


def _fail(message: str, code: int = 2) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return code


def _load(args):
    loaded = load_config(args.config)
    scenario = loaded.scenario
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    budget = getattr(args, "budget", None)
    if budget is not None:
        scenario = replace(scenario, budget=budget)
    meta = {"config_sha256": csvio.config_hash(loaded.raw),
            "seed": scenario.seed}
    return loaded, scenario, meta


def _plan_rows(plan):
    rows = plan.to_rows()
    # swing-foot samples alongside the CoM rows
    k_per = max(1, int(round(plan.task.step_duration / plan.dt)))
    for k, row in enumerate(rows):
        s = int(plan.foot_index[k])
        phase = (k % k_per + 1) * plan.dt
        swing = plan.swings[s].position(phase)
        row["swing_x"], row["swing_y"], row["swing_z"] = (
            float(swing[0]), float(swing[1]), float(swing[2]))
    return rows


def cmd_plan(args) -> int:
    loaded, scenario, meta = _load(args)
    weights = loaded.weights or GaitWeights.uniform(1.0, 0.0, 0.0)
    task = build_task(scenario, loaded.objective)
    params = build_params(scenario)
    plan = plan_gait(task, weights, ComState.zero(), params)
    out = Path(args.out)
    csvio.write_csv(out / "plan.csv", _plan_rows(plan), meta)
    csvio.write_manifest(out / "plan_manifest.json", {
        **meta, "qp_cost": plan.qp_cost, "solve_status": plan.solve_status,
        "weights": list(weights.as_array()),
    })
    if args.verbose:
        print(f"plan: status={plan.solve_status} cost={plan.qp_cost:.6g}")
    return 0


def cmd_simulate(args) -> int:
    loaded, scenario, meta = _load(args)
    weights = loaded.weights or GaitWeights.uniform(1.0, 0.0, 0.0)
    rec = evaluate_detailed(weights, scenario, loaded.objective,
                            keep_artifacts=True)
    if rec.failed:
        return _fail(f"gait planning failed: {rec.failure_reason}", 3)
    out = Path(args.out)
    csvio.write_csv(out / "trace.csv", rec.trace.to_rows(), meta)
    csvio.write_manifest(out / "simulate_manifest.json", {
        **meta, "objective": rec.objective, "fell": rec.fell,
        "final_height": rec.final_height,
        "tracking_error_max": rec.tracking_error_max,
    })
    if args.verbose:
        print(f"simulate: J={rec.objective:.6g} fell={rec.fell}")
    return 0


def _parse_grid(spec: str) -> list[GaitWeights]:
    values = {"alpha": [1.0], "beta": [0.0], "gamma": [0.0]}
    if spec:
        for part in spec.split(";"):
            key, _, items = part.partition("=")
            key = key.strip()
            if key not in values or not items:
                raise ConfigError(f"grid spec: bad term '{part}'")
            values[key] = [float(v) for v in items.split(",")]
    grid = []
    for a in values["alpha"]:
        for b in values["beta"]:
            for g in values["gamma"]:
                grid.append(GaitWeights.uniform(a, b, g))
    return grid


def cmd_sweep(args) -> int:
    loaded, scenario, meta = _load(args)
    grid = _parse_grid(args.grid or "")
    workers = int(os.environ.get("GAITTUNE_WORKERS", "1"))
    rows = weight_sweep(scenario, loaded.objective, grid, workers=workers)
    out = Path(args.out)
    csvio.write_csv(out / "sweep.csv", rows, meta)
    if args.verbose:
        print(f"sweep: {len(rows)} grid points")
    return 0


def cmd_tune(args) -> int:
    loaded, scenario, meta = _load(args)
    progress = None
    if args.verbose:
        def progress(i, rec):
            print(f"  iter {i}: J={rec.objective:.5g} fell={rec.fell}")
    report = run_scenario(scenario, loaded.objective, progress=progress)
    out = Path(args.out)
    csvio.write_csv(out / "trace.csv", report.trace, meta)
    csvio.write_csv(out / "evals.csv", [
        {"iteration": i + 1, **row} for i, row in enumerate(report.evaluations)
    ], meta)
    csvio.write_csv(out / "dataset.csv", report.trace and [
        {k: v for k, v in row.items() if k.startswith("x") or k == "y"}
        for row in report.trace] or [], meta)
    csvio.write_manifest(out / "tune_manifest.json",
                         {**meta, **report.to_manifest()})
    if args.verbose:
        print(f"tune: best J={report.best_objective:.6g} "
              f"weights={list(report.best_weights.as_array())}")
    return 0


def cmd_report(args) -> int:
    tune_dir = Path(args.tune_dir)
    trace_path = tune_dir / "trace.csv"
    if not trace_path.exists():
        return _fail(f"missing input for report: {trace_path}", 3)
    rows, meta = csvio.read_csv(trace_path)
    if args.seed is not None:
        meta["seed"] = args.seed
    out = Path(args.out)
    running = []
    best = float("inf")
    for row in rows:
        y = float(row["y"])
        best = min(best, y)
        running.append({"iteration": int(row["iteration"]),
                        "y": y, "y_best_so_far": best})
    csvio.write_csv(out / "min_cost.csv", running, meta)
    x_cols = sorted(k for k in (rows[0].keys() if rows else [])
                    if k.startswith("x"))
    path_rows = [{"iteration": int(r["iteration"]),
                  **{c: float(r[c]) for c in x_cols},
                  "y": float(r["y"])} for r in rows]
    csvio.write_csv(out / "weight_path.csv", path_rows, meta)
    if args.verbose:
        print(f"report: {len(rows)} iterations, best {best:.6g}")
    return 0


_COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "sweep": cmd_sweep,
             "tune": cmd_tune, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        return _fail(str(err), 2)
    except QpError as err:
        return _fail(str(err), 3)


if __name__ == "__main__":
    sys.exit(main())
