"""Command line interface.

Subcommands:
  run <config.json>      integrate one scenario, write CSV + JSON snapshot
  sweep <plan.json>      run a parameter cross product, write JSONL results
  verify                 run the acceptance suite, print a pass/fail table
  fermi-eval <alpha> <z> print one Fermi function value at full precision

Exit codes of `run`: 0 completed, 2 blowup detected, 3 temperature
bracket exit, 4 step failure; I/O problems exit 1.  The environment
variable GRAVODIFF_THREADS caps sweep parallelism.
"""

from __future__ import annotations

import argparse
import copy
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import diagnostics
from .config import ConfigError, parse_config, parse_sweep, set_by_path
from .evolve import Outcome, run

__all__ = ["main"]

_EXIT_CODE = {
    Outcome.COMPLETED: 0,
    Outcome.BLOWUP_DETECTED: 2,
    Outcome.TEMPERATURE_BRACKET_EXIT: 3,
    Outcome.STEP_FAILURE: 4,
}


def _write_run_outputs(config, result, figures: bool) -> None:
    prefix = config.output.path
    csv_path = prefix + ".csv"
    # newline="" + explicit \n keeps line endings LF on every platform.
    with open(csv_path, "w", newline="") as fh:
        fh.write(diagnostics.csv_header() + "\n")
        for rec in result.records:
            fh.write(diagnostics.csv_row(rec) + "\n")
    snapshot = {
        "outcome": result.outcome.value,
        "t": result.state.t,
        "theta": result.state.theta,
        "growth_violations": result.growth_violations,
        "n": list(result.state.n),
        "phi": list(result.state.phi),
        "final_record": dataclasses.asdict(result.records[-1])
        if result.records
        else None,
    }
    with open(prefix + ".json", "w") as fh:
        json.dump(snapshot, fh, indent=1)
        fh.write("\n")
    if figures:
        from .plots import render_run_figures

        render_run_figures(config.make_grid(), result.records, result.state, prefix)


def _cmd_run(args) -> int:
    try:
        with open(args.config) as fh:
            config = parse_config(fh.read())
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = run(config)
    try:
        _write_run_outputs(config, result, args.figures)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return 1
    print(f"outcome: {result.outcome.value} (t = {result.state.t:.6g})")
    return _EXIT_CODE[result.outcome]


def _sweep_points(plan):
    """Cross product of the sweep axes as (overrides dict, config doc)."""
    points = [[]]
    for path, values in plan.axes:
        points = [pt + [(path, v)] for pt in points for v in values]
    for pt in points:
        doc = copy.deepcopy(plan.base)
        for path, v in pt:
            set_by_path(doc, path, v)
        yield dict(pt), doc


def _run_sweep_point(payload):
    overrides, doc = payload
    try:
        result = run(parse_config(doc))
        line = {
            "parameters": overrides,
            "outcome": result.outcome.value,
            "growth_violations": result.growth_violations,
            "final": dataclasses.asdict(result.records[-1])
            if result.records
            else None,
        }
    except Exception as exc:
        line = {
            "parameters": overrides,
            "outcome": Outcome.STEP_FAILURE.value,
            "error": str(exc),
        }
    return line


def _cmd_sweep(args) -> int:
    try:
        with open(args.plan) as fh:
            plan = parse_sweep(fh.read())
    except OSError as exc:
        print(f"error: cannot read {args.plan}: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    workers = plan.parallelism or os.cpu_count() or 1
    cap = os.environ.get("GRAVODIFF_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))

    points = list(_sweep_points(plan))
    out_path = plan.base.get("output", {}).get("path", "gravodiff_sweep") + ".jsonl"
    try:
        with open(out_path, "w") as fh:
            if workers > 1:
                with ProcessPoolExecutor(max_workers=workers) as pool:
                    for line in pool.map(_run_sweep_point, points):
                        fh.write(json.dumps(line, sort_keys=True) + "\n")
            else:
                for payload in points:
                    fh.write(
                        json.dumps(_run_sweep_point(payload), sort_keys=True) + "\n"
                    )
    except OSError as exc:
        print(f"error: cannot write {out_path}: {exc}", file=sys.stderr)
        return 1
    print(f"sweep: {len(points)} runs -> {out_path}")
    return 0


def _cmd_verify(_args) -> int:
    from .acceptance import run_all

    results = run_all(verbose=True)
    return 0 if all(r.passed for r in results) else 1


def _cmd_fermi_eval(args) -> int:
    from .fermi import fermi_integral

    print("%.17g" % fermi_integral(args.alpha, args.z))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gravodiff",
        description="Simulator and verification harness for gravitational "
        "drift-diffusion with a general equation of state.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one configured scenario")
    p_run.add_argument("config", help="path to a JSON run configuration")
    p_run.add_argument(
        "--figures",
        action="store_true",
        help="also render PNG figures next to the CSV output",
    )
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter sweep")
    p_sweep.add_argument("plan", help="path to a JSON sweep plan")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_verify = sub.add_parser("verify", help="run the acceptance suite")
    p_verify.set_defaults(func=_cmd_verify)

    p_fe = sub.add_parser("fermi-eval", help="evaluate a Fermi function")
    p_fe.add_argument("alpha", type=float)
    p_fe.add_argument("z", type=float)
    p_fe.set_defaults(func=_cmd_fermi_eval)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
