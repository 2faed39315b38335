"""Command-line entry point: run, bounds, check, and demo subcommands."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .analysis import run_all_checks, theorem_bounds
from .engine import ConfigError
from .harness import (
    CHECKS_HEADER,
    demo_config,
    emit_csv,
    load_config,
    resolve_out_dir,
    run_experiment,
)
from .traceio import TraceFormatError, read_trace


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boostsim",
        description="Simulate curated synthetic-data training loops and check the convergence theory on the traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute an experiment config file")
    p_run.add_argument("--config", required=True, help="path to a sectioned key-value config")
    p_run.add_argument("--out", default=None, help="output directory (overrides config)")

    p_bounds = sub.add_parser("bounds", help="print sufficient rounds and samples per prompt")
    p_bounds.add_argument("--epsilon", type=float, required=True)
    p_bounds.add_argument("--beta", type=float, required=True)
    p_bounds.add_argument("--alpha", type=float, required=True)
    p_bounds.add_argument("--gamma", type=float, default=1.0)
    p_bounds.add_argument("--prompts", type=int, required=True)

    p_check = sub.add_parser("check", help="re-run the checkers on saved trace files")
    p_check.add_argument("traces", nargs="+", help="trace files written by a run")
    p_check.add_argument("--out", default=None, help="optional checks.csv output path")

    p_demo = sub.add_parser("demo", help="run the standard demo experiment")
    p_demo.add_argument("--seed", type=int, default=7)
    p_demo.add_argument("--trials", type=int, default=5)
    p_demo.add_argument("--out", default=None, help="output directory")
    return parser


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg)
    out_dir = args.out if args.out is not None else resolve_out_dir(cfg)
    runs_path, checks_path = emit_csv(result, out_dir)
    print(f"wrote {runs_path} ({len(result.rows)} rows)")
    print(f"wrote {checks_path} ({len(result.checks)} rows)")
    bad = [c for c in result.checks if c.status == "fail"]
    if bad:
        first = bad[0]
        print(
            f"check failures: {len(bad)} (first: {first.variant} trial {first.trial} "
            f"{first.name}: {first.detail})",
            file=sys.stderr,
        )
        return 1
    return 0


def _cmd_bounds(args) -> int:
    bounds = theorem_bounds(args.epsilon, args.alpha, args.beta, args.gamma, args.prompts)
    print(f"T_min={bounds.t_min} k_min={bounds.k_min}")
    return 0


def _cmd_check(args) -> int:
    rows = []
    failed = False
    for trace_path in args.traces:
        result = read_trace(trace_path)
        report = run_all_checks(result)
        for c in report.checks:
            print(f"{trace_path}: {c.line()}")
            rows.append(
                [result.config.variant, result.trial, c.name, c.status, c.detail]
            )
            if c.status == "fail":
                failed = True
    if args.out is not None:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CHECKS_HEADER)
            writer.writerows(rows)
        print(f"wrote {out}")
    return 1 if failed else 0


def _cmd_demo(args) -> int:
    cfg = demo_config(seed=args.seed, trials=args.trials, out_dir=args.out)
    result = run_experiment(cfg)
    runs_path, checks_path = emit_csv(result, resolve_out_dir(cfg))
    print(f"wrote {runs_path}")
    print(f"wrote {checks_path}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "bounds":
            return _cmd_bounds(args)
        if args.command == "check":
            return _cmd_check(args)
        return _cmd_demo(args)
    except (ConfigError, TraceFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
