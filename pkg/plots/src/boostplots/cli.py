"""plot: render boostsim runs.csv files into figures."""

from __future__ import annotations

import argparse
import sys

from .render import METRICS, PlotSpec, SchemaError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plot", description="Plot per-round curves from a runs.csv file."
    )
    parser.add_argument("--csv", required=True, help="path to runs.csv")
    parser.add_argument("--metric", required=True, choices=METRICS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--log", action="store_true", help="log-scale y axis")
    parser.add_argument(
        "--variants", default=None, help="comma-separated variant filter"
    )
    parser.add_argument(
        "--beta",
        type=float,
        default=None,
        help="overlay the geometric decay reference on failure-set plots",
    )
    args = parser.parse_args(argv)
    variants = (
        tuple(v.strip() for v in args.variants.split(",") if v.strip())
        if args.variants
        else None
    )
    spec = PlotSpec(
        csv_path=args.csv,
        metric=args.metric,
        out_path=args.out,
        variants=variants,
        log_scale=args.log,
        decay_beta=args.beta,
    )
    try:
        render(spec)
    except (SchemaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
