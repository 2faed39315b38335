"""Render per-round metric curves from a runs.csv file.

One line per variant: the mean over trials, with a shaded band of one
sample standard deviation (ddof=1) when there is more than one trial.
For failure-set-size plots a geometric decay reference line can be
overlaid, anchored at the first round's mean.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import csv

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

METRICS = ("success", "p_minus_size")
REQUIRED_COLUMNS = ("variant", "trial", "t")
REFERENCE_LABEL = "(1-beta)^t reference"


class SchemaError(ValueError):
    """The CSV does not carry the columns the plot needs."""


@dataclass(frozen=True)
class PlotSpec:
    csv_path: str | Path
    metric: str
    out_path: str | Path
    variants: tuple[str, ...] | None = None
    log_scale: bool = False
    decay_beta: float | None = None

    def __post_init__(self):
        if self.metric not in METRICS:
            raise SchemaError(f"unknown metric {self.metric!r}; expected one of {METRICS}")


def _load_series(spec: PlotSpec) -> dict[str, dict[int, list[float]]]:
    """variant -> round -> metric values across trials."""
    path = Path(spec.csv_path)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in (*REQUIRED_COLUMNS, spec.metric):
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        series: dict[str, dict[int, list[float]]] = {}
        for row in reader:
            variant = row["variant"]
            if spec.variants is not None and variant not in spec.variants:
                continue
            by_round = series.setdefault(variant, {})
            by_round.setdefault(int(row["t"]), []).append(float(row[spec.metric]))
    if not series:
        raise SchemaError(f"{path}: no data rows for metric {spec.metric!r}")
    return series


def render(spec: PlotSpec):
    """Draw the figure and write it to spec.out_path; returns the Figure."""
    series = _load_series(spec)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for variant in sorted(series):
        by_round = series[variant]
        rounds = np.array(sorted(by_round))
        means = np.array([np.mean(by_round[t]) for t in rounds])
        ax.plot(rounds, means, marker="o", markersize=3, label=variant)
        n_trials = min(len(by_round[t]) for t in rounds)
        if n_trials > 1:
            stds = np.array([np.std(by_round[t], ddof=1) for t in rounds])
            ax.fill_between(rounds, means - stds, means + stds, alpha=0.2)
    if spec.decay_beta is not None and spec.metric == "p_minus_size":
        anchor_rounds = sorted({t for v in series.values() for t in v})
        start = max(np.mean(series[v][anchor_rounds[0]]) for v in series)
        ref_rounds = np.array(anchor_rounds)
        ref = start * (1.0 - spec.decay_beta) ** (ref_rounds - ref_rounds[0])
        ax.plot(ref_rounds, ref, linestyle="--", color="black", label=REFERENCE_LABEL)
    if spec.log_scale:
        ax.set_yscale("log")
    ax.set_xlabel("round")
    ax.set_ylabel(spec.metric)
    ax.legend()
    fig.tight_layout()
    out = Path(spec.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out)
    return fig
