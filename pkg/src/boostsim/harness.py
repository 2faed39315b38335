"""Experiment harness: config files, trial ensembles, CSV emission.

Trials are paired: every variant inside a trial shares the trial's
universe, initial models, and stream seeds, so variant comparisons see
common random numbers. Output rows are assembled sorted by
(variant, trial, round) no matter what order trials finish in.
"""

from __future__ import annotations

import configparser
import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path

from .analysis import run_all_checks
from .datasets import FLOAT, MODES, RATIONAL, Weight, coerce_weight
from .engine import (
    BOOSTING,
    BOOSTING_NO_FOCUSING,
    DO_NOTHING,
    ECHO_INIT,
    FALLBACKS,
    FILTER_ONLY,
    VARIANTS,
    BoostConfig,
    ConfigError,
    RunResult,
    run_variant,
)
from .oracles import (
    ADVERSARIAL_EASIEST,
    BUDGET_A,
    BUDGET_B,
    LABELER_KINDS,
    LabelerSpec,
    warm_start_model,
)
from .rng import derive_seed, substream
from .traceio import format_weight, write_trace
from .worlds import TaskUniverse, make_universe

OUT_DIR_ENV = "BOOSTSIM_OUT"

RUNS_HEADER = [
    "variant", "trial", "t", "success",
    "p_minus_size", "lambda_t", "lambda_exact", "event_E_violated",
]
CHECKS_HEADER = ["variant", "trial", "lemma", "status", "counterexample"]


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a sweep needs; the root seed makes it fully deterministic."""

    prompts: int = 50
    responses: int = 20
    correct_per_prompt: int = 1
    variants: tuple[str, ...] = (BOOSTING,)
    trials: int = 1
    seed: int = 0
    mode: str = FLOAT
    checks: bool = True
    workers: int = 1
    out_dir: str | None = None
    write_traces: bool = False
    initial_success: Weight = 0
    alpha: Weight = 0.2
    beta: Weight = 0.5
    gamma: Weight = 1
    k: int = 18
    rounds: int = 10
    raw_counts: bool = False
    fallback: str = ECHO_INIT
    labeler_kind: str = ADVERSARIAL_EASIEST
    labeler_budget: int = 0
    labeler_accuracy: Weight = 0.5
    labeler_accuracy_range: tuple[float, float] | None = None

    def validate(self) -> "ExperimentConfig":
        if self.prompts < 1 or self.responses < 1 or self.correct_per_prompt < 1:
            raise ConfigError("universe sizes must be positive")
        if self.correct_per_prompt > self.responses:
            raise ConfigError("correct_per_prompt cannot exceed responses")
        for v in self.variants:
            if v not in VARIANTS:
                raise ConfigError(f"unknown variant {v!r}; expected one of {VARIANTS}")
        if self.trials < 1:
            raise ConfigError("trials must be a positive integer")
        if self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if self.mode not in MODES:
            raise ConfigError(f"unknown arithmetic mode {self.mode!r}")
        if self.fallback not in FALLBACKS:
            raise ConfigError(f"unknown fallback policy {self.fallback!r}")
        if self.labeler_kind not in LABELER_KINDS:
            raise ConfigError(f"unknown labeler kind {self.labeler_kind!r}")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if not 0 <= self.initial_success <= 1:
            raise ConfigError("initial_success must lie in [0, 1]")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ConfigError("rounds must be a positive integer")
        boosting = [v for v in self.variants if v in (BOOSTING, BOOSTING_NO_FOCUSING)]
        if boosting:
            if not self.alpha > 0:
                raise ConfigError("boosting variants require alpha > 0")
            if not 0 < self.beta < 1:
                raise ConfigError("boosting variants require beta in (0, 1)")
        return self

    def boost_config(self, variant: str) -> BoostConfig:
        """Per-variant run config; baselines force alpha to zero."""
        is_boosting = variant in (BOOSTING, BOOSTING_NO_FOCUSING)
        return BoostConfig(
            alpha=self.alpha if is_boosting else 0,
            beta=self.beta,
            gamma=self.gamma,
            k=self.k,
            rounds=self.rounds,
            variant=variant,
            labeler=None,  # bound to a universe later
            mode=self.mode,
            seed=self.seed,
            fallback=self.fallback,
            keep_raw_counts=self.raw_counts,
        )


@dataclass(frozen=True)
class RunRow:
    variant: str
    trial: int
    t: int
    success: Weight
    p_minus_size: int
    label_weight: Weight
    event_violated: bool


@dataclass(frozen=True)
class CheckRow:
    variant: str
    trial: int
    name: str
    status: str
    detail: str


@dataclass(frozen=True)
class SweepResult:
    config: ExperimentConfig
    rows: tuple[RunRow, ...]
    checks: tuple[CheckRow, ...]

    def final_success(self, variant: str, trial: int) -> Weight:
        last = max(r.t for r in self.rows if r.variant == variant and r.trial == trial)
        for r in self.rows:
            if r.variant == variant and r.trial == trial and r.t == last:
                return r.success
        raise KeyError((variant, trial))

    def event_held(self, variant: str, trial: int) -> bool:
        return not any(
            r.event_violated
            for r in self.rows
            if r.variant == variant and r.trial == trial
        )


def build_labeler(cfg: ExperimentConfig, universe: TaskUniverse) -> LabelerSpec:
    """Materialize the labeler for one universe (budget kinds need accuracies)."""
    accuracy = None
    if cfg.labeler_kind in (BUDGET_A, BUDGET_B):
        n = len(universe.prompts)
        if cfg.labeler_accuracy_range is not None:
            hi, lo = cfg.labeler_accuracy_range
            accuracy = {
                x: hi if n == 1 else hi + (lo - hi) * universe.difficulty[x] / (n - 1)
                for x in universe.prompts
            }
        else:
            accuracy = {x: float(cfg.labeler_accuracy) for x in universe.prompts}
    return LabelerSpec(
        kind=cfg.labeler_kind,
        beta=cfg.beta,
        budget=cfg.labeler_budget,
        accuracy=accuracy,
    )


def run_single(cfg: ExperimentConfig, variant: str, trial: int) -> RunResult:
    """One (variant, trial) run on the trial's paired universe."""
    universe = make_universe(
        cfg.prompts,
        cfg.responses,
        derive_seed(cfg.seed, trial, "universe"),
        cfg.correct_per_prompt,
    )
    bc = cfg.boost_config(variant)
    if variant in (BOOSTING, BOOSTING_NO_FOCUSING):
        bc = replace(bc, labeler=build_labeler(cfg, universe))
    g_init = None
    if variant == DO_NOTHING or (variant == FILTER_ONLY and cfg.initial_success != 0):
        g_init = warm_start_model(
            universe,
            coerce_weight(cfg.initial_success, cfg.mode),
            substream(cfg.seed, trial, "init", "warm"),
            cfg.mode,
        )
    return run_variant(bc, universe, g_init, trial)


def _run_trial(cfg: ExperimentConfig, trial: int) -> tuple[list[RunRow], list[CheckRow]]:
    rows: list[RunRow] = []
    checks: list[CheckRow] = []
    for variant in cfg.variants:
        result = run_single(cfg, variant, trial)
        for tr in result.traces:
            rows.append(
                RunRow(
                    variant=variant,
                    trial=trial,
                    t=tr.t,
                    success=tr.success,
                    p_minus_size=tr.failed.total(),
                    label_weight=tr.label_weight,
                    event_violated=tr.event_violated,
                )
            )
        if cfg.checks:
            report = run_all_checks(result)
            for c in report.checks:
                checks.append(CheckRow(variant, trial, c.name, c.status, c.detail))
        if cfg.write_traces:
            out = Path(resolve_out_dir(cfg))
            out.mkdir(parents=True, exist_ok=True)
            write_trace(out / f"trace_{variant}_{trial}.txt", result)
    return rows, checks


def resolve_out_dir(cfg: ExperimentConfig) -> str:
    if cfg.out_dir is not None:
        return cfg.out_dir
    return os.environ.get(OUT_DIR_ENV, ".")


def run_experiment(cfg: ExperimentConfig) -> SweepResult:
    """Run every variant x trial, optionally checking each run's traces."""
    cfg.validate()
    per_trial: dict[int, tuple[list[RunRow], list[CheckRow]]] = {}
    trial_ids = list(range(cfg.trials))
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for trial, got in zip(trial_ids, pool.map(_run_trial, [cfg] * len(trial_ids), trial_ids)):
                per_trial[trial] = got
    else:
        for trial in trial_ids:
            per_trial[trial] = _run_trial(cfg, trial)
    rows: list[RunRow] = []
    checks: list[CheckRow] = []
    for trial in trial_ids:
        got_rows, got_checks = per_trial[trial]
        rows.extend(got_rows)
        checks.extend(got_checks)
    rows.sort(key=lambda r: (r.variant, r.trial, r.t))
    checks.sort(key=lambda c: (c.variant, c.trial))
    return SweepResult(config=cfg, rows=tuple(rows), checks=tuple(checks))


def _format_decimal(value: Weight) -> str:
    return format_weight(float(value))


def emit_csv(result: SweepResult, out_dir: str | Path) -> tuple[Path, Path]:
    """Write runs.csv and checks.csv; numbers as shortest round-trip decimals."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    runs_path = out / "runs.csv"
    checks_path = out / "checks.csv"
    with open(runs_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RUNS_HEADER)
        for r in result.rows:
            writer.writerow(
                [
                    r.variant,
                    r.trial,
                    r.t,
                    _format_decimal(r.success),
                    r.p_minus_size,
                    _format_decimal(r.label_weight),
                    format_weight(r.label_weight),
                    int(r.event_violated),
                ]
            )
    with open(checks_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CHECKS_HEADER)
        for c in result.checks:
            writer.writerow([c.variant, c.trial, c.name, c.status, c.detail])
    return runs_path, checks_path


_SCHEMA: dict[str, tuple[str, ...]] = {
    "universe": ("prompts", "responses", "correct_per_prompt"),
    "run": (
        "variants", "trials", "seed", "mode", "checks", "workers",
        "out_dir", "write_traces", "initial_success",
    ),
    "boost": ("alpha", "beta", "gamma", "k", "rounds", "raw_counts", "fallback"),
    "labeler": ("kind", "budget", "accuracy", "accuracy_range"),
}


def _parse_number(text: str, mode: str) -> Weight:
    if mode == RATIONAL:
        return Fraction(text)
    return float(Fraction(text)) if "/" in text else float(text)


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse the sectioned key-value config format; unknown keys are errors."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}: unknown key {key!r} in [{section}]")

    def get(section: str, key: str, default: str | None = None) -> str | None:
        if parser.has_option(section, key):
            return parser.get(section, key)
        return default

    mode = (get("run", "mode", FLOAT) or FLOAT).strip()
    if mode not in MODES:
        raise ConfigError(f"unknown arithmetic mode {mode!r}")

    def num(section: str, key: str, default: Weight) -> Weight:
        raw = get(section, key)
        return default if raw is None else _parse_number(raw.strip(), mode)

    def integer(section: str, key: str, default: int) -> int:
        raw = get(section, key)
        return default if raw is None else int(raw.strip())

    def boolean(section: str, key: str, default: bool) -> bool:
        raw = get(section, key)
        return default if raw is None else _parse_bool(raw)

    variants_raw = get("run", "variants", BOOSTING)
    variants = tuple(v.strip() for v in variants_raw.split(",") if v.strip())
    accuracy_range = None
    raw_range = get("labeler", "accuracy_range")
    if raw_range is not None:
        parts = [p.strip() for p in raw_range.split(",")]
        if len(parts) != 2:
            raise ConfigError("accuracy_range needs exactly two values: easy, hard")
        accuracy_range = (float(parts[0]), float(parts[1]))
    cfg = ExperimentConfig(
        prompts=integer("universe", "prompts", 50),
        responses=integer("universe", "responses", 20),
        correct_per_prompt=integer("universe", "correct_per_prompt", 1),
        variants=variants,
        trials=integer("run", "trials", 1),
        seed=integer("run", "seed", 0),
        mode=mode,
        checks=boolean("run", "checks", True),
        workers=integer("run", "workers", 1),
        out_dir=get("run", "out_dir"),
        write_traces=boolean("run", "write_traces", False),
        initial_success=num("run", "initial_success", 0),
        alpha=num("boost", "alpha", _parse_number("0.2", mode)),
        beta=num("boost", "beta", _parse_number("0.5", mode)),
        gamma=num("boost", "gamma", 1 if mode == RATIONAL else 1.0),
        k=integer("boost", "k", 18),
        rounds=integer("boost", "rounds", 10),
        raw_counts=boolean("boost", "raw_counts", False),
        fallback=(get("boost", "fallback", ECHO_INIT) or ECHO_INIT).strip(),
        labeler_kind=(get("labeler", "kind", ADVERSARIAL_EASIEST) or ADVERSARIAL_EASIEST).strip().lower(),
        labeler_budget=integer("labeler", "budget", 0),
        labeler_accuracy=num("labeler", "accuracy", 0.5),
        labeler_accuracy_range=accuracy_range,
    )
    return cfg.validate()


def demo_config(seed: int = 7, trials: int = 5, out_dir: str | None = None) -> ExperimentConfig:
    """The standard acceptance universe with all four variants."""
    return ExperimentConfig(
        prompts=50,
        responses=20,
        correct_per_prompt=1,
        variants=(BOOSTING, BOOSTING_NO_FOCUSING, FILTER_ONLY, DO_NOTHING),
        trials=trials,
        seed=seed,
        mode=FLOAT,
        checks=True,
        workers=1,
        out_dir=out_dir,
        initial_success=0.5,
        alpha=0.2,
        beta=0.5,
        gamma=1.0,
        k=18,
        rounds=10,
    )
