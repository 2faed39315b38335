"""Iterative training loops over a task universe.

Four curation variants share one loop skeleton. Per round the current
model synthesizes k responses per prompt; the noisy filter splits the
draws; prompts with no surviving draw form the round's failure set; a
weak labeler answers either that set (boosting) or a random set of the
same size (the no-focusing ablation); and the training mixture grows by
the kept pairs plus the labeled pairs at total weight alpha. The
do-nothing and filter-only baselines drop the labeler (and, for
do-nothing, the filter) from this skeleton.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .datasets import (
    FLOAT,
    INFINITE,
    MODES,
    RATIONAL,
    DatasetError,
    PromptMultiset,
    Weight,
    WeightedDataset,
    coerce_weight,
    weighted_union,
)
from .oracles import (
    EchoFallback,
    FallbackPolicy,
    LabelerSpec,
    TabularModel,
    UniformFallback,
    generate,
    initial_wrong_model,
    label,
    learner,
    noisy_filter,
    random_prompt_subset,
)
from .rng import substream
from .worlds import TaskUniverse

DO_NOTHING = "do-nothing"
FILTER_ONLY = "filter-only"
BOOSTING = "boosting"
BOOSTING_NO_FOCUSING = "boosting-no-focusing"
VARIANTS = (DO_NOTHING, FILTER_ONLY, BOOSTING, BOOSTING_NO_FOCUSING)

ECHO_INIT = "echo-init"
UNIFORM = "uniform"
FALLBACKS = (ECHO_INIT, UNIFORM)


class ConfigError(ValueError):
    """A run configuration violates a constraint; the message names it."""


@dataclass(frozen=True)
class BoostConfig:
    """Full determinism root of a single run."""

    alpha: Weight
    beta: Weight
    gamma: Weight
    k: int
    rounds: int
    variant: str
    labeler: Optional[LabelerSpec] = None
    mode: str = FLOAT
    seed: int = 0
    fallback: str = ECHO_INIT
    keep_raw_counts: bool = False

    def validate(self) -> "BoostConfig":
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown arithmetic mode {self.mode!r}")
        if self.fallback not in FALLBACKS:
            raise ConfigError(f"unknown fallback policy {self.fallback!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if not isinstance(self.rounds, int) or self.rounds < 1:
            raise ConfigError("rounds must be a positive integer")
        for name, value in (("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)):
            try:
                coerce_weight(value, self.mode)
            except DatasetError as exc:
                raise ConfigError(f"{name}: {exc}") from exc
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if not 0 <= self.beta <= 1:
            raise ConfigError("beta must lie in [0, 1]")
        if not 0 < self.gamma <= 1:
            raise ConfigError("gamma must lie in (0, 1]")
        if self.variant in (BOOSTING, BOOSTING_NO_FOCUSING):
            if self.alpha <= 0:
                raise ConfigError(f"variant {self.variant} requires alpha > 0")
            if self.labeler is None:
                raise ConfigError(f"variant {self.variant} requires a labeler")
        else:
            if self.alpha != 0:
                raise ConfigError(f"variant {self.variant} requires alpha = 0")
        return self


@dataclass(frozen=True)
class IterationTrace:
    """Everything one round produced, for checkers and serialization."""

    t: int
    synthetic: WeightedDataset
    kept: WeightedDataset
    labeled: WeightedDataset
    failed: PromptMultiset
    passed: PromptMultiset
    label_weight: Weight
    mixture: WeightedDataset
    avg_quality: dict[int, Weight]
    success: Weight
    event_violated: bool


@dataclass(frozen=True)
class RunResult:
    config: BoostConfig
    universe: TaskUniverse
    trial: int
    initial_quality: dict[int, Weight]
    traces: tuple[IterationTrace, ...]
    final_model: TabularModel = field(compare=False)
    final_success: Weight = 0.0

    @property
    def event_held(self) -> bool:
        """True when no round broke the quality-retention event."""
        return not any(tr.event_violated for tr in self.traces)


def success_probability(model: TabularModel, universe: TaskUniverse) -> Weight:
    """Exact probability that a uniform prompt gets a correct response."""
    total = Fraction(0) if model.mode == RATIONAL else 0.0
    for x in universe.prompts:
        good = universe.correct_responses(x)
        for y, p in model.distribution(x).items():
            if y in good:
                total += p
    return total / len(universe.prompts)


def model_quality_map(model: TabularModel, universe: TaskUniverse) -> dict[int, Weight]:
    """Per-prompt probability of a correct response under the model."""
    out = {}
    for x in universe.prompts:
        good = universe.correct_responses(x)
        dist = model.distribution(x)
        acc = Fraction(0) if model.mode == RATIONAL else 0.0
        for y, p in dist.items():
            if y in good:
                acc += p
        out[x] = acc
    return out


def mixture_quality_map(
    mixture: WeightedDataset, universe: TaskUniverse
) -> dict[int, Weight]:
    """Per-prompt mean quality of the mixture's responses (0 off support)."""
    out = {}
    for x in universe.prompts:
        good = universe.correct_responses(x)
        acc = Fraction(0) if mixture.mode == RATIONAL else 0.0
        for y in mixture.responses_for(x):
            if y in good:
                acc += mixture.conditional(x, y)
        out[x] = acc
    return out


def _resolve_fallback(cfg: BoostConfig, universe: TaskUniverse, g_init: TabularModel) -> FallbackPolicy:
    if cfg.fallback == UNIFORM:
        return UniformFallback(universe.responses, cfg.mode)
    return EchoFallback(g_init)


def _dedup_unit(dataset: WeightedDataset) -> WeightedDataset:
    """Collapse every surviving pair to unit weight."""
    one = Fraction(1) if dataset.mode == RATIONAL else 1.0
    return WeightedDataset({key: one for key, _ in dataset.entries()}, dataset.mode)


def _run_loop(
    cfg: BoostConfig,
    universe: TaskUniverse,
    g_init: TabularModel,
    trial: int,
) -> RunResult:
    cfg.validate()
    if g_init.mode != cfg.mode:
        raise ConfigError(f"initial model mode {g_init.mode} does not match run mode {cfg.mode}")
    mode = cfg.mode
    alpha = coerce_weight(cfg.alpha, mode)
    beta = cfg.beta
    gamma = coerce_weight(cfg.gamma, mode)
    prompt_set = PromptMultiset.from_prompts(universe.prompts)
    fallback = _resolve_fallback(cfg, universe, g_init)
    initial_quality = model_quality_map(g_init, universe)

    mixture = WeightedDataset.empty(mode)
    model = g_init
    empty = WeightedDataset.empty(mode)
    traces: list[IterationTrace] = []
    prev_quality = initial_quality
    for t in range(1, cfg.rounds + 1):
        synthetic = generate(prompt_set, cfg.k, model, substream(cfg.seed, trial, t, "generate"))
        if cfg.variant == DO_NOTHING:
            kept = synthetic
            failed = PromptMultiset()
            passed = PromptMultiset(
                {x: int(synthetic.prompt_total(x)) for x in synthetic.prompts()}
            )
            labeled = empty
        else:
            outcome = noisy_filter(synthetic, gamma, universe, substream(cfg.seed, trial, t, "filter"))
            survivors = set(outcome.kept.prompts())
            failed = PromptMultiset.from_prompts(
                x for x in universe.prompts if x not in survivors
            )
            passed = PromptMultiset.from_prompts(sorted(survivors))
            kept = outcome.kept if cfg.keep_raw_counts else _dedup_unit(outcome.kept)
            if cfg.variant == FILTER_ONLY:
                labeled = empty
            else:
                if cfg.variant == BOOSTING_NO_FOCUSING:
                    target = random_prompt_subset(
                        prompt_set, failed.total(), substream(cfg.seed, trial, t, "subset")
                    )
                else:
                    target = failed
                if target:
                    labeled = label(
                        cfg.labeler, target, universe,
                        substream(cfg.seed, trial, t, "labeler"), mode,
                    )
                else:
                    labeled = empty
        if labeled:
            lam: Weight = alpha / labeled.total()
        else:
            lam = INFINITE
        mixture = weighted_union(1, mixture, lam, labeled)
        mixture = weighted_union(1, mixture, 1, kept)
        model = learner(mixture, fallback)
        avg_quality = mixture_quality_map(mixture, universe)
        event_violated = any(prev_quality[x] >= beta for x in failed.distinct())
        traces.append(
            IterationTrace(
                t=t,
                synthetic=synthetic,
                kept=kept,
                labeled=labeled,
                failed=failed,
                passed=passed,
                label_weight=lam,
                mixture=mixture,
                avg_quality=avg_quality,
                success=success_probability(model, universe),
                event_violated=event_violated,
            )
        )
        prev_quality = avg_quality
    return RunResult(
        config=cfg,
        universe=universe,
        trial=trial,
        initial_quality=initial_quality,
        traces=tuple(traces),
        final_model=model,
        final_success=traces[-1].success,
    )


def _default_init(cfg: BoostConfig, universe: TaskUniverse, trial: int) -> TabularModel:
    return initial_wrong_model(
        universe, substream(cfg.seed, trial, "init", "wrong"), cfg.mode
    )


def run_boosting(
    cfg: BoostConfig,
    universe: TaskUniverse,
    g_init: TabularModel | None = None,
    trial: int = 0,
) -> RunResult:
    """Run the full curation loop (with or without focusing)."""
    if cfg.variant not in (BOOSTING, BOOSTING_NO_FOCUSING):
        raise ConfigError(f"run_boosting requires a boosting variant, got {cfg.variant!r}")
    cfg.validate()
    return _run_loop(cfg, universe, g_init or _default_init(cfg, universe, trial), trial)


def run_filter_only(
    cfg: BoostConfig,
    universe: TaskUniverse,
    g_init: TabularModel | None = None,
    trial: int = 0,
) -> RunResult:
    """Keep only filter survivors; no exogenous labels ever enter the data."""
    if cfg.variant != FILTER_ONLY:
        raise ConfigError(f"run_filter_only requires variant {FILTER_ONLY!r}, got {cfg.variant!r}")
    cfg.validate()
    return _run_loop(cfg, universe, g_init or _default_init(cfg, universe, trial), trial)


def run_do_nothing(
    cfg: BoostConfig,
    universe: TaskUniverse,
    g_init: TabularModel,
    trial: int = 0,
) -> RunResult:
    """Recursive training on raw synthetic data; the collapse baseline."""
    if cfg.variant != DO_NOTHING:
        raise ConfigError(f"run_do_nothing requires variant {DO_NOTHING!r}, got {cfg.variant!r}")
    cfg.validate()
    return _run_loop(cfg, universe, g_init, trial)


def run_variant(
    cfg: BoostConfig,
    universe: TaskUniverse,
    g_init: TabularModel | None = None,
    trial: int = 0,
) -> RunResult:
    """Dispatch on cfg.variant; do-nothing requires an explicit initial model."""
    if cfg.variant == DO_NOTHING:
        if g_init is None:
            raise ConfigError("do-nothing requires an explicit initial model")
        return run_do_nothing(cfg, universe, g_init, trial)
    if cfg.variant == FILTER_ONLY:
        return run_filter_only(cfg, universe, g_init, trial)
    return run_boosting(cfg, universe, g_init, trial)
