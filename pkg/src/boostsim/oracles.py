"""Oracle components of the training loop.

Four idealized capabilities drive the simulation:

* :func:`learner` -- fits a tabular model that reproduces the dataset's
  conditional response distribution exactly (a "strong learner").
* :func:`generate` -- draws k synthetic responses per prompt from a model.
* :func:`noisy_filter` -- keeps each correct draw independently with
  probability gamma and rejects every incorrect draw.
* :func:`label` -- a weak labeler returning one response per prompt, with
  at least a beta fraction correct for the hard-guarantee kinds.

All oracles are pure functions of their inputs and an explicit random
stream: same stream state, same output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .datasets import (
    FLOAT,
    RATIONAL,
    DatasetError,
    PromptMultiset,
    Weight,
    WeightedDataset,
    check_mode,
    coerce_weight,
)
from .worlds import TaskUniverse

ADVERSARIAL_EASIEST = "adversarial-easiest"
ORACLE_PERFECT = "oracle-perfect"
BUDGET_A = "budget-a"
BUDGET_B = "budget-b"
LABELER_KINDS = (ADVERSARIAL_EASIEST, ORACLE_PERFECT, BUDGET_A, BUDGET_B)

#: Kinds whose >= beta correct fraction holds on every call, not just on average.
HARD_GUARANTEE_KINDS = (ADVERSARIAL_EASIEST, ORACLE_PERFECT)


class OracleError(ValueError):
    """An oracle precondition was violated."""


class Distribution:
    """Probability distribution over response ids, sorted by id."""

    __slots__ = ("mode", "responses", "probs", "_cum", "_cum_array")

    def __init__(self, pairs: Sequence[tuple[int, Weight]], mode: str):
        check_mode(mode)
        pairs = sorted(pairs)
        responses = tuple(y for y, _ in pairs)
        probs = tuple(coerce_weight(p, mode) for _, p in pairs)
        if len(set(responses)) != len(responses):
            raise OracleError("duplicate response in distribution")
        if any(p < 0 for p in probs):
            raise OracleError("negative probability")
        total = sum(probs)
        if mode == RATIONAL:
            if total != 1:
                raise OracleError(f"probabilities sum to {total}, not 1")
        elif not math.isclose(float(total), 1.0, rel_tol=0, abs_tol=1e-9):
            raise OracleError(f"probabilities sum to {total}, not 1")
        self.mode = mode
        self.responses = responses
        self.probs = probs
        cum = []
        acc = probs[0] * 0
        for p in probs:
            acc = acc + p
            cum.append(acc)
        self._cum = tuple(cum)
        self._cum_array = np.array([float(c) for c in cum]) if mode == FLOAT else None

    def prob(self, y: int) -> Weight:
        try:
            return self.probs[self.responses.index(y)]
        except ValueError:
            return Fraction(0) if self.mode == RATIONAL else 0.0

    def sample_many(self, k: int, rng: np.random.Generator) -> list[int]:
        """k inverse-CDF draws; consumes exactly k uniforms from the stream."""
        u = rng.random(k)
        if self._cum_array is not None:
            idx = np.searchsorted(self._cum_array, u, side="right")
            idx = np.minimum(idx, len(self.responses) - 1)
            return [self.responses[i] for i in idx]
        out = []
        for ui in u:
            for i, c in enumerate(self._cum):
                if ui < c:
                    out.append(self.responses[i])
                    break
            else:
                out.append(self.responses[-1])
        return out

    def items(self):
        return zip(self.responses, self.probs)


class FallbackPolicy:
    """Distribution supplied for prompts the training data never covered."""

    def distribution(self, x: int) -> Distribution:
        raise NotImplementedError


class UniformFallback(FallbackPolicy):
    """Uniform over the universe's response space."""

    def __init__(self, responses: Sequence[int], mode: str):
        n = len(responses)
        if n == 0:
            raise OracleError("uniform fallback needs a non-empty response space")
        p = Fraction(1, n) if mode == RATIONAL else 1.0 / n
        self._dist = Distribution([(y, p) for y in responses], mode)

    def distribution(self, x: int) -> Distribution:
        return self._dist


class EchoFallback(FallbackPolicy):
    """Defer to another model, typically the run's initial model."""

    def __init__(self, model: "TabularModel"):
        self._model = model

    def distribution(self, x: int) -> Distribution:
        return self._model.distribution(x)


class NoFallback(FallbackPolicy):
    def distribution(self, x: int) -> Distribution:
        raise OracleError(f"model has no distribution for prompt {x}")


class TabularModel:
    """Prompt -> response distribution table with a fallback for absent prompts."""

    __slots__ = ("mode", "_table", "fallback")

    def __init__(self, table: Mapping[int, Distribution], fallback: FallbackPolicy, mode: str):
        check_mode(mode)
        for x, dist in table.items():
            if dist.mode != mode:
                raise DatasetError(f"distribution for prompt {x} has mode {dist.mode}, expected {mode}")
        self.mode = mode
        self._table = dict(table)
        self.fallback = fallback

    def distribution(self, x: int) -> Distribution:
        dist = self._table.get(x)
        if dist is None:
            return self.fallback.distribution(x)
        return dist

    def prob(self, x: int, y: int) -> Weight:
        return self.distribution(x).prob(y)

    def covered(self, x: int) -> bool:
        return x in self._table

    def prompts(self) -> tuple[int, ...]:
        return tuple(sorted(self._table))


def learner(dataset: WeightedDataset, fallback: FallbackPolicy | None = None) -> TabularModel:
    """Fit the model whose conditionals match the dataset's exactly.

    For every (x, y) in the dataset the model assigns probability
    ``dataset.conditional(x, y)``; prompts with no data defer to the
    fallback policy (callers that know their data covers every prompt
    may omit it).
    """
    if fallback is None:
        fallback = NoFallback()
    table = {}
    for x in dataset.prompts():
        pairs = [(y, dataset.conditional(x, y)) for y in dataset.responses_for(x)]
        table[x] = Distribution(pairs, dataset.mode)
    return TabularModel(table, fallback, dataset.mode)


def sample(model: TabularModel, x: int, rng: np.random.Generator) -> int:
    """One response drawn from the model's distribution for x."""
    return model.distribution(x).sample_many(1, rng)[0]


def generate(
    prompt_set: PromptMultiset,
    k: int,
    model: TabularModel,
    rng: np.random.Generator,
) -> WeightedDataset:
    """k independent samples per prompt occurrence, aggregated by multiplicity."""
    if k < 1:
        raise OracleError("k must be a positive integer")
    counts: dict[tuple[int, int], int] = {}
    for x, c in prompt_set.items():
        draws = model.distribution(x).sample_many(k * c, rng)
        for y in draws:
            counts[(x, y)] = counts.get((x, y), 0) + 1
    return WeightedDataset(counts, model.mode)


@dataclass(frozen=True)
class FilterOutcome:
    """Split of a synthetic dataset into kept pairs and rejected prompt draws."""

    kept: WeightedDataset
    rejected_prompts: PromptMultiset


def noisy_filter(
    dataset: WeightedDataset,
    gamma: Weight,
    universe: TaskUniverse,
    rng: np.random.Generator,
) -> FilterOutcome:
    """Filter each unit draw independently.

    A draw with quality 1 is kept with probability exactly gamma, else its
    prompt is rejected; a draw with quality 0 always rejects its prompt.
    Weights must be integral since the filter acts per unit draw.
    """
    if not 0 < gamma <= 1:
        raise OracleError("gamma must lie in (0, 1]")
    kept: dict[tuple[int, int], int] = {}
    rejected: dict[int, int] = {}
    for (x, y), w in dataset.entries():
        n = _unit_count(w)
        if universe.quality(x, y) == 1:
            u = rng.random(n)
            n_kept = int(np.count_nonzero(u < float(gamma))) if isinstance(gamma, float) \
                else sum(1 for ui in u if ui < gamma)
            if n_kept:
                kept[(x, y)] = kept.get((x, y), 0) + n_kept
            if n - n_kept:
                rejected[x] = rejected.get(x, 0) + (n - n_kept)
        else:
            rejected[x] = rejected.get(x, 0) + n
    return FilterOutcome(
        kept=WeightedDataset(kept, dataset.mode),
        rejected_prompts=PromptMultiset(rejected),
    )


def _unit_count(w: Weight) -> int:
    if isinstance(w, Fraction):
        if w.denominator != 1:
            raise OracleError(f"filter needs unit draws; weight {w} is not integral")
        return int(w)
    if not float(w).is_integer():
        raise OracleError(f"filter needs unit draws; weight {w} is not integral")
    return int(w)


@dataclass(frozen=True)
class LabelerSpec:
    """Configuration of a weak labeler.

    ``accuracy`` maps each prompt to its per-query success probability and
    is only consulted by the budget kinds; the hard-guarantee kinds ignore
    it and meet their beta fraction by construction.
    """

    kind: str
    beta: Weight
    budget: int = 0
    accuracy: Mapping[int, float] | None = None

    def __post_init__(self):
        if self.kind not in LABELER_KINDS:
            raise OracleError(f"unknown labeler kind {self.kind!r}")
        if not 0 <= self.beta <= 1:
            raise OracleError("beta must lie in [0, 1]")
        if self.budget < 0:
            raise OracleError("budget must be non-negative")
        if self.kind in (BUDGET_A, BUDGET_B) and self.accuracy is None:
            raise OracleError(f"{self.kind} labeler needs a per-prompt accuracy map")

    @property
    def hard_guarantee(self) -> bool:
        return self.kind in HARD_GUARANTEE_KINDS


def _min_correct(beta: Weight, m: int) -> int:
    # ceil(beta * m) computed exactly; float betas count by their binary value
    f = Fraction(beta) * m
    return -((-f.numerator) // f.denominator)


def _random_incorrect(universe: TaskUniverse, x: int, rng: np.random.Generator) -> int:
    wrong = universe.incorrect_responses(x)
    if not wrong:
        raise OracleError(f"prompt {x} has no incorrect response to label with")
    return wrong[int(rng.integers(len(wrong)))]


def label(
    spec: LabelerSpec,
    prompt_set: PromptMultiset,
    universe: TaskUniverse,
    rng: np.random.Generator,
    mode: str = FLOAT,
) -> WeightedDataset:
    """One (prompt, response) pair per distinct prompt, unit weight each.

    The adversarial kind answers exactly the ceil(beta * m) easiest prompts
    correctly and nothing more; the budget kinds split a total query budget
    evenly and answer correctly only where some query succeeds, so their
    correct fraction is empirical rather than guaranteed.
    """
    if not prompt_set:
        raise OracleError("labeler requires a non-empty prompt set")
    prompts = list(prompt_set.distinct())
    m = len(prompts)
    pairs: dict[tuple[int, int], int] = {}
    if spec.kind == ORACLE_PERFECT:
        for x in prompts:
            pairs[(x, universe.canonical_correct(x))] = 1
    elif spec.kind == ADVERSARIAL_EASIEST:
        n_correct = _min_correct(spec.beta, m)
        easiest = universe.by_difficulty(prompts)
        correct_set = set(easiest[:n_correct])
        for x in prompts:
            if x in correct_set:
                pairs[(x, universe.canonical_correct(x))] = 1
            else:
                pairs[(x, _random_incorrect(universe, x, rng))] = 1
    else:
        queries_per_prompt = spec.budget // m
        for x in prompts:
            acc = spec.accuracy.get(x, 0.0)
            hits = rng.random(queries_per_prompt) < acc if queries_per_prompt else ()
            succeeded = bool(np.any(hits)) if queries_per_prompt else False
            if spec.kind == BUDGET_B and succeeded:
                # pooled with an equal volume of incorrect responses, so a
                # successful prompt only recovers its correct label half the time
                succeeded = bool(rng.random() < 0.5)
            if succeeded:
                pairs[(x, universe.canonical_correct(x))] = 1
            else:
                pairs[(x, _random_incorrect(universe, x, rng))] = 1
    out = WeightedDataset(pairs, mode)
    if spec.hard_guarantee:
        n_good = sum(1 for (x, y), _ in out.entries() if universe.quality(x, y) == 1)
        assert n_good >= _min_correct(spec.beta, m)
    return out


def random_prompt_subset(
    prompt_set: PromptMultiset,
    n: int,
    rng: np.random.Generator,
) -> PromptMultiset:
    """Uniformly random n-subset of the distinct prompts, without replacement."""
    prompts = prompt_set.distinct()
    if n < 0:
        raise OracleError("subset size must be non-negative")
    if n > len(prompts):
        raise OracleError(f"cannot draw {n} prompts from {len(prompts)}")
    if n == 0:
        return PromptMultiset()
    chosen = rng.choice(len(prompts), size=n, replace=False)
    return PromptMultiset.from_prompts(prompts[i] for i in chosen)


def initial_wrong_model(
    universe: TaskUniverse,
    rng: np.random.Generator,
    mode: str = FLOAT,
) -> TabularModel:
    """Point mass on a seeded-random incorrect response for every prompt."""
    one = Fraction(1) if mode == RATIONAL else 1.0
    table = {
        x: Distribution([(_random_incorrect(universe, x, rng), one)], mode)
        for x in universe.prompts
    }
    return TabularModel(table, NoFallback(), mode)


def warm_start_model(
    universe: TaskUniverse,
    success: Weight,
    rng: np.random.Generator,
    mode: str = FLOAT,
) -> TabularModel:
    """Two-point model: mass ``success`` on a correct response, rest on one wrong."""
    success = coerce_weight(success, mode)
    if not 0 <= success <= 1:
        raise OracleError("success must lie in [0, 1]")
    one = Fraction(1) if mode == RATIONAL else 1.0
    table = {}
    for x in universe.prompts:
        good = universe.canonical_correct(x)
        if success == 1:
            table[x] = Distribution([(good, one)], mode)
            continue
        wrong = _random_incorrect(universe, x, rng)
        if success == 0:
            table[x] = Distribution([(wrong, one)], mode)
        else:
            table[x] = Distribution([(good, success), (wrong, one - success)], mode)
    return TabularModel(table, NoFallback(), mode)
