"""Quality functionals, convergence bounds, and run checkers.

The checkers make the convergence analysis executable: each one asserts
an algebraic identity or inequality that a run's traces must satisfy.
In rational mode every comparison is exact with zero tolerance; in float
mode a relative error up to 1e-9 passes, anything up to 1e-6 is reported
as an arithmetic artifact without failing, and larger errors fail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .datasets import RATIONAL, Weight
from .engine import BOOSTING, DO_NOTHING, IterationTrace, RunResult
from .worlds import TaskUniverse

PASS = "pass"
WARN = "warn"
FAIL = "fail"
SKIPPED = "skipped"
#: The retention event is random; a run where it did not hold is reported
#: with this status rather than as a checker failure.
VIOLATED = "violated"

#: Check ids covered by a complete report.
FULL_CHECKS = (
    "quality_identity",
    "zero_quality_propagation",
    "label_quality_binary",
    "retention_event",
    "failure_characterization",
    "failure_decay",
    "failure_prefix",
    "exit_quality_floor",
)

_REL_PASS = 1e-9
_REL_WARN = 1e-6


class BoundsError(ValueError):
    """Out-of-range parameters for the convergence bound calculator."""


@dataclass(frozen=True)
class TheoremBounds:
    """Sufficient round count and per-prompt sample count for a target error."""

    t_min: int
    k_min: int
    epsilon: float
    alpha: float
    beta: float
    gamma: float
    prompt_count: int


def theorem_bounds(
    epsilon: Weight,
    alpha: Weight,
    beta: Weight,
    gamma: Weight,
    prompt_count: int,
) -> TheoremBounds:
    """Smallest integer (rounds, samples-per-prompt) meeting the guarantee.

    Natural logarithms throughout; both bounds are rounded up.
    """
    if not 0 < epsilon < 1:
        raise BoundsError("epsilon must lie in (0, 1)")
    if not alpha > 0:
        raise BoundsError("alpha must be positive")
    if not 0 < beta < 1:
        raise BoundsError("beta must lie in (0, 1)")
    if not 0 < gamma <= 1:
        raise BoundsError("gamma must lie in (0, 1]")
    if prompt_count < 1:
        raise BoundsError("prompt_count must be positive")
    eps, a, b, g = (float(epsilon), float(alpha), float(beta), float(gamma))
    t_min = math.ceil(math.log(2.0 / eps) / b + 2.0 * a / (b * eps) + 1.0)
    k_min = math.ceil((2.0 * math.log(t_min) + math.log(prompt_count)) / (b * g))
    return TheoremBounds(
        t_min=max(t_min, 1),
        k_min=max(k_min, 1),
        epsilon=eps,
        alpha=a,
        beta=b,
        gamma=g,
        prompt_count=prompt_count,
    )


@dataclass(frozen=True)
class QualityProfile:
    """Per-prompt mean response quality of one round's data, all values in [0, 1].

    ``labeled`` and ``kept`` cover only prompts that received data that
    round; ``mixture`` covers every prompt of the universe (0 off support).
    """

    round_index: int
    labeled: dict[int, Weight]
    kept: dict[int, Weight]
    mixture: dict[int, Weight]


def quality_profile(trace: IterationTrace, universe: TaskUniverse) -> QualityProfile:
    return QualityProfile(
        round_index=trace.t,
        labeled={x: _correct_mass(trace.labeled, x, universe) for x in trace.labeled.prompts()},
        kept={x: _correct_mass(trace.kept, x, universe) for x in trace.kept.prompts()},
        mixture=dict(trace.avg_quality),
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str
    detail: str = "-"

    @property
    def ok(self) -> bool:
        return self.status != FAIL

    def line(self) -> str:
        return f"{self.name},{self.status},{self.detail}"


@dataclass(frozen=True)
class LemmaReport:
    """One entry per check; complete when it covers all FULL_CHECKS ids."""

    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def complete(self) -> bool:
        names = {c.name for c in self.checks}
        return all(n in names for n in FULL_CHECKS)

    def by_name(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        return [c.line() for c in self.checks]


def _rel_gap(lhs: Weight, rhs: Weight) -> float:
    diff = abs(float(lhs) - float(rhs))
    if diff == 0.0:
        return 0.0
    ref = max(abs(float(lhs)), abs(float(rhs)), 1e-300)
    return diff / ref


def _classify_equal(lhs: Weight, rhs: Weight, mode: str) -> str:
    if mode == RATIONAL:
        return PASS if lhs == rhs else FAIL
    gap = _rel_gap(lhs, rhs)
    if gap <= _REL_PASS:
        return PASS
    if gap <= _REL_WARN:
        return WARN
    return FAIL


def _classify_at_least(lhs: Weight, rhs: Weight, mode: str) -> str:
    """Classify the claim lhs >= rhs."""
    if lhs >= rhs:
        return PASS
    if mode == RATIONAL:
        return FAIL
    gap = _rel_gap(lhs, rhs)
    if gap <= _REL_PASS:
        return PASS
    if gap <= _REL_WARN:
        return WARN
    return FAIL


def _worst(statuses: Iterable[str]) -> str:
    order = {PASS: 0, SKIPPED: 0, WARN: 1, FAIL: 2}
    worst = PASS
    for s in statuses:
        if order[s] > order[worst]:
            worst = s
    return worst


def _correct_mass(dataset, x: int, universe: TaskUniverse) -> Weight:
    """Mean quality of the dataset's responses to x (conditional-weighted)."""
    good = universe.correct_responses(x)
    acc = Fraction(0) if dataset.mode == RATIONAL else 0.0
    for y in dataset.responses_for(x):
        if y in good:
            acc += dataset.conditional(x, y)
    return acc


def closed_form_avg_quality(
    traces: Sequence[IterationTrace],
    t: int,
    x: int,
    universe: TaskUniverse,
) -> Weight:
    """Mixture quality of prompt x after round t, from per-round summaries.

    Evaluates the telescoped ratio of per-round quality contributions:
    labeled rounds contribute label_weight * (labeled count) * (label
    quality), kept rounds contribute (pass count) * (kept quality). Rounds
    where x received nothing contribute nothing; an infinite label weight
    only ever coincides with an empty labeled set and is skipped by the
    same rule. Returns 0 when the denominator is empty.
    """
    if not 1 <= t <= len(traces):
        raise ValueError(f"round {t} outside trace range 1..{len(traces)}")
    mode = traces[0].mixture.mode
    zero = Fraction(0) if mode == RATIONAL else 0.0
    num = zero
    den = zero
    for s in range(1, t + 1):
        tr = traces[s - 1]
        labeled_count = tr.labeled.prompt_total(x)
        if labeled_count > 0:
            quality = _correct_mass(tr.labeled, x, universe)
            num += tr.label_weight * labeled_count * quality
            den += tr.label_weight * labeled_count
        pass_count = tr.passed.count(x)
        if pass_count > 0:
            quality = _correct_mass(tr.kept, x, universe)
            num += pass_count * quality
            den += pass_count
    if den == 0:
        return zero
    return num / den


def check_quality_identity(result: RunResult) -> CheckResult:
    """Closed-form per-prompt quality must equal the mixture conditional value."""
    mode = result.config.mode
    statuses = []
    first = "-"
    for tr in result.traces:
        for x in result.universe.prompts:
            closed = closed_form_avg_quality(result.traces, tr.t, x, result.universe)
            direct = tr.avg_quality[x]
            status = _classify_equal(closed, direct, mode)
            statuses.append(status)
            if status == FAIL and first == "-":
                first = f"t={tr.t} x={x} closed={closed} direct={direct}"
    return CheckResult("quality_identity", _worst(statuses), first)


def check_zero_quality_propagation(result: RunResult) -> CheckResult:
    """Quality hits zero exactly when it was zero and the round added no quality.

    Only meaningful when exogenous labels carry positive weight, so runs
    with alpha = 0 are reported as skipped.
    """
    if not result.config.alpha > 0:
        return CheckResult("zero_quality_propagation", SKIPPED, "alpha=0 run")
    prev = result.initial_quality
    for tr in result.traces:
        for x in result.universe.prompts:
            labeled_quality = _correct_mass(tr.labeled, x, result.universe)
            lhs = tr.avg_quality[x] == 0
            rhs = prev[x] == 0 and labeled_quality == 0
            if lhs != rhs:
                detail = (
                    f"t={tr.t} x={x} now={tr.avg_quality[x]} "
                    f"prev={prev[x]} label_quality={labeled_quality}"
                )
                return CheckResult("zero_quality_propagation", FAIL, detail)
        prev = tr.avg_quality
    return CheckResult("zero_quality_propagation", PASS)


def check_label_quality_binary(result: RunResult) -> CheckResult:
    """Per-prompt label quality is 0 or 1; kept-side quality is exactly 1."""
    if result.config.variant == DO_NOTHING:
        return CheckResult("label_quality_binary", SKIPPED, "no filter or labeler")
    mode = result.config.mode
    statuses = []
    first = "-"
    for tr in result.traces:
        profile = quality_profile(tr, result.universe)
        for x, q in profile.labeled.items():
            if q != 0 and q != 1:
                statuses.append(FAIL)
                if first == "-":
                    first = f"t={tr.t} x={x} label_quality={q}"
            else:
                statuses.append(PASS)
        for x, q in profile.kept.items():
            status = _classify_equal(q, 1, mode)
            statuses.append(status)
            if status == FAIL and first == "-":
                first = f"t={tr.t} x={x} kept_quality={q}"
    return CheckResult("label_quality_binary", _worst(statuses), first)


def check_mediant_inequality(rng: np.random.Generator, n_samples: int) -> CheckResult:
    """Random exact tuples a<=b, c>=d, b>0 must satisfy (a+c)/(b+c) >= (a+d)/(b+d)."""
    for i in range(n_samples):
        raw = rng.integers(0, 1000, size=2)
        dens = rng.integers(1, 1000, size=2)
        scales = rng.integers(0, 1001, size=2)  # inclusive so a=b and c=d occur
        b = Fraction(int(raw[0]) + 1, int(dens[0]))
        a = b * Fraction(int(scales[0]), 1000)  # scale into [0, b]
        c = Fraction(int(raw[1]), int(dens[1]))
        d = c * Fraction(int(scales[1]), 1000)  # scale into [0, c]
        if not ((a + c) / (b + c) >= (a + d) / (b + d)):
            return CheckResult(
                "mediant_inequality", FAIL, f"sample={i} a={a} b={b} c={c} d={d}"
            )
    return CheckResult("mediant_inequality", PASS, f"samples={n_samples}")


def _retention_violations(result: RunResult) -> list[tuple[int, int]]:
    beta = result.config.beta
    prev = result.initial_quality
    out = []
    for tr in result.traces:
        for x in tr.failed.distinct():
            if prev[x] >= beta:
                out.append((tr.t, x))
        prev = tr.avg_quality
    return out


def check_retention_event_and_decay(result: RunResult) -> list[CheckResult]:
    """The retention event plus the four structural facts it implies.

    The event: once a prompt's mixture quality reaches beta it is never
    again in the failure set. When the event holds on a focused run with a
    hard-guarantee labeler, the failure set equals the zero-quality set,
    shrinks geometrically, each prompt's failures form a prefix of rounds,
    and exited prompts keep quality above an explicit floor.
    """
    violations = _retention_violations(result)
    if violations:
        t, x = violations[0]
        event = CheckResult(
            "retention_event", VIOLATED, f"t={t} x={x} violations={len(violations)}"
        )
    else:
        event = CheckResult("retention_event", PASS)
    cfg = result.config
    blockers = []
    if violations:
        blockers.append("event violated")
    if cfg.variant != BOOSTING:
        blockers.append(f"variant is {cfg.variant}")
    if cfg.labeler is None or not cfg.labeler.hard_guarantee:
        blockers.append("labeler lacks the hard guarantee")
    if not cfg.alpha > 0:
        blockers.append("alpha is 0")
    if not cfg.beta > 0:
        blockers.append("beta is 0")
    if blockers:
        reason = "; ".join(blockers)
        skipped = [
            CheckResult(name, SKIPPED, reason)
            for name in ("failure_characterization", "failure_decay",
                         "failure_prefix", "exit_quality_floor")
        ]
        return [event, *skipped]
    return [
        event,
        _check_failure_characterization(result),
        _check_failure_decay(result),
        _check_failure_prefix(result),
        _check_exit_quality_floor(result),
    ]


def _check_failure_characterization(result: RunResult) -> CheckResult:
    prev = result.initial_quality
    for tr in result.traces:
        for x in result.universe.prompts:
            in_failed = x in tr.failed
            if in_failed != (prev[x] == 0):
                detail = f"t={tr.t} x={x} failed={in_failed} prev_quality={prev[x]}"
                return CheckResult("failure_characterization", FAIL, detail)
        prev = tr.avg_quality
    return CheckResult("failure_characterization", PASS)


def _check_failure_decay(result: RunResult) -> CheckResult:
    """|failed_r| <= (1-beta)^(r-s) |failed_s| for every r >= s, exactly."""
    decay = 1 - Fraction(result.config.beta)
    sizes = [tr.failed.total() for tr in result.traces]
    for s in range(len(sizes)):
        for r in range(s, len(sizes)):
            if Fraction(sizes[r]) > decay ** (r - s) * sizes[s]:
                detail = f"r={r + 1} s={s + 1} sizes={sizes[r]},{sizes[s]}"
                return CheckResult("failure_decay", FAIL, detail)
    return CheckResult("failure_decay", PASS)


def _check_failure_prefix(result: RunResult) -> CheckResult:
    for x in result.universe.prompts:
        rounds = [tr.t for tr in result.traces if x in tr.failed]
        if rounds != list(range(1, len(rounds) + 1)):
            return CheckResult("failure_prefix", FAIL, f"x={x} failed_rounds={rounds}")
    return CheckResult("failure_prefix", PASS)


def _check_exit_quality_floor(result: RunResult) -> CheckResult:
    """Exited prompts keep quality above the explicit floor, which is >= beta."""
    mode = result.config.mode
    alpha = Fraction(result.config.alpha)
    beta = Fraction(result.config.beta)
    statuses = []
    first = "-"
    total_rounds = len(result.traces)
    for x in result.universe.prompts:
        exit_round = 0
        for tr in result.traces:
            if x in tr.failed:
                exit_round = tr.t
        if exit_round == 0 or exit_round >= total_rounds:
            continue  # never failed (warm start) or never exited
        geo = (1 - (1 - beta) ** exit_round) / beta
        for tr in result.traces[exit_round:]:
            since = tr.t - exit_round
            floor = (alpha + since) / (alpha * geo + since)
            if floor < beta:
                statuses.append(FAIL)
                if first == "-":
                    first = f"t={tr.t} x={x} floor={floor} below beta"
                continue
            status = _classify_at_least(tr.avg_quality[x], floor, mode)
            statuses.append(status)
            if status == FAIL and first == "-":
                first = f"t={tr.t} x={x} quality={tr.avg_quality[x]} floor={floor}"
    return CheckResult("exit_quality_floor", _worst(statuses), first)


def run_all_checks(result: RunResult) -> LemmaReport:
    """Complete report over every identity the traces are expected to satisfy."""
    checks = [
        check_quality_identity(result),
        check_zero_quality_propagation(result),
        check_label_quality_binary(result),
        *check_retention_event_and_decay(result),
    ]
    return LemmaReport(tuple(checks))
