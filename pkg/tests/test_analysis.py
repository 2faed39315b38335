import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostsim.analysis import (
    FAIL,
    PASS,
    SKIPPED,
    VIOLATED,
    WARN,
    BoundsError,
    _classify_equal,
    check_label_quality_binary,
    check_mediant_inequality,
    check_quality_identity,
    check_retention_event_and_decay,
    check_zero_quality_propagation,
    closed_form_avg_quality,
    run_all_checks,
    theorem_bounds,
)
from boostsim.datasets import RATIONAL, PromptMultiset, WeightedDataset
from boostsim.engine import (
    BOOSTING,
    BOOSTING_NO_FOCUSING,
    FILTER_ONLY,
    BoostConfig,
    IterationTrace,
    RunResult,
    run_boosting,
    run_filter_only,
)
from boostsim.oracles import (
    ADVERSARIAL_EASIEST,
    ORACLE_PERFECT,
    LabelerSpec,
    NoFallback,
    learner,
)
from boostsim.rng import substream
from boostsim.worlds import TaskUniverse, make_universe


def rational_boost_cfg(**overrides):
    base = dict(
        alpha=Fraction(1, 5),
        beta=Fraction(1, 2),
        gamma=Fraction(1),
        k=6,
        rounds=4,
        variant=BOOSTING,
        labeler=LabelerSpec(kind=ADVERSARIAL_EASIEST, beta=Fraction(1, 2)),
        mode=RATIONAL,
        seed=0,
    )
    base.update(overrides)
    return BoostConfig(**base)


# -- convergence bound calculator -------------------------------------------


def test_bounds_frozen_instance():
    # hand-evaluated: ln(10)/0.5 + 0.4/0.1 + 1 = 9.6052 -> 10
    # and (2 ln 10 + ln 50)/0.5 = 17.034 -> 18
    b = theorem_bounds(0.2, 0.2, 0.5, 1.0, 50)
    assert b.t_min == 10
    assert b.k_min == 18
    assert b.t_min == math.ceil(math.log(2 / 0.2) / 0.5 + 2 * 0.2 / (0.5 * 0.2) + 1)
    assert b.k_min == math.ceil((2 * math.log(10) + math.log(50)) / 0.5)


def test_bounds_beta_near_one_regime():
    # with alpha = epsilon and beta -> 1 the round count collapses to
    # ceil(ln(2/eps) + 3)
    b = theorem_bounds(0.1, 0.1, 1 - 1e-12, 1.0, 50)
    assert b.t_min == math.ceil(math.log(2 / 0.1) + 3) == 6


def test_bounds_out_of_range_parameters():
    with pytest.raises(BoundsError):
        theorem_bounds(0, 0.2, 0.5, 1.0, 50)
    with pytest.raises(BoundsError):
        theorem_bounds(1, 0.2, 0.5, 1.0, 50)
    with pytest.raises(BoundsError):
        theorem_bounds(0.2, 0, 0.5, 1.0, 50)
    with pytest.raises(BoundsError):
        theorem_bounds(0.2, 0.2, 1, 1.0, 50)
    with pytest.raises(BoundsError):
        theorem_bounds(0.2, 0.2, 0.5, 0, 50)
    with pytest.raises(BoundsError):
        theorem_bounds(0.2, 0.2, 0.5, 1.0, 0)


@settings(max_examples=80)
@given(
    st.floats(0.01, 0.9),
    st.floats(0.01, 0.9),
    st.floats(0.05, 0.95),
    st.floats(0.1, 1.0),
    st.integers(1, 1000),
)
def test_bounds_monotonicity(eps, alpha, beta, gamma, prompts):
    b = theorem_bounds(eps, alpha, beta, gamma, prompts)
    smaller_eps = theorem_bounds(eps / 2, alpha, beta, gamma, prompts)
    assert smaller_eps.t_min >= b.t_min
    smaller_beta = theorem_bounds(eps, alpha, beta / 2, gamma, prompts)
    assert smaller_beta.t_min >= b.t_min
    more_prompts = theorem_bounds(eps, alpha, beta, gamma, prompts * 2)
    assert more_prompts.k_min >= b.k_min


# -- closed-form quality ------------------------------------------------------


def _single_prompt_universe():
    return TaskUniverse(
        prompts=(0,), responses=(0, 1), correct={0: frozenset({1})}, difficulty={0: 0}
    )


def _trace(u, *, labeled, label_weight, kept, passed, failed, prev=None, t=1):
    from boostsim.datasets import weighted_union

    prev_mix = prev if prev is not None else WeightedDataset({}, RATIONAL)
    mixture = weighted_union(1, prev_mix, label_weight, labeled)
    mixture = weighted_union(1, mixture, 1, kept)
    from boostsim.engine import mixture_quality_map

    return IterationTrace(
        t=t,
        synthetic=WeightedDataset({}, RATIONAL),
        kept=kept,
        labeled=labeled,
        failed=failed,
        passed=passed,
        label_weight=label_weight,
        mixture=mixture,
        avg_quality=mixture_quality_map(mixture, u),
        success=Fraction(0),
        event_violated=False,
    )


def _result(u, traces, cfg=None):
    cfg = cfg or rational_boost_cfg(rounds=len(traces))
    return RunResult(
        config=cfg,
        universe=u,
        trial=0,
        initial_quality={x: Fraction(0) for x in u.prompts},
        traces=tuple(traces),
        final_model=learner(traces[-1].mixture, NoFallback()),
        final_success=traces[-1].success,
    )


def test_closed_form_untouched_prompt_is_zero():
    u = _single_prompt_universe()
    tr = _trace(
        u,
        labeled=WeightedDataset({}, RATIONAL),
        label_weight=Fraction(1),
        kept=WeightedDataset({}, RATIONAL),
        passed=PromptMultiset(),
        failed=PromptMultiset({0: 1}),
    )
    assert closed_form_avg_quality([tr], 1, 0, u) == 0


def test_closed_form_single_correct_label_is_one():
    u = _single_prompt_universe()
    tr = _trace(
        u,
        labeled=WeightedDataset({(0, 1): 1}, RATIONAL),
        label_weight=Fraction(1, 5),
        kept=WeightedDataset({}, RATIONAL),
        passed=PromptMultiset(),
        failed=PromptMultiset({0: 1}),
    )
    assert closed_form_avg_quality([tr], 1, 0, u) == 1


def test_closed_form_matches_mixture_on_real_run():
    u = make_universe(3, 4, seed=60)
    r = run_boosting(rational_boost_cfg(rounds=3, k=2, seed=8), u)
    for tr in r.traces:
        for x in u.prompts:
            assert closed_form_avg_quality(r.traces, tr.t, x, u) == tr.avg_quality[x]


def test_quality_identity_passes_on_boosting_and_filter_only():
    u = make_universe(5, 4, seed=61)
    r = run_boosting(rational_boost_cfg(seed=3), u)
    assert check_quality_identity(r).status == PASS
    cfg = BoostConfig(
        alpha=0, beta=Fraction(1, 2), gamma=Fraction(1), k=3, rounds=4,
        variant=FILTER_ONLY, mode=RATIONAL, seed=3,
    )
    rf = run_filter_only(cfg, u)
    assert check_quality_identity(rf).status == PASS


def test_quality_identity_fails_with_raw_counts():
    # duplicate filter survivals carry weight 2 into the mixture while the
    # per-round pass count stays 1, so the telescoped form must disagree
    u = make_universe(4, 5, seed=900)
    cfg = rational_boost_cfg(k=2, seed=0, keep_raw_counts=True)
    r = run_boosting(cfg, u)
    assert any(w > 1 for tr in r.traces for _, w in tr.kept.entries())
    assert check_quality_identity(r).status == FAIL
    r_dedup = run_boosting(rational_boost_cfg(k=2, seed=0), u)
    assert check_quality_identity(r_dedup).status == PASS


# -- zero-quality propagation -------------------------------------------------


def test_zero_propagation_holds_on_regime_run():
    u = make_universe(6, 4, seed=62)
    r = run_boosting(rational_boost_cfg(seed=11), u)
    assert check_zero_quality_propagation(r).status == PASS


def test_zero_propagation_skipped_without_labels():
    u = make_universe(4, 4, seed=63)
    cfg = BoostConfig(
        alpha=0, beta=Fraction(1, 2), gamma=Fraction(1), k=2, rounds=2,
        variant=FILTER_ONLY, mode=RATIONAL, seed=0,
    )
    assert check_zero_quality_propagation(run_filter_only(cfg, u)).status == SKIPPED


def test_zero_propagation_violated_by_weightless_labels():
    # a correct label whose mixture weight is forced to zero adds no quality,
    # which is exactly the failure the positive-weight requirement prevents
    u = _single_prompt_universe()
    tr = _trace(
        u,
        labeled=WeightedDataset({(0, 1): 1}, RATIONAL),
        label_weight=Fraction(0),
        kept=WeightedDataset({}, RATIONAL),
        passed=PromptMultiset(),
        failed=PromptMultiset({0: 1}),
    )
    assert tr.avg_quality[0] == 0
    r = _result(u, [tr], cfg=rational_boost_cfg(rounds=1))
    assert check_zero_quality_propagation(r).status == FAIL


# -- binary label quality -----------------------------------------------------


def test_label_binary_passes_on_regime_run():
    u = make_universe(6, 4, seed=64)
    r = run_boosting(rational_boost_cfg(seed=12), u)
    assert check_label_quality_binary(r).status == PASS


def test_label_binary_fails_on_multi_label_round():
    # two labels of mixed quality for one prompt push its label quality to
    # 1/2, which the one-label-per-prompt contract rules out
    u = _single_prompt_universe()
    tr = _trace(
        u,
        labeled=WeightedDataset({(0, 0): 1, (0, 1): 1}, RATIONAL),
        label_weight=Fraction(1, 10),
        kept=WeightedDataset({}, RATIONAL),
        passed=PromptMultiset(),
        failed=PromptMultiset({0: 1}),
    )
    r = _result(u, [tr])
    got = check_label_quality_binary(r)
    assert got.status == FAIL
    assert "label_quality=1/2" in got.detail


# -- mediant inequality -------------------------------------------------------


def test_mediant_trivial_cases():
    def holds(a, b, c, d):
        return Fraction(a + c, b + c) >= Fraction(a + d, b + d)

    assert holds(2, 2, 5, 1)  # a == b: both sides equal 1
    assert holds(1, 3, 4, 4)  # c == d: equality
    assert holds(0, 1, 1, 0)  # 1/2 >= 0


def test_mediant_random_sample():
    got = check_mediant_inequality(substream(42, "mediant"), 2_000)
    assert got.status == PASS


# -- retention event and its consequences ------------------------------------


def test_retention_perfect_labeler_decay_factor_zero():
    u = make_universe(8, 5, seed=65)
    cfg = rational_boost_cfg(
        beta=Fraction(1), labeler=LabelerSpec(kind=ORACLE_PERFECT, beta=Fraction(1)),
        rounds=3, seed=2,
    )
    r = run_boosting(cfg, u)
    assert r.traces[0].failed.total() == 8
    assert r.traces[1].failed.total() == 0
    checks = {c.name: c for c in check_retention_event_and_decay(r)}
    assert checks["retention_event"].status == PASS
    assert checks["failure_decay"].status == PASS


def test_retention_full_report_passes_on_regime_run():
    u = make_universe(10, 5, seed=66)
    r = run_boosting(rational_boost_cfg(seed=19, rounds=5), u)
    report = run_all_checks(r)
    assert report.complete
    if r.event_held:
        for c in report.checks:
            assert c.status in (PASS, SKIPPED), c.line()


def test_retention_event_violation_reported_not_failed():
    # k=1 gives prompts with quality >= beta a real chance to be rejected
    u = make_universe(20, 6, seed=67)
    results = [
        run_boosting(rational_boost_cfg(k=1, rounds=6, seed=s), u) for s in range(8)
    ]
    violated = [r for r in results if not r.event_held]
    assert violated, "expected at least one violated run at k=1"
    checks = {c.name: c for c in check_retention_event_and_decay(violated[0])}
    assert checks["retention_event"].status == VIOLATED
    assert checks["retention_event"].ok
    assert checks["failure_decay"].status == SKIPPED


def test_retention_conditioned_checks_skip_on_no_focusing():
    u = make_universe(8, 5, seed=68)
    r = run_boosting(rational_boost_cfg(variant=BOOSTING_NO_FOCUSING, seed=4), u)
    checks = {c.name: c for c in check_retention_event_and_decay(r)}
    for name in ("failure_characterization", "failure_decay", "failure_prefix",
                 "exit_quality_floor"):
        if checks["retention_event"].status == PASS:
            assert checks[name].status == SKIPPED


def test_exit_quality_floor_exact_on_small_run():
    u = make_universe(6, 4, seed=69)
    r = run_boosting(rational_boost_cfg(rounds=5, seed=23), u)
    if r.event_held:
        checks = {c.name: c for c in check_retention_event_and_decay(r)}
        assert checks["exit_quality_floor"].status == PASS
        # and every exited prompt really is at or above beta afterwards
        for x in u.prompts:
            exit_round = max((tr.t for tr in r.traces if x in tr.failed), default=0)
            for tr in r.traces:
                if exit_round and exit_round < tr.t:
                    assert tr.avg_quality[x] >= Fraction(1, 2)


# -- per-round quality profiles -----------------------------------------------


def test_quality_profile_values_in_unit_interval():
    from boostsim.analysis import quality_profile

    u = make_universe(8, 5, seed=75)
    r = run_boosting(rational_boost_cfg(seed=14), u)
    for tr in r.traces:
        profile = quality_profile(tr, u)
        assert profile.round_index == tr.t
        for group in (profile.labeled, profile.kept, profile.mixture):
            assert all(0 <= q <= 1 for q in group.values())
        # labeled and kept cover exactly the prompts that got data that round
        assert set(profile.labeled) == set(tr.labeled.prompts())
        assert set(profile.kept) == set(tr.kept.prompts())
        assert set(profile.mixture) == set(u.prompts)
        # kept-side data is filtered, so its per-prompt quality is exactly 1
        assert all(q == 1 for q in profile.kept.values())


# -- float tolerance policy ---------------------------------------------------


def test_float_comparison_bands():
    assert _classify_equal(1.0, 1.0, "float") == PASS
    assert _classify_equal(1.0, 1.0 + 1e-12, "float") == PASS
    assert _classify_equal(1.0, 1.0 + 1e-8, "float") == WARN
    assert _classify_equal(1.0, 1.001, "float") == FAIL
    assert _classify_equal(Fraction(1), Fraction(1), RATIONAL) == PASS
    assert _classify_equal(Fraction(1), Fraction(1, 2), RATIONAL) == FAIL
