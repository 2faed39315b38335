"""Calibration run behind the variant-ordering acceptance margins.

Runs the two paired comparisons at 1000 trials each and prints the mean
final-success gaps with their standard errors. The acceptance suite runs
the same configs at 100 trials and asserts each gap exceeds a margin
frozen from this output (gap minus five standard errors at 100 trials,
rounded down).

Usage: python demos/calibrate_ordering.py [trials]
"""

import statistics
import sys

from boostsim.engine import BOOSTING, BOOSTING_NO_FOCUSING, DO_NOTHING, FILTER_ONLY
from boostsim.harness import ExperimentConfig, run_experiment


def ordering_configs(trials: int, seed: int = 2025):
    """The two paired comparisons of the ordering experiment."""
    focus = ExperimentConfig(
        prompts=50, responses=20, correct_per_prompt=1,
        variants=(BOOSTING, BOOSTING_NO_FOCUSING),
        trials=trials, seed=seed, checks=False,
        alpha=1 / 3, beta=0.3, gamma=1.0, k=4, rounds=6,
    )
    warm = ExperimentConfig(
        prompts=50, responses=20, correct_per_prompt=1,
        variants=(FILTER_ONLY, DO_NOTHING),
        trials=trials, seed=seed, checks=False,
        alpha=0, beta=0.3, gamma=1.0, k=8, rounds=6,
        initial_success=0.5,
    )
    return focus, warm


def mean_final(result, variant):
    finals = [
        float(result.final_success(variant, trial))
        for trial in range(result.config.trials)
    ]
    return statistics.fmean(finals), statistics.stdev(finals)


def main():
    trials = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    focus_cfg, warm_cfg = ordering_configs(trials)

    focus = run_experiment(focus_cfg)
    m_boost, s_boost = mean_final(focus, BOOSTING)
    m_nf, s_nf = mean_final(focus, BOOSTING_NO_FOCUSING)
    se = (s_boost**2 / trials + s_nf**2 / trials) ** 0.5
    print(f"boosting            mean={m_boost:.4f} sd={s_boost:.4f}")
    print(f"boosting-no-focus   mean={m_nf:.4f} sd={s_nf:.4f}")
    print(f"gap={m_boost - m_nf:.4f} se={se:.5f}")

    warm = run_experiment(warm_cfg)
    m_f, s_f = mean_final(warm, FILTER_ONLY)
    m_d, s_d = mean_final(warm, DO_NOTHING)
    se2 = (s_f**2 / trials + s_d**2 / trials) ** 0.5
    print(f"filter-only (warm)  mean={m_f:.4f} sd={s_f:.4f}")
    print(f"do-nothing (warm)   mean={m_d:.4f} sd={s_d:.4f}")
    print(f"gap={m_f - m_d:.4f} se={se2:.5f}")


if __name__ == "__main__":
    main()
