"""The four curation variants side by side on paired trials.

Recursive training with no curation drifts (and from an all-wrong start
stays at zero); keeping only filtered responses preserves what the model
already knows; adding weakly labeled data converges; directing labels at
the currently-failing prompts converges faster than labeling at random.
"""

import statistics

from boostsim.engine import BOOSTING, BOOSTING_NO_FOCUSING, DO_NOTHING, FILTER_ONLY
from boostsim.harness import ExperimentConfig, run_experiment

TRIALS = 20
cfg = ExperimentConfig(
    prompts=50, responses=20, correct_per_prompt=1,
    variants=(DO_NOTHING, FILTER_ONLY, BOOSTING_NO_FOCUSING, BOOSTING),
    trials=TRIALS, seed=99, checks=False,
    alpha=1 / 3, beta=0.3, gamma=1.0, k=4, rounds=6,
    initial_success=0.5,  # warm start for the two labeler-free baselines
)
result = run_experiment(cfg)

print(f"mean success per round over {TRIALS} paired trials\n")
rounds = range(1, cfg.rounds + 1)
print("variant              " + "  ".join(f"t={t}" for t in rounds))
for variant in cfg.variants:
    means = []
    for t in rounds:
        vals = [
            float(r.success)
            for r in result.rows
            if r.variant == variant and r.t == t
        ]
        means.append(statistics.fmean(vals))
    print(f"{variant:<20} " + "  ".join(f"{m:.3f}" for m in means))

print("\nfinal-round ordering (best to worst):")
finals = {
    v: statistics.fmean(float(result.final_success(v, t)) for t in range(TRIALS))
    for v in cfg.variants
}
for v, m in sorted(finals.items(), key=lambda kv: -kv[1]):
    print(f"  {v:<22} {m:.3f}")
