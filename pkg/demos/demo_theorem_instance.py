"""One full curation run at the sufficient (rounds, samples) bounds.

Sizes the run with the bound calculator, executes the boosting loop on a
50-prompt universe, then replays every checker on the traces. With an
adversarial labeler that answers only the easiest half of what it is
asked, the final model still answers nearly every prompt correctly.
"""

from boostsim.analysis import run_all_checks, theorem_bounds
from boostsim.engine import BOOSTING, BoostConfig, run_boosting
from boostsim.oracles import ADVERSARIAL_EASIEST, LabelerSpec
from boostsim.worlds import make_universe

epsilon, alpha, beta, gamma = 0.2, 0.2, 0.5, 1.0
bounds = theorem_bounds(epsilon, alpha, beta, gamma, prompt_count=50)
print(f"sufficient rounds T_min={bounds.t_min}, samples per prompt k_min={bounds.k_min}")

universe = make_universe(50, 20, seed=7)
cfg = BoostConfig(
    alpha=alpha, beta=beta, gamma=gamma,
    k=bounds.k_min, rounds=bounds.t_min, variant=BOOSTING,
    labeler=LabelerSpec(kind=ADVERSARIAL_EASIEST, beta=beta), seed=7,
)
run = run_boosting(cfg, universe)

print("\nround  failing  label_weight  success")
for tr in run.traces:
    print(f"{tr.t:>5}  {tr.failed.total():>7}  {tr.label_weight!s:>12}  {tr.success:.4f}")
print(f"\nfinal success {run.final_success:.4f} (target >= {1 - epsilon})")
print("retention event held:", run.event_held)

print("\ncheckers on the run's traces:")
for line in run_all_checks(run).lines():
    print(" ", line)
