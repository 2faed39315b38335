"""boostsim: an exact discrete simulator for curated synthetic-data training.

The package models an idealized loop in which a strong learner is
repeatedly refit on a growing mixture of self-generated data, noisily
filtered for correctness, and weakly labeled exogenous data, then checks
the loop's convergence behavior both statistically (trial ensembles) and
algebraically (exact-rational identity checkers on run traces).
"""

from .analysis import (
    CheckResult,
    LemmaReport,
    QualityProfile,
    TheoremBounds,
    check_label_quality_binary,
    check_mediant_inequality,
    check_quality_identity,
    check_retention_event_and_decay,
    check_zero_quality_propagation,
    closed_form_avg_quality,
    quality_profile,
    run_all_checks,
    theorem_bounds,
)
from .datasets import (
    FLOAT,
    INFINITE,
    RATIONAL,
    DatasetError,
    PromptMultiset,
    WeightedDataset,
    conditional,
    weight_of,
    weighted_union,
)
from .engine import (
    BOOSTING,
    BOOSTING_NO_FOCUSING,
    DO_NOTHING,
    FILTER_ONLY,
    VARIANTS,
    BoostConfig,
    ConfigError,
    IterationTrace,
    RunResult,
    run_boosting,
    run_do_nothing,
    run_filter_only,
    run_variant,
    success_probability,
)
from .harness import (
    ExperimentConfig,
    SweepResult,
    demo_config,
    emit_csv,
    load_config,
    run_experiment,
    run_single,
)
from .oracles import (
    ADVERSARIAL_EASIEST,
    BUDGET_A,
    BUDGET_B,
    ORACLE_PERFECT,
    FilterOutcome,
    LabelerSpec,
    OracleError,
    TabularModel,
    generate,
    initial_wrong_model,
    label,
    learner,
    noisy_filter,
    random_prompt_subset,
    sample,
    warm_start_model,
)
from .rng import derive_seed, substream
from .traceio import read_trace, write_trace
from .worlds import TaskUniverse, UniverseError, make_universe, quality

__version__ = "0.1.0"
