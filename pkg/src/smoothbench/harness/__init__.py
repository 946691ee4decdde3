"""CLI experiment harness: configs, runners, CSV/JSON emission."""

from .config import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    apply_overrides,
    config_from_dict,
    load_config,
    parse_kv_text,
    with_defaults,
)
from .experiments import (
    RateCurve,
    RateRow,
    RegretRow,
    StabilityRow,
    SparseRow,
    RegimeRow,
    MarginRow,
    check_result,
    fit_slope,
    run_and_emit,
    run_experiment,
    run_margin_experiment,
    run_rate_experiment,
    run_regime_experiment,
    run_regret_experiment,
    run_sparse_experiment,
    run_stability_experiment,
    seed_for,
    sparse_slopes,
    write_csv,
    write_meta,
)
