"""Global-local shrinkage posteriors for sparse normal means.

Exact per-observation posterior quantities for the one-group prior class
pi(lambda^2) = K (lambda^2)^(-a-1) L(lambda^2), executable analytic
envelopes for those quantities, the two-groups Bayes oracle with the
induced 0.5-threshold multiple-testing rules, and a reproducible
experiment harness for risk, spread, contraction, and oracle-risk-ratio
sweeps.
"""

from .errors import (
    ConfigError,
    NumericalError,
    QuadratureError,
    ShrinkError,
    TableError,
    ThresholdError,
    UnknownFamilyError,
    ValidationError,
)
from .families import (
    PriorFamily,
    TailRegularityReport,
    check_tail_regularity,
    custom_family,
    default_probe_grid,
    eval_L,
    make_family,
    registered_families,
)
from .posterior import (
    PosteriorQuery,
    PosteriorSummary,
    decision_threshold,
    kappa_density,
    kappa_moment,
    kappa_tail_prob,
    posterior_mean,
    posterior_summary,
    posterior_variance,
    sample_posterior,
)
from .bounds import (
    BoundParams,
    KernelIntegralResult,
    concentration_bound,
    kappa_envelope,
    mean_gap_envelope,
    moment_bound,
    type1_rate_forms,
    variance_tail_term,
    weight_kernel_integral,
)
from .two_groups import (
    DecisionReport,
    EmpiricalBayesConfig,
    TwoGroupsModel,
    abos_limit,
    empirical_bayes_tau,
    exact_rule_errors,
    induced_rule_errors,
    oracle_asymptotics,
    oracle_threshold,
)
from .experiments import (
    ExperimentConfig,
    ShrinkageTable,
    SparseMeanScenario,
    abos_experiment,
    build_asymptotic_sequence,
    contraction_experiment,
    eb_risk_experiment,
    estimation_risk_experiment,
    minimax_risk,
    posterior_spread_experiment,
    simulate_nearly_black,
)

__version__ = "0.1.0"

__all__ = [
    "BoundParams",
    "ConfigError",
    "DecisionReport",
    "EmpiricalBayesConfig",
    "ExperimentConfig",
    "KernelIntegralResult",
    "NumericalError",
    "PosteriorQuery",
    "PosteriorSummary",
    "PriorFamily",
    "QuadratureError",
    "ShrinkError",
    "ShrinkageTable",
    "SparseMeanScenario",
    "TableError",
    "TailRegularityReport",
    "ThresholdError",
    "TwoGroupsModel",
    "UnknownFamilyError",
    "ValidationError",
    "abos_experiment",
    "abos_limit",
    "build_asymptotic_sequence",
    "check_tail_regularity",
    "concentration_bound",
    "contraction_experiment",
    "custom_family",
    "decision_threshold",
    "default_probe_grid",
    "eb_risk_experiment",
    "empirical_bayes_tau",
    "estimation_risk_experiment",
    "eval_L",
    "exact_rule_errors",
    "induced_rule_errors",
    "kappa_density",
    "kappa_envelope",
    "kappa_moment",
    "kappa_tail_prob",
    "make_family",
    "mean_gap_envelope",
    "minimax_risk",
    "moment_bound",
    "oracle_asymptotics",
    "oracle_threshold",
    "posterior_mean",
    "posterior_spread_experiment",
    "posterior_summary",
    "posterior_variance",
    "registered_families",
    "sample_posterior",
    "simulate_nearly_black",
    "type1_rate_forms",
    "variance_tail_term",
    "weight_kernel_integral",
    "__version__",
]
