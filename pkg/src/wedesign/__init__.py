"""Weighted-entropy adaptive arm selection.

Criterion mathematics over Dirichlet posteriors, Rule I/II allocation with a
time-varying safety constraint, a deterministic Monte Carlo harness with
published-table reproduction, calibration grid searches, and a live
trial-conduct HTTP service.
"""

from .allocation import (
    AllocationDecision,
    SafetyConfig,
    admissible_set,
    final_recommendation,
    next_assignment,
    overdose_probability,
    randomization_probabilities,
    safety_threshold,
    select_best,
)
from .config import (
    ArmPrior,
    ConfigError,
    HypothesisTestConfig,
    Scenario,
    TrialConfig,
    load_config,
    load_scenario,
)
from .criterion import (
    criterion,
    criterion_binary,
    criterion_gradient_binary,
    dirichlet_entropy,
    gain_asymptotic,
    information_gain,
    normal_approx,
    pcs_lower_bound,
    posterior_mode,
    posterior_update,
    weighted_dirichlet_entropy,
)
from .engine import TrialRecord, benchmark_trial, fixed_randomization_trial, run_trial
from .montecarlo import (
    OperatingCharacteristics,
    benchmark_monte_carlo,
    run_monte_carlo,
    simulate_replications,
)
from .testing import calibrate_cutoff, evaluate_hypotheses, fisher_exact_pvalue, kappa_sweep
from .types import ArmState, CriterionParams, NormalApprox, SimplexVector, UnsupportedRegimeError

__version__ = "0.1.0"
