"""Built-in trial configurations and scenario suites.

These are the two response-rate trials (four arms, control first) and the
seven-arm toxicity study with its six true-scenario shapes, exactly as used by
the reproduction commands and the calibration defaults.
"""

from __future__ import annotations

from .allocation import RULE_I, RULE_II, SafetyConfig
from .config import ArmPrior, HypothesisTestConfig, Scenario, TrialConfig

PHASE2_TARGET = 0.999
PHASE2_PRIOR_MODE = 0.99

PHASE1_TARGET = 0.25
PHASE1_PRIOR_MODES = (0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55)
PHASE1_SAFETY = SafetyConfig(gamma_star=0.45, r=0.035, theta_final=0.3, toxicity_outcome=0)


def _binary_row(success_probability: float) -> tuple[float, float]:
    return (1.0 - success_probability, success_probability)


def response_trial_config(
    n_patients: int,
    rule: str = RULE_I,
    kappa: float = 0.5,
    seed: int = 0,
    cutoff: float | None = None,
) -> TrialConfig:
    """Four-arm response-rate design: control prior beta 5, competitors beta 2.

    The target success probability 0.999 encodes "find the most effective
    arm"; every arm starts from the optimistic prior mode 0.99.
    """
    mode = _binary_row(PHASE2_PRIOR_MODE)
    return TrialConfig(
        arms=4,
        outcomes=2,
        gamma=_binary_row(PHASE2_TARGET),
        priors=(
            ArmPrior(mode=mode, beta=5.0),
            ArmPrior(mode=mode, beta=2.0),
            ArmPrior(mode=mode, beta=2.0),
            ArmPrior(mode=mode, beta=2.0),
        ),
        max_patients=n_patients,
        kappa=kappa,
        rule=rule,
        testing=HypothesisTestConfig(control_index=0, alpha_target=0.05, cutoff=cutoff),
        seed=seed,
        success_outcome=1,
    )


def trial1_config(rule: str = RULE_I, kappa: float = 0.5, seed: int = 0) -> TrialConfig:
    return response_trial_config(423, rule=rule, kappa=kappa, seed=seed)


def trial2_config(rule: str = RULE_I, kappa: float = 0.5, seed: int = 0) -> TrialConfig:
    return response_trial_config(80, rule=rule, kappa=kappa, seed=seed)


def response_scenario(name: str, success_probabilities, target_index: int | None = 3) -> Scenario:
    return Scenario(
        name=name,
        probabilities=tuple(_binary_row(p) for p in success_probabilities),
        target_index=target_index,
    )


TRIAL1_NULL = response_scenario("trial1-null", (0.3, 0.3, 0.3, 0.3))
TRIAL1_ALTERNATIVE = response_scenario("trial1-alternative", (0.3, 0.3, 0.3, 0.5))
TRIAL2_NULL = response_scenario("trial2-null", (0.3, 0.3, 0.3, 0.3))
TRIAL2_ALTERNATIVE = response_scenario("trial2-alternative", (0.3, 0.4, 0.5, 0.6))


def toxicity_trial_config(
    seed: int = 0,
    kappa: float = 0.5,
    rule: str = RULE_II,
    safety: SafetyConfig | None = PHASE1_SAFETY,
    prior_modes=PHASE1_PRIOR_MODES,
    beta: float = 1.0,
    n_patients: int = 20,
) -> TrialConfig:
    """Seven-arm toxicity design: target rate 0.25, linear prior modes, safety on."""
    return TrialConfig(
        arms=len(prior_modes),
        outcomes=2,
        gamma=(PHASE1_TARGET, 1.0 - PHASE1_TARGET),
        priors=tuple(ArmPrior(mode=(m, 1.0 - m), beta=beta) for m in prior_modes),
        max_patients=n_patients,
        kappa=kappa,
        rule=rule,
        safety=safety,
        seed=seed,
        success_outcome=1,  # "success" = no toxicity
    )


def toxicity_scenario(name: str, tox_probabilities, target_index, no_safe_arm=False) -> Scenario:
    return Scenario(
        name=name,
        probabilities=tuple((t, 1.0 - t) for t in tox_probabilities),
        target_index=target_index,
        no_safe_arm=no_safe_arm,
    )


TOXICITY_SCENARIOS = (
    toxicity_scenario("scenario1-linear", (0.06, 0.12, 0.15, 0.18, 0.24, 0.36, 0.40), 4),
    toxicity_scenario("scenario2-logistic", (0.10, 0.18, 0.25, 0.32, 0.50, 0.68, 0.82), 2),
    toxicity_scenario("scenario3-j-shape", (0.15, 0.20, 0.50, 0.55, 0.60, 0.65, 0.70), 1),
    toxicity_scenario("scenario4-inverted-u", (0.05, 0.10, 0.40, 0.35, 0.25, 0.15, 0.12), 4),
    toxicity_scenario("scenario5-inverted-u", (0.35, 0.40, 0.40, 0.35, 0.25, 0.15, 0.10), 4),
    toxicity_scenario("scenario6-unsafe", (0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80), None, True),
)

SCENARIO_BY_NAME = {s.name: s for s in TOXICITY_SCENARIOS}

# Linear and unsafe extremes used for the safety-constraint grid search.
SAFETY_LINEAR_SCENARIO = TOXICITY_SCENARIOS[0]
SAFETY_UNSAFE_SCENARIO = TOXICITY_SCENARIOS[5]


def calibration_ladder(target_position: int, arms: int = 7, slope: float = 0.05) -> Scenario:
    """Linear toxicity ladder with the target dose at the given position."""
    rows = [min(max(PHASE1_TARGET + slope * (j - target_position), 0.02), 0.95) for j in range(arms)]
    return toxicity_scenario(f"ladder-t{target_position + 1}", rows, target_position)


# Prior-calibration suite: linear shapes with the target at the bottom, middle,
# and top of the dose range. The prior is calibrated on the unconstrained
# design (the safety parameters are chosen afterwards, in their own search).
CALIBRATION_SCENARIOS = tuple(calibration_ladder(t) for t in range(6))
