"""Reference sequential-trial engine and comparator designs.

One trial consumes a deterministic uniform stream derived from its seed:
exactly two variates per patient slot, laid out as
``U[2t]`` (assignment draw, unused by deterministic rules) and ``U[2t+1]``
(outcome draw). The vectorized Monte Carlo engine replays the identical
protocol, so a replication is bit-reproducible from its seed alone no matter
which engine ran it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .allocation import FIXED, admissible_set, assignment_decision, final_recommendation
from .config import Scenario, TrialConfig, check_compatible
from .criterion import posterior_update
from .types import ArmState


@dataclass(frozen=True)
class TrialRecord:
    """One simulated or conducted trial."""

    assignments: tuple[int, ...]
    outcomes: tuple[int, ...]
    recommendation: int | None
    terminated: bool
    states: tuple[ArmState, ...]

    def __post_init__(self) -> None:
        if len(self.assignments) != len(self.outcomes):
            raise ValueError("assignments and outcomes must have equal length")
        if self.terminated != (self.recommendation is None):
            raise ValueError("terminated must hold exactly when there is no recommendation")

    @property
    def treated(self) -> int:
        return len(self.assignments)


def uniform_stream(seed, count: int) -> np.ndarray:
    """The trial's deterministic uniform stream; seed may be an int or (seed, rep) tuple."""
    seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.PCG64(seq)).random(count)


def sample_outcome(cumulative: Sequence[float], u: float) -> int:
    """Inverse-CDF category draw; ``cumulative`` holds partial sums of the first d-1 probabilities."""
    for i, c in enumerate(cumulative):
        if u < c:
            return i
    return len(cumulative)


def run_trial(config: TrialConfig, scenario: Scenario, seed) -> TrialRecord:
    """Simulate one sequential trial of the configured design on a true scenario.

    Per patient: check the admissible set (terminate if empty), assign by the
    configured rule, sample the outcome from the assigned arm's true
    multinomial, update that arm's posterior. After the final patient the
    recommendation minimizes the unpenalized criterion over the admissible
    arms.
    """
    check_compatible(config, scenario)
    states = config.initial_states()
    params = config.criterion_params()
    n_max = config.max_patients
    u = uniform_stream(seed, 2 * n_max)
    cum_rows = [
        tuple(float(sum(row[: i + 1])) for i in range(len(row) - 1))
        for row in scenario.probabilities
    ]
    assignments: list[int] = []
    outcomes: list[int] = []
    terminated = False
    for t in range(n_max):
        decision = assignment_decision(config.rule, states, params, config.safety, u[2 * t])
        if decision.terminated:
            terminated = True
            break
        arm = decision.arm
        outcome = sample_outcome(cum_rows[arm], u[2 * t + 1])
        states[arm] = posterior_update(states[arm], outcome)
        assignments.append(arm)
        outcomes.append(outcome)
    if terminated:
        recommendation = None
    else:
        eligible = admissible_set(states, config.safety)
        recommendation = final_recommendation(states, config.gamma, sorted(eligible))
        terminated = recommendation is None
    return TrialRecord(
        assignments=tuple(assignments),
        outcomes=tuple(outcomes),
        recommendation=recommendation,
        terminated=terminated,
        states=tuple(states),
    )


def fixed_randomization_trial(config: TrialConfig, scenario: Scenario, seed) -> TrialRecord:
    """Equal-randomization comparator: uniform assignment, recommendation over all arms."""
    return run_trial(config.with_updates(rule=FIXED, safety=None), scenario, seed)


def _boundary_safe_delta(p: float, gamma: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return float("inf")
    d = p - gamma
    return 0.5 * d * d / (p * (1.0 - p))


def benchmark_trial(
    scenario: Scenario,
    gamma,
    n_patients: int,
    seed,
    event_outcome: int = 0,
    selection: str = "criterion",
) -> int:
    """Complete-information benchmark recommendation for binary scenarios.

    Each patient carries one latent uniform; the patient would experience the
    event on arm j exactly when the uniform falls below that arm's true event
    probability. Every arm's rate is estimated from all patients' full
    profiles and the arm closest to the target rate is recommended, ties split
    uniformly at random (one extra uniform per replication).

    ``selection`` picks the closeness measure: "euclidean" (absolute distance,
    the classical benchmark) or "criterion" (the variance-normalized
    divergence; boundary rates are never selected).
    """
    if scenario.outcomes != 2:
        raise ValueError("the benchmark supports binary outcomes only")
    if selection not in ("euclidean", "criterion"):
        raise ValueError(f"unknown benchmark selection {selection!r}")
    gamma_event = float(gamma) if isinstance(gamma, (int, float)) else gamma[event_outcome]
    alphas = [row[event_outcome] for row in scenario.probabilities]
    u = uniform_stream(seed, n_patients + 1)
    scores = []
    for alpha in alphas:
        rate = float(np.count_nonzero(u[:n_patients] < alpha)) / n_patients
        if selection == "euclidean":
            scores.append(abs(rate - gamma_event))
        else:
            scores.append(_boundary_safe_delta(rate, gamma_event))
    best = min(scores)
    ties = [j for j, s in enumerate(scores) if s == best]
    return ties[min(int(u[n_patients] * len(ties)), len(ties) - 1)]
