"""Arm assignment rules, the final recommendation, and the safety constraint.

All decision functions are pure; randomness is passed in explicitly (either a
generator or the raw uniform variate) so callers own determinism and event
logs can replay decisions exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from scipy.special import betainc

from .criterion import penalty
from .types import ArmState, CriterionParams, SimplexVector, UnsupportedRegimeError

RULE_I = "rule1"
RULE_II = "rule2"
FIXED = "fixed"

RULES = (RULE_I, RULE_II, FIXED)


@dataclass(frozen=True)
class SafetyConfig:
    """Time-varying overdose constraint for binary toxicity outcomes.

    An arm is admissible while its posterior probability of exceeding the
    overdose threshold ``gamma_star`` stays below theta(n) = max(1 - r*n,
    theta_final). ``scope`` selects whether n counts the whole trial's
    patients ("trial", default) or only the arm's own ("arm").
    """

    gamma_star: float
    r: float
    theta_final: float = 0.3
    toxicity_outcome: int = 0
    scope: str = "trial"

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma_star < 1.0:
            raise ValueError(f"gamma_star must lie in (0, 1), got {self.gamma_star}")
        if self.r < 0.0:
            raise ValueError(f"decay rate r must be non-negative, got {self.r}")
        if not 0.0 < self.theta_final <= 0.3:
            raise ValueError(
                f"theta_final must lie in (0, 0.3] so the final recommendation stays safe, "
                f"got {self.theta_final}"
            )
        if self.toxicity_outcome not in (0, 1):
            raise ValueError("toxicity_outcome must be 0 or 1 for binary outcomes")
        if self.scope not in ("trial", "arm"):
            raise ValueError(f"scope must be 'trial' or 'arm', got {self.scope!r}")


@dataclass(frozen=True)
class AllocationDecision:
    """Either an arm assignment or a termination signal.

    ``probabilities`` is populated for randomized (Rule I) assignments: the
    full per-arm vector, zero outside the admissible set.
    """

    kind: str  # "assign" | "terminate"
    arm: int | None = None
    probabilities: tuple[float, ...] | None = None

    @property
    def terminated(self) -> bool:
        return self.kind == "terminate"


def plugin_delta(state: ArmState, params: CriterionParams, trial_started: bool = True) -> float:
    """Plug-in criterion value for one arm.

    The posterior mode is evaluated with the arm's own sample-size penalty
    n^(2*kappa-1). Before the trial has any observation at all the prior-only
    criterion is used instead (penalty base beta), matching the prior-driven
    start of the sequential procedure.
    """
    base = float(state.n) if trial_started else state.beta
    pen = penalty(base, params.kappa)
    denom = state.n + state.beta
    if state.dimension == 2:
        # Single shared scalar path for binary arms; component 1 by convention
        # (symmetric in exact arithmetic, fixed here for bitwise reproducibility).
        p = (state.counts[1] + state.prior[1]) / denom
        g = params.gamma[1]
        d = p - g
        return 0.5 * d * d / (p * (1.0 - p)) * pen
    s = 0.0
    for g, x, v in zip(params.gamma, state.counts, state.prior):
        s += g * g / ((x + v) / denom)
    return max(0.5 * (s - 1.0), 0.0) * pen


def plugin_deltas(states: Sequence[ArmState], params: CriterionParams) -> list[float]:
    """Plug-in criterion values for all arms, honoring the prior-only trial start."""
    started = any(s.n > 0 for s in states)
    return [plugin_delta(s, params, trial_started=started) for s in states]


def randomization_probabilities(criterion_values: Sequence[float]) -> list[float]:
    """Rule-I probabilities: inverse-criterion weights, with zero-valued arms taking all mass.

    Arms whose criterion is exactly zero already sit on the target, so they
    share probability one uniformly; otherwise weights are proportional to
    1/delta.
    """
    values = list(criterion_values)
    if not values:
        raise ValueError("criterion_values must be non-empty")
    if any(v < 0.0 for v in values):
        raise ValueError(f"criterion values must be non-negative: {values}")
    zeros = [i for i, v in enumerate(values) if v == 0.0]
    if zeros:
        share = 1.0 / len(zeros)
        return [share if i in zeros else 0.0 for i in range(len(values))]
    inv = [1.0 / v for v in values]
    total = sum(inv)
    return [w / total for w in inv]


def select_best(criterion_values: Sequence[float], eligible: Sequence[int]) -> int:
    """Rule-II selection: eligible arm with minimal criterion, ties to the lowest index."""
    candidates = sorted(set(eligible))
    if not candidates:
        raise ValueError("eligible set is empty")
    best = candidates[0]
    for i in candidates[1:]:
        if criterion_values[i] < criterion_values[best]:
            best = i
    return best


def final_recommendation(
    states: Sequence[ArmState], gamma, eligible: Sequence[int]
) -> int | None:
    """Recommend the eligible arm minimizing the unpenalized (kappa=0.5) criterion.

    Returns None when no arm is eligible (terminated trial / no safe arm).
    The sample-size penalty is deliberately absent so the recommendation
    depends only on the posterior modes.
    """
    candidates = sorted(set(eligible))
    if not candidates:
        return None
    if not isinstance(gamma, SimplexVector):
        gamma = SimplexVector(gamma)
    params = CriterionParams(gamma=gamma, kappa=0.5)
    deltas = [plugin_delta(states[i], params) for i in candidates]
    best = 0
    for k in range(1, len(candidates)):
        if deltas[k] < deltas[best]:
            best = k
    return candidates[best]


def safety_threshold(n: int, cfg: SafetyConfig) -> float:
    """Overdose-probability cap after n patients: max(1 - r*n, theta_final)."""
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    return max(1.0 - cfg.r * n, cfg.theta_final)


def overdose_probability(state: ArmState, gamma_star: float, toxicity_outcome: int = 0) -> float:
    """Posterior probability that the toxicity rate exceeds ``gamma_star``.

    The binary posterior for the toxicity probability is Beta(x_t + v_t + 1,
    x_o + v_o + 1); the tail is one minus the regularized incomplete beta.
    """
    if state.dimension != 2:
        raise UnsupportedRegimeError("the safety constraint supports binary outcomes only")
    tox = toxicity_outcome
    other = 1 - tox
    a = state.counts[tox] + state.prior[tox] + 1.0
    b = state.counts[other] + state.prior[other] + 1.0
    return float(betainc(b, a, 1.0 - gamma_star))


def admissible_set(states: Sequence[ArmState], cfg: SafetyConfig | None) -> set[int]:
    """Arms whose overdose tail stays within the current safety threshold.

    With no safety configuration every arm is admissible. Under the default
    trial scope the threshold decays with the total number of treated
    patients; under arm scope with each arm's own count.
    """
    if cfg is None:
        return set(range(len(states)))
    total = sum(s.n for s in states)
    out = set()
    for j, state in enumerate(states):
        theta = safety_threshold(total if cfg.scope == "trial" else state.n, cfg)
        if overdose_probability(state, cfg.gamma_star, cfg.toxicity_outcome) <= theta:
            out.add(j)
    return out


def assignment_decision(
    rule: str,
    states: Sequence[ArmState],
    params: CriterionParams,
    cfg: SafetyConfig | None,
    u: float,
) -> AllocationDecision:
    """Pure assignment decision given one uniform variate ``u`` in [0, 1).

    Rule II and fixed randomization ignore their unused entropy; passing the
    variate explicitly keeps replays exact. Returns a termination decision
    when no arm is admissible.
    """
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    if not states:
        raise ValueError("at least one arm is required")
    m = len(states)
    if rule == FIXED:
        return AllocationDecision(kind="assign", arm=min(int(u * m), m - 1))
    admissible = sorted(admissible_set(states, cfg))
    if not admissible:
        return AllocationDecision(kind="terminate")
    deltas = plugin_deltas(states, params)
    if rule == RULE_II:
        return AllocationDecision(kind="assign", arm=select_best(deltas, admissible))
    sub = randomization_probabilities([deltas[i] for i in admissible])
    probs = [0.0] * m
    for i, p in zip(admissible, sub):
        probs[i] = p
    # Invert the CDF over admissible arms; u < 1 guarantees a hit.
    zeros = [i for i in admissible if deltas[i] == 0.0]
    if zeros:
        arm = zeros[min(int(u * len(zeros)), len(zeros) - 1)]
    else:
        cum = 0.0
        total = sum(1.0 / deltas[i] for i in admissible)
        x = u * total
        arm = admissible[-1]
        for i in admissible:
            cum += 1.0 / deltas[i]
            if cum > x:
                arm = i
                break
    return AllocationDecision(kind="assign", arm=arm, probabilities=tuple(probs))


def next_assignment(
    rule: str,
    states: Sequence[ArmState],
    params: CriterionParams,
    cfg: SafetyConfig | None,
    rng,
) -> AllocationDecision:
    """Draw the next assignment with the caller's generator (one uniform consumed)."""
    return assignment_decision(rule, states, params, cfg, rng.random())
