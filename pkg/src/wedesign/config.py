"""Trial configuration and scenario definitions, with their JSON wire format.

The JSON schema (documented in the README) is shared by the CLI, the conduct
service, and scenario files; validation lives here so every surface rejects
the same malformed inputs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .allocation import RULES, RULE_II, SafetyConfig
from .types import ArmState, CriterionParams, SimplexVector


class ConfigError(ValueError):
    """A configuration document failed to parse or validate."""

    def __init__(self, message: str, field_name: str | None = None):
        super().__init__(message)
        self.field_name = field_name


@dataclass(frozen=True)
class ArmPrior:
    """Prior for one arm, given as (mode vector, total pseudo-count beta)."""

    mode: tuple[float, ...]
    beta: float

    def __post_init__(self) -> None:
        SimplexVector(self.mode)  # validates interior + sum
        if self.beta <= 0.0:
            raise ConfigError(f"prior beta must be positive, got {self.beta}", "priors")

    def pseudocounts(self) -> tuple[float, ...]:
        """v = beta * mode, so the prior Dirichlet mode is exactly the given vector."""
        return tuple(self.beta * m for m in self.mode)


@dataclass(frozen=True)
class HypothesisTestConfig:
    """Pairwise exact-test setup against a control arm with Bonferroni correction.

    ``cutoff`` is the calibrated threshold on the Bonferroni-scaled minimum
    p-value; leave it None until calibration has produced one.
    """

    control_index: int = 0
    alpha_target: float = 0.05
    cutoff: float | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha_target < 1.0:
            raise ConfigError(f"alpha_target must lie in [0, 1), got {self.alpha_target}")
        if self.cutoff is not None and not 0.0 <= self.cutoff <= 1.0:
            raise ConfigError(f"cutoff must lie in [0, 1], got {self.cutoff}")


@dataclass(frozen=True)
class TrialConfig:
    """Full specification of one design: arms, target, rule, priors, safety, testing."""

    arms: int
    outcomes: int
    gamma: tuple[float, ...]
    priors: tuple[ArmPrior, ...]
    max_patients: int
    kappa: float = 0.5
    rule: str = RULE_II
    safety: SafetyConfig | None = None
    testing: HypothesisTestConfig | None = None
    seed: int = 0
    success_outcome: int = 1
    experimental_low_kappa: bool = False

    def __post_init__(self) -> None:
        if self.arms < 1:
            raise ConfigError(f"need at least one arm, got {self.arms}", "arms")
        if self.outcomes < 2:
            raise ConfigError(f"need at least two outcome categories, got {self.outcomes}", "outcomes")
        if len(self.gamma) != self.outcomes:
            raise ConfigError(
                f"gamma has {len(self.gamma)} components for {self.outcomes} outcomes", "gamma"
            )
        if len(self.priors) != self.arms:
            raise ConfigError(f"{len(self.priors)} priors for {self.arms} arms", "priors")
        for p in self.priors:
            if len(p.mode) != self.outcomes:
                raise ConfigError("prior mode dimension does not match outcomes", "priors")
        if self.max_patients < 1:
            raise ConfigError(f"max_patients must be positive, got {self.max_patients}", "max_patients")
        if self.rule not in RULES:
            raise ConfigError(f"rule must be one of {RULES}, got {self.rule!r}", "rule")
        if self.safety is not None and self.outcomes != 2:
            raise ConfigError("the safety constraint supports binary outcomes only", "safety")
        if not 0 <= self.success_outcome < self.outcomes:
            raise ConfigError(f"success_outcome {self.success_outcome} out of range", "success_outcome")
        if self.testing is not None and not 0 <= self.testing.control_index < self.arms:
            raise ConfigError("testing.control_index out of range", "testing")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative (it feeds the stream derivation)", "seed")
        self.criterion_params()  # validates gamma + kappa

    def criterion_params(self) -> CriterionParams:
        return CriterionParams(
            gamma=SimplexVector(self.gamma),
            kappa=self.kappa,
            experimental_low_kappa=self.experimental_low_kappa,
        )

    def initial_states(self) -> list[ArmState]:
        return [ArmState(p.pseudocounts()) for p in self.priors]

    def with_updates(self, **changes: Any) -> "TrialConfig":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True)
class Scenario:
    """True outcome probabilities per arm, with the ground-truth target when defined.

    Rows may touch the simplex boundary (a deterministic outcome is a valid
    truth to simulate); the target, when present, must minimize the
    unpenalized criterion against the configured gamma, which is checked when
    the scenario is paired with a config.
    """

    name: str
    probabilities: tuple[tuple[float, ...], ...]
    target_index: int | None = None
    no_safe_arm: bool = False

    def __post_init__(self) -> None:
        if not self.probabilities:
            raise ConfigError("scenario needs at least one arm", "probabilities")
        d = len(self.probabilities[0])
        for row in self.probabilities:
            if len(row) != d:
                raise ConfigError("all probability rows must have equal length", "probabilities")
            if any(p < 0.0 or p > 1.0 for p in row):
                raise ConfigError(f"probabilities must lie in [0, 1]: {row}", "probabilities")
            if abs(sum(row) - 1.0) > 1e-9:
                raise ConfigError(f"probability row sums to {sum(row)!r}, not 1: {row}", "probabilities")
        if self.target_index is not None and not 0 <= self.target_index < len(self.probabilities):
            raise ConfigError(f"target_index {self.target_index} out of range", "target_index")

    @property
    def arms(self) -> int:
        return len(self.probabilities)

    @property
    def outcomes(self) -> int:
        return len(self.probabilities[0])


def unpenalized_delta(row: Sequence[float], gamma: Sequence[float]) -> float:
    """Criterion value of a probability row (kappa=0.5); infinite on the boundary."""
    s = 0.0
    for g, a in zip(gamma, row):
        if a == 0.0:
            if g > 0.0:
                return float("inf")
            continue
        s += g * g / a
    return max(0.5 * (s - 1.0), 0.0)


def check_compatible(config: TrialConfig, scenario: Scenario) -> None:
    """Reject config/scenario pairs with mismatched shapes or a wrong target claim."""
    if scenario.arms != config.arms:
        raise ConfigError(
            f"scenario {scenario.name!r} has {scenario.arms} arms, config has {config.arms}"
        )
    if scenario.outcomes != config.outcomes:
        raise ConfigError(
            f"scenario {scenario.name!r} has {scenario.outcomes} outcomes, config has {config.outcomes}"
        )
    if scenario.target_index is not None:
        deltas = [unpenalized_delta(row, config.gamma) for row in scenario.probabilities]
        if deltas[scenario.target_index] > min(deltas) + 1e-9:
            raise ConfigError(
                f"scenario {scenario.name!r}: target_index {scenario.target_index} does not "
                f"minimize the criterion against gamma (deltas {deltas})"
            )


# ---------------------------------------------------------------------------
# JSON (de)serialization


def _require(data: dict, key: str, kind, where: str):
    if key not in data:
        raise ConfigError(f"{where}: missing required field {key!r}", key)
    value = data[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"{where}: field {key!r} has wrong type", key)
    return value


def config_from_dict(data: dict) -> TrialConfig:
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    where = "config"
    arms = _require(data, "arms", int, where)
    outcomes = _require(data, "outcomes", int, where)
    gamma = tuple(float(g) for g in _require(data, "gamma", list, where))
    priors_raw = _require(data, "priors", list, where)
    try:
        priors = tuple(
            ArmPrior(mode=tuple(float(m) for m in p["mode"]), beta=float(p["beta"]))
            for p in priors_raw
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"config: malformed prior entry ({exc})", "priors") from exc
    safety = None
    if data.get("safety") is not None:
        s = data["safety"]
        try:
            safety = SafetyConfig(
                gamma_star=float(s["gamma_star"]),
                r=float(s["r"]),
                theta_final=float(s.get("theta_final", 0.3)),
                toxicity_outcome=int(s.get("toxicity_outcome", 0)),
                scope=str(s.get("scope", "trial")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"config: malformed safety block ({exc})", "safety") from exc
    testing = None
    if data.get("testing") is not None:
        t = data["testing"]
        try:
            testing = HypothesisTestConfig(
                control_index=int(t.get("control_index", 0)),
                alpha_target=float(t.get("alpha_target", 0.05)),
                cutoff=None if t.get("cutoff") is None else float(t["cutoff"]),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config: malformed testing block ({exc})", "testing") from exc
    # Domain validation errors (ValueError subclasses other than ConfigError)
    # propagate as invariant violations rather than parse errors.
    return TrialConfig(
        arms=arms,
        outcomes=outcomes,
        gamma=gamma,
        priors=priors,
        max_patients=_require(data, "max_patients", int, where),
        kappa=float(data.get("kappa", 0.5)),
        rule=str(data.get("rule", RULE_II)).lower(),
        safety=safety,
        testing=testing,
        seed=int(data.get("seed", 0)),
        success_outcome=int(data.get("success_outcome", 1)),
        experimental_low_kappa=bool(data.get("experimental_low_kappa", False)),
    )


def config_to_dict(config: TrialConfig) -> dict:
    out: dict[str, Any] = {
        "arms": config.arms,
        "outcomes": config.outcomes,
        "gamma": list(config.gamma),
        "priors": [{"mode": list(p.mode), "beta": p.beta} for p in config.priors],
        "max_patients": config.max_patients,
        "kappa": config.kappa,
        "rule": config.rule,
        "seed": config.seed,
        "success_outcome": config.success_outcome,
    }
    if config.experimental_low_kappa:
        out["experimental_low_kappa"] = True
    if config.safety is not None:
        out["safety"] = {
            "gamma_star": config.safety.gamma_star,
            "r": config.safety.r,
            "theta_final": config.safety.theta_final,
            "toxicity_outcome": config.safety.toxicity_outcome,
            "scope": config.safety.scope,
        }
    if config.testing is not None:
        out["testing"] = {
            "control_index": config.testing.control_index,
            "alpha_target": config.testing.alpha_target,
            "cutoff": config.testing.cutoff,
        }
    return out


def scenario_from_dict(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ConfigError("scenario document must be a JSON object")
    probs = _require(data, "probabilities", list, "scenario")
    try:
        rows = tuple(tuple(float(p) for p in row) for row in probs)
    except TypeError as exc:
        raise ConfigError("scenario: probabilities must be an m x d matrix", "probabilities") from exc
    target = data.get("target_index")
    return Scenario(
        name=str(data.get("name", "scenario")),
        probabilities=rows,
        target_index=None if target is None else int(target),
        no_safe_arm=bool(data.get("no_safe_arm", False)),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    return {
        "name": scenario.name,
        "probabilities": [list(row) for row in scenario.probabilities],
        "target_index": scenario.target_index,
        "no_safe_arm": scenario.no_safe_arm,
    }


def _load_json(path: str | Path, what: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"{what} file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {p} is not valid JSON: {exc}") from exc


def load_config(path: str | Path) -> TrialConfig:
    return config_from_dict(_load_json(path, "config"))


def load_scenario(path: str | Path) -> Scenario:
    return scenario_from_dict(_load_json(path, "scenario"))
