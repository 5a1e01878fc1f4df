"""Grid searches for the operational prior and the safety-constraint parameters.

The prior search scores each (beta, step) cell by the geometric mean of the
probability of correct selection across a scenario suite; the safety search
reports, per (gamma*, r) cell, the termination rate in an unsafe scenario
against the correct-selection rate in a flat linear scenario.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .allocation import SafetyConfig
from .config import ArmPrior, Scenario, TrialConfig
from .montecarlo import run_monte_carlo


@dataclass(frozen=True)
class PriorGrid:
    """Candidate prior strengths and mode spreads, anchored at the target rate."""

    beta_values: tuple[float, ...]
    step_values: tuple[float, ...]
    base_mode: float

    def __post_init__(self) -> None:
        if not self.beta_values or not self.step_values:
            raise ValueError("grid axes must be non-empty")
        if any(b <= 0 for b in self.beta_values):
            raise ValueError("beta values must be positive")
        if not 0.0 < self.base_mode < 1.0:
            raise ValueError("base_mode must lie in (0, 1)")

    def modes_for_step(self, step: float, arms: int) -> list[float] | None:
        """Linearly interpolated event-rate modes from base to base+step; None when invalid."""
        modes = [self.base_mode + step * j / (arms - 1) for j in range(arms)]
        if any(not 0.0 < mo < 1.0 for mo in modes):
            return None
        return modes


@dataclass(frozen=True)
class PriorCell:
    beta: float
    step: float
    valid: bool
    pcs: tuple[float, ...]  # per scenario
    pcs_se: tuple[float, ...]
    geometric_mean: float
    geometric_mean_se: float


@dataclass(frozen=True)
class CalibrationResult:
    cells: tuple[PriorCell, ...]
    best: PriorCell

    def cell(self, beta: float, step: float) -> PriorCell:
        for c in self.cells:
            if c.beta == beta and c.step == step:
                return c
        raise KeyError(f"no grid cell ({beta}, {step})")

    def plateau(self, within_se: float = 2.0) -> list[PriorCell]:
        """Cells statistically indistinguishable from the best one."""
        cutoff = self.best.geometric_mean - within_se * max(
            self.best.geometric_mean_se, 1e-12
        )
        return [c for c in self.cells if c.valid and c.geometric_mean >= cutoff]


def _geometric_mean(values: Sequence[float], ses: Sequence[float]) -> tuple[float, float]:
    if any(v <= 0.0 for v in values):
        return 0.0, 0.0
    logs = [math.log(v) for v in values]
    gm = math.exp(sum(logs) / len(logs))
    # delta method on the log scale
    var = sum((se / v) ** 2 for v, se in zip(values, ses)) / len(values) ** 2
    return gm, gm * math.sqrt(var)


def _scenario_pcs(oc, scenario: Scenario) -> tuple[float, float]:
    return oc.pcs, oc.pcs_se


def prior_grid_search(
    grid: PriorGrid,
    scenarios: Sequence[Scenario],
    config: TrialConfig,
    replications: int,
    parallelism: int = 1,
) -> CalibrationResult:
    """Score every (beta, step) cell by geometric-mean PCS over the scenario suite.

    The best cell maximizes the geometric mean; ties within one standard error
    are broken toward the smallest beta (weakest usable prior), then the
    smallest step.
    """
    if not scenarios:
        raise ValueError("scenario suite must be non-empty")
    cells: list[PriorCell] = []
    for beta in grid.beta_values:
        for step in grid.step_values:
            modes = grid.modes_for_step(step, config.arms)
            if modes is None:
                cells.append(
                    PriorCell(beta, step, False, (), (), float("nan"), float("nan"))
                )
                continue
            priors = tuple(ArmPrior(mode=(mo, 1.0 - mo), beta=beta) for mo in modes)
            cfg = config.with_updates(priors=priors)
            pcs, ses = [], []
            for scenario in scenarios:
                oc = run_monte_carlo(cfg, scenario, replications, parallelism=parallelism)
                p, se = _scenario_pcs(oc, scenario)
                pcs.append(p)
                ses.append(se)
            gm, gm_se = _geometric_mean(pcs, ses)
            cells.append(PriorCell(beta, step, True, tuple(pcs), tuple(ses), gm, gm_se))
    valid = [c for c in cells if c.valid]
    if not valid:
        raise ValueError("no valid grid cell (all interpolated modes left (0, 1))")
    top = max(c.geometric_mean for c in valid)
    best = min(
        (c for c in valid if c.geometric_mean >= top - max(c.geometric_mean_se, 1e-12)),
        key=lambda c: (c.beta, c.step),
    )
    return CalibrationResult(cells=tuple(cells), best=best)


@dataclass(frozen=True)
class SafetyCell:
    gamma_star: float
    r: float
    termination_rate: float
    termination_se: float
    pcs: float
    pcs_se: float


def safety_grid_search(
    gamma_star_values: Sequence[float],
    r_values: Sequence[float],
    linear_scenario: Scenario,
    unsafe_scenario: Scenario,
    config: TrialConfig,
    replications: int,
    parallelism: int = 1,
) -> list[SafetyCell]:
    """Termination rate (unsafe scenario) and PCS (linear scenario) per (gamma*, r) cell."""
    if not unsafe_scenario.no_safe_arm:
        raise ValueError("unsafe_scenario must be flagged no_safe_arm")
    cells = []
    for gs in gamma_star_values:
        for r in r_values:
            base = config.safety or SafetyConfig(gamma_star=gs, r=r)
            safety = SafetyConfig(
                gamma_star=gs,
                r=r,
                theta_final=base.theta_final,
                toxicity_outcome=base.toxicity_outcome,
                scope=base.scope,
            )
            cfg = config.with_updates(safety=safety)
            unsafe = run_monte_carlo(cfg, unsafe_scenario, replications, parallelism=parallelism)
            linear = run_monte_carlo(cfg, linear_scenario, replications, parallelism=parallelism)
            cells.append(
                SafetyCell(
                    gamma_star=gs,
                    r=r,
                    termination_rate=unsafe.termination_rate,
                    termination_se=unsafe.termination_rate_se,
                    pcs=linear.pcs,
                    pcs_se=linear.pcs_se,
                )
            )
    return cells
