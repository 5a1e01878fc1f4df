"""Monte Carlo driver: replication batches, operating characteristics, parallelism.

Each replication owns the deterministic uniform stream derived from
(config.seed, replication index), so results are independent of block sizes,
worker counts, and execution order; aggregation reduces rep-indexed arrays in
a fixed order. The binary fast path and the reference engine produce
identical replications (tested), and the generic engine covers d > 2.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import fastmc
from .config import Scenario, TrialConfig, check_compatible
from .engine import benchmark_trial, run_trial

# Upper bound on uniforms held in memory per block (~32 MB).
_BLOCK_DOUBLES = 4_000_000


@dataclass(frozen=True)
class RepOutcomes:
    """Raw per-replication results on which every metric is computed."""

    counts: np.ndarray  # (R, arms, outcomes) final observation counts
    treated: np.ndarray  # (R,) patients treated
    recommendation: np.ndarray  # (R,) recommended arm, -1 for none
    terminated: np.ndarray  # (R,) early or final termination

    @property
    def replications(self) -> int:
        return len(self.treated)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    sd: float
    se: float


def _summary(column: np.ndarray) -> MetricSummary:
    r = len(column)
    mean = float(np.mean(column))
    sd = float(np.std(column, ddof=1)) if r > 1 else 0.0
    return MetricSummary(mean=mean, sd=sd, se=sd / math.sqrt(r) if r > 1 else 0.0)


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Aggregated design metrics over replications, with spreads.

    ``*_sd`` is the across-replication standard deviation (the spread the
    published tables quote in parentheses); ``*_se`` is the Monte Carlo
    standard error of the reported mean.
    """

    replications: int
    pcs: float
    pcs_se: float
    ens: float
    ens_sd: float
    ens_se: float
    p_star: float
    p_star_sd: float
    p_star_se: float
    mean_toxicities: float
    mean_toxicities_sd: float
    mean_toxicities_se: float
    termination_rate: float
    termination_rate_se: float
    mean_n: float
    mean_n_sd: float
    mean_n_se: float
    selection_proportions: tuple[float, ...]
    selection_proportions_se: tuple[float, ...]
    rejection_rate: float | None = None
    rejection_rate_se: float | None = None

    def as_dict(self) -> dict:
        out = {
            "replications": self.replications,
            "pcs": self.pcs,
            "pcs_se": self.pcs_se,
            "ens": self.ens,
            "ens_sd": self.ens_sd,
            "ens_se": self.ens_se,
            "p_star": self.p_star,
            "p_star_sd": self.p_star_sd,
            "p_star_se": self.p_star_se,
            "tox": self.mean_toxicities,
            "tox_sd": self.mean_toxicities_sd,
            "tox_se": self.mean_toxicities_se,
            "term": self.termination_rate,
            "term_se": self.termination_rate_se,
            "mean_n": self.mean_n,
            "mean_n_sd": self.mean_n_sd,
            "mean_n_se": self.mean_n_se,
            "power": self.rejection_rate,
            "power_se": self.rejection_rate_se,
        }
        for j, (p, se) in enumerate(
            zip(self.selection_proportions, self.selection_proportions_se)
        ):
            out[f"select_{j}"] = p
            out[f"select_{j}_se"] = se
        return out


def _blocks(replications: int, n_max: int) -> list[tuple[int, int]]:
    size = max(1, min(replications, _BLOCK_DOUBLES // max(2 * n_max, 1)))
    return [(start, min(size, replications - start)) for start in range(0, replications, size)]


def _fast_block(args) -> dict:
    config, scenario, start, count = args
    return fastmc.simulate_block(config, scenario, start, count)


def _reference_block(args) -> dict:
    config, scenario, start, count = args
    m, d = config.arms, config.outcomes
    counts = np.zeros((count, m, d), dtype=np.int32)
    treated = np.zeros(count, dtype=np.int32)
    recommendation = np.full(count, -1, dtype=np.int16)
    terminated = np.zeros(count, dtype=bool)
    for i in range(count):
        record = run_trial(config, scenario, (config.seed, start + i))
        for j, state in enumerate(record.states):
            counts[i, j] = state.counts
        treated[i] = record.treated
        terminated[i] = record.terminated
        if record.recommendation is not None:
            recommendation[i] = record.recommendation
    return {
        "counts": counts,
        "treated": treated,
        "recommendation": recommendation,
        "terminated": terminated,
    }


def _run_blocks(worker, tasks, parallelism: int) -> list[dict]:
    if parallelism <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(worker, tasks))


def simulate_replications(
    config: TrialConfig,
    scenario: Scenario,
    replications: int,
    parallelism: int = 1,
    force_reference: bool = False,
) -> RepOutcomes:
    """Run independent replications and collect their raw outcomes, in rep order."""
    if replications < 1:
        raise ValueError(f"replications must be positive, got {replications}")
    check_compatible(config, scenario)
    worker = _reference_block if (force_reference or config.outcomes != 2) else _fast_block
    tasks = [(config, scenario, start, count) for start, count in _blocks(replications, config.max_patients)]
    parts = _run_blocks(worker, tasks, parallelism)
    return RepOutcomes(
        counts=np.concatenate([p["counts"] for p in parts]),
        treated=np.concatenate([p["treated"] for p in parts]),
        recommendation=np.concatenate([p["recommendation"] for p in parts]),
        terminated=np.concatenate([p["terminated"] for p in parts]),
    )


def aggregate(
    reps: RepOutcomes,
    config: TrialConfig,
    scenario: Scenario,
    rejected: np.ndarray | None = None,
) -> OperatingCharacteristics:
    """Reduce raw replication outcomes to operating characteristics."""
    r = reps.replications
    m = config.arms
    treated = reps.treated.astype(float)
    successes = reps.counts[:, :, config.success_outcome].sum(axis=1).astype(float)
    if config.outcomes == 2:
        tox_cat = (
            config.safety.toxicity_outcome
            if config.safety is not None
            else (1 - config.success_outcome)
        )
    else:
        tox_cat = 0
    toxicities = reps.counts[:, :, tox_cat].sum(axis=1).astype(float)

    target = scenario.target_index
    if target is not None:
        p_star_col = reps.counts[:, target, :].sum(axis=1) / np.maximum(treated, 1.0)
        correct = (reps.recommendation == target).astype(float)
        if scenario.no_safe_arm:
            correct = np.maximum(correct, reps.terminated.astype(float))
    elif scenario.no_safe_arm:
        p_star_col = np.full(r, np.nan)
        correct = reps.terminated.astype(float)
    else:
        p_star_col = np.full(r, np.nan)
        correct = np.full(r, np.nan)

    ens = _summary(successes)
    tox = _summary(toxicities)
    pstar = _summary(p_star_col) if not np.isnan(p_star_col).all() else MetricSummary(float("nan"), float("nan"), float("nan"))
    pcs = _summary(correct) if not np.isnan(correct).all() else MetricSummary(float("nan"), float("nan"), float("nan"))
    term = _summary(reps.terminated.astype(float))
    mean_n = _summary(treated)
    selection = []
    selection_se = []
    for j in range(m):
        s = _summary((reps.recommendation == j).astype(float))
        selection.append(s.mean)
        selection_se.append(s.se)
    rejection_rate = rejection_se = None
    if rejected is not None:
        s = _summary(rejected.astype(float))
        rejection_rate, rejection_se = s.mean, s.se
    return OperatingCharacteristics(
        replications=r,
        pcs=pcs.mean,
        pcs_se=pcs.se,
        ens=ens.mean,
        ens_sd=ens.sd,
        ens_se=ens.se,
        p_star=pstar.mean,
        p_star_sd=pstar.sd,
        p_star_se=pstar.se,
        mean_toxicities=tox.mean,
        mean_toxicities_sd=tox.sd,
        mean_toxicities_se=tox.se,
        termination_rate=term.mean,
        termination_rate_se=term.se,
        mean_n=mean_n.mean,
        mean_n_sd=mean_n.sd,
        mean_n_se=mean_n.se,
        selection_proportions=tuple(selection),
        selection_proportions_se=tuple(selection_se),
        rejection_rate=rejection_rate,
        rejection_rate_se=rejection_se,
    )


def run_monte_carlo(
    config: TrialConfig,
    scenario: Scenario,
    replications: int,
    parallelism: int = 1,
    force_reference: bool = False,
) -> OperatingCharacteristics:
    """Simulate replications and aggregate their operating characteristics.

    When the config carries a hypothesis-testing block with a calibrated
    cutoff, per-replication rejections are evaluated and reported as
    ``rejection_rate`` (power under an alternative, type-I error under the
    null).
    """
    reps = simulate_replications(
        config, scenario, replications, parallelism=parallelism, force_reference=force_reference
    )
    rejected = None
    if config.testing is not None and config.testing.cutoff is not None:
        from .testing import rejections

        rejected = rejections(reps, config)
    return aggregate(reps, config, scenario, rejected=rejected)


def _benchmark_block(args) -> np.ndarray:
    scenario, gamma_event, n_patients, seed, start, count, event_outcome, selection = args
    return fastmc.benchmark_block(
        scenario, gamma_event, n_patients, seed, start, count, event_outcome, selection
    )


def benchmark_monte_carlo(
    scenario: Scenario,
    gamma,
    n_patients: int,
    replications: int,
    seed: int = 0,
    parallelism: int = 1,
    event_outcome: int = 0,
    selection: str = "criterion",
) -> np.ndarray:
    """Benchmark recommendations for many replications; returns the (R,) arm array."""
    gamma_event = gamma[event_outcome] if not isinstance(gamma, (int, float)) else float(gamma)
    size = max(1, min(replications, _BLOCK_DOUBLES // max(n_patients, 1)))
    tasks = [
        (scenario, gamma_event, n_patients, seed, start, min(size, replications - start), event_outcome, selection)
        for start in range(0, replications, size)
    ]
    parts = _run_blocks(_benchmark_block, tasks, parallelism)
    return np.concatenate(parts)


def benchmark_selection_proportions(
    scenario: Scenario,
    gamma,
    n_patients: int,
    replications: int,
    seed: int = 0,
    parallelism: int = 1,
    event_outcome: int = 0,
    selection: str = "criterion",
) -> np.ndarray:
    recs = benchmark_monte_carlo(
        scenario, gamma, n_patients, replications, seed, parallelism, event_outcome, selection
    )
    m = scenario.arms
    return np.array([(recs == j).mean() for j in range(m)])
