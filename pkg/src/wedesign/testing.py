"""Exact pairwise testing against a control arm and its simulation-based calibration.

The one-sided Fisher test is evaluated as a hypergeometric tail summed in log
space, so tables from trials with hundreds of patients per group stay
numerically exact. Cutoffs are calibrated per design by simulating the null:
the rejection statistic is the Bonferroni-scaled minimum pairwise p-value and
the cutoff is the largest achievable threshold whose null rejection rate does
not exceed the target level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import HypothesisTestConfig, Scenario, TrialConfig
from .engine import TrialRecord
from .montecarlo import OperatingCharacteristics, RepOutcomes, aggregate, run_monte_carlo, simulate_replications

_LGAMMA_CACHE_SIZE = 4096
_lgamma_table = np.concatenate(([0.0], np.cumsum(np.log(np.arange(1, _LGAMMA_CACHE_SIZE)))))


def _log_factorial(n):
    """log(n!) for scalar or array n (exact table below 4096, lgamma above)."""
    n = np.asarray(n)
    if n.max(initial=0) < _LGAMMA_CACHE_SIZE:
        return _lgamma_table[n]
    from scipy.special import gammaln

    return gammaln(n + 1.0)


@lru_cache(maxsize=200_000)
def fisher_exact_pvalue(a: int, b: int, c: int, d: int) -> float:
    """One-sided Fisher p-value that the first group's success rate exceeds the second's.

    Table layout: (a, b) successes/failures in the test group, (c, d) in the
    reference group. Computed as the upper hypergeometric tail P(X >= a) with
    the table's margins, in log space.
    """
    if min(a, b, c, d) < 0:
        raise ValueError(f"table entries must be non-negative: {(a, b, c, d)}")
    row1 = a + b
    col1 = a + c
    n = a + b + c + d
    if n == 0:
        return 1.0
    k_hi = min(row1, col1)
    if a > k_hi:
        raise ValueError(f"inconsistent table: {(a, b, c, d)}")
    ks = np.arange(a, k_hi + 1)
    log_terms = (
        _log_factorial(col1)
        - _log_factorial(ks)
        - _log_factorial(col1 - ks)
        + _log_factorial(n - col1)
        - _log_factorial(row1 - ks)
        - _log_factorial(n - col1 - row1 + ks)
        - (_log_factorial(n) - _log_factorial(row1) - _log_factorial(n - row1))
    )
    peak = log_terms.max()
    return float(min(math.exp(peak) * np.exp(log_terms - peak).sum(), 1.0))


def _success_failure(reps: RepOutcomes, config: TrialConfig) -> tuple[np.ndarray, np.ndarray]:
    succ = reps.counts[:, :, config.success_outcome]
    fail = reps.counts.sum(axis=2) - succ
    return succ, fail


def min_scaled_pvalues(reps: RepOutcomes, config: TrialConfig) -> np.ndarray:
    """Per replication: (m - 1) times the smallest experimental-vs-control p-value."""
    if config.testing is None:
        raise ValueError("config has no hypothesis-testing block")
    control = config.testing.control_index
    succ, fail = _success_failure(reps, config)
    m = config.arms
    comparisons = [j for j in range(m) if j != control]
    scale = float(len(comparisons))
    out = np.empty(reps.replications)
    for i in range(reps.replications):
        cs = int(succ[i, control])
        cf = int(fail[i, control])
        best = 1.0
        for j in comparisons:
            p = fisher_exact_pvalue(int(succ[i, j]), int(fail[i, j]), cs, cf)
            if p < best:
                best = p
        out[i] = scale * best
    return out


def rejections(reps: RepOutcomes, config: TrialConfig) -> np.ndarray:
    """Boolean per-replication rejection under the config's calibrated cutoff."""
    testing = config.testing
    if testing is None or testing.cutoff is None:
        raise ValueError("rejections need a testing block with a calibrated cutoff")
    return min_scaled_pvalues(reps, config) <= testing.cutoff


def evaluate_hypotheses(
    record: TrialRecord, test: HypothesisTestConfig, success_outcome: int = 1
) -> bool:
    """Reject when any experimental arm beats the control at the Bonferroni-corrected cutoff."""
    if test.cutoff is None:
        raise ValueError("testing cutoff has not been calibrated")
    control = test.control_index
    succ = [s.counts[success_outcome] for s in record.states]
    fail = [s.n - s.counts[success_outcome] for s in record.states]
    comparisons = [j for j in range(len(record.states)) if j != control]
    scale = float(len(comparisons))
    best = min(
        fisher_exact_pvalue(succ[j], fail[j], succ[control], fail[control]) for j in comparisons
    )
    return scale * best <= test.cutoff


def cutoff_from_stats(stats: np.ndarray, alpha_target: float) -> float:
    """Largest achievable cutoff whose empirical rejection rate stays at or below target."""
    if alpha_target <= 0.0:
        return 0.0
    r = len(stats)
    allowed = int(math.floor(alpha_target * r))
    if allowed < 1:
        return 0.0
    s = np.sort(stats)
    candidate = s[allowed - 1]
    # Ties at the candidate atom can push the rate above target; step down if so.
    count = int(np.searchsorted(s, candidate, side="right"))
    while count > allowed:
        below = int(np.searchsorted(s, candidate, side="left"))
        if below == 0:
            return 0.0
        candidate = s[below - 1]
        count = below
    return float(candidate)


def calibrate_cutoff(
    config: TrialConfig,
    null_scenario: Scenario,
    replications: int,
    parallelism: int = 1,
) -> float:
    """Calibrate the rejection cutoff on a null simulation of this very design."""
    reps = simulate_replications(config, null_scenario, replications, parallelism=parallelism)
    stats = min_scaled_pvalues(reps, config)
    target = config.testing.alpha_target if config.testing is not None else 0.05
    return cutoff_from_stats(stats, target)


@dataclass(frozen=True)
class SweepPoint:
    kappa: float
    ens: float
    ens_se: float
    power: float | None
    characteristics: OperatingCharacteristics


def kappa_sweep(
    config: TrialConfig,
    scenario: Scenario,
    kappa_grid,
    replications: int,
    null_scenario: Scenario | None = None,
    parallelism: int = 1,
) -> list[SweepPoint]:
    """Operating characteristics across a kappa grid under one fixed calibrated cutoff.

    The cutoff comes from the config's testing block if already calibrated,
    otherwise it is calibrated once at the first grid point on the supplied
    null scenario and held fixed for the whole sweep.
    """
    grid = [float(k) for k in kappa_grid]
    if not grid:
        raise ValueError("kappa_grid must be non-empty")
    if any(not 0.5 <= k < 1.0 for k in grid):
        raise ValueError(f"kappa grid must lie within [0.5, 1): {grid}")
    cutoff = config.testing.cutoff if config.testing is not None else None
    if config.testing is not None and cutoff is None:
        if null_scenario is None:
            raise ValueError("kappa_sweep needs either a calibrated cutoff or a null scenario")
        cutoff = calibrate_cutoff(
            config.with_updates(kappa=grid[0]), null_scenario, replications, parallelism
        )
    points = []
    for k in grid:
        cfg = config.with_updates(kappa=k)
        if cfg.testing is not None:
            from dataclasses import replace

            cfg = cfg.with_updates(testing=replace(cfg.testing, cutoff=cutoff))
        oc = run_monte_carlo(cfg, scenario, replications, parallelism=parallelism)
        points.append(
            SweepPoint(
                kappa=k, ens=oc.ens, ens_se=oc.ens_se, power=oc.rejection_rate, characteristics=oc
            )
        )
    return points
