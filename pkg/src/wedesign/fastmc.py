"""Vectorized lock-step Monte Carlo engine for binary-outcome designs.

Runs a block of replications simultaneously, one patient step at a time,
consuming per-replication uniform streams with exactly the layout of
``engine.run_trial``. Every arithmetic expression mirrors the scalar decision
path operation-for-operation, so a replication is bit-identical no matter
which engine produced it and no matter how replications are blocked across
workers.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betainc

from .allocation import FIXED, RULE_I, RULE_II, plugin_delta
from .config import Scenario, TrialConfig
from .engine import uniform_stream
from .types import ArmState

# Tail lookup tables are only worthwhile (and affordable) for short trials.
MAX_TABLE_N = 2048


def _penalty_table(n_max: int, kappa: float) -> np.ndarray:
    exponent = 2.0 * kappa - 1.0
    if exponent == 0.0:
        return np.ones(n_max + 1)
    values = [float("inf") if exponent < 0.0 else 0.0]
    values += [float(n) ** exponent for n in range(1, n_max + 1)]
    return np.array(values)


class _DesignTables:
    """Per-config constants shared by every block of a Monte Carlo run."""

    def __init__(self, config: TrialConfig):
        if config.outcomes != 2:
            raise ValueError("the vectorized engine supports binary outcomes only")
        m = config.arms
        n_max = config.max_patients
        pseudo = [p.pseudocounts() for p in config.priors]
        self.v1 = np.array([pc[1] for pc in pseudo])
        self.beta = np.array([p.beta for p in config.priors])
        self.gamma1 = float(config.gamma[1])
        self.penalties = _penalty_table(n_max, config.kappa)
        params = config.criterion_params()
        self.prior_deltas = np.array(
            [plugin_delta(ArmState(pc), params, trial_started=False) for pc in pseudo]
        )
        self.safety = config.safety
        self.tail_table = None
        self.theta_by_n = None
        if config.safety is not None:
            cfg = config.safety
            tox = cfg.toxicity_outcome
            if n_max <= MAX_TABLE_N:
                nn, xt = np.meshgrid(
                    np.arange(n_max + 1), np.arange(n_max + 1), indexing="ij"
                )
                valid = xt <= nn
                table = np.full((m, n_max + 1, n_max + 1), 2.0)  # 2.0 > any theta
                for j in range(m):
                    a = xt + pseudo[j][tox] + 1.0
                    b = (nn - xt) + pseudo[j][1 - tox] + 1.0
                    table[j][valid] = betainc(b[valid], a[valid], 1.0 - cfg.gamma_star)
                self.tail_table = table
            self.v_tox = np.array([pc[tox] for pc in pseudo])
            self.v_other = np.array([pc[1 - tox] for pc in pseudo])
            self.toxicity_outcome = tox
            self.theta_by_n = np.maximum(
                1.0 - cfg.r * np.arange(n_max + 1, dtype=float), cfg.theta_final
            )


def _deltas(x1: np.ndarray, n: np.ndarray, tables: _DesignTables) -> np.ndarray:
    # Same expression, in the same order, as allocation.plugin_delta for d=2.
    p = (x1 + tables.v1) / (n + tables.beta)
    d = p - tables.gamma1
    return 0.5 * d * d / (p * (1.0 - p)) * tables.penalties[n]


def _tails(x1: np.ndarray, n: np.ndarray, tables: _DesignTables) -> np.ndarray:
    if tables.tail_table is not None:
        xt = n - x1 if tables.toxicity_outcome == 0 else x1
        m = tables.tail_table.shape[0]
        return tables.tail_table[np.arange(m)[None, :], n, xt]
    xt = n - x1 if tables.toxicity_outcome == 0 else x1
    a = xt + tables.v_tox + 1.0
    b = (n - xt) + tables.v_other + 1.0
    return betainc(b, a, 1.0 - tables.safety.gamma_star)


def _rule1_arms(delta: np.ndarray, adm: np.ndarray, u: np.ndarray) -> np.ndarray:
    zero_mask = adm & (delta == 0.0)
    kz = zero_mask.sum(axis=1)
    has_zero = kz > 0
    idxz = np.minimum((u * kz).astype(np.int64), np.maximum(kz - 1, 0))
    cz = np.cumsum(zero_mask, axis=1)
    arm_zero = np.argmax(cz > idxz[:, None], axis=1)
    inv = np.zeros_like(delta)
    np.divide(1.0, delta, out=inv, where=adm & (delta > 0.0))
    cum = np.cumsum(inv, axis=1)
    x = u * cum[:, -1]
    arm_weighted = (cum <= x[:, None]).sum(axis=1)
    return np.where(has_zero, arm_zero, np.minimum(arm_weighted, delta.shape[1] - 1))


def simulate_block(
    config: TrialConfig,
    scenario: Scenario,
    rep_start: int,
    rep_count: int,
    tables: _DesignTables | None = None,
) -> dict:
    """Simulate replications [rep_start, rep_start + rep_count) in lock step."""
    if tables is None:
        tables = _DesignTables(config)
    m = config.arms
    n_max = config.max_patients
    rule = config.rule
    safety = config.safety if rule != FIXED else None
    alpha0 = np.array([row[0] for row in scenario.probabilities])

    u_all = np.empty((rep_count, 2 * n_max))
    for i in range(rep_count):
        u_all[i] = uniform_stream((config.seed, rep_start + i), 2 * n_max)

    x1 = np.zeros((rep_count, m), dtype=np.int32)
    n = np.zeros((rep_count, m), dtype=np.int32)
    active = np.ones(rep_count, dtype=bool)
    terminated = np.zeros(rep_count, dtype=bool)
    treated = np.full(rep_count, n_max, dtype=np.int32)
    rows = np.arange(rep_count)

    for t in range(n_max):
        if not active.any():
            break
        u_arm = u_all[:, 2 * t]
        u_out = u_all[:, 2 * t + 1]
        if safety is not None:
            tails = _tails(x1, n, tables)
            if safety.scope == "trial":
                theta = max(1.0 - safety.r * t, safety.theta_final)
                adm = tails <= theta
            else:
                adm = tails <= tables.theta_by_n[n]
            dying = active & ~adm.any(axis=1)
            if dying.any():
                terminated[dying] = True
                treated[dying] = t
                active &= ~dying
                if not active.any():
                    break
        else:
            adm = np.ones((rep_count, m), dtype=bool)
        if rule == FIXED:
            arm = np.minimum((u_arm * m).astype(np.int64), m - 1)
        else:
            if t == 0:
                delta = np.broadcast_to(tables.prior_deltas, (rep_count, m))
            else:
                delta = _deltas(x1, n, tables)
            if rule == RULE_II:
                arm = np.argmin(np.where(adm, delta, np.inf), axis=1)
            else:
                arm = _rule1_arms(delta, adm, u_arm)
        out1 = u_out >= alpha0[arm]
        sel = rows[active]
        chosen = arm[active]
        n[sel, chosen] += 1
        x1[sel, chosen] += out1[active]

    recommendation = np.full(rep_count, -1, dtype=np.int16)
    live = ~terminated
    if live.any():
        if config.safety is not None:
            tails = _tails(x1, n, tables)
            if config.safety.scope == "trial":
                theta = max(1.0 - config.safety.r * n_max, config.safety.theta_final)
                adm = tails <= theta
            else:
                adm = tails <= tables.theta_by_n[n]
        else:
            adm = np.ones((rep_count, m), dtype=bool)
        p = (x1 + tables.v1) / (n + tables.beta)
        d = p - tables.gamma1
        delta_final = 0.5 * d * d / (p * (1.0 - p))
        best = np.argmin(np.where(adm, delta_final, np.inf), axis=1)
        none_adm = ~adm.any(axis=1)
        pick = live & ~none_adm
        recommendation[pick] = best[pick].astype(np.int16)
        terminated[live & none_adm] = True

    counts = np.empty((rep_count, m, 2), dtype=np.int32)
    counts[:, :, 1] = x1
    counts[:, :, 0] = n - x1
    return {
        "counts": counts,
        "treated": treated,
        "recommendation": recommendation,
        "terminated": terminated,
    }


def benchmark_block(
    scenario: Scenario,
    gamma_event: float,
    n_patients: int,
    seed: int,
    rep_start: int,
    rep_count: int,
    event_outcome: int = 0,
    selection: str = "criterion",
) -> np.ndarray:
    """Benchmark recommendations for a block of replications (see engine.benchmark_trial)."""
    alphas = np.array([row[event_outcome] for row in scenario.probabilities])
    u_all = np.empty((rep_count, n_patients + 1))
    for i in range(rep_count):
        u_all[i] = uniform_stream((seed, rep_start + i), n_patients + 1)
    m = len(alphas)
    scores = np.empty((rep_count, m))
    for j in range(m):
        rate = np.count_nonzero(u_all[:, :n_patients] < alphas[j], axis=1) / n_patients
        if selection == "euclidean":
            scores[:, j] = np.abs(rate - gamma_event)
        else:
            interior = (rate > 0.0) & (rate < 1.0)
            dd = rate - gamma_event
            with np.errstate(divide="ignore", invalid="ignore"):
                dj = 0.5 * dd * dd / (rate * (1.0 - rate))
            scores[:, j] = np.where(interior, dj, np.inf)
    best = scores.min(axis=1, keepdims=True)
    ties = scores == best
    k = ties.sum(axis=1)
    pick = np.minimum((u_all[:, n_patients] * k).astype(np.int64), k - 1)
    cum = np.cumsum(ties, axis=1)
    return np.argmax(cum > pick[:, None], axis=1).astype(np.int16)
