"""Weighted-entropy criterion mathematics.

Exact Dirichlet-posterior quantities (modes, differential entropy, weighted
differential entropy, information gain), the divergence criterion that drives
arm selection, its asymptotic expansion, and the Gaussian approximation used
for probability-of-correct-selection bounds.

Notation used throughout: an arm's posterior after counts x with prior
pseudo-counts v is Dir(x + v + 1); its mode is (x_i + v_i) / (n + beta) with
n = sum(x) and beta = sum(v).
"""

from __future__ import annotations

import math
from typing import Sequence

from scipy.special import digamma, gammaln

from .types import ArmState, CriterionParams, NormalApprox, SimplexVector, UnsupportedRegimeError

__all__ = [
    "posterior_update",
    "posterior_mode",
    "penalty",
    "criterion",
    "criterion_binary",
    "criterion_gradient_binary",
    "dirichlet_entropy",
    "weighted_dirichlet_entropy",
    "information_gain",
    "gain_asymptotic",
    "normal_approx",
    "pcs_lower_bound",
]


def posterior_update(state: ArmState, outcome: int) -> ArmState:
    """Return the state after observing one outcome of the given category."""
    if not 0 <= outcome < state.dimension:
        raise ValueError(f"outcome index {outcome} out of range for {state.dimension} categories")
    counts = list(state.counts)
    counts[outcome] += 1
    return ArmState(state.prior, counts)


def posterior_mode(state: ArmState) -> SimplexVector:
    """Mode of the posterior Dirichlet: component i is (x_i + v_i) / (n + beta)."""
    denom = state.n + state.beta
    return SimplexVector(tuple((x + v) / denom for x, v in zip(state.counts, state.prior)))


def penalty(n: float, kappa: float) -> float:
    """Sample-size penalty n^(2*kappa - 1), with 0^0 = 1 so kappa=0.5 is truly penalty-free."""
    exponent = 2.0 * kappa - 1.0
    if exponent == 0.0:
        return 1.0
    return float(n) ** exponent


def criterion(alpha: SimplexVector, params: CriterionParams, n: int) -> float:
    """Divergence of ``alpha`` from the target, penalized by n^(2*kappa - 1).

    Zero exactly when alpha equals the target; diverges as any component with
    positive target mass approaches the simplex boundary.
    """
    gamma = params.gamma
    if len(alpha) != len(gamma):
        raise ValueError(f"alpha has {len(alpha)} components, target has {len(gamma)}")
    if n < 0:
        raise ValueError(f"n must be non-negative, got {n}")
    s = 0.0
    for g, a in zip(gamma, alpha):
        s += g * g / a
    # s >= 1 by Cauchy-Schwarz; rounding can leave a tiny negative excess.
    return max(0.5 * (s - 1.0), 0.0) * penalty(n, params.kappa)


def criterion_binary(p: float, gamma: float, kappa: float, n: int) -> float:
    """Binary-outcome form of the criterion: a variance-normalized squared distance.

    Algebraically identical to ``criterion`` on the d=2 vectors (p, 1-p) and
    (gamma, 1-gamma).
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    d = p - gamma
    return 0.5 * d * d / (p * (1.0 - p)) * penalty(n, kappa)


def criterion_gradient_binary(alpha: float, gamma: float) -> float:
    """Derivative in alpha of the unpenalized binary criterion.

    Closed form ``(gamma-alpha)(gamma(2*alpha-1)-alpha) / (2 alpha^2 (1-alpha)^2)``;
    vanishes at alpha=gamma and changes sign there (the criterion's minimum).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    num = (gamma - alpha) * (gamma * (2.0 * alpha - 1.0) - alpha)
    den = alpha * alpha * (1.0 - alpha) * (1.0 - alpha)
    return num / (2.0 * den)


def _posterior_params(state: ArmState) -> tuple[list[float], float]:
    a = [x + v + 1.0 for x, v in zip(state.counts, state.prior)]
    return a, sum(a)


def dirichlet_entropy(state: ArmState) -> float:
    """Differential entropy of the posterior Dir(x + v + 1), in nats."""
    a, a0 = _posterior_params(state)
    log_b = sum(gammaln(ai) for ai in a) - gammaln(a0)
    return float(log_b - sum((ai - 1.0) * (digamma(ai) - digamma(a0)) for ai in a))


def weighted_dirichlet_entropy(state: ArmState, params: CriterionParams) -> float:
    """Weighted differential entropy of the posterior under the target-centred weight.

    The weight is proportional to prod_i p_i^(gamma_i * n^kappa), normalized so
    its posterior expectation is 1; weight times posterior is then the density
    of Dir(x + v + gamma*n^kappa + 1), which gives the closed form below.
    """
    a, a0 = _posterior_params(state)
    t = float(state.n) ** params.kappa if state.n > 0 else 0.0
    ap = [ai + g * t for ai, g in zip(a, params.gamma)]
    ap0 = a0 + t  # target components sum to 1
    log_b = sum(gammaln(ai) for ai in a) - gammaln(a0)
    return float(log_b - sum((ai - 1.0) * (digamma(api) - digamma(ap0)) for ai, api in zip(a, ap)))


def information_gain(state: ArmState, params: CriterionParams) -> float:
    """Entropy minus weighted entropy; non-positive, and zero with no observations.

    Computed in fused form (the log-Beta terms cancel) for less floating-point
    cancellation than literally subtracting the two entropies.
    """
    a, a0 = _posterior_params(state)
    t = float(state.n) ** params.kappa if state.n > 0 else 0.0
    if t == 0.0:
        return 0.0
    ap0 = a0 + t
    total = 0.0
    for ai, g in zip(a, params.gamma):
        total += (ai - 1.0) * ((digamma(ai + g * t) - digamma(ai)) - (digamma(ap0) - digamma(a0)))
    return float(total)


def gain_asymptotic(alpha: SimplexVector, params: CriterionParams, n: int) -> float:
    """Asymptotic expansion of the information gain for kappa >= 0.5.

    Leading term is minus the criterion; for kappa > 0.5 a finite correction sum
    over orders j = 3 .. floor(1/(1-kappa)) is added. For kappa < 0.5 the gain
    vanishes asymptotically and no expansion is provided.
    """
    kappa = params.kappa
    if kappa < 0.5:
        raise UnsupportedRegimeError(f"gain expansion requires kappa >= 0.5, got {kappa}")
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    gamma = params.gamma
    value = -criterion(alpha, params, n)
    eta = math.floor(1.0 / (1.0 - kappa) + 1e-9)
    for j in range(3, eta + 1):
        s = sum(g**j / a ** (j - 1) for g, a in zip(gamma, alpha))
        value += ((-1.0) ** (j - 1) / j) * float(n) ** (j * kappa - j + 1.0) * (s - 1.0)
    return value


def normal_approx(alpha: SimplexVector, params: CriterionParams, n: int) -> NormalApprox:
    """Mean and variance of the criterion's Gaussian limit at sample size n.

    Uses the multinomial covariance (diag(alpha) - alpha alpha^T) / n and the
    criterion gradient at alpha, so variance = (sum_i g_i^2 a_i - (sum_i g_i a_i)^2) / n.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    pen = penalty(n, params.kappa)
    grads = [-0.5 * g * g / (a * a) * pen for g, a in zip(params.gamma, alpha)]
    m1 = sum(gi * ai for gi, ai in zip(grads, alpha))
    m2 = sum(gi * gi * ai for gi, ai in zip(grads, alpha))
    variance = max((m2 - m1 * m1) / n, 0.0)
    return NormalApprox(mean=criterion(alpha, params, n), variance=variance, n=n)


def _phi(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def pcs_lower_bound(
    deltas: Sequence[float], variances: Sequence[float], target_index: int
) -> float:
    """Union-bound lower bound on the probability that the target arm attains the minimum.

    1 - sum over competitors of Phi((delta_target - delta_i) / sqrt(var_target + var_i)),
    clamped to [0, 1]. The target must hold the minimal delta.
    """
    if len(deltas) != len(variances):
        raise ValueError("deltas and variances must have equal length")
    if not 0 <= target_index < len(deltas):
        raise ValueError(f"target_index {target_index} out of range")
    dt = deltas[target_index]
    if dt > min(deltas) + 1e-12:
        raise ValueError("target_index does not hold the minimal delta")
    vt = variances[target_index]
    bound = 1.0
    for i, (d, v) in enumerate(zip(deltas, variances)):
        if i == target_index:
            continue
        spread = math.sqrt(vt + v)
        if spread == 0.0:
            bound -= 0.5 if d == dt else 0.0
        else:
            bound -= _phi((dt - d) / spread)
    return min(max(bound, 0.0), 1.0)
