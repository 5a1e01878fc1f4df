"""Core value types: simplex vectors, per-arm Dirichlet state, criterion parameters.

Everything here is immutable after construction and safe to share across
threads; all downstream operations are pure functions of these values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

SIMPLEX_TOL = 1e-9


class UnsupportedRegimeError(ValueError):
    """Raised for parameter regimes the design does not support (e.g. kappa < 0.5)."""


def _as_float_tuple(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class SimplexVector:
    """A strictly interior point of the d-dimensional unit simplex.

    Components must all lie in (0, 1) and sum to 1 within ``SIMPLEX_TOL``;
    inputs inside the tolerance are renormalized to sum exactly to 1, anything
    farther off is rejected so caller bugs stay visible.
    """

    components: tuple[float, ...]

    def __init__(self, components: Sequence[float]):
        comps = _as_float_tuple(components)
        if len(comps) < 2:
            raise ValueError(f"simplex vector needs at least 2 components, got {len(comps)}")
        if any(c <= 0.0 or c >= 1.0 for c in comps):
            raise ValueError(f"simplex components must lie strictly in (0, 1): {comps}")
        total = sum(comps)
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"simplex components sum to {total!r}, not within {SIMPLEX_TOL} of 1")
        if total != 1.0:
            comps = tuple(c / total for c in comps)
        object.__setattr__(self, "components", comps)

    @property
    def dimension(self) -> int:
        return len(self.components)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[float]:
        return iter(self.components)

    def __getitem__(self, i: int) -> float:
        return self.components[i]


@dataclass(frozen=True)
class ArmState:
    """Dirichlet prior pseudo-counts plus observed outcome counts for one arm.

    The posterior over the arm's outcome-probability vector is
    Dir(counts + prior + 1) so the posterior mode is (x_i + v_i) / (n + beta).
    """

    prior: tuple[float, ...]
    counts: tuple[int, ...]

    def __init__(self, prior: Sequence[float], counts: Sequence[int] | None = None):
        pr = _as_float_tuple(prior)
        if len(pr) < 2:
            raise ValueError("an arm needs at least 2 outcome categories")
        if any(v <= 0.0 for v in pr):
            raise ValueError(f"prior pseudo-counts must be strictly positive: {pr}")
        if counts is None:
            ct: tuple[int, ...] = (0,) * len(pr)
        else:
            ct = tuple(int(c) for c in counts)
            if len(ct) != len(pr):
                raise ValueError(f"counts length {len(ct)} != prior length {len(pr)}")
            if any(c < 0 for c in ct):
                raise ValueError(f"counts must be non-negative: {ct}")
        object.__setattr__(self, "prior", pr)
        object.__setattr__(self, "counts", ct)

    @property
    def dimension(self) -> int:
        return len(self.prior)

    @property
    def n(self) -> int:
        """Number of observations on this arm."""
        return sum(self.counts)

    @property
    def beta(self) -> float:
        """Total prior mass (the beta of the prior mode parametrization)."""
        return sum(self.prior)


@dataclass(frozen=True)
class CriterionParams:
    """Target vector and exploration penalty for the selection criterion.

    kappa < 0.5 gives a vanishing information gain and carries no consistency
    guarantee, so it is rejected unless ``experimental_low_kappa`` is set.
    """

    gamma: SimplexVector
    kappa: float = 0.5
    experimental_low_kappa: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.kappa < 1.0:
            raise ValueError(f"kappa must lie in (0, 1), got {self.kappa}")
        if self.kappa < 0.5 and not self.experimental_low_kappa:
            raise UnsupportedRegimeError(
                f"kappa={self.kappa} < 0.5 is outside the supported regime; "
                "set experimental_low_kappa=True to override"
            )


@dataclass(frozen=True)
class NormalApprox:
    """Gaussian approximation of the plug-in criterion at sample size n."""

    mean: float
    variance: float
    n: int

    def __post_init__(self) -> None:
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance}")
