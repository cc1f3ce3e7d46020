"""Serviceability ratios, threshold default probabilities and risk weights.

A borrower defaults once actual income falls below the stressed repayment.
With income stress ``f`` and net servicing ratio ``N`` that threshold sits
at ``f / N`` in mean-relative income, so the default probability is the
lower tail of the relative income distribution at ``f / N`` and the risk
weight is its ratio against the same tail at the base NSR.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from .distributions import DistributionSpec, Family, cdf, sf


class UnresolvableBaseError(ArithmeticError):
    """The base tail probability is zero, so no ratio can be formed."""


class GridCellError(ArithmeticError):
    """A risk-weight failure annotated with the grid cell it came from."""

    def __init__(self, nsr: float, relative_sd: float, cause: Exception):
        self.nsr = nsr
        self.relative_sd = relative_sd
        self.cause = cause
        super().__init__(f"cell nsr={nsr!r}, sd={relative_sd!r}: {cause}")


class Direction(str, enum.Enum):
    BELOW_TRIGGERS = "below"
    ABOVE_TRIGGERS = "above"


def _positive(name: str, value: float) -> None:
    if not (math.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be positive and finite, got {value}")


@dataclass(frozen=True)
class AssessedLoan:
    """Incomes and repayment as assessed at application."""

    assessed_income: float
    stressed_income: float
    stressed_repayment: float

    def __post_init__(self) -> None:
        _positive("assessed_income", self.assessed_income)
        _positive("stressed_income", self.stressed_income)
        _positive("stressed_repayment", self.stressed_repayment)
        if self.stressed_income > self.assessed_income:
            raise ValueError("stressed_income cannot exceed assessed_income")

    @property
    def stress_factor(self) -> float:
        return self.stressed_income / self.assessed_income


@dataclass(frozen=True)
class RepaymentSnapshot:
    income: float
    repayment: float

    def __post_init__(self) -> None:
        _positive("income", self.income)
        _positive("repayment", self.repayment)


@dataclass(frozen=True)
class ServiceabilityCase:
    """One (f, N, s) query.

    ``horizon`` is a free-text label for the default horizon the income
    distribution is meant to cover; it takes no part in the arithmetic.
    """

    stress_factor: float
    nsr: float
    distribution: DistributionSpec
    base_nsr: float = 1.0
    horizon: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.stress_factor) and 0 < self.stress_factor <= 1):
            raise ValueError(f"stress_factor must lie in (0, 1], got {self.stress_factor}")
        _positive("nsr", self.nsr)
        _positive("base_nsr", self.base_nsr)

    @property
    def threshold(self) -> float:
        """Relative income below which the loan defaults."""
        return self.stress_factor / self.nsr

    @property
    def base_threshold(self) -> float:
        return self.stress_factor / self.base_nsr


@dataclass(frozen=True)
class RiskWeightGrid:
    stress_factor: float
    nsr_axis: tuple[float, ...]
    sd_axis: tuple[float, ...]
    values: tuple[tuple[float, ...], ...]
    base_nsr: float = 1.0
    family: Family = Family.NORMAL
    skew: float = 0.0

    def cell(self, nsr: float, relative_sd: float) -> float:
        return self.values[self.nsr_axis.index(nsr)][self.sd_axis.index(relative_sd)]


def nsr(loan: AssessedLoan) -> float:
    """Net servicing ratio: stressed income over stressed repayment."""
    return loan.stressed_income / loan.stressed_repayment


def rcr(snapshot: RepaymentSnapshot) -> float:
    """Repayment coverage ratio: actual income over actual repayment."""
    return snapshot.income / snapshot.repayment


def in_default(snapshot: RepaymentSnapshot) -> bool:
    return rcr(snapshot) < 1.0


def _lower_tail(spec: DistributionSpec, x: float) -> float:
    # f/N overflows for vanishing N; that threshold is deep in the saturated tail.
    if math.isinf(x) and x > 0:
        return 1.0
    return cdf(spec, x)


def default_probability(case: ServiceabilityCase) -> float:
    """Probability that relative income ends below ``f / N``.

    Only meaningful as a ratio against another NSR; see :func:`risk_weight`.
    """
    return _lower_tail(case.distribution, case.threshold)


def risk_weight(case: ServiceabilityCase) -> float:
    """Default probability at ``case.nsr`` relative to ``case.base_nsr``.

    Depends only on stress factor, NSR and the income distribution; income
    and repayment levels cancel out.
    """
    den = _lower_tail(case.distribution, case.base_threshold)
    if den == 0.0:
        raise UnresolvableBaseError(
            f"default probability at base NSR {case.base_nsr} is zero "
            f"(f={case.stress_factor}, sd={case.distribution.relative_sd})"
        )
    if case.nsr == case.base_nsr:
        return 1.0
    return default_probability(case) / den


def threshold_risk_weight(
    distribution: DistributionSpec,
    trigger_ratio: float,
    base_trigger_ratio: float,
    direction: Direction = Direction.BELOW_TRIGGERS,
) -> float:
    """Tail-probability ratio for any migrating quantity with a default trigger.

    With ``BELOW_TRIGGERS`` default happens when the quantity falls under the
    trigger (income against repayment); with ``ABOVE_TRIGGERS`` when it rises
    over it (e.g. loan-to-value in limited recourse lending). Triggers are in
    mean-relative units.
    """
    direction = Direction(direction)
    tail = cdf if direction is Direction.BELOW_TRIGGERS else sf
    den = tail(distribution, base_trigger_ratio)
    if den == 0.0:
        raise UnresolvableBaseError(f"tail probability at base trigger {base_trigger_ratio} is zero")
    if trigger_ratio == base_trigger_ratio:
        return 1.0
    return tail(distribution, trigger_ratio) / den


def _check_axis(name: str, axis: Sequence[float]) -> tuple[float, ...]:
    values = tuple(float(v) for v in axis)
    if not values:
        raise ValueError(f"{name} must not be empty")
    for v in values:
        _positive(name, v)
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} must be strictly increasing")
    return values


def risk_weight_grid(
    stress_factor: float,
    nsr_axis: Sequence[float],
    sd_axis: Sequence[float],
    distribution_family: Family = Family.NORMAL,
    *,
    skew: float = 0.0,
    base_nsr: float = 1.0,
) -> RiskWeightGrid:
    """Tabulate risk weights over an NSR x income-sd grid."""
    nsr_values = _check_axis("nsr_axis", nsr_axis)
    sd_values = _check_axis("sd_axis", sd_axis)
    family = Family(distribution_family)
    specs = [DistributionSpec(family, s, skew) for s in sd_values]
    ServiceabilityCase(stress_factor, nsr_values[0], specs[0], base_nsr=base_nsr)
    rows = []
    for n in nsr_values:
        row = []
        for s, spec in zip(sd_values, specs):
            try:
                case = ServiceabilityCase(stress_factor, n, spec, base_nsr=base_nsr)
                row.append(risk_weight(case))
            except UnresolvableBaseError as exc:
                raise GridCellError(n, s, exc) from exc
        rows.append(tuple(row))
    return RiskWeightGrid(stress_factor, nsr_values, sd_values, tuple(rows), base_nsr, family, skew)


def standard_axes() -> tuple[tuple[float, ...], tuple[float, ...]]:
    """NSR 0.2..2.0 by 0.1 and income sd 10%..40% by 5%."""
    nsr_axis = tuple(round(0.2 + 0.1 * i, 10) for i in range(19))
    sd_axis = tuple(round(0.10 + 0.05 * j, 10) for j in range(7))
    return nsr_axis, sd_axis
