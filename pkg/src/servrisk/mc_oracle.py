"""Monte Carlo cross-check of analytic risk weights.

Relative incomes are drawn from the income distribution and threshold
crossings are counted directly. Numerator and denominator are counted on
the same draws, so their correlation is exploited by the ratio estimator.
The analytic cdf is consulted only to fill in the comparison fields.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Sequence

import numpy as np

from .distributions import DistributionSpec, Family, iter_samples
from .serviceability import ServiceabilityCase, UnresolvableBaseError, risk_weight

MIN_SAMPLES = 10_000
Z_LIMIT = 3.0


class OracleUnderpoweredError(ArithmeticError):
    """Too few threshold crossings were observed to estimate the ratio."""


@dataclass(frozen=True)
class OracleReport:
    case: ServiceabilityCase
    samples: int
    empirical_pd_num: float
    empirical_pd_den: float
    empirical_weight: float
    standard_error: float
    analytic_weight: float
    z_score: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "stress_factor": self.case.stress_factor,
            "nsr": self.case.nsr,
            "base_nsr": self.case.base_nsr,
            "family": self.case.distribution.family.value,
            "sd": self.case.distribution.relative_sd,
            "skew": self.case.distribution.skew,
            "samples": self.samples,
            "empirical_pd_num": self.empirical_pd_num,
            "empirical_pd_den": self.empirical_pd_den,
            "empirical_weight": self.empirical_weight,
            "standard_error": self.standard_error,
            "analytic_weight": self.analytic_weight,
            "z_score": self.z_score,
        }


@dataclass(frozen=True)
class SkippedCell:
    nsr: float
    sd: float
    reason: str


@dataclass
class GridValidation:
    reports: list[OracleReport] = field(default_factory=list)
    skipped: list[SkippedCell] = field(default_factory=list)

    def exceptions(self, limit: float = Z_LIMIT) -> list[OracleReport]:
        """Reports whose |z| exceeds ``limit``."""
        return [r for r in self.reports if not abs(r.z_score) <= limit]

    def summary(self, limit: float = Z_LIMIT) -> dict[str, Any]:
        return {
            "cells_validated": len(self.reports),
            "cells_skipped": len(self.skipped),
            "z_limit": limit,
            "exceptions": len(self.exceptions(limit)),
            "skipped": [asdict(s) for s in self.skipped],
        }


def ratio_standard_error(p_num: float, p_den: float, p_joint: float, n: int) -> float:
    """Delta-method standard error of ``p_num / p_den`` from one shared sample.

    ``p_joint`` is the fraction of draws counted in both numerator and
    denominator.
    """
    if p_den <= 0:
        raise ZeroDivisionError("denominator proportion is zero")
    r = p_num / p_den
    var_num = p_num * (1.0 - p_num)
    var_den = p_den * (1.0 - p_den)
    cov = p_joint - p_num * p_den
    var = (var_num - 2.0 * r * cov + r * r * var_den) / (p_den * p_den * n)
    return math.sqrt(max(var, 0.0))


def child_seed(seed: int, index: int) -> int:
    """Independent 64-bit seed for grid cell ``index``."""
    ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def count_crossings(spec: DistributionSpec, seed: int, samples: int, num_threshold: float, den_threshold: float) -> tuple[int, int, int]:
    """Counts of draws strictly below each threshold, and below both."""
    joint_threshold = min(num_threshold, den_threshold)
    num = den = joint = 0
    for x in iter_samples(spec, seed, samples):
        num += int(np.count_nonzero(x < num_threshold))
        den += int(np.count_nonzero(x < den_threshold))
        joint += int(np.count_nonzero(x < joint_threshold))
    return num, den, joint


def validate_case(case: ServiceabilityCase, samples: int, seed: int) -> OracleReport:
    """Estimate the risk weight of ``case`` by simulation and compare."""
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    num, den, joint = count_crossings(case.distribution, seed, samples, case.threshold, case.base_threshold)
    if den == 0:
        raise OracleUnderpoweredError(
            f"no defaults observed at base NSR {case.base_nsr} in {samples} samples; increase the sample size"
        )
    analytic = risk_weight(case)
    if num == 0 and analytic != 0.0:
        raise OracleUnderpoweredError(
            f"no defaults observed at NSR {case.nsr} in {samples} samples; increase the sample size"
        )
    p_num, p_den, p_joint = num / samples, den / samples, joint / samples
    empirical = num / den
    se = ratio_standard_error(p_num, p_den, p_joint, samples)
    diff = empirical - analytic
    if diff == 0:
        z = 0.0
    elif se == 0:
        z = math.copysign(math.inf, diff)
    else:
        z = diff / se
    return OracleReport(case, samples, p_num, p_den, empirical, se, analytic, z)


def _validate_cell(args: tuple[ServiceabilityCase, int, int]) -> OracleReport | SkippedCell:
    case, samples, seed = args
    coords = (case.nsr, case.distribution.relative_sd)
    try:
        if risk_weight(case) == 0.0:
            return SkippedCell(*coords, "underflow cell")
        return validate_case(case, samples, seed)
    except UnresolvableBaseError as exc:
        return SkippedCell(*coords, f"unresolvable base: {exc}")
    except OracleUnderpoweredError as exc:
        return SkippedCell(*coords, f"oracle underpowered: {exc}")


def validate_grid(
    stress_factor: float,
    nsr_axis: Sequence[float],
    sd_axis: Sequence[float],
    distribution_family: Family = Family.NORMAL,
    *,
    samples: int,
    seed: int,
    skew: float = 0.0,
    base_nsr: float = 1.0,
    workers: int = 1,
) -> GridValidation:
    """Run :func:`validate_case` on every cell of an NSR x sd grid.

    Cell ``i * len(sd_axis) + j`` is simulated with ``child_seed(seed, k)``,
    so results do not depend on ``workers``. Cells whose analytic weight is
    exactly zero, or that fail, are listed in ``skipped`` with a reason.
    """
    if samples < MIN_SAMPLES:
        raise ValueError(f"samples must be at least {MIN_SAMPLES}, got {samples}")
    family = Family(distribution_family)
    jobs = []
    for i, n in enumerate(nsr_axis):
        for j, s in enumerate(sd_axis):
            case = ServiceabilityCase(stress_factor, float(n), DistributionSpec(family, float(s), skew), base_nsr=base_nsr)
            jobs.append((case, samples, child_seed(seed, i * len(sd_axis) + j)))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_validate_cell, jobs))
    else:
        outcomes = [_validate_cell(job) for job in jobs]
    result = GridValidation()
    for outcome in outcomes:
        if isinstance(outcome, SkippedCell):
            result.skipped.append(outcome)
        else:
            result.reports.append(outcome)
    return result
