"""Income distributions in mean-relative form.

Every distribution here describes a "migrating" quantity divided by its
initial value, so the mean is always 1 and the spread is the relative
standard deviation. Absolute incomes never enter the math.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np
from scipy.optimize import brentq
from scipy.special import owens_t

# Beyond this many relative standard deviations from the mean the tails are
# reported as exactly 0 or 1.
TAIL_CUTOFF = 8.0

SAMPLE_BLOCK = 1 << 20

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
_SEED_LIMIT = 1 << 64


class DomainError(ValueError):
    """An argument lies outside the domain of a distribution function."""


class Family(str, enum.Enum):
    NORMAL = "normal"
    SKEW_NORMAL = "skew_normal"


@dataclass(frozen=True)
class DistributionSpec:
    """Family and shape of a mean-relative income distribution.

    ``relative_sd`` is the standard deviation as a fraction of mean income.
    ``skew`` is the skew-normal shape parameter; the distribution is
    re-centred and re-scaled so that mean and standard deviation stay at
    1 and ``relative_sd`` whatever the skew.
    """

    family: Family
    relative_sd: float
    skew: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if not (math.isfinite(self.relative_sd) and self.relative_sd > 0):
            raise DomainError(f"relative_sd must be positive and finite, got {self.relative_sd}")
        if not math.isfinite(self.skew):
            raise DomainError(f"skew must be finite, got {self.skew}")
        if self.family is Family.NORMAL and self.skew != 0:
            raise DomainError("a normal distribution cannot carry a skew parameter")

    @classmethod
    def normal(cls, relative_sd: float) -> DistributionSpec:
        return cls(Family.NORMAL, relative_sd)

    @classmethod
    def skew_normal(cls, relative_sd: float, skew: float) -> DistributionSpec:
        return cls(Family.SKEW_NORMAL, relative_sd, skew)

    def with_sd(self, relative_sd: float) -> DistributionSpec:
        return DistributionSpec(self.family, relative_sd, self.skew)


@dataclass(frozen=True)
class _SkewNormalParams:
    delta: float
    location: float
    scale: float
    # mean and sd of delta*|U0| + sqrt(1 - delta^2)*U1
    raw_mean: float
    raw_sd: float


def _skew_params(spec: DistributionSpec) -> _SkewNormalParams:
    alpha = spec.skew
    delta = alpha / math.sqrt(1.0 + alpha * alpha)
    raw_mean = delta * math.sqrt(2.0 / math.pi)
    raw_sd = math.sqrt(1.0 - raw_mean * raw_mean)
    scale = spec.relative_sd / raw_sd
    location = 1.0 - scale * raw_mean
    return _SkewNormalParams(delta, location, scale, raw_mean, raw_sd)


def std_normal_cdf(z: float) -> float:
    """Standard normal lower tail, without the tail cutoff."""
    return 0.5 * math.erfc(-z / _SQRT2)


def std_normal_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _SQRT2PI


# Rational approximation coefficients for the standard normal quantile
# (P. J. Acklam), relative error about 1.15e-9 before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549732539343734e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def std_normal_quantile(p: float) -> float:
    """Standard normal quantile: rational approximation plus one Newton step."""
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if p > 0.5:
        # 1 - p is exact here, and the lower tail keeps full relative precision.
        return -std_normal_quantile(1.0 - p)
    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        z = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / (
            (((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0
        )
    else:
        q = p - 0.5
        r = q * q
        z = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / (
            ((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0
        )
    return z - (std_normal_cdf(z) - p) / std_normal_pdf(z)


def _check_x(x: float) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    return x


def cdf(spec: DistributionSpec, x: float) -> float:
    """P(relative income <= x)."""
    x = _check_x(x)
    u = (x - 1.0) / spec.relative_sd
    if u <= -TAIL_CUTOFF:
        return 0.0
    if u >= TAIL_CUTOFF:
        return 1.0
    if spec.family is Family.NORMAL:
        return std_normal_cdf(u)
    sn = _skew_params(spec)
    z = (x - sn.location) / sn.scale
    value = std_normal_cdf(z) - 2.0 * float(owens_t(z, spec.skew))
    return min(max(value, 0.0), 1.0)


def sf(spec: DistributionSpec, x: float) -> float:
    """P(relative income > x), evaluated directly for upper-tail accuracy."""
    x = _check_x(x)
    u = (x - 1.0) / spec.relative_sd
    if u >= TAIL_CUTOFF:
        return 0.0
    if u <= -TAIL_CUTOFF:
        return 1.0
    if spec.family is Family.NORMAL:
        return std_normal_cdf(-u)
    sn = _skew_params(spec)
    z = (x - sn.location) / sn.scale
    value = std_normal_cdf(-z) + 2.0 * float(owens_t(z, spec.skew))
    return min(max(value, 0.0), 1.0)


def quantile(spec: DistributionSpec, p: float) -> float:
    """Inverse of :func:`cdf` for ``0 < p < 1``."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if spec.family is Family.NORMAL:
        return 1.0 + spec.relative_sd * std_normal_quantile(p)
    lo = 1.0 - TAIL_CUTOFF * spec.relative_sd
    hi = 1.0 + TAIL_CUTOFF * spec.relative_sd
    return brentq(lambda x: cdf(spec, x) - p, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def _check_seed(seed: int) -> int:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise TypeError(f"seed must be an integer, got {type(seed).__name__}")
    seed = int(seed)
    if not 0 <= seed < _SEED_LIMIT:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def iter_samples(spec: DistributionSpec, rng_seed: int, count: int, block: int = SAMPLE_BLOCK) -> Iterator[np.ndarray]:
    """Yield ``count`` relative incomes in blocks of at most ``block``.

    Normal draws come from numpy's ziggurat sampler rather than from
    :func:`quantile`, so the sampler shares no code with the analytic tail
    functions it is used to check. Skew-normal draws use the
    ``delta*|U0| + sqrt(1 - delta^2)*U1`` representation.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    if block < 1:
        raise ValueError(f"block must be at least 1, got {block}")
    rng = np.random.default_rng(_check_seed(rng_seed))
    s = spec.relative_sd
    if spec.family is Family.SKEW_NORMAL:
        sn = _skew_params(spec)
        tail = math.sqrt(1.0 - sn.delta * sn.delta)
    remaining = count
    while remaining:
        m = min(block, remaining)
        remaining -= m
        if spec.family is Family.NORMAL:
            z = rng.standard_normal(m)
            z *= s
            z += 1.0
            yield z
        else:
            u0 = rng.standard_normal(m)
            u1 = rng.standard_normal(m)
            x = sn.delta * np.abs(u0) + tail * u1
            x -= sn.raw_mean
            x *= s / sn.raw_sd
            x += 1.0
            yield x


def sample(spec: DistributionSpec, rng_seed: int, count: int) -> np.ndarray:
    """Draw ``count`` relative incomes; identical output for identical seeds."""
    return np.concatenate(list(iter_samples(spec, rng_seed, count)))
