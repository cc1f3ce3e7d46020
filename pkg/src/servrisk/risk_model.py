"""Differential credit-risk pipeline.

The user supplies base PD and LGD; each risk characteristic contributes one
named multiplicative weight. The model only says how risk moves with loan
characteristics, never what the absolute level should be.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

from .serviceability import ServiceabilityCase, risk_weight

NSR_WEIGHT = "NSR"


class LedgerConflictError(ValueError):
    """A ledger already holds a weight for this risk characteristic."""


def _ledger(name: str, weights: Iterable[Any]) -> tuple[tuple[str, float], ...]:
    if isinstance(weights, Mapping):
        weights = weights.items()
    entries = tuple((str(n), float(v)) for n, v in weights)
    seen: set[str] = set()
    for n, v in entries:
        if n in seen:
            raise LedgerConflictError(f"{name} holds more than one weight named {n!r}")
        seen.add(n)
        if not (math.isfinite(v) and v >= 0):
            raise ValueError(f"{name} weight {n!r} must be a non-negative finite number, got {v}")
    return entries


@dataclass(frozen=True)
class LoanProfile:
    """Base PD/LGD plus ordered ledgers of ``(name, factor)`` risk weights."""

    base_pd: float
    base_lgd: float
    pd_weights: tuple[tuple[str, float], ...] = ()
    lgd_weights: tuple[tuple[str, float], ...] = ()
    pd_cap: float = 1.0
    pd_floor: float = 0.0

    def __post_init__(self) -> None:
        if not 0 < self.base_pd <= 1:
            raise ValueError(f"base_pd must lie in (0, 1], got {self.base_pd}")
        if not 0 < self.base_lgd <= 1:
            raise ValueError(f"base_lgd must lie in (0, 1], got {self.base_lgd}")
        if not 0 <= self.pd_floor <= self.pd_cap <= 1:
            raise ValueError(f"need 0 <= pd_floor <= pd_cap <= 1, got floor={self.pd_floor}, cap={self.pd_cap}")
        object.__setattr__(self, "pd_weights", _ledger("pd_weights", self.pd_weights))
        object.__setattr__(self, "lgd_weights", _ledger("lgd_weights", self.lgd_weights))

    def with_pd_weight(self, name: str, factor: float) -> LoanProfile:
        if any(n == name for n, _ in self.pd_weights):
            raise LedgerConflictError(f"pd_weights already holds a weight named {name!r}")
        return replace(self, pd_weights=self.pd_weights + ((name, factor),))

    def to_dict(self) -> dict[str, Any]:
        return {
            "base_pd": self.base_pd,
            "base_lgd": self.base_lgd,
            "pd_cap": self.pd_cap,
            "pd_floor": self.pd_floor,
            "pd_weights": dict(self.pd_weights),
            "lgd_weights": dict(self.lgd_weights),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> LoanProfile:
        return cls(
            base_pd=data["base_pd"],
            base_lgd=data["base_lgd"],
            pd_weights=data.get("pd_weights", ()),
            lgd_weights=data.get("lgd_weights", ()),
            pd_cap=data.get("pd_cap", 1.0),
            pd_floor=data.get("pd_floor", 0.0),
        )


def _product(weights: Sequence[tuple[str, float]]) -> float:
    return math.prod(f for _, f in weights)


def adjusted_pd(profile: LoanProfile) -> float:
    """Base PD times every PD weight, clamped once to ``[pd_floor, pd_cap]``."""
    raw = profile.base_pd * _product(profile.pd_weights)
    return min(max(raw, profile.pd_floor), profile.pd_cap)


def adjusted_lgd(profile: LoanProfile) -> float:
    raw = profile.base_lgd * _product(profile.lgd_weights)
    return min(max(raw, 0.0), 1.0)


def expected_loss(profile: LoanProfile) -> float:
    return adjusted_pd(profile) * adjusted_lgd(profile)


def attach_serviceability(profile: LoanProfile, case: ServiceabilityCase) -> LoanProfile:
    """Return a copy of ``profile`` with the NSR risk weight for ``case`` appended."""
    return profile.with_pd_weight(NSR_WEIGHT, risk_weight(case))
