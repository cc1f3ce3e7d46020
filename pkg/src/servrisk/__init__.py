"""Serviceability risk weights for mortgage credit risk.

Borrower income is treated as a distribution around its assessed value; the
chance that it falls below the stressed repayment, relative to the same
chance at a base net servicing ratio, gives a multiplicative risk weight.
"""

from .distributions import DistributionSpec, DomainError, Family, cdf, quantile, sample, sf
from .mc_oracle import GridValidation, OracleReport, OracleUnderpoweredError, validate_case, validate_grid
from .risk_model import (
    LedgerConflictError,
    LoanProfile,
    adjusted_lgd,
    adjusted_pd,
    attach_serviceability,
    expected_loss,
)
from .serviceability import (
    AssessedLoan,
    Direction,
    GridCellError,
    RepaymentSnapshot,
    RiskWeightGrid,
    ServiceabilityCase,
    UnresolvableBaseError,
    default_probability,
    in_default,
    nsr,
    rcr,
    risk_weight,
    risk_weight_grid,
    standard_axes,
    threshold_risk_weight,
)

__all__ = [
    "AssessedLoan",
    "Direction",
    "DistributionSpec",
    "DomainError",
    "Family",
    "GridCellError",
    "GridValidation",
    "LedgerConflictError",
    "LoanProfile",
    "OracleReport",
    "OracleUnderpoweredError",
    "RepaymentSnapshot",
    "RiskWeightGrid",
    "ServiceabilityCase",
    "UnresolvableBaseError",
    "adjusted_lgd",
    "adjusted_pd",
    "attach_serviceability",
    "cdf",
    "default_probability",
    "expected_loss",
    "in_default",
    "nsr",
    "quantile",
    "rcr",
    "risk_weight",
    "risk_weight_grid",
    "sample",
    "sf",
    "standard_axes",
    "threshold_risk_weight",
    "validate_case",
    "validate_grid",
]
