"""Monte Carlo prices and Malliavin-weight Greeks for two-asset spread calls."""

from .core import (
    GREEKS,
    DriverSummary,
    GreekEstimate,
    MarketParams,
    ParameterError,
    SvParams,
    WeightSet,
    validate,
)
from .estimators import (
    FdBumps,
    RunSpec,
    compare_report,
    estimate_greek_fd,
    estimate_greek_localized,
    estimate_greek_malliavin,
    estimate_price,
)
from .oracles import black_scholes_call, kirk_approx, margrabe
from .paths import SeedSpec, simulate
from .payoff import LocalizationSpec
from .weights import ModelKind, gbm_weights, sv_weights

__all__ = [
    "GREEKS",
    "DriverSummary",
    "FdBumps",
    "GreekEstimate",
    "LocalizationSpec",
    "MarketParams",
    "ModelKind",
    "ParameterError",
    "RunSpec",
    "SeedSpec",
    "SvParams",
    "WeightSet",
    "black_scholes_call",
    "compare_report",
    "estimate_greek_fd",
    "estimate_greek_localized",
    "estimate_greek_malliavin",
    "estimate_price",
    "gbm_weights",
    "kirk_approx",
    "margrabe",
    "simulate",
    "sv_weights",
    "validate",
]
