"""Parameter containers, validation and Monte Carlo result aggregates."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

RHO_MAX = 0.999
Z_95 = 1.96


class ParameterError(ValueError):
    """Raised when parameters break one or more invariants.

    Each violation is a ``(name, detail)`` pair; the name (e.g.
    ``NonPositiveVol``) is part of the message so callers can match on it.
    """

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("; ".join(f"{name}: {detail}" for name, detail in self.violations))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.violations)


def _from_mapping(cls, data: Mapping[str, Any], **overrides):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ParameterError([("UnknownKey", f"{cls.__name__} has no field(s) {', '.join(unknown)}")])
    kwargs = {**data, **overrides}
    missing = sorted(
        f.name
        for f in dataclasses.fields(cls)
        if f.name not in kwargs
        and f.default is dataclasses.MISSING
        and f.default_factory is dataclasses.MISSING
    )
    if missing:
        raise ParameterError([("MissingKey", f"{cls.__name__} requires {', '.join(missing)}")])
    return cls(**kwargs)


@dataclass(frozen=True, kw_only=True)
class MarketParams:
    """Two-asset lognormal market and spread-call contract.

    Rates, yields and volatilities are annualized; ``maturity`` is in years.
    """

    x1: float
    x2: float
    sigma1: float
    sigma2: float
    rho: float
    r: float
    strike: float
    maturity: float
    q1: float = 0.0
    q2: float = 0.0

    @property
    def rho_bar(self) -> float:
        return math.sqrt(1.0 - self.rho * self.rho)

    @property
    def discount(self) -> float:
        return math.exp(-self.r * self.maturity)

    def replace(self, **changes) -> MarketParams:
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> MarketParams:
        return _from_mapping(cls, {k: float(v) for k, v in data.items()})

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


@dataclass(frozen=True, kw_only=True)
class SvParams:
    """Stochastic-variance extension: dV = kappa (1 - V) dt + nu sqrt(V) dZ."""

    base: MarketParams
    kappa: float
    nu: float
    v0: float
    n_steps: int = 252

    @property
    def feller_violated(self) -> bool:
        """True when 2 kappa < nu**2, i.e. the variance factor can reach zero."""
        return 2.0 * self.kappa < self.nu * self.nu

    def replace(self, **changes) -> SvParams:
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> SvParams:
        data = dict(data)
        if "base" not in data:
            raise ParameterError([("MissingKey", "SvParams requires base")])
        base = MarketParams.from_dict(data.pop("base"))
        if "n_steps" in data:
            n_steps = data["n_steps"]
            if isinstance(n_steps, float) and n_steps.is_integer():
                n_steps = int(n_steps)
            data["n_steps"] = n_steps
        for key in ("kappa", "nu", "v0"):
            if key in data:
                data[key] = float(data[key])
        return _from_mapping(cls, data, base=base)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def _market_violations(p: MarketParams) -> list[tuple[str, str]]:
    out = []
    values = dataclasses.asdict(p)
    for name, value in values.items():
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append(("NonFiniteValue", f"{name}={value!r}"))
    if out:
        return out
    if p.x1 <= 0 or p.x2 <= 0:
        out.append(("NonPositiveSpot", f"x1={p.x1}, x2={p.x2}"))
    if p.sigma1 <= 0 or p.sigma2 <= 0:
        out.append(("NonPositiveVol", f"sigma1={p.sigma1}, sigma2={p.sigma2}"))
    if abs(p.rho) > RHO_MAX:
        out.append(("CorrelationOutOfRange", f"|rho|={abs(p.rho)} exceeds {RHO_MAX}"))
    if p.q1 < 0 or p.q2 < 0:
        out.append(("NegativeDividend", f"q1={p.q1}, q2={p.q2}"))
    if p.strike < 0:
        out.append(("NegativeStrike", f"strike={p.strike}"))
    if p.maturity <= 0:
        out.append(("NonPositiveMaturity", f"maturity={p.maturity}"))
    return out


def validate(params):
    """Check every invariant and return ``params`` unchanged.

    Accepts :class:`MarketParams` or :class:`SvParams`. All failed invariants
    are reported together in a single :class:`ParameterError`.
    """
    if isinstance(params, SvParams):
        out = _market_violations(params.base)
        if not params.kappa > 0:
            out.append(("NonPositiveMeanReversion", f"kappa={params.kappa}"))
        if not params.nu > 0:
            out.append(("NonPositiveVolOfVariance", f"nu={params.nu}"))
        if not params.v0 > 0:
            out.append(("NonPositiveInitialVariance", f"v0={params.v0}"))
        if isinstance(params.n_steps, bool) or not isinstance(params.n_steps, (int, np.integer)) or params.n_steps < 1:
            out.append(("InvalidStepCount", f"n_steps={params.n_steps!r}"))
    elif isinstance(params, MarketParams):
        out = _market_violations(params)
    else:
        raise TypeError(f"cannot validate {type(params).__name__}")
    if out:
        raise ParameterError(out)
    return params


def market_of(params) -> MarketParams:
    return params.base if isinstance(params, SvParams) else params


_DRIVER_FIELDS = (
    "w1T",
    "w2T",
    "s1T",
    "s2T",
    "int_dW1_over_sqrtV",
    "int_dW2_over_sqrtV",
    "int_dt_over_V",
    "int_sqrtV_dt",
    "int_dt_over_sqrtV",
    "int_sqrtV_dW1",
    "int_sqrtV_dW2",
    "int_V_dt",
    "vT",
)


@dataclass
class DriverSummary:
    """Per-path terminal values and accumulated integrals, one entry per path.

    ``w1T``/``w2T`` are the independent Brownian drivers at maturity. The
    ``int_*`` fields are left-point sums of the listed integrals, and the
    ``int_sqrtV_dW*``/``int_V_dt`` trio is enough to rebuild the terminal
    prices for any spot or volatility (see ``paths.terminal_prices``).
    Under GBM every integral takes its constant-variance value.
    """

    w1T: np.ndarray
    w2T: np.ndarray
    s1T: np.ndarray
    s2T: np.ndarray
    int_dW1_over_sqrtV: np.ndarray
    int_dW2_over_sqrtV: np.ndarray
    int_dt_over_V: np.ndarray
    int_sqrtV_dt: np.ndarray
    int_dt_over_sqrtV: np.ndarray
    int_sqrtV_dW1: np.ndarray
    int_sqrtV_dW2: np.ndarray
    int_V_dt: np.ndarray
    vT: np.ndarray
    floor_hits: int = field(default=0, compare=False)

    FIELDS = _DRIVER_FIELDS

    def __len__(self) -> int:
        return int(np.size(self.w1T))

    @property
    def n_paths(self) -> int:
        return len(self)

    @classmethod
    def concat(cls, parts) -> DriverSummary:
        parts = list(parts)
        arrays = {name: np.concatenate([np.atleast_1d(getattr(p, name)) for p in parts]) for name in _DRIVER_FIELDS}
        return cls(**arrays, floor_hits=sum(p.floor_hits for p in parts))

    def to_records(self) -> np.ndarray:
        """Flat little-endian float64 records in field order."""
        rec = np.empty(len(self), dtype=[(name, "<f8") for name in _DRIVER_FIELDS])
        for name in _DRIVER_FIELDS:
            rec[name] = getattr(self, name)
        return rec

    @classmethod
    def from_records(cls, rec: np.ndarray) -> DriverSummary:
        return cls(**{name: np.asarray(rec[name], dtype=float) for name in _DRIVER_FIELDS})


@dataclass
class WeightSet:
    """The six per-path Malliavin weights."""

    delta1: np.ndarray
    delta2: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    vega1: np.ndarray
    vega2: np.ndarray

    def __getitem__(self, name: str) -> np.ndarray:
        if name not in GREEKS:
            raise KeyError(name)
        return getattr(self, name)


GREEKS = ("delta1", "delta2", "gamma1", "gamma2", "vega1", "vega2")
ESTIMATOR_TAGS = ("price", "malliavin", "localized", "finite_diff")


@dataclass(frozen=True)
class GreekEstimate:
    value: float
    std_err: float
    ci_low: float
    ci_high: float
    n_paths: int
    estimator_tag: str
    variance: float = float("nan")

    @classmethod
    def from_samples(cls, samples, *, n_paths: int | None = None, tag: str) -> GreekEstimate:
        """Aggregate i.i.d. per-path (or per-pair) samples into an estimate.

        ``variance`` is the sample variance of one draw; ``std_err`` uses
        ``ddof=1``.
        """
        if tag not in ESTIMATOR_TAGS:
            raise ValueError(f"unknown estimator tag {tag!r}")
        samples = np.asarray(samples, dtype=float)
        n = samples.size
        value = float(samples.mean())
        var = float(samples.var(ddof=1)) if n > 1 else float("nan")
        se = math.sqrt(var / n) if n > 1 else float("nan")
        return cls(
            value=value,
            std_err=se,
            ci_low=value - Z_95 * se,
            ci_high=value + Z_95 * se,
            n_paths=int(n if n_paths is None else n_paths),
            estimator_tag=tag,
            variance=var,
        )

    def z_score(self, target: float) -> float:
        return (self.value - target) / self.std_err


def combined_se(*estimates: GreekEstimate) -> float:
    return math.sqrt(sum(e.std_err**2 for e in estimates))
