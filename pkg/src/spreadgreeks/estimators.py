"""Monte Carlo price and Greek estimators, plus the comparison report.

Every estimator accepts precomputed ``drivers`` so several methods can be
evaluated on one shared simulation (common random numbers).
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import payoff as po
from .core import (
    GREEKS,
    DriverSummary,
    GreekEstimate,
    MarketParams,
    SvParams,
    combined_se,
    market_of,
    validate,
)
from .oracles import margrabe
from .paths import SeedSpec, simulate, terminal_prices
from .weights import ModelKind, weights_for

METHODS = ("malliavin", "localized", "fd")
LOCALIZED_GREEKS = ("delta1", "delta2", "gamma1", "gamma2")
REPORT_COLUMNS = ("greek", "method", "estimate", "std_err", "ci_low", "ci_high", "variance", "n_paths", "wall_ms")

Payoff = Callable[[np.ndarray, np.ndarray], np.ndarray]


class BumpTooSmall(ArithmeticError):
    pass


class NumericalFailure(ArithmeticError):
    pass


@dataclass(frozen=True)
class FdBumps:
    """Relative bump sizes for finite differences."""

    delta: float = 1e-2
    gamma: float = 5e-2
    vega: float = 1e-2

    def for_greek(self, which: str) -> float:
        return getattr(self, which[:-1] if which[-1].isdigit() else which)


@dataclass(frozen=True)
class RunSpec:
    params: MarketParams | SvParams
    n_paths: int = 1_000_000
    seed: SeedSpec = SeedSpec()
    antithetic: bool = False
    localization: po.LocalizationSpec | None = None
    fd_bumps: FdBumps = FdBumps()
    threads: int | None = 1

    @property
    def model(self) -> ModelKind:
        return ModelKind.of(self.params)

    @property
    def market(self) -> MarketParams:
        return market_of(self.params)

    def validated(self) -> RunSpec:
        validate(self.params)
        if self.n_paths < 2:
            raise ValueError(f"n_paths must be >= 2, got {self.n_paths}")
        for name, bump in asdict(self.fd_bumps).items():
            if not 0 < bump < 0.5:
                raise ValueError(f"{name} bump must lie in (0, 0.5), got {bump}")
        return self

    def simulate(self) -> DriverSummary:
        self.validated()
        return simulate(self.params, self.n_paths, self.seed, antithetic=self.antithetic, threads=self.threads)


def _drivers(spec: RunSpec, drivers: DriverSummary | None) -> DriverSummary:
    if drivers is None:
        return spec.simulate()
    spec.validated()
    if len(drivers) != spec.n_paths:
        raise ValueError(f"drivers hold {len(drivers)} paths, spec asks for {spec.n_paths}")
    return drivers


def _payoff(spec: RunSpec, payoff: Payoff | None) -> Payoff:
    if payoff is not None:
        return payoff
    K = spec.market.strike
    return lambda s1, s2: po.spread_call(s1, s2, K)


def _aggregate(samples: np.ndarray, spec: RunSpec, tag: str) -> GreekEstimate:
    samples = np.asarray(samples, dtype=float)
    if spec.antithetic:
        samples = samples.reshape(-1, 2).mean(axis=1)
    est = GreekEstimate.from_samples(samples, n_paths=spec.n_paths, tag=tag)
    if not (math.isfinite(est.value) and math.isfinite(est.std_err)):
        raise NumericalFailure(f"non-finite {tag} estimate")
    return est


def _check_greek(which: str, allowed: Sequence[str] = GREEKS) -> None:
    if which not in allowed:
        raise ValueError(f"unknown greek {which!r}; expected one of {', '.join(allowed)}")


def price_samples(spec: RunSpec, drivers: DriverSummary, payoff: Payoff | None = None, params=None) -> np.ndarray:
    params = spec.params if params is None else params
    s1, s2 = terminal_prices(drivers, params)
    return market_of(params).discount * _payoff(spec, payoff)(s1, s2)


def estimate_price(spec: RunSpec, *, drivers: DriverSummary | None = None, payoff: Payoff | None = None) -> GreekEstimate:
    """Discounted mean payoff."""
    drivers = _drivers(spec, drivers)
    return _aggregate(price_samples(spec, drivers, payoff), spec, "price")


def malliavin_samples(spec: RunSpec, which: str, drivers: DriverSummary, payoff: Payoff | None = None) -> np.ndarray:
    _check_greek(which)
    return price_samples(spec, drivers, payoff) * weights_for(drivers, spec.params)[which]


def estimate_greek_malliavin(
    spec: RunSpec, which: str, *, drivers: DriverSummary | None = None, payoff: Payoff | None = None
) -> GreekEstimate:
    """``E[exp(-rT) payoff * weight]`` with the global weight for ``which``."""
    _check_greek(which)
    drivers = _drivers(spec, drivers)
    return _aggregate(malliavin_samples(spec, which, drivers, payoff), spec, "malliavin")


def localized_samples(spec: RunSpec, which: str, drivers: DriverSummary, direct_sign: float = -1.0) -> np.ndarray:
    """Per-path localized sample: residual payoff times weight plus direct term.

    ``direct_sign`` only affects delta1; -1 is the chain-rule sign since the
    smoothed payoff decreases in ``s1``.
    """
    _check_greek(which, LOCALIZED_GREEKS)
    p = spec.market
    loc = spec.localization or po.default_localization(p)
    s1, s2 = terminal_prices(drivers, spec.params)
    disc = p.discount
    w = weights_for(drivers, spec.params)[which]
    local = po.residual_payoff(s1, s2, p.strike, loc) * w
    if which == "delta1":
        direct = direct_sign * po.heaviside_smooth(s1, s2, p.strike, loc) * s1 / p.x1
    elif which == "delta2":
        direct = po.heaviside_smooth(s1, s2, p.strike, loc) * s2 / p.x2
    elif which == "gamma1":
        direct = po.heaviside_slope(s1, s2, p.strike, loc) * (s1 / p.x1) ** 2
    else:
        direct = po.heaviside_slope(s1, s2, p.strike, loc) * (s2 / p.x2) ** 2
    return disc * (local + direct)


def estimate_greek_localized(spec: RunSpec, which: str, *, drivers: DriverSummary | None = None) -> GreekEstimate:
    """Localized Delta/Gamma; the SE comes from the per-path sum of both terms."""
    _check_greek(which, LOCALIZED_GREEKS)
    drivers = _drivers(spec, drivers)
    return _aggregate(localized_samples(spec, which, drivers), spec, "localized")


_BUMPED_FIELD = {
    "delta1": "x1",
    "delta2": "x2",
    "gamma1": "x1",
    "gamma2": "x2",
    "vega1": "sigma1",
    "vega2": "sigma2",
}


def _bumped(params, name: str, value: float):
    if isinstance(params, SvParams):
        return params.replace(base=params.base.replace(**{name: value}))
    return params.replace(**{name: value})


def fd_samples(spec: RunSpec, which: str, drivers: DriverSummary, payoff: Payoff | None = None) -> np.ndarray:
    _check_greek(which)
    name = _BUMPED_FIELD[which]
    base = getattr(spec.market, name)
    h = spec.fd_bumps.for_greek(which) * base
    up = price_samples(spec, drivers, payoff, _bumped(spec.params, name, base + h))
    down = price_samples(spec, drivers, payoff, _bumped(spec.params, name, base - h))
    if which.startswith("gamma"):
        mid = price_samples(spec, drivers, payoff)
        return (up - 2.0 * mid + down) / (h * h)
    return (up - down) / (2.0 * h)


def estimate_greek_fd(
    spec: RunSpec, which: str, *, drivers: DriverSummary | None = None, payoff: Payoff | None = None
) -> GreekEstimate:
    """Central differences with common random numbers.

    Bumped prices reuse the same drivers; the variance factor does not
    depend on spots or volatilities, so this equals re-running with
    identical seeds.
    """
    _check_greek(which)
    drivers = _drivers(spec, drivers)
    est = _aggregate(fd_samples(spec, which, drivers, payoff), spec, "finite_diff")
    if est.value != 0 and est.std_err > 10 * abs(est.value):
        raise BumpTooSmall(f"{which}: std_err {est.std_err:.3g} exceeds 10x |estimate| {abs(est.value):.3g}")
    return est


@dataclass
class ReportRow:
    greek: str
    method: str
    estimate: float
    std_err: float
    ci_low: float
    ci_high: float
    variance: float
    n_paths: int
    wall_ms: float | None = None
    variance_ratio: float | None = None

    @classmethod
    def from_estimate(cls, greek: str, method: str, est: GreekEstimate, wall_ms: float | None = None) -> ReportRow:
        return cls(greek, method, est.value, est.std_err, est.ci_low, est.ci_high, est.variance, est.n_paths, wall_ms)

    @classmethod
    def from_oracle(cls, greek: str, method: str, value: float) -> ReportRow:
        return cls(greek, method, value, 0.0, value, value, 0.0, 0)


@dataclass
class Report:
    rows: list[ReportRow]
    metadata: dict = field(default_factory=dict)
    extra_columns: tuple[str, ...] = ()

    def columns(self) -> tuple[str, ...]:
        return REPORT_COLUMNS + self.extra_columns

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns())
        for row in self.rows:
            writer.writerow([_csv_cell(getattr(row, c)) for c in self.columns()])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "columns": list(self.columns()),
            "rows": [{c: _json_cell(getattr(row, c)) for c in self.columns()} for row in self.rows],
            "metadata": self.metadata,
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"

    def row(self, greek: str, method: str) -> ReportRow:
        for r in self.rows:
            if r.greek == greek and r.method == method:
                return r
        raise KeyError((greek, method))


def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _timed(fn, timing: bool):
    t0 = time.perf_counter()
    out = fn()
    return out, ((time.perf_counter() - t0) * 1e3 if timing else None)


def price_report(spec: RunSpec, *, drivers: DriverSummary | None = None, timing: bool = False) -> Report:
    drivers = _drivers(spec, drivers)
    est, ms = _timed(lambda: estimate_price(spec, drivers=drivers), timing)
    return Report([ReportRow.from_estimate("price", "mc", est, ms)], _metadata(spec, drivers))


def oracle_greeks(spec: RunSpec) -> dict[str, float] | None:
    """Margrabe values when they apply (GBM, zero strike), else None."""
    if spec.model is ModelKind.GBM and spec.market.strike == 0:
        return margrabe(spec.market).available()
    return None


def greeks_report(
    spec: RunSpec,
    greeks: Sequence[str] = GREEKS,
    methods: Sequence[str] = METHODS,
    *,
    drivers: DriverSummary | None = None,
    timing: bool = False,
    attach_oracle: bool = True,
) -> Report:
    """One row per applicable (greek, method); localized covers Delta/Gamma only.

    With GBM and zero strike, ``margrabe`` rows carry the analytic values.
    """
    for g in greeks:
        _check_greek(g)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; expected one of {', '.join(METHODS)}")
    drivers = _drivers(spec, drivers)
    runners = {
        "malliavin": lambda g: estimate_greek_malliavin(spec, g, drivers=drivers),
        "localized": lambda g: estimate_greek_localized(spec, g, drivers=drivers),
        "fd": lambda g: estimate_greek_fd(spec, g, drivers=drivers),
    }
    oracle = oracle_greeks(spec) if attach_oracle else None
    rows = []
    for g in greeks:
        for m in methods:
            if m == "localized" and g not in LOCALIZED_GREEKS:
                continue
            est, ms = _timed(lambda: runners[m](g), timing)
            rows.append(ReportRow.from_estimate(g, m, est, ms))
        if oracle is not None:
            rows.append(ReportRow.from_oracle(g, "margrabe", oracle[g]))
    return Report(rows, _metadata(spec, drivers))


def compare_report(
    spec: RunSpec,
    greeks: Sequence[str] = GREEKS,
    *,
    drivers: DriverSummary | None = None,
    timing: bool = False,
) -> Report:
    """All methods on shared paths, with localized/global variance ratios.

    The ``variance_ratio`` column is filled on localized rows. The metadata
    records which sign of the localized delta1 direct term agrees with FD.
    """
    drivers = _drivers(spec, drivers)
    report = greeks_report(spec, greeks, METHODS, drivers=drivers, timing=timing)
    ratios = {}
    for row in report.rows:
        if row.method == "localized":
            row.variance_ratio = row.variance / report.row(row.greek, "malliavin").variance
            ratios[row.greek] = row.variance_ratio
    report.extra_columns = ("variance_ratio",)
    report.metadata["variance_ratio"] = ratios
    if "delta1" in greeks:
        report.metadata["localized_delta1_sign"] = localized_sign_check(spec, drivers)
    return report


def localized_sign_check(spec: RunSpec, drivers: DriverSummary) -> dict:
    """Score both signs of the localized delta1 direct term against FD."""
    fd = estimate_greek_fd(spec, "delta1", drivers=drivers)
    out = {}
    for label, sign in (("negative", -1.0), ("positive", 1.0)):
        est = _aggregate(localized_samples(spec, "delta1", drivers, direct_sign=sign), spec, "localized")
        out[f"z_{label}"] = (est.value - fd.value) / combined_se(est, fd)
    out["confirmed"] = "negative" if abs(out["z_negative"]) <= abs(out["z_positive"]) else "positive"
    return out


def _metadata(spec: RunSpec, drivers: DriverSummary) -> dict:
    loc = spec.localization or po.default_localization(spec.market)
    meta = {
        "model": spec.model.value,
        "params": asdict(spec.params),
        "n_paths": spec.n_paths,
        "master_seed": int(spec.seed.master_seed),
        "batch_size": spec.seed.batch_size,
        "antithetic": spec.antithetic,
        "localization_a": loc.a,
        "fd_bumps": asdict(spec.fd_bumps),
    }
    if spec.model is ModelKind.SV:
        meta["variance_floor_hits"] = drivers.floor_hits
        meta["feller_violated"] = spec.params.feller_violated
    return meta
