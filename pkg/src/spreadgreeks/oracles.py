"""Closed-form references: Margrabe, Black-Scholes and Kirk."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from scipy.special import ndtr

from .core import MarketParams


class DegenerateVol(ValueError):
    pass


@dataclass(frozen=True)
class OracleResult:
    """Reference price and Greeks; ``None`` marks an unavailable field."""

    price: float | None = None
    delta1: float | None = None
    delta2: float | None = None
    gamma1: float | None = None
    gamma2: float | None = None
    vega1: float | None = None
    vega2: float | None = None
    approximate: bool = False

    def get(self, name: str) -> float | None:
        return getattr(self, name)

    def available(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "approximate" and getattr(self, f.name) is not None}


def _npdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _exchange(fwd2: float, fwd1: float, vol: float, T: float) -> tuple[float, float, float]:
    # value of receiving fwd2 and paying fwd1 (both already discounted)
    sd = vol * math.sqrt(T)
    d_plus = (math.log(fwd2 / fwd1) + 0.5 * sd * sd) / sd
    d_minus = d_plus - sd
    return fwd2 * float(ndtr(d_plus)) - fwd1 * float(ndtr(d_minus)), d_plus, d_minus


def margrabe(params: MarketParams) -> OracleResult:
    """Zero-strike spread (exchange) option with exact Greeks."""
    p = params
    if p.strike != 0:
        raise ValueError(f"margrabe requires strike == 0, got {p.strike}")
    var = p.sigma1**2 + p.sigma2**2 - 2.0 * p.rho * p.sigma1 * p.sigma2
    if var * p.maturity < 1e-14:
        raise DegenerateVol(f"DegenerateVol: spread variance {var} is zero")
    vol = math.sqrt(var)
    T = p.maturity
    e1, e2 = math.exp(-p.q1 * T), math.exp(-p.q2 * T)
    price, d_plus, d_minus = _exchange(p.x2 * e2, p.x1 * e1, vol, T)
    sd = vol * math.sqrt(T)
    # x2 e2 phi(d+) == x1 e1 phi(d-)
    vega_total = p.x2 * e2 * _npdf(d_plus) * math.sqrt(T)
    return OracleResult(
        price=price,
        delta1=-e1 * float(ndtr(d_minus)),
        delta2=e2 * float(ndtr(d_plus)),
        gamma1=e1 * _npdf(d_minus) / (p.x1 * sd),
        gamma2=e2 * _npdf(d_plus) / (p.x2 * sd),
        vega1=vega_total * (p.sigma1 - p.rho * p.sigma2) / vol,
        vega2=vega_total * (p.sigma2 - p.rho * p.sigma1) / vol,
    )


def black_scholes_call(x: float, sigma: float, r: float, q: float, strike: float, maturity: float) -> OracleResult:
    """European call on one asset.

    The Greeks land in the asset-2 slots (``delta2``, ``gamma2``, ``vega2``)
    because this serves as the ``x1 -> 0`` limit of the spread call.
    """
    T = maturity
    sd = sigma * math.sqrt(T)
    eq, er = math.exp(-q * T), math.exp(-r * T)
    d1 = (math.log(x / strike) + (r - q) * T + 0.5 * sd * sd) / sd
    d2 = d1 - sd
    return OracleResult(
        price=x * eq * float(ndtr(d1)) - strike * er * float(ndtr(d2)),
        delta2=eq * float(ndtr(d1)),
        gamma2=eq * _npdf(d1) / (x * sd),
        vega2=x * eq * _npdf(d1) * math.sqrt(T),
    )


def kirk_approx(params: MarketParams) -> OracleResult:
    """Kirk's lognormal approximation (price only, flagged approximate).

    The strike is folded into the asset-1 leg; exact when ``strike == 0``.
    """
    p = params
    T = p.maturity
    fwd1 = p.x1 * math.exp(-p.q1 * T)
    fwd2 = p.x2 * math.exp(-p.q2 * T)
    leg1 = fwd1 + p.strike * math.exp(-p.r * T)
    f = fwd1 / leg1
    var = p.sigma2**2 - 2.0 * p.rho * p.sigma1 * p.sigma2 * f + (p.sigma1 * f) ** 2
    if var * T < 1e-14:
        raise DegenerateVol(f"DegenerateVol: effective variance {var} is zero")
    price, _, _ = _exchange(fwd2, leg1, math.sqrt(var), T)
    return OracleResult(price=price, approximate=True)
