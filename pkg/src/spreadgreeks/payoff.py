"""Spread-call payoff and its localization around the strike.

All functions are vectorized over ``s1``/``s2`` and act on undiscounted
terminal values. The localized pieces depend on the spread ``s2 - s1`` only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LocalizationSpec:
    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"localization half-width must be > 0, got {self.a}")


def default_localization(params) -> LocalizationSpec:
    """0.1 * strike, or 0.1 * (x1 + x2)/20 when that is larger (covers K = 0)."""
    p = getattr(params, "base", params)
    return LocalizationSpec(0.1 * max(p.strike, (p.x1 + p.x2) / 20.0))


def spread_call(s1, s2, K):
    return np.maximum(np.subtract(s2, s1) - K, 0.0)


def heaviside_smooth(s1, s2, K, spec: LocalizationSpec):
    """Linear ramp from 0 at spread ``K - a`` to 1 at ``K + a``."""
    a = spec.a
    return np.clip((np.subtract(s2, s1) - (K - a)) / (2.0 * a), 0.0, 1.0)


def heaviside_slope(s1, s2, K, spec: LocalizationSpec):
    """Derivative of the ramp in the spread: ``1/(2a)`` on the band, else 0."""
    a = spec.a
    d = np.subtract(s2, s1)
    return np.where((d >= K - a) & (d <= K + a), 1.0 / (2.0 * a), 0.0)


def smoothed_payoff(s1, s2, K, spec: LocalizationSpec):
    """C1 payoff whose spread derivative is :func:`heaviside_smooth`."""
    a = spec.a
    d = np.subtract(s2, s1)
    band = (d - (K - a)) ** 2 / (4.0 * a)
    return np.where(d < K - a, 0.0, np.where(d > K + a, d - K, band))


def residual_payoff(s1, s2, K, spec: LocalizationSpec):
    """``spread_call - smoothed_payoff``; zero outside ``[K - a, K + a]``."""
    return spread_call(s1, s2, K) - smoothed_payoff(s1, s2, K, spec)
