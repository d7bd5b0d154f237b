"""Per-path Malliavin weights for the GBM and stochastic-variance models.

A sensitivity equals ``E[exp(-rT) * payoff(S1(T), S2(T)) * weight]`` for
any square-integrable payoff. Both models have a diagonal first variation,
``Y_ii(t) = S_i(t)/x_i``, so the weights only need the independent drivers
``W1~``, ``W2~`` and a handful of variance integrals. The time weighting is
the constant ``1/T``.
"""

from __future__ import annotations

import enum

import numpy as np

from .core import DriverSummary, MarketParams, SvParams, WeightSet, market_of


class ModelKind(enum.Enum):
    GBM = "gbm"
    SV = "sv"

    @classmethod
    def of(cls, params) -> ModelKind:
        return cls.SV if isinstance(params, SvParams) else cls.GBM


def gbm_weights(drivers: DriverSummary, params: MarketParams) -> WeightSet:
    """Closed-form weights under correlated GBM.

    ``W1``/``W2`` below are the independent drivers ``w1T``/``w2T``; the
    correlated asset-2 driver is ``rho*W1 + rho_bar*W2``.
    """
    x1, x2, s1, s2, rho, T = params.x1, params.x2, params.sigma1, params.sigma2, params.rho, params.maturity
    rb = params.rho_bar
    w1, w2 = drivers.w1T, drivers.w2T

    delta1 = (rb * w1 - rho * w2) / (s1 * x1 * T * rb)
    delta2 = w2 / (s2 * x2 * T * rb)
    gamma1 = delta1**2 - delta1 / x1 - 1.0 / (T * x1**2 * s1**2 * rb**2)
    gamma2 = delta2**2 - delta2 / x2 - 1.0 / (T * x2**2 * s2**2 * rb**2)
    vega1 = ((w1 - s1 * T) * (w1 / s1 - rho * w2 / (s1 * rb)) - T / s1) / T
    # d log S2 / d sigma2 = W2_corr - sigma2 T, with W2_corr the asset-2 driver
    vega2 = (rho * w1 + rb * w2 - s2 * T) * w2 / (s2 * rb * T) - 1.0 / s2
    return WeightSet(delta1, delta2, gamma1, gamma2, vega1, vega2)


def sv_weights(drivers: DriverSummary, params) -> WeightSet:
    """Weights under the stochastic-variance model.

    Uses ``I_i = int dW_i~/sqrt(V)``, ``J = int dt/V``,
    ``M_i = int sqrt(V) dW_i~`` and ``Q = int V dt``. On GBM drivers
    (``V == 1``) this reproduces :func:`gbm_weights` exactly.
    """
    p = market_of(params)
    x1, x2, s1, s2, rho, T = p.x1, p.x2, p.sigma1, p.sigma2, p.rho, p.maturity
    rb = p.rho_bar
    i1, i2 = drivers.int_dW1_over_sqrtV, drivers.int_dW2_over_sqrtV
    j = drivers.int_dt_over_V
    m1, m2 = drivers.int_sqrtV_dW1, drivers.int_sqrtV_dW2
    q = drivers.int_V_dt

    dir1 = i1 / s1 - rho * i2 / (s1 * rb)
    delta1 = dir1 / (x1 * T)
    delta2 = i2 / (s2 * rb * x2 * T)
    gamma1 = delta1**2 - delta1 / x1 - j / (T**2 * s1**2 * x1**2 * rb**2)
    gamma2 = delta2**2 - delta2 / x2 - j / (T**2 * s2**2 * x2**2 * rb**2)
    # pathwise d log S_i / d sigma_i
    dlog1 = m1 - s1 * q
    dlog2 = rho * m1 + rb * m2 - s2 * q
    vega1 = dlog1 * dir1 / T - 1.0 / s1
    vega2 = dlog2 * i2 / (s2 * rb * T) - 1.0 / s2
    return WeightSet(delta1, delta2, gamma1, gamma2, vega1, vega2)


def weights_for(drivers: DriverSummary, params) -> WeightSet:
    if ModelKind.of(params) is ModelKind.SV:
        return sv_weights(drivers, params)
    return gbm_weights(drivers, params)


def gamma_curvature(weights: WeightSet, x1: float, x2: float) -> tuple[np.ndarray, np.ndarray]:
    """The curvature terms ``delta_i**2 - delta_i/x_i - gamma_i`` (pathwise)."""
    c1 = weights.delta1**2 - weights.delta1 / x1 - weights.gamma1
    c2 = weights.delta2**2 - weights.delta2 / x2 - weights.gamma2
    return c1, c2
