import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spreadgreeks.core import MarketParams
from spreadgreeks.payoff import (
    LocalizationSpec,
    default_localization,
    heaviside_slope,
    heaviside_smooth,
    residual_payoff,
    smoothed_payoff,
    spread_call,
)


@pytest.mark.parametrize("s1, s2, K, expected", [(90, 100, 5, 5), (100, 100, 0, 0), (100, 90, 5, 0)])
def test_spread_call(s1, s2, K, expected):
    assert spread_call(s1, s2, K) == expected


K, A = 10.0, 2.0
LOC = LocalizationSpec(A)


@pytest.mark.parametrize("spread, expected", [(K, 0.5), (K + A, 1.0), (K - A, 0.0), (K + 5 * A, 1.0), (K - 5 * A, 0.0)])
def test_heaviside_knots(spread, expected):
    assert heaviside_smooth(50.0, 50.0 + spread, K, LOC) == pytest.approx(expected, abs=1e-15)


def test_smoothed_payoff_continuity_at_knots():
    s1 = 40.0
    assert smoothed_payoff(s1, s1 + K - A, K, LOC) == 0.0
    upper_band = (2 * A) ** 2 / (4 * A)
    assert smoothed_payoff(s1, s1 + K + A, K, LOC) == pytest.approx(upper_band)
    assert smoothed_payoff(s1, s1 + K + A + 1e-12, K, LOC) == pytest.approx(A, abs=1e-10)


def test_smoothed_payoff_derivative_is_ramp_at_strike():
    s1 = 40.0
    h = 1e-6 * A
    fd = (smoothed_payoff(s1, s1 + K + h, K, LOC) - smoothed_payoff(s1, s1 + K - h, K, LOC)) / (2 * h)
    assert abs(fd - 0.5) < 1e-8


@pytest.mark.parametrize("spread, expected", [(K + 2 * A, 0.0), (K - 2 * A, 0.0), (K, -A / 4)])
def test_residual_payoff(spread, expected):
    assert residual_payoff(30.0, 30.0 + spread, K, LOC) == pytest.approx(expected, abs=1e-13)


def test_slope_is_band_indicator():
    s2 = np.array([K - A - 0.1, K - A, K, K + A, K + A + 0.1])
    np.testing.assert_array_equal(heaviside_slope(0.0, s2, K, LOC), [0, 1 / (2 * A), 1 / (2 * A), 1 / (2 * A), 0])


def test_localization_spec_rejects_nonpositive():
    with pytest.raises(ValueError):
        LocalizationSpec(0.0)


def test_default_localization():
    p = MarketParams(x1=100.0, x2=110.0, sigma1=0.2, sigma2=0.3, rho=0.5, r=0.05, strike=20.0, maturity=1.0)
    assert default_localization(p).a == pytest.approx(2.0)
    assert default_localization(p.replace(strike=0.0)).a == pytest.approx(0.1 * 210 / 20)


prices = st.floats(0.0, 300.0, allow_nan=False)
widths = st.floats(1e-3, 50.0, allow_nan=False)
strikes = st.floats(0.0, 50.0, allow_nan=False)


@given(prices, prices, strikes, widths)
def test_decomposition_and_residual_bound(s1, s2, k, a):
    loc = LocalizationSpec(a)
    assert abs(spread_call(s1, s2, k) - (residual_payoff(s1, s2, k, loc) + smoothed_payoff(s1, s2, k, loc))) <= 1e-12
    assert abs(residual_payoff(s1, s2, k, loc)) <= a / 4 * (1 + 1e-12) + 1e-12


@given(prices, prices, prices, strikes, widths)
def test_heaviside_monotone(s1, s2, bump, k, a):
    loc = LocalizationSpec(a)
    assert heaviside_smooth(s1, s2 + bump, k, loc) >= heaviside_smooth(s1, s2, k, loc)
    assert heaviside_smooth(s1 + bump, s2, k, loc) <= heaviside_smooth(s1, s2, k, loc)
