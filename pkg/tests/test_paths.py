import math

import numpy as np
import pytest

from spreadgreeks.core import DriverSummary, MarketParams, SvParams
from spreadgreeks.paths import (
    VARIANCE_FLOOR,
    PathGrid,
    SeedSpec,
    dump_drivers,
    gbm_terminal,
    load_drivers,
    simulate,
    sv_path,
    terminal_prices,
)

P = MarketParams(x1=100.0, x2=110.0, sigma1=0.2, sigma2=0.3, rho=0.5, r=0.05, strike=10.0, maturity=1.0, q1=0.01, q2=0.02)


def test_gbm_zero_noise_path():
    d = gbm_terminal(P, np.zeros((2, 1)))
    assert d.s1T[0] == pytest.approx(P.x1 * math.exp((P.r - P.q1 - P.sigma1**2 / 2) * P.maturity), rel=1e-14)
    assert d.s2T[0] == pytest.approx(P.x2 * math.exp((P.r - P.q2 - P.sigma2**2 / 2) * P.maturity), rel=1e-14)


def test_gbm_independence_at_zero_correlation():
    p = P.replace(rho=0.0)
    z = np.array([[-2.0, 0.0, 3.0], [0.0, 0.0, 0.0]])
    d = gbm_terminal(p, z)
    expected = p.x2 * math.exp((p.r - p.q2 - p.sigma2**2 / 2) * p.maturity)
    np.testing.assert_allclose(d.s2T, expected, rtol=1e-14)


def test_gbm_terminal_uses_correlated_driver():
    z = np.array([[0.7], [-0.4]])
    d = gbm_terminal(P, z)
    w2 = P.rho * 0.7 + P.rho_bar * -0.4
    assert d.s2T[0] == pytest.approx(P.x2 * math.exp((P.r - P.q2 - P.sigma2**2 / 2) + P.sigma2 * w2), rel=1e-14)
    assert d.int_dt_over_V[0] == d.int_sqrtV_dt[0] == d.int_V_dt[0] == P.maturity
    assert d.int_dW1_over_sqrtV[0] == d.w1T[0]


def test_discounted_price_is_martingale(gbm_atm_run):
    spec, d = gbm_atm_run
    p = spec.market
    disc = p.discount * d.s1T
    se = disc.std(ddof=1) / math.sqrt(len(d))
    assert abs(disc.mean() - p.x1 * math.exp(-p.q1 * p.maturity)) < 3 * se


def _sv(nu=0.3, kappa=1.0, v0=1.0, n_steps=50, base=P):
    return SvParams(base=base, kappa=kappa, nu=nu, v0=v0, n_steps=n_steps)


def test_sv_zero_increments_fixed_point():
    sv = _sv(n_steps=20)
    d = sv_path(sv, np.zeros((20, 3, 4)))
    np.testing.assert_array_equal(d.vT, 1.0)
    np.testing.assert_allclose(d.int_dt_over_V, sv.base.maturity, rtol=1e-14)
    np.testing.assert_array_equal(d.int_dW1_over_sqrtV, 0.0)


def test_sv_reduces_to_gbm_when_variance_is_frozen():
    rng = np.random.default_rng(5)
    n_steps, n = 64, 1000
    z = rng.standard_normal((n_steps, 3, n))
    z[:, 2, :] = 0.0
    sv = _sv(n_steps=n_steps)
    d = sv_path(sv, z)
    g = gbm_terminal(P, z[:, :2, :].sum(axis=0) / math.sqrt(n_steps))
    np.testing.assert_allclose(d.int_dW1_over_sqrtV, g.w1T, atol=1e-12)
    np.testing.assert_allclose(d.int_dW2_over_sqrtV, g.w2T, atol=1e-12)
    np.testing.assert_allclose(d.int_dt_over_V, P.maturity, rtol=1e-13)
    np.testing.assert_allclose(d.int_sqrtV_dt, P.maturity, rtol=1e-13)
    np.testing.assert_allclose(d.s1T, g.s1T, rtol=1e-12)
    np.testing.assert_allclose(d.s2T, g.s2T, rtol=1e-12)


def test_sv_tiny_vol_of_variance_matches_gbm():
    rng = np.random.default_rng(6)
    z = rng.standard_normal((32, 3, 500))
    d = sv_path(_sv(nu=1e-10, n_steps=32), z)
    g = gbm_terminal(P, z[:, :2, :].sum(axis=0) / math.sqrt(32))
    np.testing.assert_allclose(d.int_dW1_over_sqrtV, g.w1T, atol=1e-8)
    np.testing.assert_allclose(d.int_dt_over_V, P.maturity, atol=1e-8)
    np.testing.assert_allclose(d.s2T, g.s2T, rtol=1e-8)


def test_terminal_prices_rebuilds_stored_values():
    sv = _sv(n_steps=16)
    d = simulate(sv, 2000, SeedSpec(3, 512))
    s1, s2 = terminal_prices(d, sv)
    np.testing.assert_array_equal(s1, d.s1T)
    np.testing.assert_array_equal(s2, d.s2T)


def test_cir_integrated_mean_and_jensen():
    kappa, v0, T = 1.0, 1.5, 1.0
    sv = _sv(nu=0.3, kappa=kappa, v0=v0, n_steps=252, base=P.replace(maturity=T))
    d = simulate(sv, 100_000, SeedSpec(11))
    n = len(d)
    expected = T * (1 + (v0 - 1) * (1 - math.exp(-kappa * T)) / (kappa * T))
    se = d.int_V_dt.std(ddof=1) / math.sqrt(n)
    assert abs(d.int_V_dt.mean() - expected) < 3 * se
    # E[int sqrt(V) dt] <= sqrt(E[int V dt] * T) by Cauchy-Schwarz/Jensen
    assert d.int_sqrtV_dt.mean() <= math.sqrt(expected * T) + 3 * d.int_sqrtV_dt.std(ddof=1) / math.sqrt(n)


def test_sqrt_v_integral_below_horizon_for_unit_mean():
    sv = _sv(nu=0.3, kappa=1.0, v0=1.0, n_steps=252)
    d = simulate(sv, 100_000, SeedSpec(12))
    assert d.int_sqrtV_dt.mean() <= P.maturity


def test_correlation_recovery():
    d = simulate(P, 200_000, SeedSpec(8))
    w2 = P.rho * d.w1T + P.rho_bar * d.w2T
    corr = np.corrcoef(d.w1T, w2)[0, 1]
    assert abs(corr - P.rho) < 3 / math.sqrt(len(d))


@pytest.mark.parametrize("params", [P, _sv(n_steps=8)], ids=["gbm", "sv"])
def test_deterministic_across_thread_counts(params):
    seed = SeedSpec(1234, batch_size=1000)
    runs = [simulate(params, 10_500, seed, threads=t) for t in (1, 2, 8)]
    for other in runs[1:]:
        for name in DriverSummary.FIELDS:
            assert np.array_equal(getattr(runs[0], name), getattr(other, name)), name


def test_batches_are_independent_streams():
    seed = SeedSpec(99, batch_size=100)
    d = simulate(P, 300, seed)
    assert not np.array_equal(d.w1T[:100], d.w1T[100:200])
    # batch 1 content does not depend on how many batches follow
    d2 = simulate(P, 200, seed)
    np.testing.assert_array_equal(d.w1T[:200], d2.w1T)


def test_antithetic_pairs_are_mirrored():
    d = simulate(_sv(n_steps=4), 100, SeedSpec(1, 20), antithetic=True)
    np.testing.assert_array_equal(d.w1T[0::2], -d.w1T[1::2])
    np.testing.assert_array_equal(d.w2T[0::2], -d.w2T[1::2])
    with pytest.raises(ValueError):
        simulate(P, 101, SeedSpec(1, 20), antithetic=True)


def test_variance_floor_engages_without_blowing_up():
    sv = _sv(nu=2.5, kappa=0.2, v0=0.05, n_steps=100)
    assert sv.feller_violated
    d = simulate(sv, 5000, SeedSpec(4))
    assert d.floor_hits > 0
    for name in DriverSummary.FIELDS:
        assert np.all(np.isfinite(getattr(d, name))), name
    assert np.all(d.int_dt_over_V <= P.maturity / VARIANCE_FLOOR * (1 + 1e-12))
    assert np.all(d.int_V_dt >= P.maturity * VARIANCE_FLOOR * (1 - 1e-12))


def test_path_grid():
    g = PathGrid(252, 2.0)
    assert g.dt == pytest.approx(2.0 / 252)
    t = g.times
    assert t[0] == 0.0 and t[-1] == 2.0 and len(t) == 253
    np.testing.assert_allclose(np.diff(t), g.dt)


def test_dump_round_trip(tmp_path):
    d = simulate(_sv(n_steps=4), 300, SeedSpec(2, 128))
    path = tmp_path / "drivers.bin"
    dump_drivers(d, path)
    assert path.stat().st_size == 300 * len(DriverSummary.FIELDS) * 8
    back = load_drivers(path)
    for name in DriverSummary.FIELDS:
        np.testing.assert_array_equal(getattr(back, name), getattr(d, name))
    raw = np.fromfile(path, dtype="<f8").reshape(300, -1)
    np.testing.assert_array_equal(raw[:, 0], d.w1T)
    np.testing.assert_array_equal(raw[:, 3], d.s2T)


def test_seed_spec_rejects_bad_values():
    with pytest.raises(ValueError):
        SeedSpec(-1)
    with pytest.raises(ValueError):
        SeedSpec(0, 0)
