"""Simulator tests: draw-protocol replication, moment checks, recovery
experiment bookkeeping, and the returns-to-prices bridge."""

import datetime as dt
import math

import numpy as np
import pytest

from conftest import weekday_calendar
from ipoperf.event_study import monthly_returns
from ipoperf.garch import GarchParams, GarchSpec, InfeasibleParamsError
from ipoperf.ingest import PriceSeries
from ipoperf.simulate import (
    RecoveryResult,
    SimConfig,
    price_path_from_returns,
    recovery_experiment,
    simulate_path,
)

TRUTH = GarchParams(0.0, 1.0, 0.00025, 0.1, 0.8, 0.0)


def oracle_path(p, T, prob, mean, vol, seed, burn):
    """Re-derive a path from the documented draw protocol, plain loops."""
    rng = np.random.default_rng(seed)
    d = (rng.random(T) < prob).astype(float)
    x = mean + vol * rng.standard_normal(T)
    z = rng.standard_normal(T + burn)
    d_full = [0.0] * burn + d.tolist()
    h = p.c3 / (1.0 - p.c4 - p.c5)
    e = []
    for t in range(T + burn):
        if t > 0:
            h = p.c3 + p.c4 * e[t - 1] ** 2 + p.c5 * h + p.c6 * d_full[t]
        e.append(z[t] * math.sqrt(h))
    y = np.array([p.c1 + p.c2 * xi + ei for xi, ei in zip(x, e[burn:])])
    return y, x, d


class TestDrawProtocol:
    def test_same_seed_bitwise_identical(self):
        a = simulate_path(SimConfig(TRUTH, n_obs=500, seed=42))
        b = simulate_path(SimConfig(TRUTH, n_obs=500, seed=42))
        assert np.array_equal(a.y, b.y)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.d, b.d)

    def test_different_seeds_differ(self):
        a = simulate_path(SimConfig(TRUTH, n_obs=500, seed=42))
        b = simulate_path(SimConfig(TRUTH, n_obs=500, seed=43))
        assert not np.array_equal(a.y, b.y)

    def test_matches_documented_protocol_exactly(self):
        p = GarchParams(0.002, 0.9, 0.0004, 0.15, 0.7, 0.0006)
        cfg = SimConfig(p, n_obs=80, dummy_pattern=0.4, market_mean=0.02,
                        market_vol=0.03, seed=777, burn_in=50)
        data = simulate_path(cfg)
        y, x, d = oracle_path(p, 80, 0.4, 0.02, 0.03, 777, 50)
        assert np.array_equal(data.d, d)
        assert np.array_equal(data.x, x)
        assert np.array_equal(data.y, y)

    def test_explicit_dummy_consumes_no_draws(self):
        d = np.zeros(60)
        d[::5] = 1.0
        cfg = SimConfig(TRUTH, n_obs=60, dummy_pattern=d, seed=9)
        data = simulate_path(cfg)
        rng = np.random.default_rng(9)
        expected_x = cfg.market_mean + cfg.market_vol * rng.standard_normal(60)
        assert np.array_equal(data.x, expected_x)
        assert np.array_equal(data.d, d)

    def test_explicit_market_consumes_no_draws(self):
        ms = np.linspace(-0.01, 0.02, 60)
        cfg = SimConfig(TRUTH, n_obs=60, dummy_pattern=np.zeros(60),
                        market_series=ms, seed=9, burn_in=0)
        data = simulate_path(cfg)
        rng = np.random.default_rng(9)
        z = rng.standard_normal(60)
        h0 = TRUTH.c3 / (1.0 - TRUTH.c4 - TRUTH.c5)
        assert np.array_equal(data.x, ms)
        assert data.y[0] == TRUTH.c1 + TRUTH.c2 * ms[0] + z[0] * math.sqrt(h0)


class TestMoments:
    def test_white_noise_variance(self):
        p = GarchParams(0.0, 0.0, 1.0, 0.0, 0.0, 0.0)
        data = simulate_path(SimConfig(p, n_obs=100_000, dummy_pattern=0.0, seed=5))
        assert abs(np.var(data.y) - 1.0) < 0.02
        assert abs(np.mean(data.y)) < 3.0 / math.sqrt(100_000)

    def test_stationary_unconditional_variance(self):
        data = simulate_path(SimConfig(TRUTH, n_obs=100_000, dummy_pattern=0.0, seed=6))
        e = data.y - TRUTH.c1 - TRUTH.c2 * data.x
        target = TRUTH.c3 / (1.0 - TRUTH.c4 - TRUTH.c5)
        assert abs(np.var(e) / target - 1.0) < 0.05

    def test_positive_dummy_effect_raises_dispersion(self):
        p = GarchParams(0.0, 0.0, 0.00025, 0.1, 0.8, 0.01)
        on = simulate_path(SimConfig(p, n_obs=5000, dummy_pattern=np.ones(5000), seed=7))
        off = simulate_path(SimConfig(p, n_obs=5000, dummy_pattern=np.zeros(5000), seed=7))
        assert np.var(on.y) > 2.0 * np.var(off.y)

    def test_integrated_persistence_still_runs(self):
        p = GarchParams(0.0, 1.0, 0.0001, 0.2, 0.8, 0.0)  # c4 + c5 = 1
        data = simulate_path(SimConfig(p, n_obs=200, dummy_pattern=0.0, seed=8))
        assert len(data) == 200


class TestInfeasible:
    def test_nonpositive_intercept_rejected(self):
        p = GarchParams(0.0, 1.0, 0.0, 0.1, 0.8, 0.0)
        with pytest.raises(InfeasibleParamsError):
            simulate_path(SimConfig(p, n_obs=100, seed=1))

    def test_negative_dummy_coefficient_can_sink_variance(self):
        p = GarchParams(0.0, 1.0, 0.00025, 0.1, 0.8, -0.05)
        with pytest.raises(InfeasibleParamsError, match="variance"):
            simulate_path(SimConfig(p, n_obs=200, dummy_pattern=np.ones(200), seed=1))


class TestSimConfigValidation:
    def test_short_series_rejected(self):
        with pytest.raises(ValueError):
            SimConfig(TRUTH, n_obs=1)

    def test_bad_probability_rejected(self):
        with pytest.raises(ValueError, match="probability"):
            SimConfig(TRUTH, n_obs=50, dummy_pattern=1.5)

    def test_wrong_length_dummy_rejected(self):
        with pytest.raises(ValueError, match="length"):
            SimConfig(TRUTH, n_obs=50, dummy_pattern=np.zeros(49))

    def test_non_binary_dummy_rejected(self):
        with pytest.raises(ValueError, match="0 or 1"):
            SimConfig(TRUTH, n_obs=50, dummy_pattern=np.full(50, 0.5))

    def test_wrong_length_market_rejected(self):
        with pytest.raises(ValueError, match="market"):
            SimConfig(TRUTH, n_obs=50, market_series=np.zeros(10))

    def test_negative_burn_in_rejected(self):
        with pytest.raises(ValueError, match="burn_in"):
            SimConfig(TRUTH, n_obs=50, burn_in=-1)


class TestRecoveryExperiment:
    def test_bookkeeping_and_row_layout(self):
        result = recovery_experiment(SimConfig(TRUTH, n_obs=300, seed=10), 3)
        assert result.replications == 3
        assert result.n_converged + result.n_failed == 3
        rows = result.rows()
        assert [r[0] for r in rows] == ["c1", "c2", "c3", "c4", "c5", "c6"]
        assert rows[1][1] == 1.0  # c2 truth carried through
        if result.n_converged:
            assert np.all(np.isfinite(result.bias))
            assert np.all(result.rmse >= np.abs(result.bias) - 1e-15)

    def test_same_config_reproduces_aggregates(self):
        cfg = SimConfig(TRUTH, n_obs=400, seed=11)
        a = recovery_experiment(cfg, 4)
        b = recovery_experiment(cfg, 4)
        assert np.array_equal(a.bias, b.bias)
        assert np.array_equal(a.rmse, b.rmse)
        assert np.array_equal(a.coverage, b.coverage, equal_nan=True)

    def test_every_replication_failing_is_reported_not_raised(self):
        bad = GarchParams(0.0, 1.0, 0.0, 0.1, 0.8, 0.0)  # infeasible truth
        result = recovery_experiment(SimConfig(bad, n_obs=100, seed=12), 5)
        assert result.n_converged == 0
        assert result.n_failed == 5
        assert np.all(np.isnan(result.bias))
        assert len(result.rows()) == 6

    def test_rmse_falls_with_sample_size(self):
        small = recovery_experiment(SimConfig(TRUTH, n_obs=500, seed=13), 20)
        large = recovery_experiment(SimConfig(TRUTH, n_obs=4000, seed=13), 20)
        for i in (1, 3, 4):  # c2, alpha, beta
            assert large.rmse[i] < small.rmse[i]

    def test_zero_replications_rejected(self):
        with pytest.raises(ValueError):
            recovery_experiment(SimConfig(TRUTH, n_obs=100, seed=1), 0)

    def test_coverage_close_to_nominal(self, recovery_t5000):
        # shared long experiment: 500 replications at T=5000
        assert recovery_t5000.n_failed <= 25
        assert 0.88 <= recovery_t5000.coverage[1] <= 0.99  # c2 at nominal 95%
        assert recovery_t5000.coverage_n[1] >= 450
        for i in (3, 4):  # alpha, beta sanity
            assert 0.85 <= recovery_t5000.coverage[i] <= 0.995


class TestPricePathFromReturns:
    def test_round_trip_through_event_study(self):
        rng = np.random.default_rng(14)
        cal = weekday_calendar(n=760)
        returns = rng.normal(0.01, 0.05, size=36)
        series = price_path_from_returns("SIM", returns, cal)
        bench = PriceSeries("INDEX", tuple(cal), np.full(len(cal), 1000.0))
        ev, bench_ev = monthly_returns(series, bench, cal[0])
        assert ev.complete
        assert np.allclose(ev.monthly_returns, returns, rtol=1e-12, atol=1e-15)
        assert np.all(bench_ev.monthly_returns == 0.0)

    def test_flat_within_window_jump_at_month_end(self):
        cal = weekday_calendar(n=100)
        series = price_path_from_returns("SIM", [0.10, -0.05], cal, month_days=21)
        closes = series.closes
        assert len(closes) == 43
        assert np.all(closes[1:21] == closes[1])
        assert closes[21] == pytest.approx(closes[1] * 1.10)
        assert np.all(closes[22:42] == closes[21])
        assert closes[42] == pytest.approx(closes[21] * 0.95)

    def test_base_price_on_listing_day(self):
        cal = weekday_calendar(n=30)
        series = price_path_from_returns("SIM", [0.0], cal, base_price=250.0)
        assert series.closes[0] == 250.0
        assert series.dates[0] == cal[0]

    def test_short_calendar_rejected(self):
        cal = weekday_calendar(n=42)  # need 43 for two months
        with pytest.raises(ValueError, match="calendar"):
            price_path_from_returns("SIM", [0.1, 0.1], cal)

    def test_ruinous_return_rejected(self):
        cal = weekday_calendar(n=50)
        with pytest.raises(ValueError, match="non-positive"):
            price_path_from_returns("SIM", [-1.5], cal)

    def test_custom_month_length(self):
        cal = weekday_calendar(n=20)
        series = price_path_from_returns("SIM", [0.2, 0.2], cal, month_days=5)
        assert len(series.closes) == 11
        assert series.closes[10] == pytest.approx(100.0 * 1.44)
