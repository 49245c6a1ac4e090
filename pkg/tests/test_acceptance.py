"""Acceptance gate: one check per shipped guarantee, one printed verdict line
each (run with -s to see them). Heavy statistical checks live here on purpose;
the whole gate is minutes-scale."""

import math
import statistics
from pathlib import Path

import numpy as np

from conftest import RECOVERY_TRUTH, random_walk_series, weekday_calendar
from ipoperf.cli import main as cli_main
from ipoperf.event_study import (
    INITIAL_PERIOD,
    buy_and_hold_return,
    cohort_summary,
    cumulative_returns,
    event_month_of,
    monthly_returns,
)
from ipoperf.garch import GarchFit, GarchParams, cohort_verdict, estimate, is_significant
from ipoperf.ingest import PriceSeries
from ipoperf.report import format_percent
from ipoperf.simulate import SimConfig, recovery_experiment, simulate_path

FIXTURES = Path(__file__).resolve().parent / "fixtures"
PLANTED = FIXTURES / "garch_planted"


def _verdict(num: int, desc: str, ok: bool) -> None:
    print(f"acceptance {num}: {'PASS' if ok else 'FAIL'} - {desc}")
    assert ok, f"acceptance {num} failed: {desc}"


def _close(a, b, rel=1e-10) -> bool:
    if a is None or b is None:
        return a is None and b is None
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


def test_criterion_1_event_clock():
    ok = event_month_of(1) == INITIAL_PERIOD
    for day in range(2, 758):
        # independent rule: month m spans event days 21*(m-1)+2 .. 21*m+1
        month = next(
            m for m in range(1, 40) if 21 * (m - 1) + 2 <= day <= 21 * m + 1
        )
        ok = ok and event_month_of(day) == month
    ok = ok and (event_month_of(2), event_month_of(22), event_month_of(23)) == (1, 1, 2)
    ok = ok and event_month_of(757) == 36
    _verdict(1, "event-clock month mapping exact for days 1..757", ok)


def test_criterion_2_cohort_oracle():
    rng = np.random.default_rng(424242)
    calendar = weekday_calendar(n=400)
    ok = True
    for panel in range(100):
        months = int(rng.integers(2, 5))
        n_secs = int(rng.integers(2, 6))
        bench = random_walk_series("INDEX", calendar, rng, start=1000.0)

        pairs = []
        oracle_rows = []  # (raw list, bench list, complete)
        for i in range(n_secs):
            listing_idx = int(rng.integers(0, 21))
            complete = i == 0 or rng.random() < 0.6
            if complete:
                n_days = 1 + 21 * months
            else:
                n_days = 22 + int(rng.integers(0, 21 * (months - 1)))
            dates = calendar[listing_idx : listing_idx + n_days]
            sec = random_walk_series(f"S{panel}_{i}", dates, rng, start=50.0)
            pairs.append(monthly_returns(sec, bench, dates[0], months=months))

            avail = min(months, (n_days - 1) // 21)
            bounds = [1] + [21 * t for t in range(1, avail + 1)]
            raw = [
                float(sec.closes[bounds[t]] / sec.closes[bounds[t - 1]] - 1.0)
                for t in range(1, avail + 1)
            ]
            bvals = [float(bench.closes[listing_idx + b]) for b in bounds]
            bret = [bvals[t] / bvals[t - 1] - 1.0 for t in range(1, avail + 1)]
            oracle_rows.append((raw, bret, avail == months))

        got = cohort_summary(pairs)

        horizon = max(len(r) for r, _, _ in oracle_rows)
        exp_ar_raw, exp_ar_adj = [], []
        for t in range(horizon):
            live_raw = [r[t] for r, _, _ in oracle_rows if t < len(r)]
            live_adj = [r[t] - b[t] for r, b, _ in oracle_rows if t < len(r)]
            exp_ar_raw.append(sum(live_raw) / len(live_raw))
            exp_ar_adj.append(sum(live_adj) / len(live_adj))
        exp_car_raw = [sum(exp_ar_raw[: t + 1]) for t in range(horizon)]
        exp_car_adj = [sum(exp_ar_adj[: t + 1]) for t in range(horizon)]

        ok = ok and len(got.ar_raw) == horizon
        for t in range(horizon):
            ok = ok and _close(float(got.ar_raw[t]), exp_ar_raw[t])
            ok = ok and _close(float(got.car_raw[t]), exp_car_raw[t])
            ok = ok and _close(float(got.ar_adjusted[t]), exp_ar_adj[t])
            ok = ok and _close(float(got.car_adjusted[t]), exp_car_adj[t])
        ok = ok and got.negative_months_raw == sum(1 for v in exp_ar_raw if v < 0)
        ok = ok and got.negative_months_adjusted == sum(1 for v in exp_ar_adj if v < 0)

        hprs, bench_hprs = [], []
        for raw, bret, complete in oracle_rows:
            if complete:
                hprs.append(math.prod(1.0 + v for v in raw) - 1.0)
                bench_hprs.append(math.prod(1.0 + v for v in bret) - 1.0)
        ok = ok and got.n == n_secs and got.n_complete == len(hprs)
        if hprs:
            wr = (1.0 + sum(hprs) / len(hprs)) / (1.0 + sum(bench_hprs) / len(bench_hprs))
            ok = ok and _close(got.hpr_high, max(hprs))
            ok = ok and _close(got.hpr_low, min(hprs))
            ok = ok and _close(got.hpr_mean, sum(hprs) / len(hprs))
            ok = ok and _close(got.hpr_median, statistics.median(hprs))
            ok = ok and _close(got.wealth_relative, wr)
        if not ok:
            break
    _verdict(2, "cohort AR/CAR/BHR/WR match brute force on 100 random panels (rel 1e-10)", ok)


def test_criterion_3_compounding_identities():
    rng = np.random.default_rng(31337)
    calendar = weekday_calendar(n=400)
    bench = random_walk_series("INDEX", calendar, rng, start=1000.0)
    ok = True
    for _ in range(1000):
        months = int(rng.integers(1, 9))
        listing_idx = int(rng.integers(0, 30))
        dates = calendar[listing_idx : listing_idx + 1 + 21 * months]
        sec = random_walk_series("S", dates, rng, start=80.0)
        ev, _bench_ev = monthly_returns(sec, bench, dates[0], months=months)

        # compounding: chained month returns reproduce the full-window ratio
        bhr = buy_and_hold_return(ev)
        direct = float(sec.closes[21 * months] / sec.closes[1]) - 1.0
        ok = ok and _close(bhr, direct)
        prod = math.prod(1.0 + float(r) for r in ev.monthly_returns) - 1.0
        ok = ok and _close(prod, bhr, rel=1e-12)

        # telescoping: cumulative path increments are the per-month values
        car = cumulative_returns(ev.monthly_returns)
        steps = np.diff(np.concatenate([[0.0], car]))
        ok = ok and np.allclose(steps, ev.monthly_returns, rtol=0, atol=1e-12)
        if not ok:
            break
    _verdict(3, "compounding and telescoping identities on 1000 random paths", ok)


def test_criterion_4_recovery_bias():
    # DGP: c1=0, c2=1, omega=0.1*s^2 with s^2=0.05^2, alpha=0.1, beta=0.8, delta=0
    cfg = SimConfig(
        true_params=RECOVERY_TRUTH, n_obs=5000, dummy_pattern=0.3, seed=20240401
    )
    result = recovery_experiment(cfg, 200)
    ok = result.n_converged >= 190
    ok = ok and abs(result.bias[3]) < 0.02
    ok = ok and abs(result.bias[4]) < 0.03
    _verdict(
        4,
        f"recovery at T=5000, 200 reps: bias(alpha)={result.bias[3]:+.4f} (<0.02), "
        f"bias(beta)={result.bias[4]:+.4f} (<0.03)",
        ok,
    )


def test_criterion_5_test_calibration():
    rejected = tested = 0
    for r in range(500):
        data = simulate_path(
            SimConfig(
                true_params=RECOVERY_TRUTH, n_obs=2000, dummy_pattern=0.3,
                seed=77_000 + r,
            )
        )
        try:
            fit = estimate(data)
        except ValueError:
            continue
        if np.isfinite(fit.std_errors[5]):
            tested += 1
            if fit.dividend_significant:
                rejected += 1
    rate = rejected / tested if tested else float("nan")
    ok = tested >= 450 and 0.02 <= rate <= 0.10
    _verdict(
        5,
        f"null rejection rate of the 5% dividend test = {rate:.3f} "
        f"({rejected}/{tested}) within [0.02, 0.10]",
        ok,
    )


def test_criterion_6_significance_cells():
    ok = is_significant(0.0062, 0.0026)
    ok = ok and not is_significant(-0.0007, 0.0007)
    ok = ok and is_significant(-0.0257, 0.0114)
    _verdict(6, "significance flags for the three reference coefficient cells", ok)


def test_criterion_7_cohort_verdict():
    def fit_with_flag(flag):
        se = np.full(6, 0.01)
        theta = GarchParams(0.0, 1.0, 1e-4, 0.1, 0.8, 0.05 if flag else 0.001)
        flags = np.array([is_significant(theta.as_array()[i], se[i]) for i in range(6)])
        return GarchFit(
            params=theta, std_errors=se, t_stats=theta.as_array() / se,
            significant=flags, log_likelihood=0.0, start_log_likelihood=0.0,
            converged=True, iterations=1, conditional_variances=np.ones(10),
        )

    verdict = cohort_verdict([fit_with_flag(i < 6) for i in range(27)])
    ok = verdict == (6, 27, "no significant influence")
    _verdict(7, "6 significant of 27 yields the no-influence verdict", ok)


def test_criterion_8_end_to_end_determinism(tmp_path):
    def run_twice(argv_base, name):
        dirs = []
        for tag in ("a", "b"):
            out = tmp_path / f"{name}_{tag}"
            code = cli_main(argv_base + ["--out", str(out)])
            assert code == 0
            dirs.append(out)
        same = True
        names_a = {p.name for p in dirs[0].iterdir()}
        names_b = {p.name for p in dirs[1].iterdir()}
        same = same and names_a == names_b
        for fname in sorted(names_a - {"run_meta.json"}):
            same = same and (
                (dirs[0] / fname).read_bytes() == (dirs[1] / fname).read_bytes()
            )
        return same

    ok = run_twice(
        [
            "eventstudy",
            "--prices", str(FIXTURES / "prices.csv"),
            "--benchmark", str(FIXTURES / "benchmark.csv"),
            "--roster", str(FIXTURES / "roster.csv"),
        ],
        "eventstudy",
    )
    ok = ok and run_twice(
        [
            "garch",
            "--prices", str(PLANTED / "prices.csv"),
            "--benchmark", str(PLANTED / "benchmark.csv"),
            "--roster", str(PLANTED / "roster.csv"),
            "--dividends", str(PLANTED / "dividends.csv"),
            "--months", "500", "--month-days", "3",
        ],
        "garch",
    )
    _verdict(8, "repeated pipeline runs byte-identical outside run_meta.json", ok)


def test_criterion_9_percent_rendering():
    _verdict(9, 'CAR fraction -0.2073 renders as "-20.73"',
             format_percent(-0.2073) == "-20.73")
