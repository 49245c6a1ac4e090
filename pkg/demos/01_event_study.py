"""Walk through the event-study half of the toolkit on a synthetic panel.

Builds a benchmark index and a small graded cohort of newly listed
securities, re-indexes them onto the 21-trading-day event clock, and prints
the aggregates a study would report: average adjusted returns, their
cumulative path, holding-period stats and the wealth relative.

Run:  python3 demos/01_event_study.py
"""

import datetime as dt

import numpy as np

from ipoperf.event_study import (
    buy_and_hold_return,
    cohort_summary,
    event_month_of,
    first_day_return,
    monthly_returns,
)
from ipoperf.ingest import PriceSeries

MONTHS = 12
rng = np.random.default_rng(11)


def weekdays(start, n):
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def walk(symbol, dates, start, drift, vol):
    rets = np.clip(drift + vol * rng.standard_normal(len(dates) - 1), -0.5, 0.5)
    closes = start * np.concatenate([[1.0], np.cumprod(1.0 + rets)])
    return PriceSeries(symbol, tuple(dates), closes)


calendar = weekdays(dt.date(2012, 1, 2), 300)
benchmark = walk("INDEX", calendar, 5000.0, 0.0004, 0.009)

print("The event clock: listing day is day 1 (its own initial period);")
print("each later month is a block of 21 trading days.")
for day in (1, 2, 22, 23, 44, 253):
    print(f"  trading day {day:3d} -> event month {event_month_of(day)}")

# Three listings, staggered a week apart, one of them drifting downhill.
cohort = []
for i, (symbol, drift) in enumerate([("AAA", 0.0012), ("BBB", 0.0006), ("CCC", -0.0008)]):
    dates = calendar[5 * i : 5 * i + 1 + 21 * MONTHS]
    series = walk(symbol, dates, 100.0, drift, 0.012)
    cohort.append(monthly_returns(series, benchmark, dates[0], months=MONTHS, grade=3))

print(f"\nPer-security event months (first 3 of {MONTHS}):")
for sec, bench in cohort:
    chained = buy_and_hold_return(sec)
    head = ", ".join(f"{r:+.4f}" for r in sec.monthly_returns[:3])
    print(f"  {sec.symbol}: [{head}, ...]  buy-and-hold over the window {chained:+.2%}")

summary = cohort_summary(cohort)
print(f"\nGrade-{summary.grade} cohort of {summary.n} ({summary.n_complete} complete):")
print("  month  AR(raw)   CAR(raw)  AR(adj)   CAR(adj)")
for t in range(MONTHS):
    print(
        f"  {t + 1:5d}  {summary.ar_raw[t]:+.4f}  {summary.car_raw[t]:+.4f}"
        f"   {summary.ar_adjusted[t]:+.4f}  {summary.car_adjusted[t]:+.4f}"
    )
print(f"  negative raw months: {summary.negative_months_raw} of {MONTHS}")
print(
    f"  holding-period returns: high {summary.hpr_high:+.2%}, low {summary.hpr_low:+.2%}, "
    f"mean {summary.hpr_mean:+.2%}, median {summary.hpr_median:+.2%}"
)
print(f"  wealth relative {summary.wealth_relative:.4f} -> {summary.performance}")

r, label = first_day_return(offer_price=100.0, first_close=108.0)
print(f"\nFirst-day check: offered at 100, closed at 108 -> {r:+.2%}, {label}")
