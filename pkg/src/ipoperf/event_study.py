"""Event-time return construction and long-run IPO performance statistics.

The event clock counts trading days from the listing day (day 1). Day 1 is the
initial period; aftermarket month t covers event days 21(t-1)+2 through 21t+1,
so month 1 is days 2-22, month 2 is days 23-43, and so on. All returns are
simple returns (end/start - 1). Monthly returns chain so that compounding them
over months 1..T reproduces the price ratio from the start of month 1 (the
day-2 close) to the end of month T exactly: month 1 is measured from the day-2
close, and each later month from the closing level of the month before it.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from datetime import date

import numpy as np

from .ingest import PriceSeries

INITIAL_PERIOD = 0
DEFAULT_MONTHS = 36
DEFAULT_MONTH_DAYS = 21

UNDERPRICED = "underpriced"
OVERPRICED = "overpriced"
FLAT = "flat"

OUTPERFORM = "outperform"
UNDERPERFORM = "underperform"
PAR = "par"


class InsufficientDataError(ValueError):
    """Security lacks enough aligned trading days for even one event month."""


def event_month_of(day_index: int, month_days: int = DEFAULT_MONTH_DAYS) -> int:
    """Map an event day (listing day = 1) to its event month.

    Returns INITIAL_PERIOD (0) for day 1, else the 1-based month whose window
    covers the day: month t spans days month_days*(t-1)+2 .. month_days*t+1.
    """
    if month_days < 1:
        raise ValueError("month_days must be >= 1")
    if day_index < 1:
        raise ValueError(f"day_index counts from listing day 1, got {day_index}")
    if day_index == 1:
        return INITIAL_PERIOD
    return (day_index - 2) // month_days + 1


@dataclass
class EventSeries:
    """Monthly event-time returns for one security, months 1..T."""

    symbol: str
    monthly_returns: np.ndarray
    windows: tuple[tuple[date, date], ...]  # (first, last) trading day per month
    complete: bool
    grade: int | None = None

    def __post_init__(self):
        self.monthly_returns = np.asarray(self.monthly_returns, dtype=float)
        if len(self.windows) != len(self.monthly_returns):
            raise ValueError(f"{self.symbol}: windows do not match returns")


@dataclass
class BenchmarkEventSeries:
    """Benchmark returns over one security's event-month calendar windows."""

    symbol: str
    monthly_returns: np.ndarray
    complete: bool

    def __post_init__(self):
        self.monthly_returns = np.asarray(self.monthly_returns, dtype=float)


def monthly_returns(
    security: PriceSeries,
    benchmark: PriceSeries,
    listing_date: date,
    *,
    months: int = DEFAULT_MONTHS,
    month_days: int = DEFAULT_MONTH_DAYS,
    grade: int | None = None,
) -> tuple[EventSeries, BenchmarkEventSeries]:
    """Build paired security/benchmark event-month returns from listing.

    The security must already be aligned to the benchmark calendar. Event days
    are the security's own trading days starting at the first observation on or
    after ``listing_date``. Only complete months are emitted, capped at
    ``months``. Benchmark returns are taken over the same calendar boundary
    dates, so each pair covers identical windows.

    Raises InsufficientDataError when not even month 1 is complete, and
    ValueError if a needed boundary date is missing from the benchmark.
    """
    start = bisect.bisect_left(security.dates, listing_date)
    dates = security.dates[start:]
    closes = security.closes[start:]
    n = len(dates)
    if n < month_days + 1:
        raise InsufficientDataError(
            f"{security.symbol}: {n} trading day(s) from listing, "
            f"need {month_days + 1} for one event month"
        )
    t_max = min((n - 1) // month_days, months)

    # Return boundaries: day 2 (index 1), then each month-end day t*month_days+1
    # (index t*month_days). Chained ratios make compounding telescope exactly.
    boundary_idx = [1] + [month_days * t for t in range(1, t_max + 1)]
    sec_px = closes[boundary_idx]
    sec_returns = sec_px[1:] / sec_px[:-1] - 1.0

    bench_close = dict(zip(benchmark.dates, benchmark.closes))
    try:
        bench_px = np.array([bench_close[dates[i]] for i in boundary_idx])
    except KeyError as missing:
        raise ValueError(
            f"{security.symbol}: not aligned to benchmark, no benchmark close on {missing}"
        ) from None
    bench_returns = bench_px[1:] / bench_px[:-1] - 1.0

    windows = tuple(
        (dates[month_days * (t - 1) + 1], dates[month_days * t])
        for t in range(1, t_max + 1)
    )
    complete = t_max == months
    return (
        EventSeries(security.symbol, sec_returns, windows, complete, grade=grade),
        BenchmarkEventSeries(security.symbol, bench_returns, complete),
    )


def adjusted_return(security_return, benchmark_return):
    """Benchmark-adjusted return: security minus benchmark for the same window."""
    r = np.asarray(security_return, dtype=float)
    m = np.asarray(benchmark_return, dtype=float)
    if np.any(r <= -1.0) or np.any(m <= -1.0):
        raise ValueError("simple returns must exceed -1")
    out = r - m
    return float(out) if out.ndim == 0 else out


def average_adjusted_return(values) -> float:
    """Equally weighted cross-sectional average for one event month."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("average of an empty month is undefined")
    return float(arr.mean())


def cumulative_returns(ar_path) -> np.ndarray:
    """Cumulative (prefix-sum) path of average returns: CAR_t = sum of AR_1..AR_t."""
    return np.cumsum(np.asarray(ar_path, dtype=float))


def buy_and_hold_return(series: EventSeries | BenchmarkEventSeries) -> float:
    """Compounded holding-period return over a complete event window.

    BHR = prod(1 + r_t) - 1, identical to end price over start price minus one
    for a gap-free series. Incomplete windows are excluded from holding-period
    statistics, so they raise InsufficientDataError.
    """
    if not series.complete:
        raise InsufficientDataError(f"{series.symbol}: incomplete event window")
    return float(np.prod(1.0 + series.monthly_returns) - 1.0)


def wealth_relative(avg_ipo_bhr: float, avg_benchmark_bhr: float) -> tuple[float, str]:
    """Wealth relative (1 + avg IPO BHR) / (1 + avg benchmark BHR) with a verdict.

    The verdict is "outperform" above 1, "underperform" below 1, "par" at 1.
    Raises ValueError when the benchmark denominator is <= 0.
    """
    denom = 1.0 + avg_benchmark_bhr
    if denom <= 0.0:
        raise ValueError("degenerate benchmark: 1 + average benchmark BHR must be positive")
    wr = (1.0 + avg_ipo_bhr) / denom
    if wr > 1.0:
        flag = OUTPERFORM
    elif wr < 1.0:
        flag = UNDERPERFORM
    else:
        flag = PAR
    return wr, flag


def first_day_return(offer_price: float, first_close: float) -> tuple[float, str]:
    """First trading day return versus the offer price, with the pricing label.

    Positive returns mark underpricing, negative returns overpricing, zero is
    flat. Both prices must be positive.
    """
    if offer_price <= 0.0 or first_close <= 0.0:
        raise ValueError("offer price and first close must be positive")
    r = first_close / offer_price - 1.0
    if r > 0.0:
        label = UNDERPRICED
    elif r < 0.0:
        label = OVERPRICED
    else:
        label = FLAT
    return r, label


@dataclass
class CohortSummary:
    """Grade-cohort event-study aggregates.

    AR paths are equally weighted across the securities populated in each
    month (survivors keep full weight, no fill-in), and CAR is their running
    sum; the path ends at the last month any member is populated. Negative
    month counts tally months with a negative cohort-average return. Holding
    period stats and the wealth relative cover only complete windows; they are
    None when no member is complete.
    """

    grade: int | None
    n: int
    n_complete: int
    ar_raw: np.ndarray
    car_raw: np.ndarray
    ar_adjusted: np.ndarray
    car_adjusted: np.ndarray
    negative_months_raw: int
    negative_months_adjusted: int
    hpr_high: float | None
    hpr_low: float | None
    hpr_mean: float | None
    hpr_median: float | None
    wealth_relative: float | None
    performance: str | None


def cohort_summary(
    cohort: list[tuple[EventSeries, BenchmarkEventSeries]],
) -> CohortSummary:
    """Aggregate a grade cohort of paired security/benchmark event series."""
    if not cohort:
        raise ValueError("empty cohort")
    grades = {s.grade for s, _ in cohort if s.grade is not None}
    grade = grades.pop() if len(grades) == 1 else None

    t_max = max(len(s.monthly_returns) for s, _ in cohort)
    ar_raw = np.empty(t_max)
    ar_adj = np.empty(t_max)
    for t in range(t_max):
        raw = [s.monthly_returns[t] for s, _ in cohort if len(s.monthly_returns) > t]
        adj = [
            s.monthly_returns[t] - b.monthly_returns[t]
            for s, b in cohort
            if len(s.monthly_returns) > t
        ]
        ar_raw[t] = average_adjusted_return(raw)
        ar_adj[t] = average_adjusted_return(adj)

    complete = [(s, b) for s, b in cohort if s.complete]
    hpr_high = hpr_low = hpr_mean = hpr_median = wr = perf = None
    if complete:
        bhrs = np.array([buy_and_hold_return(s) for s, _ in complete])
        bench_bhrs = np.array([buy_and_hold_return(b) for _, b in complete])
        hpr_high = float(bhrs.max())
        hpr_low = float(bhrs.min())
        hpr_mean = float(bhrs.mean())
        hpr_median = float(np.median(bhrs))
        wr, perf = wealth_relative(hpr_mean, float(bench_bhrs.mean()))

    return CohortSummary(
        grade=grade,
        n=len(cohort),
        n_complete=len(complete),
        ar_raw=ar_raw,
        car_raw=cumulative_returns(ar_raw),
        ar_adjusted=ar_adj,
        car_adjusted=cumulative_returns(ar_adj),
        negative_months_raw=int(np.sum(ar_raw < 0.0)),
        negative_months_adjusted=int(np.sum(ar_adj < 0.0)),
        hpr_high=hpr_high,
        hpr_low=hpr_low,
        hpr_mean=hpr_mean,
        hpr_median=hpr_median,
        wealth_relative=wr,
        performance=perf,
    )
