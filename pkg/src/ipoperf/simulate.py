"""Synthetic data generation and estimator-recovery experiments.

The generator draws from the same model the estimator fits, so parameter
recovery can be checked end to end. Draw protocol for one path (fixed by
contract so identical seeds give bitwise-identical output):

    rng = numpy default_rng(seed)
    1. dummy: if the pattern is a probability p, d = (rng.random(T) < p);
       an explicit 0/1 array consumes no draws
    2. market: x = mean + vol * rng.standard_normal(T) (no draws when an
       explicit market series is supplied)
    3. shocks: z = rng.standard_normal(T + burn_in)

The variance recursion runs through ``burn_in`` presample steps (dummy held at
zero, started at the stationary level) that are discarded, so emitted h_1 sits
near its stationary value. The market series never feeds the variance, so no
presample market draws are needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date

import numpy as np

from .garch import (
    GarchData,
    GarchFit,
    GarchParams,
    GarchSpec,
    InfeasibleParamsError,
    COEF_NAMES,
    estimate,
)
from .ingest import PriceSeries

DEFAULT_BURN_IN = 200
_COVERAGE_Z = 1.959963984540054  # two-sided 95%


@dataclass
class SimConfig:
    """One simulation scenario.

    dummy_pattern is either a Bernoulli probability or an explicit 0/1 array
    of length n_obs. market_series, when given, replaces the market draws.
    """

    true_params: GarchParams
    n_obs: int
    dummy_pattern: float | np.ndarray = 0.3
    market_mean: float = 0.01
    market_vol: float = 0.05
    seed: int = 0
    burn_in: int = DEFAULT_BURN_IN
    market_series: np.ndarray | None = None

    def __post_init__(self):
        if self.n_obs < 2:
            raise ValueError("n_obs must be >= 2")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.market_vol <= 0.0:
            raise ValueError("market_vol must be positive")
        if np.isscalar(self.dummy_pattern):
            p = float(self.dummy_pattern)
            if not (0.0 <= p <= 1.0):
                raise ValueError("dummy probability must be in [0, 1]")
        else:
            arr = np.asarray(self.dummy_pattern, dtype=float)
            if arr.shape != (self.n_obs,):
                raise ValueError("explicit dummy pattern must have length n_obs")
            if not np.all((arr == 0.0) | (arr == 1.0)):
                raise ValueError("dummy values must be 0 or 1")
        if self.market_series is not None:
            ms = np.asarray(self.market_series, dtype=float)
            if ms.shape != (self.n_obs,):
                raise ValueError("explicit market series must have length n_obs")


def simulate_path(config: SimConfig) -> GarchData:
    """Generate one path of (y, x, d) under the true parameters.

    Raises InfeasibleParamsError when the true parameters yield a non-positive
    variance anywhere along the path (including the stationary starting level).
    """
    p = config.true_params
    rng = np.random.default_rng(config.seed)
    T, burn = config.n_obs, config.burn_in

    if np.isscalar(config.dummy_pattern):
        d = (rng.random(T) < float(config.dummy_pattern)).astype(float)
    else:
        d = np.asarray(config.dummy_pattern, dtype=float).copy()

    if config.market_series is not None:
        x = np.asarray(config.market_series, dtype=float).copy()
    else:
        x = config.market_mean + config.market_vol * rng.standard_normal(T)

    z = rng.standard_normal(T + burn)
    d_full = np.concatenate([np.zeros(burn), d])

    # Start at the stationary variance when it exists, else at the intercept.
    persistence = p.c4 + p.c5
    h0 = p.c3 / (1.0 - persistence) if persistence < 1.0 else p.c3
    if h0 <= 0.0 or not np.isfinite(h0):
        raise InfeasibleParamsError(f"non-positive starting variance {h0!r}")

    e = np.empty(T + burn)
    h = h0
    for t in range(T + burn):
        if t > 0:
            h = p.c3 + p.c4 * e[t - 1] ** 2 + p.c5 * h + p.c6 * d_full[t]
        if h <= 0.0 or not np.isfinite(h):
            raise InfeasibleParamsError(
                f"true parameters produced variance {h!r} at step {t + 1}"
            )
        e[t] = z[t] * math.sqrt(h)

    e_out = e[burn:]
    y = p.c1 + p.c2 * x + e_out
    return GarchData(y=y, x=x, d=d_full[burn:])


@dataclass
class RecoveryResult:
    """Aggregates of a parameter-recovery experiment.

    bias, rmse and coverage are indexed like COEF_NAMES. Coverage is the
    fraction of converged replications whose +/-1.96*se interval contains the
    truth, with NaN where no replication produced a usable standard error.
    """

    truth: GarchParams
    n_obs: int
    replications: int
    n_converged: int
    n_failed: int
    bias: np.ndarray
    rmse: np.ndarray
    coverage: np.ndarray
    coverage_n: np.ndarray

    def rows(self) -> list[tuple[str, float, float, float, float]]:
        truth = self.truth.as_array()
        return [
            (
                COEF_NAMES[i],
                float(truth[i]),
                float(self.bias[i]),
                float(self.rmse[i]),
                float(self.coverage[i]),
            )
            for i in range(6)
        ]


def recovery_experiment(
    config: SimConfig,
    replications: int,
    spec: GarchSpec = GarchSpec(),
    *,
    fix_dummy: bool = False,
) -> RecoveryResult:
    """Simulate, fit, and summarize coefficient recovery.

    Replication r uses seed config.seed + r. Replications whose fit fails or
    does not converge are excluded from the aggregates and counted. Sums are
    accumulated with compensated summation so the report does not depend on
    accumulation order.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    truth = config.true_params.as_array()
    errors = [[] for _ in range(6)]
    covered = [[] for _ in range(6)]
    n_converged = 0
    n_failed = 0

    for r in range(replications):
        cfg = SimConfig(
            true_params=config.true_params,
            n_obs=config.n_obs,
            dummy_pattern=config.dummy_pattern,
            market_mean=config.market_mean,
            market_vol=config.market_vol,
            seed=config.seed + r,
            burn_in=config.burn_in,
            market_series=config.market_series,
        )
        try:
            fit = estimate(simulate_path(cfg), spec, fix_dummy=fix_dummy)
        except (ValueError, np.linalg.LinAlgError):
            n_failed += 1
            continue
        if not fit.converged:
            n_failed += 1
            continue
        n_converged += 1
        theta = fit.params.as_array()
        for i in range(6):
            err = theta[i] - truth[i]
            errors[i].append(err)
            se = fit.std_errors[i]
            if np.isfinite(se):
                covered[i].append(1.0 if abs(err) <= _COVERAGE_Z * se else 0.0)

    bias = np.full(6, np.nan)
    rmse = np.full(6, np.nan)
    coverage = np.full(6, np.nan)
    coverage_n = np.zeros(6)
    for i in range(6):
        if errors[i]:
            n = len(errors[i])
            bias[i] = math.fsum(errors[i]) / n
            rmse[i] = math.sqrt(math.fsum(v * v for v in errors[i]) / n)
        if covered[i]:
            coverage[i] = math.fsum(covered[i]) / len(covered[i])
            coverage_n[i] = len(covered[i])

    return RecoveryResult(
        truth=config.true_params,
        n_obs=config.n_obs,
        replications=replications,
        n_converged=n_converged,
        n_failed=n_failed,
        bias=bias,
        rmse=rmse,
        coverage=coverage,
        coverage_n=coverage_n,
    )


def price_path_from_returns(
    symbol: str,
    returns,
    calendar: list[date],
    *,
    month_days: int = 21,
    base_price: float = 100.0,
) -> PriceSeries:
    """Lay monthly returns onto a trading calendar as a daily close series.

    The calendar must supply 1 + T*month_days days (listing day plus T full
    event months). Prices hold flat inside each month window and jump on the
    window's last day, so the event-study monthly returns recovered from the
    series equal ``returns`` exactly and the pipeline can run end to end on
    simulated data.
    """
    r = np.asarray(returns, dtype=float)
    T = len(r)
    need = 1 + T * month_days
    if len(calendar) < need:
        raise ValueError(f"calendar has {len(calendar)} days, need {need}")
    closes = np.empty(need)
    closes[0] = base_price
    level = base_price
    for t in range(T):
        lo = 1 + t * month_days  # first day of month t+1
        hi = (t + 1) * month_days  # last day of month t+1
        closes[lo:hi] = level
        level *= 1.0 + r[t]
        if level <= 0.0:
            raise ValueError(f"{symbol}: returns drove the price non-positive")
        closes[hi] = level
    return PriceSeries(symbol, tuple(calendar[:need]), closes)
