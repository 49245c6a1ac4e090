"""GARCH(1,1) with a dividend dummy in the variance equation.

Model for one security's event-month returns y_t with market return x_t and a
0/1 dividend indicator d_t:

    mean:     y_t = c1 + c2 * x_t + e_t
    variance: h_1 = sample variance of the residuals
              h_t = max(c3 + c4 * e_{t-1}^2 + c5 * h_{t-1} + c6 * d_t, floor)

Estimation is Gaussian quasi-maximum likelihood. By default the variance
coefficients are NOT constrained to the stationary region: empirically fitted
securities can show negative ARCH terms or GARCH terms above one, and clamping
them would hide that. A small variance floor keeps the objective finite. An
optional constrained mode enforces c3 > 0, c4 >= 0, c5 >= 0, c4 + c5 < 1.

Standard errors come from the inverse negative Hessian of the log-likelihood,
with the Hessian taken by central finite differences. Coefficients whose
errors cannot be recovered (singular or non-positive-definite Hessian) are
reported as unavailable (NaN) rather than fabricated.
"""

from __future__ import annotations

import math
import warnings as _warnings
from dataclasses import dataclass
from datetime import date
from typing import NamedTuple, Sequence

import numpy as np
from numba import njit
from scipy.optimize import minimize
from scipy.stats import norm

from .ingest import DividendEvent

COEF_NAMES = ("c1", "c2", "c3", "c4", "c5", "c6")
MIN_OBSERVATIONS = 10

NO_INFLUENCE = "no significant influence"
INFLUENCE = "significant influence"

SIGNIFICANT = "significant"
NOT_SIGNIFICANT = "not significant"
INDETERMINATE = "indeterminate"

_LOG_2PI = math.log(2.0 * math.pi)


class DegenerateDataError(ValueError):
    """Return data carries no variance to fit."""


class InfeasibleParamsError(ValueError):
    """Parameter point produced a non-finite or non-positive variance path."""


@dataclass(frozen=True)
class GarchParams:
    """Mean and variance equation coefficients (c1, c2 | c3, c4, c5, c6)."""

    c1: float
    c2: float
    c3: float
    c4: float
    c5: float
    c6: float

    def as_array(self) -> np.ndarray:
        return np.array([self.c1, self.c2, self.c3, self.c4, self.c5, self.c6])

    @classmethod
    def from_array(cls, theta) -> "GarchParams":
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (6,):
            raise ValueError(f"expected 6 coefficients, got shape {theta.shape}")
        return cls(*(float(v) for v in theta))


@dataclass(frozen=True)
class GarchSpec:
    """Estimation settings.

    constrain_stationarity: restrict (c3, c4, c5) to c3 > 0, c4 >= 0, c5 >= 0,
        c4 + c5 < 1. Off by default; see the module docstring.
    variance_floor: lower clamp applied to every h_t.
    significance_level: two-sided size of the coefficient tests.
    max_iterations: total optimizer iteration budget.
    ll_tolerance: convergence threshold on successive objective improvements.
    """

    constrain_stationarity: bool = False
    variance_floor: float = 1e-12
    significance_level: float = 0.05
    max_iterations: int = 4000
    ll_tolerance: float = 1e-8

    def __post_init__(self):
        if self.variance_floor <= 0.0:
            raise ValueError("variance_floor must be positive")
        if not (0.0 < self.significance_level < 1.0):
            raise ValueError("significance_level must be in (0, 1)")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.ll_tolerance <= 0.0:
            raise ValueError("ll_tolerance must be positive")


@dataclass
class GarchData:
    """Aligned series for one fit: returns y, market returns x, 0/1 dummy d."""

    y: np.ndarray
    x: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        self.d = np.asarray(self.d, dtype=float)
        n = len(self.y)
        if len(self.x) != n or len(self.d) != n:
            raise ValueError("y, x and d must have equal lengths")
        if n < MIN_OBSERVATIONS:
            raise ValueError(f"need at least {MIN_OBSERVATIONS} observations, got {n}")
        if not (np.all(np.isfinite(self.y)) and np.all(np.isfinite(self.x))):
            raise ValueError("y and x must be finite")
        if not np.all((self.d == 0.0) | (self.d == 1.0)):
            raise ValueError("dummy values must be 0 or 1")

    def __len__(self) -> int:
        return len(self.y)


def build_dummy(
    dividends: Sequence[DividendEvent],
    windows: Sequence[tuple[date, date]],
    *,
    listing_date: date | None = None,
) -> np.ndarray:
    """Mark event months whose calendar window contains a dividend date.

    ``windows`` holds each month's (first, last) trading day; a dividend dated
    anywhere inside that calendar span (weekends included) sets the month's
    indicator to 1. Dividends dated before ``listing_date`` draw a warning and
    are ignored; dates after the last window fall outside the study and are
    ignored silently.
    """
    d = np.zeros(len(windows))
    for event in dividends:
        if listing_date is not None and event.event_date < listing_date:
            _warnings.warn(
                f"{event.symbol}: dividend on {event.event_date} predates listing "
                f"{listing_date}, ignored"
            )
            continue
        for t, (first, last) in enumerate(windows):
            if first <= event.event_date <= last:
                d[t] = 1.0
                break
    return d


def residual(y, x, c1: float, c2: float):
    """Mean-equation residual e = y - c1 - c2 * x (scalar or vectorized)."""
    out = np.asarray(y, dtype=float) - c1 - c2 * np.asarray(x, dtype=float)
    return float(out) if out.ndim == 0 else out


@njit(cache=True)
def _recursion_kernel(e, d, c3, c4, c5, c6, h1, floor):
    n = e.shape[0]
    h = np.empty(n)
    h[0] = h1 if h1 > floor else floor
    for t in range(1, n):
        v = c3 + c4 * e[t - 1] * e[t - 1] + c5 * h[t - 1] + c6 * d[t]
        if not np.isfinite(v):
            return h, False
        h[t] = v if v > floor else floor
    return h, True


@njit(cache=True)
def _loglik_kernel(y, x, d, c1, c2, c3, c4, c5, c6, floor):
    """Gaussian log-likelihood in one pass; NaN signals an infeasible point."""
    n = y.shape[0]
    e = np.empty(n)
    s = 0.0
    for t in range(n):
        e[t] = y[t] - c1 - c2 * x[t]
        s += e[t]
    mean = s / n
    ss = 0.0
    for t in range(n):
        dev = e[t] - mean
        ss += dev * dev
    h = ss / n  # presample level: variance of the residuals
    if h < floor:
        h = floor
    ll = -0.5 * (_LOG_2PI + np.log(h)) - e[0] * e[0] / (2.0 * h)
    for t in range(1, n):
        h = c3 + c4 * e[t - 1] * e[t - 1] + c5 * h + c6 * d[t]
        if not np.isfinite(h):
            return np.nan
        if h < floor:
            h = floor
        ll += -0.5 * (_LOG_2PI + np.log(h)) - e[t] * e[t] / (2.0 * h)
    if not np.isfinite(ll):
        return np.nan
    return ll


def variance_recursion(
    e, d, params: GarchParams, *, variance_floor: float = 1e-12
) -> np.ndarray:
    """Conditional variance path h_t for given residuals and dummy.

    h_1 is the residual sample variance; later steps follow the recursion with
    the floor applied at every t. Raises InfeasibleParamsError if any step is
    non-finite (diverging parameters).
    """
    e = np.asarray(e, dtype=float)
    d = np.asarray(d, dtype=float)
    if e.size == 0:
        raise ValueError("residual series is empty")
    if e.shape != d.shape:
        raise ValueError("residuals and dummy must have equal lengths")
    theta = params.as_array()
    if not np.all(np.isfinite(theta)):
        raise InfeasibleParamsError("non-finite parameters")
    h1 = float(np.var(e))
    h, ok = _recursion_kernel(e, d, params.c3, params.c4, params.c5, params.c6, h1, variance_floor)
    if not ok:
        raise InfeasibleParamsError("variance recursion produced a non-finite value")
    return h


def gaussian_loglik(e, h) -> float:
    """Sum of Gaussian log densities: -0.5*(ln 2pi + ln h_t) - e_t^2/(2 h_t)."""
    e = np.asarray(e, dtype=float)
    h = np.asarray(h, dtype=float)
    return float(np.sum(-0.5 * (_LOG_2PI + np.log(h)) - e * e / (2.0 * h)))


def log_likelihood(
    data: GarchData, params: GarchParams, *, variance_floor: float = 1e-12
) -> float:
    """Gaussian quasi-likelihood of the data; -inf at infeasible points."""
    theta = params.as_array()
    if not np.all(np.isfinite(theta)):
        return -np.inf
    ll = _loglik_kernel(
        data.y, data.x, data.d,
        params.c1, params.c2, params.c3, params.c4, params.c5, params.c6,
        variance_floor,
    )
    return -np.inf if np.isnan(ll) else float(ll)


@dataclass
class GarchFit:
    """Estimation result for one security."""

    params: GarchParams
    std_errors: np.ndarray  # NaN where unavailable
    t_stats: np.ndarray
    significant: np.ndarray  # bool, False where the error is unavailable
    log_likelihood: float
    start_log_likelihood: float
    converged: bool
    iterations: int
    conditional_variances: np.ndarray

    @property
    def dividend_significant(self) -> bool:
        return bool(self.significant[5])


class Significance(NamedTuple):
    flags: np.ndarray
    dividend_effect: str  # "significant" / "not significant" / "indeterminate"


class CohortVerdict(NamedTuple):
    significant: int
    total: int
    conclusion: str


def critical_value(level: float) -> float:
    """Two-sided normal critical value; 1.959964 at the 5% level."""
    return float(norm.ppf(1.0 - level / 2.0))


def is_significant(estimate: float, std_error: float, level: float = 0.05) -> bool:
    """Two-sided test |estimate / std_error| > z_(1-level/2).

    An unavailable (NaN) or zero standard error never counts as significant.
    """
    if not np.isfinite(std_error) or std_error <= 0.0:
        return False
    return abs(estimate / std_error) > critical_value(level)


def significance(fit: GarchFit, level: float = 0.05) -> Significance:
    """Per-coefficient significance flags plus the dividend-effect verdict."""
    theta = fit.params.as_array()
    flags = np.array(
        [is_significant(theta[i], fit.std_errors[i], level) for i in range(6)]
    )
    if not np.isfinite(fit.std_errors[5]):
        verdict = INDETERMINATE
    elif flags[5]:
        verdict = SIGNIFICANT
    else:
        verdict = NOT_SIGNIFICANT
    return Significance(flags, verdict)


def cohort_verdict(fits: Sequence[GarchFit]) -> CohortVerdict:
    """Count securities with a significant dividend coefficient and conclude.

    The conclusion is "no significant influence" when fewer than half of the
    fits flag c6, otherwise "significant influence".
    """
    if not fits:
        raise ValueError("no fits to summarize")
    k = sum(1 for f in fits if f.dividend_significant)
    n = len(fits)
    conclusion = NO_INFLUENCE if k / n < 0.5 else INFLUENCE
    return CohortVerdict(k, n, conclusion)


def finite_difference_hessian(f, theta, steps=None) -> np.ndarray:
    """Central finite-difference Hessian of a scalar function.

    Per-coordinate step defaults to max(1e-5, 1e-4 * |theta_i|).
    """
    theta = np.asarray(theta, dtype=float)
    k = theta.size
    if steps is None:
        steps = np.maximum(1e-5, 1e-4 * np.abs(theta))
    else:
        steps = np.asarray(steps, dtype=float)
    H = np.empty((k, k))
    f0 = f(theta)
    for i in range(k):
        ei = np.zeros(k)
        ei[i] = steps[i]
        H[i, i] = (f(theta + ei) - 2.0 * f0 + f(theta - ei)) / steps[i] ** 2
        for j in range(i + 1, k):
            ej = np.zeros(k)
            ej[j] = steps[j]
            H[i, j] = H[j, i] = (
                f(theta + ei + ej) - f(theta + ei - ej)
                - f(theta - ei + ej) + f(theta - ei - ej)
            ) / (4.0 * steps[i] * steps[j])
    return H


def std_errors(
    data: GarchData,
    params: GarchParams,
    spec: GarchSpec = GarchSpec(),
    *,
    free: np.ndarray | None = None,
) -> np.ndarray:
    """Quasi-likelihood standard errors from the inverse negative Hessian.

    ``free`` optionally restricts the Hessian to a subset of coefficients
    (e.g. when c6 was held fixed); the rest are reported NaN. Coefficients
    whose variance cannot be recovered (singular Hessian, non-positive
    diagonal) are NaN as well.
    """
    theta_full = params.as_array()
    if free is None:
        free = np.ones(6, dtype=bool)
    idx = np.flatnonzero(free)

    def ll_of(sub):
        th = theta_full.copy()
        th[idx] = sub
        return log_likelihood(data, GarchParams.from_array(th), variance_floor=spec.variance_floor)

    H = finite_difference_hessian(ll_of, theta_full[idx])
    out = np.full(6, np.nan)
    if not np.all(np.isfinite(H)):
        return out
    try:
        cov = np.linalg.inv(-H)
    except np.linalg.LinAlgError:
        return out
    diag = np.diag(cov)
    for pos, i in enumerate(idx):
        if diag[pos] > 0.0:
            out[i] = math.sqrt(diag[pos])
    return out


def _start_values(data: GarchData) -> np.ndarray:
    """Least-squares mean fit, then (0.05*var(e), 0.05, 0.90, 0) for the variance."""
    X = np.column_stack([np.ones(len(data)), data.x])
    coef, *_ = np.linalg.lstsq(X, data.y, rcond=None)
    e = data.y - X @ coef
    s2 = float(np.var(e))
    if s2 <= 0.0:
        raise DegenerateDataError("zero-variance returns: nothing to fit")
    return np.array([coef[0], coef[1], 0.05 * s2, 0.05, 0.90, 0.0])


def _feasible(theta: np.ndarray) -> bool:
    c3, c4, c5 = theta[2], theta[3], theta[4]
    return c3 > 0.0 and c4 >= 0.0 and c5 >= 0.0 and c4 + c5 < 1.0


def estimate(
    data: GarchData,
    spec: GarchSpec = GarchSpec(),
    *,
    fix_dummy: bool = False,
) -> GarchFit:
    """Fit the model by Gaussian quasi-maximum likelihood.

    A derivative-free simplex search is followed by a gradient polish, repeated
    until successive objective improvements fall below ``spec.ll_tolerance`` or
    the iteration budget runs out (then ``converged`` is False). The reported
    objective never falls below the starting point's. ``fix_dummy`` pins c6 at
    zero and drops it from the search (used when the dummy is all zeros, where
    the likelihood carries no information about c6).
    """
    start = _start_values(data)
    free = np.ones(6, dtype=bool)
    if fix_dummy:
        free[5] = False
    idx = np.flatnonzero(free)

    def nll(sub: np.ndarray) -> float:
        th = start.copy()
        th[idx] = sub
        if spec.constrain_stationarity and not _feasible(th):
            return np.inf
        ll = _loglik_kernel(
            data.y, data.x, data.d,
            th[0], th[1], th[2], th[3], th[4], th[5],
            spec.variance_floor,
        )
        return np.inf if np.isnan(ll) else -ll

    best_x = start[idx].copy()
    best_f = nll(best_x)
    start_ll = -best_f
    if not np.isfinite(best_f):
        raise DegenerateDataError("likelihood not finite at the starting point")

    iterations = 0
    converged = False
    while iterations < spec.max_iterations:
        round_start_f = best_f

        res = minimize(
            nll, best_x, method="Nelder-Mead",
            options={
                "maxiter": spec.max_iterations - iterations,
                "fatol": spec.ll_tolerance * 0.1,
                "xatol": 1e-10,
                "adaptive": True,
            },
        )
        iterations += res.nit
        if np.isfinite(res.fun) and res.fun < best_f:
            best_f, best_x = float(res.fun), res.x.copy()

        if spec.constrain_stationarity:
            with _warnings.catch_warnings():
                # SLSQP warns when a trial step leaves the box before clipping
                _warnings.simplefilter("ignore", RuntimeWarning)
                polish = minimize(
                    nll, best_x, method="SLSQP",
                    bounds=_constrained_bounds(idx),
                    constraints=[{
                        "type": "ineq",
                        "fun": lambda sub, idx=idx: _stationarity_slack(start, idx, sub),
                    }],
                    options={"maxiter": 100, "ftol": spec.ll_tolerance * 0.1},
                )
        else:
            polish = minimize(
                nll, best_x, method="BFGS",
                options={"maxiter": 100, "gtol": 1e-6},
            )
        iterations += max(polish.nit, 1)
        if np.isfinite(polish.fun) and polish.fun < best_f:
            candidate = polish.x.copy()
            if not spec.constrain_stationarity or _subfeasible(start, idx, candidate):
                best_f, best_x = float(polish.fun), candidate

        if round_start_f - best_f < spec.ll_tolerance:
            converged = True
            break

    theta = start.copy()
    theta[idx] = best_x
    if spec.constrain_stationarity:
        theta = _project_feasible(theta)
    params = GarchParams.from_array(theta)

    e = residual(data.y, data.x, params.c1, params.c2)
    h = variance_recursion(e, data.d, params, variance_floor=spec.variance_floor)
    ll = log_likelihood(data, params, variance_floor=spec.variance_floor)

    free_se = free.copy()
    if np.all(data.d == 0.0):
        free_se[5] = False  # flat direction: no information about c6
    se = std_errors(data, params, spec, free=free_se)
    theta_arr = params.as_array()
    with np.errstate(invalid="ignore", divide="ignore"):
        t_stats = theta_arr / se
    flags = np.array(
        [is_significant(theta_arr[i], se[i], spec.significance_level) for i in range(6)]
    )
    return GarchFit(
        params=params,
        std_errors=se,
        t_stats=t_stats,
        significant=flags,
        log_likelihood=ll,
        start_log_likelihood=start_ll,
        converged=converged,
        iterations=iterations,
        conditional_variances=h,
    )


def _constrained_bounds(idx: np.ndarray):
    full = [(None, None), (None, None), (1e-12, None), (0.0, None), (0.0, None), (None, None)]
    return [full[i] for i in idx]


def _stationarity_slack(start: np.ndarray, idx: np.ndarray, sub: np.ndarray) -> float:
    th = start.copy()
    th[idx] = sub
    return 1.0 - 1e-9 - th[3] - th[4]


def _subfeasible(start: np.ndarray, idx: np.ndarray, sub: np.ndarray) -> bool:
    th = start.copy()
    th[idx] = sub
    return _feasible(th)


def _project_feasible(theta: np.ndarray) -> np.ndarray:
    """Snap tiny constraint violations left by the constrained optimizer."""
    out = theta.copy()
    out[2] = max(out[2], 1e-12)
    out[3] = max(out[3], 0.0)
    out[4] = max(out[4], 0.0)
    total = out[3] + out[4]
    if total >= 1.0:
        out[3], out[4] = out[3] / total * (1.0 - 1e-9), out[4] / total * (1.0 - 1e-9)
    return out


def fit_table_csv(rows: Sequence[tuple[str, GarchFit]]) -> str:
    """Machine-readable fit table: one row per security, full precision.

    Columns: symbol, c1, se1, ..., c6, se6, loglik, converged. Unavailable
    standard errors render as "na".
    """
    header = ["symbol"]
    for name in COEF_NAMES:
        header += [name, "se" + name[1:]]
    header += ["loglik", "converged"]
    lines = [",".join(header)]
    for symbol, fit in rows:
        theta = fit.params.as_array()
        cells = [symbol]
        for i in range(6):
            cells.append(repr(float(theta[i])))
            cells.append("na" if not np.isfinite(fit.std_errors[i]) else repr(float(fit.std_errors[i])))
        cells.append(repr(float(fit.log_likelihood)))
        cells.append("true" if fit.converged else "false")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
