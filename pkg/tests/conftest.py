"""Shared synthetic-data builders and the session-scoped recovery experiment."""

import datetime as dt

import numpy as np
import pytest

from ipoperf.garch import GarchParams
from ipoperf.ingest import PriceSeries
from ipoperf.simulate import SimConfig, recovery_experiment

RECOVERY_TRUTH = GarchParams(0.0, 1.0, 0.00025, 0.1, 0.8, 0.0)


def weekday_calendar(start=dt.date(2011, 1, 3), n=900):
    """n consecutive weekdays starting from a Monday."""
    days = []
    d = start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def random_walk_series(symbol, dates, rng, *, start=100.0, drift=0.0005, vol=0.02):
    """Positive random-walk close series over the given dates."""
    rets = drift + vol * rng.standard_normal(len(dates) - 1)
    rets = np.clip(rets, -0.5, 0.5)
    closes = start * np.concatenate([[1.0], np.cumprod(1.0 + rets)])
    return PriceSeries(symbol, tuple(dates), closes)


@pytest.fixture(scope="session")
def recovery_t5000():
    """500-replication recovery run at T=5000 under the reference DGP.

    Shared across the coverage and standard-error quality checks so the
    expensive fits happen once per session.
    """
    cfg = SimConfig(
        true_params=RECOVERY_TRUTH, n_obs=5000, dummy_pattern=0.3, seed=20240401
    )
    return recovery_experiment(cfg, 500)
