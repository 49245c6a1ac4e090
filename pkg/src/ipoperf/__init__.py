"""Event-time IPO aftermarket performance and dividend-effect GARCH toolkit."""

from .event_study import (
    BenchmarkEventSeries,
    CohortSummary,
    EventSeries,
    buy_and_hold_return,
    cohort_summary,
    event_month_of,
    first_day_return,
    monthly_returns,
    wealth_relative,
)
from .garch import (
    GarchData,
    GarchFit,
    GarchParams,
    GarchSpec,
    build_dummy,
    cohort_verdict,
    estimate,
    log_likelihood,
    significance,
    std_errors,
    variance_recursion,
)
from .ingest import (
    AlignedPanel,
    DataError,
    DividendEvent,
    PriceSeries,
    RosterEntry,
    align,
    load_dividends,
    load_prices,
    load_roster,
    write_prices,
)
from .simulate import RecoveryResult, SimConfig, recovery_experiment, simulate_path

__version__ = "0.1.0"
