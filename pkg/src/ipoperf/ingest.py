"""CSV ingestion and benchmark-calendar alignment for IPO price panels."""

from __future__ import annotations

import bisect
import csv
from dataclasses import dataclass, field
from datetime import date

import numpy as np

PRICES_HEADER = ("symbol", "date", "close")
ROSTER_HEADER = ("symbol", "grade", "listing_date")
DIVIDENDS_HEADER = ("symbol", "event_date", "amount")

GRADE_MIN = 1
GRADE_MAX = 5


class DataError(ValueError):
    """Invalid input data. Messages carry the file name and 1-based line number."""

    def __init__(self, message: str, path=None, line: int | None = None):
        prefix = ""
        if path is not None:
            prefix = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(prefix + message)
        self.path = path
        self.line = line


@dataclass
class PriceSeries:
    """Dated close prices for one security (or the benchmark index)."""

    symbol: str
    dates: tuple[date, ...]
    closes: np.ndarray

    def __post_init__(self):
        self.dates = tuple(self.dates)
        self.closes = np.asarray(self.closes, dtype=float)
        if len(self.dates) != len(self.closes):
            raise ValueError(
                f"{self.symbol}: {len(self.dates)} dates vs {len(self.closes)} closes"
            )
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError(f"{self.symbol}: dates must be strictly increasing")
        if len(self.closes) and (
            not np.all(np.isfinite(self.closes)) or np.any(self.closes <= 0.0)
        ):
            raise ValueError(f"{self.symbol}: closes must be positive and finite")

    def __len__(self) -> int:
        return len(self.dates)

    def restrict_to(self, calendar: frozenset[date] | set[date]) -> "PriceSeries":
        """Return a copy keeping only observations whose date is in ``calendar``."""
        keep = [i for i, d in enumerate(self.dates) if d in calendar]
        return PriceSeries(
            self.symbol, tuple(self.dates[i] for i in keep), self.closes[keep]
        )


@dataclass(frozen=True)
class RosterEntry:
    """One IPO: symbol, assigned grade on the 1-5 scale, and listing date."""

    symbol: str
    grade: int
    listing_date: date

    def __post_init__(self):
        if not (GRADE_MIN <= self.grade <= GRADE_MAX):
            raise ValueError(f"{self.symbol}: grade {self.grade} outside {GRADE_MIN}-{GRADE_MAX}")


@dataclass(frozen=True)
class DividendEvent:
    """A cash dividend announcement/payment date for a symbol."""

    symbol: str
    event_date: date
    amount: float

    def __post_init__(self):
        if not np.isfinite(self.amount) or self.amount < 0.0:
            raise ValueError(f"{self.symbol}: dividend amount must be >= 0")


@dataclass
class AlignedPanel:
    """Securities restricted to the benchmark calendar, plus roster and dividends.

    Invariants: every security date is a benchmark date, every roster symbol has
    a price series, and price series carry no symbols absent from the roster.
    ``warnings`` collects non-fatal data-quality notes accumulated during
    alignment (dropped observations, sparse coverage, orphan series).
    """

    benchmark: PriceSeries
    securities: dict[str, PriceSeries]
    roster: list[RosterEntry]
    dividends: list[DividendEvent]
    warnings: list[str] = field(default_factory=list)


def _read_rows(path, expected_header):
    """Yield (line_number, row) for each data row, validating header and width."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(
                f"empty file, expected header {','.join(expected_header)}", path, 1
            ) from None
        if tuple(h.strip() for h in header) != expected_header:
            raise DataError(
                f"expected header {','.join(expected_header)}, got {','.join(header)}",
                path,
                1,
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue  # tolerate trailing blank lines
            if len(row) != len(expected_header):
                raise DataError(
                    f"expected {len(expected_header)} fields, got {len(row)}", path, lineno
                )
            yield lineno, [f.strip() for f in row]


def _parse_date(raw: str, path, lineno: int) -> date:
    try:
        return date.fromisoformat(raw)
    except ValueError:
        raise DataError(f"invalid ISO-8601 date {raw!r}", path, lineno) from None


def _parse_float(raw: str, what: str, path, lineno: int) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise DataError(f"invalid {what} {raw!r}", path, lineno) from None
    if not np.isfinite(value):
        raise DataError(f"{what} must be finite, got {raw!r}", path, lineno)
    return value


def load_prices(path) -> dict[str, PriceSeries]:
    """Load a symbol,date,close CSV into one PriceSeries per symbol.

    Rows may be interleaved across symbols in any order; each output series is
    sorted by date. Rejects malformed rows, non-positive closes and duplicate
    (symbol, date) pairs, reporting the offending line number.
    """
    rows_by_symbol: dict[str, list[tuple[date, float]]] = {}
    seen: set[tuple[str, date]] = set()
    for lineno, (symbol, raw_date, raw_close) in _read_rows(path, PRICES_HEADER):
        if not symbol:
            raise DataError("empty symbol", path, lineno)
        obs_date = _parse_date(raw_date, path, lineno)
        close = _parse_float(raw_close, "close", path, lineno)
        if close <= 0.0:
            raise DataError(f"close must be positive, got {close!r}", path, lineno)
        key = (symbol, obs_date)
        if key in seen:
            raise DataError(f"duplicate observation for {symbol} on {obs_date}", path, lineno)
        seen.add(key)
        rows_by_symbol.setdefault(symbol, []).append((obs_date, close))

    out: dict[str, PriceSeries] = {}
    for symbol in sorted(rows_by_symbol):
        rows = sorted(rows_by_symbol[symbol])
        out[symbol] = PriceSeries(
            symbol, tuple(d for d, _ in rows), np.array([c for _, c in rows])
        )
    return out


def load_roster(path) -> list[RosterEntry]:
    """Load symbol,grade,listing_date rows; grades must sit on the 1-5 scale."""
    entries: list[RosterEntry] = []
    seen: set[str] = set()
    for lineno, (symbol, raw_grade, raw_date) in _read_rows(path, ROSTER_HEADER):
        if not symbol:
            raise DataError("empty symbol", path, lineno)
        if symbol in seen:
            raise DataError(f"duplicate roster symbol {symbol}", path, lineno)
        seen.add(symbol)
        try:
            grade = int(raw_grade)
        except ValueError:
            raise DataError(f"invalid grade {raw_grade!r}", path, lineno) from None
        if not (GRADE_MIN <= grade <= GRADE_MAX):
            raise DataError(
                f"grade {grade} outside the {GRADE_MIN}-{GRADE_MAX} scale", path, lineno
            )
        listing = _parse_date(raw_date, path, lineno)
        entries.append(RosterEntry(symbol, grade, listing))
    return entries


def load_dividends(path) -> list[DividendEvent]:
    """Load symbol,event_date,amount rows, kept in (symbol, date) order.

    Multiple events for one symbol are all retained. Negative amounts are
    rejected; an empty file (header only) yields an empty list.
    """
    events: list[DividendEvent] = []
    for lineno, (symbol, raw_date, raw_amount) in _read_rows(path, DIVIDENDS_HEADER):
        if not symbol:
            raise DataError("empty symbol", path, lineno)
        event_date = _parse_date(raw_date, path, lineno)
        amount = _parse_float(raw_amount, "amount", path, lineno)
        if amount < 0.0:
            raise DataError(f"dividend amount must be >= 0, got {amount!r}", path, lineno)
        events.append(DividendEvent(symbol, event_date, amount))
    events.sort(key=lambda e: (e.symbol, e.event_date))
    return events


def write_prices(series: dict[str, PriceSeries], path) -> None:
    """Write price series back to the symbol,date,close format (round-trips)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PRICES_HEADER)
        for symbol in sorted(series):
            s = series[symbol]
            for d, c in zip(s.dates, s.closes):
                writer.writerow([symbol, d.isoformat(), repr(float(c))])


def align(
    benchmark: PriceSeries,
    securities: dict[str, PriceSeries],
    roster: list[RosterEntry],
    dividends: list[DividendEvent] | None = None,
    *,
    months: int = 36,
    month_days: int = 21,
) -> AlignedPanel:
    """Restrict securities to benchmark trading dates and validate the panel.

    Observations on dates absent from the benchmark calendar are dropped with a
    warning (no interpolation). A security whose remaining coverage misses more
    than 5% of the benchmark days inside its ``months``-month event window is
    flagged. Fatal conditions: empty benchmark, a roster symbol with no price
    series, or a security with zero overlapping dates.
    """
    if len(benchmark) == 0:
        raise DataError("benchmark series is empty")
    warnings: list[str] = []
    calendar = frozenset(benchmark.dates)

    roster_symbols = {e.symbol for e in roster}
    missing = sorted(roster_symbols - set(securities))
    if missing:
        raise DataError(f"roster symbols without price series: {', '.join(missing)}")
    orphans = sorted(set(securities) - roster_symbols)
    for symbol in orphans:
        warnings.append(f"{symbol}: no roster entry, series dropped")

    listing_by_symbol = {e.symbol: e.listing_date for e in roster}
    window_len = months * month_days + 1  # listing day plus the full event horizon

    aligned: dict[str, PriceSeries] = {}
    for entry in sorted(roster, key=lambda e: e.symbol):
        series = securities[entry.symbol]
        restricted = series.restrict_to(calendar)
        dropped = len(series) - len(restricted)
        if dropped:
            warnings.append(
                f"{entry.symbol}: dropped {dropped} observation(s) not on the benchmark calendar"
            )
        if len(restricted) == 0:
            raise DataError(f"{entry.symbol}: no dates overlap the benchmark calendar")
        aligned[entry.symbol] = restricted

        listing = listing_by_symbol[entry.symbol]
        start = bisect.bisect_left(benchmark.dates, listing)
        expected = set(benchmark.dates[start : start + window_len])
        if expected:
            have = sum(1 for d in restricted.dates if d in expected)
            missing_frac = 1.0 - have / len(expected)
            if missing_frac > 0.05:
                warnings.append(
                    f"{entry.symbol}: missing {missing_frac:.1%} of benchmark days in its "
                    f"{months}-month event window"
                )

    return AlignedPanel(
        benchmark=benchmark,
        securities=aligned,
        roster=list(roster),
        dividends=list(dividends) if dividends else [],
        warnings=warnings,
    )
