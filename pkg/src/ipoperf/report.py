"""Deterministic file rendering of event-study and GARCH results.

Percent values are fractions times 100, fixed to two decimals with
round-half-to-even; coefficients use four decimals. All files are UTF-8 with
LF newlines and comma delimiters, and contain no timestamps, so identical
inputs render byte-identical artifacts. Run metadata (timestamps, input
digests) lives only in a separate sidecar file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_EVEN
from pathlib import Path
from typing import Sequence

import numpy as np

from .event_study import CohortSummary
from .garch import CohortVerdict, GarchFit, fit_table_csv

MANIFEST_NAME = "manifest.json"
RUN_META_NAME = "run_meta.json"

_TWO_DP = Decimal("0.01")
_FOUR_DP = Decimal("0.0001")


def format_percent(fraction: float | None) -> str:
    """Render a fraction as a percent: 2 decimals, round-half-to-even.

    -0.2073 -> "-20.73"; None or non-finite -> "na".
    """
    if fraction is None or not np.isfinite(fraction):
        return "na"
    q = (Decimal(repr(float(fraction))) * 100).quantize(_TWO_DP, rounding=ROUND_HALF_EVEN)
    if q == 0:
        q = abs(q)  # never render "-0.00"
    return str(q)


def format_coef(value: float | None) -> str:
    """Render a coefficient at 4 decimals, round-half-to-even; NaN -> "na"."""
    if value is None or not np.isfinite(value):
        return "na"
    q = Decimal(repr(float(value))).quantize(_FOUR_DP, rounding=ROUND_HALF_EVEN)
    if q == 0:
        q = abs(q)
    return str(q)


def format_cell(estimate: float, std_error: float, significant: bool) -> str:
    """Coefficient cell "est(se)" with a star on significance: "0.0062*(0.0026)".

    An unavailable standard error renders as "(na)" and can never be starred.
    """
    star = "*" if significant else ""
    if not np.isfinite(std_error):
        return f"{format_coef(estimate)}(na)"
    return f"{format_coef(estimate)}{star}({format_coef(std_error)})"


@dataclass
class SecurityFitRow:
    """One security's fit destined for the rendered table."""

    symbol: str
    fit: GarchFit
    note: str = ""


@dataclass
class ReportBundle:
    """Everything a run wants rendered, plus its metadata.

    summaries: grade cohort summaries, one per grade, unique grades.
    fits: per-security GARCH fits (empty for a pure event-study run).
    verdict: the dividend-effect cohort verdict, when fits exist.
    meta: generation metadata (timestamps, input digests); kept out of the
    deterministic artifacts and written only to the sidecar.
    """

    summaries: list[CohortSummary] = field(default_factory=list)
    fits: list[SecurityFitRow] = field(default_factory=list)
    verdict: CohortVerdict | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        grades = [s.grade for s in self.summaries]
        if len(set(grades)) != len(grades):
            raise ValueError("duplicate grade in summaries")


def _write(path: Path, text: str) -> Path:
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def render_cohort_tables(bundle: ReportBundle, outdir) -> list[Path]:
    """Write table_raw.csv, table_adjusted.csv, table_hpr.csv, table_wr.csv.

    One row per grade, sorted by grade. Raw/adjusted tables carry the count of
    negative cohort-average months and the final cumulative average return;
    the HPR table the high/low/mean/median holding-period returns (complete
    windows only); the WR table the wealth relative both as a 4-decimal ratio
    and under the percent convention.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    summaries = sorted(bundle.summaries, key=lambda s: (s.grade is None, s.grade))

    raw_lines = ["grade,n,negative_months,car_final_pct"]
    adj_lines = ["grade,n,negative_months,car_final_pct"]
    hpr_lines = ["grade,n_complete,high_pct,low_pct,mean_pct,median_pct"]
    wr_lines = ["grade,n_complete,wealth_relative,wealth_relative_pct,performance"]
    for s in summaries:
        g = "na" if s.grade is None else str(s.grade)
        car_raw = float(s.car_raw[-1]) if len(s.car_raw) else None
        car_adj = float(s.car_adjusted[-1]) if len(s.car_adjusted) else None
        raw_lines.append(f"{g},{s.n},{s.negative_months_raw},{format_percent(car_raw)}")
        adj_lines.append(f"{g},{s.n},{s.negative_months_adjusted},{format_percent(car_adj)}")
        hpr_lines.append(
            f"{g},{s.n_complete},{format_percent(s.hpr_high)},{format_percent(s.hpr_low)},"
            f"{format_percent(s.hpr_mean)},{format_percent(s.hpr_median)}"
        )
        wr_lines.append(
            f"{g},{s.n_complete},{format_coef(s.wealth_relative)},"
            f"{format_percent(s.wealth_relative)},{s.performance or 'na'}"
        )

    return [
        _write(outdir / "table_raw.csv", "\n".join(raw_lines) + "\n"),
        _write(outdir / "table_adjusted.csv", "\n".join(adj_lines) + "\n"),
        _write(outdir / "table_hpr.csv", "\n".join(hpr_lines) + "\n"),
        _write(outdir / "table_wr.csv", "\n".join(wr_lines) + "\n"),
    ]


def render_garch_table(
    bundle: ReportBundle, outdir, *, level: float = 0.05
) -> list[Path]:
    """Write the per-security coefficient table, human-readable and machine forms.

    table_garch.csv carries one "est(se)" cell per coefficient with a star on
    significant ones and a trailing footnote line naming the test size.
    garch_fits.csv is the full-precision machine table.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["symbol,c1,c2,c3,c4,c5,c6,loglik,converged,note"]
    for row in bundle.fits:
        fit = row.fit
        theta = fit.params.as_array()
        cells = [row.symbol]
        for i in range(6):
            cells.append(format_cell(theta[i], fit.std_errors[i], bool(fit.significant[i])))
        cells.append(format_coef(fit.log_likelihood))
        cells.append("true" if fit.converged else "false")
        cells.append(row.note)
        lines.append(",".join(cells))
    lines.append(f"# * significant at the {level * 100:g}% level")
    paths = [_write(Path(outdir) / "table_garch.csv", "\n".join(lines) + "\n")]
    paths.append(
        _write(
            Path(outdir) / "garch_fits.csv",
            fit_table_csv([(row.symbol, row.fit) for row in bundle.fits]),
        )
    )
    return paths


def render_plot_data(
    bundle: ReportBundle, outdir, *, include_grades: Sequence[int] = ()
) -> list[Path]:
    """Write per-grade CAR paths for plotting: event_month,car_raw,car_adjusted.

    Values keep full precision (shortest round-trip representation). Grades in
    ``include_grades`` without a summary get a header-only file, so a plot
    exists for every grade the caller studied.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    header = "event_month,car_raw,car_adjusted"
    by_grade = {s.grade: s for s in bundle.summaries if s.grade is not None}
    grades = sorted(set(by_grade) | set(include_grades))
    paths = []
    for g in grades:
        lines = [header]
        s = by_grade.get(g)
        if s is not None:
            for t in range(len(s.car_raw)):
                lines.append(
                    f"{t + 1},{repr(float(s.car_raw[t]))},{repr(float(s.car_adjusted[t]))}"
                )
        paths.append(_write(outdir / f"plot_grade{g}.csv", "\n".join(lines) + "\n"))
    return paths


def sha256_of(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(outdir, paths: Sequence[Path]) -> Path:
    """Index the run's artifacts by content digest (no timestamps)."""
    outdir = Path(outdir)
    artifacts = {Path(p).name: sha256_of(p) for p in paths}
    payload = {"artifacts": {k: artifacts[k] for k in sorted(artifacts)}}
    return _write(outdir / MANIFEST_NAME, json.dumps(payload, indent=2) + "\n")


def write_run_meta(outdir, meta: dict) -> Path:
    """Write the metadata sidecar; the one artifact allowed to carry timestamps."""
    outdir = Path(outdir)
    return _write(outdir / RUN_META_NAME, json.dumps(meta, indent=2, sort_keys=True) + "\n")
