"""Command-line pipeline: eventstudy, garch, simulate and report subcommands.

Parameter precedence is command-line flags over config-file entries over
defaults. The config file holds flat key=value lines (# starts a comment).
Every run writes a config echo file listing the effective analysis parameters
(the output destination lives in the metadata sidecar instead) and a
run_meta.json sidecar carrying the timestamp and input digests; everything
else a run writes is byte-deterministic for identical inputs and parameters.

Exit codes: 0 success, 2 input or validation problem, 1 internal error.
"""

from __future__ import annotations

import argparse
import sys
import traceback
from dataclasses import dataclass, asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import event_study, ingest, report
from .garch import (
    GarchData,
    GarchParams,
    GarchSpec,
    InfeasibleParamsError,
    MIN_OBSERVATIONS,
    build_dummy,
    cohort_verdict,
    estimate,
)
from .ingest import DataError
from .report import ReportBundle, SecurityFitRow
from .simulate import SimConfig, recovery_experiment

CONFIG_ECHO_NAME = "config_echo.txt"


@dataclass
class RunConfig:
    """Effective parameters of one run (all of them echoed to disk)."""

    prices: str | None = None
    benchmark: str | None = None
    roster: str | None = None
    dividends: str | None = None
    out: str = "out"
    months: int = 36
    month_days: int = 21
    level: float = 0.05
    constrained: bool = False
    seed: int = 0
    reps: int = 50
    sim_t: int = 1000
    dummy_prob: float = 0.3
    market_mean: float = 0.01
    market_vol: float = 0.05
    true_c1: float = 0.0
    true_c2: float = 1.0
    true_omega: float = 0.00025
    true_alpha: float = 0.1
    true_beta: float = 0.8
    true_delta: float = 0.0
    garch_max_iterations: int = 4000
    garch_ll_tolerance: float = 1e-8

    def garch_spec(self) -> GarchSpec:
        return GarchSpec(
            constrain_stationarity=self.constrained,
            significance_level=self.level,
            max_iterations=self.garch_max_iterations,
            ll_tolerance=self.garch_ll_tolerance,
        )


_BOOL_TRUE = {"1", "true", "yes", "on"}
_BOOL_FALSE = {"0", "false", "no", "off"}


def _coerce(name: str, raw: str, target_type):
    if target_type is bool:
        low = raw.strip().lower()
        if low in _BOOL_TRUE:
            return True
        if low in _BOOL_FALSE:
            return False
        raise DataError(f"config key {name}: expected a boolean, got {raw!r}")
    try:
        return target_type(raw)
    except ValueError:
        raise DataError(
            f"config key {name}: expected {target_type.__name__}, got {raw!r}"
        ) from None


def load_config_file(path) -> dict:
    """Parse flat key=value lines into typed RunConfig overrides."""
    types = {f.name: f.type for f in fields(RunConfig)}
    # dataclass field types are strings under `from __future__ import annotations`
    typemap = {
        "prices": str, "benchmark": str, "roster": str, "dividends": str, "out": str,
        "months": int, "month_days": int, "level": float, "constrained": bool,
        "seed": int, "reps": int, "sim_t": int, "dummy_prob": float,
        "market_mean": float, "market_vol": float,
        "true_c1": float, "true_c2": float, "true_omega": float,
        "true_alpha": float, "true_beta": float, "true_delta": float,
        "garch_max_iterations": int, "garch_ll_tolerance": float,
    }
    assert set(typemap) == set(types)
    out: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise DataError("expected key=value", path, lineno)
        key, raw = (s.strip() for s in stripped.split("=", 1))
        if key not in typemap:
            raise DataError(f"unknown config key {key!r}", path, lineno)
        out[key] = _coerce(key, raw, typemap[key])
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipoperf",
        description="IPO aftermarket performance statistics and dividend-effect tests",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prices", help="security prices CSV (symbol,date,close)")
    common.add_argument("--benchmark", help="benchmark index prices CSV")
    common.add_argument("--roster", help="IPO roster CSV (symbol,grade,listing_date)")
    common.add_argument("--dividends", help="dividend events CSV (symbol,event_date,amount)")
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--months", type=int, help="event months to study (default: 36)")
    common.add_argument("--month-days", type=int, dest="month_days",
                        help="trading days per event month (default: 21)")
    common.add_argument("--level", type=float, help="significance level (default: 0.05)")
    common.add_argument("--constrained", action="store_true", default=None,
                        help="constrain GARCH variance coefficients to the stationary region")
    common.add_argument("--seed", type=int, help="simulation seed (default: 0)")
    common.add_argument("--reps", type=int, help="simulation replications (default: 50)")
    common.add_argument("--config", help="flat key=value config file")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eventstudy", parents=[common],
                   help="cohort return tables and CAR plot data")
    sub.add_parser("garch", parents=[common],
                   help="per-security dividend-effect fits and the cohort verdict")
    sub.add_parser("simulate", parents=[common],
                   help="parameter-recovery experiment on synthetic data")
    sub.add_parser("report", parents=[common],
                   help="full pipeline: event study plus dividend-effect fits")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    overrides: dict = {}
    if args.config:
        overrides.update(load_config_file(args.config))
    for f in fields(RunConfig):
        flag_value = getattr(args, f.name, None)
        if flag_value is not None:
            overrides[f.name] = flag_value
    for key, value in overrides.items():
        setattr(cfg, key, value)
    if cfg.months < 1:
        raise DataError("months must be >= 1")
    if cfg.month_days < 1:
        raise DataError("month_days must be >= 1")
    if not (0.0 < cfg.level < 1.0):
        raise DataError("level must be in (0, 1)")
    if cfg.reps < 1:
        raise DataError("reps must be >= 1")
    if cfg.sim_t < 2:
        raise DataError("sim_t must be >= 2")
    return cfg


def _write_config_echo(cfg: RunConfig, outdir: Path) -> Path:
    # the destination is not an analysis parameter: echoing it would make
    # otherwise-identical runs into different directories differ byte-wise,
    # so it lives in run_meta.json instead
    lines = [f"{k}={v!r}" if isinstance(v, str) else f"{k}={v}"
             for k, v in sorted(asdict(cfg).items()) if k != "out"]
    path = outdir / CONFIG_ECHO_NAME
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def _require(cfg: RunConfig, *names: str) -> None:
    missing = [n for n in names if getattr(cfg, n) is None]
    if missing:
        raise DataError(f"missing required input(s): {', '.join('--' + n for n in missing)}")


def _input_digests(cfg: RunConfig) -> dict:
    digests = {}
    for name in ("prices", "benchmark", "roster", "dividends"):
        path = getattr(cfg, name)
        if path is not None and Path(path).exists():
            digests[name] = report.sha256_of(path)
    return digests


def _load_panel(cfg: RunConfig, *, need_dividends: bool) -> ingest.AlignedPanel:
    _require(cfg, "prices", "benchmark", "roster")
    if need_dividends:
        _require(cfg, "dividends")
    for name in ("prices", "benchmark", "roster", "dividends"):
        path = getattr(cfg, name)
        if path is not None and not Path(path).exists():
            raise DataError(f"{name} file not found: {path}")
    securities = ingest.load_prices(cfg.prices)
    benchmark_map = ingest.load_prices(cfg.benchmark)
    if len(benchmark_map) != 1:
        raise DataError(
            f"{cfg.benchmark}: benchmark file must hold exactly one symbol, "
            f"got {len(benchmark_map)}"
        )
    (benchmark,) = benchmark_map.values()
    roster = ingest.load_roster(cfg.roster)
    dividends = ingest.load_dividends(cfg.dividends) if cfg.dividends else []
    panel = ingest.align(
        benchmark, securities, roster, dividends,
        months=cfg.months, month_days=cfg.month_days,
    )
    for note in panel.warnings:
        print(f"warning: {note}", file=sys.stderr)
    return panel


def _event_series(panel: ingest.AlignedPanel, cfg: RunConfig):
    """Paired event series for every roster security with at least one month."""
    pairs = []
    for entry in sorted(panel.roster, key=lambda e: e.symbol):
        try:
            pair = event_study.monthly_returns(
                panel.securities[entry.symbol],
                panel.benchmark,
                entry.listing_date,
                months=cfg.months,
                month_days=cfg.month_days,
                grade=entry.grade,
            )
        except event_study.InsufficientDataError as exc:
            print(f"warning: {exc}, excluded", file=sys.stderr)
            continue
        pairs.append((entry, pair))
    return pairs


def _cohort_bundle(panel, pairs, cfg: RunConfig) -> ReportBundle:
    by_grade: dict[int, list] = {}
    for entry, pair in pairs:
        by_grade.setdefault(entry.grade, []).append(pair)
    summaries = [event_study.cohort_summary(cohort) for _, cohort in sorted(by_grade.items())]
    meta = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "inputs": _input_digests(cfg),
        "out": cfg.out,
    }
    return ReportBundle(summaries=summaries, meta=meta)


def _garch_rows(panel, pairs, cfg: RunConfig):
    """Fit each security with enough usable months; note inert dummies."""
    spec = cfg.garch_spec()
    div_by_symbol: dict[str, list] = {}
    for event in panel.dividends:
        div_by_symbol.setdefault(event.symbol, []).append(event)
    rows = []
    skipped = []
    for entry, (sec_series, bench_series) in pairs:
        y = sec_series.monthly_returns
        if len(y) < MIN_OBSERVATIONS:
            skipped.append(entry.symbol)
            continue
        dummy = build_dummy(
            div_by_symbol.get(entry.symbol, []),
            sec_series.windows,
            listing_date=entry.listing_date,
        )
        data = GarchData(y=y, x=bench_series.monthly_returns, d=dummy)
        inert = bool(np.all(data.d == 0.0))
        fit = estimate(data, spec, fix_dummy=inert)
        note = "dummy inert: no dividends in window, effect indeterminate or zero" if inert else ""
        rows.append(SecurityFitRow(symbol=entry.symbol, fit=fit, note=note))
    for symbol in skipped:
        print(
            f"warning: {symbol}: fewer than {MIN_OBSERVATIONS} usable months, not fitted",
            file=sys.stderr,
        )
    return rows


def cmd_eventstudy(cfg: RunConfig) -> int:
    panel = _load_panel(cfg, need_dividends=False)
    pairs = _event_series(panel, cfg)
    bundle = _cohort_bundle(panel, pairs, cfg)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    grades = sorted({e.grade for e in panel.roster})
    written = report.render_cohort_tables(bundle, outdir)
    written += report.render_plot_data(bundle, outdir, include_grades=grades)
    written.append(_write_config_echo(cfg, outdir))
    report.write_manifest(outdir, written)
    report.write_run_meta(outdir, bundle.meta)
    print(f"wrote {len(written)} artifact(s) to {outdir}")
    return 0


def cmd_garch(cfg: RunConfig) -> int:
    panel = _load_panel(cfg, need_dividends=True)
    pairs = _event_series(panel, cfg)
    rows = _garch_rows(panel, pairs, cfg)
    if not rows:
        raise DataError("no security has enough usable months to fit")
    verdict = cohort_verdict([r.fit for r in rows])
    meta = {
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "inputs": _input_digests(cfg),
        "out": cfg.out,
    }
    bundle = ReportBundle(fits=rows, verdict=verdict, meta=meta)
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    written = report.render_garch_table(bundle, outdir, level=cfg.level)
    verdict_line = (
        f"{verdict.significant} out of {verdict.total} dummy coefficients significant: "
        f"{verdict.conclusion}"
    )
    verdict_path = outdir / "garch_verdict.txt"
    verdict_path.write_text(verdict_line + "\n", encoding="utf-8", newline="\n")
    written.append(verdict_path)
    written.append(_write_config_echo(cfg, outdir))
    report.write_manifest(outdir, written)
    report.write_run_meta(outdir, meta)
    print(verdict_line)
    return 0


def cmd_simulate(cfg: RunConfig) -> int:
    sim = SimConfig(
        true_params=GarchParams(
            cfg.true_c1, cfg.true_c2, cfg.true_omega,
            cfg.true_alpha, cfg.true_beta, cfg.true_delta,
        ),
        n_obs=cfg.sim_t,
        dummy_pattern=cfg.dummy_prob,
        market_mean=cfg.market_mean,
        market_vol=cfg.market_vol,
        seed=cfg.seed,
    )
    result = recovery_experiment(sim, cfg.reps, cfg.garch_spec())
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    lines = ["coefficient,truth,bias,rmse,coverage"]
    for name, truth, bias, rmse, coverage in result.rows():
        bias_s = "na" if not np.isfinite(bias) else repr(bias)
        rmse_s = "na" if not np.isfinite(rmse) else repr(rmse)
        cov_s = "na" if not np.isfinite(coverage) else repr(coverage)
        lines.append(f"{name},{repr(truth)},{bias_s},{rmse_s},{cov_s}")
    lines.append(f"# converged {result.n_converged} of {result.replications} replications")
    recovery_path = outdir / "recovery.csv"
    recovery_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    written = [recovery_path, _write_config_echo(cfg, outdir)]
    report.write_manifest(outdir, written)
    report.write_run_meta(
        outdir,
        {
            "generated_at": datetime.now(timezone.utc).isoformat(),
            "inputs": {},
            "out": cfg.out,
        },
    )
    print(
        f"recovery over {result.replications} replication(s): "
        f"{result.n_converged} converged, {result.n_failed} excluded"
    )
    return 0


def cmd_report(cfg: RunConfig) -> int:
    panel = _load_panel(cfg, need_dividends=True)
    pairs = _event_series(panel, cfg)
    rows = _garch_rows(panel, pairs, cfg)
    verdict = cohort_verdict([r.fit for r in rows]) if rows else None
    bundle = _cohort_bundle(panel, pairs, cfg)
    bundle.fits = rows
    bundle.verdict = verdict
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    grades = sorted({e.grade for e in panel.roster})
    written = report.render_cohort_tables(bundle, outdir)
    written += report.render_plot_data(bundle, outdir, include_grades=grades)
    if rows:
        written += report.render_garch_table(bundle, outdir, level=cfg.level)
        verdict_line = (
            f"{verdict.significant} out of {verdict.total} dummy coefficients significant: "
            f"{verdict.conclusion}"
        )
        verdict_path = outdir / "garch_verdict.txt"
        verdict_path.write_text(verdict_line + "\n", encoding="utf-8", newline="\n")
        written.append(verdict_path)
        print(verdict_line)
    written.append(_write_config_echo(cfg, outdir))
    report.write_manifest(outdir, written)
    report.write_run_meta(outdir, bundle.meta)
    print(f"wrote {len(written)} artifact(s) to {outdir}")
    return 0


COMMANDS = {
    "eventstudy": cmd_eventstudy,
    "garch": cmd_garch,
    "simulate": cmd_simulate,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg)
    except (DataError, InfeasibleParamsError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
