"""Command-line interface.

Usage::

    wavecast decompose --input prices.csv --out out/
    wavecast forecast  --input prices.csv --models ann,svr,modwt-ann,modwt-svr --out out/
    wavecast compare   --out out/
    wavecast backtest  --input quotes.csv --out out/
    wavecast plot      --input prices.csv --out out/

Settings can also come from a flat ``key = value`` file given with
``--config``; flags override the file, and ``WAVECAST_SEED`` is the seed
fallback when neither sets one.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

from .ingest import IngestError, ingest_csv, ingest_quotes, parse_date, write_series_csv
from .modwt import DecomposeConfig, FilterSpec, modwt_decompose
from .pipeline import ForecastReport, PipelineConfig, compare_models, run_pipeline
from .series import SplitSpec
from .trading import WeeklyQuote, buy_and_hold_roi, ledger_csv, run_backtest

logger = logging.getLogger("wavecast")

MODEL_KEYS = {
    "ann": ("ann", False),
    "svr": ("svr", False),
    "modwt-ann": ("ann", True),
    "modwt-svr": ("svr", True),
}


@dataclass
class RunConfig:
    input_path: str | None = None
    date_column: str = "date"
    close_column: str = "close"
    open_column: str | None = None
    forecast_column: str = "forecast"
    models: tuple = ("ann", "svr", "modwt-ann", "modwt-svr")
    level: int = 3
    filter: str = "haar"
    split: float = 0.7
    norm: str = "zscore"
    leakage_mode: str = "paper"
    seed: int = 0
    output_dir: str = "out"
    literal_roi: bool = False
    report: str | None = None
    jobs: int = 1

    def __post_init__(self):
        if isinstance(self.models, str):
            self.models = tuple(m.strip().lower() for m in self.models.split(",") if m.strip())
        unknown = [m for m in self.models if m not in MODEL_KEYS]
        if unknown:
            raise ValueError(f"unknown models {unknown}; choose from {sorted(MODEL_KEYS)}")
        if not self.models:
            raise ValueError("select at least one model")

    def pipeline_config(self, model: str) -> PipelineConfig:
        kind, decompose = MODEL_KEYS[model]
        return PipelineConfig(
            model_kind=kind,
            decompose=decompose,
            wavelet=DecomposeConfig(level=self.level, filter=FilterSpec.from_name(self.filter)),
            split=SplitSpec(self.split),
            norm_kind=self.norm,
            seed=self.seed,
            leakage_mode=self.leakage_mode,
        )

    @property
    def out(self) -> Path:
        return Path(self.output_dir)


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


_ALIASES = {"input": "input_path", "out": "output_dir", "output": "output_dir"}


def _coerce(name: str, value):
    types = {f.name: f.type for f in fields(RunConfig)}
    t = types[name]
    if value is None:
        return None
    if "bool" in t:
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
    if t.startswith("int"):
        return int(value)
    if t.startswith("float"):
        return float(value)
    return value


def build_run_config(args: argparse.Namespace) -> RunConfig:
    merged = {}
    if getattr(args, "config", None):
        for k, v in read_config_file(args.config).items():
            k = _ALIASES.get(k, k)
            if k not in {f.name for f in fields(RunConfig)}:
                raise ValueError(f"unknown config key {k!r}")
            merged[k] = v
    for k, v in vars(args).items():
        k = _ALIASES.get(k, k)
        if v is not None and k in {f.name for f in fields(RunConfig)}:
            merged[k] = v
    if "seed" not in merged and os.environ.get("WAVECAST_SEED"):
        merged["seed"] = os.environ["WAVECAST_SEED"]
    return RunConfig(**{k: _coerce(k, v) if k != "models" else v for k, v in merged.items()})


def _load_series(run: RunConfig):
    if not run.input_path:
        raise ValueError("--input is required")
    return ingest_csv(run.input_path, run.date_column, run.close_column, run.open_column)


def _run_one(args):
    model, run, series = args
    return run_pipeline(series, run.pipeline_config(model))


def _report_path(out: Path, name: str) -> Path:
    return out / f"report_{name}.json"


def cmd_decompose(run: RunConfig) -> None:
    series = _load_series(run)
    cfg = DecomposeConfig(level=run.level, filter=FilterSpec.from_name(run.filter))
    dec = modwt_decompose(series.close, cfg)
    run.out.mkdir(parents=True, exist_ok=True)
    write_series_csv(run.out / "components.csv", series.timestamps, {"close": series.close, **dec.components})
    coeffs = {f"W{j + 1}": w for j, w in enumerate(dec.wavelet_coeffs)}
    coeffs[f"V{dec.level}"] = dec.scaling_coeffs
    write_series_csv(run.out / "coefficients.csv", series.timestamps, coeffs)


def cmd_forecast(run: RunConfig) -> list[ForecastReport]:
    series = _load_series(run)
    run.out.mkdir(parents=True, exist_ok=True)
    jobs = [(m, run, series) for m in run.models]
    if run.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=run.jobs) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    for r in reports:
        r.save(_report_path(run.out, r.model_name))
    write_metrics_table(run.out / "metrics.csv", reports)
    return reports


def write_metrics_table(path, reports) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["Model", "RMSE", "DA(%)"])
        for r in reports:
            w.writerow([r.model_name, f"{r.rmse:.4f}", f"{r.da_percent:.2f}"])


def _load_reports(run: RunConfig) -> list[ForecastReport]:
    paths = sorted(run.out.glob("report_*.json"))
    if not paths:
        raise FileNotFoundError(f"no report_*.json files in {run.out}")
    order = {"ANN": 0, "SVR": 1, "MODWT-ANN": 2, "MODWT-SVR": 3}
    reports = [ForecastReport.load(p) for p in paths]
    return sorted(reports, key=lambda r: (order.get(r.model_name, 9), r.model_name))


def wsrt_matrix(reports, alpha: float = 0.01) -> list[list[str]]:
    """Rows test the row model against each column model; ``+`` means the row model is better."""
    header = ["Model"]
    for r in reports:
        header += [f"{r.model_name} z", f"{r.model_name} WSRT"]
    rows = [header]
    for a in reports:
        row = [a.model_name]
        for b in reports:
            res = compare_models(a, b, alpha=alpha)
            row += [f"{res.z:.3f}", res.sign]
        rows.append(row)
    return rows


def cmd_compare(run: RunConfig) -> None:
    reports = _load_reports(run)
    with open(run.out / "wsrt.csv", "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(wsrt_matrix(reports))


def quotes_from_report(report: ForecastReport, series) -> list[WeeklyQuote]:
    """Weekly quotes over a report's test span.

    Week ``k`` takes the forecast made for week ``k+1``; its execution price
    is the ``open`` value of week ``k`` in the price file (the opening price
    on the next trading day).
    """
    if series.open is None:
        raise ValueError("a price file with an open column is needed (--open-column)")
    index = {d.isoformat() if isinstance(d, dt.date) else str(d): i for i, d in enumerate(series.timestamps)}
    quotes = []
    for k in range(len(report.test_labels) - 1):
        i = index[report.test_labels[k]]
        quotes.append(
            WeeklyQuote(
                parse_date(report.test_labels[k]),
                float(report.actuals[k]),
                float(report.predictions[k + 1]),
                float(series.open[i]),
                None,
            )
        )
    return quotes


def cmd_backtest(run: RunConfig) -> None:
    if run.report:
        quotes = quotes_from_report(ForecastReport.load(run.report), _load_series(run))
    else:
        if not run.input_path:
            raise ValueError("--input is required")
        quotes = ingest_quotes(
            run.input_path, run.date_column, run.close_column, run.forecast_column, run.open_column or "open"
        )
    log = run_backtest(quotes)
    bh = buy_and_hold_roi(quotes)
    run.out.mkdir(parents=True, exist_ok=True)
    (run.out / "ledger.csv").write_text(ledger_csv(quotes, log))
    headline = log.roi_literal if run.literal_roi else log.roi
    lines = [
        f"roi = {headline!r}",
        f"roi_convention = {'literal' if run.literal_roi else 'compounded'}",
        f"roi_compounded = {log.roi!r}",
        f"roi_literal = {log.roi_literal!r}",
        f"buy_and_hold_roi = {bh!r}",
        f"round_trips = {len(log.round_trips)}",
        f"open_position_at_end = {str(log.holding_at_end).lower()}",
    ]
    (run.out / "roi.txt").write_text("\n".join(lines) + "\n")


def cmd_plot(run: RunConfig) -> None:
    from . import plots

    series = _load_series(run)
    run.out.mkdir(parents=True, exist_ok=True)
    plots.plot_series(run.out / "series.svg", series.timestamps, series.close)
    dec = modwt_decompose(series.close, DecomposeConfig(level=run.level, filter=FilterSpec.from_name(run.filter)))
    plots.plot_components(run.out / "components.svg", series.timestamps, dec.components, series.close)
    reports = sorted(run.out.glob("report_*.json"))
    if reports:
        reps = _load_reports(run)
        x = [parse_date(s) for s in reps[0].test_labels]
        plots.plot_forecasts(run.out / "forecasts.svg", x, reps[0].actuals, {r.model_name: r.predictions for r in reps})


COMMANDS = {
    "decompose": cmd_decompose,
    "forecast": cmd_forecast,
    "compare": cmd_compare,
    "backtest": cmd_backtest,
    "plot": cmd_plot,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wavecast", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config")
        s.add_argument("--input")
        s.add_argument("--date-column", dest="date_column")
        s.add_argument("--close-column", dest="close_column")
        s.add_argument("--open-column", dest="open_column")
        s.add_argument("--forecast-column", dest="forecast_column")
        s.add_argument("--models")
        s.add_argument("--level", type=int)
        s.add_argument("--filter")
        s.add_argument("--split", type=float)
        s.add_argument("--norm", choices=["zscore", "minmax01", "minmax11", "none"])
        s.add_argument("--leakage-mode", dest="leakage_mode", choices=["paper", "causal"])
        s.add_argument("--seed", type=int)
        s.add_argument("--out")
        s.add_argument("--literal-roi", dest="literal_roi", action="store_true", default=None)
        s.add_argument("--report", help="backtest: forecast report to trade on")
        s.add_argument("--jobs", type=int, help="forecast: models to run in parallel")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        run = build_run_config(args)
    except (ValueError, OSError) as exc:
        print(f"wavecast: configuration error: {exc}", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](run)
    except IngestError as exc:
        print(f"wavecast: {args.command} failed in stage ingest: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # surfaced with the failing stage, never a traceback
        stage = getattr(exc, "stage", args.command)
        label = getattr(exc, "label", None)
        where = f"stage {stage}" + (f" (subseries {label})" if label else "")
        print(f"wavecast: {args.command} failed in {where}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
