"""CSV readers for price series and trading quotes."""
from __future__ import annotations

import csv
import datetime as dt
from pathlib import Path

import numpy as np

from .series import PriceSeries, SeriesError
from .trading import WeeklyQuote

DATE_FORMATS = ("%Y-%m-%d", "%d-%b-%y", "%d-%b-%Y")


class IngestError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


def parse_date(text: str) -> dt.date:
    """ISO 8601 (``2015-01-05``) or ``5-Jan-15`` style."""
    text = text.strip()
    for fmt in DATE_FORMATS:
        try:
            return dt.datetime.strptime(text, fmt).date()
        except ValueError:
            pass
    try:
        return dt.datetime.fromisoformat(text).date()
    except ValueError:
        raise ValueError(f"unrecognised date {text!r}") from None


def _rows(path, required):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise IngestError(f"{path} is empty")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise IngestError(f"missing columns {missing} in {path}")
        # header is line 1
        for line, row in enumerate(reader, start=2):
            yield line, row


def _positive(row, col, line) -> float:
    try:
        v = float(row[col])
    except (TypeError, ValueError):
        raise IngestError(f"column {col!r} is not a number: {row[col]!r}", line) from None
    if not (np.isfinite(v) and v > 0):
        raise IngestError(f"column {col!r} must be a positive price, got {v}", line)
    return v


def ingest_csv(path, date_column: str = "date", close_column: str = "close", open_column: str | None = None) -> PriceSeries:
    """Read a dated price file; dates must be strictly increasing."""
    if not Path(path).exists():
        raise IngestError(f"no such file: {path}")
    required = [date_column, close_column] + ([open_column] if open_column else [])
    dates, closes, opens = [], [], []
    for line, row in _rows(path, required):
        try:
            d = parse_date(row[date_column] or "")
        except ValueError as exc:
            raise IngestError(str(exc), line) from None
        if dates and not d > dates[-1]:
            raise IngestError(f"date {d} does not follow {dates[-1]}", line)
        dates.append(d)
        closes.append(_positive(row, close_column, line))
        if open_column:
            opens.append(_positive(row, open_column, line))
    if not dates:
        raise IngestError(f"{path} has no data rows")
    try:
        return PriceSeries(dates, np.array(closes), np.array(opens) if open_column else None)
    except SeriesError as exc:
        raise IngestError(str(exc)) from None


def ingest_quotes(
    path,
    date_column: str = "date",
    close_column: str = "close",
    forecast_column: str = "forecast",
    open_column: str = "open",
    execution_date_column: str = "execution_date",
) -> list[WeeklyQuote]:
    """Read weekly quotes for a backtest.

    ``forecast`` is the forecast of the next week's first-day close and
    ``open`` the next trading day's opening price; either of ``open`` and
    ``execution_date`` may be blank on weeks without a trade.
    """
    quotes = []
    for line, row in _rows(path, [date_column, close_column, forecast_column]):
        try:
            week = parse_date(row[date_column] or "")
            exec_raw = (row.get(execution_date_column) or "").strip()
            exec_date = parse_date(exec_raw) if exec_raw not in ("", "-") else None
        except ValueError as exc:
            raise IngestError(str(exc), line) from None
        open_raw = (row.get(open_column) or "").strip()
        opn = _positive(row, open_column, line) if open_raw not in ("", "-") else None
        if quotes and not week > quotes[-1].week_start:
            raise IngestError(f"date {week} does not follow {quotes[-1].week_start}", line)
        quotes.append(
            WeeklyQuote(
                week,
                _positive(row, close_column, line),
                _positive(row, forecast_column, line),
                opn,
                exec_date,
            )
        )
    return quotes


def write_series_csv(path, dates, columns: dict) -> None:
    """Write ``date`` plus named numeric columns with full float precision."""
    names = list(columns)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date"] + names)
        for i, d in enumerate(dates):
            w.writerow([d.isoformat() if isinstance(d, dt.date) else d] + [repr(float(columns[k][i])) for k in names])
