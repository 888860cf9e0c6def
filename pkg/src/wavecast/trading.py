"""Forecast-driven weekly trading rules with a transaction ledger and ROI.

Each :class:`WeeklyQuote` describes week ``k``: the close ``y_k`` on its first
trading day, the forecast ``yhat_{k+1}`` of the next week's first-day close
and the opening price on the next trading day, at which any decision taken
in week ``k`` executes.

Rules, checked in this order each week:

* R1: not holding and ``yhat_{k+1} > y_k``: buy.
* R2: holding and ``yhat_{k+1} < y_k``: sell.
* R3: holding and ``E_{k-2} + E_{k-1} + E_k == 3``: sell (stop after three
  consecutive wrong rise calls).

``E_k = 1`` when ``yhat_k > y_{k-1}`` but ``y_k <= y_{k-1}``.
"""
from __future__ import annotations

import csv
import datetime as dt
import io
import math
from dataclasses import dataclass, field
from typing import Sequence


class TradingDataError(ValueError):
    pass


@dataclass(frozen=True)
class WeeklyQuote:
    week_start: dt.date
    close_first_day: float
    forecast_next_week: float
    open_next_day: float | None = None
    execution_date: dt.date | None = None

    def __post_init__(self):
        for name in ("close_first_day", "forecast_next_week"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise TradingDataError(f"{name} must be finite and positive in week {self.week_start}")
        if self.open_next_day is not None and not (math.isfinite(self.open_next_day) and self.open_next_day > 0):
            raise TradingDataError(f"open_next_day must be finite and positive in week {self.week_start}")


@dataclass(frozen=True)
class Transaction:
    kind: str  # "buy" or "sell"
    week: dt.date
    date: dt.date | None
    price: float
    rule: str  # "R1", "R2" or "R3"


@dataclass(frozen=True)
class TradeLog:
    transactions: tuple
    error_index: tuple
    holding_at_end: bool
    roi: float = field(default=0.0)
    roi_literal: float = field(default=0.0)

    @property
    def round_trips(self) -> list[tuple[Transaction, Transaction]]:
        t = self.transactions
        return [(t[i], t[i + 1]) for i in range(0, len(t) - 1, 2)]

    @property
    def open_position(self) -> Transaction | None:
        return self.transactions[-1] if self.holding_at_end else None


def error_index(quotes: Sequence[WeeklyQuote]) -> list[int]:
    if len(quotes) < 2:
        raise TradingDataError("need at least two weeks")
    out = [0]
    for k in range(1, len(quotes)):
        predicted_rise = quotes[k - 1].forecast_next_week > quotes[k - 1].close_first_day
        no_rise = quotes[k].close_first_day <= quotes[k - 1].close_first_day
        out.append(int(predicted_rise and no_rise))
    return out


def _execute(q: WeeklyQuote, kind: str, rule: str) -> Transaction:
    if q.open_next_day is None:
        raise TradingDataError(f"{rule} fires in week {q.week_start} but no execution price is given")
    return Transaction(kind, q.week_start, q.execution_date, float(q.open_next_day), rule)


def round_trip_returns(log: TradeLog) -> list[float]:
    return [(sell.price - buy.price) / buy.price for buy, sell in log.round_trips]


def roi(log: TradeLog, literal: bool = False) -> float:
    """Return over completed round trips.

    The default compounds per-trade returns, ``prod(1 + r_i) - 1``. With
    ``literal=True`` the raw returns are multiplied, ``prod(r_i)``, which is
    the formula as usually printed but shrinks towards zero as trades
    accumulate. Both agree for a single round trip. An open position at the
    end is excluded.
    """
    rs = round_trip_returns(log)
    if not rs:
        return 0.0
    if literal:
        return math.prod(rs)
    return math.prod(1.0 + r for r in rs) - 1.0


def run_backtest(quotes: Sequence[WeeklyQuote]) -> TradeLog:
    """Scan the weeks in order and apply R1-R3 (R2 takes precedence over R3)."""
    e = error_index(quotes)
    holding = False
    txs = []
    for k, q in enumerate(quotes):
        if not holding:
            if q.forecast_next_week > q.close_first_day:
                txs.append(_execute(q, "buy", "R1"))
                holding = True
        elif q.forecast_next_week < q.close_first_day:
            txs.append(_execute(q, "sell", "R2"))
            holding = False
        elif k >= 2 and e[k - 2] + e[k - 1] + e[k] == 3:
            txs.append(_execute(q, "sell", "R3"))
            holding = False
    log = TradeLog(tuple(txs), tuple(e), holding)
    return TradeLog(log.transactions, log.error_index, holding, roi(log), roi(log, literal=True))


def buy_and_hold_roi(quotes: Sequence[WeeklyQuote]) -> float:
    """Buy at the first week's execution price and value at the last close."""
    if len(quotes) < 2:
        raise TradingDataError("need at least two weeks")
    first = quotes[0].open_next_day
    if first is None:
        raise TradingDataError(f"no execution price in the first week {quotes[0].week_start}")
    return (quotes[-1].close_first_day - first) / first


def format_date(d) -> str:
    """``5-Jan-15`` style, as in the source ledger."""
    if d is None:
        return "-"
    if isinstance(d, dt.date):
        return f"{d.day}-{d:%b-%y}"
    return str(d)


LEDGER_COLUMNS = ("Date", "Closing Value", "Forecasted Closing Value", "Transaction", "Transaction Date", "E_k", "Rule")
RULE_NAMES = {"R1": "Rule 1", "R2": "Rule 2", "R3": "Rule 3"}


def ledger_rows(quotes: Sequence[WeeklyQuote], log: TradeLog) -> list[list[str]]:
    by_week = {t.week: t for t in log.transactions}
    rows = []
    for q, ek in zip(quotes, log.error_index):
        t = by_week.get(q.week_start)
        rows.append([
            format_date(q.week_start),
            f"{q.close_first_day:.2f}",
            f"{q.forecast_next_week:.2f}",
            f"{'Buy' if t.kind == 'buy' else 'Sell'} at {t.price:.2f}" if t else "-",
            format_date(t.date) if t else "-",
            str(ek),
            RULE_NAMES[t.rule] if t else "",
        ])
    return rows


def ledger_csv(quotes: Sequence[WeeklyQuote], log: TradeLog, delimiter: str = ",") -> str:
    buf = io.StringIO()
    w = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
    w.writerow(LEDGER_COLUMNS)
    w.writerows(ledger_rows(quotes, log))
    return buf.getvalue()
