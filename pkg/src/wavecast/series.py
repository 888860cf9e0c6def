"""Time-series containers and the reversible transforms used before model fitting.

Every transform returns a new array together with a :class:`PreprocessRecord`
that holds exactly what is needed to undo it.
"""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass
from typing import Sequence

import numpy as np

LABELS = tuple(f"W{j}" for j in range(1, 7)) + tuple(f"V{j}" for j in range(1, 7)) + ("RAW",)
NORM_KINDS = ("zscore", "minmax01", "minmax11", "none")
MAX_DIFF_ORDER = 3


class SeriesError(ValueError):
    """Raised for invalid series input (length, scale, parameters)."""


class DegenerateScaleError(SeriesError):
    """Raised when a normalization would divide by a zero spread."""


@dataclass(frozen=True)
class PriceSeries:
    """Dated closing prices with optional opening prices."""

    timestamps: tuple
    close: np.ndarray
    open: np.ndarray | None = None

    def __post_init__(self):
        close = np.asarray(self.close, dtype=float)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "close", close)
        close.setflags(write=False)
        if len(self.timestamps) != len(close):
            raise SeriesError("timestamps and close differ in length")
        if not np.all(np.isfinite(close)) or np.any(close <= 0):
            raise SeriesError("close prices must be finite and positive")
        for a, b in zip(self.timestamps, self.timestamps[1:]):
            if not a < b:
                raise SeriesError(f"timestamps not strictly increasing at {b}")
        if self.open is not None:
            opn = np.asarray(self.open, dtype=float)
            if opn.shape != close.shape:
                raise SeriesError("open and close differ in length")
            if not np.all(np.isfinite(opn)) or np.any(opn <= 0):
                raise SeriesError("open prices must be finite and positive")
            opn.setflags(write=False)
            object.__setattr__(self, "open", opn)

    def __len__(self) -> int:
        return len(self.close)

    @classmethod
    def from_values(cls, close: Sequence[float], start: dt.date = dt.date(2000, 1, 3)):
        """Build a weekly series with synthetic dates, mostly for tests."""
        dates = [start + dt.timedelta(weeks=i) for i in range(len(close))]
        return cls(dates, np.asarray(close, dtype=float))


@dataclass(frozen=True)
class Subseries:
    """A labelled real-valued sequence (a wavelet component or the raw series)."""

    values: np.ndarray
    label: str = "RAW"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise SeriesError("subseries must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(values)):
            raise SeriesError(f"subseries {self.label} has non-finite values")
        if self.label not in LABELS:
            raise SeriesError(f"unknown subseries label {self.label!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PreprocessRecord:
    """Trail of the transforms applied to one subseries.

    ``diff_initials[k]`` is the first value of the series before difference
    pass ``k``; ``norm_params`` is ``(mean, std)`` for zscore and ``(min, max)``
    for the min-max kinds.
    """

    diff_order: int = 0
    diff_initials: tuple = ()
    norm_kind: str = "none"
    norm_params: tuple = ()

    def __post_init__(self):
        if self.diff_order < 0:
            raise SeriesError("diff_order must be non-negative")
        if len(self.diff_initials) != self.diff_order:
            raise SeriesError("diff_initials must hold one value per pass")
        if self.norm_kind not in NORM_KINDS:
            raise SeriesError(f"unknown normalization {self.norm_kind!r}")
        if self.norm_kind == "zscore" and not self.norm_params[1] > 0:
            raise DegenerateScaleError("zscore std must be positive")
        if self.norm_kind.startswith("minmax") and not self.norm_params[1] > self.norm_params[0]:
            raise DegenerateScaleError("minmax range must be positive")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.7

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise SeriesError(f"train_fraction must lie in (0, 1), got {self.train_fraction}")


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, Subseries) else np.asarray(s, dtype=float)


def _label(s) -> str:
    return s.label if isinstance(s, Subseries) else "RAW"


def difference(s, d: int) -> tuple[Subseries, PreprocessRecord]:
    """Apply ``d`` passes of first differencing, dropping leading points.

    >>> difference([1, 3, 6, 10], 1)[0].values
    array([2., 3., 4.])
    """
    x = _values(s)
    if d < 0 or d > MAX_DIFF_ORDER:
        raise SeriesError(f"difference order must be in [0, {MAX_DIFF_ORDER}], got {d}")
    if len(x) <= d:
        raise SeriesError(f"series of length {len(x)} is too short for {d} differences")
    initials = []
    for _ in range(d):
        initials.append(float(x[0]))
        x = np.diff(x)
    return Subseries(x, _label(s)), PreprocessRecord(d, tuple(initials))


def undifference(s, rec: PreprocessRecord) -> Subseries:
    """Invert :func:`difference` by cumulative summation from the stored initials."""
    x = np.array(_values(s), dtype=float)
    if len(rec.diff_initials) != rec.diff_order:
        raise SeriesError("record is missing differencing initials")
    for initial in reversed(rec.diff_initials):
        x = np.concatenate(([initial], initial + np.cumsum(x)))
    return Subseries(x, _label(s))


def undifference_step(predicted_diff: float, history: Sequence[float], d: int) -> float:
    """Level forecast from a forecast of the ``d``-th difference at the next step.

    ``history`` holds actual levels up to the forecast origin; uses
    ``x_t = D^d x_t - sum_{k=1..d} (-1)^k C(d, k) x_{t-k}``.
    """
    if d == 0:
        return float(predicted_diff)
    if len(history) < d:
        raise SeriesError("not enough history to invert differencing")
    level = float(predicted_diff)
    coef = 1
    for k in range(1, d + 1):
        coef = coef * (d - k + 1) // k
        level -= (-1) ** k * coef * float(history[-k])
    return level


def fit_normalization(x, kind: str) -> tuple:
    """Return the parameters ``kind`` would use on ``x``."""
    x = _values(x)
    if kind == "zscore":
        std = float(np.std(x, ddof=1)) if len(x) > 1 else 0.0
        if not std > 0:
            raise DegenerateScaleError("zero variance series cannot be z-scored")
        return (float(np.mean(x)), std)
    if kind in ("minmax01", "minmax11"):
        lo, hi = float(np.min(x)), float(np.max(x))
        if not hi > lo:
            raise DegenerateScaleError("constant series cannot be min-max scaled")
        return (lo, hi)
    if kind == "none":
        return ()
    raise SeriesError(f"unknown normalization {kind!r}")


def apply_normalization(x, kind: str, params: tuple) -> np.ndarray:
    x = _values(x)
    if kind == "zscore":
        return (x - params[0]) / params[1]
    if kind == "minmax01":
        return (x - params[0]) / (params[1] - params[0])
    if kind == "minmax11":
        return 2.0 * (x - params[0]) / (params[1] - params[0]) - 1.0
    return np.array(x, dtype=float)


def invert_normalization(x, kind: str, params: tuple) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if kind == "zscore":
        return x * params[1] + params[0]
    if kind == "minmax01":
        return x * (params[1] - params[0]) + params[0]
    if kind == "minmax11":
        return (x + 1.0) / 2.0 * (params[1] - params[0]) + params[0]
    return np.array(x, dtype=float)


def normalize(s, kind: str = "zscore") -> tuple[Subseries, PreprocessRecord]:
    """Scale a series; zscore uses the n-1 sample standard deviation."""
    params = fit_normalization(s, kind)
    out = apply_normalization(s, kind, params)
    return Subseries(out, _label(s)), PreprocessRecord(norm_kind=kind, norm_params=params)


def denormalize(s, rec: PreprocessRecord) -> Subseries:
    return Subseries(invert_normalization(_values(s), rec.norm_kind, rec.norm_params), _label(s))


def split_index(n: int, spec: SplitSpec = SplitSpec()) -> int:
    """Number of leading points that go to the training partition."""
    if n < 4:
        raise SeriesError(f"need at least 4 points to split, got {n}")
    # guard against 0.7 * 70 == 48.99999999999999
    k = int(np.floor(n * spec.train_fraction + 1e-9))
    if k < 1 or k >= n:
        raise SeriesError(f"split of {n} points at {spec.train_fraction} leaves an empty side")
    return k


def split(s, spec: SplitSpec = SplitSpec()) -> tuple[Subseries, Subseries]:
    x = _values(s)
    k = split_index(len(x), spec)
    return Subseries(x[:k], _label(s)), Subseries(x[k:], _label(s))


__all__ = [
    "DegenerateScaleError",
    "PreprocessRecord",
    "PriceSeries",
    "SeriesError",
    "SplitSpec",
    "Subseries",
    "denormalize",
    "difference",
    "normalize",
    "split",
    "split_index",
    "undifference",
    "undifference_step",
]
