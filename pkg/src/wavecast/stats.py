"""Stationarity testing, correlograms for lag selection and the Wilcoxon signed-rank test."""
from __future__ import annotations

from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from .series import MAX_DIFF_ORDER, PreprocessRecord, SeriesError, Subseries, difference

# Asymptotic Dickey-Fuller critical values, constant and no trend.
ADF_CRITICAL_VALUES = {"1%": -3.43, "5%": -2.86, "10%": -2.57}


class StatsError(ValueError):
    pass


@dataclass(frozen=True)
class AdfResult:
    statistic: float
    lags_used: int
    critical_values: dict = field(default_factory=lambda: dict(ADF_CRITICAL_VALUES))

    @property
    def stationary(self) -> bool:
        return self.statistic < self.critical_values["5%"]


@dataclass(frozen=True)
class CorrelogramResult:
    acf: np.ndarray   # lags 0..L
    pacf: np.ndarray  # lags 1..L
    band: float


@dataclass(frozen=True)
class WsrtResult:
    z: float
    significant: bool
    sign: str
    n: int = 0


def _values(s) -> np.ndarray:
    return s.values if isinstance(s, Subseries) else np.asarray(s, dtype=float)


def adf_lag_order(n: int) -> int:
    return int(np.floor((n - 1) ** (1.0 / 3.0) + 1e-12))


def adf_test(s, lags: int | None = None) -> AdfResult:
    """Augmented Dickey-Fuller test with a constant.

    Regresses ``dy_t`` on ``(1, y_{t-1}, dy_{t-1}, ..., dy_{t-p})`` by least
    squares and returns the t-ratio of the lagged level. ``p`` defaults to
    ``floor((n-1)**(1/3))``.
    """
    y = _values(s)
    n = len(y)
    if n < 20:
        raise StatsError(f"ADF test needs at least 20 points, got {n}")
    p = adf_lag_order(n) if lags is None else int(lags)
    dy = np.diff(y)
    target = dy[p:]
    m = len(target)
    cols = [np.ones(m), y[p:-1]]
    for k in range(1, p + 1):
        cols.append(dy[p - k:len(dy) - k])
    X = np.column_stack(cols)
    if m <= X.shape[1]:
        raise StatsError("too few observations for the ADF regression")
    beta, _, rank, _ = np.linalg.lstsq(X, target, rcond=None)
    if rank < X.shape[1]:
        raise StatsError("singular ADF regression matrix")
    resid = target - X @ beta
    sigma2 = resid @ resid / (m - X.shape[1])
    cov = sigma2 * np.linalg.inv(X.T @ X)
    se = np.sqrt(cov[1, 1])
    if not se > 0:
        # exact fit; the level coefficient is determined without error
        stat = -np.inf if beta[1] < 0 else np.inf
    else:
        stat = beta[1] / se
    return AdfResult(float(stat), p)


def acf(s, max_lag: int) -> np.ndarray:
    """Sample autocorrelation at lags ``0..max_lag`` (biased autocovariance)."""
    x = _values(s)
    n = len(x)
    if max_lag < 0 or max_lag >= n / 2:
        raise StatsError(f"max_lag must be below n/2 = {n / 2}, got {max_lag}")
    xc = x - x.mean()
    c0 = xc @ xc / n
    if not c0 > 0:
        raise StatsError("autocorrelation of a constant series is undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = (xc[k:] @ xc[:-k]) / n / c0
    return out


def pacf_from_acf(r: np.ndarray) -> np.ndarray:
    """Durbin-Levinson recursion; returns partial autocorrelations at lags 1..L."""
    L = len(r) - 1
    out = np.empty(L)
    phi = np.zeros(L + 1)
    v = 1.0
    for k in range(1, L + 1):
        a = (r[k] - phi[1:k] @ r[k - 1:0:-1]) / v
        new = phi.copy()
        new[k] = a
        new[1:k] = phi[1:k] - a * phi[k - 1:0:-1]
        phi = new
        v *= 1.0 - a * a
        out[k - 1] = a
    return out


def pacf(s, max_lag: int) -> np.ndarray:
    return pacf_from_acf(acf(s, max_lag))


def correlogram(s, max_lag: int = 10) -> CorrelogramResult:
    r = acf(s, max_lag)
    return CorrelogramResult(r, pacf_from_acf(r), 1.96 / np.sqrt(len(_values(s))))


def select_lag(s, max_lag: int = 10) -> int:
    """Largest lag whose PACF lies outside the +-1.96/sqrt(n) band, else 1."""
    if max_lag < 1:
        raise StatsError("max_lag must be at least 1")
    cg = correlogram(s, max_lag)
    significant = np.nonzero(np.abs(cg.pacf) > cg.band)[0]
    return int(significant[-1] + 1) if len(significant) else 1


@dataclass(frozen=True)
class StationarityResult:
    series: Subseries
    record: PreprocessRecord
    stationary: bool
    adf: AdfResult


def difference_until_stationary(s, max_d: int = MAX_DIFF_ORDER) -> StationarityResult:
    """Difference until the ADF test rejects a unit root or ``max_d`` is reached.

    A series still non-stationary at ``max_d`` is returned with
    ``stationary=False`` rather than raising.
    """
    if not 0 <= max_d <= MAX_DIFF_ORDER:
        raise SeriesError(f"max_d must be in [0, {MAX_DIFF_ORDER}]")
    d = 0
    while True:
        out, rec = difference(s, d)
        res = adf_test(out)
        if res.stationary or d >= max_d:
            return StationarityResult(out, rec, res.stationary, res)
        d += 1


def _ranks(a: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(a, kind="mergesort")
    sa = a[order]
    ranks = np.empty(len(a))
    i = 0
    while i < len(a):
        j = i
        while j + 1 < len(a) and sa[j + 1] == sa[i]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def critical_z(alpha: float) -> float:
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def wilcoxon_signed_rank(errors_a, errors_b, alpha: float = 0.01) -> WsrtResult:
    """Two-sided signed-rank comparison of two models' absolute errors.

    Differences are ``|e_a| - |e_b|``, so a negative ``z`` means model A has the
    smaller errors; ``sign`` is ``"+"`` when that is significant at ``alpha``,
    ``"-"`` for the reverse and ``"="`` otherwise. The statistic is the
    positive-rank sum ``W+`` under the normal approximation, without
    continuity or tie-variance correction, which makes ``z`` antisymmetric in
    the argument order.
    """
    a = np.abs(np.asarray(errors_a, dtype=float))
    b = np.abs(np.asarray(errors_b, dtype=float))
    if a.shape != b.shape or a.ndim != 1:
        raise StatsError("error sequences must be 1-d and of equal length")
    d = a - b
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return WsrtResult(0.0, False, "=", 0)
    if n < 6:
        raise StatsError(f"need at least 6 non-zero differences, got {n}")
    r = _ranks(np.abs(d))
    w_plus = r[d > 0].sum()
    mean = n * (n + 1) / 4.0
    sd = np.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    z = float((w_plus - mean) / sd)
    significant = abs(z) > critical_z(alpha)
    sign = "=" if not significant else ("+" if z < 0 else "-")
    return WsrtResult(z, bool(significant), sign, n)
