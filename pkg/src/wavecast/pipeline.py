"""Decompose, forecast each subseries one step ahead, aggregate and score.

Two leakage modes are supported:

``paper``
    The whole series is decomposed once, and differencing order, lag and
    normalisation are chosen on each full component before the train/test
    split. Component values near time ``t`` depend on prices after ``t``,
    so test forecasts see the future.
``causal``
    Everything is fitted on the training window only, and at each test
    origin the history up to that origin is decomposed afresh. A forecast
    for time ``t`` depends only on prices before ``t``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .learners import (
    MlpConfig,
    SvrConfig,
    make_lagged_dataset,
    mlp_train_rprop,
    svr_grid_search,
    svr_train,
)
from .learners.svr import C_GRID, EPSILON_GRID, GAMMA_GRID, GRID_MAX_PASSES
from .modwt import DecomposeConfig, modwt_decompose
from .series import (
    PriceSeries,
    SeriesError,
    SplitSpec,
    apply_normalization,
    difference,
    fit_normalization,
    invert_normalization,
    split_index,
    undifference_step,
)
from .stats import WsrtResult, difference_until_stationary, select_lag, wilcoxon_signed_rank

logger = logging.getLogger(__name__)

MODEL_NAMES = {
    ("ann", False): "ANN",
    ("svr", False): "SVR",
    ("ann", True): "MODWT-ANN",
    ("svr", True): "MODWT-SVR",
}
MIN_LENGTH = 60


class PipelineError(RuntimeError):
    """A stage failure, tagged with the subseries and stage that raised it."""

    def __init__(self, label: str, stage: str, cause: Exception):
        super().__init__(f"subseries {label}, stage {stage}: {cause}")
        self.label = label
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class PipelineConfig:
    model_kind: str = "svr"
    decompose: bool = True
    wavelet: DecomposeConfig = field(default_factory=DecomposeConfig)
    split: SplitSpec = field(default_factory=SplitSpec)
    norm_kind: str = "zscore"
    max_diff: int = 3
    max_lag: int = 10
    lag_overrides: dict | None = None
    seed: int = 0
    leakage_mode: str = "paper"
    # absolute training length; overrides split when set
    train_size: int | None = None
    n_hidden: int = 10
    max_epochs: int = 2000
    target_mse: float = 1e-5
    svr_kernel: str = "rbf"
    svr_C_grid: tuple = C_GRID
    svr_epsilon_grid: tuple = EPSILON_GRID
    svr_gamma_grid: tuple = GAMMA_GRID

    def __post_init__(self):
        if self.model_kind not in ("ann", "svr"):
            raise ValueError(f"model_kind must be 'ann' or 'svr', got {self.model_kind!r}")
        if self.leakage_mode not in ("paper", "causal"):
            raise ValueError(f"leakage_mode must be 'paper' or 'causal', got {self.leakage_mode!r}")

    @property
    def model_name(self) -> str:
        return MODEL_NAMES[(self.model_kind, self.decompose)]


@dataclass(frozen=True)
class SubseriesSummary:
    label: str
    diff_order: int
    stationary: bool
    lag: int
    norm_kind: str
    norm_params: tuple
    model: dict


@dataclass(frozen=True)
class ForecastReport:
    model_name: str
    leakage_mode: str
    test_labels: tuple
    predictions: np.ndarray
    actuals: np.ndarray
    rmse: float
    da_percent: float
    per_subseries: tuple

    def to_dict(self) -> dict:
        return {
            "model_name": self.model_name,
            "leakage_mode": self.leakage_mode,
            "test_labels": list(self.test_labels),
            "predictions": [float(v) for v in self.predictions],
            "actuals": [float(v) for v in self.actuals],
            "rmse": float(self.rmse),
            "da_percent": float(self.da_percent),
            "per_subseries": [asdict(s) for s in self.per_subseries],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "ForecastReport":
        subs = tuple(
            SubseriesSummary(**{**s, "norm_params": tuple(s["norm_params"])}) for s in d["per_subseries"]
        )
        return cls(
            d["model_name"],
            d["leakage_mode"],
            tuple(d["test_labels"]),
            np.asarray(d["predictions"], dtype=float),
            np.asarray(d["actuals"], dtype=float),
            float(d["rmse"]),
            float(d["da_percent"]),
            subs,
        )

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path) -> "ForecastReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


def rmse(actual, predicted) -> float:
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or a.size == 0:
        raise ValueError("rmse needs two non-empty sequences of equal length")
    return float(np.sqrt(np.mean((a - p) ** 2)))


def directional_accuracy(actual, predicted) -> float:
    """Percent of steps ``t >= 1`` where ``predicted[t]`` moves from ``actual[t-1]``
    in the same direction as ``actual[t]`` does."""
    a = np.asarray(actual, dtype=float)
    p = np.asarray(predicted, dtype=float)
    if a.shape != p.shape or len(a) < 2:
        raise ValueError("directional accuracy needs equal lengths of at least 2")
    hits = np.sign(a[1:] - a[:-1]) == np.sign(p[1:] - a[:-1])
    return float(100.0 * hits.mean())


def aggregate(subforecasts: dict, level: int = 3) -> np.ndarray:
    """Sum per-component forecasts; labels must be exactly W1..WJ and VJ."""
    expected = {f"W{j}" for j in range(1, level + 1)} | {f"V{level}"}
    if set(subforecasts) != expected:
        raise ValueError(f"expected components {sorted(expected)}, got {sorted(subforecasts)}")
    arrays = [np.asarray(subforecasts[k], dtype=float) for k in sorted(subforecasts)]
    if len({a.shape for a in arrays}) != 1:
        raise ValueError("component forecasts differ in length")
    return np.sum(arrays, axis=0)


def compare_models(report_a: ForecastReport, report_b: ForecastReport, alpha: float = 0.01) -> WsrtResult:
    """Signed-rank test of ``report_a`` against ``report_b``; ``"+"`` means A is better."""
    if len(report_a.actuals) != len(report_b.actuals) or not np.array_equal(report_a.actuals, report_b.actuals):
        raise ValueError(f"{report_a.model_name} and {report_b.model_name} cover different test spans")
    ea = report_a.actuals - report_a.predictions
    eb = report_b.actuals - report_b.predictions
    return wilcoxon_signed_rank(ea, eb, alpha=alpha)


class _Stage:
    def __init__(self, label: str, stage: str):
        self.label, self.stage = label, stage

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, Exception):
            raise PipelineError(self.label, self.stage, exc) from exc
        return False


@dataclass
class _Fitted:
    """Per-subseries fitted state: transforms plus a trained regressor."""

    label: str
    diff_order: int
    stationary: bool
    lag: int
    norm_params: tuple
    predictor: object
    summary: dict


def _components(x: np.ndarray, cfg: PipelineConfig) -> dict:
    if not cfg.decompose:
        return {"RAW": x}
    return modwt_decompose(x, cfg.wavelet).components


def _train_regressor(X, y, cfg: PipelineConfig, seed: int):
    if cfg.model_kind == "ann":
        mcfg = MlpConfig(
            n_input=X.shape[1],
            n_hidden=cfg.n_hidden,
            max_epochs=cfg.max_epochs,
            target_mse=cfg.target_mse,
            seed=seed,
        )
        model = mlp_train_rprop(mcfg, X, y)
        summary = {
            "kind": "ann",
            "n_input": mcfg.n_input,
            "n_hidden": mcfg.n_hidden,
            "epochs": len(model.history),
            "train_mse": float(model.history[-1]),
        }
        return model, summary
    gs = svr_grid_search(
        X,
        y,
        base=SvrConfig(kernel=cfg.svr_kernel, max_passes=GRID_MAX_PASSES),
        C_grid=cfg.svr_C_grid,
        epsilon_grid=cfg.svr_epsilon_grid,
        gamma_grid=cfg.svr_gamma_grid,
    )
    best = SvrConfig(
        C=gs.config.C, epsilon=gs.config.epsilon, kernel=gs.config.kernel, gamma=gs.config.gamma
    )
    model = svr_train(best, X, y)
    summary = {
        "kind": "svr",
        "C": best.C,
        "epsilon": best.epsilon,
        "gamma": best.gamma,
        "kernel": best.kernel,
        "n_support": int(len(model.dual_coeffs)),
        "validation_mse": gs.validation_mse,
    }
    return model, summary


def _fit_subseries(label, comp, fit_end, n_train, cfg, seed) -> _Fitted:
    """Choose transforms on ``comp[:fit_end]`` and train on targets before ``n_train``."""
    with _Stage(label, "normalize"):
        # a flat component stays flat under differencing, so reject it up front
        fit_normalization(comp[:fit_end], cfg.norm_kind)
    with _Stage(label, "stationarity"):
        st = difference_until_stationary(comp[:fit_end], cfg.max_diff)
    d = st.record.diff_order
    with _Stage(label, "lag"):
        overrides = cfg.lag_overrides or {}
        p = int(overrides[label]) if label in overrides else select_lag(st.series, cfg.max_lag)
    with _Stage(label, "normalize"):
        z = difference(comp, d)[0].values
        # z[k] is the d-th difference at time k + d
        params = fit_normalization(z[: fit_end - d], cfg.norm_kind)
    with _Stage(label, "train"):
        zn = apply_normalization(z[: n_train - d], cfg.norm_kind, params)
        ds = make_lagged_dataset(zn, p)
        predictor, summary = _train_regressor(ds.inputs, ds.targets, cfg, seed)
    return _Fitted(label, d, bool(st.stationary), p, params, predictor, summary)


def _predict_rows(f: _Fitted, comp: np.ndarray, times: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    """One-step forecasts of ``comp[t]`` for each ``t`` in ``times`` from ``comp[:t]``."""
    with _Stage(f.label, "predict"):
        z = difference(comp, f.diff_order)[0].values
        zn = apply_normalization(z, cfg.norm_kind, f.norm_params)
        rows = np.stack([zn[t - f.diff_order - f.lag: t - f.diff_order][::-1] for t in times])
        yhat = invert_normalization(f.predictor.predict(rows), cfg.norm_kind, f.norm_params)
        return np.array([undifference_step(v, comp[:t], f.diff_order) for v, t in zip(yhat, times)])


def run_pipeline(series, cfg: PipelineConfig = PipelineConfig()) -> ForecastReport:
    """Train on the first part of ``series`` and forecast every later point one step ahead.

    Args:
        series: a :class:`PriceSeries` or a plain sequence of values.
        cfg: pipeline configuration.

    Raises:
        PipelineError: naming the subseries and stage that failed.
    """
    if isinstance(series, PriceSeries):
        x = np.asarray(series.close, dtype=float)
        stamps = series.timestamps
    else:
        x = np.asarray(series, dtype=float)
        stamps = tuple(range(len(x)))
    n = len(x)
    if n < MIN_LENGTH:
        raise SeriesError(f"pipeline needs at least {MIN_LENGTH} points, got {n}")
    n_train = cfg.train_size if cfg.train_size is not None else split_index(n, cfg.split)
    if not 0 < n_train < n:
        raise SeriesError(f"training size {n_train} leaves no test span in {n} points")
    times = np.arange(n_train, n)

    with _Stage("ALL", "decompose"):
        comps = _components(x if cfg.leakage_mode == "paper" else x[:n_train], cfg)
    labels = list(comps)
    fit_end = n if cfg.leakage_mode == "paper" else n_train

    fitted = []
    for idx, label in enumerate(labels):
        fitted.append(_fit_subseries(label, comps[label], fit_end, n_train, cfg, cfg.seed * 1009 + idx))
        logger.debug("fitted %s %s: %s", cfg.model_name, label, fitted[-1].summary)

    if cfg.leakage_mode == "paper":
        parts = {f.label: _predict_rows(f, comps[f.label], times, cfg) for f in fitted}
    else:
        parts = {f.label: np.empty(len(times)) for f in fitted}
        for k, t in enumerate(times):
            with _Stage("ALL", "decompose"):
                hist = _components(x[:t], cfg)
            for f in fitted:
                # placeholder slot at t; only values before t are read
                ext = np.append(hist[f.label], 0.0)
                parts[f.label][k] = _predict_rows(f, ext, np.array([t]), cfg)[0]

    if cfg.decompose:
        with _Stage("ALL", "aggregate"):
            predictions = aggregate(parts, cfg.wavelet.level)
    else:
        predictions = parts["RAW"]
    actuals = x[n_train:]
    return ForecastReport(
        model_name=cfg.model_name,
        leakage_mode=cfg.leakage_mode,
        test_labels=tuple(str(stamps[t]) for t in times),
        predictions=predictions,
        actuals=actuals.copy(),
        rmse=rmse(actuals, predictions),
        da_percent=directional_accuracy(actuals, predictions),
        per_subseries=tuple(
            SubseriesSummary(f.label, f.diff_order, f.stationary, f.lag, cfg.norm_kind, tuple(f.norm_params), f.summary)
            for f in fitted
        ),
    )
