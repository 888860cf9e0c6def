"""SVG line charts for series, wavelet components and forecast overlays."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# fixed ids and no timestamp so re-runs produce identical files
plt.rcParams["svg.hashsalt"] = "wavecast"
_META = {"Date": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_META)
    plt.close(fig)


def plot_series(path, x, values, title="Closing price"):
    fig, ax = plt.subplots(figsize=(10, 4))
    ax.plot(x, values, lw=1.0, color="k")
    ax.set_title(title)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_components(path, x, components: dict, original=None):
    """Smooth first, then details, then the original at the bottom."""
    labels = sorted(components, key=lambda k: (k[0] != "V", k))
    rows = labels + (["x"] if original is not None else [])
    fig, axes = plt.subplots(len(rows), 1, figsize=(10, 1.8 * len(rows)), sharex=True)
    for ax, label in zip(axes, rows):
        ax.plot(x, original if label == "x" else components[label], lw=0.8, color="k")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_forecasts(path, x, actual, forecasts: dict, title="1-step ahead forecasts"):
    fig, ax = plt.subplots(figsize=(10, 4.5))
    ax.plot(x, actual, lw=1.5, color="k", label="Actual")
    for name in forecasts:
        ax.plot(x, forecasts[name], lw=1.0, label=name)
    ax.set_title(title)
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)
