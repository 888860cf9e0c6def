"""Maximal overlap discrete wavelet transform with circular boundaries.

The transform is computed with the pyramid algorithm: at level ``j`` the
MODWT taps are applied with a stride of ``2**(j-1)`` (equivalent to inserting
``2**(j-1) - 1`` zeros between taps), so any series length is accepted.

Besides the coefficients, :func:`modwt_decompose` returns the multiresolution
analysis (MRA): one detail series per level plus the final smooth, each of
the input length, which add up to the input exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class WaveletError(ValueError):
    pass


@dataclass(frozen=True)
class FilterSpec:
    """MODWT filter pair (DWT taps divided by sqrt(2)).

    ``scaling_taps`` is the father-wavelet (low-pass) side and
    ``wavelet_taps`` the mother-wavelet (high-pass) side.
    """

    name: str
    scaling_taps: tuple
    wavelet_taps: tuple

    @classmethod
    def haar(cls) -> "FilterSpec":
        return cls("haar", (0.5, 0.5), (0.5, -0.5))

    @classmethod
    def from_name(cls, name: str) -> "FilterSpec":
        if name.lower() == "haar":
            return cls.haar()
        raise WaveletError(f"unsupported wavelet filter {name!r}; only 'haar' is available")

    def upsampled(self, level: int) -> tuple[np.ndarray, np.ndarray]:
        """Level-``level`` taps with ``2**(level-1) - 1`` zeros between base taps."""
        stride = 2 ** (level - 1)
        out = []
        for taps in (self.scaling_taps, self.wavelet_taps):
            up = np.zeros(stride * (len(taps) - 1) + 1)
            up[::stride] = taps
            out.append(up)
        return out[0], out[1]


@dataclass(frozen=True)
class DecomposeConfig:
    level: int = 3
    filter: FilterSpec = field(default_factory=FilterSpec.haar)
    boundary: str = "circular"

    def __post_init__(self):
        if not 1 <= self.level <= 6:
            raise WaveletError(f"decomposition level must be in [1, 6], got {self.level}")
        if self.boundary != "circular":
            raise WaveletError("only circular boundary handling is supported")


@dataclass(frozen=True)
class WaveletDecomposition:
    """Coefficients and MRA components of one series.

    ``wavelet_coeffs[j-1]`` and ``details[j-1]`` belong to level ``j``;
    ``scaling_coeffs`` and ``smooth`` belong to the last level.
    """

    level: int
    wavelet_coeffs: tuple
    scaling_coeffs: np.ndarray
    details: tuple
    smooth: np.ndarray
    source_length: int

    @property
    def labels(self) -> tuple:
        return tuple(f"W{j}" for j in range(1, self.level + 1)) + (f"V{self.level}",)

    @property
    def components(self) -> dict:
        """MRA components keyed W1..WJ, VJ (the names used for the subseries)."""
        return dict(zip(self.labels, list(self.details) + [self.smooth]))


def _circular_filter(x: np.ndarray, taps, stride: int) -> np.ndarray:
    # y_t = sum_l taps[l] * x[(t - stride*l) mod n]
    out = np.zeros_like(x)
    for l, tap in enumerate(taps):
        if tap:
            out += tap * np.roll(x, stride * l)
    return out


def _circular_filter_adjoint(x: np.ndarray, taps, stride: int) -> np.ndarray:
    # y_t = sum_l taps[l] * x[(t + stride*l) mod n]
    out = np.zeros_like(x)
    for l, tap in enumerate(taps):
        if tap:
            out += tap * np.roll(x, -stride * l)
    return out


def modwt_transform(x, cfg: DecomposeConfig = DecomposeConfig()) -> tuple[list, np.ndarray]:
    """Forward pyramid; returns ``([W_1..W_J], V_J)``."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise WaveletError("input must be one-dimensional")
    if not np.all(np.isfinite(x)):
        raise WaveletError("input contains non-finite values")
    if len(x) < 2 ** cfg.level:
        raise WaveletError(f"series of length {len(x)} is too short for level {cfg.level}")
    g, h = cfg.filter.scaling_taps, cfg.filter.wavelet_taps
    v = x
    ws = []
    for j in range(1, cfg.level + 1):
        stride = 2 ** (j - 1)
        ws.append(_circular_filter(v, h, stride))
        v = _circular_filter(v, g, stride)
    return ws, v


def modwt_inverse(wavelet_coeffs, scaling_coeffs, cfg: DecomposeConfig = DecomposeConfig()) -> np.ndarray:
    """Inverse pyramid from level J down to the series."""
    if len(wavelet_coeffs) != cfg.level:
        raise WaveletError(f"expected {cfg.level} wavelet levels, got {len(wavelet_coeffs)}")
    g, h = cfg.filter.scaling_taps, cfg.filter.wavelet_taps
    v = np.asarray(scaling_coeffs, dtype=float)
    for j in range(cfg.level, 0, -1):
        w = np.asarray(wavelet_coeffs[j - 1], dtype=float)
        if w.shape != v.shape:
            raise WaveletError("coefficient arrays differ in length")
        stride = 2 ** (j - 1)
        v = _circular_filter_adjoint(w, h, stride) + _circular_filter_adjoint(v, g, stride)
    return v


def modwt_mra(wavelet_coeffs, scaling_coeffs, cfg: DecomposeConfig = DecomposeConfig()) -> tuple[list, np.ndarray]:
    """Invert each level in isolation; returns ``([D_1..D_J], S_J)``."""
    if len(wavelet_coeffs) != cfg.level:
        raise WaveletError(f"expected {cfg.level} wavelet levels, got {len(wavelet_coeffs)}")
    n = len(scaling_coeffs)
    if any(len(w) != n for w in wavelet_coeffs):
        raise WaveletError("coefficient arrays differ in length")
    zero = np.zeros(n)
    details = []
    for j in range(1, cfg.level + 1):
        ws = [zero] * cfg.level
        ws[j - 1] = wavelet_coeffs[j - 1]
        details.append(modwt_inverse(ws, zero, cfg))
    smooth = modwt_inverse([zero] * cfg.level, scaling_coeffs, cfg)
    return details, smooth


def modwt_decompose(x, cfg: DecomposeConfig = DecomposeConfig()) -> WaveletDecomposition:
    """Coefficients plus additive MRA components of ``x``.

    Example:
        >>> dec = modwt_decompose([1.0, 2.0, 3.0, 4.0], DecomposeConfig(level=1))
        >>> dec.wavelet_coeffs[0]
        array([-1.5,  0.5,  0.5,  0.5])
    """
    ws, v = modwt_transform(x, cfg)
    details, smooth = modwt_mra(ws, v, cfg)
    return WaveletDecomposition(
        level=cfg.level,
        wavelet_coeffs=tuple(ws),
        scaling_coeffs=v,
        details=tuple(details),
        smooth=smooth,
        source_length=len(v),
    )


def reconstruct(dec: WaveletDecomposition) -> np.ndarray:
    """Sum of all MRA components."""
    out = np.array(dec.smooth, dtype=float)
    for d in dec.details:
        out = out + d
    return out
