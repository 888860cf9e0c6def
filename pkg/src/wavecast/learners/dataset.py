from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..series import Subseries


@dataclass(frozen=True)
class RegressionDataset:
    inputs: np.ndarray   # (n, p); column k holds the value k+1 steps back
    targets: np.ndarray  # (n,)

    def __post_init__(self):
        if self.inputs.ndim != 2 or len(self.inputs) != len(self.targets):
            raise ValueError("inputs must be 2-d with one row per target")

    def __len__(self) -> int:
        return len(self.targets)

    def rows(self, start: int, stop: int | None = None) -> "RegressionDataset":
        return RegressionDataset(self.inputs[start:stop], self.targets[start:stop])


def lag_matrix(x: np.ndarray, p: int) -> np.ndarray:
    """Rows ``(x[t-1], ..., x[t-p])`` for ``t = p .. len(x)-1``."""
    return np.column_stack([x[p - k: len(x) - k] for k in range(1, p + 1)])


def make_lagged_dataset(s, p: int) -> RegressionDataset:
    """Autoregressive design: row ``t`` maps ``s[t-1..t-p]`` to ``s[t]``.

    >>> make_lagged_dataset([1, 2, 3, 4, 5], 2).inputs.tolist()
    [[2.0, 1.0], [3.0, 2.0], [4.0, 3.0]]
    """
    x = s.values if isinstance(s, Subseries) else np.asarray(s, dtype=float)
    if p < 1:
        raise ValueError("lag order must be at least 1")
    if p >= len(x):
        raise ValueError(f"lag order {p} needs more than {len(x)} points")
    return RegressionDataset(lag_matrix(x, p).astype(float), x[p:].astype(float))
