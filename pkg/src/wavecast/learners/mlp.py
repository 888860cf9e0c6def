"""Single-hidden-layer regression network trained with resilient propagation.

The network is

    y = w0 + sum_j w_j * sigmoid(w0_j + sum_i w_ij * x_i)

with a sigmoid hidden layer and a linear output unit. Training minimises
``E = 0.5 * sum (y_d - y_p)**2`` with batch RPROP- (Riedmiller & Braun, 1993).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DivergenceError(FloatingPointError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    n_input: int
    n_hidden: int = 10
    max_epochs: int = 2000
    target_mse: float = 1e-5
    seed: int = 0
    init_scale: float = 0.5

    def __post_init__(self):
        if self.n_input < 1 or self.n_hidden < 1:
            raise ValueError("n_input and n_hidden must be at least 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")


@dataclass
class RpropState:
    """Per-weight step sizes and the previous gradient."""

    steps: np.ndarray
    prev_grad: np.ndarray
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    step_max: float = 50.0
    step_min: float = 1e-6

    @classmethod
    def initial(cls, size: int, step0: float = 0.1) -> "RpropState":
        return cls(np.full(size, step0), np.zeros(size))

    def update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """One RPROP- step; returns the new parameter vector."""
        agree = grad * self.prev_grad
        self.steps = np.where(agree > 0, np.minimum(self.steps * self.eta_plus, self.step_max), self.steps)
        self.steps = np.where(agree < 0, np.maximum(self.steps * self.eta_minus, self.step_min), self.steps)
        grad = np.where(agree < 0, 0.0, grad)
        self.prev_grad = grad
        return params - np.sign(grad) * self.steps


@dataclass(frozen=True)
class MlpModel:
    hidden_weights: np.ndarray  # (u, v)
    hidden_bias: np.ndarray     # (u,)
    output_weights: np.ndarray  # (u,)
    output_bias: float
    history: tuple = field(default=(), repr=False, compare=False)

    @property
    def n_input(self) -> int:
        return self.hidden_weights.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.hidden_weights.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_input:
            raise ValueError(f"expected {self.n_input} inputs, got {X.shape[1]}")
        h = _sigmoid(X @ self.hidden_weights.T + self.hidden_bias)
        return h @ self.output_weights + self.output_bias

    def to_vector(self) -> np.ndarray:
        return np.concatenate(
            [self.hidden_weights.ravel(), self.hidden_bias, self.output_weights, [self.output_bias]]
        )

    @classmethod
    def from_vector(cls, theta, n_input: int, n_hidden: int, history=()) -> "MlpModel":
        theta = np.asarray(theta, dtype=float)
        u, v = n_hidden, n_input
        if theta.size != u * v + 2 * u + 1:
            raise ValueError("parameter vector has the wrong size")
        return cls(
            theta[: u * v].reshape(u, v).copy(),
            theta[u * v: u * v + u].copy(),
            theta[u * v + u: u * v + 2 * u].copy(),
            float(theta[-1]),
            history,
        )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500.0, 500.0)))


def mlp_forward(model: MlpModel, x) -> float:
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n_input,):
        raise ValueError(f"expected input of shape ({model.n_input},), got {x.shape}")
    return float(model.predict(x[None, :])[0])


def mlp_loss_and_gradient(model: MlpModel, X, y) -> tuple[float, np.ndarray]:
    """Half sum of squared errors and its gradient in :meth:`MlpModel.to_vector` order."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(X) == 0:
        raise ValueError("empty dataset")
    h = _sigmoid(X @ model.hidden_weights.T + model.hidden_bias)
    r = h @ model.output_weights + model.output_bias - y
    E = 0.5 * float(r @ r)
    delta = np.outer(r, model.output_weights) * h * (1.0 - h)
    grad = np.concatenate([(delta.T @ X).ravel(), delta.sum(0), h.T @ r, [r.sum()]])
    return E, grad


def init_model(cfg: MlpConfig) -> MlpModel:
    rng = np.random.default_rng(cfg.seed)
    size = cfg.n_hidden * cfg.n_input + 2 * cfg.n_hidden + 1
    theta = rng.uniform(-cfg.init_scale, cfg.init_scale, size)
    return MlpModel.from_vector(theta, cfg.n_input, cfg.n_hidden)


def mlp_train_rprop(cfg: MlpConfig, X, y) -> MlpModel:
    """Batch RPROP- training from a seeded uniform initialisation.

    Stops after ``cfg.max_epochs`` epochs or once the training MSE drops to
    ``cfg.target_mse``. The returned model carries the per-epoch MSE in
    ``history``.

    Raises:
        DivergenceError: if the loss becomes non-finite.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if X.shape[1] != cfg.n_input:
        raise ValueError(f"config expects {cfg.n_input} inputs, data has {X.shape[1]}")
    model = init_model(cfg)
    theta = model.to_vector()
    state = RpropState.initial(theta.size)
    u, v = cfg.n_hidden, cfg.n_input
    history = []
    for epoch in range(cfg.max_epochs):
        E, grad = mlp_loss_and_gradient(model, X, y)
        mse = 2.0 * E / len(y)
        if not np.isfinite(E):
            raise DivergenceError(f"training loss became non-finite at epoch {epoch}")
        history.append(mse)
        if mse <= cfg.target_mse:
            break
        theta = state.update(theta, grad)
        model = MlpModel.from_vector(theta, v, u)
    return MlpModel.from_vector(theta, v, u, history=tuple(history))
