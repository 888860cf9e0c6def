"""Epsilon-insensitive support vector regression.

The dual is solved as a 2n-variable box-constrained QP (one block for the
``alpha`` multipliers, one for ``alpha*``) with pairwise working-set
optimisation and second-order working-set selection. The predictor is

    f(x) = sum_i (alpha_i - alpha*_i) K(x, x_i) + b
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

logger = logging.getLogger(__name__)

KERNELS = ("rbf", "polynomial", "linear")
TAU = 1e-12

# exponent grids used by svr_grid_search
C_GRID = tuple(2.0 ** k for k in range(-3, 16, 2))
EPSILON_GRID = tuple(2.0 ** k for k in range(-8, 0))
GAMMA_GRID = tuple(2.0 ** k for k in range(-4, 3))
# per-cell SMO iteration budget during grid search
GRID_MAX_PASSES = 20_000


class SvrConvergenceError(RuntimeError):
    pass


class GridSearchError(RuntimeError):
    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class SvrConfig:
    C: float = 1.0
    epsilon: float = 0.1
    kernel: str = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 1.0
    tolerance: float = 1e-3
    max_passes: int = 200_000

    def __post_init__(self):
        if not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be non-negative, got {self.epsilon}")
        if self.kernel not in KERNELS:
            raise ValueError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "rbf" and not self.gamma > 0:
            raise ValueError("rbf gamma must be positive")
        if self.kernel == "polynomial" and self.degree < 1:
            raise ValueError("polynomial degree must be at least 1")


@dataclass(frozen=True)
class SvrModel:
    support_vectors: np.ndarray
    dual_coeffs: np.ndarray
    bias: float
    config: SvrConfig
    # full multiplier vectors over the training rows, kept for diagnostics
    alpha: np.ndarray = field(default=None, repr=False)
    alpha_star: np.ndarray = field(default=None, repr=False)
    kkt_residual: float = 0.0
    iterations: int = 0

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(self.dual_coeffs) == 0:
            return np.full(len(X), self.bias)
        return kernel_matrix(X, self.support_vectors, self.config) @ self.dual_coeffs + self.bias


def kernel_matrix(A, B, cfg: SvrConfig) -> np.ndarray:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    if cfg.kernel == "linear":
        return A @ B.T
    if cfg.kernel == "polynomial":
        return (A @ B.T + cfg.coef0) ** cfg.degree
    sq = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.exp(-cfg.gamma * np.maximum(sq, 0.0))


@njit(cache=True)
def _smo(K, y, C, eps, tol, max_iter, alpha0):
    # variables 0..n-1 are alpha (sign +1), n..2n-1 are alpha* (sign -1);
    # G is the gradient of 0.5 a'Qa + p'a with Q_st = s_s s_t K
    n = K.shape[0]
    l = 2 * n
    alpha = alpha0.copy()
    G = np.empty(l)
    for t in range(n):
        G[t] = eps - y[t]
        G[t + n] = eps + y[t]
    for s in range(n):
        beta = alpha[s] - alpha[s + n]
        if beta != 0.0:
            for t in range(n):
                G[t] += K[s, t] * beta
                G[t + n] -= K[s, t] * beta

    it = 0
    gap = np.inf
    while True:
        gmax = -np.inf
        i = -1
        for t in range(n):
            if alpha[t] < C and -G[t] >= gmax:
                gmax = -G[t]
                i = t
        for t in range(n, l):
            if alpha[t] > 0 and G[t] >= gmax:
                gmax = G[t]
                i = t
        if i < 0:
            gap = 0.0
            break
        si = 1.0 if i < n else -1.0
        ii = i if i < n else i - n
        Ki = K[ii]
        kii = Ki[ii]
        gmax2 = -np.inf
        j = -1
        obj_min = np.inf
        for t in range(n):
            if alpha[t] > 0:
                if G[t] >= gmax2:
                    gmax2 = G[t]
                gd = gmax + G[t]
                if gd > 0:
                    quad = kii + K[t, t] - 2.0 * Ki[t]
                    if quad <= 0:
                        quad = TAU
                    od = -(gd * gd) / quad
                    if od <= obj_min:
                        j = t
                        obj_min = od
        for t in range(n, l):
            tt = t - n
            if alpha[t] < C:
                if -G[t] >= gmax2:
                    gmax2 = -G[t]
                gd = gmax - G[t]
                if gd > 0:
                    quad = kii + K[tt, tt] - 2.0 * Ki[tt]
                    if quad <= 0:
                        quad = TAU
                    od = -(gd * gd) / quad
                    if od <= obj_min:
                        j = t
                        obj_min = od
        gap = gmax + gmax2
        if j < 0 or gap < tol or it >= max_iter:
            break
        it += 1

        sj = 1.0 if j < n else -1.0
        jj = j if j < n else j - n
        Kj = K[jj]
        q_ij = si * sj * Ki[jj]
        ai_old = alpha[i]
        aj_old = alpha[j]
        if si != sj:
            quad = kii + Kj[jj] + 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (-G[i] - G[j]) / quad
            diff = alpha[i] - alpha[j]
            alpha[i] += delta
            alpha[j] += delta
            if diff > 0:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = diff
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = C - diff
            else:
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = -diff
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = C + diff
        else:
            quad = kii + Kj[jj] - 2.0 * q_ij
            if quad <= 0:
                quad = TAU
            delta = (G[i] - G[j]) / quad
            total = alpha[i] + alpha[j]
            alpha[i] -= delta
            alpha[j] += delta
            if total > C:
                if alpha[i] > C:
                    alpha[i] = C
                    alpha[j] = total - C
                if alpha[j] > C:
                    alpha[j] = C
                    alpha[i] = total - C
            else:
                if alpha[j] < 0:
                    alpha[j] = 0.0
                    alpha[i] = total
                if alpha[i] < 0:
                    alpha[i] = 0.0
                    alpha[j] = total
        ci = si * (alpha[i] - ai_old)
        cj = sj * (alpha[j] - aj_old)
        for t in range(n):
            c = ci * Ki[t] + cj * Kj[t]
            G[t] += c
            G[t + n] -= c

    # offset from free multipliers, midpoint of the feasible interval otherwise
    ub = np.inf
    lb = -np.inf
    nfree = 0
    sfree = 0.0
    for t in range(l):
        st = 1.0 if t < n else -1.0
        yg = st * G[t]
        if alpha[t] >= C:
            if st < 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        elif alpha[t] <= 0:
            if st > 0:
                ub = min(ub, yg)
            else:
                lb = max(lb, yg)
        else:
            nfree += 1
            sfree += yg
    if nfree > 0:
        rho = sfree / nfree
    else:
        rho = (ub + lb) / 2.0
    return alpha[:n].copy(), alpha[n:].copy(), -rho, max(gap, 0.0), it


def svr_train(cfg: SvrConfig, X, y, K: np.ndarray | None = None, warm_start: SvrModel | None = None) -> SvrModel:
    """Fit an epsilon-SVR.

    Args:
        cfg: hyper-parameters and solver tolerance.
        X: ``(n, p)`` training inputs.
        y: ``(n,)`` targets.
        K: optional precomputed training kernel matrix (grid search reuses it).
        warm_start: a model fitted on the same rows with the same kernel and
            a C no larger than ``cfg.C``; its multipliers seed the solver.

    Raises:
        SvrConvergenceError: if the iteration budget runs out while the
            maximal KKT violation is still above ``10 * cfg.tolerance``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    if len(X) != len(y):
        raise ValueError("inputs and targets differ in length")
    if len(y) < 2:
        raise ValueError("need at least two training points")
    if K is None:
        K = kernel_matrix(X, X, cfg)
    alpha0 = np.zeros(2 * len(y))
    if warm_start is not None:
        if warm_start.config.C > cfg.C or len(warm_start.alpha) != len(y):
            raise ValueError("warm start must come from the same rows with C <= cfg.C")
        alpha0 = np.concatenate([warm_start.alpha, warm_start.alpha_star])
    a, a_star, b, gap, it = _smo(
        np.ascontiguousarray(K, dtype=float), y, float(cfg.C), float(cfg.epsilon),
        float(cfg.tolerance), int(cfg.max_passes), alpha0,
    )
    if gap > 10 * cfg.tolerance:
        raise SvrConvergenceError(
            f"SMO stopped after {it} iterations with KKT violation {gap:.3g} (C={cfg.C}, eps={cfg.epsilon})"
        )
    if gap > cfg.tolerance:
        logger.warning("SMO iteration budget exhausted with KKT violation %.3g", gap)
    beta = a - a_star
    sv = beta != 0
    return SvrModel(
        support_vectors=X[sv].copy(),
        dual_coeffs=beta[sv],
        bias=float(b),
        config=cfg,
        alpha=a,
        alpha_star=a_star,
        kkt_residual=float(max(gap, 0.0)),
        iterations=int(it),
    )


def svr_predict(model: SvrModel, x) -> float:
    """Prediction for a single input vector."""
    x = np.asarray(x, dtype=float)
    if model.support_vectors.size and x.shape[-1] != model.support_vectors.shape[1]:
        raise ValueError("input dimension does not match the support vectors")
    return float(model.predict(x[None, :])[0])


def svr_primal_objective(model: SvrModel, X, y) -> float:
    """``0.5 |z|^2 + C * sum(max(0, |f(x_i) - y_i| - eps))`` at the model."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    beta = model.dual_coeffs
    reg = 0.5 * beta @ kernel_matrix(model.support_vectors, model.support_vectors, model.config) @ beta if len(beta) else 0.0
    slack = np.maximum(0.0, np.abs(model.predict(X) - np.asarray(y)) - model.config.epsilon)
    return float(reg + model.config.C * slack.sum())


@dataclass(frozen=True)
class GridSearchResult:
    config: SvrConfig
    validation_mse: float
    table: dict  # (C, epsilon, gamma) -> mse or error message


def svr_grid_search(
    X,
    y,
    validation_fraction: float = 0.2,
    base: SvrConfig = SvrConfig(max_passes=GRID_MAX_PASSES),
    C_grid=C_GRID,
    epsilon_grid=EPSILON_GRID,
    gamma_grid=GAMMA_GRID,
) -> GridSearchResult:
    """Exhaustive search over ``C x epsilon (x gamma for rbf)``.

    The chronological tail of the rows is held out for validation. The cell
    with the lowest validation MSE wins; ties go to smaller C, then smaller
    epsilon, then smaller gamma. Cells are fitted in ascending C with warm
    starts; once a cell exhausts ``base.max_passes`` the larger-C cells of
    that (epsilon, gamma) chain are recorded as skipped.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float)
    n_val = int(round(len(y) * validation_fraction))
    n_fit = len(y) - n_val
    if n_val < 1 or n_fit < 2:
        raise ValueError(f"cannot split {len(y)} rows for validation")
    Xf, yf, Xv, yv = X[:n_fit], y[:n_fit], X[n_fit:], y[n_fit:]
    gammas = tuple(gamma_grid) if base.kernel == "rbf" else (base.gamma,)

    table = {}
    best = None
    for gamma in sorted(gammas):
        kcfg = replace(base, gamma=gamma)
        K = kernel_matrix(Xf, Xf, kcfg)
        Kv = kernel_matrix(Xv, Xf, kcfg)
        for eps in sorted(epsilon_grid):
            # ascending C so each fit can start from the previous solution
            prev = None
            stalled = None
            for C in sorted(C_grid):
                if stalled is not None:
                    # larger C only makes the dual harder to solve
                    table[(C, eps, gamma)] = f"skipped: no convergence at C={stalled}"
                    continue
                cfg = replace(kcfg, C=C, epsilon=eps)
                try:
                    m = svr_train(cfg, Xf, yf, K=K, warm_start=prev)
                except SvrConvergenceError as exc:
                    table[(C, eps, gamma)] = str(exc)
                    stalled = C
                    continue
                prev = m
                beta = m.alpha - m.alpha_star
                mse = float(np.mean((Kv @ beta + m.bias - yv) ** 2))
                table[(C, eps, gamma)] = mse
                key = (mse, C, eps, gamma)
                if best is None or key < best[0]:
                    best = (key, cfg)
    if best is None:
        raise GridSearchError("every grid cell failed to fit", table)
    return GridSearchResult(best[1], best[0][0], table)
