import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecast.learners import persist
from wavecast.learners.dataset import make_lagged_dataset
from wavecast.learners.mlp import (
    MlpConfig,
    MlpModel,
    RpropState,
    init_model,
    mlp_forward,
    mlp_loss_and_gradient,
    mlp_train_rprop,
)
from wavecast.learners.svr import (
    SvrConfig,
    kernel_matrix,
    svr_grid_search,
    svr_predict,
    svr_primal_objective,
    svr_train,
)


# ---------------------------------------------------------------- dataset

def test_lagged_dataset_example():
    ds = make_lagged_dataset([1, 2, 3, 4, 5], 2)
    assert ds.inputs.tolist() == [[2, 1], [3, 2], [4, 3]]
    assert ds.targets.tolist() == [3, 4, 5]


def test_lagged_dataset_bad_order():
    with pytest.raises(ValueError):
        make_lagged_dataset([1, 2, 3], 3)
    with pytest.raises(ValueError):
        make_lagged_dataset([1, 2, 3], 0)


# ---------------------------------------------------------------- MLP

def scalar_forward(model: MlpModel, x):
    """Loop-by-loop evaluation of the single-hidden-layer network."""
    out = model.output_bias
    for j in range(model.n_hidden):
        z = model.hidden_bias[j]
        for i in range(model.n_input):
            z += model.hidden_weights[j, i] * x[i]
        out += model.output_weights[j] / (1.0 + math.exp(-z))
    return out


def test_forward_matches_scalar_oracle(rng):
    for v in (1, 3, 7):
        model = init_model(MlpConfig(n_input=v, seed=v))
        for x in rng.normal(size=(10, v)):
            assert mlp_forward(model, x) == pytest.approx(scalar_forward(model, x), abs=1e-12)


def test_forward_shape_check():
    model = init_model(MlpConfig(n_input=3))
    with pytest.raises(ValueError):
        mlp_forward(model, np.zeros(4))


def test_vector_round_trip(rng):
    model = init_model(MlpConfig(n_input=4, n_hidden=6, seed=3))
    theta = model.to_vector()
    assert theta.size == 6 * 4 + 2 * 6 + 1
    back = MlpModel.from_vector(theta, 4, 6)
    np.testing.assert_array_equal(back.to_vector(), theta)


def test_init_is_seeded_and_bounded():
    a = init_model(MlpConfig(n_input=5, seed=11)).to_vector()
    b = init_model(MlpConfig(n_input=5, seed=11)).to_vector()
    np.testing.assert_array_equal(a, b)
    assert np.all(np.abs(a) <= 0.5)


def central_difference(model, X, y, h=1e-6):
    theta = model.to_vector()
    g = np.empty_like(theta)
    for k in range(theta.size):
        tp, tm = theta.copy(), theta.copy()
        tp[k] += h
        tm[k] -= h
        ep = mlp_loss_and_gradient(MlpModel.from_vector(tp, model.n_input, model.n_hidden), X, y)[0]
        em = mlp_loss_and_gradient(MlpModel.from_vector(tm, model.n_input, model.n_hidden), X, y)[0]
        g[k] = (ep - em) / (2 * h)
    return g


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000))
def test_gradient_matches_finite_differences(v, seed):
    r = np.random.default_rng(seed)
    model = init_model(MlpConfig(n_input=v, n_hidden=10, seed=seed))
    X, y = r.normal(size=(15, v)), r.normal(size=15)
    _, g = mlp_loss_and_gradient(model, X, y)
    fd = central_difference(model, X, y)
    assert np.linalg.norm(g - fd) <= 1e-4 * max(np.linalg.norm(fd), 1e-8)


def test_rprop_step_rules():
    st_ = RpropState.initial(3)
    p = st_.update(np.zeros(3), np.array([1.0, -1.0, 0.0]))
    np.testing.assert_allclose(p, [-0.1, 0.1, 0.0])
    # same sign grows, flipped sign shrinks and skips the move
    p = st_.update(p, np.array([2.0, 1.0, 0.0]))
    np.testing.assert_allclose(st_.steps, [0.12, 0.05, 0.1])
    np.testing.assert_allclose(p, [-0.22, 0.1, 0.0])
    assert st_.prev_grad[1] == 0.0


def test_rprop_step_bounds():
    st_ = RpropState.initial(1, step0=40.0)
    for _ in range(5):
        st_.update(np.zeros(1), np.ones(1))
    assert st_.steps[0] == 50.0
    st_ = RpropState.initial(1, step0=2e-6)
    for k in range(10):
        st_.update(np.zeros(1), np.array([(-1.0) ** k]))
    assert st_.steps[0] == 1e-6


def test_rprop_learns_sine():
    x = np.linspace(-np.pi, np.pi, 100)[:, None]
    y = np.sin(x[:, 0])
    wins = 0
    for seed in range(10):
        m = mlp_train_rprop(MlpConfig(n_input=1, seed=seed, max_epochs=2000), x, y)
        wins += np.mean((m.predict(x) - y) ** 2) < 1e-2
    assert wins >= 9


def test_rprop_learns_linear():
    r = np.random.default_rng(0)
    X = r.uniform(-1, 1, size=(80, 2))
    y = 0.7 * X[:, 0] - 0.3 * X[:, 1] + 0.1
    m = mlp_train_rprop(MlpConfig(n_input=2, seed=1, max_epochs=1500), X, y)
    assert np.mean((m.predict(X) - y) ** 2) < 1e-3
    assert m.history[-1] <= m.history[0]


def test_training_is_deterministic():
    X = np.linspace(0, 1, 30)[:, None]
    y = X[:, 0] ** 2
    a = mlp_train_rprop(MlpConfig(n_input=1, seed=5, max_epochs=200), X, y)
    b = mlp_train_rprop(MlpConfig(n_input=1, seed=5, max_epochs=200), X, y)
    np.testing.assert_array_equal(a.to_vector(), b.to_vector())


# ---------------------------------------------------------------- SVR

def test_kernels():
    A = np.array([[1.0, 2.0], [0.0, -1.0]])
    np.testing.assert_allclose(kernel_matrix(A, A, SvrConfig(kernel="linear")), A @ A.T)
    np.testing.assert_allclose(
        kernel_matrix(A, A, SvrConfig(kernel="polynomial", degree=2, coef0=1.0)), (A @ A.T + 1) ** 2
    )
    K = kernel_matrix(A, A, SvrConfig(kernel="rbf", gamma=0.5))
    assert K[0, 1] == pytest.approx(math.exp(-0.5 * 10))
    np.testing.assert_allclose(np.diag(K), 1.0)


def test_svr_constant_target():
    X = np.linspace(0, 1, 20)[:, None]
    m = svr_train(SvrConfig(C=10, epsilon=0.1, gamma=1.0), X, np.full(20, 3.0))
    np.testing.assert_allclose(m.predict(X), 3.0, atol=0.1 + 1e-3)


def test_svr_linear_fit_and_complementarity():
    X = np.linspace(-1, 1, 40)[:, None]
    y = 2 * X[:, 0]
    cfg = SvrConfig(C=100, epsilon=0.01, kernel="linear")
    m = svr_train(cfg, X, y)
    assert m.kkt_residual <= 1e-3
    assert np.max(np.abs(m.predict(X) - y)) <= 0.01 + 1e-2
    assert np.max(m.alpha * m.alpha_star) <= 1e-3 * cfg.C
    assert np.all((m.alpha >= 0) & (m.alpha <= cfg.C)) and np.all((m.alpha_star >= 0) & (m.alpha_star <= cfg.C))
    assert abs(np.sum(m.alpha - m.alpha_star)) < 1e-9


def test_svr_epsilon_insensitivity():
    # with a tube wide enough to cover all targets nothing is a support vector
    X = np.linspace(0, 1, 15)[:, None]
    y = 0.05 * np.sin(7 * X[:, 0])
    m = svr_train(SvrConfig(C=10, epsilon=0.2), X, y)
    assert len(m.dual_coeffs) == 0
    assert np.all(np.abs(m.predict(X) - y) <= 0.2)


def dual_oracle(K, y, C, eps):
    """Solve the epsilon-SVR dual with a general-purpose constrained optimiser."""
    from scipy.optimize import minimize

    n = len(y)

    def f(z):
        b = z[:n] - z[n:]
        return 0.5 * b @ K @ b + eps * z.sum() - y @ b

    def g(z):
        b = z[:n] - z[n:]
        kb = K @ b
        return np.concatenate([kb + eps - y, -kb + eps + y])

    res = minimize(
        f, np.zeros(2 * n), jac=g, method="SLSQP", bounds=[(0, C)] * (2 * n),
        constraints=[{"type": "eq", "fun": lambda z: z[:n].sum() - z[n:].sum(),
                      "jac": lambda z: np.concatenate([np.ones(n), -np.ones(n)])}],
        options={"ftol": 1e-12, "maxiter": 1000},
    )
    return res.fun


def test_svr_dual_matches_reference_optimiser():
    r = np.random.default_rng(2)
    X = r.uniform(-2, 2, size=(25, 1))
    y = np.sin(X[:, 0]) + 0.1 * r.normal(size=25)
    cfg = SvrConfig(C=4.0, epsilon=0.05, gamma=0.5, tolerance=1e-4)
    K = kernel_matrix(X, X, cfg)
    m = svr_train(cfg, X, y)
    beta = m.alpha - m.alpha_star
    ours = 0.5 * beta @ K @ beta + cfg.epsilon * (m.alpha + m.alpha_star).sum() - y @ beta
    ref = dual_oracle(K, y, cfg.C, cfg.epsilon)
    assert ours == pytest.approx(ref, rel=1e-3, abs=1e-6)


def test_svr_primal_stable_under_tighter_tolerance():
    r = np.random.default_rng(7)
    X = r.normal(size=(60, 3))
    y = X[:, 0] - 0.5 * X[:, 1] ** 2 + 0.1 * r.normal(size=60)
    coarse = svr_train(SvrConfig(C=8, epsilon=0.05, gamma=0.3, tolerance=1e-3), X, y)
    fine = svr_train(SvrConfig(C=8, epsilon=0.05, gamma=0.3, tolerance=1e-4), X, y)
    pc, pf = svr_primal_objective(coarse, X, y), svr_primal_objective(fine, X, y)
    assert abs(pc - pf) <= 0.01 * pf


def test_svr_predict_matches_brute_force(rng):
    X = rng.normal(size=(30, 2))
    y = X[:, 0] * X[:, 1]
    cfg = SvrConfig(C=2, epsilon=0.05, gamma=0.7)
    m = svr_train(cfg, X, y)
    for x in rng.normal(size=(5, 2)):
        brute = m.bias + sum(c * math.exp(-cfg.gamma * float(((s - x) ** 2).sum())) for c, s in zip(m.dual_coeffs, m.support_vectors))
        assert svr_predict(m, x) == pytest.approx(brute, abs=1e-12)


def test_svr_warm_start_agrees():
    r = np.random.default_rng(9)
    X = r.normal(size=(50, 2))
    y = np.tanh(X[:, 0]) + 0.05 * r.normal(size=50)
    lo = svr_train(SvrConfig(C=1, epsilon=0.05), X, y)
    cold = svr_train(SvrConfig(C=4, epsilon=0.05, tolerance=1e-5), X, y)
    warm = svr_train(SvrConfig(C=4, epsilon=0.05, tolerance=1e-5), X, y, warm_start=lo)
    np.testing.assert_allclose(warm.predict(X), cold.predict(X), atol=1e-3)


def test_grid_search_picks_validation_argmin():
    r = np.random.default_rng(4)
    X = r.uniform(-1, 1, size=(60, 1))
    y = np.sin(3 * X[:, 0]) + 0.05 * r.normal(size=60)
    Cs, epss, gs = (0.5, 2.0, 8.0), (0.01, 0.05, 0.2), (1.0,)
    res = svr_grid_search(X, y, C_grid=Cs, epsilon_grid=epss, gamma_grid=gs)
    # independent evaluation of every cell, cold-started
    Xf, yf, Xv, yv = X[:48], y[:48], X[48:], y[48:]
    scores = {}
    for C in Cs:
        for e in epss:
            m = svr_train(SvrConfig(C=C, epsilon=e, gamma=1.0, tolerance=1e-6), Xf, yf)
            scores[(C, e)] = np.mean((m.predict(Xv) - yv) ** 2)
    best = min(scores, key=lambda k: (scores[k], k))
    assert (res.config.C, res.config.epsilon) == best
    # the grid solves to 1e-3 KKT tolerance, the oracle to 1e-6
    assert res.validation_mse == pytest.approx(scores[best], rel=5e-2)


def test_persistence_round_trip(tmp_path, rng):
    X = rng.normal(size=(20, 2))
    y = X.sum(1)
    for m in (
        svr_train(SvrConfig(C=2, epsilon=0.1), X, y),
        mlp_train_rprop(MlpConfig(n_input=2, max_epochs=50), X, y),
    ):
        path = tmp_path / "model.txt"
        persist.save(m, path)
        back = persist.load(path)
        np.testing.assert_array_equal(back.predict(X), m.predict(X))
        assert persist.dumps(back) == persist.dumps(m)
