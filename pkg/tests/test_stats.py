import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavecast.stats import (
    ADF_CRITICAL_VALUES,
    StatsError,
    _ranks,
    acf,
    adf_lag_order,
    adf_test,
    correlogram,
    critical_z,
    difference_until_stationary,
    pacf,
    select_lag,
    wilcoxon_signed_rank,
)


def test_adf_lag_order():
    assert adf_lag_order(409) == 7
    assert adf_lag_order(28) == 3
    assert adf_lag_order(20) == 2


def test_adf_separates_noise_from_random_walk():
    # Monte-Carlo: white noise rejects, a random walk mostly does not
    rng = np.random.default_rng(1)
    noise = [adf_test(rng.normal(size=300)).stationary for _ in range(50)]
    walk = [adf_test(np.cumsum(rng.normal(size=300))).stationary for _ in range(200)]
    assert np.mean(noise) == 1.0
    # nominal size is 5%; allow Monte-Carlo slack
    assert np.mean(walk) < 0.12


def test_adf_statistic_matches_least_squares_oracle(rng):
    x = np.cumsum(rng.normal(size=120)) * 0.3 + rng.normal(size=120)
    p = 2
    dx = np.diff(x)
    rows = []
    for t in range(p, len(dx)):
        rows.append([1.0, x[t]] + [dx[t - i] for i in range(1, p + 1)])
    A = np.array(rows)
    yv = dx[p:]
    beta, *_ = np.linalg.lstsq(A, yv, rcond=None)
    resid = yv - A @ beta
    s2 = resid @ resid / (len(yv) - A.shape[1])
    se = np.sqrt(s2 * np.linalg.inv(A.T @ A)[1, 1])
    assert adf_test(x, lags=p).statistic == pytest.approx(beta[1] / se, rel=1e-9)


def test_adf_critical_values():
    assert ADF_CRITICAL_VALUES == {"1%": -3.43, "5%": -2.86, "10%": -2.57}


def test_adf_too_short():
    with pytest.raises(StatsError):
        adf_test(np.arange(10.0))


def test_difference_until_stationary_orders(rng):
    e = rng.normal(size=400)
    assert difference_until_stationary(e).record.diff_order == 0
    assert difference_until_stationary(np.cumsum(e)).record.diff_order == 1
    assert difference_until_stationary(np.cumsum(np.cumsum(e))).record.diff_order == 2


def test_difference_until_stationary_cap():
    walk = np.cumsum(np.random.default_rng(3).normal(size=200))
    res = difference_until_stationary(walk, max_d=0)
    assert res.record.diff_order == 0
    assert not res.stationary


def test_acf_oracle(rng):
    x = rng.normal(size=50)
    m = x.mean()
    denom = ((x - m) ** 2).sum()
    oracle = [sum((x[t] - m) * (x[t + k] - m) for t in range(50 - k)) / denom for k in range(6)]
    np.testing.assert_allclose(acf(x, 5), oracle, atol=1e-12)


def test_pacf_oracle_by_regression(rng):
    # PACF at lag k equals the last coefficient of the Yule-Walker AR(k) solution
    x = rng.normal(size=300)
    x = np.convolve(x, [1, 0.6, 0.3])[:300]
    r = acf(x, 6)
    got = pacf(x, 6)
    for k in range(1, 7):
        R = np.array([[r[abs(i - j)] for j in range(k)] for i in range(k)])
        phi = np.linalg.solve(R, r[1:k + 1])
        assert got[k - 1] == pytest.approx(phi[-1], abs=1e-10)


def test_correlogram_band():
    cg = correlogram(np.sin(np.arange(100.0)), 10)
    assert cg.band == pytest.approx(1.96 / 10)
    assert len(cg.acf) == 11 and len(cg.pacf) == 10


def test_select_lag_ar4():
    rng = np.random.default_rng(4)
    e = rng.normal(size=3000)
    x = np.zeros(3000)
    for t in range(4, 3000):
        x[t] = 0.3 * x[t - 1] - 0.2 * x[t - 2] + 0.25 * x[t - 3] + 0.4 * x[t - 4] + e[t]
    assert select_lag(x, max_lag=4) == 4


def test_select_lag_white_noise_falls_back():
    rng = np.random.default_rng(12)
    for _ in range(20):
        y = rng.normal(size=200)
        cg = correlogram(y, 10)
        if not np.any(np.abs(cg.pacf) > cg.band):
            assert select_lag(y, 10) == 1
            break
    else:
        pytest.fail("no quiet series found")


def test_ranks_ties():
    np.testing.assert_array_equal(_ranks(np.array([3.0, 1.0, 3.0, 2.0])), [3.5, 1, 3.5, 2])


def test_critical_z():
    assert critical_z(0.05) == pytest.approx(1.959964, abs=1e-6)
    assert critical_z(0.01) == pytest.approx(2.575829, abs=1e-6)


def test_wsrt_all_a_better():
    res = wilcoxon_signed_rank(np.ones(30) * 0.1, np.ones(30) * np.arange(1, 31))
    assert res.sign == "+" and res.z < 0 and res.significant


def test_wsrt_equal_errors():
    res = wilcoxon_signed_rank(np.ones(12), -np.ones(12))
    assert res.sign == "=" and res.z == 0.0 and res.n == 0


def test_wsrt_too_few_differences():
    with pytest.raises(StatsError):
        wilcoxon_signed_rank([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])


def test_wsrt_z_formula():
    # d = |a|-|b| = [1,-2,3,4,-5,6]; ranks 1..6; W+ = 1+3+4+6 = 14
    a = np.array([2, 1, 4, 5, 1, 7.0])
    b = np.array([1, 3, 1, 1, 6, 1.0])
    mean, sd = 6 * 7 / 4, np.sqrt(6 * 7 * 13 / 24)
    assert wilcoxon_signed_rank(a, b).z == pytest.approx((14 - mean) / sd)


def _exact_p_table(n=10):
    """Exact two-sided p-value of each W+ by enumerating all 2**n sign patterns."""
    totals = np.array([sum(r for r, s in zip(range(1, n + 1), signs) if s) for signs in itertools.product([0, 1], repeat=n)])
    mean = n * (n + 1) / 4
    return {w: float(np.mean(np.abs(totals - mean) >= abs(w - mean) - 1e-12)) for w in range(0, n * (n + 1) // 2 + 1)}


_EXACT_P = _exact_p_table()


def test_wsrt_matches_exact_enumeration_n10():
    n, alpha = 10, 0.05
    magnitudes = np.arange(1, n + 1, dtype=float)
    for signs in itertools.product([1, -1], repeat=n):
        d = magnitudes * np.array(signs)
        a = np.where(d > 0, d, 0.0) + 20
        b = np.where(d < 0, -d, 0.0) + 20
        res = wilcoxon_signed_rank(a, b, alpha=alpha)
        w_plus = magnitudes[d > 0].sum()
        p = _EXACT_P[int(w_plus)]
        if res.significant != (p < alpha):
            assert 0.03 <= p <= 0.07, (signs, p, res.z)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(6, 60))
def test_wsrt_antisymmetry(seed, n):
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=(2, n))
    ab = wilcoxon_signed_rank(a, b)
    ba = wilcoxon_signed_rank(b, a)
    assert ab.z == -ba.z
    assert {ab.sign, ba.sign} in ({"="}, {"+", "-"})


def test_wsrt_shape_mismatch():
    with pytest.raises(StatsError):
        wilcoxon_signed_rank(np.ones(10), np.ones(9))
