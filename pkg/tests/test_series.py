import datetime as dt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wavecast.series import (
    DegenerateScaleError,
    PreprocessRecord,
    PriceSeries,
    SeriesError,
    SplitSpec,
    Subseries,
    denormalize,
    difference,
    normalize,
    split,
    undifference,
    undifference_step,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def test_difference_examples():
    np.testing.assert_array_equal(difference([1, 3, 6, 10], 1)[0].values, [2, 3, 4])
    np.testing.assert_array_equal(difference([1, 3, 6, 10], 2)[0].values, [1, 1])
    s = Subseries([4.0, 1.0, 7.0], "W2")
    out, rec = difference(s, 0)
    np.testing.assert_array_equal(out.values, s.values)
    assert out.label == "W2" and rec.diff_order == 0


def test_difference_too_short():
    with pytest.raises(SeriesError):
        difference([1.0, 2.0], 2)
    with pytest.raises(SeriesError):
        difference([1.0, 2.0, 3.0, 4.0, 5.0], 4)  # above the cap of 3


def test_undifference_examples():
    rec = PreprocessRecord(diff_order=1, diff_initials=(1.0,))
    np.testing.assert_array_equal(undifference([2, 3, 4], rec).values, [1, 3, 6, 10])
    np.testing.assert_array_equal(undifference([5.0, 6.0], PreprocessRecord()).values, [5, 6])


def test_undifference_missing_initials():
    with pytest.raises(SeriesError):
        PreprocessRecord(diff_order=2, diff_initials=(1.0,))


def test_difference_round_trip_random(rng):
    for _ in range(100):
        x = rng.normal(size=rng.integers(5, 60)) * 100
        out, rec = difference(x, 2)
        np.testing.assert_allclose(undifference(out, rec).values, x, rtol=0, atol=1e-12 * max(1, np.abs(x).max()))


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(5, 40), elements=finite), st.integers(0, 3))
def test_difference_round_trip_property(x, d):
    out, rec = difference(x, d)
    assert len(out) == len(x) - d
    scale = max(1.0, np.abs(x).max())
    np.testing.assert_allclose(undifference(out, rec).values, x, atol=1e-9 * scale * 8)


def test_undifference_step_matches_levels(rng):
    x = np.cumsum(np.cumsum(rng.normal(size=30)))
    for d in range(4):
        z = difference(x, d)[0].values
        # z[-1] is the d-th difference at the last time
        assert undifference_step(z[-1], x[:-1], d) == pytest.approx(x[-1], abs=1e-9)


def test_normalize_examples():
    out, rec = normalize([1.0, 2.0, 3.0], "zscore")
    np.testing.assert_allclose(out.values, [-1, 0, 1])
    out, rec = normalize([0.0, 10.0], "minmax01")
    np.testing.assert_allclose(out.values, [0, 1])
    out, rec = normalize([0.0, 5.0, 10.0], "minmax11")
    np.testing.assert_allclose(out.values, [-1, 0, 1])


def test_normalize_degenerate():
    for kind in ("zscore", "minmax01", "minmax11"):
        with pytest.raises(DegenerateScaleError):
            normalize([3.0, 3.0, 3.0], kind)


@settings(max_examples=50, deadline=None)
@given(
    arrays(float, st.integers(3, 50), elements=finite),
    st.sampled_from(["zscore", "minmax01", "minmax11", "none"]),
)
def test_normalize_round_trip(x, kind):
    if kind != "none" and np.ptp(x) < 1e-6:
        return
    out, rec = normalize(x, kind)
    if kind == "zscore":
        assert abs(out.values.mean()) < 1e-9
        assert abs(out.values.std(ddof=1) - 1) < 1e-9
    back = denormalize(out, rec).values
    np.testing.assert_allclose(back, x, rtol=1e-9, atol=1e-9 * max(1.0, np.abs(x).max()))


def test_split_examples():
    assert [len(p) for p in split(np.arange(10.0), SplitSpec(0.7))] == [7, 3]
    assert [len(p) for p in split(np.arange(409.0), SplitSpec(0.7))] == [286, 123]
    assert [len(p) for p in split(np.arange(4.0), SplitSpec(0.5))] == [2, 2]
    # floor must not be fooled by 0.7 * 70 = 48.999...
    assert len(split(np.arange(70.0), SplitSpec(0.7))[0]) == 49


def test_split_bad_fraction():
    for f in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(SeriesError):
            SplitSpec(f)


@settings(max_examples=50, deadline=None)
@given(arrays(float, st.integers(4, 80), elements=finite), st.floats(0.3, 0.9))
def test_split_is_partition(x, f):
    x_before = x.copy()
    train, test = split(x, SplitSpec(f))
    np.testing.assert_array_equal(np.concatenate([train.values, test.values]), x)
    np.testing.assert_array_equal(x, x_before)


def test_transforms_do_not_mutate(rng):
    x = rng.normal(size=20)
    keep = x.copy()
    difference(x, 2)
    normalize(x, "zscore")
    split(x)
    np.testing.assert_array_equal(x, keep)


def test_price_series_validation():
    d = [dt.date(2015, 1, 5) + dt.timedelta(weeks=i) for i in range(3)]
    ps = PriceSeries(d, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert len(ps) == 3
    with pytest.raises(SeriesError):
        PriceSeries(d, [1.0, -2.0, 3.0])
    with pytest.raises(SeriesError):
        PriceSeries([d[0], d[2], d[1]], [1.0, 2.0, 3.0])
    with pytest.raises(SeriesError):
        PriceSeries(d, [1.0, 2.0, 3.0], [1.0, 2.0])


def test_subseries_validation():
    with pytest.raises(SeriesError):
        Subseries([], "W1")
    with pytest.raises(SeriesError):
        Subseries([1.0, np.nan], "W1")
    with pytest.raises(SeriesError):
        Subseries([1.0], "Q9")
