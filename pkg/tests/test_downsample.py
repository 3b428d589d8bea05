import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tsgeo.downsample import (
    Bucketing, bucket_average, downsample, dropout, dynamic_buckets, lttb, lttb_indices,
    naive_buckets, ols_sse, triangle_area,
)
from tsgeo.exceptions import InvalidTargetError


def test_naive_bucket_sizes():
    assert naive_buckets(12, 5).sizes == [1, 2, 2, 2, 2, 2, 1]
    assert naive_buckets(11, 4).sizes == [1, 3, 2, 2, 2, 1]
    assert naive_buckets(2, 0).buckets == [range(0, 1), range(1, 2)]


def test_naive_bucket_errors():
    with pytest.raises(InvalidTargetError):
        naive_buckets(5, 4)
    with pytest.raises(InvalidTargetError):
        naive_buckets(600, 0)


@given(st.integers(2, 500), st.data())
def test_naive_partition(n, data):
    m = data.draw(st.integers(1 if n > 2 else 0, n - 2))
    bk = naive_buckets(n, m)
    sizes = bk.sizes
    assert sizes[0] == sizes[-1] == 1
    assert sum(sizes) == n and len(sizes) == m + 2
    interior = sizes[1:-1]
    if interior:
        assert max(interior) - min(interior) <= 1
        assert interior == sorted(interior, reverse=True)


def test_bucketing_validation():
    with pytest.raises(ValueError):
        Bucketing((0, 2, 3))  # first bucket not a singleton
    with pytest.raises(ValueError):
        Bucketing((0, 1, 1, 2))


def test_dropout_examples():
    s = np.array([10.0, 11, 12, 13, 14, 15])
    assert dropout(s, Bucketing((0, 1, 3, 5, 6))).tolist() == [10, 11, 13, 15]
    assert dropout(s, naive_buckets(6, 4)).tolist() == s.tolist()
    y = [9, 1, 2, 3, 4, 5, 6, 7, 8, 9, 1, 9]
    assert dropout(y, naive_buckets(12, 5)).tolist() == [9, 1, 3, 5, 7, 9, 9]


def test_bucket_average_examples():
    pts = bucket_average([0, 10, 20, 30], Bucketing((0, 1, 3, 4)))
    assert pts[1].tolist() == [1.5, 15]
    y = np.array([3.0, -1, 4, 1, -5])
    ident = bucket_average(y, naive_buckets(5, 3))
    assert ident.tolist() == [[i, v] for i, v in enumerate(y)]
    out = bucket_average([0, 0, 6, 0, 0], Bucketing((0, 1, 4, 5)))
    assert out.tolist() == [[0, 0], [2, 2], [4, 0]]


def test_triangle_area_examples():
    assert triangle_area((0, 0), (1, 0), (0, 1)) == 0.5
    assert triangle_area((0, 0), (1, 1), (3, 3)) == 0
    assert triangle_area((0, 0), (2, 10), (4, 0)) == 20


def test_lttb_examples():
    y = np.array([0.0, 0, 10, 0, 0])
    bk = Bucketing((0, 1, 4, 5))
    # brute force: apex candidates (1,0), (2,10), (3,0) against (0,0) and the last point (4,0)
    areas = [triangle_area((0, 0), (i, y[i]), (4, 0)) for i in (1, 2, 3)]
    assert areas == [0, 20, 0]
    assert lttb(y, bk).tolist() == [[0, 0], [2, 10], [4, 0]]
    z = np.array([5.0, -2, 7, 1])
    assert lttb_indices(z, naive_buckets(4, 2)).tolist() == [0, 1, 2, 3]


def test_lttb_ties_resolve_to_first_point():
    y = np.arange(20.0)  # collinear: every area is zero
    bk = naive_buckets(20, 5)
    assert lttb_indices(y, bk).tolist() == list(bk.edges[:-1])


def test_lttb_needs_interior_bucket():
    with pytest.raises(InvalidTargetError):
        lttb([1.0, 2.0], naive_buckets(2, 0))


def test_ols_sse_examples():
    assert ols_sse([[0, 4], [1, -7]]) == 0
    assert ols_sse([[3, 1]]) == 0
    assert ols_sse([[0, 0], [1, 1], [2, 0]]) == pytest.approx(2 / 3, abs=1e-15)
    assert ols_sse([[0, 1], [1, 3], [2, 5], [3, 7]]) == 0
    assert ols_sse([[1, 0], [1, 5], [1, 9]]) == 0


def test_ols_sse_matches_lstsq(rng):
    for _ in range(20):
        k = rng.integers(3, 15)
        x = np.arange(k, dtype=float)
        y = rng.normal(size=k)
        _, res, _, _ = np.linalg.lstsq(np.column_stack([np.ones(k), x]), y, rcond=None)
        assert ols_sse(np.column_stack([x, y])) == pytest.approx(res[0], rel=1e-10, abs=1e-12)


def test_dynamic_p0_is_identity():
    bk = naive_buckets(30, 6)
    assert dynamic_buckets(np.random.default_rng(0).normal(size=30), bk, 0) == bk


def test_dynamic_planted_region():
    y = [0.0] + [0, 0, 0, 0, 5, -5, 5, -5, 0, 0, 0, 0] + [0.0]
    bk = naive_buckets(14, 3)
    assert bk.sizes == [1, 4, 4, 4, 1]
    sse = [ols_sse(np.column_stack([list(b), [y[i] for i in b]])) for b in bk.buckets]
    assert sse[2] > 0 and sse[1] == sse[3] == 0
    history = []
    out = dynamic_buckets(y, bk, 1, history)
    assert history[0] == ("split", 2)
    assert history[1][0] == "merge"
    assert len(out) == len(bk)
    assert out.sizes == [1, 6, 2, 4, 1]


def test_dynamic_linear_series_keeps_count():
    y = 2.0 * np.arange(40) + 1
    bk = naive_buckets(40, 8)
    for p in range(6):
        out = dynamic_buckets(y, bk, p)
        assert len(out) == len(bk)


def test_dynamic_unsplittable_truncates():
    bk = naive_buckets(6, 4)  # all singletons, nothing can split
    assert dynamic_buckets(np.arange(6.0), bk, 3) == bk


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 80), st.data())
def test_all_downsamplers_contract(n, data):
    y = np.array(data.draw(st.lists(st.floats(-1e3, 1e3), min_size=n, max_size=n)))
    m = data.draw(st.integers(1, n - 2))
    p = data.draw(st.integers(0, 5))
    bk = naive_buckets(n, m)
    if p:
        bk = dynamic_buckets(y, bk, p)
    for out in (dropout(y, bk), bucket_average(y, bk), lttb(y, bk)):
        assert len(out) == m + 2
    assert dropout(y, bk)[0] == y[0] and dropout(y, bk)[-1] == y[-1]
    for pts in (bucket_average(y, bk), lttb(y, bk)):
        assert pts[0].tolist() == [0, y[0]]
        assert pts[-1].tolist() == [n - 1, y[-1]]


def test_downsample_wrapper():
    y = np.sin(np.arange(100) / 5)
    for method in ("dropout", "mean", "lttb"):
        x, v = downsample(y, 40, method)
        assert len(x) == len(v) == 40
    x, v = downsample(y, 100, "mean")
    assert np.array_equal(v, y)
    with pytest.raises(ValueError):
        downsample(y, 40, "median")
