import numpy as np
import pytest
from hypothesis import given, strategies as st

from tsgeo.embedding import takens_embed
from tsgeo.exceptions import InvalidWindowError


def test_examples():
    assert takens_embed([1, 2, 3, 4], 2).tolist() == [[1, 2], [2, 3], [3, 4]]
    assert takens_embed([5.0, -1.0, 2.0], 1).tolist() == [[5], [-1], [2]]
    assert takens_embed(np.zeros(600)).shape == (598, 3)


def test_short_series_rejected():
    with pytest.raises(InvalidWindowError):
        takens_embed([1.0, 2.0], 3)
    with pytest.raises(InvalidWindowError):
        takens_embed([1.0, 2.0], 0)


@given(st.integers(1, 200), st.integers(1, 10))
def test_count_and_overlap(n, m):
    if n < m:
        return
    y = np.arange(n, dtype=float) ** 1.5
    pts = takens_embed(y, m)
    assert pts.shape == (n - m + 1, m)
    assert np.array_equal(pts[:-1, 1:], pts[1:, :-1])
