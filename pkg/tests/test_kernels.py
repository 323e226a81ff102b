"""The compiled and numpy kernel implementations must agree exactly."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from birs._kernels import IMPLEMENTATION, _numpy_impl

try:
    from birs._kernels import _core
except ImportError:
    _core = None

IMPLS = [("numpy", _numpy_impl)] + ([("cython", _core)] if _core else [])


def test_an_implementation_was_selected():
    assert IMPLEMENTATION in ("cython", "numpy")


@pytest.mark.parametrize("name,impl", IMPLS)
def test_range_max_abs_basic(name, impl):
    vec = np.array([1.0, -4.0, 2.5, 0.0])
    assert impl.range_max_abs(vec, 0, 4) == 4.0
    assert impl.range_max_abs(vec, 2, 4) == 2.5


@pytest.mark.skipif(_core is None, reason="compiled kernels unavailable")
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_implementations_bitwise_identical(seed):
    rng = np.random.default_rng(seed)
    n_rows = int(rng.integers(1, 30))
    p = int(rng.integers(2, 120))
    mat = rng.standard_normal((n_rows, p)) * rng.uniform(0.1, 100)
    start = int(rng.integers(0, p - 1))
    end = int(rng.integers(start + 1, p + 1))

    assert _core.range_max_abs(mat[0], start, end) == _numpy_impl.range_max_abs(
        mat[0], start, end
    )
    np.testing.assert_array_equal(
        np.asarray(_core.rows_range_max_abs(mat, start, end)),
        _numpy_impl.rows_range_max_abs(mat, start, end),
    )

    n_segs = int(rng.integers(1, 6))
    starts, ends = [], []
    for _ in range(n_segs):
        s = int(rng.integers(0, p - 1))
        e = int(rng.integers(s + 1, p + 1))
        starts.append(s)
        ends.append(e)
    starts = np.array(starts, dtype=np.int64)
    ends = np.array(ends, dtype=np.int64)
    np.testing.assert_array_equal(
        np.asarray(_core.rows_segments_max_abs(mat, starts, ends)),
        _numpy_impl.rows_segments_max_abs(mat, starts, ends),
    )


@pytest.mark.skipif(_core is None, reason="compiled kernels unavailable")
def test_strided_views_supported():
    rng = np.random.default_rng(0)
    base = rng.standard_normal((40, 200))
    view = base[:, 37:150]  # non-contiguous column slice
    np.testing.assert_array_equal(
        np.asarray(_core.rows_range_max_abs(view, 3, 100)),
        _numpy_impl.rows_range_max_abs(view, 3, 100),
    )
