"""Pure-numpy implementations of the hot reduction kernels.

These are the fallback for the compiled extension in ``_core``.  Both
implementations must return bit-identical results: every operation here
is an exact max/abs reduction, so no floating-point reassociation is
involved.
"""

from __future__ import annotations

import numpy as np


def range_max_abs(vec: np.ndarray, start: int, end: int) -> float:
    """Max of |vec[start:end]| over a non-empty range."""
    return float(np.max(np.abs(vec[start:end])))


def rows_range_max_abs(mat: np.ndarray, start: int, end: int) -> np.ndarray:
    """Per-row max of |mat[:, start:end]| over a non-empty column range."""
    return np.max(np.abs(mat[:, start:end]), axis=1)


def rows_segments_max_abs(
    mat: np.ndarray, starts: np.ndarray, ends: np.ndarray
) -> np.ndarray:
    """Per-row max of |mat| over the union of [starts[k], ends[k]) segments."""
    out = np.max(np.abs(mat[:, starts[0] : ends[0]]), axis=1)
    for k in range(1, len(starts)):
        np.maximum(
            out, np.max(np.abs(mat[:, starts[k] : ends[k]]), axis=1), out=out
        )
    return out
