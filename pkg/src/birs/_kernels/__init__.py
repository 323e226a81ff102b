"""Hot reduction kernels with import-time implementation selection.

The compiled Cython extension is preferred; the numpy fallback is used
when the extension is unavailable or ``BIRS_PURE_PYTHON=1`` is set.
Both produce bit-identical results (exact max/abs reductions), so the
choice never affects detection output.
"""

from __future__ import annotations

import os

__all__ = [
    "IMPLEMENTATION",
    "range_max_abs",
    "rows_range_max_abs",
    "rows_segments_max_abs",
]

if os.environ.get("BIRS_PURE_PYTHON") == "1":
    from ._numpy_impl import range_max_abs, rows_range_max_abs, rows_segments_max_abs

    IMPLEMENTATION = "numpy"
else:
    try:
        from ._core import range_max_abs, rows_range_max_abs, rows_segments_max_abs

        IMPLEMENTATION = "cython"
    except ImportError:
        from ._numpy_impl import (
            range_max_abs,
            rows_range_max_abs,
            rows_segments_max_abs,
        )

        IMPLEMENTATION = "numpy"
