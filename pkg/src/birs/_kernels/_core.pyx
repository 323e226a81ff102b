# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled reduction kernels for segment max-abs scans.

The binary search recomputes, at every level and re-search round, the
per-replicate max of |scores| over a union of index segments.  Fusing
abs and max here avoids the temporaries the numpy fallback allocates.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def range_max_abs(const double[:] vec, Py_ssize_t start, Py_ssize_t end):
    cdef double best = 0.0
    cdef double a
    cdef Py_ssize_t i
    with nogil:
        for i in range(start, end):
            a = fabs(vec[i])
            if a > best:
                best = a
    return best


def rows_range_max_abs(const double[:, :] mat, Py_ssize_t start, Py_ssize_t end):
    cdef Py_ssize_t n_rows = mat.shape[0]
    out_arr = np.zeros(n_rows, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef double best, a
    cdef Py_ssize_t b, i
    with nogil:
        for b in range(n_rows):
            best = 0.0
            for i in range(start, end):
                a = fabs(mat[b, i])
                if a > best:
                    best = a
            out[b] = best
    return out_arr


def rows_segments_max_abs(
    const double[:, :] mat, const long long[:] starts, const long long[:] ends
):
    cdef Py_ssize_t n_rows = mat.shape[0]
    cdef Py_ssize_t n_segs = starts.shape[0]
    out_arr = np.zeros(n_rows, dtype=np.float64)
    cdef double[:] out = out_arr
    cdef double best, a
    cdef Py_ssize_t b, i, k
    with nogil:
        for b in range(n_rows):
            best = 0.0
            for k in range(n_segs):
                for i in range(starts[k], ends[k]):
                    a = fabs(mat[b, i])
                    if a > best:
                        best = a
            out[b] = best
    return out_arr
