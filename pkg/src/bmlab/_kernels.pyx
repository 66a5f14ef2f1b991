# cython: language_level=3
"""Compiled inner loops.

Each routine mirrors a function of the same name in ``_kernels_py`` and must
produce the same numbers (same summation order) up to libm rounding.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow, sqrt, INFINITY

cnp.import_array()


cdef inline double _mag_pow(double re, double im, double v, int mode) nogil:
    cdef double m2 = re * re + im * im
    if mode == 2:
        return m2
    elif mode == 1:
        return sqrt(m2)
    return pow(m2, 0.5 * v)


cdef inline int _mode(double v):
    if v == 2.0:
        return 2
    if v == 1.0:
        return 1
    return 0


def diff_power_sum_1d(const double complex[::1] f, const long long[::1] offsets,
                      const double[::1] coef, double v):
    """Per-sample sum over offsets h of |sum_k coef[k] f[i + k h]|**v (max if v is inf)."""
    cdef Py_ssize_t n = f.shape[0]
    cdef Py_ssize_t m = offsets.shape[0]
    cdef Py_ssize_t order = coef.shape[0]
    cdef Py_ssize_t i, j, k, idx
    cdef long long off
    cdef double re, im, term
    cdef bint vinf = v == INFINITY
    cdef int mode = _mode(v)
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for j in range(m):
            off = offsets[j]
            for i in range(n):
                re = 0.0
                im = 0.0
                for k in range(order):
                    idx = i + k * off
                    if 0 <= idx < n:
                        re = re + coef[k] * f[idx].real
                        im = im + coef[k] * f[idx].imag
                if vinf:
                    term = sqrt(re * re + im * im)
                    if term > out[i]:
                        out[i] = term
                else:
                    out[i] = out[i] + _mag_pow(re, im, v, mode)
    return out_arr


def diff_power_sum_2d(const double complex[:, ::1] f, const long long[:, ::1] offsets,
                      const double[::1] coef, double v):
    """Two-dimensional version of ``diff_power_sum_1d``; offsets has shape (m, 2)."""
    cdef Py_ssize_t n0 = f.shape[0]
    cdef Py_ssize_t n1 = f.shape[1]
    cdef Py_ssize_t m = offsets.shape[0]
    cdef Py_ssize_t order = coef.shape[0]
    cdef Py_ssize_t a, b, j, k, ia, ib
    cdef long long o0, o1
    cdef double re, im, term
    cdef bint vinf = v == INFINITY
    cdef int mode = _mode(v)
    out_arr = np.zeros((n0, n1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    with nogil:
        for j in range(m):
            o0 = offsets[j, 0]
            o1 = offsets[j, 1]
            for a in range(n0):
                for b in range(n1):
                    re = 0.0
                    im = 0.0
                    for k in range(order):
                        ia = a + k * o0
                        ib = b + k * o1
                        if 0 <= ia < n0 and 0 <= ib < n1:
                            re = re + coef[k] * f[ia, ib].real
                            im = im + coef[k] * f[ia, ib].imag
                    if vinf:
                        term = sqrt(re * re + im * im)
                        if term > out[a, b]:
                            out[a, b] = term
                    else:
                        out[a, b] = out[a, b] + _mag_pow(re, im, v, mode)
    return out_arr


def disk_sums_2d(const double[:, ::1] row_prefix, const long long[:, ::1] centers,
                 const long long[::1] halfwidths):
    """Sum of a 2-d array over lattice disks, from row-wise prefix sums.

    ``row_prefix[r, c]`` is the sum of the first ``c`` entries of row ``r``;
    ``halfwidths[dy + m]`` is the half-width of the disk on row offset ``dy``.
    """
    cdef Py_ssize_t n0 = row_prefix.shape[0]
    cdef Py_ssize_t n1 = row_prefix.shape[1] - 1
    cdef Py_ssize_t nc = centers.shape[0]
    cdef Py_ssize_t m = (halfwidths.shape[0] - 1) // 2
    cdef Py_ssize_t c, dy, row, lo, hi
    cdef long long cy, cx, w
    cdef double acc
    out_arr = np.zeros(nc, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for c in range(nc):
            cy = centers[c, 0]
            cx = centers[c, 1]
            acc = 0.0
            for dy in range(-m, m + 1):
                row = cy + dy
                if row < 0 or row >= n0:
                    continue
                w = halfwidths[dy + m]
                lo = cx - w
                hi = cx + w + 1
                if lo < 0:
                    lo = 0
                if hi > n1:
                    hi = n1
                if hi > lo:
                    acc = acc + (row_prefix[row, hi] - row_prefix[row, lo])
            out[c] = acc
    return out_arr
