"""Pure numpy implementations of the compiled kernels.

Same contracts and summation order as ``_kernels.pyx``; selected by
``bmlab._backend`` when the extension is unavailable or disabled.
"""
import numpy as np


def _shifted(f, shift):
    """Return g with g[i] = f[i + shift] and zero outside the array (any dimension)."""
    out = np.zeros_like(f)
    src = []
    dst = []
    for s, n in zip(shift, f.shape):
        s = int(s)
        if abs(s) >= n:
            return out
        if s >= 0:
            src.append(slice(s, n))
            dst.append(slice(0, n - s))
        else:
            src.append(slice(0, n + s))
            dst.append(slice(-s, n))
    out[tuple(dst)] = f[tuple(src)]
    return out


def _accumulate(f, offsets, coef, v):
    out = np.zeros(f.shape, dtype=np.float64)
    vinf = np.isinf(v)
    for off in offsets:
        off = np.atleast_1d(off)
        re = np.zeros(f.shape)
        im = np.zeros(f.shape)
        for k, c in enumerate(coef):
            g = _shifted(f, k * off)
            re = re + c * g.real
            im = im + c * g.imag
        m2 = re * re + im * im
        if vinf:
            np.maximum(out, np.sqrt(m2), out=out)
        elif v == 2.0:
            out = out + m2
        elif v == 1.0:
            out = out + np.sqrt(m2)
        else:
            out = out + np.power(m2, 0.5 * v)
    return out


def diff_power_sum_1d(f, offsets, coef, v):
    f = np.ascontiguousarray(f, dtype=np.complex128)
    return _accumulate(f, np.asarray(offsets, dtype=np.int64), coef, float(v))


def diff_power_sum_2d(f, offsets, coef, v):
    f = np.ascontiguousarray(f, dtype=np.complex128)
    return _accumulate(f, np.asarray(offsets, dtype=np.int64).reshape(-1, 2), coef, float(v))


def disk_sums_2d(row_prefix, centers, halfwidths):
    row_prefix = np.asarray(row_prefix, dtype=np.float64)
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, 2)
    halfwidths = np.asarray(halfwidths, dtype=np.int64)
    n0 = row_prefix.shape[0]
    n1 = row_prefix.shape[1] - 1
    m = (len(halfwidths) - 1) // 2
    cy = centers[:, 0]
    cx = centers[:, 1]
    out = np.zeros(len(centers))
    for dy in range(-m, m + 1):
        row = cy + dy
        ok = (row >= 0) & (row < n0)
        w = halfwidths[dy + m]
        lo = np.clip(cx - w, 0, n1)
        hi = np.clip(cx + w + 1, 0, n1)
        rows = np.where(ok, row, 0)
        val = row_prefix[rows, hi] - row_prefix[rows, lo]
        out = out + np.where(ok & (hi > lo), val, 0.0)
    return out
