"""Smooth cut-off profiles built from t -> exp(-1/t).

Every construction in the package (the dyadic partition, the cut-offs of the
test functions, the atom profile) uses these, so results are reproducible
bit-for-bit.
"""
import numpy as np

#: Radii of the base frequency profile: 1 inside ``PHI0_INNER``, 0 beyond ``PHI0_OUTER``.
PHI0_INNER = 1.0
PHI0_OUTER = 1.5


def _psi(t):
    t = np.asarray(t, dtype=np.float64)
    out = np.zeros_like(t)
    pos = t > 0
    with np.errstate(over="ignore"):  # 1/t overflows to inf for subnormal t; exp(-inf) = 0
        out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(t):
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between."""
    t = np.asarray(t, dtype=np.float64)
    a = _psi(t)
    b = _psi(1.0 - t)
    return a / (a + b)


def radial_cutoff(r, inner, outer):
    """1 for r <= inner, 0 for r >= outer, smooth and monotone in between."""
    r = np.asarray(r, dtype=np.float64)
    if not outer > inner:
        raise ValueError("outer radius must exceed inner radius")
    return smooth_step((outer - r) / (outer - inner))


def phi0(r):
    """Base profile of the dyadic decomposition of unity, as a function of |xi|."""
    return radial_cutoff(r, PHI0_INNER, PHI0_OUTER)


def interval_bump(y, width=1.0):
    """Smooth bump supported on the open interval (0, width), peak 1 at width/2."""
    y = np.asarray(y, dtype=np.float64) / width
    out = np.zeros_like(y)
    inside = (y > 0) & (y < 1)
    z = 2.0 * y[inside] - 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - z * z))
    return out
