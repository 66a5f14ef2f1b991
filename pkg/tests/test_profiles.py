import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from bmlab.profiles import PHI0_INNER, PHI0_OUTER, interval_bump, phi0, radial_cutoff, smooth_step


def test_smooth_step_endpoints():
    t = np.array([-1.0, 0.0, 1.0, 2.0])
    assert np.array_equal(smooth_step(t), [0.0, 0.0, 1.0, 1.0])
    assert smooth_step(np.array([0.5]))[0] == 0.5


@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_smooth_step_monotone(a, b):
    lo, hi = sorted((a, b))
    assert smooth_step(np.array([lo]))[0] <= smooth_step(np.array([hi]))[0]


def test_phi0_constants():
    assert PHI0_INNER == 1.0 and PHI0_OUTER == 1.5
    assert phi0(np.array([0.0, 1.0]))[1] == 1.0
    assert phi0(np.array([1.5, 3.0])).max() == 0.0


def test_radial_cutoff_rejects_bad_radii():
    import pytest

    with pytest.raises(ValueError):
        radial_cutoff(np.zeros(2), 2.0, 1.0)


def test_interval_bump_support_and_peak():
    y = np.linspace(-0.5, 1.5, 2001)
    b = interval_bump(y)
    assert b[(y <= 0) | (y >= 1)].max() == 0.0
    assert np.isclose(b.max(), 1.0)
