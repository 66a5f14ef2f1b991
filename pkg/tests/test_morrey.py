import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bmlab.gridfn import SampledFunction, ball_lp_integral, make_grid
from bmlab.morrey import (
    BallFamily,
    ExplicitFamily,
    MorreyNonConvergence,
    ball_sums,
    default_family,
    morrey_norm,
    refine_until_stable,
)
from bmlab.profiles import radial_cutoff
from bmlab.zoo import SingularFnConfig, make_f_alpha_delta

from conftest import random_compact


def test_zero_function(grid1):
    est = morrey_norm(SampledFunction.zeros(grid1), 2.0, 1.0)
    assert est.value == 0.0
    assert refine_until_stable(SampledFunction.zeros(grid1), 2.0, 1.0).value == 0.0


def test_rejects_p_above_u(grid1):
    with pytest.raises(ValueError):
        morrey_norm(SampledFunction.zeros(grid1), 1.0, 2.0)


def test_indicator_is_lp_norm():
    g = make_grid(1, 8.0, 4096)
    f = SampledFunction.from_callable(g, lambda x: ((x >= 0) & (x < 1)).astype(float), 1.0)
    est = morrey_norm(f, 2.0, 2.0, BallFamily(g, stride=1))
    assert est.value == pytest.approx(1.0, rel=0.03)


@pytest.mark.parametrize("j,k,u,p", [(0, 0, 2.0, 1.0), (2, 1, 3.0, 2.0), (3, -2, 4.0, 1.5)])
def test_normalized_cube_indicator(j, k, u, p):
    g = make_grid(1, 8.0, 4096)
    side = 2.0**-j
    lo = k * side
    f = SampledFunction.from_callable(
        g, lambda x: 2.0 ** (j / u) * ((x >= lo) & (x < lo + side)), abs(lo) + side + g.dx
    )
    est = morrey_norm(f, u, p, BallFamily(g, stride=1, shape="cube"))
    assert est.value == pytest.approx(1.0, rel=0.05)


def test_normalized_square_indicator_2d():
    g = make_grid(2, 4.0, 256)
    X, Y = g.coords()
    f = SampledFunction(g, 2.0 ** (2 / 4.0) * ((X >= 0) & (X < 0.5) & (Y >= 0) & (Y < 0.5)), 0.75)
    est = morrey_norm(f, 4.0, 2.0, BallFamily(g, stride=1, shape="cube"))
    assert est.value == pytest.approx(1.0, rel=0.05)


def test_ball_sums_match_direct_integrals_2d():
    g = make_grid(2, 2.0, 64)
    rng = np.random.default_rng(3)
    f = random_compact(g, rng, 1.0)
    fam = ExplicitFamily.from_points(g, [[0.0, 0.0], [0.25, -0.5], [-1.0, 0.125]], [0.3, 0.71, 1.3])
    sums = ball_sums(np.abs(f.values) ** 2, fam)
    for i, r in enumerate(fam.radii()):
        for c, idx in enumerate(fam.center_indices()):
            center = [g.axis[idx[0]], g.axis[idx[1]]]
            direct = ball_lp_integral(f, center, r, 2.0) ** 2 / g.cell_volume
            assert sums[i, c] == pytest.approx(direct, rel=1e-12)


def test_ball_sums_match_direct_integrals_1d():
    g = make_grid(1, 4.0, 256)
    f = random_compact(g, np.random.default_rng(4), 1.0)
    fam = BallFamily(g, stride=7)
    sums = ball_sums(np.abs(f.values), fam)
    for i, r in enumerate(fam.radii()[::5]):
        for c, idx in enumerate(fam.center_indices()[::9]):
            direct = ball_lp_integral(f, [g.axis[idx[0]]], r, 1.0) / g.cell_volume
            assert sums[5 * i, 9 * c] == pytest.approx(direct, rel=1e-12, abs=1e-12)


def test_refine_is_superset(grid1):
    fam = default_family(grid1)
    ref = fam.refine()
    assert set(map(tuple, fam.center_indices())) <= set(map(tuple, ref.center_indices()))
    assert all(np.isclose(ref.radii(), r).any() for r in fam.radii())


@given(st.integers(0, 2**32 - 1))
def test_refinement_never_decreases(seed):
    g = make_grid(1, 4.0, 256)
    f = random_compact(g, np.random.default_rng(seed), 1.0)
    fam = default_family(g)
    a = morrey_norm(f, 3.0, 1.5, fam).value
    b = morrey_norm(f, 3.0, 1.5, fam.refine()).value
    assert b >= a


@given(st.integers(0, 2**32 - 1), st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3))
def test_homogeneity(seed, c):
    g = make_grid(1, 4.0, 256)
    f = random_compact(g, np.random.default_rng(seed), 1.0)
    a = morrey_norm(f, 2.5, 1.2).value
    b = morrey_norm(c * f, 2.5, 1.2).value
    assert b == pytest.approx(abs(c) * a, rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.3, 1.0), st.floats(0.3, 1.0))
def test_holder_chain(seed, a, b):
    g = make_grid(1, 4.0, 256)
    f = random_compact(g, np.random.default_rng(seed), 1.0)
    u = 3.0
    p2, p1 = sorted((a * u, b * u))
    assert morrey_norm(f, u, p2).value <= morrey_norm(f, u, p1).value * (1 + 1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(0.5, 3.0))
def test_p_equals_u_consistency(seed, p):
    g = make_grid(1, 4.0, 256)
    f = random_compact(g, np.random.default_rng(seed), 1.0)
    est = morrey_norm(f, p, p).value
    lp = f.lp_norm(p)
    assert 0.97 * lp <= est <= lp * (1 + 1e-12)


def test_partials_monotone(grid1):
    f = random_compact(grid1, np.random.default_rng(0))
    est = morrey_norm(f, 2.0, 1.0)
    vals = [v for _, v in est.partials]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_refine_until_stable_smooth_bump():
    g = make_grid(1, 8.0, 1024)
    f = SampledFunction(g, radial_cutoff(g.radius(), 0.5, 1.5), 1.5)
    est = refine_until_stable(f, 4.0, 2.0, tol=0.01)
    assert est.truncation["converged"] and est.truncation["refinements"] <= 6
    assert refine_until_stable.__defaults__[-1] == 6


def test_refine_until_stable_rejects_bad_tol(grid1):
    with pytest.raises(ValueError):
        refine_until_stable(SampledFunction.zeros(grid1), 2.0, 1.0, tol=0.7)


def test_singular_function_signals_nonconvergence():
    g = make_grid(1, 2.0, 4096, offset=True)
    f = make_f_alpha_delta(g, SingularFnConfig(alpha=-0.45))
    with pytest.raises(MorreyNonConvergence) as info:
        refine_until_stable(f, 4.0, 2.0, tol=0.01)
    assert info.value.estimate.truncation["converged"] is False


def test_small_ball_power_law_for_singular_function():
    # |B(0,r)|^(1/u-1/p) (int_{B(0,r)} |x|^(alpha p))^(1/p) = c r^(d/u + alpha)
    g = make_grid(1, 2.0, 1 << 15, offset=True)
    alpha, u, p = -0.3, 4.0, 2.0
    f = make_f_alpha_delta(g, SingularFnConfig(alpha=alpha))
    center = g.n // 2  # index of the sample at +dx/2
    radii = [2.0**-m for m in range(5, 10)]
    fam = ExplicitFamily(g, ((center,),), tuple(radii))
    est = morrey_norm(f, u, p, fam)
    per = np.array(est.details["per_radius"])
    slope = np.polyfit(np.log2(fam.radii()), np.log2(per), 1)[0]
    assert slope == pytest.approx(1 / u + alpha, abs=0.02)
