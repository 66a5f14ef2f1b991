import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bmlab.gridfn import SampledFunction, make_grid
from bmlab.profiles import radial_cutoff

settings.register_profile(
    "bmlab", deadline=None, max_examples=30, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("bmlab")


@pytest.fixture
def grid1():
    return make_grid(1, 8.0, 1024)


@pytest.fixture
def grid2():
    return make_grid(2, 4.0, 128)


def random_compact(grid, rng, radius=None):
    """Random smooth-windowed function supported in a ball of radius <= R/2."""
    radius = grid.R / 4 if radius is None else radius
    r = grid.radius()
    noise = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    vals = noise * radial_cutoff(r, 0.5 * radius, radius)
    return SampledFunction(grid, vals, radius)
