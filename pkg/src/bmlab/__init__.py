"""Numerical laboratory for Besov-Morrey quasi-norms on sampled functions."""
from ._backend import BACKEND
from .gridfn import Grid, SampledFunction, make_grid

__version__ = "0.1.0"

__all__ = ["BACKEND", "Grid", "SampledFunction", "make_grid", "__version__"]
