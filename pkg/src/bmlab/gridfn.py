"""Uniform grids and compactly supported sampled functions.

Everything downstream consumes :class:`SampledFunction`: complex samples on a
uniform lattice over ``[-R, R)^d`` with zero extension outside the grid.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_HEADER = struct.Struct("<qdqdq")
_FLAG_OFFSET = 1
_FLAG_NO_MARGIN = 2


@dataclass(frozen=True)
class Grid:
    """Uniform lattice over ``[-R, R)^d`` with ``n`` points per axis.

    With ``offset=True`` samples sit at cell midpoints ``-R + (i + 1/2) dx`` so
    that no sample lands on the origin (used for functions singular at 0).
    """

    d: int
    R: float
    n: int
    offset: bool = False

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError(f"unsupported dimension d={self.d}; only 1 and 2 are supported")
        if self.n < 16 or self.n & (self.n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")
        if not self.R > 0:
            raise ValueError("R must be positive")

    @property
    def dx(self) -> float:
        return 2.0 * self.R / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def cell_volume(self) -> float:
        return self.dx**self.d

    @property
    def axis(self) -> np.ndarray:
        shift = 0.5 if self.offset else 0.0
        return -self.R + (np.arange(self.n) + shift) * self.dx

    def coords(self) -> tuple:
        """Coordinate arrays, one per axis, in lexicographic (``ij``) order."""
        if self.d == 1:
            return (self.axis,)
        return tuple(np.meshgrid(self.axis, self.axis, indexing="ij"))

    def radius(self) -> np.ndarray:
        """|x| at every grid point."""
        return np.sqrt(sum(c * c for c in self.coords()))

    def index_of(self, point) -> tuple:
        """Grid index of a lattice point; raises if ``point`` is not on the lattice."""
        point = np.atleast_1d(np.asarray(point, dtype=np.float64))
        shift = 0.5 if self.offset else 0.0
        k = (point + self.R) / self.dx - shift
        kr = np.round(k)
        if np.any(np.abs(k - kr) > 1e-9) or np.any(kr < 0) or np.any(kr >= self.n):
            raise ValueError(f"{point} is not a point of the grid")
        return tuple(int(v) for v in kr)

    def steps(self, vector) -> np.ndarray:
        """Express a displacement in whole grid steps; raises if not grid-aligned."""
        vector = np.atleast_1d(np.asarray(vector, dtype=np.float64))
        if vector.shape != (self.d,):
            raise ValueError(f"expected a {self.d}-vector, got shape {vector.shape}")
        k = vector / self.dx
        kr = np.round(k)
        if np.any(np.abs(k - kr) > 1e-9):
            raise ValueError(f"displacement {vector} is not a multiple of dx={self.dx}")
        return kr.astype(np.int64)


def make_grid(d: int, R: float, n: int, offset: bool = False) -> Grid:
    return Grid(d=int(d), R=float(R), n=int(n), offset=bool(offset))


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex samples of a function vanishing outside ``B(0, support_radius)``.

    The support bound is checked on construction, as is the translation margin
    ``support_radius <= R/2``. Derived functions whose support legitimately
    spreads (band projections, differences) are built with ``margin=False``.
    """

    grid: Grid
    values: np.ndarray
    support_radius: float
    margin: bool = field(default=True, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.complex128, copy=True)
        if vals.shape != self.grid.shape:
            raise ValueError(f"values shape {vals.shape} does not match grid {self.grid.shape}")
        rad = float(self.support_radius)
        if rad < 0:
            raise ValueError("support_radius must be nonnegative")
        if self.margin and rad > self.grid.R / 2 * (1 + 1e-12):
            raise ValueError(
                f"support_radius {rad} exceeds the zero-padding margin R/2 = {self.grid.R / 2}"
            )
        outside = self.grid.radius() > rad * (1 + 1e-12)
        if np.any(vals[outside] != 0):
            raise ValueError("nonzero samples outside the declared support")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "support_radius", rad)

    @classmethod
    def from_callable(cls, grid: Grid, fn, support_radius: float, margin: bool = True):
        """Sample ``fn(*coords)`` and zero it outside the declared support."""
        vals = np.asarray(fn(*grid.coords()), dtype=np.complex128)
        vals = np.broadcast_to(vals, grid.shape).copy()
        vals[grid.radius() > support_radius] = 0
        return cls(grid, vals, support_radius, margin=margin)

    @classmethod
    def zeros(cls, grid: Grid):
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128), 0.0)

    def with_values(self, values, support_radius=None, margin=None):
        return SampledFunction(
            self.grid,
            values,
            self.support_radius if support_radius is None else support_radius,
            margin=self.margin if margin is None else margin,
        )

    def _check_same_grid(self, other):
        if other.grid != self.grid:
            raise ValueError("functions live on different grids")

    def __add__(self, other):
        if not isinstance(other, SampledFunction):
            return NotImplemented
        self._check_same_grid(other)
        return SampledFunction(
            self.grid,
            self.values + other.values,
            max(self.support_radius, other.support_radius),
            margin=self.margin and other.margin,
        )

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, SampledFunction):
            self._check_same_grid(other)
            return SampledFunction(
                self.grid,
                self.values * other.values,
                min(self.support_radius, other.support_radius),
                margin=self.margin or other.margin,
            )
        return self.with_values(self.values * complex(other))

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def lp_norm(self, p: float) -> float:
        """Discrete L_p norm (midpoint rule over the whole grid)."""
        return float(np.sum(np.abs(self.values) ** p) * self.grid.cell_volume) ** (1.0 / p)

    # --- binary layout -------------------------------------------------
    def to_bytes(self) -> bytes:
        g = self.grid
        flags = (_FLAG_OFFSET if g.offset else 0) | (0 if self.margin else _FLAG_NO_MARGIN)
        head = _HEADER.pack(g.d, g.R, g.n, self.support_radius, flags)
        body = np.ascontiguousarray(self.values, dtype="<c16").tobytes()
        return head + body

    @classmethod
    def from_bytes(cls, data: bytes):
        d, R, n, rad, flags = _HEADER.unpack_from(data)
        grid = make_grid(d, R, n, offset=bool(flags & _FLAG_OFFSET))
        vals = np.frombuffer(data, dtype="<c16", offset=_HEADER.size)
        if vals.size != n**d:
            raise ValueError(f"payload holds {vals.size} samples, header says {n ** d}")
        return cls(grid, vals.reshape(grid.shape), rad, margin=not flags & _FLAG_NO_MARGIN)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path):
        return cls.from_bytes(Path(path).read_bytes())


def ball_mask(grid: Grid, center, radius: float) -> np.ndarray:
    """Boolean mask of grid points strictly inside ``B(center, radius)``."""
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    dist2 = sum((c - x0) ** 2 for c, x0 in zip(grid.coords(), center))
    return dist2 < radius * radius


def ball_lp_integral(f: SampledFunction, center, radius: float, p: float) -> float:
    """``(int_{B(center, radius)} |f|^p dx)^(1/p)`` by the midpoint rule on the lattice."""
    if not p > 0:
        raise ValueError("p must be positive")
    if not radius > 0:
        raise ValueError("radius must be positive")
    vals = np.abs(f.values[ball_mask(f.grid, center, radius)])
    total = float(np.sum(vals**p)) * f.grid.cell_volume
    return total ** (1.0 / p)


def shift_samples(values: np.ndarray, steps) -> np.ndarray:
    """``out[i] = values[i - steps]`` with zero fill (no wrap-around)."""
    from ._kernels_py import _shifted

    return _shifted(values, -np.asarray(steps, dtype=np.int64))


def translate(f: SampledFunction, shift) -> SampledFunction:
    """Exact relocation ``g(x) = f(x - shift)`` for grid-aligned shifts."""
    steps = f.grid.steps(shift)
    if not np.any(steps):
        return f
    new_rad = f.support_radius + float(np.linalg.norm(steps * f.grid.dx))
    if f.margin and new_rad > f.grid.R / 2 * (1 + 1e-12):
        raise ValueError("translated support leaves the margin B(0, R/2)")
    return SampledFunction(f.grid, shift_samples(f.values, steps), new_rad, margin=f.margin)
