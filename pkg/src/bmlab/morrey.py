"""Morrey quasi-norm estimation over finite, refinable families of balls or cubes.

A finite family can only see part of the supremum over all balls, so every
value returned here is a lower-bound estimate of the continuum norm (up to
quadrature error). Divergence is read from how the estimate grows as the
family is refined, never from one number.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _backend
from .gridfn import Grid, SampledFunction

#: Volume of the unit ball in dimension 1 and 2.
UNIT_BALL_VOLUME = {1: 2.0, 2: math.pi}


@dataclass
class NormEstimate:
    """A quasi-norm value with the truncation that produced it.

    ``partials`` is an ordered list of ``(truncation parameter, partial value)``
    pairs; ``details`` carries per-term data (block values, level terms, ...).
    """

    value: float
    truncation: dict = field(default_factory=dict)
    partials: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __float__(self):
        return float(self.value)


class MorreyNonConvergence(RuntimeError):
    """Refinement cap reached while the estimate was still moving."""

    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


@dataclass(frozen=True)
class BallFamily:
    """Centers on a strided sub-lattice times a geometric radius ladder.

    Radii are ``2**(j / levels_per_octave)`` for the integers ``j`` that land in
    ``[r_lo, r_hi]``, so powers of two are always members. For
    ``shape="cube"`` the radii are side lengths and the centers are the lower
    corners of half-open cubes ``[c, c + side)^d``.
    """

    grid: Grid
    stride: int = 4
    levels_per_octave: int = 4
    r_lo: float | None = None
    r_hi: float | None = None
    shape: str = "ball"
    max_levels_per_octave: int = 64

    def __post_init__(self):
        if self.shape not in ("ball", "cube"):
            raise ValueError(f"unknown shape {self.shape!r}")
        if self.stride < 1 or self.levels_per_octave < 1:
            raise ValueError("stride and levels_per_octave must be positive")
        if self.r_lo is None:
            object.__setattr__(self, "r_lo", self.r_floor)
        if self.r_hi is None:
            object.__setattr__(self, "r_hi", 2.0 * self.grid.R)
        if not 0 < self.r_lo <= self.r_hi <= 2.0 * self.grid.R * (1 + 1e-12):
            raise ValueError("radii must satisfy 0 < r_lo <= r_hi <= 2R")

    @property
    def r_floor(self) -> float:
        """Smallest radius the lattice resolves (two grid steps)."""
        return 2.0 * self.grid.dx

    def radii(self) -> np.ndarray:
        L = self.levels_per_octave
        lo = math.ceil(L * math.log2(self.r_lo) - 1e-9)
        hi = math.floor(L * math.log2(self.r_hi) + 1e-9)
        return np.array([2.0 ** (j / L) for j in range(lo, hi + 1)])

    def center_indices(self) -> np.ndarray:
        idx = np.arange(0, self.grid.n, self.stride)
        if self.grid.d == 1:
            return idx[:, None]
        a, b = np.meshgrid(idx, idx, indexing="ij")
        return np.stack([a.ravel(), b.ravel()], axis=1)

    def can_refine(self) -> bool:
        return (
            self.stride > 1
            or self.levels_per_octave < self.max_levels_per_octave
            or self.r_lo > self.r_floor * (1 + 1e-12)
        )

    def refine(self) -> "BallFamily":
        """Denser centers, twice the radii per octave, half the smallest radius."""
        return replace(
            self,
            stride=max(1, self.stride // 2),
            levels_per_octave=min(self.max_levels_per_octave, 2 * self.levels_per_octave),
            r_lo=max(self.r_floor, self.r_lo / 2.0),
        )

    def measure(self, radii) -> np.ndarray:
        radii = np.asarray(radii, dtype=np.float64)
        d = self.grid.d
        if self.shape == "cube":
            return radii**d
        return UNIT_BALL_VOLUME[d] * radii**d

    def describe(self) -> dict:
        return {
            "shape": self.shape,
            "stride": self.stride,
            "levels_per_octave": self.levels_per_octave,
            "r_lo": self.r_lo,
            "r_hi": self.r_hi,
            "n_centers": int(len(self.center_indices())),
            "n_radii": int(len(self.radii())),
        }


@dataclass(frozen=True, eq=False)
class ExplicitFamily:
    """A fixed list of lattice centers (or cube corners) and radii (or sides)."""

    grid: Grid
    centers: tuple
    radius_list: tuple
    shape: str = "ball"

    @classmethod
    def from_points(cls, grid, points, radii, shape="ball"):
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64).reshape(-1, grid.d))
        idx = tuple(grid.index_of(p) for p in pts)
        return cls(grid, idx, tuple(float(r) for r in np.atleast_1d(radii)), shape)

    r_floor = property(lambda self: 2.0 * self.grid.dx)
    r_lo = property(lambda self: min(self.radius_list))

    def radii(self):
        return np.array(sorted(self.radius_list))

    def center_indices(self):
        return np.array(self.centers, dtype=np.int64).reshape(-1, self.grid.d)

    def can_refine(self):
        return False

    def refine(self):
        raise ValueError("an explicit family cannot be refined")

    measure = BallFamily.measure

    def describe(self):
        return {"shape": self.shape, "explicit": True, "n_centers": len(self.centers),
                "n_radii": len(self.radius_list)}


def default_family(grid: Grid, shape: str = "ball") -> BallFamily:
    """Every 4th lattice point, ratio 2**(1/4), radii from 2 dx to 2R."""
    return BallFamily(grid, shape=shape)


def _largest_below(r, dx):
    """Largest integer k >= 0 with k*dx < r, or -1."""
    k = math.ceil(r / dx) - 1
    while k >= 0 and k * dx >= r:
        k -= 1
    while (k + 1) * dx < r:
        k += 1
    return k


@functools.lru_cache(maxsize=64)
def _windows_1d(family):
    """Index windows ``[lo, hi)`` of every 1-d family member, shape ``(n_radii, n_centers)``."""
    n, dx = family.grid.n, family.grid.dx
    c = family.center_indices()[:, 0]
    radii = family.radii()
    lo = np.empty((len(radii), len(c)), dtype=np.int64)
    hi = np.empty_like(lo)
    for i, r in enumerate(radii):
        k = _largest_below(r, dx)
        if family.shape == "ball":
            lo[i] = np.clip(c - k, 0, n)
            hi[i] = np.clip(c + k + 1, 0, n)
        else:
            lo[i] = c
            hi[i] = np.clip(c + k + 1, 0, n)
    lo.setflags(write=False)
    hi.setflags(write=False)
    return lo, hi


def ball_sums(weights: np.ndarray, family) -> np.ndarray:
    """Sums of ``weights`` over every (radius, center) member of the family.

    Returns an array of shape ``(n_radii, n_centers)`` (no cell-volume factor).
    """
    grid = family.grid
    weights = np.asarray(weights, dtype=np.float64)
    centers = family.center_indices()
    radii = family.radii()
    n = grid.n
    dx = grid.dx
    out = np.empty((len(radii), len(centers)))
    if grid.d == 1:
        prefix = np.concatenate([[0.0], np.cumsum(weights)])
        lo, hi = _windows_1d(family)
        return prefix[hi] - prefix[lo]
    if family.shape == "cube":
        sat = np.zeros((n + 1, n + 1))
        sat[1:, 1:] = np.cumsum(np.cumsum(weights, axis=0), axis=1)
        c0, c1 = centers[:, 0], centers[:, 1]
        for i, r in enumerate(radii):
            cnt = _largest_below(r, dx) + 1
            h0 = np.clip(c0 + cnt, 0, n)
            h1 = np.clip(c1 + cnt, 0, n)
            out[i] = sat[h0, h1] - sat[c0, h1] - sat[h0, c1] + sat[c0, c1]
        return out
    row_prefix = np.zeros((n, n + 1))
    row_prefix[:, 1:] = np.cumsum(weights, axis=1)
    cidx = np.ascontiguousarray(centers, dtype=np.int64)
    for i, r in enumerate(radii):
        k = _largest_below(r, dx)
        dys = np.arange(-k, k + 1)
        rem = (r / dx) ** 2 - dys.astype(np.float64) ** 2
        half = np.array([_largest_below(math.sqrt(max(x, 0.0)) * dx, dx) for x in rem])
        # exact lattice test (a^2 + b^2) dx^2 < r^2 for the half-widths
        for j, dy in enumerate(dys):
            while half[j] >= 0 and ((half[j] * dx) ** 2 + (dy * dx) ** 2) >= r * r:
                half[j] -= 1
            while (((half[j] + 1) * dx) ** 2 + (dy * dx) ** 2) < r * r:
                half[j] += 1
        out[i] = _backend.kernels.disk_sums_2d(
            np.ascontiguousarray(row_prefix), cidx, np.ascontiguousarray(half, dtype=np.int64)
        )
    return out


def morrey_from_sums(sums, family, u, p):
    """``|B|^(1/u - 1/p) (sum * dx^d)^(1/p)`` for every family member."""
    radii = family.radii()
    meas = family.measure(radii)
    vol = family.grid.cell_volume
    integ = np.maximum(sums, 0.0) * vol
    weighted = (meas ** (1.0 / u - 1.0 / p))[:, None] * integ ** (1.0 / p)
    return weighted


def morrey_norm(f: SampledFunction, u: float, p: float, family=None) -> NormEstimate:
    """Estimate ``sup |B|^(1/u - 1/p) (int_B |f|^p)^(1/p)`` over ``family``."""
    if not 0 < p <= u < math.inf:
        raise ValueError(f"need 0 < p <= u < inf, got p={p}, u={u}")
    if family is None:
        family = default_family(f.grid)
    weights = np.abs(f.values) ** p
    return morrey_of_weights(weights, family, u, p)


def morrey_of_weights(weights, family, u, p) -> NormEstimate:
    """Morrey estimate when ``|g|^p`` is already tabulated on the grid."""
    weights = np.asarray(weights, dtype=np.float64)
    radii = family.radii()
    trunc = {"family": family.describe(), "u": u, "p": p}
    if not np.any(weights):
        return NormEstimate(0.0, trunc, [(float(-np.log2(r)), 0.0) for r in radii[::-1]],
                            {"argmax_radius": None, "argmax_center": None})
    # the power map is monotone, so the sup over centers can be taken on raw sums
    sums = ball_sums(weights, family)
    best = np.argmax(sums, axis=1)
    best_sums = sums[np.arange(len(radii)), best]
    per_radius = morrey_from_sums(best_sums[:, None], family, u, p)[:, 0]
    i = int(np.argmax(per_radius))
    c = int(best[i])
    centers = family.center_indices()
    center_point = [float(family.grid.axis[k]) for k in centers[c]]
    # partial(l) = max over radii >= 2**-l, accumulated from the coarsest scale down
    running = np.maximum.accumulate(per_radius[::-1])
    partials = [(float(-np.log2(r)), float(v)) for r, v in zip(radii[::-1], running)]
    details = {
        "argmax_radius": float(radii[i]),
        "argmax_center": center_point,
        "per_radius": per_radius.tolist(),
        "radii": radii.tolist(),
    }
    return NormEstimate(float(per_radius[i]), trunc, partials, details)


def refine_until_stable(f: SampledFunction, u: float, p: float, family=None, tol: float = 0.01,
                        max_refinements: int = 6) -> NormEstimate:
    """Refine the family until the estimate moves by less than ``tol`` per step.

    Convergence also requires the maximizing radius to lie more than an
    octave above the family's smallest radius: a supremum attained at the
    finest available scales means the grid, not the function, is limiting
    the estimate. Raises
    :class:`MorreyNonConvergence` when the cap is hit first.
    """
    if not 0 < tol < 0.5:
        raise ValueError("tol must lie in (0, 0.5)")
    if family is None:
        family = default_family(f.grid)
    trajectory = []
    prev = None
    est = None
    for step in range(max_refinements + 1):
        est = morrey_norm(f, u, p, family)
        trajectory.append((step, est.value))
        if est.value == 0.0:
            break
        interior = est.details["argmax_radius"] > 2.0 * family.r_lo * (1 + 1e-12)
        if prev is not None and interior and (est.value - prev) <= tol * prev:
            break
        if not family.can_refine() or step == max_refinements:
            if interior and prev is None:
                break
            est.partials = trajectory
            est.truncation.update(refinements=step, converged=False)
            raise MorreyNonConvergence(
                f"Morrey estimate not stable after {step} refinements "
                f"(last value {est.value:.6g}, maximizing radius {est.details['argmax_radius']:.3g})",
                est,
            )
        prev = est.value
        family = family.refine()
    est.partials = trajectory
    est.truncation.update(refinements=len(trajectory) - 1, converged=True)
    return est
