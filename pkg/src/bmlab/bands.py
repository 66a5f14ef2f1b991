"""Smooth dyadic decomposition of unity and the Littlewood-Paley Besov-Morrey norm.

Blocks are realized with the DFT on the grid: forward transform, multiply by
the band profile on the dual (angular) frequency lattice, inverse transform.
The spatial zero-padding margin of :class:`~bmlab.gridfn.SampledFunction`
keeps the implicit periodization of the DFT away from the support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gridfn import Grid, SampledFunction
from .morrey import NormEstimate, default_family, morrey_norm
from .profiles import PHI0_INNER, PHI0_OUTER, phi0


def frequency_radius(grid: Grid) -> np.ndarray:
    """|xi| on the DFT dual lattice, angular frequencies ``2 pi m / (n dx)``."""
    xi = 2.0 * np.pi * np.fft.fftfreq(grid.n, d=grid.dx)
    if grid.d == 1:
        return np.abs(xi)
    a, b = np.meshgrid(xi, xi, indexing="ij")
    return np.sqrt(a * a + b * b)


def nyquist_radius(grid: Grid) -> float:
    return math.pi / grid.dx


def max_bands(grid: Grid) -> int:
    """Largest K_max with 3 * 2**(K_max - 1) below the Nyquist radius."""
    k = 0
    while PHI0_OUTER * 2.0 ** (k + 1) < nyquist_radius(grid):
        k += 1
    return k


@dataclass(frozen=True, eq=False)
class DyadicPartition:
    """The profiles phi_0, ..., phi_{K_max} sampled on the frequency lattice."""

    grid: Grid
    K_max: int
    bands: np.ndarray  # shape (K_max + 1,) + grid.shape
    xi: np.ndarray

    def __len__(self):
        return self.K_max + 1

    def residual(self) -> float:
        """max |sum_k phi_k - 1| over frequencies with |xi| <= 2**(K_max - 1)."""
        mask = self.xi <= 2.0 ** (self.K_max - 1)
        return float(np.max(np.abs(self.bands.sum(axis=0)[mask] - 1.0)))

    def annulus(self, k: int) -> np.ndarray:
        """Mask of the closed annulus that must contain supp phi_k."""
        if k == 0:
            return self.xi <= PHI0_OUTER
        return (self.xi >= PHI0_INNER * 2.0 ** (k - 1)) & (self.xi <= PHI0_OUTER * 2.0**k)


def build_partition(grid: Grid, K_max: int | None = None) -> DyadicPartition:
    if K_max is None:
        K_max = max_bands(grid)
    if K_max < 0:
        raise ValueError("K_max must be nonnegative")
    top = PHI0_OUTER * 2.0**K_max
    if not top < nyquist_radius(grid):
        raise ValueError(
            f"K_max={K_max} aliases: band support reaches {top:.4g} but the grid's "
            f"Nyquist radius is {nyquist_radius(grid):.4g} (max K_max = {max_bands(grid)})"
        )
    xi = frequency_radius(grid)
    prev = phi0(xi)
    bands = [prev]
    for k in range(1, K_max + 1):
        cur = phi0(xi * 2.0**-k)
        bands.append(cur - prev)
        prev = cur
    return DyadicPartition(grid, K_max, np.stack(bands), xi)


def _spectrum(f: SampledFunction) -> np.ndarray:
    return np.fft.fftn(f.values)


def _project_spectrum(spec, partition, k) -> np.ndarray:
    return np.fft.ifftn(spec * partition.bands[k])


def band_project(f: SampledFunction, partition: DyadicPartition, k: int) -> SampledFunction:
    """``F^{-1}[phi_k F f]``; the result is not compactly supported (margin waived)."""
    if not 0 <= k <= partition.K_max:
        raise ValueError(f"band index {k} outside 0..{partition.K_max}")
    if f.grid != partition.grid:
        raise ValueError("partition was built for a different grid")
    vals = _project_spectrum(_spectrum(f), partition, k)
    return SampledFunction(f.grid, vals, f.grid.R * math.sqrt(f.grid.d), margin=False)


def all_blocks(f: SampledFunction, partition: DyadicPartition) -> list:
    spec = _spectrum(f)
    rad = f.grid.R * math.sqrt(f.grid.d)
    return [
        SampledFunction(f.grid, _project_spectrum(spec, partition, k), rad, margin=False)
        for k in range(partition.K_max + 1)
    ]


def lq_combine(terms, q) -> float:
    terms = np.asarray(terms, dtype=np.float64)
    if terms.size == 0:
        return 0.0
    if math.isinf(q):
        return float(terms.max())
    return float(np.sum(terms**q) ** (1.0 / q))


def besov_morrey_norm(f: SampledFunction, partition: DyadicPartition, s: float, u: float,
                      p: float, q: float, family=None) -> NormEstimate:
    """``(sum_k 2^{ksq} ||F^{-1}[phi_k F f] | M^u_p||^q)^{1/q}``, max over k if q = inf.

    ``partials`` holds the cumulative value after each band; ``details`` holds
    the weighted block values ``2^{ks} ||P_k f||`` and the raw Morrey values.
    """
    if not 0 < p <= u < math.inf:
        raise ValueError(f"need 0 < p <= u < inf, got p={p}, u={u}")
    if not q > 0:
        raise ValueError("q must be positive")
    if family is None:
        family = default_family(f.grid)
    morrey_vals = [morrey_norm(b, u, p, family).value for b in all_blocks(f, partition)]
    blocks = [2.0 ** (k * s) * m for k, m in enumerate(morrey_vals)]
    partials = [(k, lq_combine(blocks[: k + 1], q)) for k in range(len(blocks))]
    trunc = {"K_max": partition.K_max, "family": family.describe(), "s": s, "u": u, "p": p, "q": q}
    return NormEstimate(
        partials[-1][1], trunc, partials, {"blocks": blocks, "morrey": morrey_vals}
    )


def block_slope(blocks, k_from: int, k_to: int) -> float:
    """Least-squares slope of log2(block) against k over bands ``k_from..k_to``."""
    ks = np.arange(k_from, k_to + 1)
    vals = np.log2(np.asarray(blocks, dtype=np.float64)[ks])
    return float(np.polyfit(ks, vals, 1)[0])
