"""Higher-order differences and the difference-based Besov-Morrey quasi-norms.

Four functionals are provided:

* :func:`diff_norm_va`, the ball-average norm with inner exponent ``v`` and
  outer limit ``a``;
* :func:`diff_norm_club` and :func:`diff_norm_spade`, the dyadic-sum versions
  (they differ only in their first term);
* :func:`modulus_norm`, built from a modulus of smoothness.

The t-integrals are discretized on a geometric ladder ``t_j = 2**(-j/L)``.
Each node stands for the block ``[t_j 2**(-1/(2L)), t_j 2**(1/(2L)))`` in
``log t`` and carries the weight ``ln 2 / L``. With ``L = 1`` this is the
dyadic ladder; refinement doubles ``L``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _backend
from ._kernels_py import _shifted
from .bands import lq_combine
from .gridfn import Grid, SampledFunction
from .morrey import NormEstimate, _largest_below, default_family, morrey_norm, morrey_of_weights


def binomial_coefficients(N: int) -> np.ndarray:
    """Signed weights ``(-1)**(N-k) C(N, k)``, k = 0..N."""
    return np.array([(-1.0) ** (N - k) * math.comb(N, k) for k in range(N + 1)])


@dataclass(frozen=True)
class Level:
    """One node of the t-ladder."""

    j: int
    t: float
    weight: float
    resolved: bool


@dataclass(frozen=True)
class DiffParams:
    """Difference order, inner exponent, outer limit and t-ladder of a difference norm.

    Parameters
    ----------
    N : int
        Order of the differences.
    v : float
        Inner exponent of the h-average, ``0 < v <= inf``.
    a : float
        Upper limit of the t-integral, ``1 <= a <= inf``.
    j_min, j_max : int, optional
        Ladder index range; ``t_j = 2**(-j / levels_per_octave)``. By default
        the ladder runs from the largest admissible t (``t <= a`` and
        ``N t <= R/2``) down to the grid resolution ``2 dx``.
    levels_per_octave : int
        Ladder density; 1 gives the dyadic ladder.
    max_offsets : int
        Above this many offsets h in a ball, a stratified subsample is used.
    seed : int
        Seed of the subsample.
    """

    N: int
    v: float = 2.0
    a: float = math.inf
    j_min: int | None = None
    j_max: int | None = None
    levels_per_octave: int = 1
    max_offsets: int = 4096
    seed: int = 0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValueError("N must be a positive integer")
        if not self.v > 0:
            raise ValueError("v must be positive")
        if not self.a >= 1:
            raise ValueError("a must satisfy 1 <= a <= inf")
        if self.levels_per_octave < 1 or self.max_offsets < 1:
            raise ValueError("levels_per_octave and max_offsets must be positive")
        if self.j_min is not None and self.j_max is not None and self.j_min > self.j_max:
            raise ValueError("need j_min <= j_max")

    def t_max(self, grid: Grid) -> float:
        return min(self.a, grid.R / (2.0 * self.N))

    def ladder(self, grid: Grid) -> list:
        """Levels from the coarsest to the finest t (t strictly decreasing)."""
        L = self.levels_per_octave
        j_lo = self.j_min
        if j_lo is None:
            j_lo = math.ceil(-L * math.log2(self.t_max(grid)) - 1e-9)
        j_hi = self.j_max
        if j_hi is None:
            j_hi = math.floor(-L * math.log2(2.0 * grid.dx) + 1e-9)
        out = []
        for j in range(j_lo, j_hi + 1):
            t = 2.0 ** (-j / L)
            if t > self.t_max(grid) * (1 + 1e-12):
                continue
            out.append(Level(j, t, math.log(2.0) / L, t >= 2.0 * grid.dx * (1 - 1e-12)))
        return out

    def refine(self) -> "DiffParams":
        """Twice as many levels per octave over the same t-range."""
        scale = lambda j: None if j is None else 2 * j
        return replace(self, levels_per_octave=2 * self.levels_per_octave,
                       j_min=scale(self.j_min), j_max=scale(self.j_max))


# --- differences ----------------------------------------------------------

def finite_difference(f: SampledFunction, h, N: int) -> SampledFunction:
    """``sum_k (-1)**(N-k) C(N,k) f(x + k h)`` at every sample (binomial form)."""
    grid = f.grid
    steps = grid.steps(h)
    if N < 1:
        raise ValueError("N must be positive")
    hlen = float(np.linalg.norm(steps * grid.dx))
    if N * hlen > grid.R / 2 * (1 + 1e-12):
        raise ValueError(f"N|h| = {N * hlen} exceeds R/2 = {grid.R / 2}: differences would wrap")
    coef = binomial_coefficients(N)
    out = np.zeros(grid.shape, dtype=np.complex128)
    for k, c in enumerate(coef):
        out += c * _shifted(f.values, k * steps)
    return SampledFunction(grid, out, f.support_radius + N * hlen, margin=False)


def offsets_in_ball(grid: Grid, t: float, closed: bool = False) -> np.ndarray:
    """Nonzero integer step vectors k with ``|k dx| < t`` (``<= t`` if closed).

    Ordered by length, ties broken lexicographically, shape ``(m, d)``.
    """
    dx = grid.dx
    kmax = int(math.floor(t / dx + 1e-9))
    ks = np.arange(-kmax, kmax + 1, dtype=np.int64)
    if grid.d == 1:
        pts = ks[:, None]
    else:
        a, b = np.meshgrid(ks, ks, indexing="ij")
        pts = np.stack([a.ravel(), b.ravel()], axis=1)
    r2 = np.sum((pts * dx) ** 2, axis=1)
    keep = (r2 <= t * t * (1 + 1e-12)) if closed else (r2 < t * t * (1 - 1e-12))
    keep &= np.any(pts != 0, axis=1)
    pts, r2 = pts[keep], r2[keep]
    order = np.lexsort(tuple(pts[:, i] for i in reversed(range(grid.d))) + (r2,))
    return np.ascontiguousarray(pts[order])


def stratified_subsample(offsets: np.ndarray, m: int, seed: int):
    """Pick one offset per stratum of a length-ordered offset list.

    Returns ``(chosen, weights)`` where each weight is the size of its stratum,
    so weighted sums over ``chosen`` are unbiased for sums over ``offsets``.
    """
    if len(offsets) <= m:
        return offsets, np.ones(len(offsets))
    rng = np.random.default_rng(seed)
    strata = np.array_split(np.arange(len(offsets)), m)
    pick = np.array([s[rng.integers(len(s))] for s in strata])
    weights = np.array([float(len(s)) for s in strata])
    return np.ascontiguousarray(offsets[pick]), weights


def _power_sum(values, offsets, coef, v):
    kern = _backend.kernels
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    if values.ndim == 1:
        return kern.diff_power_sum_1d(values, np.ascontiguousarray(offsets[:, 0]), coef, v)
    return kern.diff_power_sum_2d(values, offsets, coef, v)


def _weighted_power_sum(values, offsets, weights, coef, v):
    """Sum of ``w_h |D_h|**v`` (max of ``|D_h|`` if v is inf), grouped by weight."""
    if math.isinf(v):
        return _power_sum(values, offsets, coef, v)
    total = np.zeros(values.shape)
    for w in np.unique(weights):
        total += w * _power_sum(values, offsets[weights == w], coef, v)
    return total


def _ball_avg_values(f: SampledFunction, t: float, params: DiffParams) -> np.ndarray:
    grid = f.grid
    offs = offsets_in_ball(grid, t)
    if len(offs) == 0:
        raise ValueError(f"t = {t} is below the grid resolution: no nonzero offsets in B(0, t)")
    offs, w = stratified_subsample(offs, params.max_offsets, params.seed)
    coef = binomial_coefficients(params.N)
    vals = np.ascontiguousarray(f.values)
    acc = _weighted_power_sum(vals, offs, w, coef, float(params.v))
    if math.isinf(params.v):
        return acc
    return (acc * grid.cell_volume) ** (1.0 / params.v)


def _check_reach(grid, t, N):
    if N * t > grid.R / 2 * (1 + 1e-12):
        raise ValueError(f"N t = {N * t} exceeds R/2 = {grid.R / 2}: differences would wrap")


def ball_avg_difference(f: SampledFunction, t: float, params: DiffParams) -> SampledFunction:
    """``(int_{B(0,t)} |Delta^N_h f(x)|^v dh)^(1/v)`` at every sample (max over h if v = inf).

    The h-integral is the lattice sum over grid-aligned ``h`` with ``|h| < t``
    times ``dx^d``; large offset sets are replaced by a stratified subsample.
    """
    _check_reach(f.grid, t, params.N)
    vals = _ball_avg_values(f, t, params)
    return SampledFunction(f.grid, vals, f.support_radius + params.N * t, margin=False)


# --- norms ----------------------------------------------------------------

def _resolved_levels(f, params):
    levels = params.ladder(f.grid)
    used = [lv for lv in levels if lv.resolved]
    flagged = [lv.t for lv in levels if not lv.resolved]
    for lv in used:
        _check_reach(f.grid, lv.t, params.N)
    return used, flagged


def _integral_estimate(first, levels, terms, q, extra_trunc, extra_details):
    """Assemble ``first + (sum_j w_j term_j^q)^(1/q)`` with both partial trajectories."""
    terms = np.asarray(terms, dtype=np.float64)
    weights = np.array([lv.weight for lv in levels])
    if math.isinf(q):
        contrib = terms
        tail = np.maximum.accumulate(contrib) if len(terms) else contrib
        head = np.maximum.accumulate(contrib[::-1])[::-1] if len(terms) else contrib
        root = lambda x: x
    else:
        contrib = weights * terms**q
        tail = np.cumsum(contrib)
        head = np.cumsum(contrib[::-1])[::-1]
        root = lambda x: x ** (1.0 / q)
    total = float(root(tail[-1])) if len(terms) else 0.0
    partials = [(lv.j, first + float(root(c))) for lv, c in zip(levels, tail)]
    head_partials = [(lv.t, first + float(root(c))) for lv, c in zip(levels, head)][::-1]
    details = {
        "first_term": first,
        "integral_term": total,
        "levels": [{"j": lv.j, "t": lv.t, "term": float(x)} for lv, x in zip(levels, terms)],
        "head_partials": head_partials,
    }
    details.update(extra_details)
    return NormEstimate(first + total, extra_trunc, partials, details)


def _ladder_trunc(params, levels, flagged, family):
    return {
        "N": params.N,
        "v": params.v,
        "a": params.a,
        "levels_per_octave": params.levels_per_octave,
        "t_range": [levels[-1].t, levels[0].t] if levels else [],
        "flagged_t": flagged,
        "family": family.describe(),
    }


def _check_exponents(u, p, q):
    if not 0 < p <= u < math.inf:
        raise ValueError(f"need 0 < p <= u < inf, got p={p}, u={u}")
    if not q > 0:
        raise ValueError("q must be positive")


def diff_norm_va(f: SampledFunction, s: float, u: float, p: float, q: float,
                 params: DiffParams, family=None) -> NormEstimate:
    """Ball-average difference norm with inner exponent ``params.v`` and limit ``params.a``.

    ``||f|M|| + (sum_j t_j^(-sq - dq/v) ||G_{t_j}|M||^q ln2/L)^(1/q)`` where
    ``G_t`` is :func:`ball_avg_difference`; max over levels if ``q = inf``.

    ``partials`` accumulates from the coarsest level towards small t (the
    small-t tail); ``details["head_partials"]`` accumulates from the finest
    level upwards and is indexed by the upper cut-off T (the large-t head).
    """
    _check_exponents(u, p, q)
    if family is None:
        family = default_family(f.grid)
    d, v = f.grid.d, params.v
    levels, flagged = _resolved_levels(f, params)
    first = morrey_norm(f, u, p, family).value
    dv = 0.0 if math.isinf(v) else d / v
    morrey_vals = []
    for lv in levels:
        g = _ball_avg_values(f, lv.t, params)
        morrey_vals.append(morrey_of_weights(g**p, family, u, p).value)
    terms = [lv.t ** (-s - dv) * m for lv, m in zip(levels, morrey_vals)]
    trunc = _ladder_trunc(params, levels, flagged, family)
    trunc.update(s=s, u=u, p=p, q=q)
    return _integral_estimate(first, levels, terms, q, trunc, {"morrey": morrey_vals})


def local_average(f: SampledFunction, v: float, radius: float = 1.0) -> np.ndarray:
    """``(int_{B(x, radius)} |f(y)|^v dy)^(1/v)`` at every sample (local max if v = inf)."""
    grid = f.grid
    if math.isinf(v):
        offs = offsets_in_ball(grid, radius)
        zero = np.zeros((1, grid.d), dtype=np.int64)
        offs = np.concatenate([zero, offs])
        return _power_sum(np.ascontiguousarray(f.values), offs, np.ones(1), math.inf)
    weights = np.abs(f.values) ** v
    n = grid.n
    if grid.d == 1:
        k = _largest_below(radius, grid.dx)
        prefix = np.concatenate([[0.0], np.cumsum(weights)])
        idx = np.arange(n)
        sums = prefix[np.clip(idx + k + 1, 0, n)] - prefix[np.clip(idx - k, 0, n)]
    else:
        from .morrey import ExplicitFamily, ball_sums

        a, b = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        fam = ExplicitFamily(grid, tuple(zip(a.ravel(), b.ravel())), (radius,))
        sums = ball_sums(weights, fam)[0].reshape(grid.shape)
    return (np.maximum(sums, 0.0) * grid.cell_volume) ** (1.0 / v)


def _dyadic_sum_norm(f, first, s, u, p, q, v, N, family, j_max, which):
    _check_exponents(u, p, q)
    grid = f.grid
    params = DiffParams(N=N, v=v, a=1.0, j_min=1, j_max=j_max)
    levels, flagged = _resolved_levels(f, params)
    dv = 0.0 if math.isinf(v) else grid.d / v
    morrey_vals = []
    for lv in levels:
        g = _ball_avg_values(f, lv.t, params)
        morrey_vals.append(morrey_of_weights(g**p, family, u, p).value)
    terms = [2.0 ** (lv.j * (s + dv)) * m for lv, m in zip(levels, morrey_vals)]
    seq = [first] + terms
    partials = [(lv.j, lq_combine(seq[: i + 2], q)) for i, lv in enumerate(levels)]
    trunc = _ladder_trunc(params, levels, flagged, family)
    trunc.update(s=s, u=u, p=p, q=q, variant=which)
    details = {
        "first_term": first,
        "levels": [{"j": lv.j, "t": lv.t, "term": float(x)} for lv, x in zip(levels, terms)],
        "morrey": morrey_vals,
    }
    return NormEstimate(lq_combine(seq, q), trunc, partials, details)


def diff_norm_club(f: SampledFunction, s: float, u: float, p: float, q: float, v: float, N: int,
                   family=None, j_max: int | None = None) -> NormEstimate:
    """Dyadic-sum difference norm whose first term is the local L_v average over B(x, 1).

    ``(||A_v f|M||^q + sum_{j>=1} 2^(jq(s + d/v)) ||G_{2^-j}|M||^q)^(1/q)``.
    """
    if family is None:
        family = default_family(f.grid)
    first = morrey_of_weights(local_average(f, v) ** p, family, u, p).value
    return _dyadic_sum_norm(f, first, s, u, p, q, v, N, family, j_max, "club")


def diff_norm_spade(f: SampledFunction, s: float, u: float, p: float, q: float, v: float, N: int,
                    family=None, j_max: int | None = None) -> NormEstimate:
    """As :func:`diff_norm_club` with first term ``||f|M^u_p||``."""
    if family is None:
        family = default_family(f.grid)
    first = morrey_norm(f, u, p, family).value
    return _dyadic_sum_norm(f, first, s, u, p, q, v, N, family, j_max, "spade")


def difference_morrey_profile(f: SampledFunction, u: float, p: float, N: int, t_max: float,
                              family=None, max_offsets: int = 4096, seed: int = 0):
    """``(|h|, ||Delta^N_h f|M^u_p||)`` for lattice offsets ``0 < |h| <= t_max``.

    Offsets come in order of increasing length (stratified subsample beyond
    ``max_offsets``).
    """
    if family is None:
        family = default_family(f.grid)
    grid = f.grid
    _check_reach(grid, t_max, N)
    offs = offsets_in_ball(grid, t_max, closed=True)
    offs, _ = stratified_subsample(offs, max_offsets, seed)
    coef = binomial_coefficients(N)
    vals = np.ascontiguousarray(f.values)
    lengths = np.sqrt(np.sum((offs * grid.dx) ** 2, axis=1))
    norms = np.empty(len(offs))
    for i, off in enumerate(offs):
        w = _power_sum(vals, off[None, :], coef, float(p))
        norms[i] = morrey_of_weights(w, family, u, p).value
    return lengths, norms


def modulus_norm(f: SampledFunction, s: float, u: float, p: float, q: float, N: int,
                 params: DiffParams | None = None, family=None) -> NormEstimate:
    """Modulus-of-smoothness norm ``||f|M|| + (sum_j t_j^(-sq) w_j(t_j)^q ln2/L)^(1/q)``.

    ``w(t) = max_{|h| <= t} ||Delta^N_h f|M^u_p||`` over lattice offsets; each
    difference is normed once and ``w`` is a running max over offset length.
    """
    _check_exponents(u, p, q)
    if params is None:
        params = DiffParams(N=N)
    if params.N != N:
        params = replace(params, N=N)
    if family is None:
        family = default_family(f.grid)
    levels, flagged = _resolved_levels(f, params)
    first = morrey_norm(f, u, p, family).value
    if levels:
        lengths, norms = difference_morrey_profile(
            f, u, p, N, levels[0].t, family, params.max_offsets, params.seed
        )
        running = np.maximum.accumulate(norms)
        omega = [float(running[np.searchsorted(lengths, lv.t * (1 + 1e-12), side="right") - 1])
                 for lv in levels]
    else:
        omega = []
    terms = [lv.t ** (-s) * w for lv, w in zip(levels, omega)]
    trunc = _ladder_trunc(params, levels, flagged, family)
    trunc.update(s=s, u=u, p=p, q=q)
    return _integral_estimate(first, levels, terms, q, trunc, {"modulus": omega})
