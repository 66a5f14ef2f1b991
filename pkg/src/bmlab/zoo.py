"""Explicit test functions, counterexamples, atoms and the sequence-space norm.

Contents
--------
* ``f_{alpha,delta}`` (a cut-off power singularity with a log factor) and its
  closed-form membership rule;
* the plateau bump and the exponential bump used by the divergence scenarios;
* the lacunary (Oswald-type) sum with its scale-separated evaluator;
* (K, L)-atoms, their validation, coefficient sequences and the sequence norm.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bands import DyadicPartition, besov_morrey_norm, build_partition, lq_combine
from .diffnorm import DiffParams, ball_avg_difference
from .gridfn import Grid, SampledFunction, make_grid
from .morrey import BallFamily, NormEstimate, default_family, morrey_norm
from .profiles import interval_bump, radial_cutoff

# --- singular functions -----------------------------------------------------


@dataclass(frozen=True)
class SingularFnConfig:
    """Parameters of ``rho(x) |x|^alpha (-ln|x|)^(-delta)``.

    ``rho`` equals 1 on ``B(0, theta)`` and vanishes outside ``B(0, 2 theta)``.
    ``p``, when given, is the integrability exponent the function is meant
    for; ``alpha <= -d/p`` then triggers a warning.
    """

    alpha: float
    delta: float = 0.0
    theta: float = 0.125
    p: float | None = None

    def __post_init__(self):
        if not self.alpha < 0:
            raise ValueError("alpha must be negative")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if not 0 < self.theta < 0.5:
            raise ValueError("theta must lie in (0, 1/2) so that -ln|x| > 0 on the support")


def _singular_profile(r, cfg: SingularFnConfig):
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    inside = (r > 0) & (r < 2 * cfg.theta)
    ri = r[inside]
    val = ri**cfg.alpha
    if cfg.delta:
        val = val * (-np.log(ri)) ** (-cfg.delta)
    out[inside] = val * radial_cutoff(ri, cfg.theta, 2 * cfg.theta)
    return out


def make_f_alpha_delta(grid: Grid, cfg: SingularFnConfig) -> SampledFunction:
    """Sample the singular function; support radius ``2 theta``.

    Use an offset grid so that no sample sits at the origin. On a centred grid
    the sample at ``x = 0`` is set to the profile value at ``|x| = dx/2``.
    """
    if 2 * cfg.theta > grid.R / 4:
        raise ValueError(f"2 theta = {2 * cfg.theta} exceeds R/4 = {grid.R / 4}")
    if cfg.p is not None and cfg.alpha <= -grid.d / cfg.p:
        warnings.warn(
            f"alpha = {cfg.alpha} <= -d/p = {-grid.d / cfg.p}: |f|^p is not integrable near 0",
            RuntimeWarning,
            stacklevel=2,
        )
    r = grid.radius()
    vals = _singular_profile(r, cfg)
    vals[r == 0] = _singular_profile(np.array([grid.dx / 2]), cfg)[0]
    return SampledFunction(grid, vals, 2 * cfg.theta)


def membership_oracle(s, u, p, q, alpha, delta, d: int = 1) -> bool:
    """Closed-form membership of ``f_{alpha,delta}`` in the Besov-Morrey space.

    Member iff ``s < d/u + alpha``, or ``s = d/u + alpha`` together with
    ``q = inf`` (when ``delta = 0``) or ``delta q > 1`` (when ``delta > 0``).
    """
    if not s > 0:
        raise ValueError("the rule is stated for s > 0")
    if not 1 <= p <= u < math.inf:
        raise ValueError("the rule is stated for 1 <= p <= u < inf")
    if not q > 0 or not alpha < 0 or delta < 0:
        raise ValueError("need q > 0, alpha < 0, delta >= 0")
    threshold = d / u + alpha
    if math.isclose(s, threshold, rel_tol=0.0, abs_tol=1e-12):
        if delta == 0:
            return math.isinf(q)
        return delta * q > 1
    return s < threshold


# --- bumps for the divergence scenarios -------------------------------------


def make_plateau_bump(grid: Grid) -> SampledFunction:
    """Smooth radial bump equal to 1 on ``|x| <= 1`` and 0 on ``|x| >= 2``."""
    return SampledFunction(grid, radial_cutoff(grid.radius(), 1.0, 2.0), 2.0)


def make_exp_bump(grid: Grid, N: int) -> SampledFunction:
    """``exp(x_1 + ... + x_d)`` on ``B(0, 2N+2)``, smoothly cut off to vanish beyond ``3N+3``."""
    if N < 1:
        raise ValueError("N must be positive")
    coords = grid.coords()
    vals = np.exp(sum(coords)) * radial_cutoff(grid.radius(), 2.0 * N + 2, 3.0 * N + 3)
    return SampledFunction(grid, vals, 3.0 * N + 3)


# --- moment-corrected profiles ----------------------------------------------


def moment_polynomial(y, weight, L):
    """Polynomial ``P`` of degree ``L+1`` with ``sum weight * P * y**i = 0`` for ``i <= L``.

    Obtained by Gram-Schmidt of ``y**(L+1)`` against ``1, ..., y**L`` in the
    discrete inner product with weight ``weight`` on the nodes ``y``. The
    returned array holds ``P`` at the nodes, scaled to max |P * weight| = 1.
    """
    y = np.asarray(y, dtype=np.float64)
    if L < 0:
        return np.ones_like(y)
    c = np.sum(weight * y) / np.sum(weight)
    z = y - c
    basis = []
    for i in range(L + 2):
        b = z**i
        for e in basis:
            b = b - np.sum(weight * b * e) / np.sum(weight * e * e) * e
        basis.append(b)
    P = basis[-1]
    return P / np.max(np.abs(P * weight))


def _corrected_bump_1d(y, width, L):
    b = interval_bump(y, width)
    if L < 0:
        return b
    return b * moment_polynomial(y, b, L)


# --- the lacunary sum -------------------------------------------------------


@dataclass(frozen=True)
class OswaldConfig:
    """Lacunary sum ``sum_k a_k phi(2^{n_k} x - x_k)``.

    ``n_k = r(k-1) + 2``, ``x_k = anchor (1, ..., 1)`` with default anchor
    ``32**(r-2)``, ``a_k = 2**(n_k (d/u - N))``. The profile ``phi`` is a tensor
    of interval bumps on ``(0, beta)^d`` (``beta = min(1, d**-1/2)``) times a
    polynomial factor giving vanishing moments up to order ``L``.
    """

    r: int = 5
    N: int = 1
    u: float = 2.0
    d: int = 1
    k_max: int | None = None
    anchor: float | None = None
    L: int | None = None
    p: float | None = None

    def __post_init__(self):
        if int(self.r) != self.r or self.r <= 4:
            raise ValueError("r must be an integer > 4")
        if 2 ** (self.r + 1) < self.N + 4:
            raise ValueError("need 2**(r+1) >= N + 4")
        if self.N < 1 or self.d not in (1, 2):
            raise ValueError("need N >= 1 and d in {1, 2}")
        if self.k_max is not None and self.k_max < 1:
            raise ValueError("k_max must be positive")

    @property
    def anchor_value(self) -> float:
        return float(32 ** (self.r - 2)) if self.anchor is None else float(self.anchor)

    @property
    def moment_order(self) -> int:
        if self.L is not None:
            return self.L
        p = self.p if self.p is not None else self.u
        sigma_p = self.d * max(0.0, 1.0 / p - 1.0)
        return max(-1, math.ceil(sigma_p - self.N - 1e-12))

    @property
    def beta(self) -> float:
        return min(1.0, 1.0 / math.sqrt(self.d))

    def n(self, k: int) -> int:
        return self.r * (k - 1) + 2

    def amplitude(self, k: int) -> float:
        return 2.0 ** (self.n(k) * (self.d / self.u - self.N))

    def x(self, k: int) -> np.ndarray:
        return np.full(self.d, self.anchor_value)

    def profile_1d(self, y):
        return _corrected_bump_1d(y, self.beta, self.moment_order)

    def phi(self, *coords):
        out = np.ones(np.broadcast(*coords).shape)
        for c in coords:
            out = out * self.profile_1d(c)
        return out

    def support_radius(self, k_max: int) -> float:
        far = max(2.0 ** -self.n(k) * (self.anchor_value + self.beta) for k in range(1, k_max + 1))
        return math.sqrt(self.d) * far


def max_resolved_level(grid: Grid, cfg: OswaldConfig) -> int:
    """Largest k with ``2**-n_k >= 4 dx`` (0 if even k = 1 is unresolved)."""
    k = 0
    while 2.0 ** -cfg.n(k + 1) >= 4 * grid.dx:
        k += 1
    return k


def make_oswald(grid: Grid, cfg: OswaldConfig) -> SampledFunction:
    """Sample the truncated lacunary sum ``k = 1..k_max`` on ``grid``."""
    top = max_resolved_level(grid, cfg)
    k_max = cfg.k_max if cfg.k_max is not None else top
    if k_max < 1 or k_max > top:
        raise ValueError(
            f"grid (dx = {grid.dx}) resolves only k <= {top}; level n_{k_max} = "
            f"{cfg.n(max(k_max, 1))} needs 2^-n >= 4 dx"
        )
    coords = grid.coords()
    vals = np.zeros(grid.shape)
    for k in range(1, k_max + 1):
        scale = 2.0 ** cfg.n(k)
        shifted = [scale * c - xk for c, xk in zip(coords, cfg.x(k))]
        vals = vals + cfg.amplitude(k) * cfg.phi(*shifted)
    rad = cfg.support_radius(k_max)
    return SampledFunction(grid, vals, rad * (1 + 1e-9))


def oswald_piece_masks(grid: Grid, cfg: OswaldConfig, k_max: int) -> list:
    """Boolean masks of the nonzero samples of each summand."""
    coords = grid.coords()
    masks = []
    for k in range(1, k_max + 1):
        scale = 2.0 ** cfg.n(k)
        shifted = [scale * c - xk for c, xk in zip(coords, cfg.x(k))]
        masks.append(cfg.phi(*shifted) != 0)
    return masks


def oswald_profile_check(cfg: OswaldConfig, n_points: int = 4096, quantile: float = 0.45) -> dict:
    """Measure a set ``D`` where all derivatives of order ``<= N`` of phi stay above C > 0.

    ``C`` is the ``quantile`` of ``min_gamma |D^gamma phi|`` over the support, so
    ``D = {min_gamma |D^gamma phi| > C}`` covers a ``1 - quantile`` fraction
    of the support (1-d profile; tensor factors multiply).
    """
    y = (np.arange(n_points) + 0.5) * cfg.beta / n_points
    h = cfg.beta / n_points
    vals = cfg.profile_1d(y)
    derivs = [vals]
    cur = vals
    for _ in range(cfg.N):
        cur = np.gradient(cur, h)
        derivs.append(cur)
    low = np.min(np.abs(np.stack(derivs)), axis=0)
    C = float(np.quantile(low, quantile))
    frac = float(np.mean(low > C))
    return {"C": C, "fraction": frac, "ok": C > 0 and frac > 0.5}


@dataclass(frozen=True)
class OswaldScaleProfile:
    """Per-summand contribution ``c(tau)`` to the p-th power of the difference norm.

    For one summand ``a_k phi(2^{n_k} x - x_k)`` with ``p = u`` and
    ``tau = 2^{n_k} t``, the level term ``t^{-Np - dp/v} ||G_t|L_p||^p``
    equals ``c(tau) = tau^{-Np - dp/v} ||Phi_tau|L_p||^p`` where ``Phi_tau``
    is the ball average of differences of ``phi`` itself: the amplitude,
    dilation and Jacobian factors cancel exactly. Below the reference
    grid's resolution ``c`` is replaced by its small-tau limit
    ``(2/(Nv+1))^{p/v} ||phi^{(N)}|L_p||^p``.
    """

    cfg: OswaldConfig
    v: float
    p: float
    taus: np.ndarray
    values: np.ndarray
    c0: float

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=np.float64)
        lt = np.log2(np.maximum(tau, 1e-300))
        inner = np.interp(lt, np.log2(self.taus), self.values)
        return np.where(tau < self.taus[0], self.c0, inner)


def oswald_scale_profile(cfg: OswaldConfig, v: float, p: float | None = None,
                         n_ref: int = 8192, levels_per_octave: int = 4) -> OswaldScaleProfile:
    """Tabulate ``c(tau)`` on a reference grid for ``phi`` (one-dimensional)."""
    if cfg.d != 1:
        raise ValueError("the scale-separated evaluator is one-dimensional")
    p = cfg.u if p is None else p
    if not math.isclose(p, cfg.u):
        raise ValueError("the scale-separated identity needs p = u")
    N = cfg.N
    R = 4.0
    grid = make_grid(1, R, n_ref)
    phi = SampledFunction.from_callable(grid, cfg.phi, cfg.beta)
    tau_hi = R / (2 * N)
    taus = 2.0 ** (np.arange(
        math.ceil(levels_per_octave * math.log2(2 * grid.dx)),
        math.floor(levels_per_octave * math.log2(tau_hi)) + 1,
    ) / levels_per_octave)
    vals = []
    params = DiffParams(N=N, v=v)
    dv = 0.0 if math.isinf(v) else 1.0 / v
    for tau in taus:
        g = ball_avg_difference(phi, tau, params)
        vals.append(tau ** (-N * p - p * dv) * np.sum(np.abs(g.values) ** p) * grid.dx)
    # small-tau limit from the N-th derivative on a finer sampling
    y = (np.arange(1 << 16) + 0.5) * cfg.beta / (1 << 16)
    h = cfg.beta / (1 << 16)
    der = cfg.profile_1d(y)
    for _ in range(N):
        der = np.gradient(der, h)
    if math.isinf(v):
        factor = 1.0
    else:
        factor = (2.0 / (N * v + 1.0)) ** (p / v)
    c0 = float(factor * np.sum(np.abs(der) ** p) * h)
    return OswaldScaleProfile(cfg, v, p, taus, np.array(vals), c0)


def oswald_difference_trajectory(cfg: OswaldConfig, l_values, profile: OswaldScaleProfile,
                                 tau_cap: float | None = None) -> NormEstimate:
    """Difference-norm lower bound of the lacunary sum truncated at ``K = l - 6`` summands.

    For ``q = inf`` and ``s = N`` the quantity is
    ``sup_t sum_{k <= K} c(2^{n_k} t)``, the p-th power of the t-supremum
    term. ``t`` ranges over ``2^{n_K} t`` in the profile's table (plus the
    limit ``t -> 0``); ``tau_cap`` bounds ``2^{n_K} t`` so that shifted
    supports of different summands stay disjoint.
    """
    cap = profile.taus[-1] if tau_cap is None else tau_cap
    tops = np.concatenate([[0.0], profile.taus[profile.taus <= cap]])
    partials = []
    best_tau = []
    for l in l_values:
        K = int(l) - 6
        if K < 1:
            raise ValueError("l must exceed 6")
        total = np.zeros(len(tops))
        for k in range(1, K + 1):
            total += profile(tops * 2.0 ** (cfg.n(k) - cfg.n(K)))
        i = int(np.argmax(total))
        partials.append((int(l), float(total[i])))
        best_tau.append(float(tops[i]))
    trunc = {"r": cfg.r, "N": cfg.N, "u": cfg.u, "v": profile.v, "tau_cap": float(cap),
             "n_tau": int(len(tops))}
    return NormEstimate(partials[-1][1], trunc, partials, {"argmax_tau": best_tau, "c0": profile.c0})


def oswald_block_values(cfg: OswaldConfig, k_max: int, s: float | None = None, p: float | None = None,
                        q: float = math.inf, points_per_cube: int = 16) -> list:
    """Atomic upper-bound block values ``2^{n_k(s - d/u)} a_k ||chi^{(u)}_{n_k,x_k}|M^u_p||``."""
    s = cfg.N if s is None else s
    p = cfg.u if p is None else p
    lam = CoefficientSequence(cfg.d)
    for k in range(1, k_max + 1):
        lam[cfg.n(k), tuple(int(round(v)) for v in cfg.x(k))] = cfg.amplitude(k)
    est = sequence_norm(lam, s, cfg.u, p, q, points_per_cube=points_per_cube)
    return est.details["blocks"]


# --- coefficient sequences --------------------------------------------------


class CoefficientSequence(dict):
    """Finitely supported coefficients ``lambda[(j, k)]`` with ``k`` a d-tuple of integers."""

    def __init__(self, d: int = 1, items=None):
        super().__init__()
        if d not in (1, 2):
            raise ValueError("d must be 1 or 2")
        self.d = d
        for key, val in (items or {}).items():
            self[key] = val

    def __setitem__(self, key, value):
        j, k = key
        k = (int(k),) if np.isscalar(k) else tuple(int(c) for c in k)
        if len(k) != self.d or int(j) != j or j < 0:
            raise ValueError(f"bad index {key!r} for d = {self.d}")
        super().__setitem__((int(j), k), complex(value))

    def levels(self) -> list:
        return sorted({j for j, _ in self})

    def scaled(self, c) -> "CoefficientSequence":
        return CoefficientSequence(self.d, {key: c * val for key, val in self.items()})


def _level_morrey(entries, d, u, p, points_per_cube, stride):
    """``||sum_k |lambda_k| chi_{Q_{0,k}} | M^u_p||`` on a level-0 grid."""
    ks = np.array([k for k, _ in entries], dtype=np.int64).reshape(-1, d)
    lo = ks.min(axis=0)
    rel = ks - lo
    extent = int(rel.max()) + 1
    half = max(2, extent)
    R = 2.0 ** math.ceil(math.log2(2.0 * math.sqrt(d) * (half + 1)))
    n = int(2 * R * points_per_cube)
    grid = make_grid(d, R, n)
    vals = np.zeros(grid.shape)
    m = points_per_cube
    origin = int(R * m) - (extent // 2) * m
    for (k, lam), r in zip(entries, rel):
        sl = tuple(slice(origin + c * m, origin + (c + 1) * m) for c in r)
        vals[sl] += abs(lam)
    f = SampledFunction(grid, vals, math.sqrt(d) * (extent // 2 + extent % 2 + 1), margin=False)
    fam = BallFamily(grid, stride=stride, shape="cube")
    return morrey_norm(f, u, p, fam).value


def sequence_norm(lam: CoefficientSequence, s: float, u: float, p: float, q: float,
                  points_per_cube: int = 16, stride: int = 4) -> NormEstimate:
    """Sequence-space quasi-norm with cube-mode Morrey estimation per level.

    ``(sum_j 2^{jq(s - d/u)} ||sum_k |lambda_{j,k}| chi^{(u)}_{j,k} | M^u_p||^q)^{1/q}``.
    Each level is dilated to unit cubes (``chi^{(u)}`` makes the dilation
    exact) and translated next to the origin, then evaluated on its own
    grid with ``points_per_cube`` samples per cube side.
    """
    if not 0 < p <= u < math.inf:
        raise ValueError(f"need 0 < p <= u < inf, got p={p}, u={u}")
    if points_per_cube % stride:
        raise ValueError("points_per_cube must be a multiple of stride")
    d = lam.d
    levels = lam.levels()
    blocks = []
    for j in levels:
        entries = [(k, v) for (jj, k), v in lam.items() if jj == j and v != 0]
        m = _level_morrey(entries, d, u, p, points_per_cube, stride) if entries else 0.0
        blocks.append(2.0 ** (j * (s - d / u)) * m)
    partials = [(j, lq_combine(blocks[: i + 1], q)) for i, j in enumerate(levels)]
    value = partials[-1][1] if partials else 0.0
    trunc = {"s": s, "u": u, "p": p, "q": q, "points_per_cube": points_per_cube}
    return NormEstimate(value, trunc, partials, {"levels": levels, "blocks": blocks})


# --- atoms ------------------------------------------------------------------


def cube_atom(grid: Grid, j: int, k, L: int = -1, amplitude: float = 1.0) -> SampledFunction:
    """Tensor bump supported in ``Q_{j,k}`` with discrete vanishing moments up to ``L``."""
    k = np.atleast_1d(np.asarray(k, dtype=np.float64))
    side = 2.0**-j
    if side < 8 * grid.dx:
        raise ValueError(f"level {j} is not resolved by dx = {grid.dx}")
    axis = grid.axis
    factors = []
    for kc in k:
        y = axis - kc * side
        b = interval_bump(y, side)
        if L >= 0:
            inside = b > 0
            prof = np.zeros_like(b)
            prof[inside] = b[inside] * moment_polynomial(y[inside] / side, b[inside], L)
            b = prof
        factors.append(b)
    vals = factors[0] if grid.d == 1 else np.multiply.outer(factors[0], factors[1])
    corner = k * side
    far = np.sqrt(np.sum(np.maximum(np.abs(corner), np.abs(corner + side)) ** 2))
    return SampledFunction(grid, amplitude * vals, float(far) * (1 + 1e-9), margin=False)


def _profile_derivative_bound(K: int, L: int, n: int = 1 << 14) -> float:
    """``max_{m <= K} sup |psi^{(m)}|`` for the unit-cube 1-d atom profile."""
    y = (np.arange(n) + 0.5) / n
    b = interval_bump(y)
    vals = b * moment_polynomial(y, b, L) if L >= 0 else b
    best = float(np.max(np.abs(vals)))
    cur = vals
    for _ in range(K):
        cur = np.gradient(cur, 1.0 / n)
        best = max(best, float(np.max(np.abs(cur))))
    return best


@dataclass
class AtomFamily:
    """Atoms ``a_{j,k}`` indexed like a coefficient sequence.

    ``C1`` dilates the support cube, ``C2`` bounds derivatives, ``K`` is the
    number of controlled derivatives and ``L`` the moment order (``-1`` means
    no moment condition).
    """

    grid: Grid
    C1: float
    C2: float
    K: int
    L: int
    atoms: dict = field(default_factory=dict)

    @classmethod
    def cube_atoms(cls, grid: Grid, indices, K: int = 2, L: int = -1, C1: float = 1.5):
        atoms = {(int(j), tuple(np.atleast_1d(k).tolist())): cube_atom(grid, j, k, L)
                 for j, k in indices}
        d = grid.d
        C2 = _profile_derivative_bound(K, L) ** d
        return cls(grid, C1, C2, K, L, atoms)

    def synthesize(self, lam: CoefficientSequence) -> SampledFunction:
        vals = np.zeros(self.grid.shape, dtype=np.complex128)
        rad = 0.0
        for key, c in lam.items():
            if key not in self.atoms:
                raise KeyError(f"no atom for index {key}")
            a = self.atoms[key]
            vals += c * a.values
            rad = max(rad, a.support_radius)
        return SampledFunction(self.grid, vals, rad, margin=rad <= self.grid.R / 2)


def _multi_indices(d, order):
    if d == 1:
        return [(m,) for m in range(order + 1)]
    return [(a, b) for a in range(order + 1) for b in range(order + 1 - a)]


def grid_derivative(values: np.ndarray, alpha, dx: float) -> np.ndarray:
    """Repeated second-order central differences, ``alpha[i]`` times along axis ``i``."""
    out = np.asarray(values)
    for axis, m in enumerate(alpha):
        for _ in range(m):
            out = np.gradient(out, dx, axis=axis)
    return out


def validate_atoms(family: AtomFamily, deriv_tol: float = 0.10, moment_tol: float = 1e-6) -> list:
    """Check support, derivative bounds and vanishing moments of every atom.

    Returns one dict per atom with keys ``index``, ``support``, ``derivatives``,
    ``moments``, ``ok`` and the measured worst ratios.
    """
    grid = family.grid
    coords = grid.coords()
    report = []
    for (j, k), atom in sorted(family.atoms.items()):
        side = 2.0**-j
        center = (np.asarray(k, dtype=np.float64) + 0.5) * side
        half = family.C1 * side / 2
        outside = np.zeros(grid.shape, dtype=bool)
        for c, x0 in zip(coords, center):
            outside |= np.abs(c - x0) >= half
        support_ok = not np.any(atom.values[outside] != 0)
        worst = 0.0
        for alpha in _multi_indices(grid.d, family.K):
            der = grid_derivative(atom.values.real, alpha, grid.dx)
            bound = family.C2 * 2.0 ** (j * sum(alpha))
            worst = max(worst, float(np.max(np.abs(der))) / bound)
        deriv_ok = worst <= 1.0 + deriv_tol
        moment_worst = 0.0
        if family.L >= 0:
            for beta in _multi_indices(grid.d, family.L):
                mono = np.ones(grid.shape)
                for c, b in zip(coords, beta):
                    mono = mono * c**b
                m = abs(np.sum(mono * atom.values)) * grid.cell_volume
                scale = np.sum(np.abs(mono * atom.values)) * grid.cell_volume
                moment_worst = max(moment_worst, m / scale if scale else 0.0)
        moments_ok = moment_worst <= moment_tol
        report.append({
            "index": (j, k),
            "support": bool(support_ok),
            "derivatives": bool(deriv_ok),
            "derivative_ratio": worst,
            "moments": bool(moments_ok),
            "moment_residual": moment_worst,
            "ok": bool(support_ok and deriv_ok and moments_ok),
        })
    return report


def atomic_synthesis_check(family: AtomFamily, lam: CoefficientSequence, s: float, u: float,
                           p: float, q: float, partition: DyadicPartition | None = None) -> dict:
    """Compare the Besov-Morrey norm of ``sum lambda a`` with the sequence norm of ``lambda``.

    The left side is also recomputed on a refined ball family; ``stable``
    reports whether it moved by less than 5%.
    """
    sigma_p = family.grid.d * max(0.0, 1.0 / p - 1.0)
    if family.K < max(0.0, s + 1) or family.L < max(-1.0, sigma_p - s):
        raise ValueError("atoms have too few derivatives or moments for these parameters")
    f = family.synthesize(lam)
    if partition is None:
        partition = build_partition(family.grid)
    fam = default_family(family.grid)
    left = besov_morrey_norm(f, partition, s, u, p, q, fam).value
    left_ref = besov_morrey_norm(f, partition, s, u, p, q, fam.refine()).value
    right = sequence_norm(lam, s, u, p, q).value
    if right == 0:
        ratio = 0.0 if left == 0 else math.inf
    else:
        ratio = left / right
    stable = left == 0 or abs(left_ref - left) <= 0.05 * left
    return {
        "left": left,
        "left_refined": left_ref,
        "right": right,
        "ratio": ratio,
        "finite": math.isfinite(ratio),
        "stable": bool(stable),
    }
