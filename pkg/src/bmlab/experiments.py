"""Experiment harness: equivalence sweeps, divergence scenarios and membership scans.

Every experiment takes a validated configuration (see :mod:`bmlab.config`)
and returns an :class:`ExperimentResult` with a pass/fail/inconclusive
status, fixed-schema table rows, plot-ready series and the metadata needed to
reproduce it. Randomness flows only from ``numpy.random.SeedSequence([seed, i])``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bands import block_slope, build_partition, besov_morrey_norm, max_bands
from .diffnorm import DiffParams, diff_norm_va, modulus_norm
from .gridfn import SampledFunction, make_grid
from .morrey import BallFamily
from .profiles import radial_cutoff
from .regions import EQUIVALENT, SpaceParams, classify_parameters
from .zoo import (
    OswaldConfig,
    SingularFnConfig,
    make_exp_bump,
    make_f_alpha_delta,
    make_plateau_bump,
    membership_oracle,
    oswald_block_values,
    oswald_difference_trajectory,
    oswald_scale_profile,
)

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

#: CSV column schema per experiment kind.
COLUMNS = {
    "classify": ["d", "s", "u", "p", "q", "v", "a", "N", "verdict", "tag", "all_tags"],
    "equivalence": ["function", "norm_diff", "norm_bands", "ratio", "ratio_refined", "change"],
    "divergence": ["scenario", "param", "partial_value", "fitted_slope", "r2", "verdict"],
    "membership": ["s", "slope", "measured", "oracle", "agree", "boundary"],
}


@dataclass
class ExperimentResult:
    """Outcome of one experiment run."""

    name: str
    kind: str
    status: str
    summary: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)


# --- helpers -----------------------------------------------------------------


def _grid_from(cfg, d=1, R=8.0, n=4096, offset=False):
    g = cfg.get("grid", {})
    pick = lambda key, dflt: dflt if g.get(key) is None else g[key]
    return make_grid(int(pick("d", d)), float(pick("R", R)), int(pick("n", n)), bool(pick("offset", offset)))


def _params_from(cfg, **defaults) -> SpaceParams:
    given = {k: v for k, v in cfg.get("params", {}).items() if v is not None}
    merged = {**defaults, **given}
    return SpaceParams(
        d=int(merged["d"]), s=float(merged["s"]), u=float(merged["u"]), p=float(merged["p"]),
        q=float(merged["q"]), v=float(merged["v"]), a=float(merged["a"]), N=int(merged["N"]),
    )


def _family_from(cfg, grid) -> BallFamily:
    fam = cfg.get("family", {})
    return BallFamily(grid, stride=int(fam.get("stride", 4)),
                      levels_per_octave=int(fam.get("levels_per_octave", 4)),
                      shape=fam.get("shape", "ball"))


def _rng(seed, i):
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(i)]))


def linear_fit(x, y):
    """Least-squares line; returns ``(slope, intercept, r2)``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
    return float(slope), float(intercept), r2


def divergence_verdict(x, y, min_points=5, r2_min=0.9, min_growth=0.05) -> dict:
    """Classify a partial-value trajectory as diverging, convergent or inconclusive.

    ``diverges`` needs at least ``min_points`` points, a positive fitted slope
    with ``R^2 >= r2_min``, and a relative rise ``(y_last - y_first)/|y_first|``
    of at least ``min_growth`` (a saturated trajectory can fit a line well
    while barely moving).
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < min_points:
        return {"verdict": INCONCLUSIVE, "slope": math.nan, "r2": math.nan, "growth": math.nan,
                "reason": f"only {len(x)} usable points (< {min_points})"}
    slope, _, r2 = linear_fit(x, y)
    growth = (y[-1] - y[0]) / abs(y[0]) if y[0] != 0 else math.inf
    diverges = slope > 0 and r2 >= r2_min and growth >= min_growth
    return {"verdict": "diverges" if diverges else "convergent", "slope": slope, "r2": r2,
            "growth": float(growth), "reason": ""}


# --- function families for equivalence sweeps --------------------------------


def bandlimited_function(grid, rng, max_frequency=6.0, terms=8) -> SampledFunction:
    """Random trigonometric polynomial (frequencies ``<= max_frequency``) times a smooth window.

    The window makes the support compact, so the spectrum is concentrated
    below ``max_frequency`` plus the window's own (rapidly decaying) spread.
    """
    d = grid.d
    freqs = rng.uniform(-max_frequency, max_frequency, size=(terms, d))
    phases = rng.uniform(0, 2 * np.pi, size=terms)
    amps = rng.normal(size=terms)
    center = rng.uniform(-1.0, 1.0, size=d)
    coords = grid.coords()
    shifted = [c - x0 for c, x0 in zip(coords, center)]
    vals = np.zeros(grid.shape)
    for a, w, ph in zip(amps, freqs, phases):
        arg = sum(wi * si for wi, si in zip(w, shifted))
        vals = vals + a * np.cos(arg + ph)
    r = np.sqrt(sum(si * si for si in shifted))
    vals = vals * radial_cutoff(r, 1.0, 2.5)
    support = 2.5 + float(np.linalg.norm(center))
    return SampledFunction.from_callable(grid, lambda *_: vals, support)


def smooth_bump_function(grid, rng) -> SampledFunction:
    """Radial bump with random plateau and transition widths, centred at a random lattice point."""
    inner = rng.uniform(0.2, 1.0)
    outer = inner + rng.uniform(0.5, 1.5)
    steps = rng.integers(-int(0.5 / grid.dx), int(0.5 / grid.dx) + 1, size=grid.d)
    center = steps * grid.dx
    r = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(grid.coords(), center)))
    vals = radial_cutoff(r, inner, outer) * rng.uniform(0.5, 2.0)
    return SampledFunction(grid, vals, outer + float(np.linalg.norm(center)))


FUNCTION_FAMILIES = ("bandlimited", "bump")


def _make_functions(cfg, grid):
    eq = cfg["equivalence"]
    kind = eq["functions"]
    if kind not in FUNCTION_FAMILIES:
        raise ValueError(f"unknown function family {kind!r}; choose from {FUNCTION_FAMILIES}")
    out = []
    for i in range(int(eq["count"])):
        rng = _rng(cfg["seed"], i)
        if kind == "bandlimited":
            out.append(bandlimited_function(grid, rng, float(eq["max_frequency"]), int(eq["terms"])))
        else:
            out.append(smooth_bump_function(grid, rng))
    return out


# --- equivalence ---------------------------------------------------------------


def run_equivalence_experiment(cfg: dict, functions=None, name: str = "equivalence") -> ExperimentResult:
    """Ratios of a difference norm to the Littlewood-Paley norm over a function family.

    ``cfg["equivalence"]["norm"]`` selects ``"va"`` or ``"modulus"``. With
    ``refine_check`` every ratio is recomputed after refining the t-ladder
    and the ball family once; the relative change is reported.
    """
    eq = cfg["equivalence"]
    grid = _grid_from(cfg)
    P = _params_from(cfg, d=grid.d, s=1.5, u=2.0, p=1.5, q=2.0, v=2.0, a=math.inf, N=2)
    verdict = classify_parameters(P)
    if verdict.verdict != EQUIVALENT:
        raise ValueError(f"equivalence experiments need an Equivalent tuple, got {verdict}")
    if functions is None:
        functions = _make_functions(cfg, grid)
    if not functions:
        raise ValueError("nothing to compare: the function family is empty")
    K_max = eq["K_max"] if eq["K_max"] is not None else max_bands(grid)
    partition = build_partition(grid, int(K_max))
    family = _family_from(cfg, grid)
    dparams = DiffParams(N=P.N, v=P.v, a=P.a)
    norm = eq["norm"]
    if norm not in ("va", "modulus"):
        raise ValueError("equivalence norm must be 'va' or 'modulus'")

    def pair(f, dp, fam):
        if norm == "va":
            a = diff_norm_va(f, P.s, P.u, P.p, P.q, dp, fam).value
        else:
            a = modulus_norm(f, P.s, P.u, P.p, P.q, P.N, dp, fam).value
        b = besov_morrey_norm(f, partition, P.s, P.u, P.p, P.q, fam).value
        return a, b

    rows, ratios, changes = [], [], []
    excluded = 0
    for i, f in enumerate(functions):
        a, b = pair(f, dparams, family)
        if a == 0 or b == 0:
            excluded += 1
            continue
        ratio = a / b
        ratio_ref, change = math.nan, math.nan
        if eq["refine_check"]:
            a2, b2 = pair(f, dparams.refine(), family.refine())
            ratio_ref = a2 / b2
            change = abs(ratio_ref / ratio - 1.0)
            changes.append(change)
        ratios.append(ratio)
        rows.append({"function": i, "norm_diff": a, "norm_bands": b, "ratio": ratio,
                     "ratio_refined": ratio_ref, "change": change})
    if not ratios:
        raise ValueError("every function had a zero norm; ratios are undefined")
    spread = max(ratios) / min(ratios)
    max_change = max(changes) if changes else math.nan
    ok = spread <= float(eq["ratio_envelope"])
    if changes:
        ok = ok and max_change <= float(eq["refine_tolerance"])
    summary = {
        "norm": norm,
        "n_functions": len(functions),
        "excluded_zero_norm": excluded,
        "ratio_min": min(ratios),
        "ratio_max": max(ratios),
        "ratio_median": float(np.median(ratios)),
        "spread": spread,
        "max_refinement_change": max_change,
        "envelope": float(eq["ratio_envelope"]),
    }
    meta = {"params": P.as_dict(), "classification": str(verdict), "grid": vars(grid).copy(),
            "K_max": int(K_max), "family": family.describe(), "seed": cfg["seed"],
            "ladder": {"levels_per_octave": dparams.levels_per_octave, "max_offsets": dparams.max_offsets}}
    series = {"ratio": [(r["function"], r["ratio"]) for r in rows]}
    return ExperimentResult(name, "equivalence", PASS if ok else FAIL, summary, rows, series, meta)


# --- divergence ----------------------------------------------------------------


SCENARIOS = ("plateau-s0", "exp-bump", "oswald", "f-alpha-delta")

_EQUIVALENT_CONTROL = dict(s=1.5, u=2.0, p=1.5, q=2.0, v=2.0, a=math.inf, N=2)


def _divergence_rows(scenario, xs, ys, fit):
    return [{"scenario": scenario, "param": x, "partial_value": y, "fitted_slope": fit["slope"],
             "r2": fit["r2"], "verdict": fit["verdict"]} for x, y in zip(xs, ys)]


def _scenario_plateau(cfg, div):
    grid = _grid_from(cfg, R=1024.0, n=8192)
    if div["control"]:
        P = _params_from({"params": {}}, d=grid.d, **_EQUIVALENT_CONTROL)
    else:
        P = _params_from(cfg, d=grid.d, s=0.0, u=2.0, p=2.0, q=2.0, v=2.0, a=math.inf, N=1)
        if not (P.s == 0 and math.isinf(P.a) and not math.isinf(P.q)):
            raise ValueError("the plateau scenario needs s = 0, a = inf and q < inf")
    f = make_plateau_bump(grid)
    T_values = [float(t) for t in div["T_values"]]
    dp = DiffParams(N=P.N, v=P.v, a=P.a)
    est = diff_norm_va(f, P.s, P.u, P.p, P.q, dp, _family_from(cfg, grid))
    head = dict(est.details["head_partials"])
    usable = [T for T in T_values if any(math.isclose(T, t) for t in head)]
    lookup = lambda T: next(v for t, v in head.items() if math.isclose(T, t))
    xs = [math.log(T) for T in usable]
    ys = [lookup(T) ** P.q for T in usable]
    meta = {"params": P.as_dict(), "grid": vars(grid).copy(), "x": "ln T", "y": "partial^q",
            "t_range": est.truncation["t_range"], "function": "plateau bump"}
    return usable, xs, ys, meta, {}


def _scenario_exp_bump(cfg, div):
    P = _params_from(cfg, d=1, s=2.0, u=2.0, p=2.0, q=2.0, v=2.0, a=1.0, N=1)
    if P.N > P.s:
        raise ValueError("the exponential-bump scenario needs N <= s")
    grid = _grid_from(cfg, d=P.d, R=16.0, n=16384)
    f = make_exp_bump(grid, P.N)
    halvings = int(div["eps_halvings"])
    eps = [float(div["eps_start"]) * 2.0**-i for i in range(halvings + 1)]
    j_max = round(-math.log2(eps[-1]))
    dp = DiffParams(N=P.N, v=P.v, a=P.a, j_min=0, j_max=j_max)
    est = diff_norm_va(f, P.s, P.u, P.p, P.q, dp, _family_from(cfg, grid))
    levels = {lv["t"]: j for lv, (j, _) in zip(est.details["levels"], est.partials)}
    tail = dict(est.partials)
    usable = [e for e in eps if any(math.isclose(e, t) for t in levels)]
    ys = [tail[next(j for t, j in levels.items() if math.isclose(e, t))] for e in usable]
    xs = [-math.log2(e) for e in usable]
    monotone = all(b > a for a, b in zip(ys, ys[1:]))
    ratio = ys[-1] / ys[0] if ys and ys[0] else math.nan
    meta = {"params": P.as_dict(), "grid": vars(grid).copy(), "x": "log2(1/eps)", "y": "partial",
            "fit_y": "log2 partial", "function": "exponential bump"}
    extra = {"monotone": monotone, "final_over_initial": ratio, "fit_y": [math.log2(y) for y in ys]}
    return usable, xs, ys, meta, extra


def _scenario_oswald(cfg, div):
    P = _params_from(cfg, d=1, s=1.0, u=2.0, p=2.0, q=math.inf, v=1.0, a=math.inf, N=1)
    if not (P.p == P.u and math.isinf(P.q) and P.v >= 1 and P.N == P.s):
        raise ValueError("the lacunary scenario needs p = u, q = inf, v >= 1 and N = s")
    ocfg = OswaldConfig(r=int(div["r"]), N=P.N, u=P.u, d=P.d)
    profile = oswald_scale_profile(ocfg, v=P.v, p=P.p)
    l_values = [int(l) for l in div["l_values"]]
    traj = oswald_difference_trajectory(ocfg, l_values, profile)
    xs = [float(l) for l, _ in traj.partials]
    ys = [v for _, v in traj.partials]
    blocks = oswald_block_values(ocfg, max(l_values) - 6)
    win = min(3, len(xs))
    first_slope = linear_fit(xs[:win], ys[:win])[0] if win >= 2 else math.nan
    full_slope = linear_fit(xs, ys)[0] if len(xs) >= 2 else math.nan
    ratio = full_slope / first_slope if first_slope else math.nan
    block_ratio = max(blocks) / blocks[0]
    meta = {"params": P.as_dict(), "r": ocfg.r, "x": "l", "y": "partial^p (t-supremum term)",
            "reference_grid_n": 8192, "c0": profile.c0, "function": "lacunary sum"}
    extra = {"first_window_slope": first_slope, "slope_ratio": ratio, "block_values": blocks,
             "block_ratio": block_ratio}
    return xs, xs, ys, meta, extra


def _scenario_f_alpha_delta(cfg, div):
    P = _params_from(cfg, d=1, s=0.45, u=2.0, p=2.0, q=2.0, v=2.0, a=math.inf, N=1)
    grid = _grid_from(cfg, d=P.d, R=2.0, n=65536, offset=True)
    sc = SingularFnConfig(float(div["alpha"]), float(div["delta"]), float(div["theta"]))
    if membership_oracle(P.s, P.u, P.p, P.q, sc.alpha, sc.delta, P.d):
        raise ValueError("the singular-function scenario needs a non-member parameter set")
    f = make_f_alpha_delta(grid, sc)
    k_lo, k_hi = resolved_band_window(grid, sc.theta)
    part = build_partition(grid, k_hi)
    est = besov_morrey_norm(f, part, P.s, P.u, P.p, P.q, _family_from(cfg, grid))
    pts = [(k, v) for k, v in est.partials if k >= k_lo]
    xs = [float(k) for k, _ in pts]
    ys = [math.log2(v) for _, v in pts]
    meta = {"params": P.as_dict(), "grid": vars(grid).copy(), "x": "K_max", "y": "log2 partial",
            "band_window": [k_lo, k_hi], "function": "f_alpha_delta"}
    return xs, xs, ys, meta, {}


def run_divergence_experiment(cfg: dict, name: str = "divergence") -> ExperimentResult:
    """Partial-value trajectory of one divergence scenario and its growth verdict."""
    div = cfg["divergence"]
    scenario = div["scenario"]
    runners = {"plateau-s0": _scenario_plateau, "exp-bump": _scenario_exp_bump,
               "oswald": _scenario_oswald, "f-alpha-delta": _scenario_f_alpha_delta}
    if scenario not in runners:
        raise ValueError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")
    params_list, xs, ys, meta, extra = runners[scenario](cfg, div)
    fit_y = extra.pop("fit_y", ys)
    fit = divergence_verdict(xs, fit_y, int(div["min_points"]), float(div["r2_min"]),
                             float(div["min_growth"]))
    label = scenario + ("-control" if div["control"] else "")
    rows = _divergence_rows(label, params_list, ys, fit)
    expected = "convergent" if div["control"] else "diverges"
    if fit["verdict"] == INCONCLUSIVE:
        status = INCONCLUSIVE
    else:
        status = PASS if fit["verdict"] == expected else FAIL
    if status == PASS and scenario == "oswald" and not div["control"]:
        lo, hi = div["slope_ratio_window"]
        if not (lo <= extra["slope_ratio"] <= hi and extra["block_ratio"] <= float(div["block_bound"])):
            status = FAIL
    if status == PASS and scenario == "exp-bump" and not div["control"]:
        if not (extra["monotone"] and extra["final_over_initial"] >= 10):
            status = FAIL
    summary = {"scenario": label, "expected": expected, **fit, **extra,
               "thresholds": {"min_points": div["min_points"], "r2_min": div["r2_min"],
                              "min_growth": div["min_growth"]}}
    meta["seed"] = cfg["seed"]
    return ExperimentResult(name, "divergence", status, summary, rows,
                            {"partials": list(zip(xs, ys))}, meta)


# --- membership ------------------------------------------------------------------


def resolved_band_window(grid, theta: float) -> tuple:
    """Bands free of cut-off and sampling artefacts for a singularity cut off at ``theta``.

    Lower end: ``2^(k-1) theta >= 8`` (the cut-off's own spectrum has decayed).
    Upper end: ``3 * 2^(k-1) dx <= 2 pi / 64`` (aliased copies of the
    singular spectrum are negligible).
    """
    k_lo = max(1, math.ceil(math.log2(8.0 / theta)) + 1)
    k_hi = math.floor(math.log2(2 * math.pi / (64 * 3 * grid.dx))) + 1
    k_hi = min(k_hi, max_bands(grid))
    if k_hi - k_lo < 3:
        raise ValueError(f"grid too coarse: resolved bands {k_lo}..{k_hi} (need at least 4)")
    return k_lo, k_hi


def run_membership_scan(cfg: dict, name: str = "membership") -> ExperimentResult:
    """Block-growth slope of ``f_{alpha,delta}`` across an s-scan, against the closed-form rule.

    A slope of ``log2`` block values below zero over the resolved bands is
    read as membership. Scan points within ``boundary_margin`` of the
    threshold ``d/u + alpha`` are flagged and left out of the agreement count.
    """
    mem = cfg["membership"]
    P = _params_from(cfg, d=1, s=0.0, u=2.0, p=2.0, q=2.0, v=2.0, a=math.inf, N=1)
    grid = _grid_from(cfg, d=P.d, R=2.0, n=65536, offset=True)
    sc = SingularFnConfig(float(mem["alpha"]), float(mem["delta"]), float(mem["theta"]))
    f = make_f_alpha_delta(grid, sc)
    k_lo, k_hi = resolved_band_window(grid, sc.theta)
    if mem["k_lo"] is not None:
        k_lo = int(mem["k_lo"])
    if mem["k_hi"] is not None:
        k_hi = int(mem["k_hi"])
    part = build_partition(grid, k_hi)
    family = _family_from(cfg, grid)
    threshold = P.d / P.u + sc.alpha
    rows = []
    agree = counted = 0
    for s in [float(x) for x in mem["s_values"]]:
        est = besov_morrey_norm(f, part, s, P.u, P.p, P.q, family)
        slope = block_slope(est.details["blocks"], k_lo, k_hi)
        oracle = membership_oracle(s, P.u, P.p, P.q, sc.alpha, sc.delta, P.d)
        boundary = abs(s - threshold) < float(mem["boundary_margin"])
        measured = slope < 0
        ok = measured == oracle
        if not boundary:
            counted += 1
            agree += int(ok)
        rows.append({"s": s, "slope": slope, "measured": "member" if measured else "not-member",
                     "oracle": "member" if oracle else "not-member",
                     "agree": "" if boundary else bool(ok), "boundary": boundary})
    fraction = agree / counted if counted else math.nan
    status = PASS if counted and agree == counted else (INCONCLUSIVE if not counted else FAIL)
    summary = {"threshold": threshold, "agreement": fraction, "counted": counted,
               "band_window": [k_lo, k_hi], "boundary_excluded": sum(r["boundary"] for r in rows)}
    meta = {"params": P.as_dict(), "grid": vars(grid).copy(), "alpha": sc.alpha, "delta": sc.delta,
            "theta": sc.theta, "seed": cfg["seed"]}
    return ExperimentResult(name, "membership", status, summary, rows,
                            {"slopes": [(r["s"], r["slope"]) for r in rows]}, meta)


# --- classification ----------------------------------------------------------------


def run_classification(cfg: dict, tuples=None, name: str = "classify") -> ExperimentResult:
    """Classify the configured tuples (or the single ``params`` tuple)."""
    if tuples is None:
        tuples = cfg.get("classify", {}).get("tuples") or []
    if not tuples:
        tuples = [{k: v for k, v in cfg.get("params", {}).items() if v is not None}]
    rows = []
    for t in tuples:
        t = dict(t)
        t.setdefault("a", math.inf)
        t.setdefault("N", 1)
        P = SpaceParams(**{k: (float(v) if k not in ("d", "N") else int(v)) for k, v in t.items()})
        r = classify_parameters(P)
        rows.append({**P.as_dict(), "verdict": r.verdict, "tag": r.tag, "all_tags": ";".join(r.all_tags)})
    return ExperimentResult(name, "classify", PASS, {"count": len(rows)}, rows, {}, {"seed": cfg["seed"]})


RUNNERS = {
    "classify": run_classification,
    "equivalence": run_equivalence_experiment,
    "divergence": run_divergence_experiment,
    "membership": run_membership_scan,
}
