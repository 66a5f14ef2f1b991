"""Acceptance suite: one test per criterion, each printing a single pass/fail line."""
import math

import numpy as np
import pytest

from bmlab import cli
from bmlab.bands import build_partition
from bmlab.config import validate
from bmlab.diffnorm import finite_difference
from bmlab.experiments import (
    PASS,
    run_divergence_experiment,
    run_equivalence_experiment,
    run_membership_scan,
)
from bmlab.gridfn import SampledFunction, make_grid
from bmlab.morrey import BallFamily, morrey_norm
from bmlab.profiles import radial_cutoff
from bmlab.regions import SpaceParams, classify_parameters

from conftest import random_compact
from test_diffnorm import recursive_difference
from test_regions import TABLE


@pytest.fixture
def report(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number:2d}] {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        assert ok, detail
    return emit


def test_01_partition_of_unity(report):
    residuals = [build_partition(g, 8).residual()
                 for g in (make_grid(1, 8.0, 4096), make_grid(2, 2.0, 512))]
    report(1, "partition of unity", max(residuals) <= 1e-8,
           f"max residual {max(residuals):.2e} (d=1, d=2; tol 1e-8)")


def test_02_difference_algebra(report):
    g = make_grid(1, 4.0, 256)
    worst = 0.0
    for i in range(100):
        rng = np.random.default_rng(np.random.SeedSequence([2, i]))
        f = random_compact(g, rng, 1.0)
        N = 1 + i % 5
        k = int(rng.integers(1, 13)) * (1 if i % 2 else -1)
        d = finite_difference(f, [k * g.dx], N).values
        ref = recursive_difference(f.values, [k], N)
        worst = max(worst, np.max(np.abs(d - ref)) / np.max(np.abs(ref)))
    gp = make_grid(1, 8.0, 2048)
    x = gp.axis
    plateau = 0.0
    for N in range(1, 6):
        coef = np.random.default_rng(N).normal(size=N)
        f = SampledFunction(gp, np.polyval(coef, x) * radial_cutoff(gp.radius(), 1.5, 2.0), 2.0)
        h = 5 * gp.dx
        inside = (x > -1.5) & (x + N * h < 1.5)
        scale = np.max(np.abs(coef)) * 1.5 ** (N - 1) * 2**N
        plateau = max(plateau, np.max(np.abs(finite_difference(f, [h], N).values[inside])) / scale)
    report(2, "difference algebra", worst <= 1e-12 and plateau <= 1e-10,
           f"binomial vs recursive rel {worst:.2e} (tol 1e-12), polynomial residual {plateau:.2e} (tol 1e-10)")


def test_03_morrey_consistency(report):
    g = make_grid(1, 8.0, 4096)
    fam = BallFamily(g)
    worst = 0.0
    for i in range(20):
        f = random_compact(g, np.random.default_rng(np.random.SeedSequence([3, i])), 1.0)
        p = 1.0 + (i % 4) * 0.5
        worst = max(worst, abs(morrey_norm(f, p, p, fam).value / f.lp_norm(p) - 1))
    cube = SampledFunction.from_callable(g, lambda x: 2.0 ** (2 / 3.0) * ((x >= 0.25) & (x < 0.5)), 0.5 + g.dx)
    cube_err = abs(morrey_norm(cube, 3.0, 1.5, BallFamily(g, stride=1, shape="cube")).value - 1)
    report(3, "Morrey consistency", worst <= 0.03 and cube_err <= 0.05,
           f"p=u max rel error {worst:.3f} (tol 0.03), normalized cube {cube_err:.3f} (tol 0.05)")


def test_04_equivalence_window(report):
    va = run_equivalence_experiment(validate({"equivalence": {"norm": "va"}}))
    mod = run_equivalence_experiment(validate({"equivalence": {"norm": "modulus"}, "params": {"s": 1.2}}))
    ok = va.status == PASS and mod.status == PASS
    detail = "; ".join(
        f"{r.summary['norm']}: spread {r.summary['spread']:.2f} (<= 50), "
        f"max refine change {r.summary['max_refinement_change']:.3f} (<= 0.10)"
        for r in (va, mod))
    report(4, "equivalence window", ok, detail)


def test_05_plateau_divergence(report):
    div = run_divergence_experiment(validate({"divergence": {"scenario": "plateau-s0"}}))
    ctl = run_divergence_experiment(validate({"divergence": {"scenario": "plateau-s0", "control": True}}))
    ok = div.status == PASS and div.summary["r2"] >= 0.9 and ctl.summary["verdict"] == "convergent"
    report(5, "plateau divergence", ok,
           f"slope {div.summary['slope']:.3g}, R^2 {div.summary['r2']:.4f}; control {ctl.summary['verdict']}")


def test_06_lacunary_divergence(report):
    r = run_divergence_experiment(validate({"divergence": {"scenario": "oswald"}}))
    s = r.summary
    ok = r.status == PASS and 0.5 <= s["slope_ratio"] <= 2.0 and s["block_ratio"] <= 2.0
    report(6, "lacunary divergence", ok,
           f"slope {s['slope']:.3f}, slope ratio {s['slope_ratio']:.3f} (in [0.5, 2]), "
           f"block ratio {s['block_ratio']:.3f} (<= 2)")


def test_07_exponential_bump_divergence(report):
    r = run_divergence_experiment(validate({"divergence": {"scenario": "exp-bump"}}))
    s = r.summary
    n_halvings = len(r.rows) - 1
    ok = r.status == PASS and s["monotone"] and s["final_over_initial"] >= 10 and n_halvings >= 5
    report(7, "exponential bump divergence", ok,
           f"{n_halvings} halvings, monotone {s['monotone']}, final/initial {s['final_over_initial']:.1f} (>= 10)")


def test_08_membership_boundary(report):
    r = run_membership_scan(validate({"membership": {"s_values": [0.05, 0.15, 0.25, 0.35, 0.45]}}))
    s = r.summary
    flagged = [row["s"] for row in r.rows if row["boundary"]]
    ok = r.status == PASS and s["counted"] == 4 and s["agreement"] == 1.0 and flagged == [0.25]
    report(8, "membership boundary", ok,
           f"{int(s['agreement'] * s['counted'])}/{s['counted']} agree, flagged {flagged}")


def test_09_classifier_fidelity(report):
    wrong = []
    for args, verdict, tag in TABLE:
        out = classify_parameters(SpaceParams(*args))
        if (out.verdict, out.tag) != (verdict, tag):
            wrong.append((args, str(out)))
    report(9, "classifier fidelity", len(TABLE) == 30 and not wrong,
           f"{len(TABLE) - len(wrong)}/{len(TABLE)} tuples match" + (f"; mismatches {wrong}" if wrong else ""))


def test_10_determinism(report, tmp_path):
    cfg = tmp_path / "suite.yaml"
    cfg.write_text(
        "seed: 12345\n"
        "suite:\n"
        "  - {experiment: equivalence, name: eq, grid: {n: 2048}, equivalence: {count: 5}}\n"
        "  - {experiment: divergence, name: plateau}\n"
        "  - {experiment: divergence, name: exp, divergence: {scenario: exp-bump}}\n"
        "  - {experiment: membership, name: mem}\n"
        "  - {experiment: classify, name: tbl, classify: {tuples: [{d: 1, s: 0.7, u: 1, p: 0.5, q: 2, v: 1, N: 2}]}}\n"
    )
    runs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        cli.main(["report", "--config", str(cfg), "--out", str(out)])
        runs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    same = runs[0] == runs[1] and len(runs[0]) >= 5
    report(10, "determinism", same, f"{len(runs[0])} CSV files byte-identical across two runs: {same}")
