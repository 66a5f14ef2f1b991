"""Time the compiled kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--n 4096] [--repeat 5]

Both backends are run on identical inputs; the script prints the best wall
time of each, the speed-up, and the largest absolute difference in the
outputs (they should agree to rounding).
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from bmlab import _backend, _kernels_py
from bmlab.diffnorm import binomial_coefficients, offsets_in_ball
from bmlab.gridfn import make_grid


def _cases(n: int, rng):
    f1 = rng.normal(size=n) + 1j * rng.normal(size=n)
    offs1 = np.arange(1, 65, dtype=np.int64)
    m = max(64, n // 32)
    f2 = rng.normal(size=(m, m)) + 0j
    g2 = make_grid(2, 8.0, m)
    offs2 = np.ascontiguousarray(offsets_in_ball(g2, 6 * g2.dx), dtype=np.int64)
    w = rng.random((m, m))
    row_prefix = np.zeros((m, m + 1))
    row_prefix[:, 1:] = np.cumsum(w, axis=1)
    idx = np.arange(0, m, 2)
    a, b = np.meshgrid(idx, idx, indexing="ij")
    centers = np.ascontiguousarray(np.stack([a.ravel(), b.ravel()], axis=1), dtype=np.int64)
    half = np.array([int(np.sqrt(max(64 - dy * dy, 0))) for dy in range(-8, 9)], dtype=np.int64)
    coef = binomial_coefficients(2)
    return {
        "diff_power_sum_1d": (f1, offs1, coef, 2.0),
        "diff_power_sum_2d": (f2, offs2, coef, 2.0),
        "disk_sums_2d": (row_prefix, centers, half),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=4096, help="1-d grid size (2-d uses n/32 per axis)")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    try:
        from bmlab import _kernels as compiled
    except ImportError:
        print("compiled extension not built; only the numpy backend is available")
        compiled = None
    cases = _cases(args.n, np.random.default_rng(args.seed))
    print(f"active backend at import: {_backend.BACKEND}")
    print(f"{'kernel':<20} {'numpy [ms]':>12} {'cython [ms]':>12} {'speed-up':>9} {'max |diff|':>11}")
    for name, call_args in cases.items():
        py_fn = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{name:<20} {1e3 * t_py:12.2f} {'-':>12} {'-':>9} {'-':>11}")
            continue
        c_fn = getattr(compiled, name)
        t_c = min(timeit.repeat(lambda: c_fn(*call_args), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(np.asarray(py_fn(*call_args)) - np.asarray(c_fn(*call_args)))))
        print(f"{name:<20} {1e3 * t_py:12.2f} {1e3 * t_c:12.2f} {t_py / t_c:9.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
