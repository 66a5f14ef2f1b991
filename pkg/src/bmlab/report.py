"""Write experiment results to disk and map them to a process exit code.

Output layout under ``out``::

    manifest.json               every experiment's parameters, seed, grid, ladder,
                                profile constants, package version and backend
    <name>.csv | <name>.json    one table per experiment, fixed column schema
    <name>.<series>.csv         plot-ready (x, y) series

Nothing time-dependent is written, so identical inputs give identical bytes.
"""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .experiments import COLUMNS, FAIL, INCONCLUSIVE
from .profiles import PHI0_INNER, PHI0_OUTER

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE = 0, 2, 3


def _plain(obj):
    """Convert numpy scalars, tuples and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (np.integer,)):
        return str(int(value))
    return str(value)


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c, "")) for c in columns])
    return buf.getvalue()


def exit_code(results) -> int:
    """2 if any experiment failed, else 3 if any was inconclusive, else 0."""
    statuses = [r.status for r in results]
    if FAIL in statuses:
        return EXIT_FAIL
    if INCONCLUSIVE in statuses:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def build_manifest(results) -> dict:
    return _plain({
        "tool": "bmlab",
        "version": __version__,
        "backend": _backend.BACKEND,
        "profile_constants": {"phi0_inner": PHI0_INNER, "phi0_outer": PHI0_OUTER,
                              "step": "exp(-1/t) smooth step"},
        "experiments": [
            {"name": r.name, "kind": r.kind, "status": r.status, "summary": r.summary,
             "metadata": r.metadata}
            for r in results
        ],
        "exit_code": exit_code(results),
    })


def emit_report(results, out, fmt: str = "csv") -> int:
    """Write the manifest, one table per experiment and its series; return the exit code.

    Parameters
    ----------
    results : list of ExperimentResult
    out : path-like
        Output directory (created if missing).
    fmt : {"csv", "json"}
        Format of the per-experiment tables; series are always CSV.
    """
    if fmt not in ("csv", "json"):
        raise ValueError("format must be 'csv' or 'json'")
    names = [r.name for r in results]
    if len(set(names)) != len(names):
        raise ValueError(f"experiment names must be unique, got {names}")
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = build_manifest(results)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    for r in results:
        columns = COLUMNS[r.kind]
        if fmt == "csv":
            (out / f"{r.name}.csv").write_text(_csv_text(columns, r.rows))
        else:
            table = {"columns": columns, "rows": [[_plain(row.get(c, "")) for c in columns] for row in r.rows]}
            (out / f"{r.name}.json").write_text(json.dumps(table, indent=2) + "\n")
        for key, pts in r.series.items():
            rows = [{"x": x, "y": y} for x, y in pts]
            (out / f"{r.name}.{key}.csv").write_text(_csv_text(["x", "y"], rows))
    return exit_code(results)
