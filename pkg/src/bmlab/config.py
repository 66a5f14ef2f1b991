"""Experiment configuration: YAML documents checked against a fixed schema.

Every section has documented defaults; unknown keys are rejected so that a
typo can never silently fall back to a default. ``inf`` (or ``.inf``) is
accepted wherever infinity is meaningful.
"""
from __future__ import annotations

import copy
import math
from pathlib import Path

import yaml


class ConfigError(ValueError):
    """Raised for unknown keys or ill-typed values in a configuration."""


INF = math.inf

#: Schema with defaults. A nested dict is a section; ``None`` means the
#: experiment picks its own default (grids and parameters differ per scenario).
DEFAULTS = {
    "seed": 0,
    "grid": {"d": None, "R": None, "n": None, "offset": None},
    "params": {"d": None, "s": None, "u": None, "p": None, "q": None, "v": None, "a": None, "N": None},
    "family": {"stride": 4, "levels_per_octave": 4, "shape": "ball"},
    "classify": {"tuples": []},
    "equivalence": {
        "functions": "bandlimited",
        "count": 20,
        "norm": "va",
        "K_max": None,
        "max_frequency": 6.0,
        "terms": 8,
        "refine_check": True,
        "ratio_envelope": 50.0,
        "refine_tolerance": 0.10,
    },
    "divergence": {
        "scenario": "plateau-s0",
        "control": False,
        "T_values": [8, 16, 32, 64, 128, 256, 512],
        "eps_halvings": 6,
        "eps_start": 0.25,
        "l_values": [8, 9, 10, 11, 12, 13, 14],
        "r": 5,
        "min_points": 5,
        "r2_min": 0.9,
        "min_growth": 0.05,
        "slope_ratio_window": [0.5, 2.0],
        "block_bound": 2.0,
        "alpha": -0.25,
        "delta": 0.0,
        "theta": 0.25,
    },
    "membership": {
        "alpha": -0.25,
        "delta": 0.0,
        "theta": 0.125,
        "s_values": [0.05, 0.15, 0.35, 0.45],
        "boundary_margin": 0.05,
        "k_lo": None,
        "k_hi": None,
    },
    "suite": [],
}

_FLOATISH = (int, float)


def _coerce(value, default, path):
    if isinstance(value, str) and value.strip().lower() in ("inf", ".inf", "infinity"):
        value = INF
    if default is None or value is None:
        return value
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"{path}: expected a boolean, got {value!r}")
        return value
    if isinstance(default, int) and not isinstance(default, bool):
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, float) and value.is_integer():
                return int(value)
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, _FLOATISH):
            raise ConfigError(f"{path}: expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"{path}: expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"{path}: expected a list, got {value!r}")
        return [INF if isinstance(x, str) and x.lower() in ("inf", ".inf") else x for x in value]
    return value


def _merge(defaults: dict, given: dict, path: str) -> dict:
    out = copy.deepcopy(defaults)
    for key, value in given.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown key {where!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected a mapping")
            out[key] = _merge(defaults[key], value, where)
        else:
            out[key] = _coerce(value, defaults[key], where)
    return out


def validate(raw: dict | None) -> dict:
    """Merge ``raw`` into the defaults, rejecting unknown keys and bad types."""
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    cfg = _merge({k: v for k, v in DEFAULTS.items() if k != "suite"}, {k: v for k, v in raw.items() if k != "suite"}, "")
    suite = raw.get("suite", [])
    if not isinstance(suite, list):
        raise ConfigError("suite: expected a list of experiment entries")
    cfg["suite"] = []
    for i, entry in enumerate(suite):
        if not isinstance(entry, dict) or "experiment" not in entry:
            raise ConfigError(f"suite[{i}]: each entry needs an 'experiment' key")
        kind = entry["experiment"]
        if kind not in ("classify", "equivalence", "divergence", "membership"):
            raise ConfigError(f"suite[{i}]: unknown experiment {kind!r}")
        rest = {k: v for k, v in entry.items() if k not in ("experiment", "name")}
        merged = _merge({k: v for k, v in cfg.items() if k != "suite"}, rest, f"suite[{i}]")
        merged["experiment"] = kind
        merged["name"] = str(entry.get("name", f"{kind}-{i}"))
        cfg["suite"].append(merged)
    return cfg


def load_config(path) -> dict:
    text = Path(path).read_text()
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from exc
    return validate(raw)


def apply_overrides(cfg: dict, seed: int | None = None, grid_n: int | None = None) -> dict:
    """Command-line overrides for the seed and the grid size (also inside suite entries)."""
    cfg = copy.deepcopy(cfg)
    targets = [cfg] + list(cfg.get("suite", []))
    for c in targets:
        if seed is not None:
            c["seed"] = int(seed)
        if grid_n is not None:
            c["grid"]["n"] = int(grid_n)
    return cfg
