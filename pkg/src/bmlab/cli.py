"""Command-line front end: ``bmlab <subcommand> [options]``.

Subcommands
-----------
classify      verdict for ``key=value`` parameter tuples (or ``classify.tuples`` in the config)
equivalence   ratio sweep of a difference norm against the Littlewood-Paley norm
divergence    partial-value trajectory of a divergence scenario
membership    block-slope scan of the singular test function across s
report        run every entry of the config's ``suite`` list (a built-in suite without --config)

Exit status: 0 when every experiment passes, 2 on any failure, 3 when some
result is inconclusive, 1 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import ConfigError, apply_overrides, load_config, validate
from .experiments import COLUMNS, RUNNERS
from .report import _csv_text, _plain, emit_report, exit_code

#: Suite run by ``bmlab report`` when no configuration file is given.
DEFAULT_SUITE = [
    {"experiment": "classify", "name": "classify",
     "classify": {"tuples": [
         {"d": 1, "s": -0.5, "u": 2, "p": 2, "q": 2, "v": 2},
         {"d": 1, "s": 1.5, "u": 2, "p": 1.5, "q": 2, "v": 2, "N": 2},
         {"d": 1, "s": 0.7, "u": 1, "p": 0.5, "q": 2, "v": 1, "N": 2},
     ]}},
    {"experiment": "equivalence", "name": "equivalence-va"},
    {"experiment": "divergence", "name": "plateau", "divergence": {"scenario": "plateau-s0"}},
    {"experiment": "divergence", "name": "plateau-control",
     "divergence": {"scenario": "plateau-s0", "control": True}},
    {"experiment": "divergence", "name": "exp-bump", "divergence": {"scenario": "exp-bump"}},
    {"experiment": "divergence", "name": "oswald", "divergence": {"scenario": "oswald"}},
    {"experiment": "membership", "name": "membership"},
]

_PARAM_KEYS = ("d", "s", "u", "p", "q", "v", "a", "N")


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML configuration file")
    common.add_argument("--seed", type=_u64, help="RNG seed (unsigned 64-bit)")
    common.add_argument("--grid-n", type=_positive_int, help="grid points per axis (power of two)")
    common.add_argument("--out", help="output directory; tables go to stdout when omitted")
    common.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")

    parser = argparse.ArgumentParser(prog="bmlab", description="Besov-Morrey quasi-norm laboratory.")
    parser.add_argument("--version", action="version", version=f"bmlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="classify parameter tuples")
    p.add_argument("pairs", nargs="*", metavar="KEY=VALUE",
                   help="one tuple given as d=.. s=.. u=.. p=.. q=.. v=.. [a=..] [N=..]")
    p = sub.add_parser("equivalence", parents=[common], help="norm-ratio sweep")
    p.add_argument("--norm", choices=("va", "modulus"), help="difference norm to compare")
    p = sub.add_parser("divergence", parents=[common], help="divergence scenario")
    p.add_argument("--scenario", choices=("plateau-s0", "exp-bump", "oswald", "f-alpha-delta"))
    p.add_argument("--control", action="store_true", help="run the Equivalent-regime control")
    sub.add_parser("membership", parents=[common], help="membership scan over s")
    sub.add_parser("report", parents=[common], help="run the configured suite")
    return parser


def _parse_pairs(pairs) -> dict:
    out = {}
    for item in pairs:
        key, sep, value = item.partition("=")
        if not sep or key not in _PARAM_KEYS:
            raise ConfigError(f"expected KEY=VALUE with KEY in {_PARAM_KEYS}, got {item!r}")
        out[key] = value
    missing = [k for k in ("d", "s", "u", "p", "q", "v") if k not in out]
    if missing:
        raise ConfigError(f"missing parameters: {', '.join(missing)}")
    return out


def _load(args) -> dict:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = validate({"suite": DEFAULT_SUITE} if args.command == "report" else {})
    return apply_overrides(cfg, seed=args.seed, grid_n=args.grid_n)


def _run(args, cfg) -> list:
    if args.command == "report":
        return [RUNNERS[entry["experiment"]](entry, name=entry["name"]) for entry in cfg["suite"]]
    if args.command == "classify":
        tuples = [_parse_pairs(args.pairs)] if args.pairs else None
        return [RUNNERS["classify"](cfg, tuples)]
    if args.command == "equivalence" and args.norm:
        cfg["equivalence"]["norm"] = args.norm
    if args.command == "divergence":
        if args.scenario:
            cfg["divergence"]["scenario"] = args.scenario
        if args.control:
            cfg["divergence"]["control"] = True
    return [RUNNERS[args.command](cfg)]


def _print_tables(results, fmt, stream):
    for r in results:
        columns = COLUMNS[r.kind]
        if fmt == "csv":
            stream.write(_csv_text(columns, r.rows))
        else:
            rows = [[_plain(row.get(c, "")) for c in columns] for row in r.rows]
            stream.write(json.dumps({"name": r.name, "columns": columns, "rows": rows}) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load(args)
        results = _run(args, cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"bmlab: error: {exc}", file=sys.stderr)
        return 1
    for r in results:
        print(f"{r.name}: {r.status}", file=sys.stderr)
    if args.out:
        return emit_report(results, args.out, args.format)
    _print_tables(results, args.format, sys.stdout)
    return exit_code(results)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
