import csv
import json

import pytest

from bmlab import cli
from bmlab.experiments import COLUMNS, FAIL, INCONCLUSIVE, PASS, ExperimentResult
from bmlab.report import emit_report, exit_code


def _res(name, status, kind="classify"):
    return ExperimentResult(name, kind, status, {"x": float("inf")}, [], {"s": [(1, 2.0)]}, {"nan": float("nan")})


def test_exit_code_precedence():
    assert exit_code([]) == 0
    assert exit_code([_res("a", PASS)]) == 0
    assert exit_code([_res("a", PASS), _res("b", INCONCLUSIVE)]) == 3
    assert exit_code([_res("a", INCONCLUSIVE), _res("b", FAIL)]) == 2


def test_empty_results_write_manifest_only(tmp_path):
    assert emit_report([], tmp_path) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["manifest.json"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["experiments"] == [] and man["exit_code"] == 0
    assert man["backend"] in ("cython", "python")


def test_report_files_and_non_finite(tmp_path):
    code = emit_report([_res("a", INCONCLUSIVE)], tmp_path, "json")
    assert code == 3
    assert sorted(p.name for p in tmp_path.iterdir()) == ["a.json", "a.s.csv", "manifest.json"]
    man = json.loads((tmp_path / "manifest.json").read_text())
    assert man["experiments"][0]["summary"]["x"] == "inf"
    assert man["experiments"][0]["metadata"]["nan"] == "nan"
    assert (tmp_path / "a.s.csv").read_text() == "x,y\n1,2.0\n"


def test_report_rejects_bad_input(tmp_path):
    with pytest.raises(ValueError):
        emit_report([_res("a", PASS), _res("a", PASS)], tmp_path)
    with pytest.raises(ValueError):
        emit_report([], tmp_path, "xml")


def test_cli_classify_stdout(capsys):
    assert cli.main(["classify", "d=1", "s=0.7", "u=1", "p=0.5", "q=2", "v=1", "N=2"]) == 0
    out = capsys.readouterr()
    rows = list(csv.reader(out.out.splitlines()))
    assert rows[0] == COLUMNS["classify"]
    assert rows[1][8] == "Open"
    assert "classify: pass" in out.err


def test_cli_classify_json(capsys):
    assert cli.main(["classify", "--format", "json", "d=1", "s=-1", "u=2", "p=2", "q=inf", "v=2"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["columns"] == COLUMNS["classify"]
    assert doc["rows"][0][4] == "inf" and doc["rows"][0][9] == "s<0"


@pytest.mark.parametrize("argv", [
    ["classify", "d=1", "s=1"], ["classify", "x=1", "d=1", "s=1", "u=2", "p=2", "q=2", "v=2"],
    ["classify", "d=1", "s=1", "u=1", "p=2", "q=2", "v=2"],
    ["equivalence", "--config", "/nonexistent.yaml"],
])
def test_cli_config_errors_exit_1(argv, capsys):
    assert cli.main(argv) == 1
    assert "bmlab: error" in capsys.readouterr().err


def test_cli_bad_seed_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        cli.main(["classify", "--seed", "-1"])
    assert exc.value.code == 2


def test_cli_report_is_byte_identical(tmp_path, capsys):
    cfg = tmp_path / "suite.yaml"
    cfg.write_text(
        "seed: 11\n"
        "grid: {n: 1024}\n"
        "equivalence: {count: 2}\n"
        "suite:\n"
        "  - {experiment: equivalence, name: eq}\n"
        "  - {experiment: divergence, name: osw, divergence: {scenario: oswald}}\n"
        "  - {experiment: classify, name: tbl, classify: {tuples: [{d: 1, s: 1, u: 2, p: 2, q: 2, v: 2, N: 2}]}}\n"
    )
    outs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli.main(["report", "--config", str(cfg), "--out", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outs[0] == outs[1]
    assert set(outs[0]) == {"manifest.json", "eq.csv", "eq.ratio.csv", "osw.csv", "osw.partials.csv", "tbl.csv"}
    man = json.loads(outs[0]["manifest.json"])
    assert [e["name"] for e in man["experiments"]] == ["eq", "osw", "tbl"]
    assert man["experiments"][0]["metadata"]["seed"] == 11


def test_cli_divergence_inconclusive_exit_3(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("divergence: {T_values: [8, 16, 32]}\n")
    assert cli.main(["divergence", "--config", str(cfg), "--scenario", "plateau-s0"]) == 3


def test_cli_failure_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("grid: {n: 1024}\nequivalence: {count: 2, ratio_envelope: 1.0}\n")
    assert cli.main(["equivalence", "--config", str(cfg)]) == 2
