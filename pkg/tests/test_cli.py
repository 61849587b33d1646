import json
from pathlib import Path

import pytest

from mktp2.cli import main

SCHEMA_PATH = Path(__file__).resolve().parents[1] / "docs" / "report.schema.json"


@pytest.fixture(scope="module")
def validator():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(SCHEMA_PATH.read_text())
    return lambda doc: jsonschema.validate(doc, schema)


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def run_report(capsys, validator, *argv):
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    report = json.loads(out)
    validator(report)
    return report


def result_map(report):
    return {entry["property"]: entry for entry in report["results"]}


def test_classify_marshall_olkin_beta_one(capsys, validator):
    report = run_report(capsys, validator, "classify", "--family", "mo", "--param", "alpha=0.5,beta=1")
    entry = result_map(report)["mktp2"]
    assert entry["status"] == "holds"
    assert entry["method"] == "analytic"


def test_classify_tawn_mix_boundary_sum(capsys, validator):
    report = run_report(
        capsys, validator, "classify", "--family", "tawn-mix", "--param", "theta=1.25,kappa=-0.25"
    )
    assert result_map(report)["mktp2"]["status"] == "holds"


def test_classify_frechet_pqd_fails(capsys, validator):
    report = run_report(
        capsys, validator, "classify", "--family", "frechet", "--param", "alpha=0.3,beta=0.1"
    )
    assert result_map(report)["pqd"]["status"] == "fails"


def test_check_single_property_analytic(capsys, validator):
    report = run_report(
        capsys, validator, "check", "--family", "gumbel", "--param", "alpha=2", "--property", "mktp2"
    )
    entry = result_map(report)["mktp2"]
    assert entry["status"] == "holds"
    assert entry["method"] == "analytic"


def test_witness_evc_log_rectangle(capsys, validator):
    report = run_report(capsys, validator, "witness", "--family", "evc-log", "--property", "mktp2")
    entry = result_map(report)["mktp2"]
    assert entry["status"] == "fails"
    u1, u2, v1, v2 = entry["witness"]["points"]
    assert 0.85 <= u1 <= u2 < 1.0
    assert 0.0 < v1 <= v2 < 1.0
    assert entry["witness"]["defect"] > 1e-9


def test_witness_round_trip_through_check(capsys, validator):
    report = run_report(capsys, validator, "witness", "--family", "evc-log", "--property", "mktp2")
    entry = result_map(report)["mktp2"]
    u1, u2, v1, v2 = entry["witness"]["points"]
    defect = entry["witness"]["defect"]
    rect_arg = f"{u1!r},{u2!r},{v1!r},{v2!r}"
    second = run_report(
        capsys,
        validator,
        "check",
        "--family",
        "evc-log",
        "--property",
        "mktp2",
        "--rect",
        rect_arg,
    )
    redo = result_map(second)["mktp2"]
    assert redo["status"] == "fails"
    assert abs(redo["witness"]["defect"] - defect) <= 1e-12


def test_witness_not_applicable_exit_code(capsys):
    code, out, err = run_cli(
        capsys, "witness", "--family", "gumbel", "--param", "alpha=2", "--property", "mktp2"
    )
    assert code == 3
    assert out == ""
    assert "nothing to construct" in err


def test_usage_errors_exit_two(capsys):
    assert run_cli(capsys, "classify", "--family", "nosuch")[0] == 2
    assert run_cli(capsys, "classify", "--family", "gumbel", "--param", "alpha=0.5")[0] == 2
    assert run_cli(capsys, "classify", "--family", "fgm", "--param", "theta=oops")[0] == 2
    assert run_cli(capsys, "check", "--family", "pi", "--property", "zzz")[0] == 2


def test_sample_csv(tmp_path, capsys):
    out = tmp_path / "s.csv"
    code, _, err = run_cli(
        capsys,
        "sample",
        "--family",
        "evc-log",
        "--n",
        "10000",
        "--seed",
        "42",
        "--out",
        str(out),
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "u,v"
    assert len(lines) == 10_001


def test_grid_export(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code, _, _ = run_cli(
        capsys,
        "grid-export",
        "--family",
        "evc-jump",
        "--quantity",
        "FA",
        "--grid",
        "32",
        "--out",
        str(out),
    )
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "u,v,value"
    assert len(lines) == 1 + 32 * 32
    code, _, _ = run_cli(
        capsys, "grid-export", "--family", "m", "--quantity", "density", "--out", str(out)
    )
    assert code == 2  # M has no density
    code, _, _ = run_cli(
        capsys, "grid-export", "--family", "fgm", "--quantity", "FA", "--out", str(out)
    )
    assert code == 2  # FA is an EVC quantity


def test_reports_are_deterministic(tmp_path, capsys):
    argv = ["classify", "--family", "frechet", "--param", "alpha=0.5,beta=0.25", "--grid", "64"]
    first = run_cli(capsys, *argv)[1]
    second = run_cli(capsys, *argv)[1]
    assert first == second


def test_thread_cap_does_not_change_output(capsys, monkeypatch):
    argv = ["classify", "--family", "fgm", "--param", "theta=0.7", "--grid", "64"]
    monkeypatch.delenv("COPULA_THREADS", raising=False)
    serial = run_cli(capsys, *argv)[1]
    monkeypatch.setenv("COPULA_THREADS", "4")
    threaded = run_cli(capsys, *argv)[1]
    assert serial == threaded
