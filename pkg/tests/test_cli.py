from __future__ import annotations

import json

import pytest

from constraint_forge.checks import CheckReport
from constraint_forge.cli import main
from constraint_forge.report import CliConfig, render, run_suite, to_markdown


def test_bracket_command(capsys):
    assert main(["bracket", "S", "K"]) == 0
    assert capsys.readouterr().out.strip() == "4*P"
    assert main(["bracket", "S - 1", "P", "--dirac"]) == 0
    assert capsys.readouterr().out.strip() == "0"


def test_bad_expression(capsys):
    assert main(["bracket", "1/0", "P"]) == 2
    assert "division by zero" in capsys.readouterr().err


def test_bft_series(capsys):
    assert main(["bft-series", "--field", "q", "--order", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert "theta" in lines[1]


def test_weyl(capsys):
    assert main(["weyl", "--c", "symbolic"]) == 0
    out = capsys.readouterr().out
    assert "eigenvalue" in out and "c^2" in out


def test_spectrum_json(capsys):
    assert main(["spectrum", "--d", "3", "--lmax", "2", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["c_squared"] == "1"
    assert [r["e_bft"] for r in data["rows"]] == ["0", "1", "3"]


def test_verify_subset_json(tmp_path):
    out = tmp_path / "r.json"
    code = main(["verify", "brackets", "--format", "json", "--out", str(out)])
    assert code == 0
    data = json.loads(out.read_text(encoding="utf-8"))
    assert all(set(item) == {"name", "status", "residual", "elapsed_ms", "citation"} for item in data)
    assert {item["status"] for item in data} == {"pass"}


def test_verify_mutation_fails(capsys):
    assert main(["verify", "weyl", "--mutate", "spectrum-shift"]) == 1
    assert "fail" in capsys.readouterr().out


def test_unknown_mutation_rejected():
    with pytest.raises(SystemExit):
        main(["verify", "--mutate", "nope"])
    with pytest.raises(ValueError):
        CliConfig(mutate="nope")


def test_log_env(monkeypatch, capsys):
    monkeypatch.setenv("CF_LOG", "debug")
    assert main(["verify", "brst", "--format", "md"]) == 0


def test_report_shapes():
    r = CheckReport("x", "fail", "S", 1.5, "why")
    assert json.loads(render([r], "json"))[0]["status"] == "fail"
    assert "| x | fail |" in to_markdown([r])
    with pytest.raises(ValueError):
        CheckReport("x", "PASS")
    with pytest.raises(ValueError):
        render([r], "xml")


def test_each_group_runs():
    for target in ("brackets", "bft", "weyl", "brst"):
        reports, code = run_suite(CliConfig(target=target))
        assert code == 0, [r for r in reports if r.status == "fail"]
