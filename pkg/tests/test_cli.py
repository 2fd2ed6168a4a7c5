from __future__ import annotations

import json

import pytest

from steklov_lab import reports
from steklov_lab.cli import run
from steklov_lab.experiments import AttachmentResult, ConvergenceReport

COARSE = ["--n-radial", "6", "--n-angular", "48", "--nx", "4", "--ny", "16"]


@pytest.fixture(autouse=True)
def out_env(tmp_path, monkeypatch):
    monkeypatch.setenv("STEKLOV_LAB_OUT", str(tmp_path / "out"))
    monkeypatch.chdir(tmp_path)
    return tmp_path / "out"


def test_rect_analytic(capsys, out_env):
    assert run(["rect-analytic", "--eps", "0.2", "--h", "1.0", "--condition", "dirichlet", "--count", "4"]) == 0
    assert capsys.readouterr().out.strip() == "4.778617 17.49532 34.70008 51.63421"
    assert (out_env / "rect_analytic.json").exists()


def test_topology_command(capsys):
    argv = ["topology", "--orientable", "--genus", "0", "--k", "1", "--same-component", "--preserve"]
    assert run(argv) == 0
    assert capsys.readouterr().out.strip() == "orientable genus=0 k=2"


def test_topology_json_round_trip(capsys):
    assert run(["topology", "--genus", "1", "--k", "2", "--different-component", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert reports.from_plain(AttachmentResult, data) == AttachmentResult(True, 2, 1)


def test_missing_mesh_file(capsys):
    assert run(["spectrum", "--mesh", "missing.msh"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert "missing.msh" in err["message"]
    assert err["exit_code"] == 2


def test_usage_errors(capsys):
    assert run(["nope"]) == 2
    assert run(["rect-analytic", "--eps", "abc"]) == 2
    assert run(["rect-analytic", "--eps", "-1"]) == 2
    assert run(["topology", "--k", "1", "--different-component"]) == 2
    for line in capsys.readouterr().err.strip().splitlines():
        assert json.loads(line)["exit_code"] == 2


def test_numerical_failure_exit_code(capsys):
    argv = ["find-multiplicity", "--eps", "0.3", "--h0", "1.2", "--h1", "1.6", *COARSE]
    assert run(argv) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "NoCrossing"


def test_mesh_then_spectrum(capsys, out_env):
    assert run(["mesh", "--kind", "disk", "--n-radial", "6", "--n-angular", "40"]) == 0
    capsys.readouterr()
    assert run(["spectrum", "--mesh", str(out_env / "mesh.msh"), "--count", "3", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["eigenvalues"][1] == pytest.approx(1.0, rel=2e-2)
    assert json.loads((out_env / "spectrum.json").read_text()) == data


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# rectangle\neps = 0.1\ncount = 2\n")
    assert run(["rect-analytic", "--config", str(cfg)]) == 0
    assert capsys.readouterr().out.strip() == "4.894612 19.11447"
    assert run(["rect-analytic", "--config", str(cfg), "--count", "1"]) == 0
    assert capsys.readouterr().out.strip() == "4.894612"


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("bogus = 1\n")
    assert run(["rect-analytic", "--config", str(cfg)]) == 2
    assert "bogus" in capsys.readouterr().err


def test_out_dir_flag_beats_env(tmp_path, capsys):
    d = tmp_path / "explicit"
    assert run(["rect-analytic", "--out-dir", str(d)]) == 0
    assert (d / "rect_analytic.json").exists()


def test_glue_and_converge(capsys, out_env):
    assert run(["glue", "--eps", "0.3", "--h", "2.0", *COARSE]) == 0
    assert "orientable genus=0 k=2" in capsys.readouterr().out
    assert run(["converge-eps", "--eps", "0.4", "0.3", "--json", *COARSE]) == 0
    data = json.loads(capsys.readouterr().out)
    rep = reports.from_plain(ConvergenceReport, data)
    assert rep.eps == [0.4, 0.3]
    assert (out_env / "converge_eps.csv").read_text().startswith("eps,h,j,sigma,target,deviation")


def test_experiment_commands(capsys):
    common = ["--eps", "0.3", "--h0", "1.2", "--h1", "3.3", *COARSE]
    assert run(["sweep-h", "--grid", "4", *common]) == 0
    assert run(["find-multiplicity", *common]) == 0
    assert run(["check-lemmas", *common]) == 0
    assert run(["verify-monotonicity", *common]) == 0
    out = capsys.readouterr().out
    assert "h_eps=" in out and "PASS" in out
