"""Tests for the omegafactor command line."""

from __future__ import annotations

import json

import pytest
from typer.testing import CliRunner

from omegafactor import __version__
from omegafactor.cli import app
from omegafactor.sim.model import config_text, two_vertex_instance

runner = CliRunner()


@pytest.fixture
def invoke(tmp_path):
    def _invoke(*args: str):
        return runner.invoke(app, ["--config-dir", str(tmp_path), *args])

    return _invoke


def test_version(invoke):
    result = invoke("version")
    assert result.exit_code == 0
    assert result.stdout.strip() == f"omegafactor {__version__}"


def test_single_queries(invoke):
    edge = invoke("edge", "--address", "/", "--slot", "3")
    assert edge.exit_code == 0
    assert json.loads(edge.stdout) == {"m": 3, "i": 0, "j": 2}
    assert invoke("label", "--address", "/2", "--factor", "0").stdout.strip() == "5"
    assert invoke("vertex", "--factor", "1", "--index", "1").stdout.strip() == "/0"


def test_bad_address_is_an_input_error(invoke):
    assert invoke("label", "--address", "2/1", "--factor", "0").exit_code == 2


def test_validate_builtin_and_file(invoke, tmp_path):
    ok = invoke("validate", "star-mix")
    assert ok.exit_code == 0
    assert len(json.loads(ok.stdout)["factors"]) == 2

    bad = tmp_path / "finite.json"
    bad.write_text(json.dumps({"factors": [{"components": [{"kind": "ray"}], "repeat": 2}]}))
    result = invoke("validate", str(bad))
    assert result.exit_code == 2
    assert '"valid": false' in result.output


def test_unknown_family(invoke):
    assert invoke("validate", "no-such-family").exit_code == 2


def test_configured_family(tmp_path):
    (tmp_path / "pairs.json").write_text(
        json.dumps({"factors": [{"components": [{"kind": "regular-tree", "params": {"degree": 1},
                                                 "multiplicity": "omega"}], "repeat": "omega"}]})
    )
    (tmp_path / "omegafactor.toml").write_text('[families]\npairs = "pairs.json"\n')
    result = runner.invoke(app, ["--config-dir", str(tmp_path), "edge", "--spec", "pairs",
                                 "--address", "/", "--slot", "1"])
    assert result.exit_code == 0
    assert json.loads(result.stdout) == {"m": 1, "i": 0, "j": 2}


def test_bad_config_file(tmp_path):
    (tmp_path / "omegafactor.toml").write_text("[engine]\nmax_depth = -1\n")
    assert runner.invoke(app, ["--config-dir", str(tmp_path), "version"]).exit_code == 2


def test_ball_exports(invoke, tmp_path):
    js = invoke("ball", "--radius", "1", "--sons", "2", "--factors", "2")
    assert js.exit_code == 0
    assert json.loads(js.stdout)["vertex_count"] == 3
    dot = invoke("ball", "--radius", "1", "--sons", "2", "--format", "dot")
    assert dot.stdout.startswith("graph ball {")
    out = tmp_path / "w" / "ball.json"
    assert invoke("ball", "--out", str(out)).exit_code == 0
    assert json.loads(out.read_text())["radius"] == 2
    assert invoke("ball", "--format", "xml").exit_code == 2
    assert invoke("ball", "--radius", "9").exit_code == 2


def test_verify(invoke):
    result = invoke("verify", "--spec", "lambda:3", "--radius", "1", "--sons", "3", "--factors", "2")
    assert result.exit_code == 0
    assert json.loads(result.stdout)["ok"] is True
    pipe = invoke("verify", "--pipeline", "--radius", "1", "--sons", "2", "--factors", "2")
    assert pipe.exit_code == 0
    assert {r["scope"]["stage"] for r in json.loads(pipe.stdout)["reports"]} == {"composed", "stage1"}


def test_simulate_and_check_trace(invoke, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(config_text(two_vertex_instance()))
    trace = tmp_path / "trace.jsonl"
    dot = tmp_path / "factors.dot"
    result = invoke("simulate", "--config", str(cfg), "--trace", str(trace), "--dot", str(dot))
    assert result.exit_code == 0
    assert json.loads(result.stdout)["factor_edges"] == [1, 0]
    assert "0 -- 1" in dot.read_text()

    checked = invoke("check-trace", "--trace", str(trace))
    assert checked.exit_code == 0
    assert json.loads(checked.stdout)["ok"] is True

    lines = trace.read_text().splitlines()
    trace.write_text("\n".join(lines[:-2]) + "\n")
    cut = invoke("check-trace", "--trace", str(trace))
    assert cut.exit_code == 1
    assert json.loads(cut.stdout)["reports"][0]["check"] == "format"


def test_simulate_rejects_bad_configs(invoke, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"factors": 1, "passes": 1, "vertices": 2, "edges": [],
                               "parents": [None, 0]}))
    assert invoke("simulate", "--config", str(cfg)).exit_code == 2


def test_simulate_and_check_trace_take_no_positional_paths(invoke, tmp_path):
    cfg = tmp_path / "sim.json"
    cfg.write_text(config_text(two_vertex_instance()))
    assert invoke("simulate", str(cfg)).exit_code == 2
    assert invoke("check-trace", str(cfg)).exit_code == 2
    assert invoke("simulate").exit_code == 2
    assert invoke("check-trace").exit_code == 2


def test_negative_multiplicity_is_an_input_error(invoke, tmp_path):
    bad = tmp_path / "negative.json"
    bad.write_text(json.dumps({"factors": [{"components": [{"kind": "ray", "multiplicity": -1}],
                                            "repeat": "omega"}]}))
    result = invoke("validate", str(bad))
    assert result.exit_code == 2
    assert result.exception is None or isinstance(result.exception, SystemExit)
    assert invoke("edge", "--spec", str(bad), "--address", "/", "--slot", "0").exit_code == 2


@pytest.mark.parametrize("name", ["lambda:0", "lambda:-2", "lambda:x"])
def test_bad_builtin_degree_is_an_input_error(invoke, name):
    result = invoke("validate", name)
    assert result.exit_code == 2
    assert result.exception is None or isinstance(result.exception, SystemExit)
    assert invoke("ball", "--spec", name, "--radius", "1").exit_code == 2


def test_deep_k2_labels_answer_quickly(invoke):
    assert invoke("label", "--address", "/5/5/5/5", "--factor", "1").exit_code == 0
    assert invoke("label", "--address", "/1/1/1/1/1/1", "--factor", "1").exit_code == 0
    window = invoke("ball", "--radius", "6", "--sons", "2", "--factors", "2", "--max-depth", "6")
    assert window.exit_code == 0
    assert json.loads(window.stdout)["vertex_count"] == 127
