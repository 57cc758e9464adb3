"""Tests for run configuration and reports"""

import json

import pytest

from seqspace.config import (
    SCHEMA,
    OutputFormat,
    RunConfig,
    Settings,
    load_model,
    load_space,
    parse_vector,
    read_json,
)
from seqspace.errors import ConfigError
from seqspace.operators import ProjectionSpec
from seqspace.report import Report, emit, render, report_rows
from seqspace.spaces import LorentzSpec


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("SEQSPACE_SEED", "7")
    monkeypatch.setenv("SEQSPACE_RESTARTS", "12")
    monkeypatch.setenv("SEQSPACE_FORMAT", "csv")
    settings = Settings()
    assert settings.seed == 7
    assert settings.restarts == 12
    assert settings.format is OutputFormat.CSV
    config = RunConfig.from_settings(settings)
    assert config.seed == 7
    assert config.budget.search_budget().restarts == 12
    assert config.output.format is OutputFormat.CSV


def test_flags_override_settings():
    config = RunConfig.from_settings(Settings(), seed=3, budget=10, tol=1e-6, format="json", out=None)
    assert config.seed == 3
    assert config.budget.restarts == 10
    assert config.tolerances.absolute == 1e-6
    assert config.output.format is OutputFormat.JSON


def test_config_hash_ignores_output_only():
    base = RunConfig(seed=1)
    assert base.config_hash() == RunConfig(seed=1, output={"format": "json"}).config_hash()
    assert base.config_hash() != RunConfig(seed=2).config_hash()
    spaced = RunConfig(seed=1, space=LorentzSpec(w=[1.0, 0.5], p=2.0))
    assert spaced.config_hash() != base.config_hash()
    assert len(base.config_hash()) == 16


def test_invalid_flag_names_the_field():
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_settings(Settings(), seed=-1)
    assert excinfo.value.field == "seed"


def test_read_json_reports_position(tmp_path):
    path = tmp_path / "space.json"
    path.write_text('{"kind": "lorentz",\n "w": [1, 0.5,]}')
    with pytest.raises(ConfigError) as excinfo:
        read_json(path)
    assert excinfo.value.line == 2
    assert str(path) in str(excinfo.value)
    with pytest.raises(ConfigError):
        read_json(tmp_path / "missing.json")


def test_load_space_and_model(tmp_path):
    path = tmp_path / "space.json"
    path.write_text(json.dumps({"kind": "lorentz", "w": [1.0, 0.5], "p": 2.0}))
    assert load_space(path) == LorentzSpec(w=[1.0, 0.5], p=2.0)
    path.write_text(json.dumps({"kind": "lorentz", "w": [1.0, 0.5], "p": 0.5}))
    with pytest.raises(ConfigError) as excinfo:
        load_space(path)
    assert "p" in excinfo.value.field
    projection = tmp_path / "projection.json"
    projection.write_text(json.dumps({"fs": [[1.0, 0.0]], "us": [[1.0, 1.0]]}))
    assert load_model(projection, ProjectionSpec).us == [[1.0, 1.0]]


def test_parse_vector():
    assert parse_vector("3,4") == [3.0, 4.0]
    assert parse_vector("1, -0.5, 2e-3") == [1.0, -0.5, 0.002]
    with pytest.raises(ConfigError):
        parse_vector("1,x")


def _report():
    return Report.build("norm", RunConfig(seed=5), {"norm": 5.0, "x": [3.0, 4.0], "verdict": {"status": "Positive"}})


def test_report_json():
    report = _report()
    data = json.loads(render(report, OutputFormat.JSON))
    assert data["schema"] == SCHEMA
    assert data["seed"] == 5
    assert data["result"]["norm"] == 5.0
    assert data["config_hash"] == RunConfig(seed=5).config_hash()


def test_report_rows_and_csv():
    rows = dict(report_rows(_report()))
    assert rows["norm"] == "5"
    assert rows["x"] == "3 4"
    assert rows["verdict.status"] == "Positive"
    lines = render(_report(), OutputFormat.CSV).splitlines()
    assert lines[0] == "key,value"
    assert "norm,5" in lines


def test_emit_writes_file(tmp_path):
    path = tmp_path / "out.txt"
    text = emit(_report(), OutputFormat.HUMAN, path)
    assert path.read_text() == text + "\n"
    assert text.splitlines()[0].startswith("schema")
