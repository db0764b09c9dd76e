"""Integration tests for the JSON adapters."""

import json

import pytest

from domain.cba_engine import TabulatedScattering
from domain.ports import ModelSpecSource, ReportSink, ScatteringTableSource
from tools.adapters import JsonModelSpecSource, JsonReportSink, JsonScatteringTable
from tools.report_codec import envelope


def write_json(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestJsonModelSpecSource:
    def test_implements_port(self):
        assert issubclass(JsonModelSpecSource, ModelSpecSource)
        assert isinstance(JsonModelSpecSource(), ModelSpecSource)

    def test_load_nonexistent_file(self):
        result = JsonModelSpecSource().load("/nonexistent/spec.json")
        assert result["success"] is False
        assert "not found" in result["error"]
        assert result["spec"] is None

    def test_load_valid_spec(self, tmp_path):
        path = write_json(tmp_path / "spec.json", {"name": "custom", "entries": [[1, 3, 1.0, 0.0]]})
        result = JsonModelSpecSource().load(path)
        assert result["success"] is True
        assert result["spec"]["entries"] == [[1, 3, 1.0, 0.0]]

    def test_schema_violation(self, tmp_path):
        path = write_json(tmp_path / "spec.json", {"params": {"k": 2}})
        result = JsonModelSpecSource().load(path)
        assert result["success"] is False
        assert "schema violation" in result["error"]

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "spec.json"
        path.write_text("{", encoding="utf-8")
        assert "invalid JSON" in JsonModelSpecSource().load(str(path))["error"]


class TestJsonScatteringTable:
    def test_implements_port(self):
        assert isinstance(JsonScatteringTable(), ScatteringTableSource)

    def test_load_nonexistent_file(self):
        result = JsonScatteringTable().load("/nonexistent/table.json")
        assert result["success"] is False
        assert result["table"] is None

    def test_load_table(self, tmp_path):
        data = {
            "tolerance": 1e-3,
            "samples": [
                {"k1": [0.0, 0.0], "k2": [3.14159, 0.0], "S": [-1.0, 0.0]},
                {"k1": [3.14159, 0.0], "k2": [0.0, 0.0], "S": [-1.0, 0.0]},
            ],
        }
        result = JsonScatteringTable().load(write_json(tmp_path / "table.json", data))
        assert result["success"] is True
        assert result["samples"] == 2
        assert isinstance(result["table"], TabulatedScattering)
        assert result["table"](0.0, 3.1416) == -1

    def test_missing_samples(self, tmp_path):
        result = JsonScatteringTable().load(write_json(tmp_path / "table.json", {"tolerance": 1.0}))
        assert result["success"] is False
        assert "schema violation" in result["error"]


class TestJsonReportSink:
    @pytest.fixture
    def report(self):
        tolerances = {k: 1e-10 for k in ("structural", "algebraic", "differential", "gauge", "obstruction", "existence")}
        return envelope("curve", {"command": "curve", "seed": 1}, tolerances, True, {"points": [1j]})

    def test_implements_port(self):
        assert isinstance(JsonReportSink(), ReportSink)

    def test_validate(self, report):
        assert JsonReportSink().validate(report)["success"] is True

    def test_validate_rejects_unknown_command(self, report):
        result = JsonReportSink().validate({**report, "command": "solve"})
        assert result["success"] is False
        assert "command" in result["error"]

    def test_write_creates_directories(self, report, tmp_path):
        path = tmp_path / "nested" / "report.json"
        result = JsonReportSink().write(report, str(path))
        assert result["success"] is True
        assert json.loads(path.read_text(encoding="utf-8"))["result"]["points"] == [[0.0, 1.0]]

    def test_invalid_report_is_not_written(self, report, tmp_path):
        path = tmp_path / "report.json"
        bad = {k: v for k, v in report.items() if k != "seed"}
        result = JsonReportSink().write(bad, str(path))
        assert result["success"] is False
        assert not path.exists()
