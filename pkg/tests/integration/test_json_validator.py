"""Integration tests for tools.json_validator against the report schema."""

import json
from pathlib import Path

from tools.json_validator import validate_batch, validate_file
from tools.report_codec import dumps, envelope

SCHEMA = str(Path(__file__).resolve().parents[2] / "schemas" / "report.json")
TOLERANCES = {k: 1e-10 for k in ("structural", "algebraic", "differential", "gauge", "obstruction", "existence")}


def write_report(path, **overrides):
    report = envelope("curve", {"command": "curve", "seed": 5}, TOLERANCES, True, {"points": []})
    report.update(overrides)
    path.write_text(dumps(report), encoding="utf-8")
    return str(path)


class TestValidateFile:
    def test_valid_report(self, tmp_path):
        result = validate_file(write_report(tmp_path / "r.json"), SCHEMA)
        assert result["valid"] is True
        assert result["errors"] == []

    def test_wrong_type(self, tmp_path):
        result = validate_file(write_report(tmp_path / "r.json", passed="yes"), SCHEMA)
        assert result["valid"] is False
        assert result["error_path"] == ["passed"]

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "r.json"
        path.write_text("[1,", encoding="utf-8")
        assert "invalid JSON" in validate_file(str(path), SCHEMA)["errors"][0]

    def test_missing_file(self):
        assert "file not found" in validate_file("/nonexistent.json", SCHEMA)["errors"][0]


class TestValidateBatch:
    def test_counts_and_skips_batch_reports(self, tmp_path):
        write_report(tmp_path / "a.json")
        write_report(tmp_path / "b.json", seed="x")
        (tmp_path / "_batch_report.json").write_text(json.dumps({"total": 2}), encoding="utf-8")
        results = validate_batch(str(tmp_path), SCHEMA)
        assert (results["total"], results["valid"], results["invalid"]) == (2, 1, 1)


class TestSchemaNames:
    def test_name_resolves_to_the_schema_directory(self, tmp_path):
        result = validate_file(write_report(tmp_path / "r.json"), "report")
        assert result["valid"] is True
        assert result["schema"].endswith("report.json")

    def test_every_violation_is_listed(self, tmp_path):
        result = validate_file(write_report(tmp_path / "r.json", passed="yes", seed=-1), "report")
        assert len(result["errors"]) == 2
        assert result["error_path"] == ["passed"]
