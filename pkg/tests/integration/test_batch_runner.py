"""Integration tests for the batch runner."""

import json

import pytest

from tools.batch_runner import process_single_config, run_batch
from tools.settings import load_settings


@pytest.fixture(scope="module")
def settings():
    return load_settings()


def write_config(directory, name, data):
    path = directory / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


@pytest.fixture
def config_dir(tmp_path):
    directory = tmp_path / "configs"
    directory.mkdir()
    write_config(directory, "a_curve.json", {"command": "curve", "seed": 1, "params": {"lambda4": 0.3}})
    write_config(directory, "b_mutated.json", {"command": "verify", "seed": 2, "model": "zf", "samples": 4, "mutate": True})
    write_config(directory, "c_broken.json", {"command": "solve", "seed": 3})
    write_config(directory, "_notes.json", {"command": "curve"})
    return directory


class TestProcessSingleConfig:
    def test_passing_run(self, config_dir, tmp_path, settings):
        result = process_single_config(str(config_dir / "a_curve.json"), str(tmp_path), settings)
        assert result["status"] == "passed"
        assert result["exit_code"] == 0
        assert result["report_file"] == "a_curve_report.json"
        assert (tmp_path / "a_curve_report.json").exists()

    def test_invalid_config(self, config_dir, tmp_path, settings):
        result = process_single_config(str(config_dir / "c_broken.json"), str(tmp_path), settings)
        assert result["status"] == "invalid"
        assert result["exit_code"] == 2
        assert result["errors"]
        assert result["report_file"] is None

    def test_usage_error_during_execution(self, tmp_path, settings):
        path = write_config(tmp_path, "gb.json", {"command": "verify", "seed": 1, "model": "gb"})
        result = process_single_config(path, str(tmp_path), settings)
        assert result["status"] == "invalid"
        assert result["model"] == "gb"


class TestRunBatch:
    def test_counts_and_files(self, config_dir, tmp_path, settings):
        out = tmp_path / "reports"
        result = run_batch(str(config_dir), str(out), settings)
        assert result["total"] == 3
        assert (result["passed"], result["failed"], result["invalid"]) == (1, 1, 1)
        assert (out / "a_curve_report.json").exists()
        assert (out / "b_mutated_report.json").exists()
        assert not (out / "c_broken_report.json").exists()
        batch = json.loads((out / "_batch_report.json").read_text(encoding="utf-8"))
        assert [r["file"] for r in batch["runs"]] == ["a_curve.json", "b_mutated.json", "c_broken.json"]

    def test_reports_are_reproducible(self, config_dir, tmp_path, settings):
        first = run_batch(str(config_dir), str(tmp_path / "one"), settings)
        second = run_batch(str(config_dir), str(tmp_path / "two"), settings)
        assert first["passed"] == second["passed"]
        a = (tmp_path / "one" / "a_curve_report.json").read_text(encoding="utf-8")
        b = (tmp_path / "two" / "a_curve_report.json").read_text(encoding="utf-8")
        assert a == b

    def test_empty_directory(self, tmp_path, settings):
        empty = tmp_path / "empty"
        empty.mkdir()
        result = run_batch(str(empty), str(tmp_path / "out"), settings)
        assert result["total"] == 0
        assert not (tmp_path / "out" / "_batch_report.json").exists()
