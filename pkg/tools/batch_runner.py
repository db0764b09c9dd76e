#!/usr/bin/env python3
"""
batch_runner.py — Runs every RunConfig JSON file of a directory.

Usage:
    python tools/batch_runner.py <config_dir> <output_dir>

Writes one <name>_report.json per configuration plus _batch_report.json.
Reports carry no timestamps, so identical inputs give identical files.
"""

import glob
import json
import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import pandas as pd
from tabulate import tabulate

from tools.adapters import JsonReportSink
from tools.report_codec import dumps
from tools.run_config import ConfigError, RunConfig
from tools.settings import configure_logging, load_settings
from tools.ybe_forge import EXIT_PASS, EXIT_USAGE, execute


def process_single_config(config_path: str, output_dir: str, settings: dict) -> dict:
    """Runs one configuration and writes its report."""
    name = Path(config_path).stem
    result = {
        "file": os.path.basename(config_path),
        "command": None,
        "model": None,
        "status": "pending",
        "exit_code": None,
        "report_file": None,
        "errors": [],
    }

    try:
        config = RunConfig.from_file(config_path)
    except ConfigError as e:
        result["status"] = "invalid"
        result["exit_code"] = EXIT_USAGE
        result["errors"].append(str(e))
        return result

    result["command"] = config.command
    result["model"] = config.model
    code, report = execute(config, settings)
    result["exit_code"] = code
    if code == EXIT_USAGE:
        result["status"] = "invalid"
        result["errors"].append(report["error"])
        return result

    report_path = os.path.join(output_dir, f"{name}_report.json")
    written = JsonReportSink().write(report, report_path)
    if not written["success"]:
        result["errors"].append(f"write: {written['error']}")
    else:
        result["report_file"] = os.path.basename(report_path)
    if report.get("error"):
        result["errors"].append(report["error"])
    result["status"] = "passed" if code == EXIT_PASS and not result["errors"] else "failed"
    return result


def run_batch(input_dir: str, output_dir: str, settings: dict | None = None) -> dict:
    """Runs every configuration of a directory, in file-name order."""
    settings = load_settings() if settings is None else settings
    os.makedirs(output_dir, exist_ok=True)

    config_files = sorted(
        p for p in glob.glob(os.path.join(input_dir, "*.json")) if not os.path.basename(p).startswith("_")
    )
    if not config_files:
        print(f"no run configuration found in {input_dir}", file=sys.stderr)
        return {"input_dir": input_dir, "output_dir": output_dir, "total": 0, "runs": []}

    print(f"{len(config_files)} run configurations in {input_dir}", file=sys.stderr)
    batch_result = {
        "input_dir": input_dir,
        "output_dir": output_dir,
        "total": len(config_files),
        "passed": 0,
        "failed": 0,
        "invalid": 0,
        "runs": [],
    }

    for i, path in enumerate(config_files, 1):
        print(f"[{i}/{len(config_files)}] {os.path.basename(path)}", file=sys.stderr)
        run = process_single_config(path, output_dir, settings)
        batch_result["runs"].append(run)
        batch_result[run["status"]] += 1

    report_path = os.path.join(output_dir, "_batch_report.json")
    with open(report_path, "w", encoding="utf-8") as f:
        f.write(dumps(batch_result))
        f.write("\n")

    summary = pd.DataFrame(batch_result["runs"], columns=["file", "command", "model", "status", "exit_code"])
    print(tabulate(summary.fillna("").values.tolist(), headers=list(summary.columns), tablefmt="grid"), file=sys.stderr)
    print(
        f"{batch_result['passed']} passed, {batch_result['failed']} failed, "
        f"{batch_result['invalid']} invalid; batch report: {report_path}",
        file=sys.stderr,
    )
    return batch_result


def main():
    import argparse

    parser = argparse.ArgumentParser(description="Batch execution of ybe-forge run configurations")
    parser.add_argument("input_dir", help="directory of RunConfig JSON files")
    parser.add_argument("output_dir", help="directory for reports")
    parser.add_argument("--settings", help="alternate settings.yaml")
    args = parser.parse_args()

    settings = load_settings(args.settings)
    configure_logging(settings)
    result = run_batch(args.input_dir, args.output_dir, settings)
    print(json.dumps(result, ensure_ascii=False, indent=2))
    sys.exit(0 if result.get("failed", 0) == 0 and result.get("invalid", 0) == 0 else 1)


if __name__ == "__main__":
    main()
