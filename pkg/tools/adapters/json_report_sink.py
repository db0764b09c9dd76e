"""Report sink: validates a report against schemas/report.json and writes it."""

import json
import os
from pathlib import Path

import jsonschema

from domain.ports import ReportSink
from tools.report_codec import dumps

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "schemas" / "report.json"


class JsonReportSink(ReportSink):
    """Single writer for CLI reports."""

    def __init__(self, schema_path: str | Path = SCHEMA_PATH):
        self.schema_path = Path(schema_path)

    def validate(self, report: dict) -> dict:
        try:
            with open(self.schema_path, "r", encoding="utf-8") as f:
                schema = json.load(f)
            jsonschema.validate(instance=report, schema=schema)
        except jsonschema.ValidationError as e:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            return {"success": False, "error": f"report violates schema at {where}: {e.message}"}
        except Exception as e:
            return {"success": False, "error": str(e)}
        return {"success": True, "error": None}

    def write(self, report: dict, path: str) -> dict:
        check = self.validate(report)
        if not check["success"]:
            return {**check, "path": path}
        try:
            parent = os.path.dirname(path)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(path, "w", encoding="utf-8") as f:
                f.write(dumps(report))
                f.write("\n")
        except OSError as e:
            return {"success": False, "error": str(e), "path": path}
        return {"success": True, "error": None, "path": path}
