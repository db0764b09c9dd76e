"""Model-spec loader: JSON files validated against schemas/model_spec.json."""

import json
from pathlib import Path

import jsonschema

from domain.ports import ModelSpecSource

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "schemas" / "model_spec.json"


class JsonModelSpecSource(ModelSpecSource):
    """Reads a model specification (catalog name, parameters, optional entry table)."""

    def __init__(self, schema_path: str | Path = SCHEMA_PATH):
        self.schema_path = Path(schema_path)

    def load(self, path: str) -> dict:
        try:
            with open(path, "r", encoding="utf-8") as f:
                spec = json.load(f)
            with open(self.schema_path, "r", encoding="utf-8") as f:
                schema = json.load(f)
            jsonschema.validate(instance=spec, schema=schema)
        except FileNotFoundError as e:
            return {"success": False, "error": f"file not found: {e.filename}", "spec": None}
        except json.JSONDecodeError as e:
            return {"success": False, "error": f"invalid JSON: {e}", "spec": None}
        except jsonschema.ValidationError as e:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            return {"success": False, "error": f"schema violation at {where}: {e.message}", "spec": None}
        except Exception as e:
            return {"success": False, "error": str(e), "spec": None}
        return {"success": True, "error": None, "spec": spec}
