"""Scattering-table loader: tabulated S(k1, k2) samples from JSON."""

import json
from pathlib import Path

import jsonschema

from domain.cba_engine import TabulatedScattering
from domain.errors import YbeForgeError
from domain.ports import ScatteringTableSource

SCHEMA_PATH = Path(__file__).resolve().parents[2] / "schemas" / "scattering_table.json"
DEFAULT_TOLERANCE = 1e-6


def _pair(v) -> complex:
    return complex(float(v[0]), float(v[1]))


class JsonScatteringTable(ScatteringTableSource):
    """Builds a TabulatedScattering from ``{"tolerance": .., "samples": [{"k1", "k2", "S"}, ..]}``."""

    def __init__(self, schema_path: str | Path = SCHEMA_PATH):
        self.schema_path = Path(schema_path)

    def load(self, path: str) -> dict:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            with open(self.schema_path, "r", encoding="utf-8") as f:
                schema = json.load(f)
            jsonschema.validate(instance=data, schema=schema)
            samples = [(_pair(s["k1"]), _pair(s["k2"]), _pair(s["S"])) for s in data["samples"]]
            table = TabulatedScattering(samples, data.get("tolerance", DEFAULT_TOLERANCE))
        except FileNotFoundError as e:
            return {"success": False, "error": f"file not found: {e.filename}", "table": None}
        except json.JSONDecodeError as e:
            return {"success": False, "error": f"invalid JSON: {e}", "table": None}
        except jsonschema.ValidationError as e:
            return {"success": False, "error": f"schema violation: {e.message}", "table": None}
        except YbeForgeError as e:
            return {"success": False, "error": str(e), "table": None}
        return {"success": True, "error": None, "table": table, "samples": len(table)}
