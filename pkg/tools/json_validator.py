#!/usr/bin/env python3
"""
json_validator.py — Checks reports, run configurations and model specs against their schemas.

Usage:
    python tools/json_validator.py <file.json> <schema>
    python tools/json_validator.py output/ report          # batch

<schema> is a path or one of the names in schemas/ (report, run_config,
model_spec, scattering_table).
"""

import glob
import json
import os
import sys
from pathlib import Path

from jsonschema import Draft7Validator

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


def resolve_schema(schema: str) -> str:
    """Schema name or path -> path."""
    candidate = SCHEMA_DIR / f"{schema}.json"
    if not os.path.exists(schema) and candidate.exists():
        return str(candidate)
    return schema


def validate_file(json_path: str, schema: str) -> dict:
    """Validates one JSON file; every violation is listed, the first one's path in ``error_path``."""
    schema_path = resolve_schema(schema)
    result = {"file": json_path, "schema": schema_path, "valid": False, "errors": []}

    try:
        with open(schema_path, encoding="utf-8") as f:
            validator = Draft7Validator(json.load(f))
        with open(json_path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        result["errors"].append(f"file not found: {e}")
        return result
    except json.JSONDecodeError as e:
        result["errors"].append(f"invalid JSON: {e}")
        return result

    violations = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if not violations:
        result["valid"] = True
        return result
    for error in violations:
        where = "/".join(map(str, error.absolute_path)) or "<root>"
        result["errors"].append(f"validation failed at {where}: {error.message}")
    result["error_path"] = list(violations[0].absolute_path)
    return result


def validate_batch(directory: str, schema: str) -> dict:
    """Validates every JSON file of a directory; files starting with '_' are skipped."""
    json_files = sorted(
        p for p in glob.glob(os.path.join(directory, "*.json")) if not os.path.basename(p).startswith("_")
    )
    details = [validate_file(p, schema) for p in json_files]
    valid = sum(d["valid"] for d in details)
    return {
        "schema": resolve_schema(schema),
        "total": len(details),
        "valid": valid,
        "invalid": len(details) - valid,
        "details": details,
    }


def main():
    if len(sys.argv) < 3:
        print("Usage: python json_validator.py <file_or_directory> <schema>", file=sys.stderr)
        sys.exit(2)

    target, schema = sys.argv[1], sys.argv[2]
    if os.path.isdir(target):
        results = validate_batch(target, schema)
        print(json.dumps(results, ensure_ascii=False, indent=2))
        print(f"{results['valid']}/{results['total']} valid", file=sys.stderr)
        for d in results["details"]:
            if not d["valid"]:
                print(f"  {d['file']}: {d['errors'][0]}", file=sys.stderr)
        sys.exit(0 if results["invalid"] == 0 else 1)

    result = validate_file(target, schema)
    print(json.dumps(result, ensure_ascii=False, indent=2))
    print(f"{target}: {'valid' if result['valid'] else 'invalid'}", file=sys.stderr)
    sys.exit(0 if result["valid"] else 1)


if __name__ == "__main__":
    main()
