"""
report_codec.py — JSON encoding of domain results.

Complex numbers become [re, im] pairs, arrays become nested lists, enums their
value, dataclasses their field dicts. Non-finite floats are written as the
strings "inf", "-inf" and "nan" so the output stays strict JSON.
"""

from __future__ import annotations

import dataclasses
import json
from enum import Enum

import numpy as np

SCHEMA_ID = "ybe-forge/1"
TOOL_NAME = "ybe-forge"
TOOL_VERSION = "1.0.0"


def _float(x: float):
    x = float(x)
    if np.isfinite(x):
        return x
    if np.isnan(x):
        return "nan"
    return "inf" if x > 0 else "-inf"


def _key(k) -> str:
    if isinstance(k, tuple):
        return ",".join(str(_key(x)) for x in k)
    if isinstance(k, Enum):
        return str(k.value)
    return str(k)


def to_jsonable(obj):
    """Recursively convert ``obj`` into JSON-ready builtins."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()] if obj.ndim else to_jsonable(obj.item())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
        if hasattr(type(obj), "passed") and "passed" not in out:
            out["passed"] = bool(obj.passed)
        return out
    if isinstance(obj, dict):
        return {_key(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set)):
        return [to_jsonable(x) for x in obj]
    if callable(obj):
        return getattr(obj, "__name__", type(obj).__name__)
    raise TypeError(f"cannot encode {type(obj).__name__} as JSON")


def decode_scalar(value) -> complex:
    """Inverse of the scalar encoding: a number or an [re, im] pair."""
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex values are [re, im] pairs, got {value!r}")
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, str):
        return complex(value.replace("i", "j"))
    return complex(value)


def envelope(command: str, config: dict, tolerances: dict, passed: bool, result: dict, error: str | None = None) -> dict:
    """Versioned report wrapper embedding tool version, config echo, seed and tolerances."""
    report = {
        "schema": SCHEMA_ID,
        "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
        "command": command,
        "seed": int(config.get("seed", 0)),
        "config": to_jsonable(config),
        "tolerances": to_jsonable(tolerances),
        "passed": bool(passed),
        "result": to_jsonable(result),
    }
    if error is not None:
        report["error"] = error
    return report


def dumps(report: dict) -> str:
    return json.dumps(report, ensure_ascii=False, indent=2, allow_nan=False)
