"""
run_config.py — RunConfig: one CLI run, validated against schemas/run_config.json.

Unknown fields are rejected; the seed is always present and echoed into reports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from tools.report_codec import decode_scalar, to_jsonable

SCHEMA_PATH = Path(__file__).resolve().parent.parent / "schemas" / "run_config.json"
COMMANDS = ("verify", "reconstruct", "certify-no-go", "baxterize", "spectrum", "curve")


class ConfigError(ValueError):
    """Run configuration rejected before any computation (exit code 2)."""


def _schema() -> dict:
    with open(SCHEMA_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration."""

    command: str
    seed: int
    model: str | None = None
    params: dict = field(default_factory=dict)
    spec_file: str | None = None
    scattering: dict | None = None
    samples: int | None = None
    order: int | None = None
    L: int | None = None
    branch: str | None = None
    tolerances: dict = field(default_factory=dict)
    threads: int | None = None
    out: str | None = None
    mutate: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> RunConfig:
        try:
            jsonschema.validate(instance=data, schema=_schema())
        except jsonschema.ValidationError as e:
            where = "/".join(str(p) for p in e.absolute_path) or "<root>"
            raise ConfigError(f"invalid run configuration at {where}: {e.message}") from e
        return cls(**data)

    @classmethod
    def from_file(cls, path: str) -> RunConfig:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read run configuration {path}: {e}") from e
        return cls.from_dict(data)

    def complex_params(self) -> dict:
        """Parameters decoded to complex numbers (booleans kept)."""
        return {
            k: v if isinstance(v, bool) else decode_scalar(v)
            for k, v in self.params.items()
        }

    def to_dict(self) -> dict:
        data = {
            "command": self.command,
            "seed": self.seed,
            "model": self.model,
            "params": to_jsonable(self.params),
            "spec_file": self.spec_file,
            "scattering": self.scattering,
            "samples": self.samples,
            "order": self.order,
            "L": self.L,
            "branch": self.branch,
            "tolerances": dict(self.tolerances),
            "threads": self.threads,
            "out": self.out,
            "mutate": self.mutate,
        }
        return {k: v for k, v in data.items() if v is not None}
