"""
settings.py — Loading of config/settings.yaml.

The YBE_FORGE_THREADS environment variable overrides parallelism.threads.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import yaml

from domain.models import Tolerances

SETTINGS_PATH = Path(__file__).resolve().parent.parent / "config" / "settings.yaml"
THREADS_ENV = "YBE_FORGE_THREADS"


def load_settings(path: str | os.PathLike | None = None) -> dict:
    """Parse the settings file; a missing file yields an empty mapping."""
    path = Path(path) if path is not None else SETTINGS_PATH
    if not path.exists():
        return {}
    with open(path, "r", encoding="utf-8") as f:
        return yaml.safe_load(f) or {}


def section(settings: dict, name: str) -> dict:
    return settings.get(name) or {}


def tolerances_from(settings: dict, overrides: dict | None = None) -> Tolerances:
    """Tolerance ladder from the tolerances and thresholds sections plus per-run overrides."""
    values = {}
    values.update({k: float(v) for k, v in section(settings, "tolerances").items()})
    values.update({k: float(v) for k, v in section(settings, "thresholds").items()})
    values.update({k: float(v) for k, v in (overrides or {}).items()})
    known = set(Tolerances().to_dict())
    unknown = set(values) - known
    if unknown:
        raise KeyError(f"unknown tolerance keys: {sorted(unknown)}")
    return Tolerances(**values)


def thread_count(settings: dict, requested: int | None = None) -> int:
    """Worker threads: explicit request, then the environment, then settings, capped by the environment."""
    env = os.environ.get(THREADS_ENV)
    cap = None
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            logging.getLogger(__name__).warning("ignoring %s=%r (not an integer)", THREADS_ENV, env)
    threads = requested or cap or int(section(settings, "parallelism").get("threads", 1))
    if cap is not None:
        threads = min(threads, cap)
    return max(1, threads)


def configure_logging(settings: dict, verbose: bool = False) -> None:
    """Root logger on stderr; stdout is reserved for the JSON report."""
    level = "DEBUG" if verbose else str(section(settings, "logging").get("level", "INFO")).upper()
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, level, logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
