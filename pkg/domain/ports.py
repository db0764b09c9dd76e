"""Domain ports — abstract interfaces for the sources and sinks around the numerical core.

Only stdlib (abc) and domain imports allowed.
"""

from __future__ import annotations

from abc import ABC, abstractmethod


# ── Source Ports ──────────────────────────────────────────────────────────


class ModelSpecSource(ABC):
    """Loads a model specification (catalog name, parameters, optional entry table).

    Returns ``{"success": bool, "error": str | None, "spec": dict}``.
    """

    @abstractmethod
    def load(self, path: str) -> dict: ...


class ScatteringTableSource(ABC):
    """Loads tabulated two-body scattering samples.

    Returns ``{"success": bool, "error": str | None, "table": TabulatedScattering | None}``.
    """

    @abstractmethod
    def load(self, path: str) -> dict: ...


# ── Sink Ports ────────────────────────────────────────────────────────────


class ReportSink(ABC):
    """Persists a JSON-ready report.

    Returns ``{"success": bool, "error": str | None, "path": str}``.
    """

    @abstractmethod
    def write(self, report: dict, path: str) -> dict: ...
