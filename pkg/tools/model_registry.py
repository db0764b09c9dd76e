"""
model_registry.py — CLI model names resolved to R-matrix models or two-site Hamiltonians.

R-matrix models: zf, ik, v17_2, sb.
Hamiltonians:    zf-H, ik-H, v17_2-H, gb, mb0, sb17, v14, spr, custom.
spr and custom take their entries from a model-spec file; without one they
resolve to a skipped entry that carries no Hamiltonian.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from domain.errors import ModelParameterError
from domain.model_catalog import J0_DEFAULT, gb_hamiltonian, h14, h17, mb0_hamiltonian, spr_hamiltonian
from domain.models import J_DEFAULT, CurveBranch, CurveSpec, RMatrixModel
from domain.rmatrix_catalog import (
    derivative_hamiltonian,
    ik_hamiltonian,
    ik_model,
    sb_model,
    v17_2_hamiltonian,
    v17_2_model,
    zf_hamiltonian,
    zf_model,
)

logger = logging.getLogger(__name__)

DEFAULTS = {
    "zf": {"k": 2},
    "ik": {"k": 2},
    "v17_2": {"theta0": 0.3},
    "sb": {"lambda4": 0.3},
    "zf-H": {"k": 2},
    "ik-H": {"k": 2},
    "v17_2-H": {"theta0": 0.3},
    "gb": {"phi": 1.0, "psi": 0.5, "xi": 0.7},
    "mb0": {"alpha": 2.0, "beta": 1.5},
    "sb17": {"Lambda": 0.5, "J": 1.0},
    "v14": {"xi": 1.0},
    "spr": {},
    "custom": {},
}
R_MODELS = ("zf", "ik", "v17_2", "sb")
ENTRY_MODELS = ("spr", "custom")


@dataclass(frozen=True, eq=False)
class ResolvedModel:
    """A registry entry with its parameters; ``model`` is set for R-matrix entries."""

    name: str
    params: dict
    hamiltonian: np.ndarray | None
    model: RMatrixModel | None = None
    notes: dict = field(default_factory=dict)

    @property
    def has_rmatrix(self) -> bool:
        return self.model is not None

    @property
    def skip_reason(self) -> str | None:
        return self.notes.get("skipped")


def model_names() -> list[str]:
    return list(DEFAULTS)


def _rmatrix(name: str, p: dict) -> tuple[RMatrixModel, np.ndarray]:
    if name == "zf":
        return zf_model(p["k"]), zf_hamiltonian(p["k"])
    if name == "ik":
        verbatim = bool(p.get("verbatim", False))
        return ik_model(p["k"], verbatim=verbatim), ik_hamiltonian(p["k"], verbatim)
    if name == "v17_2":
        return v17_2_model(p["theta0"]), v17_2_hamiltonian(p["theta0"])
    spec = CurveSpec(CurveBranch.SB, lambda4=p["lambda4"], j=p.get("j", J_DEFAULT))
    model = sb_model(spec)
    return model, derivative_hamiltonian(model)


def _hamiltonian(name: str, p: dict, entries) -> np.ndarray:
    if name == "zf-H":
        return zf_hamiltonian(p["k"])
    if name == "ik-H":
        return ik_hamiltonian(p["k"], bool(p.get("verbatim", False)))
    if name == "v17_2-H":
        return v17_2_hamiltonian(p["theta0"])
    if name == "gb":
        return gb_hamiltonian(p["phi"], p["psi"], p["xi"], p.get("J0", J0_DEFAULT), p.get("upsilon"))
    if name == "mb0":
        return mb0_hamiltonian(p["alpha"], p["beta"], p.get("J0", J0_DEFAULT))
    if name == "sb17":
        return h17(p["Lambda"], p["J"], bool(p.get("verbatim", False)))
    if name == "v14":
        return h14(p["xi"])
    return spr_hamiltonian(entries)


def resolve(name: str, params: dict | None = None, entries=None) -> ResolvedModel:
    """Build the registry entry ``name`` with defaults overridden by ``params``."""
    if name not in DEFAULTS:
        raise ModelParameterError(f"unknown model '{name}' (known: {', '.join(DEFAULTS)})")
    p = {**DEFAULTS[name], **(params or {})}
    if name in R_MODELS:
        model, h = _rmatrix(name, p)
        return ResolvedModel(name=name, params=p, hamiltonian=h, model=model)
    if name in ENTRY_MODELS and entries is None:
        reason = f"model '{name}' needs an entry table from a model-spec file"
        logger.warning("%s: skipped, %s", name, reason)
        return ResolvedModel(name=name, params=p, hamiltonian=None, notes={"skipped": reason})
    return ResolvedModel(name=name, params=p, hamiltonian=_hamiltonian(name, p, entries))
