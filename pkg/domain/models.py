"""Domain models — value objects shared by the numerical modules.

Operators are carried as dense ``numpy`` complex arrays; everything else is a
frozen dataclass or an Enum.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np

from domain.errors import DimensionError

ComplexMatrix = np.ndarray

J_DEFAULT = complex(np.exp(1j * np.pi / 3))


class Arity(Enum):
    """How an R-matrix depends on its spectral arguments."""

    MULTIPLICATIVE = "univariate-multiplicative"
    BIVARIATE = "bivariate"
    CURVE = "curve"


class ModelName(Enum):
    """Catalogued two-site Hamiltonians."""

    ZF = "ZF"
    IK = "IK"
    GB = "GB"
    MB0 = "MB0"
    SPR = "SpR"
    SB17 = "SB17"
    V17_2 = "V17_2"
    V14 = "V14"


class CurveBranch(Enum):
    """Spectral curve branch of the bivariate solution."""

    MB = "MB"
    SB = "SB"


class Verdict(Enum):
    """Outcome of an obstruction certification."""

    EXISTS = "series-exists-to-order-N"
    OBSTRUCTED = "obstructed"
    INCONCLUSIVE = "inconclusive"


class AlgebraFamily(Enum):
    """Algebras with a known Baxterization."""

    HECKE = "Hecke"
    TL = "TL"
    BMW = "BMW"


class Reference(Enum):
    """Reference state of the coordinate Bethe ansatz."""

    VACUUM = "vacuum"
    PLUMP = "plump"


# ── Value Objects ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class Tolerances:
    """Tolerance ladder used by checks and certifications."""

    structural: float = 1e-12
    algebraic: float = 1e-10
    differential: float = 1e-8
    gauge: float = 1e-9
    obstruction: float = 1e-6
    existence: float = 1e-10

    def to_dict(self) -> dict:
        return {
            "structural": self.structural,
            "algebraic": self.algebraic,
            "differential": self.differential,
            "gauge": self.gauge,
            "obstruction": self.obstruction,
            "existence": self.existence,
        }


@dataclass(frozen=True)
class LegEmbedding:
    """Placement of a two-site operator on adjacent sites (1-based) of a chain."""

    total_sites: int
    slot: tuple[int, int]

    def __post_init__(self):
        if self.total_sites < 2:
            raise DimensionError(f"total_sites must be >= 2, got {self.total_sites}")
        i, k = self.slot
        if k != i + 1 or not 1 <= i < self.total_sites:
            raise DimensionError(f"slot {self.slot} is not an adjacent pair in 1..{self.total_sites}")


# (row, column) of each hopping coupling in the 9x9 two-site operator.
COUPLING_POSITIONS: dict[str, tuple[int, int]] = {
    "p": (1, 3),
    "q": (3, 1),
    "t1": (6, 4),
    "s1": (4, 6),
    "t2": (2, 4),
    "s2": (4, 2),
    "t3": (5, 7),
    "s3": (7, 5),
    "tp": (2, 6),
    "sp": (6, 2),
}


def _complex_grid(v) -> tuple[tuple[complex, ...], ...]:
    arr = np.zeros((3, 3), dtype=complex) if v is None else np.asarray(v, dtype=complex)
    if arr.shape != (3, 3):
        raise DimensionError(f"v must be 3x3, got shape {arr.shape}")
    return tuple(tuple(complex(x) for x in row) for row in arr)


@dataclass(frozen=True)
class HamiltonianParams:
    """The nineteen couplings of a U(1)-invariant two-site Hamiltonian."""

    p: complex = 0
    q: complex = 0
    t1: complex = 0
    t2: complex = 0
    t3: complex = 0
    s1: complex = 0
    s2: complex = 0
    s3: complex = 0
    tp: complex = 0
    sp: complex = 0
    v: tuple[tuple[complex, ...], ...] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "v", _complex_grid(self.v))
        for name in COUPLING_POSITIONS:
            object.__setattr__(self, name, complex(getattr(self, name)))

    def vij(self, i: int, j: int) -> complex:
        return self.v[i][j]

    @classmethod
    def from_mapping(cls, data: dict) -> HamiltonianParams:
        """Build from a flat mapping; diagonal couplings may be given as ``v01`` style keys."""
        v = np.zeros((3, 3), dtype=complex)
        if "v" in data:
            v = np.asarray(data["v"], dtype=complex)
        kwargs = {}
        for key, value in data.items():
            if key in COUPLING_POSITIONS:
                kwargs[key] = complex(value)
            elif len(key) == 3 and key[0] == "v" and key[1:].isdigit():
                v[int(key[1]), int(key[2])] = complex(value)
            elif key != "v":
                raise KeyError(f"unknown coupling '{key}'")
        return cls(v=v, **kwargs)


@dataclass(frozen=True, eq=False)
class TwistSpec:
    """Equivalence transformation applied to a two-site Hamiltonian.

    Applied in the fixed order gauge, grading, telescope, identity shift, Sz shift.
    """

    gauge_g: np.ndarray | None = None
    grading_alpha: complex = 0
    telescope_A: np.ndarray | None = None
    identity_shift_alpha: complex = 0
    sz_shift_beta: complex = 0

    def __post_init__(self):
        if self.gauge_g is not None:
            g = np.asarray(self.gauge_g, dtype=complex)
            if g.shape != (3, 3):
                raise DimensionError(f"gauge_g must be 3x3, got {g.shape}")
            object.__setattr__(self, "gauge_g", g)
        if self.telescope_A is not None:
            a = np.asarray(self.telescope_A, dtype=complex)
            if a.ndim == 1:
                a = np.diag(a)
            if a.shape != (3, 3) or np.any(a[~np.eye(3, dtype=bool)] != 0):
                raise DimensionError("telescope_A must be a 3x3 diagonal matrix")
            object.__setattr__(self, "telescope_A", a)
        object.__setattr__(self, "grading_alpha", complex(self.grading_alpha))
        object.__setattr__(self, "identity_shift_alpha", complex(self.identity_shift_alpha))
        object.__setattr__(self, "sz_shift_beta", complex(self.sz_shift_beta))

    @property
    def is_identity(self) -> bool:
        return (
            (self.gauge_g is None or np.array_equal(self.gauge_g, np.eye(3)))
            and self.grading_alpha == 0
            and (self.telescope_A is None or not np.any(self.telescope_A))
            and self.identity_shift_alpha == 0
            and self.sz_shift_beta == 0
        )

    def to_dict(self) -> dict:
        return {
            "gauge_g": None if self.gauge_g is None else self.gauge_g,
            "grading_alpha": self.grading_alpha,
            "telescope_A": None if self.telescope_A is None else np.diag(self.telescope_A),
            "identity_shift_alpha": self.identity_shift_alpha,
            "sz_shift_beta": self.sz_shift_beta,
        }


@dataclass(frozen=True)
class NamedModel:
    """A catalogued model and its parameter record."""

    name: ModelName
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CurveSpec:
    """Spectral curve of the bivariate solution: branch plus constants."""

    branch: CurveBranch
    alpha: complex | None = None
    beta: complex | None = None
    lambda4: complex | None = None
    j: complex = J_DEFAULT

    def __post_init__(self):
        if self.branch is CurveBranch.SB and self.lambda4 is None:
            raise DimensionError("SB curve requires lambda4")
        if self.branch is CurveBranch.MB and (self.alpha is None or self.beta is None):
            raise DimensionError("MB curve requires alpha and beta")


@dataclass(frozen=True)
class CurvePoint:
    """A point (a, b) on a spectral curve."""

    a: complex
    b: complex


@dataclass(frozen=True, eq=False)
class RMatrixModel:
    """Named braided evaluator Ř(spectral args) -> 9x9 operator.

    Multiplicative models take one argument u; bivariate and curve models take (x, y).
    ``base`` is the regular point used for differentiation and series expansion.
    """

    name: str
    arity: Arity
    params: dict
    evaluator: Callable[..., np.ndarray]
    base: Any = 1.0
    curve: CurveSpec | None = None

    def evaluate(self, *args) -> np.ndarray:
        return self.evaluator(*args)

    def bivariate(self) -> Callable[[Any, Any], np.ndarray]:
        """Two-argument view; multiplicative models use Ř(x, y) := Ř(x/y)."""
        if self.arity is Arity.MULTIPLICATIVE:
            return lambda x, y: self.evaluator(x / y)
        return self.evaluator


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one verification check over a sample set."""

    check_name: str
    sample_count: int
    max_residual: float
    worst_point: Any
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.max_residual <= self.tolerance)


@dataclass(frozen=True)
class VerificationReport:
    """All checks run on one model."""

    model: str
    seed: int
    checks: tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True, eq=False)
class UniSeries:
    """Taylor coefficients of Ř(u) around u = 1 (coeffs[0] = I, coeffs[1] = H)."""

    coeffs: tuple[np.ndarray, ...]
    norm_index: int = 0
    residuals: tuple[float, ...] = ()

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


@dataclass(frozen=True, eq=False)
class BiSeries:
    """Taylor coefficients Ř^(m,n) of Ř(x, y) around (0, 0), m + n <= order."""

    coeffs: dict
    order: int
    norm_index: int = 0
    residuals: dict = field(default_factory=dict)

    def coefficient(self, m: int, n: int) -> np.ndarray:
        return self.coeffs[(m, n)]


@dataclass(frozen=True)
class ObstructionReport:
    """Per-order solvability of the reconstruction recursion."""

    model: str
    order: int
    verdict: Verdict
    order_failed: int | None
    residual_by_order: tuple[float, ...]
    twist_params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class GaugeFit:
    """Diagonal twist relating two Hamiltonians, with its fit residual."""

    twist: TwistSpec | None
    residual: float
    success: bool
    message: str = ""


@dataclass(frozen=True, eq=False)
class AlgebraFit:
    """Affine normalization T = alpha_scale*H + beta_shift*I satisfying an algebra."""

    family: AlgebraFamily
    alpha_scale: complex
    beta_shift: complex
    generator: np.ndarray
    constants: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)


@dataclass(frozen=True)
class BasisState:
    """One basis vector of a spin sector, described from its reference state."""

    labels: tuple[int, ...]
    positions: tuple[int, ...]
    multiplicities: tuple[int, ...]
    index: int


@dataclass(frozen=True)
class SectorBasis:
    """Basis of the Sz = M eigenspace enumerated over a reference state."""

    L: int
    M: int
    reference: Reference
    states: tuple[BasisState, ...]

    @property
    def dimension(self) -> int:
        return len(self.states)

    @property
    def indices(self) -> list[int]:
        return [s.index for s in self.states]


@dataclass(frozen=True)
class BetheRoots:
    """Momenta of an eigenstate over a given reference state."""

    k: tuple[complex, ...]
    reference: Reference = Reference.VACUUM

    def __post_init__(self):
        k = tuple(complex(x) for x in self.k)
        if not all(np.isfinite(x) for x in k):
            raise DimensionError("Bethe roots must be finite")
        object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class MatchingReport:
    """Multiset matching of two spectra."""

    passed: bool
    max_distance: float
    size: int
    clusters: int
    tolerance: float
    message: str = ""


@dataclass(frozen=True)
class SectorProbe:
    """Exact levels of one sector and how many the Bethe formulas reach.

    ``covered`` is false in sectors more than one excitation away from both
    references, where no formula applies and no level counts as unreached.
    ``defect`` counts missing eigenvectors: dimension minus the summed
    geometric multiplicities of the sector's levels. ``extra_references``
    lists basis states of an uncovered sector that are eigenvectors.
    """

    M: int
    dimension: int
    reached: int
    unreached_levels: tuple[complex, ...] = ()
    defect: int = 0
    covered: bool = True
    extra_references: tuple[tuple[int, ...], ...] = ()


@dataclass(frozen=True)
class CompletenessReport:
    """Per-sector reach of the two reference states' energy formulas."""

    L: int
    sectors: tuple[SectorProbe, ...]

    @property
    def flagged(self) -> list[int]:
        return [s.M for s in self.sectors if s.unreached_levels or s.defect or s.extra_references]
