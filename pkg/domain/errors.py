"""Domain errors raised by the numerical core.

Checks that are expected to fail during normal use (verification, obstruction
certification, gauge fitting) return result objects instead of raising.
"""

from __future__ import annotations


class YbeForgeError(Exception):
    """Base class for every error raised by the domain layer."""


class DimensionError(YbeForgeError):
    """Operator shape or content does not match what the operation expects."""


class ModelParameterError(YbeForgeError):
    """Model parameters are outside the admissible set."""


class PoleProximityError(ModelParameterError):
    """A parameter or spectral argument sits too close to a pole locus."""

    def __init__(self, locus: str, distance: float, margin: float):
        self.locus = locus
        self.distance = distance
        self.margin = margin
        super().__init__(f"{locus}: distance {distance:.3e} below margin {margin:.1e}")


class SingularOperatorError(YbeForgeError):
    """Linear solve or inversion on a (numerically) singular operator."""

    def __init__(self, condition: float):
        self.condition = condition
        super().__init__(f"singular operator, estimated condition number {condition:.3e}")


class SectorLeakageError(YbeForgeError):
    """Operator is not block-diagonal with respect to the requested sector."""

    def __init__(self, leakage: float, tol: float):
        self.leakage = leakage
        self.tol = tol
        super().__init__(f"sector leakage {leakage:.3e} exceeds {tol:.1e}")


class SeriesInconsistencyError(YbeForgeError):
    """Bivariate recursion cannot be solved at order (m, n)."""

    def __init__(self, m: int, n: int, residual: float):
        self.m = m
        self.n = n
        self.residual = residual
        super().__init__(f"recursion inconsistent at order ({m},{n}): residual {residual:.3e}")


class CurveSamplingError(YbeForgeError):
    """Root polishing on a spectral curve failed to reach the residual target."""


class AlgebraFitError(YbeForgeError):
    """An operator does not satisfy the relations of a Baxterizable algebra."""

    def __init__(self, family: str, relation: str, residual: float):
        self.family = family
        self.relation = relation
        self.residual = residual
        super().__init__(f"{family} fit failed on {relation}: residual {residual:.3e}")


class ScatteringError(YbeForgeError):
    """Scattering function is singular or undefined at a root pair."""
