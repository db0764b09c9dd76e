"""Closed-form R-matrices, spectral curves and Hamiltonian extraction.

Catalogue R-matrices are returned in their printed, non-braided form R; the
evaluators stored in ``RMatrixModel`` are braided, Ř = P R, and normalized so
that Ř is the identity at the regular point.
"""

from __future__ import annotations

import logging
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from domain.errors import CurveSamplingError, ModelParameterError, PoleProximityError
from domain.model_catalog import POLE_MARGIN, gb_hamiltonian, guard_pole
from domain.models import (
    J_DEFAULT,
    Arity,
    CurveBranch,
    CurvePoint,
    CurveSpec,
    RMatrixModel,
)
from domain.tensor_core import permutation_operator, relative_residual, sup_norm

logger = logging.getLogger(__name__)

FD_STEP = 1e-4
CURVE_TOL = 1e-10

# Nineteen-vertex layout shared by the ZF and IK R-matrices.
_NINETEEN_LAYOUT = (
    (0, 0, "one"), (1, 1, "b"), (1, 3, "c-"), (2, 2, "f"), (2, 4, "d-"), (2, 6, "h-"),
    (3, 1, "c+"), (3, 3, "b"), (4, 2, "d+"), (4, 4, "g"), (4, 6, "d-"), (5, 5, "b"),
    (5, 7, "c-"), (6, 2, "h+"), (6, 4, "d+"), (6, 6, "f"), (7, 5, "c+"), (7, 7, "b"),
    (8, 8, "one"),
)


def braid(r) -> np.ndarray:
    return permutation_operator() @ np.asarray(r, dtype=complex)


def unbraid(r_check) -> np.ndarray:
    return permutation_operator() @ np.asarray(r_check, dtype=complex)


# ── Rational entry tables ───────────────────────────────────────────────


class RationalTable:
    """Nineteen-vertex R(u) whose entries are ratios of polynomials in u."""

    def __init__(self, entries: dict[str, tuple[Polynomial, Polynomial]], label: str):
        self.entries = entries
        self.label = label

    def _check_poles(self, u: complex, margin: float) -> None:
        for name, (_, den) in self.entries.items():
            guard_pole(den(u), f"{self.label} pole of {name} at u={u}", margin)

    def value(self, u, margin: float = POLE_MARGIN) -> np.ndarray:
        u = complex(u)
        self._check_poles(u, margin)
        vals = {name: num(u) / den(u) for name, (num, den) in self.entries.items()}
        return self._assemble(vals)

    def derivative(self, u, margin: float = POLE_MARGIN) -> np.ndarray:
        u = complex(u)
        self._check_poles(u, margin)
        vals = {
            name: (num.deriv()(u) * den(u) - num(u) * den.deriv()(u)) / den(u) ** 2
            for name, (num, den) in self.entries.items()
        }
        return self._assemble(vals)

    @staticmethod
    def _assemble(vals: dict) -> np.ndarray:
        r = np.zeros((9, 9), dtype=complex)
        for row, col, name in _NINETEEN_LAYOUT:
            r[row, col] = vals[name]
        return r


def _zf_table(k) -> RationalTable:
    k = complex(k)
    guard_pole(k**4 - 1, "ZF k^4 = 1")
    u2m1 = Polynomial([-1, 0, 1])
    d1 = Polynomial([-1, 0, k**4])
    d2 = Polynomial([-1, 0, k**2])
    dd = d1 * d2
    q = k**4 - 1
    one = Polynomial([1])
    g_num = Polynomial([k**2, 0, (k**2 + 1) * (k**2 + k - 1) * (k**2 - k - 1), 0, k**4])
    entries = {
        "one": (one, one),
        "b": (-(k**2) * u2m1, d1),
        "c-": (q * one, d1),
        "c+": (q * Polynomial([0, 0, 1]), d1),
        "f": (k**2 * Polynomial([-(k**2), 0, 1]) * u2m1, dd),
        "d-": (-k * q * u2m1, dd),
        "d+": (-k * q * Polynomial([0, 0, 1]) * u2m1, dd),
        "h-": (q * (k**2 - 1) * one, dd),
        "h+": (q * (k**2 - 1) * Polynomial([0, 0, 0, 0, 1]), dd),
        "g": (g_num, dd),
    }
    return RationalTable(entries, "ZF")


IK_TRANSCRIPTION_FLAG = (
    "IK: the printed h+ lacks the factor u carried by every entry below the diagonal; "
    "without it the R-matrix fails unitarity and the YBE, so the catalog restores it"
)


def _ik_table(k, verbatim: bool = False) -> RationalTable:
    """A2(2) trigonometric R(u) normalized by R_00^00 = 1; ``verbatim`` keeps the printed h+."""
    k = complex(k)
    guard_pole(k**2 - 1, "IK k^2 = 1")
    um1 = Polynomial([-1, 1])
    d_a = Polynomial([-(k**2), 1])
    d_b = Polynomial([k**3, 1])
    dd = d_a * d_b
    one = Polynomial([1])
    u = Polynomial([0, 1])
    d_num = np.sqrt(k) * (1 - k**2) * um1
    entries = {
        "one": (one, one),
        "b": (k * um1, d_a),
        "d-": (k**2 * d_num, dd),
        "d+": (-u * d_num, dd),
        "c-": ((1 - k**2) * one, d_a),
        "c+": ((1 - k**2) * u, d_a),
        "f": (k**2 * Polynomial([k, 1]) * um1, dd),
        "g": (k * d_b * um1 + (k**3 + 1) * (1 - k**2) * u, dd),
        "h-": ((d_b + k**2 * um1) * (1 - k**2), dd),
        "h+": ((one if verbatim else u) * (d_b - k * um1) * (1 - k**2), dd),
    }
    return RationalTable(entries, "IK")


def zf_R(u, k, margin: float = POLE_MARGIN) -> np.ndarray:
    """Zamolodchikov-Fateev type R(u)."""
    return _zf_table(k).value(u, margin)


def ik_R(u, k, margin: float = POLE_MARGIN, verbatim: bool = False) -> np.ndarray:
    """Izergin-Korepin type R(u)."""
    return _ik_table(k, verbatim).value(u, margin)


def zf_hamiltonian(k) -> np.ndarray:
    """Exact d/du of the braided ZF R-matrix at u = 1."""
    return braid(_zf_table(k).derivative(1.0))


def ik_hamiltonian(k, verbatim: bool = False) -> np.ndarray:
    """Exact d/du of the braided IK R-matrix at u = 1."""
    return braid(_ik_table(k, verbatim).derivative(1.0))


def v17_2_components(theta0) -> tuple[np.ndarray, np.ndarray]:
    """(A, B) with braid(v17_2_R(z)) = z*A - B/z."""
    t = complex(theta0)
    a = np.zeros((9, 9), dtype=complex)
    b = np.zeros((9, 9), dtype=complex)
    for n in (0, 4, 8):
        a[n, n] = 1
        b[n, n] = t
    for row, col in ((1, 1), (2, 2), (5, 5)):
        a[row, col] = 1 - t
    for row, col in ((1, 3), (2, 4), (2, 6), (5, 7)):
        a[row, col] = 1
        b[row, col] = 1
    for row, col in ((3, 1), (6, 2), (7, 5)):
        a[row, col] = t
        b[row, col] = t
    a[6, 4] = -1
    b[6, 4] = -1
    for row, col in ((3, 3), (6, 6), (7, 7)):
        b[row, col] = -(1 - t)
    return a, b


def v17_2_R(z, theta0) -> np.ndarray:
    """Seventeen-vertex R(z), unnormalized."""
    z, t = complex(z), complex(theta0)
    if abs(z) < POLE_MARGIN:
        raise PoleProximityError("17V2 z = 0", abs(z), POLE_MARGIN)
    zi = 1 / z
    r = np.zeros((9, 9), dtype=complex)
    for n in (0, 4, 8):
        r[n, n] = z - t * zi
    for row in (1, 2, 5):
        r[row, row] = (z - zi) * t
    r[1, 3] = r[2, 6] = r[5, 7] = (1 - t) * zi
    r[2, 4] = zi - z
    r[3, 1] = r[6, 2] = r[7, 5] = z * (1 - t)
    r[3, 3] = r[6, 6] = r[7, 7] = z - zi
    r[6, 4] = z - zi
    return r


def v17_2_hamiltonian(theta0) -> np.ndarray:
    """d/dz of the normalized braided 17V2 R-matrix at z = 1: 2(A - I)/(1 - theta0)."""
    t = complex(theta0)
    guard_pole(1 - t, "17V2 theta0 = 1")
    a, _ = v17_2_components(t)
    return 2 * (a - np.eye(9)) / (1 - t)


# ── Models ──────────────────────────────────────────────────────────────


def zf_model(k, margin: float = POLE_MARGIN) -> RMatrixModel:
    table = _zf_table(k)
    return RMatrixModel(
        name="ZF",
        arity=Arity.MULTIPLICATIVE,
        params={"k": complex(k)},
        evaluator=lambda u: braid(table.value(u, margin)),
    )


def ik_model(k, margin: float = POLE_MARGIN, verbatim: bool = False) -> RMatrixModel:
    table = _ik_table(k, verbatim)
    return RMatrixModel(
        name="IK-verbatim" if verbatim else "IK",
        arity=Arity.MULTIPLICATIVE,
        params={"k": complex(k), "verbatim": verbatim},
        evaluator=lambda u: braid(table.value(u, margin)),
    )


def v17_2_model(theta0, normalized: bool = True) -> RMatrixModel:
    """17V2 model; ``normalized`` divides by the (|00>,|00>) entry z - theta0/z."""
    t = complex(theta0)
    guard_pole(1 - t, "17V2 theta0 = 1")

    def evaluate(z):
        r = braid(v17_2_R(z, t))
        if normalized:
            norm = r[0, 0]
            guard_pole(norm, f"17V2 normalization at z={z}")
            r = r / norm
        return r

    return RMatrixModel(
        name="V17_2" if normalized else "V17_2-raw",
        arity=Arity.MULTIPLICATIVE,
        params={"theta0": t, "normalized": normalized},
        evaluator=evaluate,
    )


# ── Spectral curves ─────────────────────────────────────────────────────


def _curve_expression(spec: CurveSpec, a, b):
    """Curve polynomial; a and b may be scalars or Polynomial objects."""
    if spec.branch is CurveBranch.SB:
        j, lam = spec.j, complex(spec.lambda4)
        return (a**2 + j * b**2) * (a**4 + a**2 * b**2 + b**4 + lam * a * b) + b**2 - a**2
    al, be = complex(spec.alpha), complex(spec.beta)
    s = a**4 + a**2 * b**2 + b**4
    return (
        (al * be - 1) * s**2
        + (2 - al * be + al**2 + be**2) * (be * s + a * b) * a * b
        - (al * be - 2) * a**4
        + be**2 * a**2 * b**2
        - (2 - al * be + be**2) * b**4
        - 2 * be * a * b
        - 1
    )


def curve_polynomial_in_b(spec: CurveSpec, a) -> Polynomial:
    return _curve_expression(spec, complex(a), Polynomial([0, 1]))


def curve_polynomial_in_a(spec: CurveSpec, b) -> Polynomial:
    return _curve_expression(spec, Polynomial([0, 1]), complex(b))


def curve_residual(pt: CurvePoint, spec: CurveSpec) -> float:
    """|F(a, b)| for the branch polynomial F."""
    return float(abs(_curve_expression(spec, complex(pt.a), complex(pt.b))))


def curve_slope(pt: CurvePoint, spec: CurveSpec) -> complex:
    """db/da along the curve from the implicit function theorem."""
    f_a = curve_polynomial_in_a(spec, pt.b).deriv()(pt.a)
    f_b = curve_polynomial_in_b(spec, pt.a).deriv()(pt.b)
    guard_pole(f_b, "singular curve point (dF/db = 0)")
    return complex(-f_a / f_b)


def _polish(poly: Polynomial, b: complex, max_iter: int = 50) -> complex:
    dpoly = poly.deriv()
    for _ in range(max_iter):
        d = dpoly(b)
        if d == 0:
            break
        step = poly(b) / d
        b = b - step
        if abs(step) <= 1e-16 * max(1.0, abs(b)):
            break
    return complex(b)


def sample_curve(spec: CurveSpec, a, tol: float = CURVE_TOL) -> list[CurvePoint]:
    """All curve points with first coordinate ``a`` (companion-matrix roots, Newton polished)."""
    poly = curve_polynomial_in_b(spec, a).trim(tol=0)
    points = []
    for root in poly.roots():
        b = _polish(poly, complex(root))
        pt = CurvePoint(complex(a), b)
        residual = curve_residual(pt, spec)
        if residual <= tol:
            points.append(pt)
        else:
            logger.warning("curve root at a=%s not polished: residual %.3e", a, residual)
    if not points:
        raise CurveSamplingError(f"no root reached residual {tol:.1e} at a={a}")
    return points


def curve_chart(spec: CurveSpec, base: CurvePoint) -> Callable[[complex], CurvePoint]:
    """Local chart t -> (a0 + t, b(t)) on the branch through ``base``."""
    slope = curve_slope(base, spec)
    a0, b0 = complex(base.a), complex(base.b)

    def point(t) -> CurvePoint:
        a = a0 + complex(t)
        poly = curve_polynomial_in_b(spec, a)
        b = _polish(poly, b0 + slope * complex(t))
        return CurvePoint(a, b)

    return point


def _norm_sq(pt: CurvePoint, j: complex) -> complex:
    return pt.a**2 + j * pt.b**2


def _sb_entries(x: CurvePoint, y: CurvePoint, j: complex, margin: float) -> dict:
    nx, ny = _norm_sq(x, j), _norm_sq(y, j)
    guard_pole(nx, "SB a^2 + j b^2 = 0", margin)
    guard_pole(ny, "SB a^2 + j b^2 = 0", margin)
    ax, bx, ay, by = x.a, x.b, y.a, y.b
    r_a = ax * ay / ny + j * bx * by / nx
    r_b = bx * ay / ny - ax * by / nx
    r_bb = j * bx * ay / nx - j * ax * by / ny
    d_den = j * ax * ay + bx * by * nx * ny
    guard_pole(d_den, "SB r_d denominator", margin)
    r_d = j * (bx * ay * ny - ax * by * nx) / d_den
    r_f = r_d * (bx * ay * nx * ny - j**2 * ax * by) / (nx * ny)
    return {"a": r_a, "b": r_b, "bb": r_bb, "d": r_d, "f": r_f}


def sb_R(x: CurvePoint, y: CurvePoint, j: complex = J_DEFAULT, margin: float = POLE_MARGIN) -> np.ndarray:
    """Special-branch R(x, y), normalized so that r_c = 1."""
    e = _sb_entries(x, y, j, margin)
    swapped = _sb_entries(y, x, j, margin)
    # r_d is antisymmetric, so -r_d(x,y)/r_d(y,x) = 1 away from x = y as well
    r_g = swapped["f"] + swapped["a"]
    r_h = e["a"] + e["f"] / j
    r_hh = e["a"] + j * e["f"]
    r = np.zeros((9, 9), dtype=complex)
    r[0, 0] = r[8, 8] = e["a"]
    r[1, 1] = r[7, 7] = e["b"]
    r[3, 3] = r[5, 5] = e["bb"]
    r[2, 2] = r[6, 6] = e["f"]
    r[4, 4] = r_g
    r[1, 3] = r[3, 1] = r[5, 7] = r[7, 5] = 1
    r[2, 6] = r_h
    r[6, 2] = r_hh
    r[2, 4] = r[4, 6] = e["d"]
    r[4, 2] = r[6, 4] = j * e["d"]
    return r


def sb_model(spec: CurveSpec, margin: float = POLE_MARGIN) -> RMatrixModel:
    if spec.branch is not CurveBranch.SB:
        raise ModelParameterError("sb_model needs an SB curve")
    return RMatrixModel(
        name="SB",
        arity=Arity.CURVE,
        params={"lambda4": complex(spec.lambda4), "j": spec.j},
        evaluator=lambda x, y: braid(sb_R(x, y, spec.j, margin)),
        base=CurvePoint(1.0, 0.0),
        curve=spec,
    )


HSB_POSITIONS = {
    "h_a": ((0, 0), (8, 8)),
    "h_hbar": ((2, 2),),
    "h_g": ((4, 4),),
    "h_h": ((6, 6),),
    "h_f": ((2, 6), (6, 2)),
    "h_b": ((3, 1), (5, 7)),
    "h_bbar": ((1, 3), (7, 5)),
    "h_d": ((4, 6), (6, 4)),
    "h_dbar": ((2, 4), (4, 2)),
}


def hsb_coefficients(h) -> dict:
    """Special-branch Hamiltonian coefficients read off a 9x9 operator."""
    h = np.asarray(h, dtype=complex)
    return {name: complex(h[pos[0]]) for name, pos in HSB_POSITIONS.items()}


def hsb_pattern_residual(h, j: complex = J_DEFAULT) -> float:
    """Deviation of ``h`` from the special-branch coefficient pattern and its identities."""
    h = np.asarray(h, dtype=complex)
    c = hsb_coefficients(h)
    model = np.zeros((9, 9), dtype=complex)
    for name, positions in HSB_POSITIONS.items():
        for pos in positions:
            model[pos] = c[name]
    identities = [
        c["h_h"] - (c["h_a"] + c["h_f"] / j),
        c["h_hbar"] - (c["h_a"] + j * c["h_f"]),
        c["h_dbar"] - j * c["h_d"],
        c["h_g"] + c["h_a"] + c["h_f"],
    ]
    return max(relative_residual(h - model, h), max(abs(x) for x in identities) / max(1.0, sup_norm(h)))


def gb_from_hsb(h, j: complex = J_DEFAULT) -> np.ndarray:
    """Generalized Bariev Hamiltonian with xi = h_f, psi = h_b, phi = h_bbar and upsilon = -h_a.

    The special-branch j plays the role of J0**2.
    """
    c = hsb_coefficients(h)
    return gb_hamiltonian(c["h_bbar"], c["h_b"], c["h_f"], J0=np.sqrt(complex(j)), upsilon=-c["h_a"])


# ── Hamiltonian extraction ──────────────────────────────────────────────


def _path(model: RMatrixModel, base) -> tuple[Callable, Callable]:
    """(t -> first argument, t -> second argument) displaced from ``base``."""
    if model.arity is Arity.CURVE:
        chart = curve_chart(model.curve, base)
        return chart, chart
    return (lambda t: base + t), (lambda t: base + t)


def derivative_hamiltonian(
    model: RMatrixModel,
    base=None,
    h: float = FD_STEP,
    leg: str = "x",
    regularity_tol: float = 1e-8,
    return_error: bool = False,
):
    """Central-difference derivative of Ř(x, y) at x = y = base, Richardson extrapolated.

    ``leg`` selects the argument that moves; curve models move along the chart
    through ``base`` with a as local coordinate.
    """
    base = model.base if base is None else base
    rb = model.bivariate()
    fixed = base
    at_base = rb(base, base)
    if relative_residual(at_base - np.eye(9), at_base) > regularity_tol:
        raise ModelParameterError(f"{model.name} is not regular at {base}")
    move, _ = _path(model, base)

    def f(t):
        return rb(move(t), fixed) if leg == "x" else rb(fixed, move(t))

    def central(step):
        return (f(step) - f(-step)) / (2 * step)

    coarse = central(h)
    fine = central(h / 2)
    result = (4 * fine - coarse) / 3
    error = sup_norm(result - fine)
    logger.debug("%s derivative at %s: Richardson error estimate %.2e", model.name, base, error)
    if return_error:
        return result, error
    return result


# ── R-level twists ──────────────────────────────────────────────────────


def _coordinate(point) -> complex:
    return complex(point.a) if isinstance(point, CurvePoint) else complex(point)


def apply_twist_R(model: RMatrixModel, twist) -> RMatrixModel:
    """Twist a model so that its extracted Hamiltonian becomes apply_twist_H(H, twist).

    Gauge and grading conjugate by constant matrices, the telescope term uses
    g(x) = exp(-(x - x0) A) on the leg carrying x, and the identity shift
    multiplies by exp(alpha (x - y)). Curve models use a as coordinate.
    """
    if twist.sz_shift_beta != 0:
        raise ModelParameterError("the Sz shift has no R-matrix counterpart")
    rb = model.bivariate()
    x0 = _coordinate(model.base)
    n = np.arange(3)
    left = right = None
    if twist.gauge_g is not None:
        g_inv = np.linalg.inv(twist.gauge_g)
        left, right = np.kron(twist.gauge_g, twist.gauge_g), np.kron(g_inv, g_inv)
    if twist.grading_alpha != 0:
        e = np.exp(twist.grading_alpha * n)
        grade = np.diag(np.kron(e, 1 / e))
        grade_inv = np.diag(np.kron(1 / e, e))
        left = grade if left is None else grade @ left
        right = grade_inv if right is None else right @ grade_inv
    tele = None if twist.telescope_A is None else np.diag(twist.telescope_A)
    shift = twist.identity_shift_alpha

    def evaluate(x, y):
        r = rb(x, y)
        if left is not None:
            r = left @ r @ right
        if tele is not None:
            gx = np.exp(-(_coordinate(x) - x0) * tele)
            gy = np.exp(-(_coordinate(y) - x0) * tele)
            r = (np.kron(gy, gx)[:, None] * r) / np.kron(gx, gy)[None, :]
        if shift != 0:
            r = np.exp(shift * (_coordinate(x) - _coordinate(y))) * r
        return r

    arity = Arity.CURVE if model.arity is Arity.CURVE else Arity.BIVARIATE
    return RMatrixModel(
        name=f"{model.name}+twist",
        arity=arity,
        params=dict(model.params),
        evaluator=evaluate,
        base=model.base,
        curve=model.curve,
    )
