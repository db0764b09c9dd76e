"""Two-site Hamiltonians, periodic chains and their equivalence transformations."""

from __future__ import annotations

import itertools
import logging

import numpy as np
import scipy.optimize

from domain.errors import DimensionError, ModelParameterError, PoleProximityError
from domain.models import (
    COUPLING_POSITIONS,
    GaugeFit,
    HamiltonianParams,
    ModelName,
    NamedModel,
    TwistSpec,
)
from domain.tensor_core import (
    SITE_DIM,
    as_matrix,
    basis_labels,
    elementary,
    embed_pair,
    ice_mask,
    inverse,
    kron,
    relative_residual,
    sup_norm,
)

logger = logging.getLogger(__name__)

POLE_MARGIN = 1e-8
J0_DEFAULT = complex(np.exp(1j * np.pi / 6))

H17_TRANSCRIPTION_FLAG = (
    "H17: the printed term E21(x)E21 breaks the ice rule; the catalog uses E21(x)E12, "
    "which reproduces the xi -> 0 limit of the generalized Bariev Hamiltonian"
)


def guard_pole(value: complex, locus: str, margin: float = POLE_MARGIN) -> None:
    """Reject a denominator closer than ``margin`` to zero."""
    distance = abs(value)
    if distance < margin:
        raise PoleProximityError(locus, distance, margin)


# ── Construction ────────────────────────────────────────────────────────


def build_two_site(params: HamiltonianParams) -> np.ndarray:
    """Nineteen-vertex operator from its couplings; every other entry is exactly zero."""
    h = np.zeros((9, 9), dtype=complex)
    for name, (row, col) in COUPLING_POSITIONS.items():
        h[row, col] = getattr(params, name)
    for i in range(SITE_DIM):
        for j in range(SITE_DIM):
            n = SITE_DIM * i + j
            h[n, n] = params.vij(i, j)
    return h


def params_from_matrix(h) -> HamiltonianParams:
    """Read the nineteen couplings off a 9x9 ice-rule operator."""
    h = as_matrix(h, 9)
    couplings = {name: h[row, col] for name, (row, col) in COUPLING_POSITIONS.items()}
    v = np.diag(h).reshape(3, 3)
    return HamiltonianParams(v=v, **couplings)


def conjugate_params(params: HamiltonianParams) -> HamiltonianParams:
    """Coupling map induced by |j> -> |2-j> on both sites."""
    v = np.asarray(params.v)[::-1, ::-1]
    return HamiltonianParams(
        p=params.s3, s3=params.p,
        q=params.t3, t3=params.q,
        t1=params.t2, t2=params.t1,
        s1=params.s2, s2=params.s1,
        tp=params.sp, sp=params.tp,
        v=v,
    )


def build_chain(h2, n_sites: int, periodic: bool = True) -> np.ndarray:
    """Sum of the two-site operator over the bonds of a chain of ``n_sites`` sites."""
    h2 = as_matrix(h2, 9)
    if not 2 <= n_sites <= 6:
        raise DimensionError(f"chain length must be between 2 and 6, got {n_sites}")
    bonds = [(j, j + 1) for j in range(n_sites - 1)]
    if periodic:
        bonds.append((n_sites - 1, 0))
    return sum(embed_pair(h2, n_sites, a, b) for a, b in bonds)


def gb_hamiltonian(phi, psi, xi, J0: complex = J0_DEFAULT, upsilon=None) -> np.ndarray:
    """Generalized Bariev Hamiltonian.

    upsilon defaults to the value fixed by -4*xi*upsilon = phi^2 - phi*psi + psi^2;
    pass it explicitly to take the xi -> 0 limit.
    """
    phi, psi, xi = complex(phi), complex(psi), complex(xi)
    if abs(phi) < POLE_MARGIN:
        raise ModelParameterError("generalized Bariev Hamiltonian requires phi != 0")
    if upsilon is None:
        guard_pole(xi, "GB xi = 0")
        upsilon = -(phi**2 - phi * psi + psi**2) / (4 * xi)
    ups = complex(upsilon)
    J = -1 / complex(J0) ** 2
    w = psi - xi**2 / phi
    h = np.zeros((9, 9), dtype=complex)
    h[0, 0] = -ups
    h[1, 3] = phi
    h[2, 2] = -ups - J**2 * xi
    h[2, 4] = phi
    h[2, 6] = xi
    h[3, 1] = psi
    h[4, 2] = -(J**2) * w
    h[4, 4] = ups - xi
    h[4, 6] = w
    h[5, 7] = psi
    h[6, 2] = xi
    h[6, 4] = -J * phi
    h[6, 6] = -ups - J * xi
    h[7, 5] = phi
    h[8, 8] = -ups
    return h


def mb0_constants(alpha, beta, J0: complex = J0_DEFAULT) -> dict:
    """rho, eta and the gauge factor f of the main-branch Hamiltonian (principal roots)."""
    alpha, beta, J0 = complex(alpha), complex(beta), complex(J0)
    denom = alpha**2 - alpha * beta + beta**2
    guard_pole(denom, "MB0 alpha^2 - alpha*beta + beta^2 = 0")
    rho = 4 / denom
    eta = -np.sqrt(alpha * beta - 1) / J0
    guard_pole(beta, "MB0 beta = 0")
    f = np.sqrt(J0**2 * eta / beta)
    return {"rho": complex(rho), "eta": complex(eta), "f": complex(f)}


def mb0_hamiltonian(alpha, beta, J0: complex = J0_DEFAULT) -> np.ndarray:
    c = mb0_constants(alpha, beta, J0)
    rho, eta, J0 = c["rho"], c["eta"], complex(J0)
    alpha, beta = complex(alpha), complex(beta)
    h = np.zeros((9, 9), dtype=complex)
    h[0, 0] = 1
    h[1, 3] = -beta * rho
    h[2, 2] = 1 + J0**2 * rho
    h[2, 4] = -(J0**2) * eta * rho
    h[2, 6] = rho
    h[3, 1] = -alpha * rho
    h[4, 2] = -(J0**2) * eta * rho
    h[4, 4] = -1 - rho
    h[4, 6] = -eta * rho
    h[5, 7] = -alpha * rho
    h[6, 2] = rho
    h[6, 4] = -eta * rho
    h[6, 6] = 1 + rho / J0**2
    h[7, 5] = -beta * rho
    h[8, 8] = 1
    return h


def _e(i: int, j: int, k: int, l: int) -> np.ndarray:
    return kron(elementary(i, j), elementary(k, l))


def h17(Lambda, J, verbatim: bool = False) -> np.ndarray:
    """Seventeen-vertex Hamiltonian related to the special branch at xi -> 0.

    ``verbatim`` keeps the printed E21(x)E21 term (see H17_TRANSCRIPTION_FLAG).
    """
    Lambda, J = complex(Lambda), complex(J)
    last = _e(2, 1, 2, 1) if verbatim else _e(2, 1, 1, 2)
    h = -Lambda * (_e(0, 0, 0, 0) + _e(0, 0, 2, 2) - _e(1, 1, 1, 1) + _e(2, 2, 0, 0) + _e(2, 2, 2, 2))
    h = h - J * (_e(0, 1, 1, 0) + _e(0, 1, 2, 1) + _e(1, 0, 1, 2) + last)
    h = h + _e(1, 0, 0, 1) + _e(1, 2, 1, 0) + _e(1, 2, 2, 1) + _e(2, 1, 0, 1)
    return h


def h14(xi) -> np.ndarray:
    """Fourteen-vertex Hamiltonian."""
    xi = complex(xi)
    h = _e(0, 1, 1, 0) + _e(0, 1, 2, 1) - _e(2, 1, 0, 1) + _e(1, 2, 2, 1) + _e(0, 2, 2, 0)
    diag = {(0, 2): 0.5, (2, 0): 0.5, (1, 1): 1.0, (1, 2): 1.5, (2, 1): xi - 1.5, (2, 2): xi}
    for (i, j), value in diag.items():
        h[3 * i + j, 3 * i + j] += value
    return h


def spr_hamiltonian(entries) -> np.ndarray:
    """SpR Hamiltonian from an entry table [[row, col, re, im], ...]."""
    h = np.zeros((9, 9), dtype=complex)
    for row, col, re, im in entries:
        h[int(row), int(col)] = complex(re, im)
    if np.any(h[~ice_mask()] != 0):
        raise ModelParameterError("SpR entry table violates the ice rule")
    return h


def named_hamiltonian(model: NamedModel) -> np.ndarray:
    """Dispatch a catalogued model name and parameter record to its Hamiltonian."""
    p = dict(model.params)
    if model.name is ModelName.GB:
        return gb_hamiltonian(p["phi"], p["psi"], p["xi"], p.get("J0", J0_DEFAULT), p.get("upsilon"))
    if model.name is ModelName.MB0:
        return mb0_hamiltonian(p["alpha"], p["beta"], p.get("J0", J0_DEFAULT))
    if model.name is ModelName.SB17:
        return h17(p["Lambda"], p["J"], bool(p.get("verbatim", False)))
    if model.name is ModelName.V14:
        return h14(p["xi"])
    if model.name is ModelName.SPR:
        if "entries" not in p:
            raise ModelParameterError("SpR requires an entry table from a model-spec file")
        return spr_hamiltonian(p["entries"])
    raise ModelParameterError(f"{model.name.value} Hamiltonian is derived from its R-matrix")


# ── Equivalence transformations ─────────────────────────────────────────


def _site_sz() -> np.ndarray:
    return np.diag(np.arange(SITE_DIM, dtype=complex))


def two_site_sz() -> np.ndarray:
    s = _site_sz()
    eye = np.eye(SITE_DIM)
    return kron(s, eye) + kron(eye, s)


def apply_twist_H(h, twist: TwistSpec) -> np.ndarray:
    """Apply gauge, grading, telescope, identity shift and Sz shift, in that order."""
    h = as_matrix(h, 9).copy()
    eye = np.eye(SITE_DIM, dtype=complex)
    if twist.gauge_g is not None:
        g_inv = inverse(twist.gauge_g)
        h = kron(twist.gauge_g, twist.gauge_g) @ h @ kron(g_inv, g_inv)
    if twist.grading_alpha != 0:
        e = np.diag(np.exp(twist.grading_alpha * np.arange(SITE_DIM)))
        e_inv = np.diag(np.exp(-twist.grading_alpha * np.arange(SITE_DIM)))
        h = kron(e, e_inv) @ h @ kron(e_inv, e)
    if twist.telescope_A is not None:
        h = h + kron(twist.telescope_A, eye) - kron(eye, twist.telescope_A)
    if twist.identity_shift_alpha != 0:
        h = h + twist.identity_shift_alpha * np.eye(9)
    if twist.sz_shift_beta != 0:
        h = h + twist.sz_shift_beta * two_site_sz()
    return h


def charge_conjugate(h) -> np.ndarray:
    """Conjugation by X(x)X with X|j> = |2-j>."""
    h = as_matrix(h)
    n = int(round(np.log(h.shape[0]) / np.log(SITE_DIM)))
    x = np.eye(SITE_DIM, dtype=complex)[::-1]
    xx = x
    for _ in range(n - 1):
        xx = kron(xx, x)
    return xx @ h @ xx


def _entry_exponents() -> dict[tuple[int, int], tuple[int, int]]:
    """(kappa, tau) of each off-diagonal ice position.

    Under g = diag(1, g1, g2) and grading e^alpha an entry scales by
    K^kappa * W^tau with K = g2/g1^2 and W = e^(2 alpha).
    """
    labels = basis_labels(2)
    out = {}
    for r, c in zip(*np.nonzero(ice_mask())):
        if r == c:
            continue
        n2 = int(np.sum(labels[r] == 2)) - int(np.sum(labels[c] == 2))
        out[(int(r), int(c))] = (n2, int(labels[r][0] - labels[c][0]))
    return out


def find_diagonal_gauge(h1, h2, tol: float = 1e-9) -> GaugeFit:
    """Fit a diagonal gauge, grading, identity shift and Sz shift mapping h1 to h2."""
    h1 = as_matrix(h1, 9)
    h2 = as_matrix(h2, 9)
    scale = max(1.0, sup_norm(h1), sup_norm(h2))
    zero = 1e-12 * scale
    nz1 = np.abs(h1) > zero
    nz2 = np.abs(h2) > zero
    offdiag = ~np.eye(9, dtype=bool)
    if np.any(nz1[offdiag] != nz2[offdiag]) or np.any((nz1 | nz2) & ~ice_mask()):
        mismatch = [
            (int(r), int(c)) for r, c in zip(*np.nonzero((nz1 != nz2) & offdiag))
        ]
        return GaugeFit(None, float("inf"), False, f"incompatible zero patterns at {mismatch}")

    exps = _entry_exponents()
    pairs = [(pos, kt) for pos, kt in exps.items() if nz1[pos]]
    if pairs:
        kappa = np.array([kt[0] for _, kt in pairs], dtype=float)
        tau = np.array([kt[1] for _, kt in pairs], dtype=float)
        a1 = np.array([h1[pos] for pos, _ in pairs])
        a2 = np.array([h2[pos] for pos, _ in pairs])
        design = np.column_stack([kappa, tau])
        log_mod, *_ = np.linalg.lstsq(design, np.log(np.abs(a2 / a1)), rcond=None)

        def residuals(x):
            factor = np.exp(kappa * (x[0] + 1j * x[1]) + tau * (x[2] + 1j * x[3]))
            d = (factor * a1 - a2) / scale
            return np.concatenate([d.real, d.imag])

        best = None
        for ph_k, ph_w in itertools.product(np.arange(4) * np.pi / 2, repeat=2):
            x0 = np.array([log_mod[0], ph_k, log_mod[1], ph_w])
            sol = scipy.optimize.least_squares(residuals, x0, xtol=1e-14, ftol=1e-14, gtol=1e-14)
            if best is None or sol.cost < best.cost:
                best = sol
        log_k = best.x[0] + 1j * best.x[1]
        log_w = best.x[2] + 1j * best.x[3]
    else:
        log_k = log_w = 0j

    gauge = np.diag([1.0, 1.0, np.exp(log_k)]).astype(complex)
    partial = TwistSpec(gauge_g=gauge, grading_alpha=log_w / 2)
    moved = apply_twist_H(h1, partial)
    sz = basis_labels(2).sum(axis=1).astype(float)
    design = np.column_stack([np.ones(9), sz])
    shifts, *_ = np.linalg.lstsq(design.astype(complex), np.diag(h2) - np.diag(moved), rcond=None)
    twist = TwistSpec(
        gauge_g=gauge,
        grading_alpha=log_w / 2,
        identity_shift_alpha=shifts[0],
        sz_shift_beta=shifts[1],
    )
    residual = relative_residual(apply_twist_H(h1, twist) - h2, h1, h2)
    success = residual <= tol
    if not success:
        logger.debug("diagonal gauge fit residual %.3e above %.1e", residual, tol)
    return GaugeFit(twist, residual, success, "ok" if success else "residual above tolerance")
