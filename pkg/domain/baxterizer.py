"""Hecke, Temperley-Lieb and BMW fits of two-site operators, and their Baxterizations.

Every fit looks for an affine normalization T = alpha*H + beta*I. The braid
relation is invariant under rescaling, so beta/alpha is fixed first from
T12 T23 T12 = T23 T12 T23 and the scale afterwards from the eigenvalues.
"""

from __future__ import annotations

import logging

import numpy as np

from domain.errors import AlgebraFitError, PoleProximityError, SingularOperatorError
from domain.models import AlgebraFamily, AlgebraFit
from domain.tensor_core import SITE_DIM, as_matrix, inverse, relative_residual, sup_norm

logger = logging.getLogger(__name__)

EIGEN_GAP = 1e-7
TL_POLE_EXCLUSION = 1e-3
EYE3 = np.eye(SITE_DIM, dtype=complex)
EYE9 = np.eye(9, dtype=complex)


def _r12(m) -> np.ndarray:
    return np.kron(m, EYE3)


def _r23(m) -> np.ndarray:
    return np.kron(EYE3, m)


def braid_relation_residual(t) -> float:
    """Relative sup-norm of T12 T23 T12 - T23 T12 T23."""
    t = as_matrix(t, 9)
    t1, t2 = _r12(t), _r23(t)
    lhs = t1 @ t2 @ t1
    rhs = t2 @ t1 @ t2
    return relative_residual(lhs - rhs, lhs, rhs)


# ── Spectral helpers ────────────────────────────────────────────────────


def eigen_clusters(h, gap: float = EIGEN_GAP) -> list[tuple[complex, int]]:
    """Distinct eigenvalues of ``h`` with multiplicities, merged within ``gap``."""
    vals = np.linalg.eigvals(as_matrix(h))
    scale = max(1.0, float(np.max(np.abs(vals))))
    clusters: list[list[complex]] = []
    for v in sorted(vals, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        for c in clusters:
            if abs(v - np.mean(c)) <= gap * scale:
                c.append(v)
                break
        else:
            clusters.append([v])
    return [(complex(np.mean(c)), len(c)) for c in clusters]


def minimal_polynomial_residual(h, roots) -> float:
    h = as_matrix(h)
    prod = np.eye(h.shape[0], dtype=complex)
    for r in roots:
        prod = prod @ (h - r * np.eye(h.shape[0]))
    return sup_norm(prod) / max(1.0, sup_norm(h)) ** len(roots)


def _checked_clusters(h, family: str, degree: int, tol: float) -> list[tuple[complex, int]]:
    clusters = eigen_clusters(h)
    if len(clusters) != degree:
        raise AlgebraFitError(family, "minimal polynomial degree", float(len(clusters)))
    res = minimal_polynomial_residual(h, [c for c, _ in clusters])
    if res > max(tol, 1e-9):
        raise AlgebraFitError(family, "diagonalizability", res)
    return clusters


def braid_shift(h) -> tuple[complex, float]:
    """r such that H + r*I satisfies the braid relation, with the relation residual.

    (H1+r)(H2+r)(H1+r) - (H2+r)(H1+r)(H2+r) = D + r (H1^2 - H2^2) + r^2 (H1 - H2).
    """
    h = as_matrix(h, 9)
    h1, h2 = _r12(h), _r23(h)
    d = (h1 @ h2 @ h1 - h2 @ h1 @ h2).ravel()
    k = (h1 @ h1 - h2 @ h2).ravel()
    e = (h1 - h2).ravel()
    scale = max(1.0, sup_norm(h)) ** 3
    j = int(np.argmax(np.abs(e)))
    if abs(e[j]) > 1e-14:
        candidates = list(np.roots([e[j], k[j], d[j]]))
    elif sup_norm(k) > 1e-14:
        jk = int(np.argmax(np.abs(k)))
        candidates = [-d[jk] / k[jk]]
    else:
        candidates = [0.0]
    scored = [(sup_norm(d + r * k + r * r * e) / scale, complex(r)) for r in candidates]
    residual, r = min(scored, key=lambda s: (s[0], abs(s[1])))
    return r, float(residual)


# ── Hecke ───────────────────────────────────────────────────────────────


def hecke_fit(h, tol: float = 1e-10) -> AlgebraFit:
    """T = alpha*H + beta*I with eigenvalues {q, -1/q}, so T - T^-1 = xi*I."""
    h = as_matrix(h, 9)
    (l1, _), (l2, _) = _checked_clusters(h, "Hecke", 2, tol)
    r, res = braid_shift(h)
    if res > tol:
        raise AlgebraFitError("Hecke", "braid", res)
    prod = (l1 + r) * (l2 + r)
    if abs(prod) < 1e-14:
        raise AlgebraFitError("Hecke", "invertibility", abs(prod))
    alpha = complex(np.sqrt(-1 / prod))
    t = alpha * (h + r * EYE9)
    q = alpha * (l1 + r)
    xi = q - 1 / q
    t_inv = inverse(t)
    residuals = {
        "braid": braid_relation_residual(t),
        "hecke": relative_residual(t - t_inv - xi * EYE9, t),
    }
    for name, value in residuals.items():
        if value > tol:
            raise AlgebraFitError("Hecke", name, value)
    return AlgebraFit(
        family=AlgebraFamily.HECKE,
        alpha_scale=alpha,
        beta_shift=alpha * r,
        generator=t,
        constants={"q": q, "xi": xi},
        residuals=residuals,
    )


def hecke_baxterize(fit: AlgebraFit, z) -> np.ndarray:
    """Ř(z) = z T - T^-1 / z."""
    z = complex(z)
    if abs(z) < 1e-12:
        raise PoleProximityError("Hecke z = 0", abs(z), 1e-12)
    t = fit.generator
    return z * t - inverse(t) / z


# ── Temperley-Lieb ──────────────────────────────────────────────────────


def tl_fit(h, tol: float = 1e-10) -> AlgebraFit:
    """Generator t = gamma * P, P an eigenprojector of H, with t^2 = 2a t and t1 t2 t1 = t1."""
    h = as_matrix(h, 9)
    clusters = _checked_clusters(h, "TL", 2, tol)
    worst = np.inf
    for (le, _), (lo, _) in sorted(
        [(clusters[0], clusters[1]), (clusters[1], clusters[0])], key=lambda p: p[0][1]
    ):
        p = (h - lo * EYE9) / (le - lo)
        p1, p2 = _r12(p), _r23(p)
        triple = p1 @ p2 @ p1
        c = complex(np.vdot(p1.ravel(), triple.ravel()) / np.vdot(p1.ravel(), p1.ravel()))
        if abs(c) < 1e-14:
            continue
        gamma = complex(1 / np.sqrt(c))
        gen = gamma * p
        a = gamma / 2
        g1, g2 = _r12(gen), _r23(gen)
        residuals = {
            "tl_triple": max(
                relative_residual(g1 @ g2 @ g1 - g1, g1),
                relative_residual(g2 @ g1 @ g2 - g2, g2),
            ),
            "tl_square": relative_residual(gen @ gen - 2 * a * gen, gen),
        }
        worst = min(worst, max(residuals.values()))
        if max(residuals.values()) > tol:
            continue
        if abs(a * a - 1) < 1e-12:
            raise AlgebraFitError("TL", "a^2 = 1 degenerate", abs(a * a - 1))
        return AlgebraFit(
            family=AlgebraFamily.TL,
            alpha_scale=gamma / (le - lo),
            beta_shift=-gamma * lo / (le - lo),
            generator=gen,
            constants={"a": a},
            residuals=residuals,
        )
    raise AlgebraFitError("TL", "tl_triple", float(worst))


def tl_baxterize(fit: AlgebraFit, z) -> np.ndarray:
    """Ř(z) = t - a + (z + 1)/(z - 1) sqrt(a^2 - 1), principal branch."""
    z = complex(z)
    if abs(z - 1) < TL_POLE_EXCLUSION:
        raise PoleProximityError("TL z = 1", abs(z - 1), TL_POLE_EXCLUSION)
    a = complex(fit.constants["a"])
    s = complex(np.sqrt(a * a - 1))
    return fit.generator + (-a + (z + 1) / (z - 1) * s) * EYE9


# ── Birman-Murakami-Wenzl ───────────────────────────────────────────────


def _bmw_residuals(t: np.ndarray, a: complex, xi: complex) -> dict:
    t_inv = inverse(t)
    z = t - t_inv - xi * EYE9
    z1, z2 = _r12(z), _r23(z)
    t1, t2 = _r12(t), _r23(t)
    t1i, t2i = _r12(t_inv), _r23(t_inv)
    scale = max(1.0, sup_norm(z)) ** 2 * max(1.0, sup_norm(t), sup_norm(t_inv))
    return {
        "zt": relative_residual(z @ t + a * z, z, t),
        "tz": relative_residual(t @ z + a * z, z, t),
        "ztz": max(sup_norm(z1 @ t2 @ z1 - xi / a * z1), sup_norm(z2 @ t1 @ z2 - xi / a * z2)) / scale,
        "ztz_inverse": max(sup_norm(z1 @ t2i @ z1 - xi * a * z1), sup_norm(z2 @ t1i @ z2 - xi * a * z2)) / scale,
        "braid": braid_relation_residual(t),
    }


def bmw_fit(h, tol: float = 1e-10) -> AlgebraFit:
    """T = alpha*(H + r) with eigenvalues {q, -1/q, -a} satisfying the BMW relations.

    Z = T - T^-1 - xi with xi = q - 1/q is supported on the -a eigenspace.
    """
    h = as_matrix(h, 9)
    clusters = _checked_clusters(h, "BMW", 3, tol)
    r, res = braid_shift(h)
    if res > tol:
        raise AlgebraFitError("BMW", "braid", res)
    worst = ("relations", np.inf)
    order = sorted(range(3), key=lambda i: clusters[i][1])
    for ie in order:
        l1, l2 = (clusters[i][0] for i in range(3) if i != ie)
        le = clusters[ie][0]
        prod = (l1 + r) * (l2 + r)
        if abs(prod) < 1e-14 or abs(le + r) < 1e-14:
            continue
        for sign in (1, -1):
            alpha = sign * complex(np.sqrt(-1 / prod))
            t = alpha * (h + r * EYE9)
            q = alpha * (l1 + r)
            a = -alpha * (le + r)
            xi = q - 1 / q
            try:
                residuals = _bmw_residuals(t, a, xi)
            except SingularOperatorError:
                continue
            bad = max(residuals, key=residuals.get)
            if residuals[bad] <= tol:
                return AlgebraFit(
                    family=AlgebraFamily.BMW,
                    alpha_scale=alpha,
                    beta_shift=alpha * r,
                    generator=t,
                    constants={"q": q, "a": a, "xi": xi},
                    residuals=residuals,
                )
            if residuals[bad] < worst[1]:
                worst = (bad, residuals[bad])
    raise AlgebraFitError("BMW", worst[0], float(worst[1]))


def bmw_baxterize(fit: AlgebraFit, z, sign: str = "+") -> np.ndarray:
    """Ř(z) = T + a_s z^2/(1 - a_s z^2) Z - z xi/(z - 1/z) I, a_+ = -a q, a_- = a/q.

    The minus sign on the identity term makes the Z = 0 case coincide with the
    Hecke Baxterization of T^-1.
    """
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    z = complex(z)
    q, a, xi = (complex(fit.constants[k]) for k in ("q", "a", "xi"))
    a_s = -a * q if sign == "+" else a / q
    for value, locus in ((z, "BMW z = 0"), (z * z - 1, "BMW z = +-1"), (1 - a_s * z * z, "BMW a z^2 = 1")):
        if abs(value) < 1e-12:
            raise PoleProximityError(locus, abs(value), 1e-12)
    t = fit.generator
    zop = t - inverse(t) - xi * EYE9
    return t + a_s * z * z / (1 - a_s * z * z) * zop - z * xi / (z - 1 / z) * EYE9


# ── Detection ───────────────────────────────────────────────────────────


_FITTERS = {
    AlgebraFamily.HECKE: hecke_fit,
    AlgebraFamily.TL: tl_fit,
    AlgebraFamily.BMW: bmw_fit,
}


def detect_families(h, tol: float = 1e-10) -> dict[AlgebraFamily, AlgebraFit | AlgebraFitError]:
    """Run every fit; values are the fit on success and the error otherwise."""
    out: dict[AlgebraFamily, AlgebraFit | AlgebraFitError] = {}
    for family, fitter in _FITTERS.items():
        try:
            out[family] = fitter(h, tol)
        except AlgebraFitError as e:
            logger.debug("%s fit failed: %s", family.value, e)
            out[family] = e
    return out


def passing_families(h, tol: float = 1e-10) -> list[AlgebraFit]:
    return [f for f in detect_families(h, tol).values() if isinstance(f, AlgebraFit)]
