"""Yang-Baxter, unitarity, regularity, ice-rule and transfer-matrix checks.

Residuals are relative sup-norms. Sampling is seeded: every sample draws from
its own child seed so parallel runs merge deterministically by sample index.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable

import numpy as np

from domain.errors import CurveSamplingError, PoleProximityError, YbeForgeError
from domain.models import Arity, CheckResult, RMatrixModel, Tolerances, VerificationReport
from domain.rmatrix_catalog import derivative_hamiltonian, sample_curve, unbraid
from domain.tensor_core import SITE_DIM, basis_labels, embed_pair, relative_residual, sup_norm

logger = logging.getLogger(__name__)

EYE3 = np.eye(SITE_DIM, dtype=complex)
MAX_DRAWS = 1000


def _r12(m) -> np.ndarray:
    return np.kron(m, EYE3)


def _r23(m) -> np.ndarray:
    return np.kron(EYE3, m)


# ── Residuals ───────────────────────────────────────────────────────────


def ybe_residual_braided(r_check: Callable, x, y, z) -> float:
    """Ř12(y,z) Ř23(x,z) Ř12(x,y) - Ř23(x,y) Ř12(x,z) Ř23(y,z)."""
    a, b, c = r_check(x, y), r_check(x, z), r_check(y, z)
    lhs = _r12(c) @ _r23(b) @ _r12(a)
    rhs = _r23(a) @ _r12(b) @ _r23(c)
    return relative_residual(lhs - rhs, lhs, rhs)


def ybe_residual_multiplicative(r_check: Callable, u, v) -> float:
    """Ř12(u) Ř23(uv) Ř12(v) - Ř23(v) Ř12(uv) Ř23(u)."""
    ru, rv, ruv = r_check(u), r_check(v), r_check(u * v)
    lhs = _r12(ru) @ _r23(ruv) @ _r12(rv)
    rhs = _r23(rv) @ _r12(ruv) @ _r23(ru)
    return relative_residual(lhs - rhs, lhs, rhs)


def ybe_residual_rll(r_eval: Callable, l_eval: Callable, x, y, w) -> float:
    """R(x,y) L1(x) L2(y) - L2(y) L1(x) R(x,y).

    Sites are (aux 1, aux 2, quantum); L1(x) = L(x, w) on (aux 1, quantum) and
    L2(y) = L(y, w) on (aux 2, quantum). All operators are non-braided.
    """
    r12 = embed_pair(r_eval(x, y), 3, 0, 1)
    l1 = embed_pair(l_eval(x, w), 3, 0, 2)
    l2 = embed_pair(l_eval(y, w), 3, 1, 2)
    lhs = r12 @ l1 @ l2
    rhs = l2 @ l1 @ r12
    return relative_residual(lhs - rhs, lhs, rhs)


def unitarity_check(r_check: Callable, x, y) -> tuple[complex, float]:
    """λ = mean diagonal of Ř(x,y)Ř(y,x) and the deviation from λI."""
    product = r_check(x, y) @ r_check(y, x)
    lam = complex(np.mean(np.diag(product)))
    return lam, relative_residual(product - lam * np.eye(product.shape[0]), product)


def regularity_check(r_check: Callable, x) -> float:
    return sup_norm(r_check(x, x) - np.eye(9))


def ice_rule_check(m) -> float:
    """Largest entry connecting basis states of different total Sz."""
    m = np.asarray(m)
    n = int(round(np.log(m.shape[0]) / np.log(SITE_DIM)))
    sz = basis_labels(n).sum(axis=1)
    off = sz[:, None] != sz[None, :]
    return sup_norm(m[off]) if np.any(off) else 0.0


def extract_hamiltonian(model: RMatrixModel, base=None, h: float = 1e-4) -> np.ndarray:
    """H = d/dx Ř(x, y) at x = y = base."""
    return derivative_hamiltonian(model, base, h)


def hamiltonian_pair_residual(model: RMatrixModel, base=None, h: float = 1e-4) -> float:
    """H_x + H_y minus its identity part; regularity makes the two agree up to sign and identity."""
    hx = derivative_hamiltonian(model, base, h, leg="x")
    hy = derivative_hamiltonian(model, base, h, leg="y")
    total = hx + hy
    c = np.mean(np.diag(total))
    return relative_residual(total - c * np.eye(9), hx, hy)


def _non_braided(model: RMatrixModel) -> Callable:
    rb = model.bivariate()
    return lambda x, y: unbraid(rb(x, y))


def transfer_matrix(r_eval: Callable, x, ys: list) -> np.ndarray:
    """t(x) = Tr_0 R_01(x, y1) ... R_0L(x, yL) with non-braided R."""
    n = len(ys) + 1
    product = np.eye(SITE_DIM**n, dtype=complex)
    for site, y in enumerate(ys, start=1):
        product = product @ embed_pair(r_eval(x, y), n, 0, site)
    dim = SITE_DIM ** (n - 1)
    return np.einsum("aiaj->ij", product.reshape(SITE_DIM, dim, SITE_DIM, dim))


def transfer_commutation(r_eval: Callable, x1, x2, y, n_sites: int) -> float:
    """Relative norm of [t(x1), t(x2)] for a homogeneous chain of ``n_sites`` sites."""
    if not 1 <= n_sites <= 4:
        raise ValueError(f"transfer commutation is limited to 1..4 sites, got {n_sites}")
    t1 = transfer_matrix(r_eval, x1, [y] * n_sites)
    t2 = transfer_matrix(r_eval, x2, [y] * n_sites)
    scale = max(1.0, sup_norm(t1) * sup_norm(t2))
    return sup_norm(t1 @ t2 - t2 @ t1) / scale


# ── Sampling ────────────────────────────────────────────────────────────


def _draw_scalar(rng: np.random.Generator, annulus: tuple[float, float]) -> complex:
    lo, hi = np.log(annulus[0]), np.log(annulus[1])
    return complex(np.exp(rng.uniform(lo, hi)) * np.exp(1j * rng.uniform(-np.pi, np.pi)))


def draw_point(model: RMatrixModel, rng: np.random.Generator, annulus=(0.5, 2.0)):
    """A random spectral point: a complex number, or a curve point."""
    if model.arity is Arity.CURVE:
        a = _draw_scalar(rng, annulus)
        roots = sample_curve(model.curve, a)
        return roots[int(rng.integers(len(roots)))]
    if model.arity is Arity.BIVARIATE:
        return complex(model.base) + complex(rng.normal(scale=0.3), rng.normal(scale=0.3))
    return _draw_scalar(rng, annulus)


def draw_admissible(
    model: RMatrixModel,
    rng: np.random.Generator,
    count: int,
    max_entry: float = 1e2,
    annulus=(0.5, 2.0),
) -> list:
    """``count`` points such that Ř is finite and O(1) on every ordered pair."""
    rb = model.bivariate()
    for _ in range(MAX_DRAWS):
        try:
            pts = [draw_point(model, rng, annulus) for _ in range(count)]
            if all(
                sup_norm(rb(p, q)) <= max_entry for p in pts for q in pts if p is not q
            ):
                return pts
        except (PoleProximityError, CurveSamplingError):
            continue
    raise PoleProximityError(f"{model.name} admissible sampling", 0.0, max_entry)


# ── Report ──────────────────────────────────────────────────────────────


def _sample_residuals(model: RMatrixModel, seed_seq: np.random.SeedSequence, max_entry: float, annulus) -> dict:
    rng = np.random.default_rng(seed_seq)
    rb = model.bivariate()
    x, y, z = draw_admissible(model, rng, 3, max_entry, annulus)
    out: dict[str, tuple[float, Any]] = {}
    out["ice_rule"] = (max(ice_rule_check(rb(x, y)), ice_rule_check(rb(y, z))), (x, y, z))
    out["regularity"] = (regularity_check(rb, x), (x,))
    lam_xy, res_xy = unitarity_check(rb, x, y)
    lam_yx, _ = unitarity_check(rb, y, x)
    out["unitarity"] = (res_xy, (x, y))
    out["lambda_symmetry"] = (abs(lam_xy - lam_yx) / max(1.0, abs(lam_xy)), (x, y))
    if model.arity is Arity.MULTIPLICATIVE:
        out["ybe"] = (ybe_residual_multiplicative(model.evaluator, x / y, y / z), (x / y, y / z))
    else:
        out["ybe"] = (ybe_residual_braided(rb, x, y, z), (x, y, z))
    return out


def verify_model(
    model: RMatrixModel,
    samples: int = 100,
    seed: int = 7,
    tolerances: Tolerances = Tolerances(),
    threads: int = 1,
    transfer_samples: int = 5,
    max_entry: float = 1e2,
    annulus=(0.5, 2.0),
) -> VerificationReport:
    """Run every check on seeded random admissible points."""
    root = np.random.SeedSequence(seed)
    children = root.spawn(samples + transfer_samples)
    logger.info("verifying %s on %d samples (seed %d)", model.name, samples, seed)

    def task(i):
        return _sample_residuals(model, children[i], max_entry, annulus)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, range(samples)))
    else:
        results = [task(i) for i in range(samples)]

    tol_for = {
        "ice_rule": tolerances.structural,
        "regularity": tolerances.structural,
        "unitarity": tolerances.algebraic,
        "lambda_symmetry": tolerances.algebraic,
        "ybe": tolerances.algebraic,
    }
    checks = []
    for name, tol in tol_for.items():
        values = [r[name][0] for r in results]
        worst = int(np.argmax(values)) if values else 0
        checks.append(
            CheckResult(
                check_name=name,
                sample_count=len(values),
                max_residual=float(max(values, default=0.0)),
                worst_point={"sample": worst, "point": results[worst][name][1]} if values else None,
                tolerance=tol,
            )
        )

    r_eval = _non_braided(model)
    comm = []
    for i in range(samples, samples + transfer_samples):
        rng = np.random.default_rng(children[i])
        x1, x2, y = draw_admissible(model, rng, 3, max_entry, annulus)
        comm.append((transfer_commutation(r_eval, x1, x2, y, 3), (x1, x2, y)))
    if comm:
        worst = int(np.argmax([c[0] for c in comm]))
        checks.append(
            CheckResult(
                check_name="transfer_commutation",
                sample_count=len(comm),
                max_residual=float(comm[worst][0]),
                worst_point={"sample": samples + worst, "point": comm[worst][1]},
                tolerance=tolerances.algebraic,
                details={"sites": 3},
            )
        )

    try:
        pair = hamiltonian_pair_residual(model)
        checks.append(
            CheckResult("hamiltonian_pair", 1, float(pair), {"point": model.base}, tolerances.differential)
        )
    except YbeForgeError as e:
        logger.warning("%s: Hamiltonian pair check skipped: %s", model.name, e)

    report = VerificationReport(model=model.name, seed=seed, checks=tuple(checks))
    for c in report.checks:
        logger.debug("%s %s max residual %.3e (tol %.1e)", model.name, c.check_name, c.max_residual, c.tolerance)
    return report


def mutate_model(model: RMatrixModel, entry: tuple[int, int] = (1, 3), amount: float = 1e-2) -> RMatrixModel:
    """Copy of ``model`` with one Ř entry perturbed away from the regular point."""
    rb = model.bivariate()

    def corrupted(*args):
        r = (rb(*args) if len(args) == 2 else model.evaluator(*args)).copy()
        r[entry] += amount * (1 + 0.5j)
        return r

    if model.arity is Arity.MULTIPLICATIVE:
        def corrupted_uni(u):
            r = model.evaluator(u).copy()
            r[entry] += amount * (u - 1) * (1 + 0.5j)
            return r
        evaluator = corrupted_uni
    else:
        evaluator = corrupted
    return RMatrixModel(
        name=f"{model.name}+mutated",
        arity=model.arity,
        params=dict(model.params),
        evaluator=evaluator,
        base=model.base,
        curve=model.curve,
    )
