"""Series reconstruction of R-matrices from a Hamiltonian or a boundary slice.

Univariate series are taken around u = 1, Ř(u) = sum_k Ř^(k) (u - 1)^k, and are
built order by order from H alone. Bivariate series Ř(x, y) = sum Ř^(m,n) x^m y^n
are built from the boundary Ř(x, 0). Both recursions reduce to

    X(x)I - I(x)X = Q

on three sites; X is fixed up to a multiple of the identity, removed by pinning
the (|aa>, |aa>) entry to zero.
"""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Callable

import numpy as np
import scipy.optimize

from domain.errors import SeriesInconsistencyError, YbeForgeError
from domain.model_catalog import apply_twist_H
from domain.models import (
    Arity,
    BiSeries,
    ObstructionReport,
    RMatrixModel,
    Tolerances,
    TwistSpec,
    UniSeries,
    Verdict,
)
from domain.rmatrix_catalog import curve_chart
from domain.tensor_core import SITE_DIM, as_matrix, ice_mask, relative_residual, sup_norm
from domain.verifier import ybe_residual_multiplicative

logger = logging.getLogger(__name__)

EYE3 = np.eye(SITE_DIM, dtype=complex)
EYE9 = np.eye(9, dtype=complex)
MULTISTART_MIN = 27


def _r12(m) -> np.ndarray:
    return np.kron(m, EYE3)


def _r23(m) -> np.ndarray:
    return np.kron(EYE3, m)


def _pinned(norm_index: int) -> int:
    aa = 4 * norm_index
    return aa * 9 + aa


# ── Three-site solve ────────────────────────────────────────────────────


@lru_cache(maxsize=None)
def _difference_operator() -> np.ndarray:
    """Columns vec(E_p(x)I - I(x)E_p) for the 81 elementary 9x9 matrices."""
    cols = []
    for p in range(81):
        e = np.zeros(81, dtype=complex)
        e[p] = 1
        e = e.reshape(9, 9)
        cols.append((_r12(e) - _r23(e)).ravel())
    op = np.column_stack(cols)
    op.setflags(write=False)
    return op


@lru_cache(maxsize=None)
def _solver(norm_index: int) -> tuple[np.ndarray, np.ndarray]:
    keep = np.array([p for p in range(81) if p != _pinned(norm_index)])
    reduced = _difference_operator()[:, keep]
    pinv = np.linalg.pinv(reduced)
    pinv.setflags(write=False)
    return keep, pinv


def _rule_disagreement(x: np.ndarray, q: np.ndarray, norm_index: int) -> float:
    """Largest gap between x and the entries read directly off q.

    X_{bd,ce} = -<abd|Q|ace> for d != e and X_{bd,ce} = <bda|Q|cea> for b != c,
    for every spectator a; X_{ab,ab} = -<aab|Q|aab> for the pinned label a.
    """
    t = q.reshape([SITE_DIM] * 6)
    x4 = x.reshape([SITE_DIM] * 4)
    rule_left = -np.einsum("abdace->abdce", t)
    rule_right = np.einsum("bdacea->abdce", t)
    d_ne_e = ~np.eye(SITE_DIM, dtype=bool)[None, :, None, :]
    b_ne_c = ~np.eye(SITE_DIM, dtype=bool)[:, None, :, None]
    gap_left = np.abs(rule_left - x4[None]) * d_ne_e[None]
    gap_right = np.abs(rule_right - x4[None]) * b_ne_c[None]
    a = norm_index
    gap_diag = np.abs(-np.diagonal(t[a, a, :, a, a, :]) - np.diagonal(x4[a, :, a, :]))
    return float(max(gap_left.max(), gap_right.max(), gap_diag.max()))


def solve_difference(q, norm_index: int = 0, scale: float | None = None) -> tuple[np.ndarray, float]:
    """Solve X(x)I - I(x)X = Q with X[aa, aa] = 0; returns X and the residual.

    The residual is relative to max(1, |Q|) unless an absolute ``scale`` is given.
    """
    q = np.asarray(q, dtype=complex)
    keep, pinv = _solver(norm_index)
    flat = q.ravel()
    sol = pinv @ flat
    x = np.zeros(81, dtype=complex)
    x[keep] = sol
    x = x.reshape(9, 9)
    if scale is None:
        scale = max(1.0, sup_norm(q))
    full = sup_norm(_difference_operator()[:, keep] @ sol - flat)
    residual = max(full, _rule_disagreement(x, q, norm_index)) / scale
    return x, residual


# ── Univariate recursion ────────────────────────────────────────────────


def idzumi_step(coeffs, h, norm_index: int = 0, scale: float | None = None) -> tuple[np.ndarray, float]:
    """Next coefficient Ř^(k+1) from Ř^(0..k) and H.

    Derived from the v-derivative of the multiplicative YBE at v = 1:
    (k+1)(Ř12^(k+1) - Ř23^(k+1)) = sum_{i=1..k} (k+1-2i) Ř12^(i) Ř23^(k+1-i)
        + sum_{i=0..k} [(k-2i) Ř12^(i) Ř23^(k-i) + Ř12^(i) Ř23^(k-i) H12 - H23 Ř12^(i) Ř23^(k-i)].
    """
    k = len(coeffs) - 1
    r12 = [_r12(c) for c in coeffs]
    r23 = [_r23(c) for c in coeffs]
    h12, h23 = _r12(h), _r23(h)
    q = np.zeros((27, 27), dtype=complex)
    for i in range(1, k + 1):
        q += (k + 1 - 2 * i) * (r12[i] @ r23[k + 1 - i])
    for i in range(k + 1):
        prod = r12[i] @ r23[k - i]
        q += (k - 2 * i) * prod + prod @ h12 - h23 @ prod
    return solve_difference(q / (k + 1), norm_index, scale)


def _run_recursion(
    h, order: int, norm_index: int, h_scale: float | None = None
) -> tuple[list[np.ndarray], list[float]]:
    """Residuals are measured against h_scale**(k+1) at step k when h_scale is given."""
    coeffs = [EYE9.copy()]
    residuals = []
    for k in range(order):
        scale = None if h_scale is None else h_scale ** (k + 1)
        nxt, res = idzumi_step(coeffs, h, norm_index, scale)
        coeffs.append(nxt)
        residuals.append(res)
    return coeffs, residuals


def reconstruct_univariate(
    h,
    order: int,
    twist: TwistSpec | None = None,
    norm_index: int = 0,
    tolerances: Tolerances = Tolerances(),
    model: str = "H",
) -> UniSeries | ObstructionReport:
    """Taylor series of the multiplicative Ř(u) generated by ``h``, or the order where it fails."""
    h = as_matrix(h, 9)
    if twist is not None:
        h = apply_twist_H(h, twist)
    coeffs, residuals = _run_recursion(h, order, norm_index)
    for k, res in enumerate(residuals, start=1):
        logger.debug("%s order %d consistency residual %.3e", model, k, res)
        if res > tolerances.obstruction:
            return ObstructionReport(
                model=model,
                order=order,
                verdict=Verdict.OBSTRUCTED,
                order_failed=k,
                residual_by_order=tuple(residuals),
                twist_params={} if twist is None else twist.to_dict(),
            )
    return UniSeries(coeffs=tuple(coeffs), norm_index=norm_index, residuals=tuple(residuals))


def sparsity_mask(h) -> np.ndarray:
    """Positions that may be nonzero in any multiplicative Ř built from ``h``.

    Boolean closure of the recursion: a structural zero of Q at every spectator
    label forces the matching entry of the next coefficient to vanish.
    """
    h = as_matrix(h, 9)
    allowed = ice_mask()
    pattern = (np.abs(h) > 0) | np.eye(9, dtype=bool)
    pattern &= allowed
    eye3 = np.eye(SITE_DIM, dtype=bool)
    h12 = np.kron(pattern, eye3)
    h23 = np.kron(eye3, pattern)
    while True:
        p12 = np.kron(pattern, eye3).astype(int)
        p23 = np.kron(eye3, pattern).astype(int)
        prod = (p12 @ p23) > 0
        q = prod | ((prod.astype(int) @ h12.astype(int)) > 0) | ((h23.astype(int) @ prod.astype(int)) > 0)
        t = q.reshape([SITE_DIM] * 6)
        left = np.einsum("abdace->abdce", t.astype(int)).min(axis=0) > 0
        right = np.einsum("bdacea->abdce", t.astype(int)).min(axis=0) > 0
        d_eq_e = np.eye(SITE_DIM, dtype=bool)[None, :, None, :]
        b_eq_c = np.eye(SITE_DIM, dtype=bool)[:, None, :, None]
        possible = (left | d_eq_e) & (right | b_eq_c)
        new = pattern | (possible.reshape(9, 9) & allowed)
        if np.array_equal(new, pattern):
            return pattern
        pattern = new


# ── Evaluation and order checks ─────────────────────────────────────────


def _tail_estimate(norms: list[float], w: float) -> float:
    if len(norms) < 2 or norms[-2] == 0:
        return norms[-1] * w ** (len(norms) - 1) if norms else 0.0
    ratio = norms[-1] / norms[-2] * w
    if ratio >= 1:
        return float("inf")
    return norms[-1] * w ** (len(norms) - 1) * ratio / (1 - ratio)


def series_eval(series, point, tail_tol: float = 1e-10) -> np.ndarray:
    """Partial sum of a UniSeries at u, or of a BiSeries at local coordinates (x, y)."""
    if isinstance(series, UniSeries):
        w = complex(point) - 1
        out = np.zeros((9, 9), dtype=complex)
        for k, c in enumerate(series.coeffs):
            out += c * w**k
        tail = _tail_estimate([sup_norm(c) for c in series.coeffs], abs(w))
        if tail > tail_tol:
            logger.warning("series evaluated at |u-1|=%.3g beyond its reliable radius (tail %.2e)", abs(w), tail)
        return out
    x, y = (complex(v) for v in point)
    out = np.zeros((9, 9), dtype=complex)
    for (m, n), c in series.coeffs.items():
        out += c * x**m * y**n
    by_degree = [
        max(sup_norm(series.coeffs[(m, d - m)]) for m in range(d + 1)) for d in range(series.order + 1)
    ]
    tail = _tail_estimate(by_degree, max(abs(x), abs(y)))
    if tail > tail_tol:
        logger.warning("bivariate series evaluated at (%s, %s) beyond its reliable radius", x, y)
    return out


def ybe_order_check(series: UniSeries, epsilons=(0.1, 0.05), angle: float = 0.7) -> list[tuple[float, float]]:
    """Multiplicative YBE residual of the truncated series at u, v = 1 + eps e^{i angle}.

    The truncation error scales as eps^(N+1).
    """
    out = []
    for eps in epsilons:
        u = 1 + eps * np.exp(1j * angle)
        v = 1 + eps * np.exp(-1j * angle / 2)
        residual = ybe_residual_multiplicative(lambda z: series_eval(series, z, tail_tol=np.inf), u, v)
        out.append((float(eps), float(residual)))
    return out


def _inverse_argument_powers(order: int) -> list[np.ndarray]:
    """Coefficients in w of (1/(1+w) - 1)^i for i = 0..order."""
    base = np.array([0.0] + [(-1.0) ** k for k in range(1, order + 1)])
    powers = [np.eye(1, order + 1, 0).ravel()]
    for _ in range(order):
        powers.append(np.convolve(powers[-1], base)[: order + 1])
    return powers


def series_unitarity(series) -> list[float]:
    """Per-order residual of Ř(u)Ř(1/u) = I, or of Ř(x,y)Ř(y,x) = I for a BiSeries."""
    if isinstance(series, UniSeries):
        n = series.order
        powers = _inverse_argument_powers(n)
        inv = [sum(powers[i][k] * series.coeffs[i] for i in range(n + 1)) for k in range(n + 1)]
        out = []
        for k in range(n + 1):
            prod = sum(series.coeffs[i] @ inv[k - i] for i in range(k + 1))
            target = EYE9 if k == 0 else 0
            out.append(sup_norm(prod - target))
        return out
    out = []
    for d in range(series.order + 1):
        worst = 0.0
        for m in range(d + 1):
            n = d - m
            prod = sum(
                series.coeffs[(i, j)] @ series.coeffs[(n - j, m - i)]
                for i in range(m + 1)
                for j in range(n + 1)
            )
            target = EYE9 if d == 0 else 0
            worst = max(worst, sup_norm(prod - target))
        out.append(worst)
    return out


# ── Cauchy-integral Taylor coefficients ─────────────────────────────────


def series_coefficients(f: Callable, center, radius: float, order: int, n_points: int = 64) -> list[np.ndarray]:
    """Taylor coefficients of f around ``center`` by the trapezoidal Cauchy integral."""
    if n_points <= order:
        raise ValueError("n_points must exceed the order")
    theta = 2 * np.pi * np.arange(n_points) / n_points
    samples = np.stack([np.asarray(f(complex(center) + radius * np.exp(1j * t)), dtype=complex) for t in theta])
    spectrum = np.fft.fft(samples, axis=0) / n_points
    return [spectrum[k] / radius**k for k in range(order + 1)]


def series_coefficients_2d(f: Callable, radius: float, order: int, n_points: int = 32) -> dict:
    """Coefficients c[(m, n)] of f(x, y) = sum c x^m y^n, m + n <= order."""
    if n_points <= order:
        raise ValueError("n_points must exceed the order")
    z = radius * np.exp(2j * np.pi * np.arange(n_points) / n_points)
    samples = np.stack([np.stack([np.asarray(f(x, y), dtype=complex) for y in z]) for x in z])
    spectrum = np.fft.fft2(samples, axes=(0, 1)) / n_points**2
    return {
        (m, n): spectrum[m, n] / radius ** (m + n)
        for m in range(order + 1)
        for n in range(order + 1 - m)
    }


def local_evaluator(model: RMatrixModel, norm_index: int = 0) -> Callable:
    """F(s, t) = Ř(x(s), x(t)) / Ř_aa^aa in a local coordinate around the base point.

    Curve models move along the chart through the base; other models shift the
    spectral argument additively.
    """
    rb = model.bivariate()
    aa = 4 * norm_index
    if model.arity is Arity.CURVE:
        chart = curve_chart(model.curve, model.base)
    else:
        base = complex(model.base)

        def chart(t):
            return base + t

    def evaluate(s, t):
        r = rb(chart(s), chart(t))
        return r / r[aa, aa]

    return evaluate


# ── Bivariate recursion ─────────────────────────────────────────────────


def _inverse_series(boundary: list[np.ndarray]) -> list[np.ndarray]:
    inv = [EYE9.copy()]
    for j in range(1, len(boundary)):
        inv.append(-sum(boundary[i] @ inv[j - i] for i in range(1, j + 1)))
    return inv


def reconstruct_bivariate(
    boundary,
    order: int,
    norm_index: int = 0,
    tolerances: Tolerances = Tolerances(),
) -> BiSeries:
    """Fill Ř^(m,n) from the boundary coefficients Ř^(m,0), m = 0..order.

    Uses the YBE specialized to a middle argument at zero,
    B12(y) Ř23(x,y) A12(x) = A23(x) Ř12(x,y) B23(y), with A(x) = Ř(x,0) and
    B(y) = Ř(0,y) = A(y)^-1.
    """
    a = [as_matrix(c, 9) for c in boundary][: order + 1]
    if len(a) < order + 1:
        raise ValueError(f"boundary has {len(a)} coefficients, need {order + 1}")
    if relative_residual(a[0] - EYE9, a[0]) > tolerances.differential:
        raise SeriesInconsistencyError(0, 0, relative_residual(a[0] - EYE9, a[0]))
    b = _inverse_series(a)
    r: dict[tuple[int, int], np.ndarray] = {}
    for m in range(order + 1):
        r[(m, 0)] = a[m]
    for n in range(1, order + 1):
        r[(0, n)] = b[n]

    residuals: dict = {}
    a12, a23 = [_r12(c) for c in a], [_r23(c) for c in a]
    b12, b23 = [_r12(c) for c in b], [_r23(c) for c in b]
    for d in range(2, order + 1):
        for m in range(1, d):
            n = d - m
            q = np.zeros((27, 27), dtype=complex)
            for i in range(m + 1):
                for j in range(n + 1):
                    if i == 0 and j == 0:
                        continue
                    inner = r[(m - i, n - j)]
                    q += b12[j] @ _r23(inner) @ a12[i] - a23[i] @ _r12(inner) @ b23[j]
            x, res = solve_difference(q, norm_index)
            residuals[(m, n)] = res
            if res > tolerances.obstruction:
                raise SeriesInconsistencyError(m, n, res)
            r[(m, n)] = x

    for d in range(1, order + 1):
        diag = sup_norm(sum(r[(i, d - i)] for i in range(d + 1)))
        residuals[("diagonal", d)] = diag
        if diag > tolerances.obstruction:
            raise SeriesInconsistencyError(d, 0, diag)
        logger.debug("degree %d diagonal-sum residual %.3e", d, diag)
    return BiSeries(coeffs=r, order=order, norm_index=norm_index, residuals=residuals)


# ── No-go certification ─────────────────────────────────────────────────


# Half-widths of the searched box, in vector order (beta, identity shift, a1, a2, grading).
TWIST_BOUNDS = (2.0, 2.0, 2.0, 2.0, 1.0)
GRID_LEVELS = (0.0, -0.5, 0.5)


def _twist_from_vector(v) -> TwistSpec:
    beta, shift, a1, a2, grading = (float(x) for x in v)
    return TwistSpec(
        grading_alpha=grading,
        telescope_A=np.array([0.0, a1, a2]),
        identity_shift_alpha=shift,
        sz_shift_beta=beta,
    )


def twist_bounds(bounds=TWIST_BOUNDS) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float)
    if bounds.shape != (5,) or np.any(~np.isfinite(bounds)) or np.any(bounds <= 0):
        raise ValueError(f"twist bounds must be five positive numbers, got {bounds.tolist()}")
    return bounds


def _to_box(w, bounds: np.ndarray) -> np.ndarray:
    return bounds * np.tanh(w)


def _from_box(v, bounds: np.ndarray) -> np.ndarray:
    return np.arctanh(np.clip(np.asarray(v, dtype=float) / bounds, -1 + 1e-12, 1 - 1e-12))


def _score(h, order: int, v, norm_index: int, bounds: np.ndarray, h_scale: float) -> tuple[float, list[float]]:
    """Worst per-order residual of the twisted recursion; infinite outside the box."""
    if np.any(np.abs(v) > bounds):
        return float("inf"), []
    try:
        with np.errstate(all="ignore"):
            _, residuals = _run_recursion(apply_twist_H(h, _twist_from_vector(v)), order, norm_index, h_scale)
    except (YbeForgeError, np.linalg.LinAlgError, ValueError):
        return float("inf"), []
    worst = float(np.max(residuals)) if residuals else 0.0
    return (worst if np.isfinite(worst) else float("inf")), residuals


def multistart_grid(starts: int, seed: int, bounds=TWIST_BOUNDS) -> np.ndarray:
    """27-point grid over (beta, a1, a2) with seeded jitter on the other axes, plus uniform extras.

    Every start lies strictly inside the box.
    """
    bounds = twist_bounds(bounds)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    grid = np.array([[beta, 0.0, a1, a2, 0.0] for beta, a1, a2 in itertools.product(GRID_LEVELS, repeat=3)])
    grid[1:, [1, 4]] = rng.normal(scale=0.1, size=(len(grid) - 1, 2))
    extra = max(0, starts - len(grid))
    if extra:
        grid = np.vstack([grid, rng.uniform(-0.5, 0.5, size=(extra, 5)) * bounds])
    return np.clip(grid, -0.9 * bounds, 0.9 * bounds)


def certify_no_go(
    h,
    order: int,
    multistart: int = MULTISTART_MIN,
    seed: int = 7,
    max_iterations: int = 400,
    xatol: float = 1e-10,
    fatol: float = 1e-14,
    threads: int = 1,
    norm_index: int = 0,
    tolerances: Tolerances = Tolerances(),
    model: str = "H",
    bounds=TWIST_BOUNDS,
) -> ObstructionReport:
    """Minimize the recursion inconsistency over the searched twist family.

    The search covers an Sz shift, an identity shift, a diagonal telescope term
    with two free entries and a parameter grading, each confined to a box of
    half-widths ``bounds`` through a tanh reparametrization. Residuals at order k
    are measured against max(1, |H|)**k of the untwisted generator.

    Obstructed means every start stays above the obstruction threshold; exists
    means the best start falls below the existence threshold.
    """
    h = as_matrix(h, 9)
    bounds = twist_bounds(bounds)
    h_scale = max(1.0, sup_norm(h))
    starts = multistart_grid(max(multistart, MULTISTART_MIN), seed, bounds)

    def score(v):
        return _score(h, order, v, norm_index, bounds, h_scale)

    trivial_score, trivial_res = score(np.zeros(5))

    def run(i):
        x0 = starts[i]
        initial, _ = score(x0)
        if initial < tolerances.existence:
            return i, x0, initial

        def objective(w):
            s, _ = score(_to_box(w, bounds))
            return np.log10(s + 1e-300) if np.isfinite(s) else 300.0

        sol = scipy.optimize.minimize(
            objective,
            _from_box(x0, bounds),
            method="Nelder-Mead",
            options={"maxiter": max_iterations, "xatol": xatol, "fatol": fatol},
        )
        if not sol.success:
            logger.debug("start %d did not converge: %s", i, sol.message)
        v = _to_box(sol.x, bounds)
        return i, v, score(v)[0]

    if trivial_score < tolerances.existence:
        results = [(0, np.zeros(5), trivial_score)]
    elif threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(starts))))
    else:
        results = [run(i) for i in range(len(starts))]

    best_i, best_x, best = min(results, key=lambda t: (t[2], t[0]))
    _, by_order = score(best_x)
    if best < tolerances.existence:
        verdict = Verdict.EXISTS
    elif all(s > tolerances.obstruction for _, _, s in results):
        verdict = Verdict.OBSTRUCTED
    else:
        verdict = Verdict.INCONCLUSIVE
    failed = next((k for k, res in enumerate(by_order, start=1) if res > tolerances.existence), None)
    at_bound = bool(np.any(np.abs(best_x) > 0.999 * bounds))
    if at_bound:
        logger.warning("%s: best twist saturates the search box %s", model, bounds.tolist())
    logger.info("%s: %s to order %d (best residual %.3e, start %d)", model, verdict.value, order, best, best_i)
    return ObstructionReport(
        model=model,
        order=order,
        verdict=verdict,
        order_failed=None if verdict is Verdict.EXISTS else failed,
        residual_by_order=tuple(by_order),
        twist_params=_twist_from_vector(best_x).to_dict(),
        details={
            "starts": len(results),
            "best_start": int(best_i),
            "best_residual": float(best),
            "trivial_twist_residual": float(trivial_score),
            "trivial_twist_by_order": [float(r) for r in trivial_res],
            "twist_bounds": bounds.tolist(),
            "at_bound": at_bound,
            "scope": f"finite-order evidence: no series to order {order} under the searched twist family"
            if verdict is Verdict.OBSTRUCTED
            else f"series checked to order {order}",
        },
    )
