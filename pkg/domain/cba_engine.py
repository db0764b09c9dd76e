"""Coordinate Bethe ansatz over the vacuum and plump reference states.

Energies and Bethe-equation residuals are checked against exact diagonalization
of small periodic chains. Amplitudes are never constructed; the two-body
scattering function is a pluggable callable S(k1, k2).
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

import numpy as np
import scipy.linalg
from scipy.cluster.hierarchy import fcluster, linkage

from domain.errors import DimensionError, ModelParameterError, ScatteringError
from domain.model_catalog import build_chain, charge_conjugate, conjugate_params, params_from_matrix
from domain.models import (
    BasisState,
    BetheRoots,
    CompletenessReport,
    HamiltonianParams,
    MatchingReport,
    Reference,
    SectorBasis,
    SectorProbe,
)
from domain.tensor_core import basis_labels, eig_sym_sector, sector_indices, sup_norm

logger = logging.getLogger(__name__)

ScatteringFn = Callable[[complex, complex], complex]

CLUSTER_FACTOR = 10.0
DEFECT_GAP = 1e-6
RANK_TOL = 1e-8


# ── Sector bases ────────────────────────────────────────────────────────


def _excitations(labels: np.ndarray, reference: Reference) -> np.ndarray:
    return labels if reference is Reference.VACUUM else 2 - labels


def sector_basis(L: int, M: int, reference: Reference = Reference.VACUUM) -> SectorBasis:
    """Basis of the Sz = M eigenspace, in increasing basis-index order.

    Over the vacuum each state lists its magnon positions (1-based, a doubly
    occupied site appears twice). Over the plump reference the same is done
    for the N = 2L - M holes.
    """
    if L < 1:
        raise DimensionError(f"chain length must be positive, got {L}")
    if not 0 <= M <= 2 * L:
        raise DimensionError(f"M must lie in [0, {2 * L}] for L={L}, got {M}")
    labels = basis_labels(L)
    states = []
    for index in sector_indices(L, M):
        occ = _excitations(labels[index], reference)
        sites = [site + 1 for site in range(L) if occ[site] > 0]
        states.append(
            BasisState(
                labels=tuple(int(x) for x in labels[index]),
                positions=tuple(site for site in sites for _ in range(int(occ[site - 1]))),
                multiplicities=tuple(int(occ[site - 1]) for site in sites),
                index=index,
            )
        )
    return SectorBasis(L=L, M=M, reference=reference, states=tuple(states))


# ── Energies ────────────────────────────────────────────────────────────


def energy_vacuum(params: HamiltonianParams, L: int, roots: BetheRoots) -> complex:
    """E = L v00 + M (v01 + v10 - 2 v00) + sum_j (q e^{i k_j} + p e^{-i k_j})."""
    if roots.reference is not Reference.VACUUM:
        raise ModelParameterError("energy_vacuum needs roots over the vacuum reference")
    k = np.asarray(roots.k, dtype=complex)
    v00 = params.vij(0, 0)
    shift = params.vij(0, 1) + params.vij(1, 0) - 2 * v00
    hops = np.sum(params.q * np.exp(1j * k) + params.p * np.exp(-1j * k))
    return complex(L * v00 + k.size * shift + hops)


def energy_plump(params: HamiltonianParams, L: int, roots: BetheRoots) -> complex:
    """E = L v22 + N (v21 + v12 - 2 v22) + sum_j (t3 e^{i k_j} + s3 e^{-i k_j})."""
    if roots.reference is not Reference.PLUMP:
        raise ModelParameterError("energy_plump needs roots over the plump reference")
    mirrored = BetheRoots(k=roots.k, reference=Reference.VACUUM)
    return energy_vacuum(conjugate_params(params), L, mirrored)


# ── Bethe equations ─────────────────────────────────────────────────────


def trivial_scattering(k1, k2) -> complex:
    return 1.0 + 0j


def constant_scattering(value: complex) -> ScatteringFn:
    value = complex(value)
    return lambda k1, k2: value


class TabulatedScattering:
    """S(k1, k2) from sampled values, read at the nearest sample.

    A lookup further than ``tolerance`` (max-norm in the momentum pair) from
    every sample is an error rather than an extrapolation.
    """

    def __init__(self, samples: Iterable, tolerance: float = 1e-6):
        rows = [tuple(complex(x) for x in s) for s in samples]
        if not rows or any(len(r) != 3 for r in rows):
            raise DimensionError("scattering table needs samples of the form (k1, k2, S)")
        self._k = np.array([[r[0], r[1]] for r in rows], dtype=complex)
        self._s = np.array([r[2] for r in rows], dtype=complex)
        self.tolerance = float(tolerance)

    def __len__(self) -> int:
        return self._s.size

    def __call__(self, k1, k2) -> complex:
        gap = np.max(np.abs(self._k - np.array([k1, k2], dtype=complex)), axis=1)
        best = int(np.argmin(gap))
        if gap[best] > self.tolerance:
            raise ScatteringError(
                f"no tabulated sample within {self.tolerance:.1e} of ({complex(k1)}, {complex(k2)})"
            )
        return complex(self._s[best])


def scattering_function(name: str, value: complex | None = None) -> ScatteringFn:
    """Built-in scattering functions by name: ``trivial`` or ``constant``."""
    if name == "trivial":
        return trivial_scattering
    if name == "constant":
        if value is None:
            raise ModelParameterError("the constant scattering function needs a value")
        return constant_scattering(value)
    raise ModelParameterError(f"unknown scattering function '{name}'")


def _scatter(s_fn: ScatteringFn, k1, k2) -> complex:
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise"):
            s = complex(s_fn(k1, k2))
    except (ZeroDivisionError, FloatingPointError, OverflowError) as e:
        raise ScatteringError(f"S({complex(k1)}, {complex(k2)}) is singular: {e}") from e
    if not np.isfinite(s):
        raise ScatteringError(f"S({complex(k1)}, {complex(k2)}) is not finite")
    return s


def bethe_residual(roots: BetheRoots, s_fn: ScatteringFn, L: int) -> list[float]:
    """Per-root |e^{i k_j L} - prod_{n != j} S(k_n, k_j)|."""
    k = roots.k
    out = []
    for j, kj in enumerate(k):
        product = 1.0 + 0j
        for n, kn in enumerate(k):
            if n != j:
                product *= _scatter(s_fn, kn, kj)
        out.append(float(abs(np.exp(1j * kj * L) - product)))
    return out


def solve_free_momenta(L: int, M: int = 1, reference: Reference = Reference.VACUUM) -> list[BetheRoots]:
    """Single-excitation roots k = 2 pi m / L, m = 0 .. L-1."""
    if M != 1:
        raise ModelParameterError(f"free momenta are only defined for one excitation, got M={M}")
    if L < 1:
        raise DimensionError(f"chain length must be positive, got {L}")
    return [BetheRoots(k=(2 * np.pi * m / L,), reference=reference) for m in range(L)]


# ── Spectra ─────────────────────────────────────────────────────────────


def chain_sector_spectra(h2, L: int, threads: int = 1, periodic: bool = True) -> dict[int, np.ndarray]:
    """Eigenvalues of every Sz sector of the chain built from ``h2``."""
    chain = build_chain(h2, L, periodic)

    def sector(M):
        return M, eig_sym_sector(chain, sector_indices(L, M))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(sector, range(2 * L + 1)))
    else:
        results = [sector(M) for M in range(2 * L + 1)]
    return dict(results)


def _clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Single-linkage groups of ``values`` in the complex plane, ordered by centre."""
    if values.size == 0:
        return []
    if values.size == 1:
        return [values]
    points = np.column_stack([values.real, values.imag])
    labels = fcluster(linkage(points, method="single"), t=gap, criterion="distance")
    groups = [values[labels == lab] for lab in np.unique(labels)]
    return sorted(groups, key=lambda g: (round(float(np.mean(g).real), 8), float(np.mean(g).imag)))


def _sorted(values: np.ndarray) -> np.ndarray:
    return values[np.lexsort((values.imag, values.real))]


def spectral_set_compare(E_list, Etilde_list, tol: float = 1e-10) -> MatchingReport:
    """Multiset comparison of two spectra.

    Values closer than 10*tol are grouped into clusters; clusters pair by
    nearest centre and must have equal cardinality. Members of paired clusters
    are matched in sorted order.
    """
    a = np.asarray(list(E_list), dtype=complex)
    b = np.asarray(list(Etilde_list), dtype=complex)
    if a.size != b.size:
        raise DimensionError(f"spectra differ in size: {a.size} vs {b.size}")
    if a.size == 0:
        return MatchingReport(True, 0.0, 0, 0, tol, "empty spectra")

    gap = CLUSTER_FACTOR * tol
    ca, cb = _clusters(a, gap), _clusters(b, gap)
    free = list(range(len(cb)))
    worst = 0.0
    problems = []
    for group in ca:
        centre = np.mean(group)
        j = min(free, key=lambda i: abs(np.mean(cb[i]) - centre)) if free else None
        if j is None:
            problems.append(f"no partner for level {complex(centre):.6g}")
            worst = np.inf
            continue
        free.remove(j)
        partner = cb[j]
        if partner.size != group.size:
            problems.append(
                f"multiplicity {group.size} vs {partner.size} near {complex(centre):.6g}"
            )
            worst = max(worst, float(np.max(np.abs(group[:, None] - partner[None, :]))))
            continue
        worst = max(worst, float(np.max(np.abs(_sorted(group) - _sorted(partner)))))
    passed = not problems and worst <= tol
    message = "; ".join(problems) if problems else f"max distance {worst:.3e}"
    return MatchingReport(passed, float(worst), int(a.size), len(ca), tol, message)


def _match_levels(exact: np.ndarray, formula: list[complex], tol: float) -> tuple[int, list[complex]]:
    """Greedy nearest matching of formula levels onto exact levels."""
    remaining = list(exact)
    reached = 0
    for e in formula:
        if not remaining:
            break
        j = int(np.argmin([abs(x - e) for x in remaining]))
        if abs(remaining[j] - e) <= tol * max(1.0, abs(e)):
            remaining.pop(j)
            reached += 1
    return reached, [complex(x) for x in remaining]


def _defect(block: np.ndarray, levels: np.ndarray) -> int:
    """Dimension minus the summed geometric multiplicities."""
    if block.size == 0:
        return 0
    scale = max(1.0, sup_norm(block))
    geometric = 0
    for group in _clusters(levels, DEFECT_GAP * scale):
        s = scipy.linalg.svdvals(block - np.mean(group) * np.eye(block.shape[0]))
        geometric += int(np.sum(s <= RANK_TOL * scale))
    return block.shape[0] - geometric


def formula_levels(params: HamiltonianParams, L: int) -> dict[int, list[complex]]:
    """Levels the two references reach with at most one excitation, by sector."""
    out = {
        0: [energy_vacuum(params, L, BetheRoots(k=()))],
        2 * L: [energy_plump(params, L, BetheRoots(k=(), reference=Reference.PLUMP))],
    }
    out[1] = [energy_vacuum(params, L, r) for r in solve_free_momenta(L)]
    out[2 * L - 1] = [energy_plump(params, L, r) for r in solve_free_momenta(L, reference=Reference.PLUMP)]
    return out


def one_excitation_check(h2, L: int, tol: float = 1e-10) -> dict[str, MatchingReport]:
    """Free-momentum energies against the exact one-magnon and one-hole sectors."""
    params = params_from_matrix(h2)
    chain = build_chain(h2, L)
    vac = [energy_vacuum(params, L, r) for r in solve_free_momenta(L)]
    plump = [energy_plump(params, L, r) for r in solve_free_momenta(L, reference=Reference.PLUMP)]
    return {
        "vacuum": spectral_set_compare(vac, eig_sym_sector(chain, sector_indices(L, 1)), tol),
        "plump": spectral_set_compare(plump, eig_sym_sector(chain, sector_indices(L, 2 * L - 1)), tol),
    }


def reference_consistency(h2, L: int, M: int, tol: float = 1e-10) -> MatchingReport:
    """Sector M over the vacuum against sector 2L - M of the conjugated chain.

    For M <= 1 the vacuum side uses the energy formula, otherwise exact
    diagonalization.
    """
    if not 0 <= M <= 2 * L:
        raise DimensionError(f"M must lie in [0, {2 * L}] for L={L}, got {M}")
    conj = build_chain(charge_conjugate(h2), L)
    mirrored = eig_sym_sector(conj, sector_indices(L, 2 * L - M))
    if M <= 1:
        params = params_from_matrix(h2)
        roots = [BetheRoots(k=())] if M == 0 else solve_free_momenta(L)
        own = [energy_vacuum(params, L, r) for r in roots]
    else:
        own = eig_sym_sector(build_chain(h2, L), sector_indices(L, M))
    return spectral_set_compare(own, mirrored, tol)


def _product_eigenstates(chain: np.ndarray, idx, tol: float) -> list[int]:
    """Indices in ``idx`` whose basis state the chain maps onto itself."""
    scale = max(1.0, sup_norm(chain))
    out = []
    for i in idx:
        column = chain[:, i].copy()
        column[i] = 0
        if np.max(np.abs(column)) <= tol * scale:
            out.append(int(i))
    return out


def completeness_probe(h2, L: int, tol: float = 1e-8) -> CompletenessReport:
    """Per sector: exact levels, how many the reference-state formulas reach, and eigenvector defect.

    Formula levels exist within one excitation of the vacuum or the plump;
    other sectors are reported as not covered. In those, a basis state that
    is already an eigenvector is a further reference state, which the
    two-reference ansatz cannot account for.
    """
    if L not in (2, 3):
        raise DimensionError(f"completeness probe runs on L=2 or L=3, got {L}")
    params = params_from_matrix(h2)
    chain = build_chain(h2, L)
    labels = basis_labels(L)
    formulas = formula_levels(params, L)
    probes = []
    for M in range(2 * L + 1):
        idx = sector_indices(L, M)
        levels = eig_sym_sector(chain, idx)
        covered = M in formulas
        if covered:
            reached, unreached = _match_levels(levels, formulas[M], tol)
        else:
            reached, unreached = 0, []
        defect = _defect(chain[np.ix_(idx, idx)], levels)
        extra = [] if covered else _product_eigenstates(chain, idx, tol)
        probes.append(
            SectorProbe(
                M=M,
                dimension=len(idx),
                reached=reached,
                unreached_levels=tuple(unreached),
                defect=defect,
                covered=covered,
                extra_references=tuple(tuple(int(x) for x in labels[i]) for i in extra),
            )
        )
        logger.debug(
            "L=%d M=%d: %d/%d levels reached, defect %d, %d extra reference states",
            L, M, reached, len(idx), defect, len(extra),
        )
    return CompletenessReport(L=L, sectors=tuple(probes))
