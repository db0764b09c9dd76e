"""Dense complex linear algebra on tensor products of three-state sites.

Basis convention: |i1 ... iL> has index sum_k i_k 3^(L-k), so the left-most
site is the most significant digit and ``np.kron`` matches tensor order.
"""

from __future__ import annotations

import logging
from functools import lru_cache

import numpy as np
import scipy.linalg

from domain.errors import DimensionError, SectorLeakageError, SingularOperatorError
from domain.models import LegEmbedding

logger = logging.getLogger(__name__)

SITE_DIM = 3
MAX_SITES = 6
MAX_CONDITION = 1e13


def as_matrix(entries, dim: int | None = None) -> np.ndarray:
    """Validate and return a square complex matrix of a power-of-three dimension."""
    m = np.asarray(entries, dtype=complex)
    if m.ndim == 1:
        n = int(round(np.sqrt(m.size)))
        if n * n != m.size:
            raise DimensionError(f"{m.size} entries do not form a square matrix")
        m = m.reshape(n, n)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {m.shape[0]}")
    n = m.shape[0]
    while n > 1 and n % SITE_DIM == 0:
        n //= SITE_DIM
    if n != 1:
        raise DimensionError(f"dimension {m.shape[0]} is not a power of {SITE_DIM}")
    if not np.all(np.isfinite(m)):
        raise DimensionError("matrix contains NaN or Inf entries")
    return m


def sup_norm(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def relative_residual(diff, *inputs) -> float:
    """Sup-norm of ``diff`` relative to max(1, sup-norms of the inputs)."""
    scale = max([1.0] + [sup_norm(m) for m in inputs])
    return sup_norm(diff) / scale


def identity(n_sites: int = 2) -> np.ndarray:
    return np.eye(SITE_DIM**n_sites, dtype=complex)


def elementary(i: int, j: int) -> np.ndarray:
    """E_ij = |i><j| on one site."""
    e = np.zeros((SITE_DIM, SITE_DIM), dtype=complex)
    e[i, j] = 1
    return e


def kron(a, b) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def two_site_index(i: int, k: int) -> int:
    return SITE_DIM * i + k


def embed(m, e: LegEmbedding) -> np.ndarray:
    """Place a 9x9 operator on the adjacent sites of ``e``."""
    m = as_matrix(m, SITE_DIM**2)
    i = e.slot[0]
    left = identity(i - 1) if i > 1 else np.eye(1, dtype=complex)
    right_sites = e.total_sites - i - 1
    right = identity(right_sites) if right_sites else np.eye(1, dtype=complex)
    return np.kron(np.kron(left, m), right)


def embed_pair(m, n_sites: int, first: int, second: int) -> np.ndarray:
    """Place a 9x9 operator on arbitrary distinct sites (0-based).

    ``first`` receives the left tensor leg of ``m``; sites need not be adjacent,
    which covers the wrapped bond of a periodic chain.
    """
    m = as_matrix(m, SITE_DIM**2)
    if first == second or not (0 <= first < n_sites and 0 <= second < n_sites):
        raise DimensionError(f"invalid legs ({first}, {second}) on {n_sites} sites")
    rest = [s for s in range(n_sites) if s not in (first, second)]
    order = [first, second] + rest
    full = np.kron(m, identity(n_sites - 2)) if rest else m
    tensor = full.reshape([SITE_DIM] * (2 * n_sites))
    axes = [order.index(s) for s in range(n_sites)]
    axes += [n_sites + a for a in axes]
    dim = SITE_DIM**n_sites
    return tensor.transpose(axes).reshape(dim, dim)


@lru_cache(maxsize=None)
def _permutation() -> np.ndarray:
    p = np.zeros((9, 9), dtype=complex)
    for a in range(SITE_DIM):
        for b in range(SITE_DIM):
            p[two_site_index(b, a), two_site_index(a, b)] = 1
    p.setflags(write=False)
    return p


def permutation_operator() -> np.ndarray:
    """P|ab> = |ba>."""
    return _permutation().copy()


@lru_cache(maxsize=None)
def basis_labels(n_sites: int) -> np.ndarray:
    """Site labels of every basis state, shape (3^n, n)."""
    idx = np.arange(SITE_DIM**n_sites)
    digits = np.empty((idx.size, n_sites), dtype=int)
    for k in range(n_sites):
        digits[:, n_sites - 1 - k] = (idx // SITE_DIM**k) % SITE_DIM
    digits.setflags(write=False)
    return digits


def spin_z(n_sites: int) -> np.ndarray:
    """Total Sz: each basis state's eigenvalue is the sum of its site labels."""
    if n_sites < 1:
        raise DimensionError("spin_z needs at least one site")
    return np.diag(basis_labels(n_sites).sum(axis=1).astype(complex))


def sector_indices(n_sites: int, m: int) -> list[int]:
    """Basis indices of the Sz = m eigenspace, in increasing order."""
    return [int(i) for i in np.flatnonzero(basis_labels(n_sites).sum(axis=1) == m)]


@lru_cache(maxsize=None)
def ice_mask() -> np.ndarray:
    """Positions of a 9x9 operator allowed by the ice rule (19 entries)."""
    sums = basis_labels(2).sum(axis=1)
    mask = sums[:, None] == sums[None, :]
    mask.setflags(write=False)
    return mask


def commutator(a, b) -> np.ndarray:
    return a @ b - b @ a


def eig_sym_sector(m, sector, tol: float = 1e-10) -> np.ndarray:
    """Eigenvalues of ``m`` restricted to a symmetry sector.

    ``sector`` is a list of basis indices or a 0/1 projector. The off-block
    coupling must stay below ``tol`` relative to the operator norm.
    """
    m = np.asarray(m, dtype=complex)
    if isinstance(sector, np.ndarray) and sector.ndim == 2:
        idx = np.flatnonzero(np.abs(np.diag(sector)) > 0.5)
    else:
        idx = np.asarray(list(sector), dtype=int)
    out = np.setdiff1d(np.arange(m.shape[0]), idx)
    if out.size and idx.size:
        leak = max(sup_norm(m[np.ix_(out, idx)]), sup_norm(m[np.ix_(idx, out)]))
        leak /= max(1.0, sup_norm(m))
        if leak > tol:
            raise SectorLeakageError(leak, tol)
    if idx.size == 0:
        return np.zeros(0, dtype=complex)
    block = m[np.ix_(idx, idx)]
    return scipy.linalg.eigvals(block)


def _check_condition(a: np.ndarray) -> None:
    cond = float(np.linalg.cond(a))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise SingularOperatorError(cond)


def solve_linear(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"solve_linear needs a square matrix, got {a.shape}")
    _check_condition(a)
    return scipy.linalg.solve(a, np.asarray(b, dtype=complex))


def inverse(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"inverse needs a square matrix, got {a.shape}")
    _check_condition(a)
    return scipy.linalg.inv(a)
