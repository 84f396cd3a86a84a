"""
Subspace algebra: orthonormal bases, orthogonal projectors, SVD null
spaces, unitary rotations and the chordal distance between subspaces.

All objects are immutable; every function is pure.
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    DimensionMismatch,
    EmptyNullSpace,
    NotOrthonormal,
    NotUnitary,
    RankDeficient,
)
from .utils.rng import SeedLike, complex_normal, make_rng

logger = logging.getLogger(__name__)

RANK_TOL = 1e-10
ORTHO_TOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


# ============================================
# TYPES
# ============================================

@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """N×k matrix with orthonormal columns."""

    columns: np.ndarray

    def __post_init__(self):
        cols = np.asarray(self.columns)
        if cols.ndim != 2:
            raise DimensionMismatch(f"basis must be 2-D, got shape {cols.shape}")
        if cols.shape[1] > cols.shape[0]:
            raise DimensionMismatch(f"basis has {cols.shape[1]} columns in C^{cols.shape[0]}")
        if not np.all(np.isfinite(cols)):
            raise NotOrthonormal("basis has non-finite entries")
        gram = cols.conj().T @ cols
        if np.linalg.norm(gram - np.eye(cols.shape[1])) > ORTHO_TOL * max(1, cols.shape[1]):
            raise NotOrthonormal("columns are not orthonormal")
        object.__setattr__(self, "columns", _frozen(cols))

    @property
    def ambient_dim(self) -> int:
        return self.columns.shape[0]

    @property
    def dim(self) -> int:
        return self.columns.shape[1]

    def take(self, indices) -> "SubspaceBasis":
        """Sub-basis made of the given columns, in the given order."""
        idx = np.asarray(list(indices), dtype=int)
        return SubspaceBasis(self.columns[:, idx].reshape(self.ambient_dim, idx.size))

    def concat(self, other: "SubspaceBasis") -> "SubspaceBasis":
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatch(f"C^{self.ambient_dim} vs C^{other.ambient_dim}")
        return SubspaceBasis(np.hstack([self.columns, other.columns]))

    @classmethod
    def empty(cls, n: int) -> "SubspaceBasis":
        return cls(np.zeros((n, 0), dtype=complex))


@dataclass(frozen=True, eq=False)
class OrthoProjector:
    """Hermitian idempotent N×N matrix."""

    matrix: np.ndarray
    rank: int

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"projector must be square, got {m.shape}")
        if np.linalg.norm(m - m.conj().T) > 1e-10:
            raise NotOrthonormal("projector is not Hermitian")
        if np.linalg.norm(m @ m - m) > 1e-10:
            raise NotOrthonormal("projector is not idempotent")
        if abs(np.trace(m).real - self.rank) > 1e-8:
            raise NotOrthonormal(f"trace {np.trace(m).real:.6g} differs from rank {self.rank}")
        object.__setattr__(self, "matrix", _frozen(m))

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal().real

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


# ============================================
# OPERATIONS
# ============================================

def orthonormalize(m: np.ndarray) -> SubspaceBasis:
    """
    Orthonormal basis of the column space of `m`.

    Uses a thin QR factorization; columns that are already orthonormal
    come back unchanged.
    """
    m = np.atleast_2d(np.asarray(m, dtype=complex))
    if m.shape[1] == 0:
        return SubspaceBasis.empty(m.shape[0])
    if m.shape[1] > m.shape[0]:
        raise RankDeficient(f"{m.shape[1]} columns cannot be independent in C^{m.shape[0]}")
    s = la.svd(m, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise RankDeficient(f"smallest singular value {s[-1]:.3g} vs largest {s[0]:.3g}")
    q, r = la.qr(m, mode="economic")
    d = np.diagonal(r)
    return SubspaceBasis(q * (d / np.abs(d)))


def projector_from_basis(b: SubspaceBasis) -> OrthoProjector:
    cols = b.columns
    return OrthoProjector(cols @ cols.conj().T, rank=b.dim)


def svd_null_space(t: np.ndarray, rank_tol: float = RANK_TOL) -> SubspaceBasis:
    """
    Right singular vectors of `t` whose singular values are at most
    rank_tol * sigma_max (a zero matrix has every direction in its kernel).
    """
    t = np.atleast_2d(np.asarray(t, dtype=complex))
    n_cols = t.shape[1]
    if n_cols == 0:
        raise DimensionMismatch("matrix has no columns")
    if t.shape[0] == 0:
        return SubspaceBasis(np.eye(n_cols, dtype=complex))
    _, s, vh = la.svd(t, full_matrices=True)
    sigma_max = s[0] if s.size else 0.0
    padded = np.zeros(n_cols)
    padded[: s.size] = s
    null_mask = padded <= rank_tol * sigma_max
    if not np.any(null_mask):
        raise EmptyNullSpace(f"all {n_cols} singular values exceed {rank_tol:g}·σ_max")
    v2 = vh.conj().T[:, null_mask]
    logger.debug(f"null space of {t.shape} matrix has dimension {v2.shape[1]}")
    return SubspaceBasis(v2)


def rotate_basis(b: SubspaceBasis, u: np.ndarray) -> SubspaceBasis:
    u = np.atleast_2d(np.asarray(u, dtype=complex))
    if u.shape != (b.dim, b.dim):
        raise DimensionMismatch(f"rotation must be {b.dim}x{b.dim}, got {u.shape}")
    if np.linalg.norm(u.conj().T @ u - np.eye(b.dim)) > ORTHO_TOL:
        raise NotUnitary("rotation is not unitary")
    return SubspaceBasis(b.columns @ u)


def random_unitary(dim: int, seed: SeedLike) -> np.ndarray:
    """Haar-distributed unitary from the QR of a complex Gaussian matrix."""
    if dim < 1:
        raise DimensionMismatch("dim must be >= 1")
    rng = make_rng(seed)
    z = complex_normal(rng, (dim, dim))
    q, r = la.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def chordal_distance(p1: OrthoProjector, p2: OrthoProjector) -> float:
    """Squared chordal distance ½‖P₁ − P₂‖²_F."""
    if p1.ambient_dim != p2.ambient_dim:
        raise DimensionMismatch(f"C^{p1.ambient_dim} vs C^{p2.ambient_dim}")
    return 0.5 * float(np.linalg.norm(p1.matrix - p2.matrix, "fro") ** 2)


def subspace_energy(vectors: np.ndarray, basis: SubspaceBasis) -> np.ndarray:
    """Energy ‖Bᴴv‖² of a vector, or of each row of a (Q, N) frame array."""
    v = np.asarray(vectors)
    coords = v @ basis.columns.conj()
    return np.sum(np.abs(coords) ** 2, axis=-1)
