"""
Transmitter-side agreement on the effective noise subspace.

Noncooperative: the transmitter repeats the receiver's identification on
the TDD reverse link over its own singletons P_i^(T). Cooperative: the
receiver sends f = [K̂₀, φ̃_Rᵀ]ᵀ and the transmitter solves

    min ‖P_T γ − φ̃_R‖²   s.t.   ‖γ‖₁ ≤ K̂₀

by projected gradient, keeping the K̂₀ singletons with most ℓ1 mass.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BadDimensions, DimensionMismatch, InvalidSelection, NonConvergence, ZeroVector
from .identification import (
    DetectionThreshold, Frames, SingletonDictionary, SparseSelection, estimated_dim, identify_dimensions,
)
from .signaling import WaveformBook
from .subspace import SubspaceBasis, chordal_distance, projector_from_basis

logger = logging.getLogger(__name__)

K0_DTYPE = np.dtype("<u4")
PAYLOAD_DTYPE = np.dtype("<c16")
MASS_FLOOR = 1e-6


# ============================================
# TYPES
# ============================================

@dataclass(frozen=True, eq=False)
class FeedbackMessage:
    k0_hat: int
    phi_r: np.ndarray

    def __post_init__(self):
        phi = np.array(self.phi_r, dtype=complex, copy=True).reshape(-1)
        if not 0 <= self.k0_hat <= phi.size:
            raise InvalidSelection(f"K0_hat={self.k0_hat} outside 0..{phi.size}")
        phi.setflags(write=False)
        object.__setattr__(self, "phi_r", phi)
        object.__setattr__(self, "k0_hat", int(self.k0_hat))

    @property
    def N(self) -> int:
        return self.phi_r.size

    def to_bytes(self) -> bytes:
        """uint32 K̂₀ followed by N (re, im) float64 pairs, all little-endian."""
        return (
            np.array([self.k0_hat], dtype=K0_DTYPE).tobytes()
            + self.phi_r.astype(PAYLOAD_DTYPE).tobytes()
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "FeedbackMessage":
        head = K0_DTYPE.itemsize
        if len(data) < head or (len(data) - head) % PAYLOAD_DTYPE.itemsize:
            raise BadDimensions(f"malformed feedback message of {len(data)} bytes")
        k0 = int(np.frombuffer(data, dtype=K0_DTYPE, count=1)[0])
        phi = np.frombuffer(data, dtype=PAYLOAD_DTYPE, offset=head)
        return cls(k0_hat=k0, phi_r=phi.astype(complex))

    def __eq__(self, other):
        if not isinstance(other, FeedbackMessage):
            return NotImplemented
        return self.k0_hat == other.k0_hat and np.array_equal(self.phi_r, other.phi_r)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class TxSelection:
    """π over the transmitter's K̂_T sensed dims and the relaxed coefficients γ."""

    pi: np.ndarray
    gamma_vec: Optional[np.ndarray] = field(default=None, repr=False)
    statistics: Optional[np.ndarray] = field(default=None, repr=False)
    iterations: int = 0

    def __post_init__(self):
        pi = np.array(self.pi, dtype=bool, copy=True).reshape(-1)
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @property
    def K_hat(self) -> int:
        return self.pi.size

    @property
    def K0_hat(self) -> int:
        return int(self.pi.sum())

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.pi)


# ============================================
# NONCOOPERATIVE
# ============================================

def noncoop_concur(reverse_frames: Frames, noise_basis_T: SubspaceBasis, thr: DetectionThreshold,
                   reference_index: Optional[int] = None, reg: float = 1e-3,
                   book: Optional[WaveformBook] = None) -> TxSelection:
    """Receiver-side identification rerun by the transmitter on reverse-link frames."""
    sel = identify_dimensions(reverse_frames, noise_basis_T, thr,
                              reference_index=reference_index, reg=reg, book=book)
    return TxSelection(pi=sel.lam, gamma_vec=sel.beta, statistics=sel.statistics)


# ============================================
# COOPERATIVE
# ============================================

def build_feedback(sel: SparseSelection, phi_R: np.ndarray) -> FeedbackMessage:
    phi = np.asarray(phi_R, dtype=complex).reshape(-1)
    if phi.size != sel.N:
        raise DimensionMismatch(f"filter of length {phi.size} for N={sel.N}")
    return FeedbackMessage(k0_hat=estimated_dim(sel), phi_r=phi)


def l1_ball_projection(v: np.ndarray, radius: float) -> np.ndarray:
    """
    Euclidean projection of a complex vector onto {‖x‖₁ ≤ radius}.
    Magnitudes go through the sort-and-shift simplex projection; phases are kept.
    """
    if radius < 0:
        raise BadDimensions(f"radius must be >= 0, got {radius}")
    v = np.asarray(v)
    mag = np.abs(v)
    if mag.sum() <= radius:
        return v.copy()
    if radius == 0:
        return np.zeros_like(v)
    u = np.sort(mag.ravel())[::-1]
    css = np.cumsum(u) - radius
    ind = np.arange(1, u.size + 1)
    rho = ind[u - css / ind > 0][-1]
    theta = css[rho - 1] / rho
    shrunk = np.maximum(mag - theta, 0.0)
    return np.where(mag > 0, v * shrunk / np.where(mag > 0, mag, 1.0), 0.0)


def _top_blocks(gamma: np.ndarray, K: int, N: int, count: int) -> np.ndarray:
    mass = np.abs(gamma).reshape(K, N).sum(axis=1)
    pi = np.zeros(K, dtype=bool)
    if count == 0 or mass.max(initial=0.0) <= 0.0:
        return pi
    order = np.argsort(-mass, kind="stable")[:count]
    order = order[mass[order] > MASS_FLOOR * mass.max()]
    pi[order] = True
    return pi


def coop_concur(f: FeedbackMessage, dictionary_T: SingletonDictionary, iters: int = 5000,
                step: Optional[float] = None, tol: float = 1e-8) -> TxSelection:
    if f.N != dictionary_T.N:
        raise DimensionMismatch(f"feedback for N={f.N}, dictionary over N={dictionary_T.N}")
    K, N = dictionary_T.K, dictionary_T.N
    if f.k0_hat == 0 or K == 0 or not np.any(f.phi_r):
        return TxSelection(pi=np.zeros(K, dtype=bool), gamma_vec=np.zeros(K * N, dtype=complex))

    p = dictionary_T.matrix
    target = f.phi_r
    step = 0.9 / dictionary_T.lipschitz if step is None else step
    radius = float(f.k0_hat)

    def objective(g):
        return 0.5 * float(np.sum(np.abs(p @ g - target) ** 2))

    gamma = np.zeros(K * N, dtype=complex)
    prev = objective(gamma)
    for k in range(1, iters + 1):
        gamma = l1_ball_projection(gamma - step * (p.conj().T @ (p @ gamma - target)), radius)
        cur = objective(gamma)
        if abs(prev - cur) / max(1.0, abs(prev)) <= tol:
            break
        prev = cur
    else:
        raise NonConvergence(f"projected gradient still moving after {iters} iterations")

    pi = _top_blocks(gamma, K, N, f.k0_hat)
    logger.debug(f"coop concurrence: {int(pi.sum())}/{K} dims after {k} iterations")
    return TxSelection(pi=pi, gamma_vec=gamma, iterations=k)


# ============================================
# DIAGNOSTICS
# ============================================

def rip_check(dictionary: SingletonDictionary, gamma_vec: np.ndarray, eps: float = 0.5) -> tuple[bool, float]:
    """
    ‖Pγ‖₂/‖γ‖₂ for a singleton selection with at most one active column
    per singleton, and whether the lower isometry bound (1 − eps)‖γ‖₂ ≤ ‖Pγ‖₂ holds.
    """
    g = np.asarray(gamma_vec, dtype=complex).reshape(-1)
    if g.size != dictionary.K * dictionary.N:
        raise DimensionMismatch(f"selection of length {g.size} for a {dictionary.K}x{dictionary.N} dictionary")
    norm = np.linalg.norm(g)
    if norm == 0:
        raise ZeroVector("selection vector is zero")
    active = np.abs(g.reshape(dictionary.K, dictionary.N)) > 0
    if np.any(active.sum(axis=1) > 1):
        raise InvalidSelection("more than one active column in a singleton")
    ratio = float(np.linalg.norm(dictionary.matrix @ g) / norm)
    return ratio >= 1.0 - eps, ratio


def consensus_distance(sel_t: TxSelection, sel_r: SparseSelection, tx_basis: SubspaceBasis,
                       rx_basis: SubspaceBasis, normalize: bool = False) -> float:
    """Chordal distance between the subspaces both ends settled on."""
    if sel_t.K_hat != tx_basis.dim or sel_r.K_hat != rx_basis.dim:
        raise DimensionMismatch("selection length differs from its basis dimension")
    p_t = projector_from_basis(tx_basis.take(sel_t.selected))
    p_r = projector_from_basis(rx_basis.take(sel_r.selected))
    d = chordal_distance(p_t, p_r)
    if not normalize:
        return d
    scale = max(sel_t.K0_hat, sel_r.K0_hat)
    return d / scale if scale else 0.0
