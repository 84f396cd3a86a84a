"""
Receiver-side estimation of the effective noise subspace.

Each sensed noise dimension n is modelled as a rank-one singleton
P_n = b_n b_nᴴ; the receiver looks for the selection β = λ⊗α such that
y_q ≈ Pβ with P = [P_1 ⋮ … ⋮ P_K]. Two estimators are provided:
per-dimension Neyman-Pearson thresholding of a coherent statistic, and an
ℓ1-relaxed sparse fit solved by proximal soft-thresholding.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Union

import numpy as np
import scipy.linalg as la
from scipy import stats

from .end_to_end import DofObservation, detect_waveform
from .errors import BadDimensions, BadProbability, BlockLengthMismatch, InvalidSelection, NonConvergence
from .signaling import WaveformBook, waveform_book
from .subspace import SubspaceBasis, projector_from_basis

logger = logging.getLogger(__name__)

Frames = Union[DofObservation, np.ndarray]


def _frames(frames: Frames) -> np.ndarray:
    y = frames.samples if isinstance(frames, DofObservation) else np.asarray(frames, dtype=complex)
    return np.atleast_2d(y)


# ============================================
# TYPES
# ============================================

@dataclass(frozen=True, eq=False)
class SparseSelection:
    """λ over the K sensed dims, α as a single column index (or None)."""

    lam: np.ndarray
    alpha: Optional[int]
    N: int
    statistics: Optional[np.ndarray] = field(default=None, repr=False)
    reference_index: Optional[int] = None

    def __post_init__(self):
        lam = np.array(self.lam, dtype=bool, copy=True).reshape(-1)
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        if self.alpha is not None and not 0 <= self.alpha < self.N:
            raise InvalidSelection(f"alpha={self.alpha} outside 0..{self.N - 1}")

    @property
    def K_hat(self) -> int:
        return self.lam.size

    @property
    def K0_hat(self) -> int:
        return int(self.lam.sum())

    @property
    def alpha_vector(self) -> np.ndarray:
        a = np.zeros(self.N)
        if self.alpha is not None:
            a[self.alpha] = 1.0
        return a

    @property
    def beta(self) -> np.ndarray:
        return np.kron(self.lam.astype(float), self.alpha_vector)

    @property
    def matrix_form(self) -> np.ndarray:
        """B with B[i, j] = β[i·N + j]."""
        return self.beta.reshape(self.K_hat, self.N)

    @property
    def selected(self) -> np.ndarray:
        return np.flatnonzero(self.lam)


@dataclass(frozen=True)
class DetectionThreshold:
    gamma: float
    sigma2: float
    Q: int
    p_fa: float


@dataclass(frozen=True, eq=False)
class SingletonDictionary:
    """
    Concatenated rank-one projectors P = [P_1 ⋮ … ⋮ P_K] (N × K·N).
    Column i·N + j is P_i e_j.
    """

    basis: SubspaceBasis

    @property
    def K(self) -> int:
        return self.basis.dim

    @property
    def N(self) -> int:
        return self.basis.ambient_dim

    @cached_property
    def matrix(self) -> np.ndarray:
        u = self.basis.columns
        return np.einsum("mi,ji->mij", u, u.conj()).reshape(self.N, self.K * self.N)

    @cached_property
    def lipschitz(self) -> float:
        """Largest squared singular value of P."""
        if self.K == 0:
            return 0.0
        return float(la.norm(self.matrix, 2) ** 2)


@dataclass(frozen=True, eq=False)
class BasisPursuitResult:
    beta: np.ndarray
    support: np.ndarray
    selection: SparseSelection
    mu: float
    objective: tuple
    iterations: int


# ============================================
# NEYMAN-PEARSON THRESHOLDING
# ============================================

def np_threshold(sigma2: float, Q: int, P_FA: float) -> DetectionThreshold:
    """γ = √(σ²/Q)·Qtail⁻¹(P_FA)."""
    if not 0.0 < P_FA < 1.0:
        raise BadProbability(f"P_FA={P_FA} not in (0, 1)")
    if Q < 1 or sigma2 <= 0:
        raise BadDimensions(f"need Q >= 1 and sigma2 > 0, got Q={Q}, sigma2={sigma2}")
    gamma = float(np.sqrt(sigma2 / Q) * stats.norm.isf(P_FA))
    return DetectionThreshold(gamma=gamma, sigma2=float(sigma2), Q=int(Q), p_fa=float(P_FA))


def dimension_statistics(frames: Frames, basis: SubspaceBasis, reference_index: int) -> np.ndarray:
    """
    t_n = (1/Q) Σ_q Re{b_nᴴ y_q · e^{-jθ_n}} with θ_n = arg(b_nᴴ e_ι).

    Under noise only, each t_n is N(0, N0/(2Q)).
    """
    y = _frames(frames)
    coords = y @ basis.columns.conj()
    theta = np.angle(basis.columns[reference_index, :].conj())
    return np.mean(np.real(coords * np.exp(-1j * theta)), axis=0)


def post_selection_column(frames: Frames, basis: SubspaceBasis, lam: np.ndarray) -> Optional[int]:
    """Column of the modified projector P̃ = Σ λ_n P_n capturing the most frame energy."""
    lam = np.asarray(lam, dtype=bool)
    if not lam.any():
        return None
    y = _frames(frames)
    bs = basis.columns[:, lam]
    p_mod = bs @ bs.conj().T
    diag = p_mod.diagonal().real
    valid = np.flatnonzero(diag > 1e-12)
    w = p_mod[:, valid] / np.sqrt(diag[valid])
    energy = np.sum(np.abs(y @ w.conj()) ** 2, axis=0)
    return int(valid[np.argmax(energy)])


def identify_dimensions(frames: Frames, noise_basis_R: SubspaceBasis, thr: DetectionThreshold,
                        reference_index: Optional[int] = None, reg: float = 1e-3,
                        book: Optional[WaveformBook] = None) -> SparseSelection:
    """
    Flag every sensed noise dimension whose coherent statistic exceeds γ.

    Without a known reference, the phase reference is the waveform-book
    entry of highest spectral coherence with the frames.
    """
    y = _frames(frames)
    if y.shape[0] != thr.Q:
        raise BlockLengthMismatch(f"{y.shape[0]} frames for a block length of {thr.Q}")
    if reference_index is None:
        book = book or waveform_book(projector_from_basis(noise_basis_R))
        reference_index = detect_waveform(y, book, reg)
    t = dimension_statistics(y, noise_basis_R, reference_index)
    lam = t > thr.gamma
    alpha = post_selection_column(y, noise_basis_R, lam)
    logger.debug(f"identified {int(lam.sum())}/{lam.size} dims, alpha={alpha}")
    return SparseSelection(lam=lam, alpha=alpha, N=noise_basis_R.ambient_dim,
                           statistics=t, reference_index=int(reference_index))


def estimated_dim(sel: SparseSelection) -> int:
    return sel.K0_hat


def composite_filter(basis: SubspaceBasis, sel: SparseSelection) -> np.ndarray:
    """φ̃ = Pβ = P̃ e_α, the filter a node uses after identification."""
    n = basis.ambient_dim
    if sel.alpha is None or sel.K0_hat == 0:
        return np.zeros(n, dtype=complex)
    bs = basis.columns[:, sel.lam]
    return bs @ bs[sel.alpha, :].conj()


# ============================================
# SPARSE RECOVERY
# ============================================

def soft_threshold(z: np.ndarray, tau: float) -> np.ndarray:
    """Complex soft-thresholding: shrink magnitudes by tau, keep phases."""
    mag = np.abs(z)
    scale = np.maximum(0.0, 1.0 - tau / np.where(mag > 0, mag, 1.0))
    return np.where(mag > tau, z * scale, 0.0)


def selection_from_support(support: np.ndarray, beta: np.ndarray, K: int, N: int) -> SparseSelection:
    support = np.asarray(support, dtype=bool).reshape(K, N)
    lam = support.any(axis=1)
    if not lam.any():
        return SparseSelection(lam=lam, alpha=None, N=N)
    mass = np.where(support, np.abs(np.asarray(beta)).reshape(K, N), 0.0).sum(axis=0)
    return SparseSelection(lam=lam, alpha=int(np.argmax(mass)), N=N)


def _relative_change(prev: float, cur: float) -> float:
    return abs(prev - cur) / max(1.0, abs(prev))


def _ista(grad, data_term, beta0, step, mu, iters, tol):
    beta = beta0
    history = [data_term(beta) + mu * np.sum(np.abs(beta))]
    for k in range(1, iters + 1):
        beta = soft_threshold(beta - step * grad(beta), step * mu)
        history.append(data_term(beta) + mu * np.sum(np.abs(beta)))
        if _relative_change(history[-2], history[-1]) <= tol:
            return beta, history, k
    raise NonConvergence(
        f"objective still changing by {_relative_change(history[-2], history[-1]):.3g} after {iters} iterations"
    )


def basis_pursuit(frames: Frames, dictionary: SingletonDictionary, eps: float = 0.0,
                  iters: int = 2000, step: Optional[float] = None, mu: Optional[float] = None,
                  stacked: bool = False, tol: float = 1e-8) -> BasisPursuitResult:
    """
    ℓ1 fit of the frames by the singleton dictionary,

        min ½ Σ_q ‖y_q − Pβ‖² + μ‖β‖₁,

    either on the cumulative form (default) or on the stacked system
    [y_1; …; y_Q] ≈ [P; …; P] β. When μ is not given it is lowered from
    ‖Pᴴ Σ y_q‖_∞ until the residual meets Σ_q ‖y_q − Pβ‖² ≤ eps².
    """
    if eps < 0:
        raise BadDimensions("eps must be >= 0")
    y = _frames(frames)
    q = y.shape[0]
    p = dictionary.matrix
    n_coef = p.shape[1]
    step = 0.9 / (q * dictionary.lipschitz) if step is None else step

    if stacked:
        a = np.vstack([p] * q)
        b = y.reshape(-1)

        def grad(beta):
            return a.conj().T @ (a @ beta - b)

        def data_term(beta):
            return 0.5 * float(np.sum(np.abs(b - a @ beta) ** 2))
    else:
        s = y.sum(axis=0)
        ph_s = p.conj().T @ s

        def grad(beta):
            return q * (p.conj().T @ (p @ beta)) - ph_s

        def data_term(beta):
            return 0.5 * float(np.sum(np.abs(y - p @ beta) ** 2))

    beta = np.zeros(n_coef, dtype=complex)
    mu_max = float(np.max(np.abs(p.conj().T @ y.sum(axis=0)))) if n_coef else 0.0
    if mu is not None:
        beta, history, k = _ista(grad, data_term, beta, step, mu, iters, tol)
    elif mu_max == 0.0:
        mu, history, k = 0.0, [data_term(beta)], 0
    else:
        mu = 0.5 * mu_max
        while True:
            beta, history, k = _ista(grad, data_term, beta, step, mu, iters, tol)
            if 2.0 * data_term(beta) <= eps ** 2 or mu < 1e-6 * mu_max:
                break
            mu *= 0.1

    mags = np.abs(beta)
    peak = mags.max() if mags.size else 0.0
    support = mags >= 0.5 * peak if peak > 1e-12 else np.zeros(n_coef, dtype=bool)
    selection = selection_from_support(support, beta, dictionary.K, dictionary.N)
    logger.debug(f"basis pursuit: mu={mu:.3g}, {k} iterations, {int(support.sum())} active coefficients")
    return BasisPursuitResult(beta=beta, support=support, selection=selection,
                              mu=float(mu), objective=tuple(history), iterations=k)
