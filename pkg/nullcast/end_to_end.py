"""
Transmitter/receiver pair: effective noise subspace N₀ = N̂_T ∩ N̂_R,
matched-filter mismatch loss, SNR degradation Γ_unc, the per-DoF
received-signal model and waveform-book detection by spectral coherence.
"""

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Union

import numpy as np
import scipy.linalg as la

from .errors import BadDimensions, ColumnUndefined, Infeasible, SingularCovariance
from .scenario import basis_family
from .schemas import BasisKind, ChannelParams
from .signaling import Waveform, WaveformBook, design_waveform, select_column
from .subspace import OrthoProjector, SubspaceBasis, projector_from_basis, subspace_energy
from .utils.rng import SeedLike, complex_normal, make_rng

logger = logging.getLogger(__name__)

EFFECTIVE = "effective"
INTERFERED = "interfered"
CLEAN = "clean"


# ============================================
# GEOMETRY
# ============================================

@dataclass(frozen=True, eq=False)
class MismatchGeometry:
    N: int
    K0: int
    kappa_t: int
    kappa_r: int
    eps_r: int
    shared: SubspaceBasis
    delta_t: SubspaceBasis
    delta_r: SubspaceBasis
    kind: BasisKind = BasisKind.FOURIER

    @property
    def rho_t(self) -> float:
        return self.kappa_t / self.K0

    @property
    def rho_r(self) -> float:
        return self.kappa_r / self.K0

    @property
    def k_hat_t(self) -> int:
        return self.K0 + self.kappa_t

    @property
    def k_hat_r(self) -> int:
        return self.K0 + self.kappa_r

    @cached_property
    def tx_basis(self) -> SubspaceBasis:
        return self.shared.concat(self.delta_t)

    @cached_property
    def rx_basis(self) -> SubspaceBasis:
        return self.shared.concat(self.delta_r)

    @cached_property
    def tx_projector(self) -> OrthoProjector:
        return projector_from_basis(self.tx_basis)

    @cached_property
    def rx_projector(self) -> OrthoProjector:
        return projector_from_basis(self.rx_basis)

    @property
    def interfered(self) -> SubspaceBasis:
        return self.delta_r.take(range(self.eps_r))

    @property
    def rx_labels(self) -> tuple:
        return (
            (EFFECTIVE,) * self.K0
            + (INTERFERED,) * self.eps_r
            + (CLEAN,) * (self.kappa_r - self.eps_r)
        )

    def reversed(self) -> "MismatchGeometry":
        """TDD reverse link: the receiver transmits and the transmitter listens."""
        return MismatchGeometry(
            N=self.N,
            K0=self.K0,
            kappa_t=self.kappa_r,
            kappa_r=self.kappa_t,
            eps_r=min(self.eps_r, self.kappa_t),
            shared=self.shared,
            delta_t=self.delta_r,
            delta_r=self.delta_t,
            kind=self.kind,
        )


def build_pairwise(N: int, K0: int, kappaT: int, kappaR: int, epsR: int,
                   kind: BasisKind, seed: SeedLike) -> MismatchGeometry:
    if K0 < 1 or min(kappaT, kappaR, epsR) < 0:
        raise Infeasible("K0 must be >= 1 and excess counts nonnegative")
    if K0 + kappaT + kappaR > N:
        raise Infeasible(f"K0+kappaT+kappaR={K0 + kappaT + kappaR} exceeds N={N}")
    if epsR > kappaR:
        raise Infeasible(f"epsR={epsR} exceeds kappaR={kappaR}")
    rng = make_rng(seed)
    family = basis_family(N, kind, rng)
    perm = rng.permutation(N)
    shared = perm[:K0]
    dt = perm[K0:K0 + kappaT]
    dr = perm[K0 + kappaT:K0 + kappaT + kappaR]
    return MismatchGeometry(
        N=N,
        K0=K0,
        kappa_t=kappaT,
        kappa_r=kappaR,
        eps_r=epsR,
        shared=SubspaceBasis(family[:, shared]),
        delta_t=SubspaceBasis(family[:, dt]),
        delta_r=SubspaceBasis(family[:, dr]),
        kind=BasisKind(kind),
    )


def restrict_receiver(geom: MismatchGeometry, lam: np.ndarray) -> MismatchGeometry:
    """
    Geometry seen after the receiver keeps only the dims flagged in `lam`
    (ordered as geom.rx_basis). Excess dims that survive stay as Δ_R.
    """
    lam = np.asarray(lam, dtype=bool)
    excess = np.flatnonzero(lam[geom.K0:])
    interfered = int(np.sum(excess < geom.eps_r))
    # interfered dims first, as in build_pairwise
    order = np.concatenate([excess[excess < geom.eps_r], excess[excess >= geom.eps_r]])
    return replace(
        geom,
        kappa_r=int(excess.size),
        eps_r=interfered,
        delta_r=geom.delta_r.take(order),
    )


# ============================================
# CLOSED FORMS
# ============================================

def mismatch_loss(rhoT: float, rhoR: float) -> float:
    """(1 + ρ_T + ρ_R + ρ_Tρ_R)^{-1/2}."""
    if rhoT < 0 or rhoR < 0:
        raise Infeasible("excess ratios must be nonnegative")
    return float((1.0 + rhoT + rhoR + rhoT * rhoR) ** -0.5)


def matched_filter_gain(geom: MismatchGeometry) -> float:
    """φ̂_Rᴴ φ̂_T with both ends designing on the same column index."""
    n, _ = select_column(geom.tx_projector)
    if geom.rx_projector.diagonal[n] <= 1e-12:
        raise ColumnUndefined(f"receiver projector vanishes at column {n}")
    phi_t = design_waveform(geom.tx_projector, n)
    phi_r = design_waveform(geom.rx_projector, n)
    return float(np.real(np.vdot(phi_r.samples, phi_t.samples)))


def snr_with_uncertainty(p: ChannelParams, geom: MismatchGeometry) -> tuple[float, float]:
    """Returns (SNR_R, Γ_unc) with SNR_R = γ_no-unc / Γ_unc."""
    gamma_no_unc = p.gain ** 2 * p.tx_power / (geom.K0 * p.noise_density)
    inv_gamma = (1.0 - geom.rho_t / (1.0 + geom.rho_t)) / (
        (1.0 + geom.rho_r) + p.inr_bar * geom.eps_r / geom.K0
    )
    return gamma_no_unc * inv_gamma, 1.0 / inv_gamma


# ============================================
# RECEIVED SIGNAL MODEL
# ============================================

@dataclass(frozen=True, eq=False)
class DofObservation:
    """
    Q received frames.

    samples: (Q, N) ambient observations y_q; clean: their noiseless part;
    dof_samples: (Q, K̂_R) projections Y_ν = b_νᴴ y_q onto the receiver's
    sensed noise basis; labels: ground-truth class of each receiver dim.
    """

    samples: np.ndarray
    clean: np.ndarray
    dof_samples: np.ndarray
    labels: tuple

    @property
    def Q(self) -> int:
        return self.samples.shape[0]

    @property
    def N(self) -> int:
        return self.samples.shape[1]

    def label_counts(self) -> tuple[int, int, int]:
        return (
            self.labels.count(EFFECTIVE),
            self.labels.count(INTERFERED),
            self.labels.count(CLEAN),
        )


def simulate_received(geom: MismatchGeometry, p: ChannelParams, Q: int,
                      tx_waveform: Union[Waveform, np.ndarray], seed: SeedLike) -> DofObservation:
    """
    y_q = G·√Ep·φ_T·a + w_q + i_q with unit pilots a = 1, w_q ~ CN(0, N0·I)
    and i_q ~ CN(0, inr̄·N0) along each interfered excess dim of the receiver.
    """
    if Q < 1:
        raise BadDimensions(f"Q must be >= 1, got {Q}")
    rng = make_rng(seed)
    phi = tx_waveform.samples if isinstance(tx_waveform, Waveform) else np.asarray(tx_waveform, dtype=complex)
    amplitude = p.gain * np.sqrt(p.pulse_energy)
    clean = np.broadcast_to(amplitude * phi, (Q, geom.N)).copy()

    noise = complex_normal(rng, (Q, geom.N), p.noise_density)
    # drawn even at zero INR so runs at different INR share noise realizations
    coeffs = complex_normal(rng, (Q, geom.eps_r), p.inr_bar * p.noise_density)
    interference = coeffs @ geom.interfered.columns.T

    samples = clean + noise + interference
    dof = samples @ geom.rx_basis.columns.conj()
    return DofObservation(samples=samples, clean=clean, dof_samples=dof, labels=geom.rx_labels)


def measure_snr(frames: DofObservation, basis: SubspaceBasis) -> float:
    """Deterministic signal energy over empirical disturbance energy inside span(basis)."""
    signal = np.mean(subspace_energy(frames.clean, basis))
    disturbance = np.mean(subspace_energy(frames.samples - frames.clean, basis))
    return float(signal / disturbance)


def filter_disturbance(frames: DofObservation, receive_filter: Union[Waveform, np.ndarray]) -> float:
    """Empirical noise-plus-interference variance at the output of a unit-norm receive filter."""
    h = receive_filter.samples if isinstance(receive_filter, Waveform) else np.asarray(receive_filter)
    out = (frames.samples - frames.clean) @ h.conj()
    return float(np.mean(np.abs(out) ** 2))


# ============================================
# WAVEFORM-BOOK DETECTION
# ============================================

def coherence_scores(frames: Union[DofObservation, np.ndarray], book: WaveformBook,
                     reg: float = 1e-3) -> np.ndarray:
    """p̂(ι)ᴴ R̂⁻¹ p̂(ι) for every book entry; absent entries score -inf."""
    y = frames.samples if isinstance(frames, DofObservation) else np.atleast_2d(frames)
    if y.shape[0] < 1:
        raise BadDimensions("need at least one frame")
    q, n = y.shape
    r = y.T @ y.conj() / q
    if reg > 0:
        loaded = r + reg * np.trace(r).real / n * np.eye(n)
    else:
        if np.linalg.matrix_rank(r) < n:
            raise SingularCovariance(f"sample covariance rank {np.linalg.matrix_rank(r)} < {n}")
        loaded = r
    w = book.matrix
    p_hat = r @ w
    try:
        x = la.solve(loaded, p_hat, assume_a="her")
    except (la.LinAlgError, ValueError) as exc:
        raise SingularCovariance(str(exc))
    scores = np.real(np.sum(p_hat.conj() * x, axis=0))
    absent = np.ones(n, dtype=bool)
    absent[book.present] = False
    scores[absent] = -np.inf
    return scores


def detect_waveform(frames: Union[DofObservation, np.ndarray], book: WaveformBook, reg: float = 1e-3) -> int:
    """Book entry with the highest spectral coherence with the received frames."""
    scores = coherence_scores(frames, book, reg)
    index = int(np.argmax(scores))
    logger.debug(f"detected book entry {index}")
    return index
