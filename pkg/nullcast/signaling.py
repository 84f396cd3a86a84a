"""
Scenario-adapted shaping waveforms.

The waveform is the normalized column of the sensed noise-subspace
projector with the largest diagonal entry,

    φ̂ₙ = (eₙᴴ P̂_N eₙ)^{-1/2} P̂_N eₙ,

obtained either directly from the projector or through the total least
squares null space of the extended data matrix T = [0 ⋮ Ψ̂_Sᴴ]. Both routes
give the same vector.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .errors import BadFftSize, DegenerateColumn, DegeneratePolynomial, EmptyNullSpace, ZeroProjector
from .scenario import SensedEnvironment
from .subspace import OrthoProjector, SubspaceBasis, subspace_energy, svd_null_space
from .utils.rng import SeedLike, make_rng

logger = logging.getLogger(__name__)

TIE_TOL = 1e-9
DIAG_FLOOR = 1e-12
COEFF_FLOOR = 1e-12


# ============================================
# TYPES
# ============================================

@dataclass(frozen=True, eq=False)
class Waveform:
    samples: np.ndarray
    column_index: int
    unique: bool
    tie_set: tuple

    def __post_init__(self):
        s = np.array(self.samples, dtype=complex, copy=True)
        if abs(np.linalg.norm(s) - 1.0) > 1e-10:
            raise DegenerateColumn(f"waveform energy {np.linalg.norm(s) ** 2:.3g} is not unit")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "tie_set", tuple(int(i) for i in self.tie_set))

    @property
    def N(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class WaveformBook:
    """One entry per projector column; columns with a vanishing diagonal are None."""

    entries: tuple

    @property
    def N(self) -> int:
        return len(self.entries)

    @property
    def present(self) -> list[int]:
        return [i for i, w in enumerate(self.entries) if w is not None]

    @property
    def matrix(self) -> np.ndarray:
        """N×N matrix of book entries as columns; absent entries are zero."""
        m = np.zeros((self.N, self.N), dtype=complex)
        for i, w in enumerate(self.entries):
            if w is not None:
                m[:, i] = w.samples
        return m

    def __getitem__(self, i: int) -> Optional[Waveform]:
        return self.entries[i]


@dataclass(frozen=True)
class RobustnessSplit:
    """Energy of a unit waveform in the true noise space, in Ξ and in Ψ̃_S."""

    in_noise: float
    in_xi: float
    in_signal: float

    @property
    def minmax_objective(self) -> float:
        """‖[Ψ̃_S ⋮ Ξ]ᴴ φ‖², the worst-case leakage into occupied DoF."""
        return self.in_signal + self.in_xi


# ============================================
# COLUMN SELECTION
# ============================================

def _select_from_diagonal(diag: np.ndarray, tie_tol: float) -> tuple[int, tuple]:
    p_max = float(np.max(diag)) if diag.size else 0.0
    if p_max <= DIAG_FLOOR:
        raise ZeroProjector("projector has no energy on any column")
    ties = tuple(int(i) for i in np.flatnonzero(diag >= p_max - tie_tol))
    return ties[0], ties


def select_column(p: OrthoProjector, tie_tol: float = TIE_TOL) -> tuple[int, tuple]:
    """Index of the largest diagonal entry (lowest index on ties) and the tie set."""
    if p.rank == 0:
        raise ZeroProjector("rank-zero projector")
    index, ties = _select_from_diagonal(p.diagonal, tie_tol)
    logger.debug(f"selected column {index}, tie set size {len(ties)}")
    return index, ties


def pick_from_tie_set(tie_set: Sequence[int], seed: SeedLike) -> int:
    """Uniform pick among equally good columns, as an uncoordinated transmitter would."""
    ties = list(tie_set)
    if not ties:
        raise ZeroProjector("empty tie set")
    return int(ties[make_rng(seed).integers(len(ties))])


# ============================================
# WAVEFORM DESIGN
# ============================================

def design_waveform(p: OrthoProjector, n: int, tie_tol: float = TIE_TOL) -> Waveform:
    d = p.diagonal[n]
    if d <= DIAG_FLOOR:
        raise DegenerateColumn(f"diagonal entry {n} is {d:.3g}")
    _, ties = select_column(p, tie_tol)
    samples = p.matrix[:, n] / np.sqrt(d)
    return Waveform(samples=samples, column_index=int(n), unique=ties == (n,), tie_set=ties)


def design_tls(sensed_signal_basis: SubspaceBasis, tie_tol: float = TIE_TOL) -> Waveform:
    """
    Total least squares route.

    T = [0 ⋮ Ω̂_S] with Ω̂_S = Ψ̂_Sᴴ. Its null space V₂ always contains the
    leading coordinate, so V₂ restricted to the ambient rows (Ṽ₂) satisfies
    Ṽ₂Ṽ₂ᴴ = P̂_N. The predictor coordinate c is the row of Ṽ₂ at the
    coordinate with the largest diagonal; φ = Ṽ₂ c* / (cᴴc), renormalized.
    """
    b = sensed_signal_basis
    n = b.ambient_dim
    if b.dim >= n:
        raise EmptyNullSpace(f"sensed signal subspace fills C^{n}")
    t = np.hstack([np.zeros((b.dim, 1), dtype=complex), b.columns.conj().T])
    v2 = svd_null_space(t).columns
    v_tilde = v2[1:, :]
    diag = np.sum(np.abs(v_tilde) ** 2, axis=1)
    n_star, ties = _select_from_diagonal(diag, tie_tol)

    c = v_tilde[n_star, :]
    phi = v_tilde @ c.conj() / np.vdot(c, c).real
    phi = phi / np.linalg.norm(phi)
    return Waveform(samples=phi, column_index=n_star, unique=len(ties) == 1, tie_set=ties)


def waveform_book(p: OrthoProjector, tie_tol: float = TIE_TOL) -> WaveformBook:
    diag = p.diagonal
    _, ties = select_column(p, tie_tol)
    entries = []
    for n in range(p.ambient_dim):
        if diag[n] <= DIAG_FLOOR:
            entries.append(None)
            continue
        entries.append(
            Waveform(
                samples=p.matrix[:, n] / np.sqrt(diag[n]),
                column_index=n,
                unique=ties == (n,),
                tie_set=ties,
            )
        )
    return WaveformBook(entries=tuple(entries))


# ============================================
# DIAGNOSTICS
# ============================================

def _samples(w: Union[Waveform, np.ndarray]) -> np.ndarray:
    return w.samples if isinstance(w, Waveform) else np.asarray(w, dtype=complex)


def psd(w: Union[Waveform, np.ndarray], n_fft: int) -> np.ndarray:
    """Power per DFT bin in dB, normalized to a 0 dB peak."""
    x = _samples(w)
    if n_fft < x.shape[0]:
        raise BadFftSize(f"n_fft={n_fft} < N={x.shape[0]}")
    power = np.abs(np.fft.fft(x, n_fft)) ** 2
    peak = power.max()
    if peak <= 0:
        raise DegeneratePolynomial("zero waveform has no spectrum")
    return 10.0 * np.log10(np.maximum(power / peak, 1e-30))


def zeros(w: Union[Waveform, np.ndarray]) -> np.ndarray:
    """Finite zeros of Φ(z) = Σ φ[m] z^{-m} (companion-matrix eigenvalues)."""
    x = _samples(w)
    nz = np.flatnonzero(np.abs(x) > COEFF_FLOOR)
    if nz.size == 0:
        raise DegeneratePolynomial("all coefficients vanish")
    coeffs = x[nz[0]: nz[-1] + 1]
    if coeffs.size == 1:
        return np.zeros(0, dtype=complex)
    return np.roots(coeffs)


def robustness_split(w: Waveform, env: SensedEnvironment) -> RobustnessSplit:
    x = w.samples
    return RobustnessSplit(
        in_noise=float(subspace_energy(x, env.true_noise)),
        in_xi=float(subspace_energy(x, env.xi)),
        in_signal=float(subspace_energy(x, env.signal_tilde)),
    )
