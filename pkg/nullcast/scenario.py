"""
Ground-truth signal/noise partitions of C^N and the sensed bases a node
infers from them under the local sensing-uncertainty model.

    Ψ̂_S = [Ψ̃_S ⋮ Υ]      Ψ̂_N = [Ψ̃_N ⋮ Ξ]
    D̂ = D − ε − δ + (K − K̃)      K̂ = K̃ + ε + δ
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import BadDimensions, SpecInfeasible
from .schemas import BasisKind, UncertaintySpec
from .subspace import SubspaceBasis, orthonormalize
from .utils.rng import SeedLike, complex_normal, make_rng

logger = logging.getLogger(__name__)


def fourier_matrix(n: int) -> np.ndarray:
    """Unit-norm DFT columns f_k[m] = exp(j2πkm/N)/√N."""
    m = np.arange(n)
    return np.exp(2j * np.pi * np.outer(m, m) / n) / np.sqrt(n)


def basis_family(n: int, kind: BasisKind, rng: np.random.Generator) -> np.ndarray:
    """Full N×N unitary whose columns are the candidate DoF."""
    kind = BasisKind(kind)
    if kind == BasisKind.FOURIER:
        return fourier_matrix(n)
    if kind == BasisKind.CANONICAL:
        return np.eye(n, dtype=complex)
    return orthonormalize(complex_normal(rng, (n, n))).columns


class GroundTruth(NamedTuple):
    signal: SubspaceBasis
    noise: SubspaceBasis
    kind: BasisKind
    occupied: tuple = ()


@dataclass(frozen=True, eq=False)
class SensedEnvironment:
    N: int
    true_signal: SubspaceBasis
    true_noise: SubspaceBasis
    sensed_signal: SubspaceBasis
    sensed_noise: SubspaceBasis
    xi: SubspaceBasis
    upsilon: SubspaceBasis
    spec: UncertaintySpec
    basis_kind: BasisKind

    @property
    def D(self) -> int:
        return self.true_signal.dim

    @property
    def K(self) -> int:
        return self.true_noise.dim

    @property
    def K_tilde(self) -> int:
        return self.K - self.spec.false_alarms

    @property
    def D_hat(self) -> int:
        return self.sensed_signal.dim

    @property
    def K_hat(self) -> int:
        return self.sensed_noise.dim

    @property
    def signal_tilde(self) -> SubspaceBasis:
        """Occupied DoF correctly sensed as occupied (Ψ̃_S)."""
        return self.sensed_signal.take(range(self.D - self.spec.xi))


def generate_environment(N: int, D: int, kind: BasisKind, seed: SeedLike) -> GroundTruth:
    if N < 1 or not 0 <= D <= N:
        raise BadDimensions(f"need 0 <= D <= N and N >= 1, got N={N}, D={D}")
    rng = make_rng(seed)
    family = basis_family(N, kind, rng)
    occupied = np.sort(rng.choice(N, size=D, replace=False))
    available = np.setdiff1d(np.arange(N), occupied)
    logger.debug(f"environment N={N} D={D} kind={BasisKind(kind).value} occupied={occupied.tolist()}")
    return GroundTruth(
        signal=SubspaceBasis(family[:, occupied]),
        noise=SubspaceBasis(family[:, available]),
        kind=BasisKind(kind),
        occupied=tuple(int(i) for i in occupied),
    )


def apply_sensing_uncertainty(truth: GroundTruth, spec: UncertaintySpec, seed: SeedLike) -> SensedEnvironment:
    """
    Move ε+δ occupied columns into the sensed noise basis (Ξ) and
    `false_alarms` available columns into the sensed signal basis (Υ).
    Columns are relabelled, never perturbed.
    """
    signal, noise = truth.signal, truth.noise
    if spec.xi > signal.dim or spec.false_alarms > noise.dim:
        raise SpecInfeasible(
            f"eps+delta={spec.xi} (D={signal.dim}), false_alarms={spec.false_alarms} (K={noise.dim})"
        )
    rng = make_rng(seed)
    xi_idx = rng.choice(signal.dim, size=spec.xi, replace=False)
    ups_idx = rng.choice(noise.dim, size=spec.false_alarms, replace=False)
    keep_s = np.setdiff1d(np.arange(signal.dim), xi_idx)
    keep_n = np.setdiff1d(np.arange(noise.dim), ups_idx)

    xi = signal.take(xi_idx)
    upsilon = noise.take(ups_idx)
    sensed_signal = signal.take(keep_s).concat(upsilon)
    sensed_noise = noise.take(keep_n).concat(xi)

    env = SensedEnvironment(
        N=signal.ambient_dim,
        true_signal=signal,
        true_noise=noise,
        sensed_signal=sensed_signal,
        sensed_noise=sensed_noise,
        xi=xi,
        upsilon=upsilon,
        spec=spec,
        basis_kind=truth.kind,
    )
    logger.debug(f"sensed D_hat={env.D_hat} K_hat={env.K_hat}")
    return env
