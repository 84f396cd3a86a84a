"""
Waveform design from the sensed noise-subspace projector.

Critical behaviors tested:
1. Projector-column and total-least-squares routes give the same waveform
2. The design is invariant to rotations of the sensed noise basis
3. Occupied carriers are nulled; leakage into misclassified DoF is bounded
4. Spectral and zero diagnostics match closed-form cases
"""

import numpy as np
import pytest

from nullcast.errors import BadFftSize, DegenerateColumn, DegeneratePolynomial, EmptyNullSpace, ZeroProjector
from nullcast.scenario import apply_sensing_uncertainty, fourier_matrix, generate_environment
from nullcast.schemas import BasisKind, UncertaintySpec
from nullcast.signaling import (
    design_tls,
    design_waveform,
    pick_from_tie_set,
    psd,
    robustness_split,
    select_column,
    waveform_book,
    zeros,
)
from nullcast.subspace import (
    OrthoProjector,
    SubspaceBasis,
    orthonormalize,
    projector_from_basis,
    random_unitary,
    rotate_basis,
)
from nullcast.utils.rng import complex_normal


def diag_projector(*entries):
    return OrthoProjector(np.diag(np.asarray(entries, dtype=complex)), rank=int(sum(entries)))


def rank_one_distance(a, b):
    return np.linalg.norm(np.outer(a, a.conj()) - np.outer(b, b.conj()))


def sensed_env(N, D, kind, seed, **spec):
    truth = generate_environment(N, D, kind, seed)
    return apply_sensing_uncertainty(truth, UncertaintySpec(**spec), seed)


@pytest.fixture
def fourier_env():
    """N=32 with 12 occupied Fourier carriers and no sensing errors."""
    return sensed_env(32, 12, BasisKind.FOURIER, seed=3)


# =============================================================================
# Column selection
# =============================================================================


class TestSelectColumn:
    def test_equal_maxima(self):
        index, ties = select_column(diag_projector(1, 0, 1, 0))
        assert index == 0
        assert ties == (0, 2)

    def test_strict_maximum(self, rng):
        p = projector_from_basis(orthonormalize(complex_normal(rng, (6, 3))))
        index, ties = select_column(p)
        assert index == int(np.argmax(p.diagonal))
        assert ties == (index,)

    def test_dft_projector_is_fully_ambiguous(self):
        f = fourier_matrix(8)
        p = projector_from_basis(SubspaceBasis(f[:, [0, 2, 5]]))
        np.testing.assert_allclose(p.diagonal, 3 / 8, atol=1e-12)
        index, ties = select_column(p)
        assert index == 0
        assert ties == tuple(range(8))

    def test_rank_zero(self):
        with pytest.raises(ZeroProjector):
            select_column(OrthoProjector(np.zeros((3, 3)), rank=0))


class TestPickFromTieSet:
    def test_uniform_over_ties(self):
        ties = (1, 4, 6, 7)
        picks = np.array([pick_from_tie_set(ties, seed) for seed in range(4000)])
        counts = np.array([(picks == t).sum() for t in ties])
        assert set(picks) <= set(ties)
        assert np.all(np.abs(counts / 4000 - 0.25) < 0.04)

    def test_empty(self):
        with pytest.raises(ZeroProjector):
            pick_from_tie_set((), 0)


# =============================================================================
# Projector-column design
# =============================================================================


class TestDesignWaveform:
    def test_identity_gives_impulse(self):
        w = design_waveform(diag_projector(1, 1, 1, 1), 0)
        np.testing.assert_allclose(w.samples, [1, 0, 0, 0])
        assert w.tie_set == (0, 1, 2, 3)
        assert not w.unique

    def test_canonical_projector(self):
        w = design_waveform(diag_projector(1, 0, 1, 0), 0)
        np.testing.assert_allclose(w.samples, [1, 0, 0, 0])

    def test_degenerate_column(self):
        with pytest.raises(DegenerateColumn):
            design_waveform(diag_projector(1, 0, 1, 0), 1)

    def test_fixed_by_projector_and_real_at_index(self, rng):
        p = projector_from_basis(orthonormalize(complex_normal(rng, (10, 4))))
        n, _ = select_column(p)
        w = design_waveform(p, n)
        np.testing.assert_allclose(p.apply(w.samples), w.samples, atol=1e-12)
        assert abs(np.linalg.norm(w.samples) - 1.0) < 1e-10
        assert w.samples[n].real > 0 and abs(w.samples[n].imag) < 1e-12

    def test_occupied_carriers_are_nulled(self, fourier_env):
        p = projector_from_basis(fourier_env.sensed_noise)
        w = design_waveform(p, select_column(p)[0])
        spectrum = np.abs(np.fft.fft(w.samples))
        occupied_bins = [int(np.argmax(np.abs(np.fft.fft(c)))) for c in fourier_env.true_signal.columns.T]
        assert len(occupied_bins) == 12
        assert np.all(spectrum[occupied_bins] < 1e-8 * spectrum.max())


class TestDesignTls:
    def test_single_signal_dimension(self):
        signal = SubspaceBasis(np.eye(3, dtype=complex)[:, [0]])
        w = design_tls(signal)
        assert abs(w.samples[0]) < 1e-12
        assert w.column_index in (1, 2)
        p = projector_from_basis(SubspaceBasis(np.eye(3, dtype=complex)[:, [1, 2]]))
        np.testing.assert_allclose(w.samples, design_waveform(p, w.column_index).samples, atol=1e-10)

    def test_single_null_direction(self, rng):
        b = orthonormalize(complex_normal(rng, (5, 5)))
        w = design_tls(b.take(range(4)))
        assert rank_one_distance(w.samples, b.columns[:, 4]) < 1e-8

    def test_full_signal_space(self):
        with pytest.raises(EmptyNullSpace):
            design_tls(SubspaceBasis(np.eye(3, dtype=complex)))

    @pytest.mark.parametrize("kind", [BasisKind.RANDOM, BasisKind.FOURIER, BasisKind.CANONICAL])
    def test_agrees_with_projector_column(self, kind):
        for seed in range(100 if kind == BasisKind.RANDOM else 20):
            rng = np.random.default_rng(seed)
            n_dim = int(rng.integers(4, 33))
            d = int(rng.integers(1, n_dim))
            env = sensed_env(n_dim, d, kind, seed, eps=min(1, d), false_alarms=min(1, n_dim - d - 1))
            p = projector_from_basis(env.sensed_noise)
            direct = design_waveform(p, select_column(p)[0])
            tls = design_tls(env.sensed_signal)
            assert tls.column_index == direct.column_index
            assert rank_one_distance(tls.samples, direct.samples) < 1e-8
            np.testing.assert_allclose(tls.samples, direct.samples, atol=1e-8)


# =============================================================================
# Invariances
# =============================================================================


class TestInvariance:
    def test_rotation_of_noise_basis(self):
        env = sensed_env(24, 9, BasisKind.RANDOM, seed=1, eps=2)
        p = projector_from_basis(env.sensed_noise)
        n, _ = select_column(p)
        reference = design_waveform(p, n).samples
        for seed in range(200):
            u = random_unitary(env.K_hat, seed)
            p_rot = projector_from_basis(rotate_basis(env.sensed_noise, u))
            assert select_column(p_rot)[0] == n
            np.testing.assert_allclose(design_waveform(p_rot, n).samples, reference, atol=1e-9)

    def test_diagonal_offsets(self):
        env = sensed_env(16, 5, BasisKind.RANDOM, seed=2)
        gamma = np.diag(np.exp(1j * (2 * np.pi * 0.13 * np.arange(16) + 0.7)))
        p = projector_from_basis(env.sensed_noise)
        p_off = projector_from_basis(SubspaceBasis(gamma @ env.sensed_noise.columns))
        np.testing.assert_allclose(p_off.matrix, gamma @ p.matrix @ gamma.conj().T, atol=1e-12)
        np.testing.assert_allclose(p_off.diagonal, p.diagonal, atol=1e-12)
        assert select_column(p_off)[0] == select_column(p)[0]


# =============================================================================
# Waveform-book
# =============================================================================


class TestWaveformBook:
    def test_identity(self):
        book = waveform_book(diag_projector(1, 1))
        np.testing.assert_allclose(book[0].samples, [1, 0])
        np.testing.assert_allclose(book[1].samples, [0, 1])

    def test_absent_entry(self):
        book = waveform_book(diag_projector(1, 0))
        np.testing.assert_allclose(book[0].samples, [1, 0])
        assert book[1] is None
        assert book.present == [0]
        np.testing.assert_array_equal(book.matrix[:, 1], 0)

    def test_dft_book_is_circulant(self):
        f = fourier_matrix(8)
        book = waveform_book(projector_from_basis(SubspaceBasis(f[:, [0, 1, 3, 4, 6]])))
        gram = np.abs(book.matrix.conj().T @ book.matrix)
        np.testing.assert_allclose(np.diagonal(gram), 1.0, atol=1e-12)
        for shift in range(8):
            band = [gram[i, (i + shift) % 8] for i in range(8)]
            np.testing.assert_allclose(band, band[0], atol=1e-12)
        assert len({tuple(np.round(book[i].samples, 9)) for i in range(8)}) == 8

    def test_power_uniformity_and_leakage(self):
        env = sensed_env(64, 24, BasisKind.FOURIER, seed=6, eps=8, delta=4)
        book = waveform_book(projector_from_basis(env.sensed_noise))
        for w in book.entries:
            assert abs(np.linalg.norm(env.sensed_noise.columns.conj().T @ w.samples) - 1.0) < 1e-10
            assert np.linalg.norm(env.sensed_signal.columns.conj().T @ w.samples) < 1e-9
            leaked = np.sum(np.abs(env.xi.columns.conj().T @ w.samples) ** 2)
            assert leaked <= 12 / 52 + 1e-9


class TestRobustnessSplit:
    def test_fourier_split(self):
        env = sensed_env(64, 24, BasisKind.FOURIER, seed=8, eps=10, delta=2)
        p = projector_from_basis(env.sensed_noise)
        split = robustness_split(design_waveform(p, select_column(p)[0]), env)
        assert split.in_xi == pytest.approx(12 / 52, abs=1e-12)
        assert split.in_signal < 1e-20
        assert split.in_noise == pytest.approx(40 / 52, abs=1e-12)
        assert split.minmax_objective == pytest.approx(12 / 52, abs=1e-12)


# =============================================================================
# Diagnostics
# =============================================================================


class TestPsd:
    def test_impulse_is_flat(self):
        np.testing.assert_allclose(psd(np.array([1, 0, 0, 0], dtype=complex), 16), 0.0, atol=1e-12)

    def test_occupied_carrier_nulls(self, fourier_env):
        p = projector_from_basis(fourier_env.sensed_noise)
        w = design_waveform(p, select_column(p)[0])
        spectrum = psd(w, 512)
        assert spectrum.max() == pytest.approx(0.0)
        bins = [int(np.argmax(np.abs(np.fft.fft(c, 512)))) for c in fourier_env.true_signal.columns.T]
        assert np.all(spectrum[bins] <= -80.0)

    def test_maximum_uncertainty_uses_all_carriers(self):
        env = sensed_env(32, 12, BasisKind.FOURIER, seed=0, eps=12)
        p = projector_from_basis(env.sensed_noise)
        spectrum = psd(design_waveform(p, 0), 32)
        np.testing.assert_allclose(spectrum, 0.0, atol=1e-9)

    def test_fft_too_short(self):
        with pytest.raises(BadFftSize):
            psd(np.ones(8) / np.sqrt(8), 4)


class TestZeros:
    def test_impulse_has_no_zeros(self):
        assert zeros(np.array([1, 0, 0, 0], dtype=complex)).size == 0

    def test_two_taps(self):
        np.testing.assert_allclose(zeros(np.array([1.0, 0.5 - 0.25j])), [-(0.5 - 0.25j)], atol=1e-12)

    def test_single_carrier_zeros_on_circle(self):
        env = sensed_env(32, 31, BasisKind.FOURIER, seed=4)
        p = projector_from_basis(env.sensed_noise)
        w = design_waveform(p, select_column(p)[0])
        z = zeros(w)
        assert z.size == 31
        assert np.ptp(np.abs(z)) < 1e-8
        # the 31 zeros are the 32nd roots of unity (rotated to the carrier) minus the carrier itself
        carrier = w.samples[1] / w.samples[0]
        angles = np.sort(np.mod(np.angle(z / carrier), 2 * np.pi))
        np.testing.assert_allclose(angles, 2 * np.pi * np.arange(1, 32) / 32, atol=1e-6)

    def test_all_zero(self):
        with pytest.raises(DegeneratePolynomial):
            zeros(np.zeros(4, dtype=complex))
