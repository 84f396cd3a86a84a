"""
Transmitter-side concurrence on the effective noise subspace.

Critical behaviors tested:
1. The feedback codec is bit exact and rejects malformed messages
2. Cooperative recovery from an exact feedback filter never selects excess dims, and
   matches exhaustive block-sparse search on canonical singletons
3. Noncooperative re-identification on a noiseless reverse link finds the shared dims
4. The isometry check and the consensus distance match closed forms
"""

import itertools

import numpy as np
import pytest

from nullcast.concurrence import (
    FeedbackMessage,
    TxSelection,
    build_feedback,
    consensus_distance,
    coop_concur,
    l1_ball_projection,
    noncoop_concur,
    rip_check,
)
from nullcast.end_to_end import build_pairwise
from nullcast.errors import BadDimensions, DimensionMismatch, InvalidSelection, ZeroVector
from nullcast.identification import SingletonDictionary, SparseSelection, composite_filter, np_threshold
from nullcast.schemas import BasisKind
from nullcast.signaling import design_waveform, select_column
from nullcast.subspace import SubspaceBasis, orthonormalize
from nullcast.utils.rng import complex_normal


def ideal_rx_selection(geom, alpha):
    lam = np.arange(geom.k_hat_r) < geom.K0
    return SparseSelection(lam=lam, alpha=alpha, N=geom.N)


# =============================================================================
# Feedback message
# =============================================================================


class TestFeedbackMessage:
    def test_round_trip_is_bit_exact(self, rng):
        msg = FeedbackMessage(k0_hat=3, phi_r=complex_normal(rng, 12))
        data = msg.to_bytes()
        assert len(data) == 4 + 16 * 12
        back = FeedbackMessage.from_bytes(data)
        assert back == msg
        assert back.phi_r.tobytes() == msg.phi_r.tobytes()

    def test_little_endian_layout(self):
        msg = FeedbackMessage(k0_hat=1, phi_r=np.array([1.5 - 2.0j]))
        data = msg.to_bytes()
        assert data[:4] == b"\x01\x00\x00\x00"
        assert np.frombuffer(data[4:12], dtype="<f8")[0] == 1.5
        assert np.frombuffer(data[12:20], dtype="<f8")[0] == -2.0

    def test_malformed(self):
        with pytest.raises(BadDimensions):
            FeedbackMessage.from_bytes(b"\x01\x00")
        with pytest.raises(BadDimensions):
            FeedbackMessage.from_bytes(b"\x01\x00\x00\x00" + b"\x00" * 10)

    def test_dimension_exceeds_length(self):
        with pytest.raises(InvalidSelection):
            FeedbackMessage(k0_hat=5, phi_r=np.zeros(4))

    def test_zero_selection(self):
        sel = SparseSelection(lam=np.zeros(6, dtype=bool), alpha=None, N=8)
        basis = SubspaceBasis(np.eye(8, dtype=complex)[:, :6])
        f = build_feedback(sel, composite_filter(basis, sel))
        assert f.k0_hat == 0
        np.testing.assert_array_equal(f.phi_r, 0)

    def test_ideal_receiver_dimension(self):
        geom = build_pairwise(64, 40, 12, 12, 0, BasisKind.FOURIER, seed=0)
        sel = ideal_rx_selection(geom, alpha=0)
        assert build_feedback(sel, composite_filter(geom.rx_basis, sel)).k0_hat == 40

    def test_filter_length_mismatch(self):
        sel = SparseSelection(lam=[True], alpha=0, N=4)
        with pytest.raises(DimensionMismatch):
            build_feedback(sel, np.ones(3))


# =============================================================================
# l1-ball projection
# =============================================================================


class TestL1BallProjection:
    def test_known_projection(self):
        np.testing.assert_allclose(l1_ball_projection(np.array([3.0, 1.0, 0.5]), 2.0), [2.0, 0.0, 0.0])

    def test_inside_is_unchanged(self):
        v = np.array([0.2j, -0.3, 0.1 + 0.1j])
        np.testing.assert_array_equal(l1_ball_projection(v, 1.0), v)

    def test_lands_on_sphere_and_keeps_phases(self, rng):
        for radius in (0.5, 2.0, 7.0):
            v = 3 * complex_normal(rng, 20)
            x = l1_ball_projection(v, radius)
            assert np.sum(np.abs(x)) == pytest.approx(radius, abs=1e-12)
            nz = np.abs(x) > 0
            np.testing.assert_allclose(np.angle(x[nz]), np.angle(v[nz]), atol=1e-12)

    def test_zero_radius(self):
        np.testing.assert_array_equal(l1_ball_projection(np.array([1.0, -2.0]), 0.0), 0)

    def test_negative_radius(self):
        with pytest.raises(BadDimensions):
            l1_ball_projection(np.ones(3), -1.0)


# =============================================================================
# Cooperative concurrence
# =============================================================================


class TestCoopConcur:
    @pytest.mark.parametrize("seed", range(5))
    def test_exact_feedback_selects_shared_dims(self, seed):
        geom = build_pairwise(32, 8, 3, 3, 0, BasisKind.FOURIER, seed=seed)
        sel = ideal_rx_selection(geom, alpha=seed)
        f = build_feedback(sel, composite_filter(geom.rx_basis, sel))
        tx = coop_concur(f, SingletonDictionary(geom.tx_basis))
        np.testing.assert_array_equal(tx.pi, np.arange(geom.k_hat_t) < geom.K0)
        assert np.sum(np.abs(tx.gamma_vec)) <= f.k0_hat + 1e-12

    def test_through_the_codec(self):
        geom = build_pairwise(32, 8, 3, 3, 0, BasisKind.FOURIER, seed=9)
        sel = ideal_rx_selection(geom, alpha=4)
        f = FeedbackMessage.from_bytes(build_feedback(sel, composite_filter(geom.rx_basis, sel)).to_bytes())
        tx = coop_concur(f, SingletonDictionary(geom.tx_basis))
        assert tx.K0_hat == 8
        assert not tx.pi[geom.K0:].any()

    @pytest.mark.parametrize("k0_hat", [1, 2, 3])
    def test_matches_exhaustive_search_on_canonical_singletons(self, k0_hat, rng):
        n, k = 8, 4
        mismatches = 0
        for _ in range(100):
            cols = np.sort(rng.choice(n, size=k, replace=False))
            d = SingletonDictionary(SubspaceBasis(np.eye(n, dtype=complex)[:, cols]))
            target = complex_normal(rng, n)

            spread = np.zeros((k, n), dtype=complex)
            spread[np.arange(k), cols] = 1.0
            _, ratio = rip_check(d, spread.reshape(-1))
            assert ratio == pytest.approx(1.0, abs=1e-12)

            # best block-sparse fit with at most k0_hat singletons inside the l1 budget
            best_residual, best_support = np.inf, None
            for subset in itertools.combinations(range(k), k0_hat):
                idx = list(subset)
                a = target[cols[idx]]
                fit = l1_ball_projection(a, float(k0_hat))
                residual = np.sum(np.abs(target) ** 2) - np.sum(np.abs(a) ** 2) + np.sum(np.abs(a - fit) ** 2)
                if residual < best_residual - 1e-12:
                    support = np.zeros(k, dtype=bool)
                    support[idx] = np.abs(fit) > 1e-9
                    best_residual, best_support = residual, support

            tx = coop_concur(FeedbackMessage(k0_hat=k0_hat, phi_r=target), d)
            mismatches += int(not np.array_equal(tx.pi, best_support))
        assert mismatches == 0

    def test_empty_feedback(self):
        d = SingletonDictionary(SubspaceBasis(np.eye(6, dtype=complex)[:, :4]))
        tx = coop_concur(FeedbackMessage(k0_hat=0, phi_r=np.zeros(6)), d)
        assert tx.K0_hat == 0
        assert tx.K_hat == 4

    def test_dimension_mismatch(self):
        d = SingletonDictionary(SubspaceBasis(np.eye(6, dtype=complex)[:, :4]))
        with pytest.raises(DimensionMismatch):
            coop_concur(FeedbackMessage(k0_hat=1, phi_r=np.ones(5)), d)


# =============================================================================
# Noncooperative concurrence
# =============================================================================


class TestNoncoopConcur:
    def test_noiseless_reverse_link(self):
        geom = build_pairwise(32, 8, 4, 3, 0, BasisKind.RANDOM, seed=1)
        n, _ = select_column(geom.rx_projector)
        phi_r = design_waveform(geom.rx_projector, n)
        frames = np.tile(5.0 * phi_r.samples, (4, 1))
        tx = noncoop_concur(frames, geom.tx_basis, np_threshold(1e-12, 4, 0.01), reference_index=n)
        assert isinstance(tx, TxSelection)
        np.testing.assert_array_equal(tx.pi, np.arange(geom.k_hat_t) < geom.K0)


# =============================================================================
# Diagnostics
# =============================================================================


class TestRipCheck:
    def test_canonical_singletons(self):
        d = SingletonDictionary(SubspaceBasis(np.eye(8, dtype=complex)[:, [1, 4, 6]]))
        gamma = np.zeros(3 * 8, dtype=complex)
        gamma[0 * 8 + 1] = 0.7
        gamma[2 * 8 + 6] = -1.2j
        ok, ratio = rip_check(d, gamma)
        assert ok
        assert ratio == 1.0

    def test_random_singletons_contract(self, rng):
        d = SingletonDictionary(orthonormalize(complex_normal(rng, (16, 6))))
        for _ in range(50):
            gamma = np.zeros((6, 16), dtype=complex)
            active = rng.random(6) < 0.7
            gamma[np.flatnonzero(active), rng.integers(16, size=active.sum())] = 1.0
            if not active.any():
                continue
            _, ratio = rip_check(d, gamma.reshape(-1))
            assert ratio <= 1.0 + 1e-12

    def test_zero_vector(self):
        d = SingletonDictionary(SubspaceBasis(np.eye(4, dtype=complex)[:, :2]))
        with pytest.raises(ZeroVector):
            rip_check(d, np.zeros(8))

    def test_two_columns_in_one_singleton(self):
        d = SingletonDictionary(SubspaceBasis(np.eye(4, dtype=complex)[:, :2]))
        with pytest.raises(InvalidSelection):
            rip_check(d, np.array([1, 1, 0, 0, 0, 0, 0, 0]))


class TestConsensusDistance:
    def test_identical_selections(self):
        geom = build_pairwise(16, 4, 0, 0, 0, BasisKind.RANDOM, seed=0)
        sel_r = ideal_rx_selection(geom, alpha=0)
        sel_t = TxSelection(pi=np.ones(4, dtype=bool))
        assert consensus_distance(sel_t, sel_r, geom.tx_basis, geom.rx_basis) == pytest.approx(0.0, abs=1e-20)

    def test_one_extra_dimension(self):
        geom = build_pairwise(16, 4, 0, 2, 0, BasisKind.RANDOM, seed=0)
        sel_t = TxSelection(pi=np.ones(4, dtype=bool))
        lam = np.array([True] * 4 + [True, False])
        sel_r = SparseSelection(lam=lam, alpha=0, N=16)
        d = consensus_distance(sel_t, sel_r, geom.tx_basis, geom.rx_basis)
        assert d == pytest.approx(0.5)
        assert consensus_distance(sel_t, sel_r, geom.tx_basis, geom.rx_basis, normalize=True) == pytest.approx(0.1)

    def test_length_mismatch(self):
        geom = build_pairwise(16, 4, 1, 0, 0, BasisKind.RANDOM, seed=0)
        with pytest.raises(DimensionMismatch):
            consensus_distance(TxSelection(pi=np.ones(4, dtype=bool)), ideal_rx_selection(geom, 0),
                               geom.tx_basis, geom.rx_basis)
