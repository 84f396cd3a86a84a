"""
Experiment catalogue.

Deterministic experiments (psd, zplane, loss_grid) build their output
rows directly. Monte Carlo experiments expose a trial kernel
`kernel(cfg, trial) -> list[TrialRecord]` that draws everything from the
trial's own random stream, so trials can run in any order.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .concurrence import (
    TxSelection, build_feedback, consensus_distance, coop_concur, noncoop_concur,
)
from .end_to_end import (
    EFFECTIVE, MismatchGeometry, build_pairwise, detect_waveform, mismatch_loss, simulate_received,
    snr_with_uncertainty,
)
from .identification import (
    SingletonDictionary, SparseSelection, composite_filter, dimension_statistics, identify_dimensions,
    np_threshold,
)
from .scenario import apply_sensing_uncertainty, generate_environment
from .schemas import BasisKind, ChannelParams, ExperimentConfig, ExperimentName, TrialRecord
from .signaling import Waveform, design_waveform, pick_from_tie_set, psd, select_column, waveform_book, zeros
from .subspace import projector_from_basis
from .utils.rng import trial_rng

logger = logging.getLogger(__name__)

NONCOOP = "noncoop"
COOP = "coop"

SCHEMES = {
    ExperimentName.CROC_NONCOOP: (NONCOOP,),
    ExperimentName.CROC_COOP: (COOP,),
    ExperimentName.DOF_COUNT_TX: (NONCOOP, COOP),
    ExperimentName.CHORDAL: (NONCOOP, COOP),
}


@dataclass(frozen=True)
class ExperimentEntry:
    name: ExperimentName
    description: str
    kernel: Optional[Callable[[ExperimentConfig, int], list]] = None
    builder: Optional[Callable[[ExperimentConfig], list]] = None

    @property
    def deterministic(self) -> bool:
        return self.kernel is None


# ============================================
# HELPERS
# ============================================

def _channel(cfg: ExperimentConfig, ep: float) -> ChannelParams:
    return ChannelParams(inr_bar=cfg.inr_bar, ep_over_n0_db=ep)


def _record(cfg: ExperimentConfig, trial: int, params: dict, outcomes: dict) -> TrialRecord:
    return TrialRecord(
        experiment=cfg.experiment.value,
        trial=trial,
        params=params,
        outcomes={k: float(v) for k, v in outcomes.items()},
    )


def _transmit_waveform(geom: MismatchGeometry, rng: np.random.Generator) -> Waveform:
    """Uncoordinated transmitter: any column of its tie set is equally good."""
    _, ties = select_column(geom.tx_projector)
    return design_waveform(geom.tx_projector, pick_from_tie_set(ties, rng))


def _unit(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    return v / norm if norm > 0 else v


def _deterministic_row(experiment: ExperimentName, params: dict, metric: str, value: float) -> dict:
    return {
        "experiment": experiment.value,
        **params,
        "metric": metric,
        "value": float(value),
        "ci_low": float(value),
        "ci_high": float(value),
        "n_trials": 1,
    }


# ============================================
# DETERMINISTIC EXPERIMENTS
# ============================================

def _sensed_waveform(cfg: ExperimentConfig):
    rng = trial_rng(cfg.seed, 0)
    truth = generate_environment(cfg.N, cfg.D, cfg.basis_kind, rng)
    env = apply_sensing_uncertainty(truth, cfg.uncertainty(), rng)
    p = projector_from_basis(env.sensed_noise)
    _, ties = select_column(p)
    return truth, design_waveform(p, pick_from_tie_set(ties, rng))


def psd_rows(cfg: ExperimentConfig) -> list[dict]:
    truth, w = _sensed_waveform(cfg)
    spectrum = psd(w, cfg.n_fft)
    occupied = set()
    if cfg.basis_kind == BasisKind.FOURIER and cfg.n_fft % cfg.N == 0:
        occupied = {k * (cfg.n_fft // cfg.N) for k in truth.occupied}
    return [
        _deterministic_row(
            cfg.experiment,
            {"bin": k, "frequency": k / cfg.n_fft, "occupied": k in occupied},
            "psd_db",
            v,
        )
        for k, v in enumerate(spectrum)
    ]


def zplane_rows(cfg: ExperimentConfig) -> list[dict]:
    _, w = _sensed_waveform(cfg)
    rows = []
    for i, z in enumerate(zeros(w)):
        for metric, value in (("real", z.real), ("imag", z.imag), ("radius", abs(z)), ("angle", np.angle(z))):
            rows.append(_deterministic_row(cfg.experiment, {"zero": i}, metric, value))
    return rows


def loss_grid_rows(cfg: ExperimentConfig) -> list[dict]:
    grid = np.round(np.arange(0.0, 1.0 + cfg.rho_step / 2, cfg.rho_step), 12)
    return [
        _deterministic_row(
            cfg.experiment,
            {"rho_t": float(rt), "rho_r": float(rr)},
            "loss_db",
            20.0 * np.log10(mismatch_loss(rt, rr)),
        )
        for rt in grid
        for rr in grid
    ]


# ============================================
# RECEIVER-SIDE MONTE CARLO
# ============================================

def detect_prob_trial(cfg: ExperimentConfig, trial: int) -> list[TrialRecord]:
    """Waveform detection at the receiver while κ_T = κ_R = κ sweeps Γ_unc."""
    rng = trial_rng(cfg.seed, trial)
    records = []
    for kappa in cfg.kappa_list:
        geom = build_pairwise(cfg.N, cfg.K0, kappa, kappa, min(cfg.epsR, kappa), cfg.basis_kind, rng)
        phi_t = _transmit_waveform(geom, rng)
        book = waveform_book(geom.rx_projector)
        for ep in cfg.Ep_over_N0_list:
            params = _channel(cfg, ep)
            _, gamma_unc = snr_with_uncertainty(params, geom)
            for q in cfg.Q_list:
                frames = simulate_received(geom, params, q, phi_t, rng)
                hit = detect_waveform(frames, book, cfg.reg) == phi_t.column_index
                records.append(_record(
                    cfg, trial,
                    {"kappa": kappa, "gamma_unc_db": round(10.0 * np.log10(gamma_unc), 9), "Ep_over_N0": ep, "Q": q},
                    {"detected": hit},
                ))
    return records


def rx_identification_trial(cfg: ExperimentConfig, trial: int) -> list[TrialRecord]:
    """Per-dimension identification at the receiver over the (Ep/N0, Q, P_FA) grid."""
    rng = trial_rng(cfg.seed, trial)
    geom = build_pairwise(cfg.N, cfg.K0, cfg.kappaT, cfg.kappaR, cfg.epsR, cfg.basis_kind, rng)
    phi_t = _transmit_waveform(geom, rng)
    book = waveform_book(geom.rx_projector)
    effective = np.array(geom.rx_labels) == EFFECTIVE

    records = []
    for ep in cfg.Ep_over_N0_list:
        params = _channel(cfg, ep)
        for q in cfg.Q_list:
            frames = simulate_received(geom, params, q, phi_t, rng)
            ref = detect_waveform(frames, book, cfg.reg)
            t = dimension_statistics(frames, geom.rx_basis, ref)
            for p_fa in cfg.P_FA_list:
                lam = t > np_threshold(params.noise_density / 2.0, q, p_fa).gamma
                records.append(_record(
                    cfg, trial,
                    {"Ep_over_N0": ep, "Q": q, "P_FA": p_fa},
                    {
                        "detected": lam[effective].sum(),
                        "n_effective": effective.sum(),
                        "false_alarms": lam[~effective].sum(),
                        "n_excess": (~effective).sum(),
                        "waveform_detected": ref == phi_t.column_index,
                    },
                ))
    return records


# ============================================
# TRANSMITTER-SIDE MONTE CARLO
# ============================================

def _ideal_selection(geom: MismatchGeometry, alpha: int) -> SparseSelection:
    lam = np.arange(geom.k_hat_r) < geom.K0
    return SparseSelection(lam=lam, alpha=alpha, N=geom.N, reference_index=alpha)


def _tx_outcomes(sel_t: TxSelection, geom: MismatchGeometry) -> dict:
    effective = np.arange(geom.k_hat_t) < geom.K0
    return {
        "detected": sel_t.pi[effective].sum(),
        "n_effective": geom.K0,
        "false_alarms": sel_t.pi[~effective].sum(),
        "n_excess": geom.kappa_t,
        "identified": sel_t.K0_hat,
    }


def tx_concurrence_trial(cfg: ExperimentConfig, trial: int) -> list[TrialRecord]:
    """
    Receiver identifies on the forward link, then the transmitter either
    re-identifies on the reverse link (noncoop) or recovers the receiver's
    choice from its feedback message (coop).
    """
    rng = trial_rng(cfg.seed, trial)
    geom = build_pairwise(cfg.N, cfg.K0, cfg.kappaT, cfg.kappaR, cfg.epsR, cfg.basis_kind, rng)
    reverse = geom.reversed()
    phi_t = _transmit_waveform(geom, rng)
    rx_book = waveform_book(geom.rx_projector)
    tx_book = waveform_book(geom.tx_projector)
    dictionary = SingletonDictionary(geom.tx_basis)
    schemes = SCHEMES[cfg.experiment]
    coop_cache: dict[bytes, TxSelection] = {}

    records = []
    for ep in cfg.Ep_over_N0_list:
        params = _channel(cfg, ep)
        for q in cfg.Q_list:
            frames = simulate_received(geom, params, q, phi_t, rng)
            if cfg.ideal_receiver:
                ref = phi_t.column_index
            else:
                ref = detect_waveform(frames, rx_book, cfg.reg)
            # one reverse-link noise realization shared by every P_FA
            reverse_seed = int(rng.integers(2 ** 62))
            for p_fa in cfg.P_FA_list:
                thr = np_threshold(params.noise_density / 2.0, q, p_fa)
                if cfg.ideal_receiver:
                    sel_r = _ideal_selection(geom, ref)
                else:
                    sel_r = identify_dimensions(frames, geom.rx_basis, thr, reference_index=ref, reg=cfg.reg)
                phi_r = composite_filter(geom.rx_basis, sel_r)

                for scheme in schemes:
                    if scheme == NONCOOP:
                        back = simulate_received(reverse, params, q, _unit(phi_r), reverse_seed)
                        sel_t = noncoop_concur(back, geom.tx_basis, thr, reg=cfg.reg, book=tx_book)
                    else:
                        message = build_feedback(sel_r, phi_r)
                        key = message.to_bytes()
                        if key not in coop_cache:
                            coop_cache[key] = coop_concur(message, dictionary)
                        sel_t = coop_cache[key]
                    outcomes = _tx_outcomes(sel_t, geom)
                    if cfg.experiment == ExperimentName.CHORDAL:
                        outcomes["chordal"] = consensus_distance(
                            sel_t, sel_r, geom.tx_basis, geom.rx_basis, normalize=True
                        )
                    records.append(_record(
                        cfg, trial,
                        {"scheme": scheme, "Ep_over_N0": ep, "Q": q, "P_FA": p_fa},
                        outcomes,
                    ))
    return records


# ============================================
# CATALOGUE
# ============================================

CATALOGUE = {
    entry.name: entry
    for entry in (
        ExperimentEntry(
            ExperimentName.PSD,
            "Power spectral density of the designed waveform on a sensed environment",
            builder=psd_rows,
        ),
        ExperimentEntry(
            ExperimentName.ZPLANE,
            "Zeros of the designed waveform's Z-transform",
            builder=zplane_rows,
        ),
        ExperimentEntry(
            ExperimentName.LOSS_GRID,
            "Matched-filter energy loss in dB over a grid of subspace excesses",
            builder=loss_grid_rows,
        ),
        ExperimentEntry(
            ExperimentName.DETECT_PROB,
            "Waveform detection probability at the receiver versus SNR degradation",
            kernel=detect_prob_trial,
        ),
        ExperimentEntry(
            ExperimentName.ROC_RX,
            "ROC of effective noise subspace identification at the receiver",
            kernel=rx_identification_trial,
        ),
        ExperimentEntry(
            ExperimentName.PMD_VS_SNR,
            "Miss-detection probability at the receiver versus Ep/N0",
            kernel=rx_identification_trial,
        ),
        ExperimentEntry(
            ExperimentName.CROC_NONCOOP,
            "Complementary ROC of noncooperative concurrence at the transmitter",
            kernel=tx_concurrence_trial,
        ),
        ExperimentEntry(
            ExperimentName.CROC_COOP,
            "Complementary ROC of cooperative concurrence at the transmitter",
            kernel=tx_concurrence_trial,
        ),
        ExperimentEntry(
            ExperimentName.DOF_COUNT_TX,
            "Average number of effective DoF identified at the transmitter",
            kernel=tx_concurrence_trial,
        ),
        ExperimentEntry(
            ExperimentName.CHORDAL,
            "Normalized chordal distance between the subspaces both ends agree on",
            kernel=tx_concurrence_trial,
        ),
    )
}


def get_entry(name) -> ExperimentEntry:
    return CATALOGUE[ExperimentName(name)]
