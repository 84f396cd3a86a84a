from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================
# ENUMERATIONS
# ============================================

class BasisKind(str, Enum):
    FOURIER = "fourier"
    CANONICAL = "canonical"
    RANDOM = "random"


class ExperimentName(str, Enum):
    PSD = "psd"
    ZPLANE = "zplane"
    LOSS_GRID = "loss_grid"
    DETECT_PROB = "detect_prob"
    ROC_RX = "roc_rx"
    PMD_VS_SNR = "pmd_vs_snr"
    CROC_NONCOOP = "croc_noncoop"
    CROC_COOP = "croc_coop"
    DOF_COUNT_TX = "dof_count_tx"
    CHORDAL = "chordal"


DETERMINISTIC_EXPERIMENTS = {ExperimentName.PSD, ExperimentName.ZPLANE, ExperimentName.LOSS_GRID}
PAIRWISE_EXPERIMENTS = set(ExperimentName) - DETERMINISTIC_EXPERIMENTS


# ============================================
# SCENARIO PARAMETERS
# ============================================

class UncertaintySpec(BaseModel):
    """Sensing error counts: eps (sensing errors), delta (poor monitoring), false alarms."""
    model_config = ConfigDict(frozen=True)

    eps: int = Field(0, ge=0)
    delta: int = Field(0, ge=0)
    false_alarms: int = Field(0, ge=0)

    @property
    def xi(self) -> int:
        return self.eps + self.delta


class ChannelParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    gain: float = Field(1.0, gt=0)
    tx_power: float = Field(1.0, gt=0)
    noise_density: float = Field(1.0, gt=0)
    inr_bar: float = Field(0.0, ge=0)
    ep_over_n0_db: float = 10.0

    @property
    def pulse_energy(self) -> float:
        return self.noise_density * 10.0 ** (self.ep_over_n0_db / 10.0)


# ============================================
# EXPERIMENT CONFIGURATION
# ============================================

class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    experiment: ExperimentName
    N: int = Field(64, ge=1, le=256)
    D: int = Field(24, ge=0)
    K0: int = Field(40, ge=1)
    kappaT: int = Field(12, ge=0)
    kappaR: int = Field(12, ge=0)
    epsR: int = Field(0, ge=0)
    basis_kind: BasisKind = BasisKind.FOURIER
    Ep_over_N0_list: List[float] = Field(default_factory=lambda: [0.0, 10.0, 20.0], min_length=1)
    Q_list: List[int] = Field(default_factory=lambda: [1, 10, 100], min_length=1)
    P_FA_list: List[float] = Field(default_factory=lambda: [1e-3, 1e-2, 1e-1], min_length=1)
    inr_bar: float = Field(1.0, ge=0)
    trials: int = Field(10_000, ge=1)
    seed: int = Field(0, ge=0)
    output_path: Optional[str] = None

    # psd / zplane uncertainty
    eps: int = Field(0, ge=0)
    delta: int = Field(0, ge=0)
    false_alarms: int = Field(0, ge=0)
    n_fft: int = Field(512, ge=1)

    rho_step: float = Field(0.05, gt=0, le=1)
    kappa_list: List[int] = Field(default_factory=lambda: [0, 4, 8, 12], min_length=1)
    ideal_receiver: bool = False
    raw: bool = False
    reg: float = Field(1e-3, ge=0)

    @field_validator("Q_list")
    @classmethod
    def check_block_lengths(cls, v):
        if any(q < 1 for q in v):
            raise ValueError("block lengths must be >= 1")
        return v

    @field_validator("P_FA_list")
    @classmethod
    def check_probabilities(cls, v):
        if any(not 0.0 < p < 1.0 for p in v):
            raise ValueError("false-alarm targets must lie in (0, 1)")
        return v

    @field_validator("kappa_list")
    @classmethod
    def check_kappas(cls, v):
        if any(k < 0 for k in v):
            raise ValueError("kappa values must be >= 0")
        return v

    @model_validator(mode="after")
    def check_dimensions(self):
        if self.experiment in (ExperimentName.PSD, ExperimentName.ZPLANE):
            if self.D > self.N:
                raise ValueError(f"D={self.D} exceeds N={self.N}")
            if self.eps + self.delta > self.D:
                raise ValueError("eps + delta exceeds D")
            if self.false_alarms > self.N - self.D:
                raise ValueError("false_alarms exceeds N - D")
            if self.n_fft < self.N:
                raise ValueError("n_fft must be >= N")
        elif self.experiment == ExperimentName.DETECT_PROB:
            if self.K0 + 2 * max(self.kappa_list) > self.N:
                raise ValueError("K0 + 2*max(kappa_list) exceeds N")
        elif self.experiment in PAIRWISE_EXPERIMENTS:
            if self.K0 + self.kappaT + self.kappaR > self.N:
                raise ValueError("K0 + kappaT + kappaR exceeds N")
            if self.epsR > self.kappaR:
                raise ValueError("epsR exceeds kappaR")
        return self

    def uncertainty(self) -> UncertaintySpec:
        return UncertaintySpec(eps=self.eps, delta=self.delta, false_alarms=self.false_alarms)


class TrialRecord(BaseModel):
    experiment: str
    trial: int
    params: Dict[str, Any]
    outcomes: Dict[str, float]


# ============================================
# RUN REGISTRY (API)
# ============================================

class ExperimentInfo(BaseModel):
    name: str
    description: str
    deterministic: bool
    default_trials: int


class ExperimentRunSubmitted(BaseModel):
    run_id: int
    task_id: str
    status: str


class ExperimentRun(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    experiment: str
    status: str
    n_rows: Optional[int] = None
    output_path: Optional[str] = None
    error: Optional[str] = None
    task_id: Optional[str] = None
    created_at: datetime
    finished_at: Optional[datetime] = None
