"""
Configuration loading, seeded Monte Carlo execution and aggregation.

Aggregate tables are long-format pandas DataFrames with the columns
experiment, <params...>, metric, value, ci_low, ci_high, n_trials.
"""

import io
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Optional, Union

import pandas as pd
import yaml
from pydantic import ValidationError

from .config import get_settings
from .errors import ConfigInvalid, EmptyInput, HarnessIOError
from .experiments import get_entry
from .schemas import ExperimentConfig, ExperimentName, TrialRecord
from .utils.stats import mean_interval, wilson_interval

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
AGG_COLUMNS = ["metric", "value", "ci_low", "ci_high", "n_trials"]


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    table: pd.DataFrame
    records: list
    elapsed: float
    output_path: Optional[str] = None
    raw_path: Optional[str] = None

    @property
    def n_rows(self) -> int:
        return len(self.table)

    def to_csv(self) -> str:
        return table_to_csv(self.table)

    def raw_frame(self) -> pd.DataFrame:
        return records_frame(self.records)


# ============================================
# CONFIGURATION
# ============================================

def _validation_message(exc: ValidationError) -> str:
    return "; ".join(
        f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in exc.errors()
    )


def validate_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigInvalid(_validation_message(exc))


def parse_config_text(text: Union[str, bytes]) -> dict:
    """Flat YAML mapping of ExperimentConfig fields."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigInvalid(f"unreadable config: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigInvalid("config must be a key-value mapping")
    return data


def load_config(path: Optional[Union[str, Path]] = None, **overrides: Any) -> ExperimentConfig:
    """Read a config file (if any) and apply non-None overrides on top of it."""
    data: dict = {}
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise HarnessIOError(f"cannot read config {path}: {exc}")
        data = parse_config_text(text)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return validate_config(data)


def config_template(experiment: Union[str, ExperimentName]) -> str:
    cfg = ExperimentConfig(experiment=ExperimentName(experiment))
    return yaml.safe_dump(cfg.model_dump(mode="json"), sort_keys=False)


# ============================================
# AGGREGATION
# ============================================

def records_frame(records: Iterable[TrialRecord]) -> pd.DataFrame:
    rows = [{"experiment": r.experiment, "trial": r.trial, **r.params, **r.outcomes} for r in records]
    return pd.DataFrame(rows)


def _rate_row(keys: dict, metric: str, successes: float, n: float, n_trials: int) -> dict:
    n = int(n)
    value = successes / n if n else float("nan")
    low, high = wilson_interval(int(successes), n)
    return {**keys, "metric": metric, "value": value, "ci_low": low, "ci_high": high, "n_trials": n_trials}


def _mean_row(keys: dict, metric: str, values, n_trials: int) -> dict:
    mean, low, high = mean_interval(values)
    return {**keys, "metric": metric, "value": mean, "ci_low": low, "ci_high": high, "n_trials": n_trials}


def _grouped(df: pd.DataFrame, by: list[str]):
    for key, group in df.groupby(by, sort=False):
        key = key if isinstance(key, tuple) else (key,)
        yield dict(zip(by, key)), group


def _frame(records) -> pd.DataFrame:
    df = records if isinstance(records, pd.DataFrame) else records_frame(records)
    if df.empty:
        raise EmptyInput("no trial records to aggregate")
    return df


def aggregate_roc(records) -> pd.DataFrame:
    """
    P_D, P_MD = 1 − P_D and the empirical P_FA per parameter tuple, pooled
    over trials and dimensions, with Wilson intervals.
    """
    df = _frame(records)
    by = [c for c in ("experiment", "scheme", "Ep_over_N0", "Q", "P_FA") if c in df.columns]
    rows = []
    for keys, g in _grouped(df, by):
        n_trials = g["trial"].nunique()
        d, n_eff = g["detected"].sum(), g["n_effective"].sum()
        fa, n_exc = g["false_alarms"].sum(), g["n_excess"].sum()
        p_d = _rate_row(keys, "p_d", d, n_eff, n_trials)
        p_md = _rate_row(keys, "p_md", n_eff - d, n_eff, n_trials)
        rows += [p_d, p_md, _rate_row(keys, "p_fa", fa, n_exc, n_trials)]
        if "waveform_detected" in g:
            rows.append(_rate_row(keys, "p_waveform", g["waveform_detected"].sum(), len(g), n_trials))
    return pd.DataFrame(rows)


def aggregate_detection(records) -> pd.DataFrame:
    df = _frame(records)
    rows = [
        _rate_row(keys, "p_detect", g["detected"].sum(), len(g), g["trial"].nunique())
        for keys, g in _grouped(df, ["experiment", "kappa", "gamma_unc_db", "Ep_over_N0", "Q"])
    ]
    return pd.DataFrame(rows)


def aggregate_dof_count(records) -> pd.DataFrame:
    df = _frame(records)
    rows = []
    for keys, g in _grouped(df, ["experiment", "scheme", "Ep_over_N0", "Q", "P_FA"]):
        n_trials = g["trial"].nunique()
        rows.append(_mean_row(keys, "identified_effective", g["detected"], n_trials))
        rows.append(_mean_row(keys, "identified_total", g["identified"], n_trials))
    return pd.DataFrame(rows)


def aggregate_chordal(records) -> pd.DataFrame:
    df = _frame(records)
    rows = [
        _mean_row(keys, "chordal_normalized", g["chordal"], g["trial"].nunique())
        for keys, g in _grouped(df, ["experiment", "scheme", "Ep_over_N0", "Q", "P_FA"])
    ]
    return pd.DataFrame(rows)


AGGREGATORS = {
    ExperimentName.DETECT_PROB: aggregate_detection,
    ExperimentName.ROC_RX: aggregate_roc,
    ExperimentName.PMD_VS_SNR: aggregate_roc,
    ExperimentName.CROC_NONCOOP: aggregate_roc,
    ExperimentName.CROC_COOP: aggregate_roc,
    ExperimentName.DOF_COUNT_TX: aggregate_dof_count,
    ExperimentName.CHORDAL: aggregate_chordal,
}


# ============================================
# EXECUTION
# ============================================

def run_trials(cfg: ExperimentConfig, threads: Optional[int] = None) -> list[TrialRecord]:
    """Every trial of a Monte Carlo experiment, in trial order whatever the completion order."""
    kernel = get_entry(cfg.experiment).kernel
    workers = threads or get_settings().threads
    if workers == 1:
        batches = [kernel(cfg, t) for t in range(cfg.trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(lambda t: kernel(cfg, t), range(cfg.trials)))
    return [r for batch in batches for r in batch]


def table_to_csv(table: pd.DataFrame) -> str:
    buf = io.StringIO()
    table.to_csv(buf, index=False, float_format=FLOAT_FORMAT)
    return buf.getvalue()


def _write(text: str, path: Union[str, Path]) -> str:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise HarnessIOError(f"cannot write {path}: {exc}")
    return str(path)


def raw_path_for(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(f"{path.stem}.raw{path.suffix or '.csv'}")


def run_experiment(cfg: ExperimentConfig, threads: Optional[int] = None, write: bool = True) -> ExperimentResult:
    """
    Run one experiment. Output is a deterministic function of the config:
    trial t draws from its own stream derived from (seed, t).
    """
    entry = get_entry(cfg.experiment)
    start = time.perf_counter()
    logger.info(f"Starting {cfg.experiment.value} ({'deterministic' if entry.deterministic else f'{cfg.trials} trials'})")

    if entry.deterministic:
        records: list = []
        table = pd.DataFrame(entry.builder(cfg))
        if table.empty:
            table = pd.DataFrame(columns=["experiment", *AGG_COLUMNS])
    else:
        records = run_trials(cfg, threads)
        table = AGGREGATORS[cfg.experiment](records)

    result = ExperimentResult(config=cfg, table=table, records=records, elapsed=time.perf_counter() - start)
    if write and cfg.output_path:
        result.output_path = _write(table_to_csv(table), cfg.output_path)
        if cfg.raw and records:
            result.raw_path = _write(table_to_csv(result.raw_frame()), raw_path_for(cfg.output_path))

    logger.info(f"Finished {cfg.experiment.value}: {result.n_rows} rows in {result.elapsed:.2f}s")
    return result
