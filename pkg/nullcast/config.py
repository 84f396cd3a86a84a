# ============================================
# ENVIRONMENT CONFIGURATION
# ============================================

import os
from dataclasses import dataclass

from dotenv import load_dotenv

from .errors import ConfigInvalid

load_dotenv()

DEFAULT_DATABASE_URL = "sqlite:///./nullcast.db"
DEFAULT_BROKER_URL = "redis://localhost:6379/0"


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigInvalid(f"{name} must be an integer, got {raw!r}")
    if value < 1:
        raise ConfigInvalid(f"{name} must be >= 1, got {value}")
    return value


@dataclass(frozen=True)
class Settings:
    threads: int
    database_url: str
    broker_url: str
    result_backend: str
    output_dir: str
    log_level: str


def get_settings() -> Settings:
    """
    Read settings from the environment (and `.env`).

    Called on demand rather than cached so tests and the CLI can change
    NULLCAST_THREADS between runs.
    """
    broker = os.getenv("NULLCAST_BROKER_URL", DEFAULT_BROKER_URL)
    return Settings(
        threads=_int_env("NULLCAST_THREADS", os.cpu_count() or 1),
        database_url=os.getenv("NULLCAST_DATABASE_URL", DEFAULT_DATABASE_URL),
        broker_url=broker,
        result_backend=os.getenv("NULLCAST_RESULT_BACKEND", broker),
        output_dir=os.getenv("NULLCAST_OUTPUT_DIR", "./results"),
        log_level=os.getenv("NULLCAST_LOG_LEVEL", "INFO").upper(),
    )
