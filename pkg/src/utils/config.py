"""
Runtime configuration.

Defaults come from the environment, optionally populated from a ``.env``
file in the working directory.
"""
import logging
import os
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

load_dotenv()

TOOL_NAME = "ensemble-aqc"
TOOL_VERSION = "1.0.0"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"⚠️  Ignoring non-integer {name}={raw!r}, using {default}")
        return default


class Settings:
    """Environment-backed defaults shared by every module."""

    def __init__(self):
        self.output_dir = Path(os.getenv("ENSEMBLE_AQC_OUTPUT_DIR", "results"))
        # dense diagonalization below this dimension, iterative above
        self.dense_cap = _env_int("ENSEMBLE_AQC_DENSE_CAP", 4096)
        # 2^M corner enumeration limit
        self.enum_guard = _env_int("ENSEMBLE_AQC_ENUM_GUARD", 24)
        # total physical qubits N*M for individual dephasing
        self.fullspace_guard = _env_int("ENSEMBLE_AQC_FULLSPACE_GUARD", 12)
        self.n_jobs = _env_int("ENSEMBLE_AQC_N_JOBS", -1)


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get or create the global Settings instance."""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


def reset_settings() -> None:
    """Drop the cached settings so the environment is read again."""
    global _settings
    _settings = None
