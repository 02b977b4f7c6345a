import os
import sys
from pathlib import Path

from loguru import logger

# Base directory for aesanet logs
AESANET_HOME = Path(os.getenv("AESANET_HOME", str(Path.home() / ".aesanet")))

# Logging configuration
LOG_LEVEL = os.getenv("AESANET_LOG_LEVEL", "INFO")
LOG_FORMAT = "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>"

# Global seed override (a --seed flag takes precedence)
SEED_ENV_VAR = "AESANET_SEED"

# Audio and frontend defaults
TARGET_SAMPLE_RATE = 16000
FRAME_SAMPLES = 320

# Perceptual axes in model output order
AXES = ("PQ", "PC", "CE", "CU")
DOMAINS = ("speech", "music", "audio")


def setup_logging(log_file: Path | None = None):
    """Configure loguru logging - console, plus an optional debug file."""
    logger.remove()  # Remove default handler

    logger.add(sys.stderr, format=LOG_FORMAT, level=LOG_LEVEL)

    if log_file is None:
        AESANET_HOME.mkdir(parents=True, exist_ok=True)
        log_file = AESANET_HOME / "aesanet.log"
    else:
        log_file.parent.mkdir(parents=True, exist_ok=True)

    logger.add(
        log_file,
        format=LOG_FORMAT,
        level="DEBUG",
        rotation="10 MB",
        retention="1 week",
        compression="zip"
    )


def setup_run_logging(run_dir: Path, run_id: str) -> int:
    """Attach a per-run log file; returns the handler id so callers can detach it."""
    run_log_file = run_dir / "train.log"
    run_log_file.parent.mkdir(parents=True, exist_ok=True)

    return logger.add(
        run_log_file,
        format=f"{{time:YYYY-MM-DD HH:mm:ss}} | {{level: <8}} | [{run_id}] - {{message}}",
        level="DEBUG",
        rotation="5 MB",
        retention="1 week",
    )


def resolve_seed(flag_seed: int | None, default: int = 0) -> int:
    """Pick the seed: explicit flag, then AESANET_SEED, then the default."""
    if flag_seed is not None:
        return flag_seed
    env_seed = os.getenv(SEED_ENV_VAR)
    if env_seed is not None and env_seed.strip():
        try:
            return int(env_seed)
        except ValueError:
            from .errors import ConfigError
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env_seed!r}")
    return default
