"""Utility functions and helpers."""

from .async_helpers import gather_with_concurrency
from .config import AESANET_HOME, AXES, DOMAINS, resolve_seed, setup_logging, setup_run_logging
from .helpers import format_duration, generate_run_id, utc_timestamp

__all__ = [
    "AESANET_HOME",
    "AXES",
    "DOMAINS",
    "format_duration",
    "gather_with_concurrency",
    "generate_run_id",
    "resolve_seed",
    "setup_logging",
    "setup_run_logging",
    "utc_timestamp",
]
