import random
import string
from datetime import datetime, timezone

UTC = timezone.utc


def generate_run_id(prefix: str = "run-") -> str:
    """Generate a unique identifier for a training run."""
    chars = string.ascii_uppercase + string.digits
    suffix = ''.join(random.SystemRandom().choices(chars, k=8))
    return f"{prefix}{suffix}" if prefix else suffix


def utc_timestamp() -> str:
    """Current time as an ISO-8601 UTC string."""
    return datetime.now(UTC).isoformat()


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human-readable string."""
    seconds = int(seconds)
    if seconds < 60:
        return f"{seconds}s"
    elif seconds < 3600:
        minutes = seconds // 60
        secs = seconds % 60
        return f"{minutes}m {secs}s"
    else:
        hours = seconds // 3600
        minutes = (seconds % 3600) // 60
        return f"{hours}h {minutes}m"
