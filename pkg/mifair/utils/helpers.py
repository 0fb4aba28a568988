"""Helper Utilities.

Common helper functions for MIFair commands and reports.
"""

import asyncio
import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Awaitable, List, Optional, Union

import numpy as np


def run_async(coro: Awaitable) -> Any:
    """Run async function in sync context."""
    loop = asyncio.new_event_loop()
    asyncio.set_event_loop(loop)
    try:
        return loop.run_until_complete(coro)
    finally:
        asyncio.set_event_loop(None)
        loop.close()


def format_timestamp(
    timestamp: Optional[float] = None,
    format_string: str = "%Y-%m-%dT%H:%M:%SZ"
) -> str:
    """Format a timestamp as a UTC string.
    
    Args:
        timestamp: Unix timestamp (defaults to current time)
        format_string: strftime format string
        
    Returns:
        Formatted timestamp string
    """
    if timestamp is None:
        dt = datetime.now(timezone.utc)
    else:
        dt = datetime.fromtimestamp(timestamp, tz=timezone.utc)
    return dt.strftime(format_string)


def file_digest(path: Union[str, Path]) -> str:
    """SHA-256 of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def log_grid(low_exponent: float, high_exponent: float, points: int) -> List[float]:
    """Exponentially spaced values 10**low .. 10**high.
    
    Args:
        low_exponent: log10 of the first value
        high_exponent: log10 of the last value
        points: Number of values
        
    Returns:
        List of floats
    """
    if points < 1:
        raise ValueError("points must be >= 1")
    if points == 1:
        return [float(10.0 ** low_exponent)]
    return [float(v) for v in np.logspace(low_exponent, high_exponent, points)]
