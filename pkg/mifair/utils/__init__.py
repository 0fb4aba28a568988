"""MIFair Utilities Package.

Common validators and helpers.
"""

from .validators import (
    validate_schema, validate_synth_config,
    validate_train_config, validate_sweep_config
)
from .helpers import run_async, format_timestamp, file_digest, log_grid

__all__ = [
    "validate_schema",
    "validate_synth_config",
    "validate_train_config",
    "validate_sweep_config",
    "run_async",
    "format_timestamp",
    "file_digest",
    "log_grid",
]
