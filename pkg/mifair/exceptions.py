"""MIFair Exceptions.

Typed errors raised by the data, estimation, training and experiment layers.
The CLI maps them onto its exit-code contract.
"""

from typing import Any, Optional


class MIFairError(Exception):
    """Base class for all MIFair errors."""


class SchemaError(MIFairError, ValueError):
    """A declared column is missing or the schema itself is malformed."""


class DataValueError(MIFairError, ValueError):
    """A cell holds a value outside its declared categories."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        self.row = row
        self.column = column
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class EmptyDataError(MIFairError, ValueError):
    """No rows left after filtering, or an empty split."""


class ConfigError(MIFairError, ValueError):
    """Invalid configuration document or parameter."""

    def __init__(self, message: str, errors: Optional[list] = None):
        self.errors = list(errors or [])
        if self.errors:
            message = f"{message}: " + "; ".join(self.errors)
        super().__init__(message)


class ShapeError(MIFairError, ValueError):
    """Array shapes do not chain or align."""


class AlignmentError(MIFairError, ValueError):
    """Predictions and data rows are not aligned."""


class EmptyConditionError(MIFairError, ValueError):
    """A conditional quantity selected zero rows."""

    def __init__(self, condition: str):
        self.condition = condition
        super().__init__(f"no rows satisfy condition {condition}")


class CoverageError(MIFairError, RuntimeError):
    """A training batch lacks a condition set or a subgroup."""

    def __init__(self, missing: str):
        self.missing = missing
        super().__init__(f"batch coverage violated: {missing}")


class DivergenceError(MIFairError, RuntimeError):
    """Training produced a non-finite objective."""

    def __init__(self, message: str, trace: Any = None):
        self.trace = trace
        super().__init__(message)
