"""Verification Data Models.

Oracle comparisons, finite-difference results and fairness witnesses.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .dataset import Dataset
from .fairness import Prediction


@dataclass
class OracleResult:
    """A value checked against an independent target."""
    name: str
    value: float
    target: float
    abs_error: float
    rel_error: float
    tolerance: float
    passed: bool
    
    @classmethod
    def compare(cls, name: str, value: float, target: float, tolerance: float,
                relative: bool = False) -> 'OracleResult':
        """Build a result; `relative` gates on relative instead of absolute error."""
        abs_error = abs(float(value) - float(target))
        rel_error = abs_error / max(abs(float(target)), abs(float(value)), 1e-300)
        if abs_error == 0.0:
            rel_error = 0.0
        error = rel_error if relative else abs_error
        passed = math.isfinite(error) and error <= tolerance
        return cls(
            name=name,
            value=float(value),
            target=float(target),
            abs_error=abs_error,
            rel_error=rel_error,
            tolerance=tolerance,
            passed=passed
        )
    
    @classmethod
    def exceeds(cls, name: str, value: float, floor: float) -> 'OracleResult':
        """Passes when `value` is strictly above `floor`."""
        value = float(value)
        shortfall = max(floor - value, 0.0)
        return cls(
            name=name,
            value=value,
            target=floor,
            abs_error=shortfall,
            rel_error=shortfall / floor if floor > 0 else shortfall,
            tolerance=0.0,
            passed=math.isfinite(value) and value > floor
        )

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "value": self.value,
            "target": self.target,
            "abs_error": self.abs_error,
            "rel_error": self.rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed
        }


@dataclass(eq=False)
class FiniteDiffResult:
    """Central-difference gradient with coordinates that could not be evaluated."""
    gradient: np.ndarray
    step: float
    flagged: List[int] = field(default_factory=list)


@dataclass(eq=False)
class Witness:
    """Dataset and hard predictions meeting a notion with zero gap."""
    dataset: Dataset
    prediction: Prediction
    notion: str
    rows_per_group: int
    requested_rows_per_group: Optional[int] = None
    
    @property
    def adjusted(self) -> bool:
        return self.requested_rows_per_group is not None and self.requested_rows_per_group != self.rows_per_group


@dataclass
class BatteryResult:
    """A named group of oracle checks."""
    name: str
    checks: List[OracleResult] = field(default_factory=list)
    
    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)
    
    @property
    def failures(self) -> List[OracleResult]:
        return [c for c in self.checks if not c.passed]


@dataclass
class SelfCheckSummary:
    """Outcome of all selfcheck batteries."""
    batteries: List[BatteryResult] = field(default_factory=list)
    
    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.batteries)
    
    def lines(self) -> List[str]:
        out = []
        for battery in self.batteries:
            status = "PASS" if battery.passed else "FAIL"
            out.append(f"{status} {battery.name}: {len(battery.checks) - len(battery.failures)}/{len(battery.checks)} checks")
            for failure in battery.failures:
                out.append(
                    f"  - {failure.name}: value={failure.value:.6g} target={failure.target:.6g} "
                    f"abs_err={failure.abs_error:.3g} rel_err={failure.rel_error:.3g} tol={failure.tolerance:.3g}"
                )
        return out
