"""Empirical Distribution Data Models.

Plug-in joint and marginal tables over (subgroup, benefit) cells.
"""

from dataclasses import dataclass
from typing import Dict

import numpy as np

from ..exceptions import ShapeError

TABLE_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class EmpiricalJoint:
    """Plug-in distribution P~_{A,B} with its marginals.
    
    Attributes:
        joint: |G| x |B| table of non-negative cell masses summing to 1
        group_marginal: P~_A, the row sums
        benefit_marginal: P~_B, the column sums
        n_samples: Number of rows the table was estimated from
    """
    joint: np.ndarray
    group_marginal: np.ndarray
    benefit_marginal: np.ndarray
    n_samples: int
    
    def __post_init__(self) -> None:
        joint = np.array(self.joint, dtype=np.float64)
        p_a = np.array(self.group_marginal, dtype=np.float64).reshape(-1)
        p_b = np.array(self.benefit_marginal, dtype=np.float64).reshape(-1)
        
        if joint.ndim != 2 or joint.shape != (p_a.size, p_b.size):
            raise ShapeError(f"Joint of shape {joint.shape} does not match marginals ({p_a.size}, {p_b.size})")
        if np.any(joint < 0) or np.any(p_a < 0) or np.any(p_b < 0):
            raise ValueError("Distribution entries must be non-negative")
        if abs(joint.sum() - 1.0) > TABLE_TOLERANCE:
            raise ValueError(f"Joint table sums to {joint.sum():.15g}, expected 1")
        if np.max(np.abs(joint.sum(axis=1) - p_a)) > TABLE_TOLERANCE:
            raise ValueError("Row sums of the joint differ from the group marginal")
        if np.max(np.abs(joint.sum(axis=0) - p_b)) > TABLE_TOLERANCE:
            raise ValueError("Column sums of the joint differ from the benefit marginal")
        
        for name, value in (("joint", joint), ("group_marginal", p_a), ("benefit_marginal", p_b)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
    
    @classmethod
    def from_table(cls, table: np.ndarray, n_samples: int = 0) -> 'EmpiricalJoint':
        """Build from a raw cell table, deriving both marginals from it."""
        table = np.asarray(table, dtype=np.float64)
        return cls(
            joint=table,
            group_marginal=table.sum(axis=1),
            benefit_marginal=table.sum(axis=0),
            n_samples=n_samples
        )
    
    @property
    def shape(self) -> tuple:
        return self.joint.shape
    
    def to_dict(self) -> Dict:
        return {
            "joint": self.joint.tolist(),
            "group_marginal": self.group_marginal.tolist(),
            "benefit_marginal": self.benefit_marginal.tolist(),
            "n_samples": self.n_samples
        }
