"""Estimation Engine.

Plug-in empirical distributions over (subgroup, benefit) cells and the
information quantities computed from them.
"""

import logging
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from ..config import get_config
from ..exceptions import EmptyConditionError, EmptyDataError, ShapeError
from ..models import EmpiricalJoint

logger = logging.getLogger(__name__)

SIMPLEX_TOLERANCE = 1e-6
LN2 = float(np.log(2.0))


def _group_count(group_ids: np.ndarray, num_groups: Optional[int]) -> int:
    needed = int(group_ids.max()) + 1
    if num_groups is None:
        return needed
    if needed > num_groups:
        raise ShapeError(f"group id {needed - 1} outside {num_groups} groups")
    return num_groups


def joint_hard(
    group_ids: Sequence[int],
    benefit: Sequence[int],
    num_benefit_values: int,
    num_groups: Optional[int] = None
) -> EmpiricalJoint:
    """Tally count(a, b) / rows over hard benefit codes.

    Args:
        group_ids: Per-row subgroup id
        benefit: Per-row benefit code
        num_benefit_values: |B|
        num_groups: |G|; defaults to the largest observed id + 1

    Returns:
        EmpiricalJoint over |G| x |B| cells
    """
    group_ids = np.asarray(group_ids, dtype=np.int64).reshape(-1)
    benefit = np.asarray(benefit, dtype=np.int64).reshape(-1)
    if group_ids.size == 0:
        raise EmptyDataError("cannot estimate a joint from zero rows")
    if benefit.shape != group_ids.shape:
        raise ShapeError(f"{group_ids.size} group ids but {benefit.size} benefit codes")
    if benefit.min() < 0 or benefit.max() >= num_benefit_values:
        raise ValueError(f"benefit codes must lie in [0, {num_benefit_values})")

    n_groups = _group_count(group_ids, num_groups)
    counts = np.zeros((n_groups, num_benefit_values))
    np.add.at(counts, (group_ids, benefit), 1.0)
    return EmpiricalJoint.from_table(counts / group_ids.size, n_samples=int(group_ids.size))


def joint_soft(
    group_ids: Sequence[int],
    benefit_probs: np.ndarray,
    num_groups: Optional[int] = None
) -> EmpiricalJoint:
    """P(a, b) = (1/M) sum_d 1{a_d = a} p_d(b).

    One-hot rows reproduce `joint_hard` exactly.
    """
    group_ids = np.asarray(group_ids, dtype=np.int64).reshape(-1)
    probs = np.asarray(benefit_probs, dtype=np.float64)
    if group_ids.size == 0:
        raise EmptyDataError("cannot estimate a joint from zero rows")
    if probs.ndim != 2 or probs.shape[0] != group_ids.size:
        raise ShapeError(f"benefit probabilities of shape {probs.shape} do not match {group_ids.size} rows")

    bad_entries = ~np.isfinite(probs) | (probs < 0) | (probs > 1)
    sums = probs.sum(axis=1)
    bad_rows = np.flatnonzero(bad_entries.any(axis=1) | (np.abs(sums - 1.0) > SIMPLEX_TOLERANCE))
    if bad_rows.size:
        row = int(bad_rows[0])
        raise ValueError(f"benefit probability row {row} is not a distribution: {probs[row].tolist()}")

    n_groups = _group_count(group_ids, num_groups)
    membership = np.zeros((group_ids.size, n_groups))
    membership[np.arange(group_ids.size), group_ids] = 1.0
    table = membership.T @ (probs / sums[:, None])
    return EmpiricalJoint.from_table(table / group_ids.size, n_samples=int(group_ids.size))


def mutual_information(j: EmpiricalJoint, epsilon: Optional[float] = None) -> float:
    """I(A; B) in nats.

    Cells with zero mass or a zero marginal contribute nothing. A positive
    `epsilon` (default from `estimation.epsilon_floor`) adds that mass to every
    cell and renormalizes before estimating.
    """
    if epsilon is None:
        epsilon = float(get_config().get("estimation.epsilon_floor", 0.0) or 0.0)

    table = j.joint
    p_a, p_b = j.group_marginal, j.benefit_marginal
    if epsilon > 0:
        table = (table + epsilon) / (table + epsilon).sum()
        p_a, p_b = table.sum(axis=1), table.sum(axis=0)

    independent = np.outer(p_a, p_b)
    live = (table > 0) & (independent > 0)
    terms = np.where(live, special.rel_entr(np.where(live, table, 0.0), np.where(live, independent, 1.0)), 0.0)
    value = float(terms.sum())

    tolerance = float(get_config().get("estimation.clamp_tolerance", 1e-12))
    if value < 0:
        if value < -tolerance:
            logger.warning(f"Plug-in MI came out at {value:.3e}, below the clamp tolerance")
        return 0.0
    return value


def conditional_mi(
    group_ids: Sequence[int],
    benefit_probs: np.ndarray,
    condition_mask: Sequence[bool],
    num_groups: Optional[int] = None,
    condition: str = "mask"
) -> float:
    """I(A; B | condition) as the MI of the soft joint over the selected rows."""
    mask = np.asarray(condition_mask, dtype=bool).reshape(-1)
    if not mask.any():
        raise EmptyConditionError(condition)
    group_ids = np.asarray(group_ids, dtype=np.int64).reshape(-1)
    return mutual_information(joint_soft(group_ids[mask], np.asarray(benefit_probs)[mask], num_groups))


def entropy(marginal: Sequence[float]) -> float:
    """H(p) in nats with 0 log 0 = 0."""
    p = np.asarray(marginal, dtype=np.float64).reshape(-1)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > SIMPLEX_TOLERANCE:
        raise ValueError(f"entropy needs a probability vector, got {p.tolist()}")
    return float(max(stats.entropy(p), 0.0))


def to_units(nats: float, units: str = "nats") -> float:
    """Convert a value in nats to `units` ("nats" or "bits")."""
    if units == "nats":
        return nats
    if units == "bits":
        return nats / LN2
    raise ValueError(f"Unknown information unit '{units}'")
