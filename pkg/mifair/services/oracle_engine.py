"""Oracle Engine.

Independent reference computations: brute-force MI, central finite
differences and constructive zero-gap fairness witnesses.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from ..config import get_config
from ..models import (
    Dataset, FairnessNotion, FeatureEncoding, FiniteDiffResult, ModelParams,
    Notion, OracleResult, Prediction, Witness
)
from .classifier import backward, cross_entropy, forward, init_params
from .trainer import regularizer

logger = logging.getLogger(__name__)


def mi_bruteforce(joint: Sequence[Sequence[float]]) -> float:
    """I(A; B) of a raw cell table by a direct double loop.

    Marginals and the final sum use exactly rounded `math.fsum`.
    """
    rows = [[float(v) for v in row] for row in np.asarray(joint, dtype=np.float64).tolist()]
    n_cols = len(rows[0]) if rows else 0
    row_sums = [math.fsum(row) for row in rows]
    col_sums = [math.fsum(row[j] for row in rows) for j in range(n_cols)]

    terms = []
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            if cell > 0.0 and row_sums[i] > 0.0 and col_sums[j] > 0.0:
                terms.append(cell * math.log(cell / (row_sums[i] * col_sums[j])))
    return max(math.fsum(terms), 0.0)


def finite_diff(
    objective: Callable[[np.ndarray], float],
    params: np.ndarray,
    step: Optional[float] = None,
    coordinates: Optional[Sequence[int]] = None
) -> FiniteDiffResult:
    """Central-difference gradient of a scalar function of a parameter vector.

    Coordinates where either perturbed evaluation is non-finite are flagged
    and left at 0.
    """
    if step is None:
        step = float(get_config().get("verify.finite_diff_step", 1e-5))
    if step <= 0:
        raise ValueError("finite-difference step must be > 0")
    x = np.array(params, dtype=np.float64).reshape(-1)
    if not math.isfinite(objective(x)):
        raise ValueError("objective is not finite at the base point")

    gradient = np.zeros_like(x)
    flagged = []
    for i in (range(x.size) if coordinates is None else coordinates):
        forward_x, backward_x = x.copy(), x.copy()
        forward_x[i] += step
        backward_x[i] -= step
        upper, lower = objective(forward_x), objective(backward_x)
        if not (math.isfinite(upper) and math.isfinite(lower)):
            flagged.append(int(i))
            continue
        gradient[i] = (upper - lower) / (2.0 * step)
    return FiniteDiffResult(gradient=gradient, step=step, flagged=flagged)


def _relative_gap(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(analytic), initial=0.0)), float(np.max(np.abs(numeric), initial=0.0)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric), initial=0.0)) / scale


def check_gradient(
    name: str,
    objective: Callable[[np.ndarray], float],
    analytic: np.ndarray,
    params: np.ndarray,
    tolerance: float,
    step: Optional[float] = None
) -> OracleResult:
    """Compare an analytic gradient with central differences.

    The error is the max coordinate gap relative to the largest gradient
    entry. Coordinates that fail are re-estimated at half the step; the
    better of the two estimates is kept.
    """
    analytic = np.asarray(analytic, dtype=np.float64).reshape(-1)
    estimate = finite_diff(objective, params, step)
    numeric = estimate.gradient
    scale = max(float(np.max(np.abs(analytic), initial=0.0)), 1e-300)
    failing = [i for i in range(numeric.size) if abs(analytic[i] - numeric[i]) > tolerance * scale]
    failing.extend(i for i in estimate.flagged if i not in failing)
    if failing:
        halved = finite_diff(objective, params, estimate.step / 2.0, coordinates=failing)
        for i in failing:
            if i not in halved.flagged and abs(analytic[i] - halved.gradient[i]) < abs(analytic[i] - numeric[i]):
                numeric[i] = halved.gradient[i]
        logger.debug(f"{name}: re-estimated {len(failing)} coordinates at step {estimate.step / 2.0:g}")
    gap = _relative_gap(analytic, numeric)
    return OracleResult.compare(name, gap, 0.0, tolerance)


def composite_gradient_check(
    notion: FairnessNotion,
    seed: int,
    eta: float = 1.0,
    tolerance: Optional[float] = None
) -> OracleResult:
    """Gradient of mean CE + eta * iota on a random small instance.

    Instances have at most 10 rows, 8 features and 3 classes, two to three
    subgroups and every class present; EO and PE use two classes.
    """
    if tolerance is None:
        tolerance = float(get_config().get("verify.gradient_tolerance", 1e-4))
    rng = np.random.default_rng(seed)
    n_classes = 2 if notion.tag in (Notion.EO, Notion.PE) else int(rng.integers(2, 4))
    n_rows = int(rng.integers(max(6, 2 * n_classes), 11))
    n_features = int(rng.integers(2, 9))
    n_groups = int(rng.integers(2, 4))

    features = rng.normal(size=(n_rows, n_features))
    labels = rng.permutation(np.arange(n_rows) % n_classes)
    group_ids = rng.permutation(np.arange(n_rows) % n_groups)
    hidden = int(rng.integers(3, 6))
    params = init_params((n_features, hidden, n_classes), seed)
    sizes = params.layer_sizes

    def composite(vector: np.ndarray) -> float:
        candidate = ModelParams.from_flat(sizes, vector)
        probs = forward(candidate, features).probs
        value, _ = regularizer(notion, group_ids, labels, probs, n_groups)
        return cross_entropy(probs, labels) + eta * value

    probs = forward(params, features).probs
    _, prob_grad = regularizer(notion, group_ids, labels, probs, n_groups)
    analytic = backward(params, features, labels, prob_grad=eta * prob_grad).flat()
    return check_gradient(
        f"{notion.name} seed={seed} rows={n_rows} classes={n_classes}",
        composite, analytic, params.flat(), tolerance
    )


def _condition_class(notion: FairnessNotion, n_classes: int) -> Optional[int]:
    if notion.tag in (Notion.SP, Notion.OAE):
        return None
    return notion.conditions(n_classes)[-1][0]


def equivalence_witness(
    notion: FairnessNotion,
    n_groups: int,
    n_classes: int,
    seed: int,
    rows_per_group: Optional[int] = None,
    correct_per_class: int = 1
) -> Witness:
    """Hard predictions whose per-group conditional distributions are identical.

    Every group receives the same block of (label, prediction) rows: for each
    true class, `correct_per_class` correct rows and one row predicting each
    other class. The block meets all five notions at once. A requested
    `rows_per_group` is rounded up to a whole number of blocks.
    """
    if n_groups < 2 or n_classes < 2:
        raise ValueError("a witness needs at least 2 groups and 2 classes")
    if correct_per_class < 1:
        raise ValueError("correct_per_class must be >= 1")

    block_labels, block_preds = [], []
    for y in range(n_classes):
        block_labels.extend([y] * correct_per_class)
        block_preds.extend([y] * correct_per_class)
        for other in range(n_classes):
            if other != y:
                block_labels.append(y)
                block_preds.append(other)
    block = len(block_labels)

    repeats = 1 if rows_per_group is None else max(1, -(-int(rows_per_group) // block))
    per_group = repeats * block
    if rows_per_group is not None and per_group != rows_per_group:
        logger.info(f"Witness rows per group raised from {rows_per_group} to {per_group} for exact rates")

    labels = np.tile(np.tile(block_labels, repeats), n_groups)
    preds = np.tile(np.tile(block_preds, repeats), n_groups)
    groups = np.repeat(np.arange(n_groups), per_group)

    rng = np.random.default_rng(seed)
    order = rng.permutation(labels.size)
    features = rng.normal(size=(labels.size, 2))
    dataset = Dataset(
        features=features,
        sensitive=groups[order].reshape(-1, 1),
        labels=labels[order],
        sensitive_names=("group",),
        sensitive_categories=(tuple(f"g{g}" for g in range(n_groups)),),
        class_names=tuple(str(k) for k in range(n_classes)),
        encoding=FeatureEncoding(feature_names=("x0", "x1"))
    )
    return Witness(
        dataset=dataset,
        prediction=Prediction.from_labels(preds[order], n_classes),
        notion=notion.name,
        rows_per_group=per_group,
        requested_rows_per_group=rows_per_group
    )


def perturb_witness(witness: Witness, notion: Optional[FairnessNotion] = None) -> Tuple[Dataset, Prediction]:
    """Flip one correct prediction of the first group inside the notion's condition set."""
    notion = notion or FairnessNotion.from_name(witness.notion)
    ds, pred = witness.dataset, witness.prediction
    condition = _condition_class(notion, pred.n_classes)
    hard = pred.labels
    candidates = np.flatnonzero(
        (ds.sensitive[:, 0] == 0)
        & (hard == ds.labels)
        & (np.ones(ds.size, dtype=bool) if condition is None else ds.labels == condition)
    )
    row = int(candidates[0])
    flipped = np.array(hard)
    flipped[row] = (flipped[row] + 1) % pred.n_classes
    return ds, Prediction.from_labels(flipped, pred.n_classes)
