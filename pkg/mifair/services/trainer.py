"""Trainer Service.

Minimizes mean cross-entropy plus eta times the plug-in MI regularizer with
momentum SGD and L2 weight decay.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..config import get_config
from ..exceptions import CoverageError, DivergenceError, EmptyConditionError, MIFairError
from ..models import (
    CoveragePolicy, Dataset, EpochRecord, FairnessNotion, ModelParams, Notion,
    TrainConfig, TrainTrace
)
from .classifier import backward, cross_entropy, forward, init_params
from .data_loader import enumerate_subgroups
from .estimation_engine import joint_soft, mutual_information
from .metrics_engine import ALL_NOTIONS, MetricsEngine

logger = logging.getLogger(__name__)

LOG_EVERY_FRACTION = 10


def _condition_rows(notion: FairnessNotion, labels: np.ndarray, n_classes: int):
    """(label, weight, row mask) per term of the notion."""
    for class_index, weight in notion.conditions(n_classes):
        if class_index is None:
            yield None, weight, np.ones(labels.size, dtype=bool)
        else:
            yield class_index, weight, labels == class_index


def _benefit(notion: FairnessNotion, probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    if notion.tag == Notion.OAE:
        hit = probs[np.arange(labels.size), labels]
        return np.column_stack([1.0 - hit, hit])
    return probs


def _mi_gradient(group_ids: np.ndarray, benefit: np.ndarray, n_groups: int) -> np.ndarray:
    """d I / d q_d(b) = (1/M) log(P(a_d, b) / (P(a_d) P(b))), zero on empty cells."""
    m = group_ids.size
    membership = np.zeros((m, n_groups))
    membership[np.arange(m), group_ids] = 1.0
    p_ab = membership.T @ benefit / m
    p_a = np.bincount(group_ids, minlength=n_groups) / m
    p_b = p_ab.sum(axis=0)
    independent = np.outer(p_a, p_b)
    live = (p_ab > 0) & (independent > 0)
    log_ratio = np.where(
        live, np.log(np.where(live, p_ab, 1.0)) - np.log(np.where(live, independent, 1.0)), 0.0
    )
    return log_ratio[group_ids] / m


def missing_coverage(
    notion: FairnessNotion,
    group_ids: np.ndarray,
    labels: np.ndarray,
    n_classes: int,
    expected_groups: Optional[int] = None,
    class_names: Optional[Sequence[str]] = None,
    group_labels: Optional[Sequence[str]] = None
) -> List[str]:
    """Conditions and subgroups a batch fails to cover."""
    missing = []
    for class_index, _, mask in _condition_rows(notion, labels, n_classes):
        if not mask.any():
            name = class_names[class_index] if class_names else str(class_index)
            missing.append(f"condition Y={name}")
    if expected_groups is not None:
        present = set(np.unique(group_ids).tolist())
        for g in range(expected_groups):
            if g not in present:
                name = group_labels[g] if group_labels else str(g)
                missing.append(f"subgroup {name}")
    return missing


def regularizer(
    notion: FairnessNotion,
    group_ids: Sequence[int],
    labels: Sequence[int],
    probs: np.ndarray,
    num_groups: Optional[int] = None,
    coverage_policy: CoveragePolicy = CoveragePolicy.SKIP
) -> Tuple[float, np.ndarray]:
    """Plug-in iota of a batch and its gradient w.r.t. every probability.

    Group memberships are constants; only the probabilities carry gradient.
    Empty condition sets raise CoverageError under the `error` policy and
    contribute nothing under `skip`.

    Args:
        notion: Fairness notion
        group_ids: Per-row subgroup id
        labels: Per-row class codes
        probs: Batch output probabilities (rows x C)
        num_groups: |G|; defaults to the largest id + 1
        coverage_policy: skip or error

    Returns:
        (value in nats, gradient of the value, shaped like probs)
    """
    group_ids = np.asarray(group_ids, dtype=np.int64).reshape(-1)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    probs = np.asarray(probs, dtype=np.float64)
    n_groups = num_groups if num_groups is not None else int(group_ids.max()) + 1
    policy = CoveragePolicy(coverage_policy)

    value = 0.0
    gradient = np.zeros_like(probs)
    for class_index, weight, mask in _condition_rows(notion, labels, probs.shape[1]):
        if not mask.any():
            if policy == CoveragePolicy.ERROR:
                raise CoverageError(f"condition Y={class_index}")
            continue
        rows = np.flatnonzero(mask)
        benefit = _benefit(notion, probs[rows], labels[rows])
        value += weight * mutual_information(joint_soft(group_ids[rows], benefit, n_groups), epsilon=0.0)
        step = _mi_gradient(group_ids[rows], benefit, n_groups)
        if notion.tag == Notion.OAE:
            # p(B=1) = p(y_d), p(B=0) = 1 - p(y_d)
            gradient[rows, labels[rows]] += weight * (step[:, 1] - step[:, 0])
        else:
            gradient[rows] += weight * step
    return value, gradient


def objective(
    params: ModelParams,
    ds: Dataset,
    cfg: TrainConfig,
    group_ids: Optional[np.ndarray] = None,
    num_groups: Optional[int] = None
) -> Tuple[float, float, float]:
    """(loss, iota, composite objective) of `params` on the full dataset."""
    if group_ids is None:
        subgroups = enumerate_subgroups(ds)
        group_ids, num_groups = subgroups.row_groups, subgroups.n_groups
    probs = forward(params, ds.features).probs
    ce = cross_entropy(probs, ds.labels)
    value, _ = regularizer(cfg.notion, group_ids, ds.labels, probs, num_groups, CoveragePolicy.SKIP)
    decay = 0.5 * cfg.weight_decay * sum(float(np.sum(w * w)) for w in params.weights)
    return ce, value, ce + cfg.eta * value + decay


def _accuracy(params: ModelParams, ds: Dataset) -> float:
    return float(np.mean(forward(params, ds.features).labels == ds.labels))


class Trainer:
    """Momentum SGD on the composite fairness objective."""

    def __init__(self, config: TrainConfig):
        """Initialize trainer."""
        self.config = config
        self.logger = logging.getLogger(__name__)

    def _batches(self, n_rows: int, rng: np.random.Generator) -> List[np.ndarray]:
        if self.config.batch_size is None or self.config.batch_size >= n_rows:
            return [np.arange(n_rows)]
        order = rng.permutation(n_rows)
        return [order[start:start + self.config.batch_size] for start in range(0, n_rows, self.config.batch_size)]

    def _regularize(self, group_ids, labels, probs, n_groups, n_classes, subgroups, class_names):
        """Regularizer gradient for one step, or None when the step is skipped."""
        cfg = self.config
        expected = n_groups if cfg.batch_size is not None else None
        missing = missing_coverage(
            cfg.notion, group_ids, labels, n_classes, expected, class_names, subgroups.labels
        )
        if missing:
            if cfg.coverage_policy == CoveragePolicy.ERROR:
                raise CoverageError(", ".join(missing))
            return None
        _, gradient = regularizer(cfg.notion, group_ids, labels, probs, n_groups, cfg.coverage_policy)
        return cfg.eta * gradient

    def train(
        self,
        ds_train: Dataset,
        ds_eval: Dataset,
        arch: Sequence[int] = (16,)
    ) -> Tuple[ModelParams, TrainTrace]:
        """Train from a seeded initialization for the configured epochs.

        Args:
            ds_train: Training split
            ds_eval: Held-out split, reported per epoch and in the final report
            arch: Hidden layer sizes; () is logistic regression

        Returns:
            (final parameters, per-epoch trace with held-out report)
        """
        cfg = self.config
        if ds_train.n_features != ds_eval.n_features or ds_train.class_names != ds_eval.class_names:
            raise ValueError("train and eval datasets are not schema-compatible")

        subgroups = enumerate_subgroups(ds_train)
        group_ids, n_groups = subgroups.row_groups, subgroups.n_groups
        n_classes = ds_train.n_classes
        cfg.notion.conditions(n_classes)
        sizes = (ds_train.n_features, *[int(h) for h in arch], n_classes)
        params = init_params(sizes, cfg.seed, get_config().get("training.activation", "relu"))
        velocity_w = [np.zeros_like(w) for w in params.weights]
        velocity_b = [np.zeros_like(b) for b in params.biases]
        rng = np.random.default_rng([cfg.seed, 1])
        trace = TrainTrace()

        if cfg.eta > 0 and cfg.batch_size is None and cfg.coverage_policy == CoveragePolicy.ERROR:
            missing = missing_coverage(cfg.notion, group_ids, ds_train.labels, n_classes,
                                       class_names=ds_train.class_names)
            if missing:
                raise CoverageError(", ".join(missing))

        self.logger.info(
            f"Training {cfg.notion.name} eta={cfg.eta:g} seed={cfg.seed} sizes={sizes} "
            f"on {ds_train.size} rows, {n_groups} subgroups"
        )
        log_every = max(1, cfg.epochs // LOG_EVERY_FRACTION)

        for epoch in range(cfg.epochs):
            rate = cfg.learning_rate(epoch)
            skipped = 0
            try:
                for rows in self._batches(ds_train.size, rng):
                    features, labels = ds_train.features[rows], ds_train.labels[rows]
                    prob_grad = None
                    if cfg.eta > 0:
                        probs = forward(params, features).probs
                        prob_grad = self._regularize(
                            group_ids[rows], labels, probs, n_groups, n_classes, subgroups, ds_train.class_names
                        )
                        if prob_grad is None:
                            skipped += 1

                    grads = backward(params, features, labels, prob_grad=prob_grad)
                    weights, biases = [], []
                    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
                        velocity_w[i] = cfg.momentum * velocity_w[i] + grads.weights[i] + cfg.weight_decay * w
                        velocity_b[i] = cfg.momentum * velocity_b[i] + grads.biases[i]
                        weights.append(w - rate * velocity_w[i])
                        biases.append(b - rate * velocity_b[i])
                    if not all(np.all(np.isfinite(w)) for w in weights + biases):
                        raise DivergenceError(f"parameters became non-finite at epoch {epoch}", trace=trace)
                    params = ModelParams(weights=tuple(weights), biases=tuple(biases), activation=params.activation)
                loss_value, iota_value, total = objective(params, ds_train, cfg, group_ids, n_groups)
            except MIFairError:
                raise
            except (ValueError, FloatingPointError) as e:
                raise DivergenceError(f"training diverged at epoch {epoch}: {e}", trace=trace) from e

            if not np.isfinite(total):
                raise DivergenceError(f"objective became non-finite at epoch {epoch}", trace=trace)
            if skipped:
                self.logger.warning(f"Epoch {epoch + 1}: skipped the regularizer on {skipped} batches lacking coverage")

            record = EpochRecord(
                epoch=epoch,
                learning_rate=rate,
                loss=loss_value,
                iota=iota_value,
                objective=total,
                train_acc=_accuracy(params, ds_train),
                eval_acc=_accuracy(params, ds_eval),
                skipped_steps=skipped
            )
            trace.records.append(record)
            if (epoch + 1) % log_every == 0 or epoch + 1 == cfg.epochs:
                self.logger.info(
                    f"Epoch {epoch + 1}/{cfg.epochs} loss={record.loss:.5f} iota={record.iota:.6f} "
                    f"train_acc={record.train_acc:.4f} eval_acc={record.eval_acc:.4f}"
                )

        final = forward(params, ds_eval.features)
        try:
            trace.final_report = MetricsEngine().assess(ds_eval, final, ALL_NOTIONS)
        except EmptyConditionError as e:
            self.logger.warning(f"Final report incomplete: {e}")
        return params, trace


def train(
    ds_train: Dataset,
    ds_eval: Dataset,
    cfg: TrainConfig,
    arch: Sequence[int] = (16,)
) -> Tuple[ModelParams, TrainTrace]:
    """Train one model; see `Trainer.train`."""
    return Trainer(cfg).train(ds_train, ds_eval, arch)
