"""Metrics Engine.

MI fairness values per notion, classical pairwise disparities, DDP and
accuracies for one set of predictions.
"""

import logging
import weakref
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..exceptions import AlignmentError, ConfigError, EmptyConditionError, ShapeError
from ..models import (
    Dataset, FairnessNotion, IotaValue, MetricsReport, Notion, PairwiseEntry,
    PairwiseKind, PairwiseTable, Prediction, SubgroupIndex
)
from .data_loader import enumerate_subgroups
from .estimation_engine import entropy, joint_soft, mutual_information, to_units

logger = logging.getLogger(__name__)

POSITIVE_CLASS = 1
NEGATIVE_CLASS = 0
ENTROPY_FLOOR = 1e-12
ALL_NOTIONS = tuple(n.value for n in Notion)
REPORT_COLUMNS = ["metric", "notion", "group_a", "group_b", "value", "defined", "attrs_differing"]

NotionLike = Union[FairnessNotion, Notion, str]


def _as_notion(notion: NotionLike) -> FairnessNotion:
    if isinstance(notion, FairnessNotion):
        return notion
    return FairnessNotion.from_name(notion.value if isinstance(notion, Notion) else notion)


def _check_aligned(pred: Prediction, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    if labels.size != pred.size:
        raise AlignmentError(f"{pred.size} prediction rows for {labels.size} data rows")
    if labels.size and labels.max() >= pred.n_classes:
        raise AlignmentError(f"labels reach class {int(labels.max())} but predictions cover {pred.n_classes} classes")
    return labels


def benefit_distribution(
    notion: NotionLike,
    pred: Prediction,
    labels: Sequence[int],
    class_index: Optional[int] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-row benefit probabilities and the rows the notion conditions on.

    SP and the conditional notions use the class probabilities as the benefit;
    OAE uses the binary benefit 1{Y_hat = Y} with p(B=1) = p(Y_hat = y).

    Returns:
        (benefit probabilities, boolean condition mask)
    """
    notion = _as_notion(notion)
    labels = _check_aligned(pred, labels)
    everyone = np.ones(labels.size, dtype=bool)

    if notion.tag == Notion.OAE:
        hit = pred.probs[np.arange(labels.size), labels]
        return np.column_stack([1.0 - hit, hit]), everyone
    if notion.tag == Notion.SP:
        return np.array(pred.probs), everyone

    if class_index is None:
        conditions = notion.conditions(pred.n_classes)
        if len(conditions) != 1:
            raise ConfigError(f"{notion.name} sums several conditions; pass class_index for one of them")
        class_index = conditions[0][0]
    if not (0 <= class_index < pred.n_classes):
        raise ConfigError(f"class_index {class_index} outside {pred.n_classes} classes")
    return np.array(pred.probs), labels == class_index


def _iota_terms(
    notion: FairnessNotion,
    ds: Dataset,
    pred: Prediction,
    subgroups: SubgroupIndex
) -> Tuple[float, Optional[float]]:
    """Raw iota in nats and its entropy-normalized counterpart."""
    raw = 0.0
    normalized_sum, weight_sum = 0.0, 0.0
    for class_index, weight in notion.conditions(pred.n_classes):
        probs, mask = benefit_distribution(notion, pred, ds.labels, class_index)
        if not mask.any():
            raise EmptyConditionError(f"Y={ds.class_names[class_index]}")
        joint = joint_soft(subgroups.row_groups[mask], probs[mask], subgroups.n_groups)
        mi = mutual_information(joint)
        raw += weight * mi
        h = entropy(joint.benefit_marginal)
        if h > ENTROPY_FLOOR:
            normalized_sum += weight * min(mi / h, 1.0)
            weight_sum += weight
    normalized = normalized_sum / weight_sum if weight_sum > 0 else None
    return raw, normalized


def iota(
    notion: NotionLike,
    ds: Dataset,
    pred: Prediction,
    units: str = "nats",
    hard: bool = False,
    subgroups: Optional[SubgroupIndex] = None
) -> float:
    """MI fairness value of `pred` on `ds` under `notion`.

    EOdds sums lambda_k * I(A; Y_hat | Y=k) over classes. With
    `notion.normalize` each term is divided by the matching benefit entropy
    and EOdds takes the lambda-weighted mean of those ratios (0 when every
    entropy vanishes). `hard=True` evaluates one-hot predictions.
    """
    notion = _as_notion(notion)
    _check_aligned(pred, ds.labels)
    if hard:
        pred = pred.as_hard()
    subgroups = subgroups or enumerate_subgroups(ds)
    raw, normalized = _iota_terms(notion, ds, pred, subgroups)
    if notion.normalize:
        return normalized if normalized is not None else 0.0
    return to_units(raw, units)


def _group_rates(
    kind: PairwiseKind,
    ds: Dataset,
    pred: Prediction,
    subgroups: SubgroupIndex
) -> List[Optional[float]]:
    if kind == PairwiseKind.OAE:
        hits = pred.labels == ds.labels
        eligible = np.ones(ds.size, dtype=bool)
    else:
        if pred.n_classes != 2:
            raise ShapeError(f"{kind.value} is defined for binary tasks, got {pred.n_classes} classes")
        hits = pred.labels == POSITIVE_CLASS
        if kind == PairwiseKind.SPD:
            eligible = np.ones(ds.size, dtype=bool)
        elif kind == PairwiseKind.EOD:
            eligible = ds.labels == POSITIVE_CLASS
        else:
            eligible = ds.labels == NEGATIVE_CLASS

    groups = subgroups.row_groups
    denominators = np.bincount(groups[eligible], minlength=subgroups.n_groups)
    numerators = np.bincount(groups[eligible & hits], minlength=subgroups.n_groups)
    return [
        float(numerators[g]) / float(denominators[g]) if denominators[g] > 0 else None
        for g in range(subgroups.n_groups)
    ]


def pairwise_baseline(
    kind: Union[PairwiseKind, str],
    ds: Dataset,
    pred: Prediction,
    subgroups: Optional[SubgroupIndex] = None
) -> PairwiseTable:
    """Hard-label rate differences over all ordered subgroup pairs.

    Pairs where either group has no eligible rows are kept as undefined
    entries rather than zeros.
    """
    kind = PairwiseKind(kind)
    _check_aligned(pred, ds.labels)
    subgroups = subgroups or enumerate_subgroups(ds)
    rates = _group_rates(kind, ds, pred, subgroups)

    entries = []
    for a in range(subgroups.n_groups):
        for b in range(subgroups.n_groups):
            if a == b:
                continue
            defined = rates[a] is not None and rates[b] is not None
            entries.append(PairwiseEntry(
                kind=kind.value,
                group_a=subgroups.labels[a],
                group_b=subgroups.labels[b],
                value=rates[a] - rates[b] if defined else None,
                attrs_differing=subgroups.attrs_differing(a, b)
            ))
    return PairwiseTable(kind=kind.value, group_labels=list(subgroups.labels), rates=rates, entries=entries)


def ddp(ds: Dataset, pred: Prediction, subgroups: Optional[SubgroupIndex] = None) -> float:
    """Sum over subgroups of |P(Y_hat=1 | A=a) - P(Y_hat=1)|."""
    _check_aligned(pred, ds.labels)
    if pred.n_classes != 2:
        raise ShapeError(f"DDP is defined for binary tasks, got {pred.n_classes} classes")
    subgroups = subgroups or enumerate_subgroups(ds)
    positive = (pred.labels == POSITIVE_CLASS).astype(np.float64)
    overall = float(positive.mean())
    rates = np.bincount(subgroups.row_groups, weights=positive, minlength=subgroups.n_groups) / subgroups.counts
    return float(np.abs(rates - overall).sum())


def accuracies(
    ds: Dataset,
    pred: Prediction,
    subgroups: Optional[SubgroupIndex] = None
) -> Tuple[float, float]:
    """(overall accuracy, unweighted mean of per-subgroup accuracies)."""
    labels = _check_aligned(pred, ds.labels)
    subgroups = subgroups or enumerate_subgroups(ds)
    correct = (pred.labels == labels).astype(np.float64)
    per_group = np.bincount(subgroups.row_groups, weights=correct, minlength=subgroups.n_groups)
    observed = subgroups.counts > 0
    return float(correct.mean()), float(np.mean(per_group[observed] / subgroups.counts[observed]))


class MetricsEngine:
    """Full fairness and accuracy battery for a dataset."""

    def __init__(self, config: Optional[Dict] = None):
        """Initialize metrics engine."""
        self.config = config or {
            "units": "nats",
            "normalize": False,
            "hard": False
        }
        self.logger = logging.getLogger(__name__)
        self.subgroup_cache: "weakref.WeakKeyDictionary[Dataset, SubgroupIndex]" = weakref.WeakKeyDictionary()

    def subgroups(self, ds: Dataset) -> SubgroupIndex:
        if ds not in self.subgroup_cache:
            self.subgroup_cache[ds] = enumerate_subgroups(ds)
        return self.subgroup_cache[ds]

    def assess(
        self,
        ds: Dataset,
        pred: Prediction,
        notions: Iterable[NotionLike] = ALL_NOTIONS
    ) -> MetricsReport:
        """Compute every requested iota plus all applicable baselines.

        Notions whose condition set is empty, or that need a class index on a
        multiclass task, are logged and left out of the report.
        """
        _check_aligned(pred, ds.labels)
        units = self.config.get("units", "nats")
        normalize = bool(self.config.get("normalize", False))
        if self.config.get("hard", False):
            pred = pred.as_hard()
        subgroups = self.subgroups(ds)
        report = MetricsReport(
            group_labels=list(subgroups.labels),
            group_counts=[int(c) for c in subgroups.counts]
        )

        for item in notions:
            notion = _as_notion(item)
            try:
                raw, normalized = _iota_terms(notion, ds, pred, subgroups)
            except (EmptyConditionError, ConfigError) as e:
                self.logger.warning(f"Skipping iota_{notion.name}: {e}")
                continue
            report.iota[notion.name] = IotaValue(
                notion=notion.name,
                raw=to_units(raw, units),
                normalized=normalized if normalize else None,
                units=units
            )

        kinds = list(PairwiseKind) if pred.n_classes == 2 else [PairwiseKind.OAE]
        for kind in kinds:
            report.pairwise[kind.value] = pairwise_baseline(kind, ds, pred, subgroups)
        if pred.n_classes == 2:
            report.ddp = ddp(ds, pred, subgroups)
        report.acc_mean, report.acc_weighted = accuracies(ds, pred, subgroups)

        self.logger.info(
            f"Assessed {ds.size} rows over {subgroups.n_groups} subgroups: "
            + ", ".join(f"iota_{k}={v.raw:.6g}" for k, v in report.iota.items())
        )
        return report


def assess(
    ds: Dataset,
    pred: Prediction,
    notions: Iterable[NotionLike] = ALL_NOTIONS,
    units: str = "nats",
    normalize: bool = False,
    hard: bool = False
) -> MetricsReport:
    """Convenience wrapper around `MetricsEngine.assess`."""
    engine = MetricsEngine({"units": units, "normalize": normalize, "hard": hard})
    return engine.assess(ds, pred, notions)


def report_records(report: MetricsReport) -> List[Dict]:
    """Flat records, one per metric per subgroup pair."""
    return report.to_records()


def write_report(report: MetricsReport, path: Union[str, Path]) -> Path:
    """Write the flat records as CSV with a fixed column order."""
    path = Path(path)
    frame = pd.DataFrame(report_records(report), columns=REPORT_COLUMNS)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, float_format="%.12g", lineterminator="\n")
    except OSError as e:
        raise OSError(f"Cannot write metrics report to {path}: {e}") from e
    return path
