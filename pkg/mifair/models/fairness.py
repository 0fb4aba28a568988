"""Fairness Data Models.

Fairness notions, model predictions and the metrics report.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigError, ShapeError

SIMPLEX_TOLERANCE = 1e-6


class Notion(str, Enum):
    """Group fairness notion."""
    SP = "SP"
    EO = "EO"
    PE = "PE"
    EODDS = "EOdds"
    OAE = "OAE"


class PairwiseKind(str, Enum):
    """Classical pairwise disparity."""
    SPD = "SPD"
    EOD = "EOD"
    PED = "PED"
    OAE = "OAE"


# Classical counterpart of each notion.
NOTION_BASELINES: Dict[Notion, Tuple[PairwiseKind, ...]] = {
    Notion.SP: (PairwiseKind.SPD,),
    Notion.EO: (PairwiseKind.EOD,),
    Notion.PE: (PairwiseKind.PED,),
    Notion.EODDS: (PairwiseKind.EOD, PairwiseKind.PED),
    Notion.OAE: (PairwiseKind.OAE,),
}


def parse_notion(name: str) -> Notion:
    """Resolve a notion name case-insensitively."""
    for notion in Notion:
        if notion.value.lower() == str(name).strip().lower():
            return notion
    raise ConfigError(f"Unknown notion '{name}'; expected one of: {', '.join(n.value for n in Notion)}")


@dataclass(frozen=True)
class FairnessNotion:
    """A fairness notion with its benefit variable settings.
    
    Attributes:
        tag: Which notion
        lambdas: Per-class weights for EOdds (binary: (lambda_0, lambda_1))
        class_index: Conditioning class for multiclass EO/PE
        normalize: Divide by the (conditional) benefit entropy
    """
    tag: Notion = Notion.SP
    lambdas: Optional[Tuple[float, ...]] = None
    class_index: Optional[int] = None
    normalize: bool = False
    
    def __post_init__(self) -> None:
        if not isinstance(self.tag, Notion):
            object.__setattr__(self, "tag", parse_notion(self.tag))
        if self.lambdas is not None:
            lambdas = tuple(float(v) for v in self.lambdas)
            if not lambdas or any(v <= 0 for v in lambdas):
                raise ConfigError("EOdds weights must all be > 0")
            object.__setattr__(self, "lambdas", lambdas)
        if self.class_index is not None and self.class_index < 0:
            raise ConfigError("class_index must be non-negative")
    
    @classmethod
    def from_name(cls, name: str, **kwargs) -> 'FairnessNotion':
        return cls(tag=parse_notion(name), **kwargs)
    
    @property
    def name(self) -> str:
        return self.tag.value
    
    @property
    def baselines(self) -> Tuple[PairwiseKind, ...]:
        return NOTION_BASELINES[self.tag]
    
    def conditions(self, n_classes: int) -> List[Tuple[Optional[int], float]]:
        """(conditioning class, weight) terms the notion sums over.
        
        None as the class means the term is unconditional.
        """
        if self.tag in (Notion.SP, Notion.OAE):
            return [(None, 1.0)]
        if self.tag == Notion.EODDS:
            lambdas = self.lambdas or tuple(1.0 for _ in range(n_classes))
            if len(lambdas) != n_classes:
                raise ConfigError(f"EOdds needs {n_classes} weights, got {len(lambdas)}")
            return [(k, lambdas[k]) for k in range(n_classes)]
        if self.class_index is not None:
            if self.class_index >= n_classes:
                raise ConfigError(f"class_index {self.class_index} outside {n_classes} classes")
            return [(self.class_index, 1.0)]
        if n_classes > 2:
            raise ConfigError(f"{self.name} on {n_classes} classes requires an explicit class_index")
        return [(1 if self.tag == Notion.EO else 0, 1.0)]
    
    def to_dict(self) -> Dict:
        return {
            "tag": self.tag.value,
            "lambdas": list(self.lambdas) if self.lambdas is not None else None,
            "class_index": self.class_index,
            "normalize": self.normalize
        }


@dataclass(frozen=True, eq=False)
class Prediction:
    """Per-row class probabilities and the hard labels they imply.
    
    Hard labels are argmax with ties resolved to the lowest class index.
    """
    probs: np.ndarray
    labels: np.ndarray = field(default=None)
    
    def __post_init__(self) -> None:
        probs = np.array(self.probs, dtype=np.float64)
        if probs.ndim != 2 or probs.shape[1] < 2:
            raise ShapeError(f"Probabilities must be a (rows, classes>=2) matrix, got shape {probs.shape}")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("Probabilities must be finite and within [0, 1]")
        sums = probs.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > SIMPLEX_TOLERANCE)
        if bad.size:
            raise ValueError(f"Probability row {int(bad[0])} sums to {sums[bad[0]]:.9g}, expected 1")
        labels = np.argmax(probs, axis=1).astype(np.int64)
        probs.setflags(write=False)
        labels.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "labels", labels)
    
    @classmethod
    def from_labels(cls, labels: Sequence[int], n_classes: int) -> 'Prediction':
        """One-hot prediction from hard labels."""
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if labels.size and (labels.min() < 0 or labels.max() >= n_classes):
            raise ValueError("Hard labels fall outside the class range")
        return cls(probs=np.eye(n_classes)[labels])
    
    @property
    def size(self) -> int:
        return int(self.probs.shape[0])
    
    @property
    def n_classes(self) -> int:
        return int(self.probs.shape[1])
    
    def as_hard(self) -> 'Prediction':
        """One-hot version of this prediction."""
        return Prediction.from_labels(self.labels, self.n_classes)


@dataclass
class PairwiseEntry:
    """One ordered subgroup pair of a classical disparity table."""
    kind: str
    group_a: str
    group_b: str
    value: Optional[float]
    attrs_differing: int = 1
    
    @property
    def defined(self) -> bool:
        return self.value is not None
    
    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "group_a": self.group_a,
            "group_b": self.group_b,
            "value": self.value,
            "defined": self.defined,
            "attrs_differing": self.attrs_differing
        }


@dataclass
class PairwiseTable:
    """Ordered-pair disparities of one kind over all observed subgroups."""
    kind: str
    group_labels: List[str]
    rates: List[Optional[float]]
    entries: List[PairwiseEntry] = field(default_factory=list)
    
    def value(self, group_a: str, group_b: str) -> Optional[float]:
        for entry in self.entries:
            if entry.group_a == group_a and entry.group_b == group_b:
                return entry.value
        raise KeyError(f"No pair ({group_a}, {group_b}) in {self.kind} table")
    
    def defined_values(self) -> List[float]:
        return [e.value for e in self.entries if e.value is not None]
    
    def max_abs(self) -> Optional[float]:
        values = self.defined_values()
        return max(abs(v) for v in values) if values else None
    
    def to_dict(self) -> Dict:
        return {
            "kind": self.kind,
            "group_labels": self.group_labels,
            "rates": self.rates,
            "entries": [e.to_dict() for e in self.entries]
        }


@dataclass
class IotaValue:
    """MI fairness value for one notion."""
    notion: str
    raw: float
    normalized: Optional[float] = None
    units: str = "nats"
    
    def to_dict(self) -> Dict:
        return {"notion": self.notion, "raw": self.raw, "normalized": self.normalized, "units": self.units}


@dataclass
class MetricsReport:
    """Full fairness/accuracy battery for one prediction set.
    
    Attributes:
        iota: MI value per notion name
        pairwise: Classical pairwise tables per kind name
        ddp: Sum of subgroup deviations from the overall positive rate
        acc_mean: Overall accuracy
        acc_weighted: Unweighted mean of per-subgroup accuracies
        group_labels: Observed subgroups, in index order
        group_counts: N_g per subgroup
    """
    iota: Dict[str, IotaValue] = field(default_factory=dict)
    pairwise: Dict[str, PairwiseTable] = field(default_factory=dict)
    ddp: Optional[float] = None
    acc_mean: float = 0.0
    acc_weighted: float = 0.0
    group_labels: List[str] = field(default_factory=list)
    group_counts: List[int] = field(default_factory=list)
    
    def verdict(self, threshold: float, kinds: Optional[Iterable[str]] = None) -> bool:
        """True when every defined |pairwise| entry of `kinds` is <= threshold."""
        selected = list(kinds) if kinds is not None else list(self.pairwise)
        for kind in selected:
            table = self.pairwise.get(kind)
            if table is None:
                continue
            worst = table.max_abs()
            if worst is not None and worst > threshold:
                return False
        return True
    
    def to_records(self) -> List[Dict]:
        """Flat records: one per metric per subgroup pair."""
        records = []
        for name, value in self.iota.items():
            records.append(_record(f"iota_{value.units}", name, "", "", value.raw))
            if value.normalized is not None:
                records.append(_record("iota_normalized", name, "", "", value.normalized))
        for kind, table in self.pairwise.items():
            for entry in table.entries:
                records.append(_record(kind, "", entry.group_a, entry.group_b, entry.value, entry.attrs_differing))
        if self.ddp is not None:
            records.append(_record("DDP", "", "", "", self.ddp))
        records.append(_record("ACC_mean", "", "", "", self.acc_mean))
        records.append(_record("ACC_weighted", "", "", "", self.acc_weighted))
        for label, count in zip(self.group_labels, self.group_counts):
            records.append(_record("N_g", "", label, "", float(count)))
        return records
    
    def to_dict(self) -> Dict:
        return {
            "iota": {k: v.to_dict() for k, v in self.iota.items()},
            "pairwise": {k: t.to_dict() for k, t in self.pairwise.items()},
            "ddp": self.ddp,
            "acc_mean": self.acc_mean,
            "acc_weighted": self.acc_weighted,
            "group_labels": self.group_labels,
            "group_counts": self.group_counts
        }


def _record(metric: str, notion: str, group_a: str, group_b: str,
            value: Optional[float], attrs_differing: int = 0) -> Dict:
    return {
        "metric": metric,
        "notion": notion,
        "group_a": group_a,
        "group_b": group_b,
        "value": value,
        "defined": value is not None,
        "attrs_differing": attrs_differing
    }
