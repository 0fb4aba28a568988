"""Dataset Data Models.

Declarative schema, encoded datasets, intersectional subgroup indices and
synthetic generator settings.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ConfigError, DataValueError, SchemaError, ShapeError

ANY_VALUE = "*"


class FeatureKind(str, Enum):
    """Non-sensitive feature kind."""
    CONTINUOUS = "continuous"
    CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureColumn:
    """A non-sensitive input column."""
    name: str
    kind: FeatureKind = FeatureKind.CONTINUOUS
    categories: Optional[Tuple[str, ...]] = None
    
    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "kind": self.kind.value,
            "categories": list(self.categories) if self.categories is not None else None
        }


@dataclass(frozen=True)
class CategoricalColumn:
    """A sensitive or label column with an ordered category list."""
    name: str
    categories: Tuple[str, ...]
    
    def to_dict(self) -> Dict:
        return {"name": self.name, "categories": list(self.categories)}


@dataclass(frozen=True)
class BinarizeRule:
    """Two-bucket mapping applied to a source column before coding.
    
    `buckets` maps bucket name to the raw values it absorbs; the value list
    may be the string "*" to take every value not claimed by the other bucket.
    """
    column: str
    buckets: Tuple[Tuple[str, Any], ...]
    
    @property
    def bucket_names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.buckets)
    
    def apply(self, value: str) -> Optional[str]:
        """Map a raw value to its bucket, or None if unclaimed."""
        wildcard = None
        for name, values in self.buckets:
            if values == ANY_VALUE:
                wildcard = name
            elif value in values:
                return name
        return wildcard
    
    def to_dict(self) -> Dict:
        return {name: (values if values == ANY_VALUE else list(values)) for name, values in self.buckets}


@dataclass
class SchemaConfig:
    """Column roles for a tabular dataset.
    
    Attributes:
        features: Non-sensitive input columns
        sensitive: Sensitive columns, in declaration order
        label: Label column with its ordered classes
        binarize: Two-bucket rules applied before coding
        include_sensitive: Append one-hot sensitive codes to the model inputs
    """
    features: List[FeatureColumn]
    sensitive: List[CategoricalColumn]
    label: CategoricalColumn
    binarize: List[BinarizeRule] = field(default_factory=list)
    include_sensitive: bool = False
    
    def __post_init__(self) -> None:
        from ..utils.validators import validate_schema
        is_valid, errors = validate_schema(self)
        if not is_valid:
            raise SchemaError("Invalid schema: " + "; ".join(errors))
    
    @property
    def column_names(self) -> List[str]:
        return [f.name for f in self.features] + [s.name for s in self.sensitive] + [self.label.name]
    
    def to_dict(self) -> Dict:
        return {
            "features": [f.to_dict() for f in self.features],
            "sensitive": [s.to_dict() for s in self.sensitive],
            "label": {"name": self.label.name, "classes": list(self.label.categories)},
            "binarize": {rule.column: rule.to_dict() for rule in self.binarize},
            "include_sensitive": self.include_sensitive
        }
    
    @classmethod
    def from_dict(cls, data: Dict) -> 'SchemaConfig':
        """Build a schema from its declarative `features/sensitive/label/binarize` tree."""
        if not isinstance(data, dict):
            raise SchemaError("Schema must be a mapping")
        for key in ("features", "sensitive", "label"):
            if key not in data:
                raise SchemaError(f"Schema is missing the '{key}' section")
        
        rules = []
        for column, buckets in (data.get("binarize") or {}).items():
            if not isinstance(buckets, dict):
                raise SchemaError(f"Binarize rule for '{column}' must map bucket names to values")
            rules.append(BinarizeRule(
                column=column,
                buckets=tuple(
                    (str(name), values if values == ANY_VALUE else tuple(str(v) for v in values))
                    for name, values in buckets.items()
                )
            ))
        by_column = {rule.column: rule for rule in rules}
        
        features = []
        for item in data["features"]:
            if isinstance(item, str):
                item = {"name": item}
            categories = item.get("categories")
            features.append(FeatureColumn(
                name=item["name"],
                kind=FeatureKind(item.get("kind", "continuous")),
                categories=tuple(str(c) for c in categories) if categories is not None else None
            ))
        
        def categorical(item: Dict, key: str) -> CategoricalColumn:
            categories = item.get(key)
            if categories is None and item["name"] in by_column:
                categories = by_column[item["name"]].bucket_names
            if categories is None:
                raise SchemaError(f"Column '{item['name']}' must declare its {key}")
            return CategoricalColumn(name=item["name"], categories=tuple(str(c) for c in categories))
        
        sensitive = [categorical(item, "categories") for item in data["sensitive"]]
        label = categorical(data["label"], "classes")
        return cls(
            features=features,
            sensitive=sensitive,
            label=label,
            binarize=rules,
            include_sensitive=bool(data.get("include_sensitive", False))
        )


@dataclass(frozen=True)
class FeatureEncoding:
    """How raw columns became the encoded feature matrix.
    
    `continuous` indexes the standardized columns of the matrix; `means` and
    `scales` are the statistics they were standardized with.
    """
    feature_names: Tuple[str, ...]
    continuous: Tuple[int, ...] = ()
    means: Tuple[float, ...] = ()
    scales: Tuple[float, ...] = ()
    
    def to_dict(self) -> Dict:
        return {
            "feature_names": list(self.feature_names),
            "continuous": list(self.continuous),
            "means": list(self.means),
            "scales": list(self.scales)
        }
    
    @classmethod
    def from_dict(cls, data: Dict) -> 'FeatureEncoding':
        return cls(
            feature_names=tuple(data["feature_names"]),
            continuous=tuple(int(i) for i in data.get("continuous", ())),
            means=tuple(float(m) for m in data.get("means", ())),
            scales=tuple(float(s) for s in data.get("scales", ()))
        )


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """Aligned features X, sensitive codes A and label codes Y.
    
    Attributes:
        features: Encoded feature matrix, |D| x m'
        sensitive: Sensitive attribute codes, |D| x k
        labels: Class codes in {0, ..., C-1}
        sensitive_names: Sensitive attribute names
        sensitive_categories: Ordered categories per sensitive attribute
        class_names: Ordered label classes
        encoding: Feature encoding metadata
        row_ids: Source row numbers, carried through splits
    """
    features: np.ndarray
    sensitive: np.ndarray
    labels: np.ndarray
    sensitive_names: Tuple[str, ...]
    sensitive_categories: Tuple[Tuple[str, ...], ...]
    class_names: Tuple[str, ...]
    encoding: Optional[FeatureEncoding] = None
    row_ids: Optional[np.ndarray] = None
    
    def __post_init__(self) -> None:
        features = np.asarray(self.features, dtype=np.float64)
        if features.ndim == 1:
            features = features.reshape(-1, 1)
        sensitive = np.asarray(self.sensitive)
        if sensitive.ndim == 1:
            sensitive = sensitive.reshape(-1, 1)
        labels = np.asarray(self.labels).reshape(-1)
        
        n_rows = features.shape[0]
        if n_rows < 1:
            raise ShapeError("Dataset must contain at least one row")
        if sensitive.shape[0] != n_rows or labels.shape[0] != n_rows:
            raise ShapeError(
                f"Row counts differ: features {n_rows}, sensitive {sensitive.shape[0]}, labels {labels.shape[0]}"
            )
        if sensitive.shape[1] != len(self.sensitive_names) or len(self.sensitive_names) != len(self.sensitive_categories):
            raise ShapeError("Sensitive matrix width must match the declared sensitive attributes")
        if not np.all(np.isfinite(features)):
            raise DataValueError("Encoded features contain non-finite values")
        for j, categories in enumerate(self.sensitive_categories):
            column = sensitive[:, j]
            if column.min() < 0 or column.max() >= len(categories):
                raise DataValueError(f"Sensitive codes of '{self.sensitive_names[j]}' fall outside its categories")
        if labels.min() < 0 or labels.max() >= len(self.class_names):
            raise DataValueError("Label codes fall outside the declared classes")
        
        row_ids = np.arange(n_rows) if self.row_ids is None else np.asarray(self.row_ids)
        encoding = self.encoding or FeatureEncoding(
            feature_names=tuple(f"x{i}" for i in range(features.shape[1]))
        )
        if len(encoding.feature_names) != features.shape[1]:
            raise ShapeError("Encoding feature names must match the feature matrix width")
        
        object.__setattr__(self, "features", _frozen(features, np.float64))
        object.__setattr__(self, "sensitive", _frozen(sensitive, np.int64))
        object.__setattr__(self, "labels", _frozen(labels, np.int64))
        object.__setattr__(self, "row_ids", _frozen(row_ids, np.int64))
        object.__setattr__(self, "encoding", encoding)
        object.__setattr__(self, "sensitive_names", tuple(self.sensitive_names))
        object.__setattr__(self, "sensitive_categories", tuple(tuple(c) for c in self.sensitive_categories))
        object.__setattr__(self, "class_names", tuple(self.class_names))
    
    @property
    def size(self) -> int:
        return int(self.features.shape[0])
    
    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])
    
    @property
    def n_classes(self) -> int:
        return len(self.class_names)
    
    def subset(self, indices: Sequence[int]) -> 'Dataset':
        """Rows at `indices`, in that order."""
        indices = np.asarray(indices, dtype=np.int64)
        return self.replace(
            features=self.features[indices],
            sensitive=self.sensitive[indices],
            labels=self.labels[indices],
            row_ids=self.row_ids[indices]
        )
    
    def replace(self, **changes: Any) -> 'Dataset':
        values = {
            "features": self.features,
            "sensitive": self.sensitive,
            "labels": self.labels,
            "sensitive_names": self.sensitive_names,
            "sensitive_categories": self.sensitive_categories,
            "class_names": self.class_names,
            "encoding": self.encoding,
            "row_ids": self.row_ids
        }
        values.update(changes)
        return Dataset(**values)
    
    def to_dict(self) -> Dict:
        return {
            "rows": self.size,
            "n_features": self.n_features,
            "sensitive_names": list(self.sensitive_names),
            "sensitive_categories": [list(c) for c in self.sensitive_categories],
            "class_names": list(self.class_names),
            "encoding": self.encoding.to_dict()
        }


@dataclass(frozen=True, eq=False)
class SubgroupIndex:
    """Joint sensitive values observed in a dataset.
    
    Attributes:
        groups: Joint attribute codes, lexicographically ordered
        counts: N_g per group
        row_groups: Group id of every row
        labels: Readable group names ("White|Male|In-Family")
    """
    groups: Tuple[Tuple[int, ...], ...]
    counts: np.ndarray
    row_groups: np.ndarray
    labels: Tuple[str, ...]
    
    @property
    def n_groups(self) -> int:
        return len(self.groups)
    
    def attrs_differing(self, i: int, j: int) -> int:
        """Number of sensitive attributes on which groups i and j differ."""
        return sum(1 for a, b in zip(self.groups[i], self.groups[j]) if a != b)
    
    def to_dict(self) -> Dict:
        return {
            "groups": [list(g) for g in self.groups],
            "labels": list(self.labels),
            "counts": [int(c) for c in self.counts]
        }


@dataclass
class SynthGroup:
    """One subgroup of a synthetic population."""
    codes: Tuple[int, ...]
    weight: float
    prevalence: Optional[float] = None
    class_probs: Optional[Tuple[float, ...]] = None
    label_noise: float = 0.0
    
    def distribution(self) -> np.ndarray:
        if self.class_probs is not None:
            return np.asarray(self.class_probs, dtype=np.float64)
        return np.array([1.0 - float(self.prevalence), float(self.prevalence)])


@dataclass
class SynthConfig:
    """Synthetic biased dataset declaration.
    
    Features are Gaussian bundles: a class-dependent centre scaled by
    `class_separation`, plus a group-dependent centre scaled by
    `group_signal`, plus isotropic noise of scale `noise_scale`.
    `label_noise` on a group replaces that fraction of its labels with a
    uniformly drawn different class after features are generated.
    """
    groups: List[SynthGroup]
    n_rows: int
    n_features: int = 4
    noise_scale: float = 1.0
    class_separation: float = 1.0
    group_signal: float = 1.0
    attribute_names: Optional[Tuple[str, ...]] = None
    attribute_categories: Optional[Tuple[Tuple[str, ...], ...]] = None
    class_names: Optional[Tuple[str, ...]] = None
    
    def __post_init__(self) -> None:
        from ..utils.validators import validate_synth_config
        is_valid, errors = validate_synth_config(self)
        if not is_valid:
            raise ConfigError("Invalid synthetic config", errors)
    
    @property
    def n_attributes(self) -> int:
        return len(self.groups[0].codes)
    
    @property
    def n_classes(self) -> int:
        return len(self.groups[0].distribution())
    
    @classmethod
    def from_dict(cls, data: Dict) -> 'SynthConfig':
        groups = [
            SynthGroup(
                codes=tuple(int(c) for c in g["codes"]),
                weight=float(g["weight"]),
                prevalence=g.get("prevalence"),
                class_probs=tuple(g["class_probs"]) if g.get("class_probs") is not None else None,
                label_noise=float(g.get("label_noise", 0.0))
            )
            for g in data.get("groups", [])
        ]
        names = data.get("attribute_names")
        categories = data.get("attribute_categories")
        classes = data.get("class_names")
        return cls(
            groups=groups,
            n_rows=int(data.get("n_rows", 0)),
            n_features=int(data.get("n_features", 4)),
            noise_scale=float(data.get("noise_scale", 1.0)),
            class_separation=float(data.get("class_separation", 1.0)),
            group_signal=float(data.get("group_signal", 1.0)),
            attribute_names=tuple(names) if names else None,
            attribute_categories=tuple(tuple(c) for c in categories) if categories else None,
            class_names=tuple(classes) if classes else None
        )
    
    def to_dict(self) -> Dict:
        return {
            "groups": [
                {
                    "codes": list(g.codes),
                    "weight": g.weight,
                    "prevalence": g.prevalence,
                    "class_probs": list(g.class_probs) if g.class_probs is not None else None,
                    "label_noise": g.label_noise
                }
                for g in self.groups
            ],
            "n_rows": self.n_rows,
            "n_features": self.n_features,
            "noise_scale": self.noise_scale,
            "class_separation": self.class_separation,
            "group_signal": self.group_signal,
            "attribute_names": list(self.attribute_names) if self.attribute_names else None,
            "attribute_categories": [list(c) for c in self.attribute_categories] if self.attribute_categories else None,
            "class_names": list(self.class_names) if self.class_names else None
        }
