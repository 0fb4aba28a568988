"""Data Loader Service.

Ingests tabular CSV files against a declared schema, enumerates
intersectional subgroups, splits datasets and generates synthetic biased
populations.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.model_selection import train_test_split
from sklearn.preprocessing import StandardScaler

from ..exceptions import DataValueError, EmptyDataError, SchemaError
from ..models import (
    Dataset, FeatureEncoding, FeatureKind, SchemaConfig, SubgroupIndex, SynthConfig
)

logger = logging.getLogger(__name__)

MISSING_MARKERS = ["?", ""]
HEADER_LINES = 1


def load_csv(
    path: Union[str, Path],
    schema: SchemaConfig,
    encoding: Optional[FeatureEncoding] = None
) -> Dataset:
    """Load a CSV file into an encoded Dataset.
    
    Rows with a missing value in any declared column are dropped. Categorical
    features are one-hot encoded and continuous features standardized, either
    over the loaded rows or with a reference `encoding` (e.g. a checkpoint's).
    
    Args:
        path: UTF-8, comma-separated file with a header row
        schema: Column roles
        encoding: Optional reference encoding to reproduce
        
    Returns:
        Encoded Dataset; `row_ids` hold source line numbers
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Data file not found: {path}")
    
    frame = pd.read_csv(
        path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8"
    )
    frame.columns = [str(c).strip() for c in frame.columns]
    missing = [c for c in schema.column_names if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing declared columns: {', '.join(missing)}")
    
    frame = frame[schema.column_names].apply(lambda col: col.str.strip())
    # only "?" and blank cells are missing, judged after stripping
    frame = frame.mask(frame.isin(MISSING_MARKERS))
    line_numbers = np.arange(len(frame)) + HEADER_LINES + 1
    
    complete = frame.notna().all(axis=1).to_numpy()
    if not complete.all():
        logger.info(f"Dropping {int((~complete).sum())} of {len(frame)} rows with missing values")
    frame = frame.loc[complete].reset_index(drop=True)
    line_numbers = line_numbers[complete]
    if frame.empty:
        raise EmptyDataError(f"{path}: no rows left after filtering missing values")
    
    for rule in schema.binarize:
        mapped = frame[rule.column].map(rule.apply)
        unclaimed = mapped.isna().to_numpy()
        if unclaimed.any():
            i = int(np.flatnonzero(unclaimed)[0])
            raise DataValueError(
                f"value '{frame[rule.column].iloc[i]}' of '{rule.column}' matches no binarize bucket",
                row=int(line_numbers[i]), column=rule.column
            )
        frame[rule.column] = mapped
    
    sensitive = np.column_stack([
        _codes(frame[col.name], col.categories, col.name, line_numbers) for col in schema.sensitive
    ])
    labels = _codes(frame[schema.label.name], schema.label.categories, schema.label.name, line_numbers)
    
    blocks: List[np.ndarray] = []
    names: List[str] = []
    continuous: List[int] = []
    for feature in schema.features:
        if feature.kind == FeatureKind.CONTINUOUS:
            values = pd.to_numeric(frame[feature.name], errors="coerce").to_numpy(dtype=np.float64)
            bad = ~np.isfinite(values)
            if bad.any():
                i = int(np.flatnonzero(bad)[0])
                raise DataValueError(
                    f"non-numeric value '{frame[feature.name].iloc[i]}' in continuous column '{feature.name}'",
                    row=int(line_numbers[i]), column=feature.name
                )
            continuous.append(len(names))
            names.append(feature.name)
            blocks.append(values.reshape(-1, 1))
        else:
            categories = feature.categories or tuple(sorted(frame[feature.name].unique()))
            codes = _codes(frame[feature.name], categories, feature.name, line_numbers)
            blocks.append(np.eye(len(categories))[codes])
            names.extend(f"{feature.name}={c}" for c in categories)
    if schema.include_sensitive:
        for j, col in enumerate(schema.sensitive):
            blocks.append(np.eye(len(col.categories))[sensitive[:, j]])
            names.extend(f"{col.name}={c}" for c in col.categories)
    
    matrix = np.hstack(blocks) if blocks else np.zeros((len(frame), 0))
    
    if encoding is None:
        means, scales = (), ()
        if continuous:
            scaler = StandardScaler().fit(matrix[:, continuous])
            matrix[:, continuous] = scaler.transform(matrix[:, continuous])
            means, scales = tuple(scaler.mean_.tolist()), tuple(scaler.scale_.tolist())
        encoding = FeatureEncoding(
            feature_names=tuple(names), continuous=tuple(continuous), means=means, scales=scales
        )
    else:
        matrix = _align_to_encoding(matrix, names, encoding)
    
    logger.info(f"Loaded {len(frame)} rows, {matrix.shape[1]} encoded features from {path}")
    return Dataset(
        features=matrix,
        sensitive=sensitive,
        labels=labels,
        sensitive_names=tuple(col.name for col in schema.sensitive),
        sensitive_categories=tuple(col.categories for col in schema.sensitive),
        class_names=schema.label.categories,
        encoding=encoding,
        row_ids=line_numbers
    )


def _codes(column: pd.Series, categories, name: str, line_numbers: np.ndarray) -> np.ndarray:
    lookup: Dict[str, int] = {str(c): i for i, c in enumerate(categories)}
    codes = column.map(lookup)
    unknown = codes.isna().to_numpy()
    if unknown.any():
        i = int(np.flatnonzero(unknown)[0])
        raise DataValueError(
            f"unknown category '{column.iloc[i]}' in column '{name}'",
            row=int(line_numbers[i]), column=name
        )
    return codes.to_numpy(dtype=np.int64)


def _align_to_encoding(matrix: np.ndarray, names: List[str], encoding: FeatureEncoding) -> np.ndarray:
    """Reorder columns to a reference encoding and apply its standardization."""
    position = {name: i for i, name in enumerate(names)}
    unseen = [name for name in names if name not in set(encoding.feature_names)]
    if unseen:
        logger.warning(f"Ignoring {len(unseen)} encoded columns unknown to the reference encoding")
    aligned = np.zeros((matrix.shape[0], len(encoding.feature_names)))
    for j, name in enumerate(encoding.feature_names):
        if name in position:
            aligned[:, j] = matrix[:, position[name]]
    for k, j in enumerate(encoding.continuous):
        aligned[:, j] = (aligned[:, j] - encoding.means[k]) / encoding.scales[k]
    return aligned


def enumerate_subgroups(ds: Dataset) -> SubgroupIndex:
    """Observed joint sensitive values with exact counts, lexicographic order."""
    groups, inverse, counts = np.unique(ds.sensitive, axis=0, return_inverse=True, return_counts=True)
    labels = tuple(
        "|".join(ds.sensitive_categories[j][int(code)] for j, code in enumerate(group))
        for group in groups
    )
    row_groups = np.asarray(inverse, dtype=np.int64).reshape(-1)
    row_groups.setflags(write=False)
    return SubgroupIndex(
        groups=tuple(tuple(int(c) for c in group) for group in groups),
        counts=counts.astype(np.int64),
        row_groups=row_groups,
        labels=labels
    )


def split(ds: Dataset, train_fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    """Seeded disjoint train/test partition.
    
    The train side receives floor(train_fraction * |D|) rows; both sides
    keep source row order.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    n_train = int(np.floor(train_fraction * ds.size + 1e-9))
    if n_train == 0 or n_train == ds.size:
        raise EmptyDataError(f"train_fraction {train_fraction} leaves an empty side for {ds.size} rows")
    
    train_idx, test_idx = train_test_split(
        np.arange(ds.size), train_size=n_train, random_state=seed, shuffle=True
    )
    return ds.subset(np.sort(train_idx)), ds.subset(np.sort(test_idx))


def restandardize(train: Dataset, test: Dataset) -> Tuple[Dataset, Dataset]:
    """Refit continuous-column standardization on `train` and apply to both."""
    idx = list(train.encoding.continuous)
    if not idx:
        return train, test
    scaler = StandardScaler().fit(train.features[:, idx])
    
    def apply(ds: Dataset) -> np.ndarray:
        features = np.array(ds.features)
        features[:, idx] = scaler.transform(features[:, idx])
        return features
    
    old = train.encoding
    old_means = np.asarray(old.means) if old.means else np.zeros(len(idx))
    old_scales = np.asarray(old.scales) if old.scales else np.ones(len(idx))
    encoding = FeatureEncoding(
        feature_names=old.feature_names,
        continuous=old.continuous,
        means=tuple((old_means + old_scales * scaler.mean_).tolist()),
        scales=tuple((old_scales * scaler.scale_).tolist())
    )
    return (
        train.replace(features=apply(train), encoding=encoding),
        test.replace(features=apply(test), encoding=encoding)
    )


def synth_biased(cfg: SynthConfig, seed: int) -> Dataset:
    """Draw an i.i.d. synthetic population with group-dependent label rates.
    
    Args:
        cfg: Generator declaration
        seed: Seed; identical seeds give identical datasets
        
    Returns:
        Dataset with `cfg.n_rows` rows
    """
    rng = np.random.default_rng(seed)
    n, m = cfg.n_rows, cfg.n_features
    n_classes = cfg.n_classes
    
    class_centres = _unit_rows(rng.normal(size=(n_classes, m)))
    group_centres = _unit_rows(rng.normal(size=(len(cfg.groups), m)))
    
    weights = np.array([g.weight for g in cfg.groups], dtype=np.float64)
    group_of_row = rng.choice(len(cfg.groups), size=n, p=weights / weights.sum())
    
    dists = np.array([g.distribution() for g in cfg.groups])
    cdf = np.cumsum(dists[group_of_row], axis=1)
    draws = rng.random(n)
    labels = np.minimum((draws[:, None] >= cdf).sum(axis=1), n_classes - 1)
    
    features = (
        cfg.class_separation * class_centres[labels]
        + cfg.group_signal * group_centres[group_of_row]
        + cfg.noise_scale * rng.normal(size=(n, m))
    )
    
    noise = np.array([g.label_noise for g in cfg.groups])[group_of_row]
    flip = rng.random(n) < noise
    shifted = (labels + rng.integers(1, n_classes, size=n)) % n_classes
    labels = np.where(flip, shifted, labels)
    
    codes = np.array([g.codes for g in cfg.groups], dtype=np.int64)
    sensitive = codes[group_of_row]
    n_attrs = codes.shape[1]
    names = cfg.attribute_names or tuple(f"s{j}" for j in range(n_attrs))
    categories = cfg.attribute_categories or tuple(
        tuple(str(v) for v in range(max(int(codes[:, j].max()) + 1, 2)))
        for j in range(n_attrs)
    )
    class_names = cfg.class_names or tuple(str(k) for k in range(n_classes))
    
    return Dataset(
        features=features,
        sensitive=sensitive,
        labels=labels,
        sensitive_names=names,
        sensitive_categories=categories,
        class_names=class_names,
        encoding=FeatureEncoding(feature_names=tuple(f"x{i}" for i in range(m)))
    )


def _unit_rows(matrix: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    return matrix / np.where(norms > 0, norms, 1.0)
