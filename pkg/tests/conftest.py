"""Shared fixtures for the MIFair test suite."""

import numpy as np
import pytest

from mifair.config import get_config
from mifair.models import Dataset, FeatureEncoding, SchemaConfig, SynthConfig, SynthGroup
from mifair.services import synth_biased

CENSUS_COLUMNS = ["age", "workclass", "hours", "race", "sex", "income"]
WORKCLASSES = ["Private", "Self-emp", "State-gov"]
RACES = ["White", "Black", "Asian"]


def census_rows(n_rows: int, seed: int = 0):
    """Deterministic census-like rows; income depends on sex and hours."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n_rows):
        sex = "Male" if i % 2 == 0 else "Female"
        race = RACES[i % 3]
        hours = int(rng.integers(20, 60))
        rich = hours > 40 and (sex == "Male" or i % 4 == 1)
        rows.append([
            str(int(rng.integers(18, 70))),
            WORKCLASSES[int(rng.integers(0, 3))],
            str(hours),
            race,
            sex,
            ">50K" if rich else "<=50K",
        ])
    return rows


def write_csv(path, rows, columns=CENSUS_COLUMNS):
    lines = [",".join(columns)] + [",".join(row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def schema_dict():
    return {
        "features": [
            {"name": "age", "kind": "continuous"},
            {"name": "workclass", "kind": "categorical"},
            {"name": "hours", "kind": "continuous"},
        ],
        "sensitive": [
            {"name": "race", "categories": ["White", "Non-White"]},
            {"name": "sex", "categories": ["Male", "Female"]},
        ],
        "label": {"name": "income", "classes": ["<=50K", ">50K"]},
        "binarize": {"race": {"White": ["White"], "Non-White": "*"}},
    }


@pytest.fixture
def schema(schema_dict):
    return SchemaConfig.from_dict(schema_dict)


@pytest.fixture
def census_csv(tmp_path):
    return write_csv(tmp_path / "census.csv", census_rows(80))


def make_dataset(groups, labels, features=None, categories=None, class_names=("0", "1")):
    """Hand-built dataset with one sensitive column per entry of `groups` rows."""
    sensitive = np.asarray(groups, dtype=np.int64)
    if sensitive.ndim == 1:
        sensitive = sensitive.reshape(-1, 1)
    n_attrs = sensitive.shape[1]
    if categories is None:
        categories = tuple(
            tuple(f"{chr(ord('a') + j)}{v}" for v in range(max(int(sensitive[:, j].max()) + 1, 2)))
            for j in range(n_attrs)
        )
    if features is None:
        features = np.arange(sensitive.shape[0], dtype=np.float64).reshape(-1, 1)
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    return Dataset(
        features=features,
        sensitive=sensitive,
        labels=np.asarray(labels, dtype=np.int64),
        sensitive_names=tuple(f"s{j}" for j in range(n_attrs)),
        sensitive_categories=categories,
        class_names=class_names,
        encoding=FeatureEncoding(feature_names=tuple(f"x{i}" for i in range(features.shape[1])))
    )


@pytest.fixture
def biased_synth():
    cfg = SynthConfig(
        groups=[
            SynthGroup(codes=(0,), weight=0.5, prevalence=0.85),
            SynthGroup(codes=(1,), weight=0.5, prevalence=0.15),
        ],
        n_rows=600,
        n_features=3,
        class_separation=1.5,
        group_signal=2.0,
        attribute_names=("group",),
        attribute_categories=(("a", "b"),),
    )
    return synth_biased(cfg, seed=3)


@pytest.fixture
def jobs_env(monkeypatch):
    """Set MIFAIR_JOBS for one test and restore the defaults afterwards."""
    def set_jobs(value: str):
        monkeypatch.setenv("MIFAIR_JOBS", value)
        get_config().reload()
    yield set_jobs
    monkeypatch.delenv("MIFAIR_JOBS", raising=False)
    get_config().reload()
