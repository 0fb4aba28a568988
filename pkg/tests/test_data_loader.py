"""Tests for CSV ingestion, subgroups, splitting and the synthetic generator."""

import numpy as np
import pytest

from conftest import census_rows, make_dataset, write_csv
from mifair.exceptions import ConfigError, DataValueError, EmptyDataError, SchemaError
from mifair.models import SchemaConfig, SynthConfig, SynthGroup
from mifair.services import enumerate_subgroups, load_csv, restandardize, split, synth_biased


def test_load_csv_encodes_columns(census_csv, schema):
    ds = load_csv(census_csv, schema)
    assert ds.size == 80
    assert ds.sensitive_names == ("race", "sex")
    assert ds.class_names == ("<=50K", ">50K")
    assert ds.encoding.feature_names == (
        "age", "workclass=Private", "workclass=Self-emp", "workclass=State-gov", "hours"
    )
    assert ds.encoding.continuous == (0, 4)
    continuous = ds.features[:, [0, 4]]
    assert np.allclose(continuous.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(continuous.std(axis=0), 1.0)
    assert np.all(ds.features[:, 1:4].sum(axis=1) == 1.0)


def test_binarize_rule_applied_before_coding(census_csv, schema):
    ds = load_csv(census_csv, schema)
    # rows cycle White, Black, Asian
    assert ds.sensitive[:6, 0].tolist() == [0, 1, 1, 0, 1, 1]


def test_rows_with_missing_values_dropped(tmp_path, schema):
    rows = census_rows(10)
    rows[2][5] = "?"
    rows[5][5] = ""
    rows[8][5] = " ?"
    ds = load_csv(write_csv(tmp_path / "gaps.csv", rows), schema)
    assert ds.size == 7
    # header is line 1
    assert ds.row_ids.tolist() == [2, 3, 5, 6, 8, 9, 11]


def test_pandas_na_tokens_are_real_categories(tmp_path, schema_dict):
    rows = census_rows(6)
    for i, row in enumerate(rows):
        row[4] = "None" if i % 2 == 0 else "NA"
    rows[1][1] = "N/A"
    schema_dict["sensitive"][1]["categories"] = ["None", "NA"]
    ds = load_csv(write_csv(tmp_path / "tokens.csv", rows), SchemaConfig.from_dict(schema_dict))
    assert ds.size == 6
    assert ds.sensitive[:, 1].tolist() == [0, 1, 0, 1, 0, 1]
    assert "workclass=N/A" in ds.encoding.feature_names


def test_blank_after_strip_is_missing(tmp_path, schema):
    rows = census_rows(4)
    rows[1][1] = "  "
    rows[2][5] = "? "
    ds = load_csv(write_csv(tmp_path / "blank.csv", rows), schema)
    assert ds.row_ids.tolist() == [2, 5]


def test_two_row_file(tmp_path, schema):
    ds = load_csv(write_csv(tmp_path / "two.csv", census_rows(2)), schema)
    assert ds.size == 2
    assert enumerate_subgroups(ds).n_groups <= 2


def test_unknown_category_names_row(tmp_path, schema):
    rows = census_rows(6)
    rows[3][4] = "Other"
    with pytest.raises(DataValueError) as info:
        load_csv(write_csv(tmp_path / "bad.csv", rows), schema)
    assert info.value.row == 5
    assert info.value.column == "sex"


def test_non_numeric_continuous_value(tmp_path, schema):
    rows = census_rows(4)
    rows[0][0] = "old"
    with pytest.raises(DataValueError) as info:
        load_csv(write_csv(tmp_path / "bad.csv", rows), schema)
    assert info.value.row == 2


def test_missing_column_is_schema_error(tmp_path, schema):
    rows = [row[:5] for row in census_rows(4)]
    path = write_csv(tmp_path / "short.csv", rows, columns=["age", "workclass", "hours", "race", "sex"])
    with pytest.raises(SchemaError):
        load_csv(path, schema)


def test_all_rows_missing_is_empty_data(tmp_path, schema):
    rows = census_rows(3)
    for row in rows:
        row[5] = "?"
    with pytest.raises(EmptyDataError):
        load_csv(write_csv(tmp_path / "empty.csv", rows), schema)


def test_include_sensitive_appends_one_hot(census_csv, schema_dict):
    schema_dict["include_sensitive"] = True
    ds = load_csv(census_csv, SchemaConfig.from_dict(schema_dict))
    assert ds.encoding.feature_names[-4:] == ("race=White", "race=Non-White", "sex=Male", "sex=Female")
    assert np.all(ds.features[:, -2:].sum(axis=1) == 1.0)


def test_reference_encoding_reproduced(tmp_path, census_csv, schema):
    reference = load_csv(census_csv, schema)
    # a file lacking one workclass still lines up with the reference columns
    rows = [row for row in census_rows(80) if row[1] != "State-gov"][:20]
    other = load_csv(write_csv(tmp_path / "other.csv", rows), schema, encoding=reference.encoding)
    assert other.encoding == reference.encoding
    assert np.all(other.features[:, 3] == 0.0)


def test_subgroups_lexicographic_with_counts(census_csv, schema):
    ds = load_csv(census_csv, schema)
    subgroups = enumerate_subgroups(ds)
    assert subgroups.groups == ((0, 0), (0, 1), (1, 0), (1, 1))
    assert subgroups.labels == ("White|Male", "White|Female", "Non-White|Male", "Non-White|Female")
    assert int(subgroups.counts.sum()) == ds.size
    assert np.array_equal(np.bincount(subgroups.row_groups), subgroups.counts)
    assert subgroups.attrs_differing(0, 3) == 2
    assert subgroups.attrs_differing(0, 1) == 1


def test_split_is_seeded_and_disjoint(census_csv, schema):
    ds = load_csv(census_csv, schema)
    train, test = split(ds, 0.75, seed=11)
    assert (train.size, test.size) == (60, 20)
    assert set(train.row_ids.tolist()).isdisjoint(test.row_ids.tolist())
    assert np.all(np.diff(train.row_ids) > 0)
    again, _ = split(ds, 0.75, seed=11)
    assert np.array_equal(train.row_ids, again.row_ids)


@pytest.mark.parametrize("fraction", [0.0, 1.0, 1.5])
def test_split_rejects_bad_fraction(census_csv, schema, fraction):
    with pytest.raises(ValueError):
        split(load_csv(census_csv, schema), fraction, seed=0)


def test_split_rejects_empty_side(tmp_path, schema):
    ds = load_csv(write_csv(tmp_path / "two.csv", census_rows(2)), schema)
    with pytest.raises(EmptyDataError):
        split(ds, 0.4, seed=0)


@pytest.mark.parametrize("fraction, n_train", [(0.29, 29), (0.57, 57), (0.75, 75)])
def test_split_size_survives_float_rounding(fraction, n_train):
    ds = make_dataset(np.arange(100) % 2, np.arange(100) % 2)
    train, test = split(ds, fraction, seed=0)
    assert (train.size, test.size) == (n_train, 100 - n_train)


def test_restandardize_uses_train_statistics(census_csv, schema):
    train, test = split(load_csv(census_csv, schema), 0.75, seed=2)
    train2, test2 = restandardize(train, test)
    idx = list(train.encoding.continuous)
    assert np.allclose(train2.features[:, idx].mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(train2.features[:, idx].std(axis=0), 1.0)
    assert np.array_equal(train2.features[:, 1:4], train.features[:, 1:4])
    assert train2.encoding == test2.encoding
    assert len(train2.encoding.means) == len(idx)


def test_synthetic_is_deterministic(biased_synth):
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
    again = synth_biased(cfg, seed=3)
    assert np.array_equal(biased_synth.features, again.features)
    assert np.array_equal(biased_synth.labels, again.labels)
    assert not np.array_equal(biased_synth.labels, synth_biased(cfg, seed=4).labels)


def test_synthetic_prevalences(biased_synth):
    group = biased_synth.sensitive[:, 0]
    assert abs(biased_synth.labels[group == 0].mean() - 0.85) < 0.07
    assert abs(biased_synth.labels[group == 1].mean() - 0.15) < 0.07
    assert biased_synth.sensitive_categories == (("a", "b"),)


def test_synthetic_generator_fidelity_at_scale():
    shares, prevalences = (0.3, 0.7), (0.8, 0.25)
    cfg = SynthConfig(
        groups=[
            SynthGroup(codes=(g,), weight=shares[g], prevalence=prevalences[g]) for g in range(2)
        ],
        n_rows=100_000,
        n_features=2,
    )
    ds = synth_biased(cfg, seed=5)
    group = ds.sensitive[:, 0]
    for g in range(2):
        n_g = int((group == g).sum())
        share_sigma = np.sqrt(shares[g] * (1 - shares[g]) / ds.size)
        assert abs(n_g / ds.size - shares[g]) <= 4 * share_sigma
        p = prevalences[g]
        assert abs(ds.labels[group == g].mean() - p) <= 4 * np.sqrt(p * (1 - p) / n_g)


def test_synthetic_multiclass_and_intersectional():
    cfg = SynthConfig.from_dict({
        "n_rows": 400,
        "groups": [
            {"codes": [0, 0], "weight": 0.25, "class_probs": [0.6, 0.3, 0.1]},
            {"codes": [0, 1], "weight": 0.25, "class_probs": [0.1, 0.3, 0.6]},
            {"codes": [1, 0], "weight": 0.25, "class_probs": [0.3, 0.4, 0.3]},
            {"codes": [1, 1], "weight": 0.25, "class_probs": [0.2, 0.2, 0.6], "label_noise": 0.1},
        ],
    })
    ds = synth_biased(cfg, seed=0)
    assert ds.n_classes == 3
    assert ds.sensitive_names == ("s0", "s1")
    assert enumerate_subgroups(ds).n_groups == 4


def test_synthetic_config_validation():
    with pytest.raises(ConfigError):
        SynthConfig(groups=[SynthGroup(codes=(0,), weight=0.7, prevalence=0.5)], n_rows=10)
    with pytest.raises(ConfigError):
        SynthConfig.from_dict({
            "n_rows": 10,
            "groups": [
                {"codes": [0], "weight": 0.5, "prevalence": 0.5},
                {"codes": [1], "weight": 0.5, "class_probs": [0.2, 0.3, 0.5]},
            ],
        })
