"""Tests for the metrics engine: iota per notion, baselines, DDP and accuracies."""

import math

import numpy as np
import pandas as pd
import pytest

from conftest import make_dataset
from mifair.exceptions import AlignmentError, EmptyConditionError, ShapeError
from mifair.models import FairnessNotion, Notion, PairwiseKind, Prediction
from mifair.services import (
    MetricsEngine, accuracies, assess, benefit_distribution, ddp, iota,
    pairwise_baseline, report_records, write_report
)
from mifair.services.metrics_engine import REPORT_COLUMNS


@pytest.fixture
def two_group_case():
    # group 0 predicts positive half the time, group 1 a quarter of the time
    groups = [0, 0, 0, 0, 1, 1, 1, 1]
    labels = [1, 1, 0, 0, 1, 0, 0, 0]
    preds = [1, 0, 1, 0, 1, 0, 0, 0]
    return make_dataset(groups, labels), Prediction.from_labels(preds, 2)


def test_spd_table_two_groups(two_group_case):
    ds, pred = two_group_case
    table = pairwise_baseline(PairwiseKind.SPD, ds, pred)
    assert table.rates == [0.5, 0.25]
    assert table.value("a0", "a1") == pytest.approx(0.25)
    assert table.value("a1", "a0") == pytest.approx(-0.25)
    assert table.max_abs() == pytest.approx(0.25)


def test_eod_ped_oae_rates(two_group_case):
    ds, pred = two_group_case
    assert pairwise_baseline("EOD", ds, pred).rates == [0.5, 1.0]
    assert pairwise_baseline("PED", ds, pred).rates == [0.5, 0.0]
    assert pairwise_baseline("OAE", ds, pred).rates == [0.5, 1.0]


def test_undefined_pairs_kept_as_none():
    ds = make_dataset([0, 0, 1, 1], [1, 0, 0, 0])
    pred = Prediction.from_labels([1, 0, 0, 1], 2)
    table = pairwise_baseline(PairwiseKind.EOD, ds, pred)
    assert table.rates == [1.0, None]
    assert all(not entry.defined for entry in table.entries)
    assert table.max_abs() is None


def test_eight_groups_give_56_antisymmetric_pairs():
    rng = np.random.default_rng(1)
    codes = np.array([[a, b, c] for a in (0, 1) for b in (0, 1) for c in (0, 1)])
    groups = np.vstack([codes] * 10 + [codes[rng.integers(0, 8, size=120)]])
    labels = rng.integers(0, 2, size=len(groups))
    pred = Prediction.from_labels(rng.integers(0, 2, size=len(groups)), 2)
    table = pairwise_baseline(PairwiseKind.SPD, make_dataset(groups, labels), pred)
    assert len(table.entries) == 56
    for entry in table.entries:
        assert entry.value + table.value(entry.group_b, entry.group_a) == pytest.approx(0.0, abs=1e-12)
    assert sum(1 for e in table.entries if e.attrs_differing == 3) == 8


def test_iota_sp_hard_matches_direct_tally(two_group_case):
    ds, pred = two_group_case
    # P(a, y_hat): group 0 = (2/8, 2/8), group 1 = (3/8, 1/8)
    joint = np.array([[0.25, 0.25], [0.375, 0.125]])
    p_a, p_b = joint.sum(axis=1), joint.sum(axis=0)
    expected = sum(
        joint[i, j] * math.log(joint[i, j] / (p_a[i] * p_b[j])) for i in range(2) for j in range(2)
    )
    assert iota(Notion.SP, ds, pred, hard=True) == pytest.approx(expected, abs=1e-12)
    assert iota("SP", ds, pred, units="bits") == pytest.approx(expected / math.log(2.0), abs=1e-12)


def test_iota_zero_for_identical_group_behaviour():
    ds = make_dataset([0, 0, 1, 1], [0, 1, 0, 1])
    pred = Prediction.from_labels([0, 1, 0, 1], 2)
    for notion in Notion:
        assert iota(notion, ds, pred) == pytest.approx(0.0, abs=1e-15)


def test_eodds_is_weighted_sum_of_conditionals(two_group_case):
    ds, pred = two_group_case
    eo = iota(Notion.EO, ds, pred)
    pe = iota(Notion.PE, ds, pred)
    weighted = FairnessNotion(tag=Notion.EODDS, lambdas=(2.0, 0.5))
    assert iota(weighted, ds, pred) == pytest.approx(2.0 * pe + 0.5 * eo, abs=1e-15)


def test_oae_benefit_is_probability_of_true_class():
    pred = Prediction(probs=np.array([[0.7, 0.3], [0.2, 0.8]]))
    probs, mask = benefit_distribution(Notion.OAE, pred, [0, 0])
    assert np.allclose(probs, [[0.3, 0.7], [0.8, 0.2]])
    assert mask.all()


def test_normalized_iota_reaches_one_for_full_dependence():
    ds = make_dataset([0, 0, 1, 1], [0, 0, 1, 1])
    pred = Prediction.from_labels([0, 0, 1, 1], 2)
    notion = FairnessNotion(tag=Notion.SP, normalize=True)
    assert iota(notion, ds, pred) == pytest.approx(1.0)


def test_normalized_eodds_is_weighted_mean_of_ratios(two_group_case):
    ds, pred = two_group_case
    eo = iota(FairnessNotion(tag=Notion.EO, normalize=True), ds, pred)
    pe = iota(FairnessNotion(tag=Notion.PE, normalize=True), ds, pred)
    weighted = FairnessNotion(tag=Notion.EODDS, lambdas=(2.0, 0.5), normalize=True)
    assert iota(weighted, ds, pred) == pytest.approx((2.0 * pe + 0.5 * eo) / 2.5, abs=1e-15)


def test_normalized_iota_zero_when_benefit_constant():
    ds = make_dataset([0, 0, 1, 1], [0, 1, 0, 1])
    pred = Prediction.from_labels([1, 1, 1, 1], 2)
    assert iota(FairnessNotion(tag=Notion.SP, normalize=True), ds, pred) == 0.0


def test_empty_condition_set_raises():
    ds = make_dataset([0, 1, 0, 1], [0, 0, 0, 0])
    pred = Prediction.from_labels([0, 1, 0, 1], 2)
    with pytest.raises(EmptyConditionError):
        iota(Notion.EO, ds, pred)


def test_ddp_and_accuracies(two_group_case):
    ds, pred = two_group_case
    # overall positive rate 3/8
    assert ddp(ds, pred) == pytest.approx(0.25)
    acc_mean, acc_weighted = accuracies(ds, pred)
    assert acc_mean == pytest.approx(6 / 8)
    assert acc_weighted == pytest.approx((0.5 + 1.0) / 2)


def test_equal_group_sizes_make_accuracies_agree():
    rng = np.random.default_rng(3)
    groups = np.repeat([0, 1, 2], 10)
    ds = make_dataset(groups, rng.integers(0, 2, size=30))
    pred = Prediction.from_labels(rng.integers(0, 2, size=30), 2)
    acc_mean, acc_weighted = accuracies(ds, pred)
    assert acc_weighted == pytest.approx(acc_mean, abs=1e-12)


def test_misaligned_predictions_rejected(two_group_case):
    ds, _ = two_group_case
    with pytest.raises(AlignmentError):
        iota(Notion.SP, ds, Prediction.from_labels([0, 1], 2))


def test_assess_full_battery(two_group_case):
    ds, pred = two_group_case
    report = assess(ds, pred, units="nats", normalize=True)
    assert set(report.iota) == {"SP", "EO", "PE", "EOdds", "OAE"}
    assert set(report.pairwise) == {"SPD", "EOD", "PED", "OAE"}
    assert report.iota["SP"].normalized is not None
    assert report.ddp == pytest.approx(0.25)
    assert report.group_labels == ["a0", "a1"]
    assert report.group_counts == [4, 4]
    assert not report.verdict(0.3)
    assert report.verdict(0.3, kinds=["SPD"])
    assert report.verdict(1.0)


def test_assess_skips_notion_with_empty_condition():
    ds = make_dataset([0, 1, 0, 1], [0, 0, 0, 0])
    pred = Prediction.from_labels([0, 1, 0, 1], 2)
    report = MetricsEngine().assess(ds, pred)
    assert "EO" not in report.iota
    assert "EOdds" not in report.iota
    assert "SP" in report.iota and "PE" in report.iota


def test_multiclass_reports_oae_only():
    ds = make_dataset([0, 0, 0, 1, 1, 1], [0, 1, 2, 0, 1, 2], class_names=("x", "y", "z"))
    pred = Prediction.from_labels([0, 1, 2, 0, 2, 2], 3)
    report = assess(ds, pred)
    assert set(report.pairwise) == {"OAE"}
    assert report.ddp is None
    assert "EO" not in report.iota
    assert "SP" in report.iota and "EOdds" in report.iota
    with pytest.raises(ShapeError):
        pairwise_baseline(PairwiseKind.SPD, ds, pred)
    eo_y = FairnessNotion(tag=Notion.EO, class_index=1)
    assert iota(eo_y, ds, pred) > 0.0


def test_report_records_and_csv(tmp_path, two_group_case):
    ds, pred = two_group_case
    report = assess(ds, pred, notions=["SP", "OAE"])
    records = report_records(report)
    assert {r["metric"] for r in records} >= {"iota_nats", "SPD", "EOD", "PED", "OAE", "DDP", "ACC_mean", "N_g"}
    path = write_report(report, tmp_path / "out" / "metrics.csv")
    frame = pd.read_csv(path)
    assert list(frame.columns) == REPORT_COLUMNS
    assert len(frame) == len(records)
    assert path.read_bytes() == write_report(report, tmp_path / "again.csv").read_bytes()
