"""Tests for the MI regularizer and the training loop."""

import numpy as np
import pytest
from scipy.special import softmax

from conftest import make_dataset
from mifair.config import get_config
from mifair.exceptions import ConfigError, CoverageError, DivergenceError
from mifair.models import CoveragePolicy, FairnessNotion, Notion, TrainConfig
from mifair.services import (
    Trainer, check_gradient, enumerate_subgroups, forward, iota, joint_soft, missing_coverage,
    mutual_information, objective, regularizer, train
)

SCHEDULE = [(0, 0.1)]


def _config(**overrides):
    values = {"epochs": 30, "lr_schedule": SCHEDULE, "seed": 0}
    values.update(overrides)
    return TrainConfig(**values)


def test_regularizer_value_is_soft_plugin_mi():
    rng = np.random.default_rng(0)
    probs = rng.dirichlet(np.ones(3), size=12)
    groups = np.arange(12) % 3
    labels = np.arange(12) % 3
    value, gradient = regularizer(FairnessNotion(tag=Notion.SP), groups, labels, probs)
    assert value == pytest.approx(mutual_information(joint_soft(groups, probs)), abs=1e-15)
    assert gradient.shape == probs.shape


def test_regularizer_single_group_is_flat():
    rng = np.random.default_rng(1)
    probs = rng.dirichlet(np.ones(2), size=8)
    for tag in Notion:
        value, gradient = regularizer(FairnessNotion(tag=tag), np.zeros(8, dtype=int), np.arange(8) % 2, probs)
        assert value == pytest.approx(0.0, abs=1e-12)
        assert np.all(gradient == 0.0)


def test_oae_gradient_only_touches_true_class():
    rng = np.random.default_rng(2)
    probs = rng.dirichlet(np.ones(3), size=9)
    labels = np.arange(9) % 3
    _, gradient = regularizer(FairnessNotion(tag=Notion.OAE), np.arange(9) % 2, labels, probs)
    mask = np.ones_like(gradient, dtype=bool)
    mask[np.arange(9), labels] = False
    assert np.all(gradient[mask] == 0.0)


def test_regularizer_coverage_policies():
    probs = np.full((4, 2), 0.5)
    eo = FairnessNotion(tag=Notion.EO)
    value, gradient = regularizer(eo, [0, 1, 0, 1], [0, 0, 0, 0], probs)
    assert value == 0.0 and np.all(gradient == 0.0)
    with pytest.raises(CoverageError):
        regularizer(eo, [0, 1, 0, 1], [0, 0, 0, 0], probs, coverage_policy=CoveragePolicy.ERROR)


def test_missing_coverage_names_conditions_and_subgroups():
    missing = missing_coverage(
        FairnessNotion(tag=Notion.EODDS), np.array([0, 0, 2]), np.array([0, 0, 0]), 2,
        expected_groups=3, class_names=("no", "yes"), group_labels=("g0", "g1", "g2")
    )
    assert missing == ["condition Y=yes", "subgroup g1"]


def test_training_is_deterministic(biased_synth):
    cfg = _config(notion=FairnessNotion(tag=Notion.SP), eta=1.0)
    params_a, trace_a = train(biased_synth, biased_synth, cfg, arch=(4,))
    params_b, trace_b = train(biased_synth, biased_synth, cfg, arch=(4,))
    assert np.array_equal(params_a.flat(), params_b.flat())
    assert trace_a.column("objective") == trace_b.column("objective")
    assert trace_a.epochs == 30
    assert trace_a.final_report is not None


def test_trace_records_composite_objective(biased_synth):
    cfg = _config(notion=FairnessNotion(tag=Notion.OAE), eta=2.0, epochs=5)
    params, trace = Trainer(cfg).train(biased_synth, biased_synth, arch=(3,))
    loss_value, iota_value, total = objective(params, biased_synth, cfg)
    last = trace.records[-1]
    assert last.loss == pytest.approx(loss_value)
    assert last.iota == pytest.approx(iota_value)
    assert last.objective == pytest.approx(total)
    assert total > loss_value + 2.0 * iota_value


def test_single_group_eta_does_not_change_trajectory():
    rng = np.random.default_rng(4)
    features = rng.normal(size=(40, 3))
    labels = (features[:, 0] > 0).astype(int)
    ds = make_dataset(np.zeros(40, dtype=int), labels, features=features)
    vanilla, _ = train(ds, ds, _config(eta=0.0), arch=(4,))
    regularized, _ = train(ds, ds, _config(eta=5.0), arch=(4,))
    assert np.array_equal(vanilla.flat(), regularized.flat())


def test_regularization_lowers_iota(biased_synth):
    sp = FairnessNotion(tag=Notion.SP)
    slow = [(0, 0.05)]
    vanilla, _ = train(biased_synth, biased_synth, _config(notion=sp, eta=0.0, epochs=200, lr_schedule=slow), arch=(8,))
    fair, _ = train(biased_synth, biased_synth, _config(notion=sp, eta=3.0, epochs=200, lr_schedule=slow), arch=(8,))
    before = iota(sp, biased_synth, forward(vanilla, biased_synth.features))
    after = iota(sp, biased_synth, forward(fair, biased_synth.features))
    assert after < before


def test_full_batch_coverage_error_raised_up_front():
    ds = make_dataset([0, 1, 0, 1], [0, 0, 0, 0])
    cfg = _config(notion=FairnessNotion(tag=Notion.EO), eta=1.0, coverage_policy="error")
    with pytest.raises(CoverageError):
        train(ds, ds, cfg, arch=())


def test_minibatch_skips_batches_missing_a_subgroup():
    rng = np.random.default_rng(5)
    groups = np.zeros(40, dtype=int)
    groups[0] = 1
    ds = make_dataset(groups, np.arange(40) % 2, features=rng.normal(size=(40, 2)))
    cfg = _config(eta=1.0, batch_size=8, epochs=3)
    _, trace = train(ds, ds, cfg, arch=())
    assert all(record.skipped_steps == 4 for record in trace.records)
    with pytest.raises(CoverageError):
        train(ds, ds, cfg.with_overrides(coverage_policy=CoveragePolicy.ERROR), arch=())


def test_divergence_keeps_partial_trace(biased_synth):
    cfg = _config(lr_schedule=[(0, 1.0e6)], epochs=200)
    with pytest.raises(DivergenceError) as info:
        train(biased_synth, biased_synth, cfg, arch=(4,))
    assert info.value.trace is not None
    assert info.value.trace.epochs < 200


def test_incompatible_eval_set_rejected(biased_synth):
    other = make_dataset([0, 1], [0, 1])
    with pytest.raises(ValueError):
        train(biased_synth, other, _config(), arch=())


def test_subgroups_shared_with_metrics(biased_synth):
    assert enumerate_subgroups(biased_synth).n_groups == 2


def test_full_batch_small_rate_descends(biased_synth):
    cfg = _config(notion=FairnessNotion(tag=Notion.SP), eta=1.0, lr_schedule=[(0, 0.01)], momentum=0.0)
    _, trace = train(biased_synth, biased_synth, cfg, arch=(4,))
    values = trace.column("objective")
    for before, after in zip(values, values[1:]):
        assert after <= before + 1e-6


def test_regularizer_gradient_through_logits():
    rng = np.random.default_rng(8)
    groups = np.arange(40) % 4
    labels = rng.integers(0, 2, size=40)
    logits = rng.normal(size=(40, 2))
    sp = FairnessNotion(tag=Notion.SP)

    def value_at(flat):
        return regularizer(sp, groups, labels, softmax(flat.reshape(40, 2), axis=1), 4)[0]

    probs = softmax(logits, axis=1)
    _, grad_probs = regularizer(sp, groups, labels, probs, 4)
    # softmax Jacobian-vector product
    grad_logits = probs * (grad_probs - np.sum(probs * grad_probs, axis=1, keepdims=True))
    result = check_gradient("sp_logits", value_at, grad_logits.ravel(), logits.ravel(), 1e-6)
    assert result.passed, result.to_dict()


def test_activation_taken_from_config(monkeypatch, biased_synth):
    monkeypatch.setitem(get_config().training, "activation", "tanh")
    with pytest.raises(ConfigError):
        train(biased_synth, biased_synth, _config(epochs=1), arch=(4,))
