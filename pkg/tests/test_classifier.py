"""Tests for the softmax classifier: passes, gradients and checkpoints."""

import json

import numpy as np
import pytest

from mifair.config import get_config
from mifair.exceptions import ConfigError, ShapeError
from mifair.models import FeatureEncoding, ModelParams
from mifair.services import (
    backward, check_gradient, cross_entropy, forward, init_params, load_checkpoint,
    loss, save_checkpoint
)


@pytest.fixture
def batch():
    rng = np.random.default_rng(0)
    features = rng.normal(size=(9, 4))
    labels = np.array([0, 1, 2, 0, 1, 2, 0, 1, 2])
    return features, labels


def test_init_is_seeded():
    a = init_params((4, 5, 3), seed=1)
    b = init_params((4, 5, 3), seed=1)
    assert np.array_equal(a.flat(), b.flat())
    assert a.layer_sizes == (4, 5, 3)
    assert a.n_params == 4 * 5 + 5 + 5 * 3 + 3
    assert all(np.all(bias == 0.0) for bias in a.biases)
    assert not np.array_equal(a.flat(), init_params((4, 5, 3), seed=2).flat())


def test_init_rejects_bad_sizes():
    with pytest.raises(ShapeError):
        init_params((4,), seed=0)
    with pytest.raises(ConfigError):
        init_params((4, 2), seed=0, activation="tanh")


def test_forward_rows_are_distributions(batch):
    features, _ = batch
    pred = forward(init_params((4, 6, 3), seed=0), features)
    assert pred.probs.shape == (9, 3)
    assert np.allclose(pred.probs.sum(axis=1), 1.0)
    assert np.array_equal(pred.labels, np.argmax(pred.probs, axis=1))


def test_forward_rejects_wrong_width(batch):
    features, _ = batch
    with pytest.raises(ShapeError):
        forward(init_params((3, 2), seed=0), features)


def test_cross_entropy_floor():
    probs = np.array([[1.0, 0.0], [0.5, 0.5]])
    value = cross_entropy(probs, np.array([1, 0]))
    assert value == pytest.approx((-np.log(1e-12) - np.log(0.5)) / 2)


def test_cross_entropy_floor_read_from_config(monkeypatch):
    monkeypatch.setitem(get_config().estimation, "log_floor", 1e-3)
    probs = np.array([[1.0, 0.0], [0.5, 0.5]])
    value = cross_entropy(probs, np.array([1, 0]))
    assert value == pytest.approx((-np.log(1e-3) - np.log(0.5)) / 2)


@pytest.mark.parametrize("sizes", [(4, 3), (4, 6, 3), (4, 5, 4, 3)])
def test_backward_matches_finite_differences(batch, sizes):
    features, labels = batch
    params = init_params(sizes, seed=3)
    weights = np.linspace(0.5, 1.5, labels.size)

    def objective(vector):
        return loss(ModelParams.from_flat(sizes, vector), features, labels, weights)

    analytic = backward(params, features, labels, sample_weights=weights).flat()
    result = check_gradient("ce", objective, analytic, params.flat(), tolerance=1e-5)
    assert result.passed, result.to_dict()


def test_upstream_probability_gradient_chains_through_softmax(batch):
    features, labels = batch
    sizes = (4, 5, 3)
    params = init_params(sizes, seed=4)
    upstream = np.random.default_rng(9).normal(size=(labels.size, 3))

    def objective(vector):
        candidate = ModelParams.from_flat(sizes, vector)
        probs = forward(candidate, features).probs
        return cross_entropy(probs, labels) + float(np.sum(upstream * probs))

    analytic = backward(params, features, labels, prob_grad=upstream).flat()
    assert check_gradient("upstream", objective, analytic, params.flat(), tolerance=1e-5).passed


def test_backward_shape_checks(batch):
    features, labels = batch
    params = init_params((4, 3), seed=0)
    with pytest.raises(ShapeError):
        backward(params, features, labels[:-1])
    with pytest.raises(ShapeError):
        backward(params, features, labels, prob_grad=np.zeros((9, 2)))


def test_checkpoint_round_trip_is_exact(tmp_path):
    params = init_params((3, 4, 2), seed=7)
    encoding = FeatureEncoding(feature_names=("age", "hours", "x"), continuous=(0, 1),
                               means=(38.5, 40.1), scales=(13.2, 12.0))
    path = save_checkpoint(params, tmp_path / "model" / "checkpoint.json", encoding, ("<=50K", ">50K"))
    loaded, loaded_encoding, classes = load_checkpoint(path)
    assert np.array_equal(loaded.flat(), params.flat())
    assert loaded.layer_sizes == params.layer_sizes
    assert loaded_encoding == encoding
    assert classes == ("<=50K", ">50K")
    assert json.loads(path.read_text())["format_version"] == 1


def test_checkpoint_version_mismatch(tmp_path):
    path = save_checkpoint(init_params((2, 2), seed=0), tmp_path / "c.json")
    document = json.loads(path.read_text())
    document["format_version"] = 99
    path.write_text(json.dumps(document))
    with pytest.raises(ConfigError):
        load_checkpoint(path)
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_checkpoint(path)
    with pytest.raises(FileNotFoundError):
        load_checkpoint(tmp_path / "missing.json")
