"""Softmax Classifier.

Feed-forward network with ReLU hidden layers and a softmax output, with
exact manual forward and backward passes and JSON checkpoints.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import special

from ..config import get_config
from ..exceptions import ConfigError, ShapeError
from ..models import FeatureEncoding, Gradients, ModelParams, Prediction

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
ACTIVATIONS = ("relu",)


def init_params(layer_sizes: Sequence[int], seed: int, activation: str = "relu") -> ModelParams:
    """Weights ~ N(0, 1/fan_in), zero biases.

    Args:
        layer_sizes: (inputs, hidden..., classes); no hidden sizes gives
            multinomial logistic regression
        seed: Initialization seed
        activation: Hidden activation

    Returns:
        Fresh ModelParams
    """
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ShapeError(f"layer sizes must be >= 1 with at least input and output, got {sizes}")
    if activation not in ACTIVATIONS:
        raise ConfigError(f"Unsupported activation '{activation}'")

    rng = np.random.default_rng(seed)
    weights = [
        rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_in, fan_out))
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:])
    ]
    biases = [np.zeros(fan_out) for fan_out in sizes[1:]]
    return ModelParams(weights=tuple(weights), biases=tuple(biases), activation=activation)


def _log_floor() -> float:
    return float(get_config().get("estimation.log_floor", 1e-12))


def _check_features(params: ModelParams, features: np.ndarray) -> np.ndarray:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != params.layer_sizes[0]:
        raise ShapeError(f"features of shape {features.shape} do not match input size {params.layer_sizes[0]}")
    if not np.all(np.isfinite(features)):
        raise ValueError("features contain non-finite values")
    return features


def _propagate(params: ModelParams, features: np.ndarray) -> Tuple[List[np.ndarray], np.ndarray]:
    """Layer inputs (features first, then hidden activations) and output probabilities."""
    inputs = [features]
    hidden = features
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = hidden @ w + b
        if i == last:
            return inputs, special.softmax(z, axis=1)
        hidden = np.maximum(z, 0.0)
        inputs.append(hidden)
    raise ShapeError("model has no layers")


def forward(params: ModelParams, features: np.ndarray) -> Prediction:
    """Class probabilities for a batch."""
    _, probs = _propagate(params, _check_features(params, features))
    return Prediction(probs=probs)


def cross_entropy(probs: np.ndarray, labels: np.ndarray, sample_weights: Optional[np.ndarray] = None) -> float:
    """Weighted mean of -log max(p_y, estimation.log_floor)."""
    labels = np.asarray(labels, dtype=np.int64)
    picked = probs[np.arange(labels.size), labels]
    weights = np.ones(labels.size) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64)
    return float(np.sum(weights * -np.log(np.maximum(picked, _log_floor()))) / labels.size)


def loss(params: ModelParams, features: np.ndarray, labels: Sequence[int],
         sample_weights: Optional[np.ndarray] = None) -> float:
    _, probs = _propagate(params, _check_features(params, features))
    return cross_entropy(probs, np.asarray(labels), sample_weights)


def backward(
    params: ModelParams,
    features: np.ndarray,
    labels: Sequence[int],
    sample_weights: Optional[np.ndarray] = None,
    prob_grad: Optional[np.ndarray] = None
) -> Gradients:
    """Gradient of weighted mean cross-entropy plus sum(prob_grad * probs).

    Args:
        params: Current parameters
        features: Batch matrix
        labels: Class codes
        sample_weights: Per-row loss weights (default 1)
        prob_grad: Upstream gradient w.r.t. the output probabilities,
            e.g. eta times the regularizer gradient

    Returns:
        Gradients shaped like `params`
    """
    features = _check_features(params, features)
    labels = np.asarray(labels, dtype=np.int64).reshape(-1)
    n = features.shape[0]
    if labels.size != n:
        raise ShapeError(f"{labels.size} labels for {n} rows")
    weights = np.ones(n) if sample_weights is None else np.asarray(sample_weights, dtype=np.float64).reshape(-1)
    if weights.size != n:
        raise ShapeError(f"{weights.size} sample weights for {n} rows")

    inputs, probs = _propagate(params, features)
    n_classes = probs.shape[1]
    onehot = np.eye(n_classes)[labels]
    # The floored log is flat below the floor.
    live = probs[np.arange(n), labels] > _log_floor()
    delta = (weights * live / n)[:, None] * (probs - onehot)

    if prob_grad is not None:
        upstream = np.asarray(prob_grad, dtype=np.float64)
        if upstream.shape != probs.shape:
            raise ShapeError(f"probability gradient of shape {upstream.shape}, expected {probs.shape}")
        delta = delta + probs * (upstream - np.sum(probs * upstream, axis=1, keepdims=True))

    grad_w: List[np.ndarray] = [np.empty(0)] * len(params.weights)
    grad_b: List[np.ndarray] = [np.empty(0)] * len(params.biases)
    for i in range(len(params.weights) - 1, -1, -1):
        grad_w[i] = inputs[i].T @ delta
        grad_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ params.weights[i].T) * (inputs[i] > 0)
    return Gradients(weights=tuple(grad_w), biases=tuple(grad_b))


def save_checkpoint(
    params: ModelParams,
    path: Union[str, Path],
    encoding: Optional[FeatureEncoding] = None,
    class_names: Optional[Sequence[str]] = None
) -> Path:
    """Write a version-1 JSON checkpoint; floats round-trip exactly."""
    path = Path(path)
    document = {
        "format_version": CHECKPOINT_VERSION,
        "layer_sizes": list(params.layer_sizes),
        "activation": params.activation,
        "params": [float(v) for v in params.flat()],
        "encoding": encoding.to_dict() if encoding is not None else None,
        "class_names": list(class_names) if class_names is not None else None
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    logger.info(f"Saved checkpoint with {params.n_params} parameters to {path}")
    return path


def load_checkpoint(
    path: Union[str, Path]
) -> Tuple[ModelParams, Optional[FeatureEncoding], Optional[Tuple[str, ...]]]:
    """Read a checkpoint back into (params, encoding, class names)."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        try:
            document = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Checkpoint {path} is not valid JSON: {e}")

    version = document.get("format_version")
    if version != CHECKPOINT_VERSION:
        raise ConfigError(f"Checkpoint {path} has format_version {version}, expected {CHECKPOINT_VERSION}")

    params = ModelParams.from_flat(
        document["layer_sizes"], np.asarray(document["params"], dtype=np.float64),
        activation=document.get("activation", "relu")
    )
    encoding = FeatureEncoding.from_dict(document["encoding"]) if document.get("encoding") else None
    class_names = tuple(document["class_names"]) if document.get("class_names") else None
    return params, encoding, class_names
