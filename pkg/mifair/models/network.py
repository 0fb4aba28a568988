"""Network Data Models.

Parameters and gradients of the feed-forward softmax classifier.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..exceptions import ShapeError


def _readonly(arrays: Sequence[np.ndarray]) -> Tuple[np.ndarray, ...]:
    out = []
    for array in arrays:
        copy = np.array(array, dtype=np.float64, copy=True)
        copy.setflags(write=False)
        out.append(copy)
    return tuple(out)


@dataclass(frozen=True, eq=False)
class ModelParams:
    """Per-layer weights (fan_in x fan_out) and biases (fan_out).
    
    Zero hidden layers is multinomial logistic regression.
    """
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    activation: str = "relu"
    
    def __post_init__(self) -> None:
        weights = _readonly(self.weights)
        biases = _readonly(self.biases)
        if not weights or len(weights) != len(biases):
            raise ShapeError("Need one bias vector per weight matrix")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"Layer {i}: weight {w.shape} and bias {b.shape} do not match")
            if i > 0 and weights[i - 1].shape[1] != w.shape[0]:
                raise ShapeError(f"Layer {i} input {w.shape[0]} does not chain from {weights[i - 1].shape[1]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"Layer {i} holds non-finite parameters")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "biases", biases)
    
    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)
    
    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))
    
    def flat(self) -> np.ndarray:
        """All parameters as one vector: W0, b0, W1, b1, ..."""
        parts: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            parts.extend([w.reshape(-1), b])
        return np.concatenate(parts)
    
    @classmethod
    def from_flat(cls, layer_sizes: Sequence[int], vector: np.ndarray, activation: str = "relu") -> 'ModelParams':
        vector = np.asarray(vector, dtype=np.float64).reshape(-1)
        expected = sum(a * b + b for a, b in zip(layer_sizes[:-1], layer_sizes[1:]))
        if vector.size != expected:
            raise ShapeError(f"Expected {expected} parameters for sizes {tuple(layer_sizes)}, got {vector.size}")
        weights, biases, offset = [], [], 0
        for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            weights.append(vector[offset:offset + fan_in * fan_out].reshape(fan_in, fan_out))
            offset += fan_in * fan_out
            biases.append(vector[offset:offset + fan_out])
            offset += fan_out
        return cls(weights=tuple(weights), biases=tuple(biases), activation=activation)
    
    def to_dict(self) -> Dict:
        return {
            "layer_sizes": list(self.layer_sizes),
            "activation": self.activation,
            "n_params": self.n_params
        }


@dataclass(frozen=True, eq=False)
class Gradients:
    """Gradients shaped like the owning ModelParams."""
    weights: Tuple[np.ndarray, ...]
    biases: Tuple[np.ndarray, ...]
    
    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "biases", _readonly(self.biases))
        for g in self.weights + self.biases:
            if not np.all(np.isfinite(g)):
                raise ValueError("Gradients must be finite")
    
    def matches(self, params: ModelParams) -> bool:
        return (len(self.weights) == len(params.weights)
                and all(g.shape == w.shape for g, w in zip(self.weights, params.weights))
                and all(g.shape == b.shape for g, b in zip(self.biases, params.biases)))
    
    def flat(self) -> np.ndarray:
        parts: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            parts.extend([w.reshape(-1), b])
        return np.concatenate(parts)
