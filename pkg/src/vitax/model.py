"""Dense feed-forward ReLU networks: loading, evaluation and input gradients."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ClassOutOfRange,
    DegenerateLogits,
    DimensionMismatch,
    MalformedModel,
    NonFiniteWeight,
)


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DenseLayer:
    """``out = act(weights @ in + bias)``; ``weights[i, j]`` connects input j to output i."""

    weights: np.ndarray
    bias: np.ndarray
    activation: Activation = Activation.RELU

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise DimensionMismatch(f"weights must be a non-empty matrix, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise DimensionMismatch(
                f"bias length {b.shape} does not match out_dim {w.shape[0]}"
            )
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise NonFiniteWeight("layer contains NaN or infinite parameters")
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "bias", _frozen(b))
        object.__setattr__(self, "activation", Activation(self.activation))

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def is_relu(self) -> bool:
        return self.activation is Activation.RELU


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable stack of dense layers mapping ``n`` features to ``m`` raw logits."""

    layers: tuple
    input_shape: tuple = None

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise MalformedModel("network needs at least one layer")
        for k in range(len(layers) - 1):
            if layers[k].out_dim != layers[k + 1].in_dim:
                raise DimensionMismatch(
                    f"layer {k} out_dim={layers[k].out_dim} but layer {k + 1} "
                    f"in_dim={layers[k + 1].in_dim}"
                )
        if layers[-1].activation is not Activation.IDENTITY:
            raise MalformedModel("last layer must use the identity activation (raw logits)")
        shape = self.input_shape
        if shape is None:
            shape = (1, layers[0].in_dim, 1)
        shape = tuple(int(s) for s in shape)
        if len(shape) != 3 or min(shape) < 1:
            raise MalformedModel(f"input_shape must be [h, w, c] of positive ints, got {shape}")
        if math.prod(shape) != layers[0].in_dim:
            raise DimensionMismatch(
                f"input_shape {shape} has {math.prod(shape)} features but the first layer "
                f"expects {layers[0].in_dim}"
            )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input_shape", shape)

    @property
    def n(self) -> int:
        return self.layers[0].in_dim

    @property
    def m(self) -> int:
        return self.layers[-1].out_dim

    @classmethod
    def from_arrays(cls, weights, biases, activations=None, input_shape=None) -> "Network":
        if activations is None:
            activations = ["relu"] * (len(weights) - 1) + ["identity"]
        return cls(
            tuple(DenseLayer(w, b, a) for w, b, a in zip(weights, biases, activations)),
            input_shape,
        )

    def to_dict(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "layers": [
                {
                    "weights": layer.weights.tolist(),
                    "bias": layer.bias.tolist(),
                    "activation": layer.activation.value,
                }
                for layer in self.layers
            ],
        }

    # convenience delegates
    def forward(self, x) -> np.ndarray:
        return forward(self, x)

    def predict(self, x) -> int:
        return predict(self, x)

    def gradient(self, x, t: int) -> np.ndarray:
        return gradient(self, x, t)


def network_from_dict(doc) -> Network:
    if not isinstance(doc, dict):
        raise MalformedModel("model document must be an object")
    if "layers" not in doc or not isinstance(doc["layers"], list):
        raise MalformedModel("model document needs a 'layers' list")
    layers = []
    for k, spec in enumerate(doc["layers"]):
        if not isinstance(spec, dict) or not {"weights", "bias", "activation"} <= spec.keys():
            raise MalformedModel(f"layer {k} needs 'weights', 'bias' and 'activation'")
        try:
            act = Activation(spec["activation"])
        except ValueError:
            raise MalformedModel(
                f"layer {k}: unknown activation {spec['activation']!r}"
            ) from None
        try:
            w = np.array(spec["weights"], dtype=np.float64)
            b = np.array(spec["bias"], dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise MalformedModel(f"layer {k}: weights/bias are not numeric arrays ({exc})") from None
        if w.ndim != 2 or b.ndim != 1:
            raise MalformedModel(f"layer {k}: weights must be 2-D and bias 1-D")
        layers.append(DenseLayer(w, b, act))
    shape = doc.get("input_shape")
    if shape is not None and (
        not isinstance(shape, list) or not all(isinstance(s, int) for s in shape)
    ):
        raise MalformedModel("input_shape must be a list of integers [h, w, c]")
    return Network(tuple(layers), tuple(shape) if shape is not None else None)


def load_network(path) -> Network:
    """Read a network from a JSON model file."""
    path = Path(path)
    text = path.read_text()
    try:
        doc = json.loads(text, parse_constant=lambda c: float(c))
    except json.JSONDecodeError as exc:
        raise MalformedModel(f"{path}: not valid JSON ({exc})") from None
    return network_from_dict(doc)


def save_network(net: Network, path) -> None:
    Path(path).write_text(json.dumps(net.to_dict(), allow_nan=False))


def from_sklearn_mlp(mlp, input_shape=None) -> Network:
    """Convert a fitted ``sklearn.neural_network.MLPClassifier`` with ReLU hidden units.

    Binary classifiers expose a single logit ``z``; it becomes the pair ``(0, z)`` so
    that argmax still matches ``mlp.predict``.
    """
    if getattr(mlp, "activation", None) != "relu":
        raise MalformedModel("only ReLU MLPs can be converted")
    weights = [np.asarray(w).T for w in mlp.coefs_]
    biases = [np.asarray(b) for b in mlp.intercepts_]
    if weights[-1].shape[0] == 1:
        weights[-1] = np.vstack([np.zeros_like(weights[-1]), weights[-1]])
        biases[-1] = np.concatenate([[0.0], biases[-1]])
    return Network.from_arrays(weights, biases, input_shape=input_shape)


def _check_input(net: Network, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (net.n,):
        raise DimensionMismatch(f"expected an input vector of length {net.n}, got shape {x.shape}")
    return x


def _check_class(net: Network, t) -> int:
    t = int(t)
    if not 0 <= t < net.m:
        raise ClassOutOfRange(f"class {t} outside [0, {net.m})")
    return t


def forward(net: Network, x) -> np.ndarray:
    """Raw logits of ``net`` at ``x``."""
    z = _check_input(net, x)
    for layer in net.layers:
        z = layer.weights @ z + layer.bias
        if layer.is_relu:
            z = np.maximum(z, 0.0)
    return z


def predict(net: Network, x) -> int:
    # np.argmax returns the first maximum, i.e. ties go to the lowest class index
    return int(np.argmax(forward(net, x)))


def normalize_minmax(logits: Sequence[float]) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size < 2:
        raise DimensionMismatch("min-max normalisation needs at least two logits")
    lo, hi = z.min(), z.max()
    if hi == lo:
        raise DegenerateLogits("all logits are equal; min-max normalisation is undefined")
    return (z - lo) / (hi - lo)


def gradient(net: Network, x, t: int) -> np.ndarray:
    """Gradient of raw logit ``t`` with respect to the input (ReLU'(0) = 0)."""
    z = _check_input(net, x)
    t = _check_class(net, t)
    masks = []
    for layer in net.layers:
        pre = layer.weights @ z + layer.bias
        if layer.is_relu:
            masks.append(pre > 0.0)
            z = np.maximum(pre, 0.0)
        else:
            masks.append(None)
            z = pre
    g = np.zeros(net.m)
    g[t] = 1.0
    for layer, mask in zip(reversed(net.layers), reversed(masks)):
        if mask is not None:
            g = g * mask
        g = layer.weights.T @ g
    return g
