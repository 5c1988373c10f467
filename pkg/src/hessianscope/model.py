"""Small feed-forward classifiers parameterized by one flat vector.

The default desk-scale architectures are an MLP 784-32-32-10 for
image-sized runs and 2-16-2 for synthetic runs. A convolution front-end
is a possible extension point but is not part of the current surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ndcore import tape as tp
from .ndcore.operator import DimensionMismatchError, LossOperator


@dataclass(frozen=True)
class ModelSpec:
    """Layer widths (input first, classes last), activation, init seed."""

    layers: tuple[int, ...]
    activation: str = "softplus"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(int(n) for n in self.layers))
        if len(self.layers) < 2:
            raise ValueError("need at least input and output layer sizes")
        if any(n <= 0 for n in self.layers):
            raise ValueError(f"zero or negative layer size in {self.layers}")
        if self.activation not in tp.ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    @property
    def classes(self) -> int:
        return self.layers[-1]

    @property
    def in_dim(self) -> int:
        return self.layers[0]

    def layout(self) -> list[tuple[int, ...]]:
        """Parameter slot shapes: (W, b) per layer, in order."""
        shapes = []
        for fan_in, fan_out in zip(self.layers, self.layers[1:]):
            shapes.append((fan_in, fan_out))
            shapes.append((fan_out,))
        return shapes

    @property
    def param_count(self) -> int:
        return sum(int(np.prod(s)) for s in self.layout())

    def to_dict(self) -> dict:
        return {"layers": list(self.layers), "activation": self.activation,
                "seed": self.seed}

    @staticmethod
    def from_dict(d: dict) -> "ModelSpec":
        return ModelSpec(tuple(d["layers"]), d["activation"], int(d["seed"]))


@dataclass(frozen=True)
class Batch:
    inputs: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        if self.inputs.ndim != 2 or self.inputs.shape[0] < 1:
            raise ValueError(f"bad batch inputs shape {self.inputs.shape}")
        if self.labels.shape != (self.inputs.shape[0],):
            raise ValueError("labels must be one integer per input row")


def init_params(spec: ModelSpec) -> np.ndarray:
    """Deterministic init: W ~ U(-sqrt(3)/sqrt(fan_in), +sqrt(3)/sqrt(fan_in))
    so the per-layer weight std is 1/sqrt(fan_in); biases zero."""
    rng = np.random.default_rng(spec.seed)
    parts = []
    for shape in spec.layout():
        if len(shape) == 2:
            fan_in = shape[0]
            bound = np.sqrt(3.0) / np.sqrt(fan_in)
            parts.append(rng.uniform(-bound, bound, size=shape).ravel())
        else:
            parts.append(np.zeros(shape))
    return np.concatenate(parts)


def _check_labels(labels: np.ndarray, classes: int):
    if labels.size and (labels.min() < 0 or labels.max() >= classes):
        bad = labels[(labels < 0) | (labels >= classes)][0]
        raise ValueError(f"label {bad} outside [0, {classes})")


def loss_graph_builder(spec: ModelSpec):
    """Mean softmax cross-entropy graph for ``spec``; log-sum-exp stabilized."""
    act = tp.ACTIVATIONS[spec.activation]
    n_layers = len(spec.layers) - 1

    def build(leaves, tape, inputs, labels):
        onehot = np.zeros((labels.shape[0], spec.classes))
        onehot[np.arange(labels.shape[0]), labels] = 1.0
        a = inputs
        for i in range(n_layers):
            w, b = leaves[2 * i], leaves[2 * i + 1]
            z = tp.add(tp.matmul(a, w), b)
            a = act(z) if i < n_layers - 1 else z
        lse = tp.logsumexp_rows(a)
        picked = tp.ssum(tp.mul(a, onehot), axis=1, keepdims=True)
        total = tp.ssum(tp.sub(lse, picked))
        return tp.mul(total, 1.0 / labels.shape[0])

    return build


def make_loss_operator(spec: ModelSpec, inputs, labels, l2: float = 0.0,
                       tag: str = "") -> LossOperator:
    """Bundle ``spec`` with a fixed sample set into a deterministic operator."""
    inputs = np.ascontiguousarray(inputs, dtype=np.float64)
    labels = np.ascontiguousarray(labels, dtype=np.int64)
    if inputs.shape[1] != spec.in_dim:
        raise DimensionMismatchError(
            f"inputs have {inputs.shape[1]} features, model expects {spec.in_dim}")
    _check_labels(labels, spec.classes)
    return LossOperator(spec.layout(), loss_graph_builder(spec), inputs,
                        labels, l2=l2, tag=tag)


def forward_loss(spec: ModelSpec, theta, batch: Batch) -> float:
    """Mean softmax cross-entropy of ``theta`` on one batch."""
    return make_loss_operator(spec, batch.inputs, batch.labels).loss(theta)
