"""Dense feed-forward classifier: four linear layers with ReLU between them.

Default architecture is 132 -> 256 -> 128 -> 64 -> 8: the flattened pose
frame in, one raw logit per gesture class out (no activation after the
last layer; softmax is applied only for prediction). Everything runs in
float64 and the backward pass returns exact analytic gradients, so the
whole stack is deterministic and finite-difference checkable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FRAME_WIDTH, NUM_CLASSES, GestureClass, PoseFrame, flatten_frame

DEFAULT_DIMS = (FRAME_WIDTH, 256, 128, 64, NUM_CLASSES)


@dataclass
class DenseLayer:
    """One linear transformation y = x @ weights.T + bias.

    weights has shape (out_dim, in_dim), bias (out_dim,).
    """

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ValueError(f"weights must be 2-D, got shape {w.shape}")
        if b.shape != (w.shape[0],):
            raise ValueError(f"bias shape {b.shape} does not match out_dim {w.shape[0]}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ValueError("layer parameters contain non-finite values")
        self.weights = w
        self.bias = b

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def copy(self) -> "DenseLayer":
        return DenseLayer(self.weights.copy(), self.bias.copy())


@dataclass
class MlpModel:
    """A stack of dense layers, ReLU after every layer except the last."""

    layers: list[DenseLayer]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("model needs at least one layer")
        for k in range(1, len(self.layers)):
            prev, cur = self.layers[k - 1], self.layers[k]
            if cur.in_dim != prev.out_dim:
                raise ValueError(
                    f"layer {k} in_dim {cur.in_dim} != layer {k - 1} out_dim {prev.out_dim}"
                )

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.layers[0].in_dim, *(layer.out_dim for layer in self.layers))

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim

    def copy(self) -> "MlpModel":
        return MlpModel([layer.copy() for layer in self.layers])

    @classmethod
    def initialize(cls, dims=DEFAULT_DIMS, seed: int = 0) -> "MlpModel":
        """He-normal weights (std = sqrt(2/in_dim)) from a seeded PRNG, zero biases."""
        if len(dims) < 2:
            raise ValueError("need at least an input and an output dimension")
        rng = np.random.default_rng(seed)
        layers = []
        for in_dim, out_dim in zip(dims[:-1], dims[1:]):
            std = np.sqrt(2.0 / in_dim)
            layers.append(DenseLayer(rng.normal(0.0, std, (out_dim, in_dim)), np.zeros(out_dim)))
        return cls(layers)


@dataclass
class GradientSet:
    """Per-layer loss gradients, shape-congruent with the model."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weight and bias gradient lists differ in length")


def relu(v: np.ndarray) -> np.ndarray:
    """Elementwise max(0, x)."""
    return np.maximum(0.0, v)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis (max-shifted before exponentiation)."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    """Stable log-softmax via the log-sum-exp identity."""
    z = np.asarray(logits, dtype=np.float64)
    shifted = z - np.max(z, axis=-1, keepdims=True)
    return shifted - np.log(np.sum(np.exp(shifted), axis=-1, keepdims=True))


def cross_entropy_loss(logits: np.ndarray, target: int) -> float:
    """-log softmax(logits)[target], computed in the stable log-sum-exp form."""
    z = np.asarray(logits, dtype=np.float64)
    if not 0 <= target < z.shape[-1]:
        raise ValueError(f"target index {target} out of range for {z.shape[-1]} classes")
    return float(-log_softmax(z)[target])


def forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """Run the network on one flat input vector, returning raw logits."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.in_dim,):
        raise ValueError(f"input shape {x.shape} does not match model in_dim {model.in_dim}")
    return forward_batch(model, x[None, :])[0]


def forward_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    """Forward pass on a (n, in_dim) batch; returns (n, out_dim) logits."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.in_dim:
        raise ValueError(f"batch shape {X.shape} does not match model in_dim {model.in_dim}")
    a = X
    last = len(model.layers) - 1
    for k, layer in enumerate(model.layers):
        a = a @ layer.weights.T + layer.bias
        if k != last:
            a = relu(a)
    return a


def backward(model: MlpModel, x: np.ndarray, target: int) -> tuple[float, GradientSet]:
    """Loss and exact gradients of the per-sample cross-entropy loss."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.in_dim,):
        raise ValueError(f"input shape {x.shape} does not match model in_dim {model.in_dim}")
    return backward_batch(model, x[None, :], np.array([target]))


def backward_batch(model: MlpModel, X: np.ndarray, targets: np.ndarray) -> tuple[float, GradientSet]:
    """Mean cross-entropy loss over the batch and its exact gradients.

    The softmax is folded into the loss gradient (probs - one_hot) / n,
    so the returned gradients are those of the mean per-sample loss.
    """
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets)
    if X.ndim != 2 or X.shape[1] != model.in_dim:
        raise ValueError(f"batch shape {X.shape} does not match model in_dim {model.in_dim}")
    n = X.shape[0]
    if targets.shape != (n,):
        raise ValueError(f"targets shape {targets.shape} does not match batch size {n}")
    n_out = model.out_dim
    if np.any(targets < 0) or np.any(targets >= n_out):
        raise ValueError(f"target index out of range for {n_out} classes")

    # Forward, keeping pre- and post-activation values for backprop.
    activations = [X]  # layer inputs
    pre_acts = []
    a = X
    last = len(model.layers) - 1
    for k, layer in enumerate(model.layers):
        z = a @ layer.weights.T + layer.bias
        pre_acts.append(z)
        a = relu(z) if k != last else z
        if k != last:
            activations.append(a)
    logits = a

    log_probs = log_softmax(logits)
    loss = float(-np.mean(log_probs[np.arange(n), targets]))

    # Backward: d(mean loss)/d(logits) = (softmax - one_hot) / n.
    delta = np.exp(log_probs)
    delta[np.arange(n), targets] -= 1.0
    delta /= n

    grad_w = [None] * len(model.layers)
    grad_b = [None] * len(model.layers)
    for k in range(len(model.layers) - 1, -1, -1):
        grad_w[k] = delta.T @ activations[k]
        grad_b[k] = delta.sum(axis=0)
        if k > 0:
            delta = (delta @ model.layers[k].weights) * (pre_acts[k - 1] > 0)
    return loss, GradientSet(grad_w, grad_b)


def predict(model: MlpModel, frame: PoseFrame) -> tuple[GestureClass, np.ndarray]:
    """Classify one frame: argmax of softmax probabilities, lowest index on ties."""
    probs = softmax(forward(model, flatten_frame(frame)))
    return GestureClass.from_index(int(np.argmax(probs))), probs
