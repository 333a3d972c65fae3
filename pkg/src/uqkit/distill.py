"""Confidence distillation: loss, cascade inputs, and a small trainable model.

A separate confidence model learns to predict the softened ensemble
probability of the true class from the instance features concatenated
with the softened probability vector. Because that target is available
without ground truth at training time only, the trained model serves as
its stand-in at inference, scoring each prediction with a confidence in
(0, 1).

The model itself is deliberately plain: fully connected layers with tanh
hidden activations and a sigmoid output, trained by mini-batch gradient
descent on the confidence loss (binary cross entropy against the soft
target). Everything is numpy; a fixed seed reproduces training
bit-for-bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .ensemble import average_probs, temperature_scale
from .rng import PortableRng

MODEL_FORMAT = "udist-model-v1"
LOSS_CLAMP = 1e-7
TARGET_CLAMP = 1e-4
DEFAULT_HIDDEN = (32, 32)


def confidence_loss(s: float, p_t: float) -> float:
    """Cross entropy between a confidence score and a soft target, >= 0.

    The score is clamped to [1e-7, 1 - 1e-7] before the logs; the minimum
    over s sits at s = p_t, where the loss equals the entropy of p_t.
    """
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"confidence {s} outside [0, 1]")
    if not (0.0 <= p_t <= 1.0):
        raise ValueError(f"target {p_t} outside [0, 1]")
    sc = min(max(s, LOSS_CLAMP), 1.0 - LOSS_CLAMP)
    return -(p_t * math.log(sc) + (1.0 - p_t) * math.log(1.0 - sc))


def confidence_loss_grad(s: float, p_t: float) -> float:
    """Derivative of :func:`confidence_loss` with respect to s, at the clamped s."""
    if not (0.0 <= s <= 1.0):
        raise ValueError(f"confidence {s} outside [0, 1]")
    if not (0.0 <= p_t <= 1.0):
        raise ValueError(f"target {p_t} outside [0, 1]")
    sc = min(max(s, LOSS_CLAMP), 1.0 - LOSS_CLAMP)
    return -p_t / sc + (1.0 - p_t) / (1.0 - sc)


def multilabel_confidence_loss(s: Sequence[float], p_t: Sequence[float]) -> float:
    """Confidence loss averaged over classes."""
    if len(s) != len(p_t):
        raise ValueError(f"{len(s)} scores vs {len(p_t)} targets")
    if len(s) == 0:
        raise ValueError("empty score vector")
    return float(np.mean([confidence_loss(si, ti) for si, ti in zip(s, p_t)]))


def build_cascade_input(features: Sequence[float], softened_probs: Sequence[float]) -> np.ndarray:
    """Concatenate instance features with the softened probability vector."""
    f = np.asarray(features, dtype=np.float64)
    p = np.asarray(softened_probs, dtype=np.float64)
    if f.size == 0 or p.size == 0:
        raise ValueError("features and softened probabilities must be non-empty")
    return np.concatenate([f, p])


@dataclass(frozen=True)
class CascadeExample:
    """One training example: features, softened ensemble probs, soft target."""

    features: np.ndarray
    softened_probs: np.ndarray
    target: float

    def __post_init__(self) -> None:
        if not (0.0 < self.target < 1.0):
            raise ValueError(f"target must lie strictly in (0, 1), got {self.target}")


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; the defaults fit the bundled synthetic task.

    Plain full-batch descent on a constant-target dataset decreases the
    loss monotonically for learning rates up to about 0.25; the larger
    default relies on the step decay to settle.
    """

    learning_rate: float = 1.0
    epochs: int = 200
    batch_size: int = 64
    seed: int = 0
    train_temperature: float = 8.0
    hidden_sizes: tuple[int, ...] = DEFAULT_HIDDEN
    lr_decay: float = 0.1  # multiplier applied at 1/2 and 3/4 of the epochs

    def __post_init__(self) -> None:
        if self.learning_rate <= 0 or self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("learning_rate, epochs and batch_size must be positive")
        if self.train_temperature <= 0:
            raise ValueError("train_temperature must be positive")
        if not (0.0 < self.lr_decay <= 1.0):
            raise ValueError("lr_decay must lie in (0, 1]")


class ConfidenceModel:
    """Fully connected tanh network with a sigmoid output head.

    ``weights[i]`` has shape (layer_sizes[i], layer_sizes[i+1]); biases are
    row vectors. The final layer output is passed through a sigmoid, so
    predictions always lie strictly in (0, 1).
    """

    def __init__(self, weights: list[np.ndarray], biases: list[np.ndarray]):
        if len(weights) != len(biases) or len(weights) < 1:
            raise ValueError("need matching, non-empty weight and bias lists")
        for i, (w, b) in enumerate(zip(weights, biases)):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ValueError(f"layer {i}: inconsistent parameter shapes")
            if i > 0 and weights[i - 1].shape[1] != w.shape[0]:
                raise ValueError(f"layer {i}: input width does not match previous layer")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {i}: non-finite parameters")
        self.weights = weights
        self.biases = biases
        self.epoch_losses: list[float] = []

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Batch forward pass; returns sigmoid outputs of shape (n, output_dim)."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ValueError(
                f"input width {x.shape[-1] if x.ndim else 0} does not match model "
                f"input dim {self.input_dim}"
            )
        a = x
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = np.tanh(a @ w + b)
        z = a @ self.weights[-1] + self.biases[-1]
        return 1.0 / (1.0 + np.exp(-z))

    def to_json(self) -> str:
        obj = {
            "format": MODEL_FORMAT,
            "layer_sizes": self.layer_sizes,
            "activation": "tanh",
            "weights": [w.flatten().tolist() for w in self.weights],  # row-major
            "biases": [b.tolist() for b in self.biases],
        }
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "ConfidenceModel":
        obj = json.loads(text)
        if obj.get("format") != MODEL_FORMAT:
            raise ValueError(f"unsupported model format: {obj.get('format')!r}")
        sizes = obj["layer_sizes"]
        weights = []
        biases = []
        for i in range(len(sizes) - 1):
            w = np.asarray(obj["weights"][i], dtype=np.float64).reshape(sizes[i], sizes[i + 1])
            b = np.asarray(obj["biases"][i], dtype=np.float64)
            weights.append(w)
            biases.append(b)
        return cls(weights, biases)


def init_confidence_model(
    input_dim: int,
    hidden_sizes: Sequence[int] = DEFAULT_HIDDEN,
    output_dim: int = 1,
    rng: PortableRng | None = None,
) -> ConfidenceModel:
    """Glorot-uniform initialized model: bound sqrt(6 / (fan_in + fan_out))."""
    if rng is None:
        rng = PortableRng(0)
    sizes = [input_dim] + list(hidden_sizes) + [output_dim]
    weights = []
    biases = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        w = np.empty((fan_in, fan_out))
        for r in range(fan_in):
            for c in range(fan_out):
                w[r, c] = rng.uniform(-bound, bound)
        weights.append(w)
        biases.append(np.zeros(fan_out))
    return ConfidenceModel(weights, biases)


def predict_confidence(model: ConfidenceModel, x: Sequence[float]) -> float:
    """Confidence for one cascade input vector, strictly inside (0, 1)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != model.input_dim:
        raise ValueError(
            f"input width {arr.shape[0] if arr.ndim == 1 else arr.shape} does not "
            f"match model input dim {model.input_dim}"
        )
    out = model.forward(arr.reshape(1, -1))
    return float(out[0, 0])


def loss_and_grads(
    model: ConfidenceModel, x: np.ndarray, targets: np.ndarray
) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Mean confidence loss over a batch and its parameter gradients.

    The gradient is exact for the clamped loss: where the sigmoid output
    falls outside the clamp range the loss is locally constant in the
    score, so the contribution is zero.
    """
    x = np.asarray(x, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if x.ndim != 2 or x.shape[0] != t.shape[0] or t.shape[1] != model.output_dim:
        raise ValueError("batch inputs and targets have inconsistent shapes")

    activations = [x]
    a = x
    for w, b in zip(model.weights[:-1], model.biases[:-1]):
        a = np.tanh(a @ w + b)
        activations.append(a)
    z = a @ model.weights[-1] + model.biases[-1]
    s = 1.0 / (1.0 + np.exp(-z))

    sc = np.clip(s, LOSS_CLAMP, 1.0 - LOSS_CLAMP)
    loss = float(-np.mean(t * np.log(sc) + (1.0 - t) * np.log(1.0 - sc)))

    scale = 1.0 / t.size
    inside_clamp = (s > LOSS_CLAMP) & (s < 1.0 - LOSS_CLAMP)
    dloss_dsc = (-t / sc + (1.0 - t) / (1.0 - sc)) * scale
    dz = dloss_dsc * inside_clamp * s * (1.0 - s)

    grads: list[tuple[np.ndarray, np.ndarray]] = []
    for layer in range(len(model.weights) - 1, -1, -1):
        a_in = activations[layer]
        dw = a_in.T @ dz
        db = dz.sum(axis=0)
        grads.append((dw, db))
        if layer > 0:
            da = dz @ model.weights[layer].T
            dz = da * (1.0 - activations[layer] ** 2)
    grads.reverse()
    return loss, grads


def train_confidence_model(data: Sequence[CascadeExample], config: TrainConfig) -> ConfidenceModel:
    """Fit a confidence model to cascade examples by mini-batch gradient descent.

    Deterministic given the seed: weight initialization and the per-epoch
    shuffles both come from the portable generator. Targets are clamped
    to [1e-4, 1 - 1e-4] so saturated ensemble outputs cannot pin the loss
    at the log boundary. The learning rate is multiplied by ``lr_decay``
    at the half and three-quarter epoch marks. Raises ArithmeticError if
    the loss goes non-finite.
    """
    if len(data) == 0:
        raise ValueError("no training examples given")
    x = np.stack([build_cascade_input(ex.features, ex.softened_probs) for ex in data])
    t = np.array([ex.target for ex in data], dtype=np.float64).reshape(-1, 1)
    t = np.clip(t, TARGET_CLAMP, 1.0 - TARGET_CLAMP)

    rng = PortableRng(config.seed)
    model = init_confidence_model(x.shape[1], config.hidden_sizes, 1, rng)
    return _fit(model, x, t, config, rng)


def _fit(
    model: ConfidenceModel,
    x: np.ndarray,
    t: np.ndarray,
    config: TrainConfig,
    rng: PortableRng,
) -> ConfidenceModel:
    n = x.shape[0]
    lr = config.learning_rate
    decay_points = {config.epochs // 2, (3 * config.epochs) // 4}
    model.epoch_losses = []
    for epoch in range(config.epochs):
        if epoch in decay_points and epoch > 0:
            lr *= config.lr_decay
        order = rng.permutation(n)
        epoch_loss_total = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            xb = x[batch]
            tb = t[batch]
            loss, grads = loss_and_grads(model, xb, tb)
            if not math.isfinite(loss):
                raise ArithmeticError(
                    f"non-finite training loss at epoch {epoch}, batch start {start}"
                )
            epoch_loss_total += loss * len(batch)
            for (w, b), (dw, db) in zip(zip(model.weights, model.biases), grads):
                w -= lr * dw
                b -= lr * db
        model.epoch_losses.append(epoch_loss_total / n)
    return model


# ---------------------------------------------------------------------------
# Cascade construction from per-instance ensemble outputs
# ---------------------------------------------------------------------------


def make_cascade_examples(
    features: np.ndarray,
    member_probs: np.ndarray,
    true_labels: np.ndarray,
    temperature: float,
) -> list[CascadeExample]:
    """Cascade examples from raw ensemble outputs: average, soften, index by truth.

    ``features`` is (n, d), ``member_probs`` is (n, M, K), ``true_labels``
    is (n,). The target of example i is the softened mean probability of
    class ``true_labels[i]``.
    """
    examples = []
    for i in range(features.shape[0]):
        softened = temperature_scale(average_probs(member_probs[i]), temperature)
        examples.append(
            CascadeExample(
                features=np.asarray(features[i], dtype=np.float64),
                softened_probs=softened,
                target=float(softened[int(true_labels[i])]),
            )
        )
    return examples


def cascade_inputs(features: np.ndarray, member_probs: np.ndarray, temperature: float) -> np.ndarray:
    """Prediction-time input matrix: features next to softened ensemble means."""
    rows = []
    for i in range(features.shape[0]):
        softened = temperature_scale(average_probs(member_probs[i]), temperature)
        rows.append(build_cascade_input(features[i], softened))
    return np.stack(rows)
