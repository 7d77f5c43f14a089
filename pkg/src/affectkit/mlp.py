"""From-scratch feedforward classifier (numpy only).

ReLU hidden layers, softmax output, cross-entropy loss with L2 penalty
(loss = mean CE + l2/2 * sum ||W||^2), Adam updates, inverted dropout on
hidden activations (train time only), and early stopping that restores the
best-validation weights. Everything is driven by one integer seed, so a given
(data, config) pair always trains to the identical model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyInput, InsufficientData, InvalidSpec

N_CLASSES = 3


@dataclass(frozen=True)
class TrainConfig:
    hidden_sizes: tuple[int, ...] = (64, 32)
    learning_rate: float = 1e-3
    dropout: float = 0.2
    l2: float = 1e-4
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 10
    seed: int = 42

    def __post_init__(self):
        if any(h < 1 for h in self.hidden_sizes):
            raise InvalidSpec("hidden sizes must be >= 1")
        if not (0.0 <= self.dropout < 1.0):
            raise InvalidSpec("dropout must lie in [0, 1)")
        if self.learning_rate <= 0 or self.l2 < 0:
            raise InvalidSpec("bad learning rate or l2")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise InvalidSpec("batch size, epochs and patience must be >= 1")


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _init_params(sizes: list[int], rng: np.random.Generator):
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), (fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, x, dropout=0.0, rng=None):
    """Returns (per-layer activations, probs). Dropout masks hidden layers only."""
    acts = [x]
    masks = []
    a = x
    for i, (w, b) in enumerate(zip(weights, biases)):
        z = a @ w + b
        if i < len(weights) - 1:
            a = _relu(z)
            if dropout > 0.0 and rng is not None:
                mask = (rng.random(a.shape) >= dropout) / (1.0 - dropout)
                a = a * mask
                masks.append(mask)
            else:
                masks.append(None)
        else:
            a = softmax(z)
        acts.append(a)
    return acts, masks


def _cross_entropy(probs: np.ndarray, onehot: np.ndarray) -> float:
    clipped = np.clip(probs, 1e-15, 1.0)
    return float(-np.sum(onehot * np.log(clipped)) / probs.shape[0])


def loss_and_gradients(weights, biases, x, onehot, l2=0.0, dropout=0.0, rng=None):
    """Training loss and its exact gradients w.r.t. every weight and bias.

    Backprop through softmax+CE (delta = probs - onehot), ReLU, and the
    inverted-dropout masks when active. The L2 term adds l2*W to each weight
    gradient. Used directly by the finite-difference gradient check.
    """
    acts, masks = _forward(weights, biases, x, dropout=dropout, rng=rng)
    probs = acts[-1]
    n = x.shape[0]
    loss = _cross_entropy(probs, onehot)
    loss += 0.5 * l2 * sum(float(np.sum(w * w)) for w in weights)
    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    delta = (probs - onehot) / n
    for i in range(len(weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta + l2 * weights[i]
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ weights[i].T
            if masks[i - 1] is not None:
                delta = delta * masks[i - 1]
            delta = delta * (acts[i] > 0)
    return loss, grads_w, grads_b


@dataclass
class MlpModel:
    """Trained classifier: weights, the config that produced it, and its
    validation macro-F1 (fixed at train time, reused by decision fusion)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]
    config: TrainConfig
    f1: float = 0.0
    classes: tuple[str, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        arr = np.asarray(x, dtype=float)
        single = arr.ndim == 1
        if single:
            arr = arr[None, :]
        if arr.shape[1] != self.input_dim:
            raise DimensionMismatch(
                f"model expects {self.input_dim} features, got {arr.shape[1]}"
            )
        probs = _forward(self.weights, self.biases, arr)[0][-1]
        return probs[0] if single else probs

    def predict(self, x: np.ndarray) -> np.ndarray:
        probs = np.atleast_2d(self.predict_proba(x))
        return probs.argmax(axis=1)

    def to_dict(self) -> dict:
        return {
            "layer_sizes": [self.input_dim] + [w.shape[1] for w in self.weights],
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "hyper": {
                "hidden_sizes": list(self.config.hidden_sizes),
                "learning_rate": self.config.learning_rate,
                "dropout": self.config.dropout,
                "l2": self.config.l2,
                "batch_size": self.config.batch_size,
                "max_epochs": self.config.max_epochs,
                "patience": self.config.patience,
                "seed": self.config.seed,
            },
            "f1": self.f1,
            "classes": list(self.classes),
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "MlpModel":
        hyper = dict(data["hyper"])
        hyper["hidden_sizes"] = tuple(hyper["hidden_sizes"])
        return cls(
            weights=[np.asarray(w, float) for w in data["weights"]],
            biases=[np.asarray(b, float) for b in data["biases"]],
            config=TrainConfig(**hyper),
            f1=float(data["f1"]),
            classes=tuple(data.get("classes", ())),
            meta=dict(data.get("meta", {})),
        )


@dataclass(frozen=True)
class SspOutput:
    """One window's class-probability vector from one sensor-specific model,
    tagged with that model's (training-time, per-model) validation F1."""

    probs: np.ndarray
    f1: float


def macro_f1(predictions, truths, n_classes: int = N_CLASSES) -> float:
    """Unweighted mean of per-class F1 over all n_classes.

    A class absent from both predictions and truths contributes F1 = 0 (its
    precision and recall are undefined and are taken as 0), which makes the
    score conservative on folds with missing classes.
    """
    pred = np.asarray(predictions, dtype=int)
    true = np.asarray(truths, dtype=int)
    if pred.size == 0 or true.size == 0:
        raise EmptyInput("need nonempty prediction and truth sequences")
    if pred.shape != true.shape:
        raise DimensionMismatch("predictions and truths differ in length")
    scores = []
    for c in range(n_classes):
        tp = int(np.sum((pred == c) & (true == c)))
        fp = int(np.sum((pred == c) & (true != c)))
        fn = int(np.sum((pred != c) & (true == c)))
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        scores.append(
            2 * precision * recall / (precision + recall) if precision + recall else 0.0
        )
    return float(np.mean(scores))


def train(
    x_train: np.ndarray,
    y_train: np.ndarray,
    x_val: np.ndarray,
    y_val: np.ndarray,
    config: TrainConfig = TrainConfig(),
    classes: tuple[str, ...] = (),
) -> MlpModel:
    """Train with Adam + early stopping; returns the best-validation model.

    y arrays hold class indices 0..N_CLASSES-1. Validation cross-entropy is
    monitored each epoch; after ``patience`` epochs without improvement the
    loop stops and the best snapshot is restored. The stored ``f1`` is the
    restored model's validation macro-F1.
    """
    xt = np.asarray(x_train, float)
    yt = np.asarray(y_train, int)
    xv = np.asarray(x_val, float)
    yv = np.asarray(y_val, int)
    if xt.ndim != 2 or xt.shape[0] != yt.size:
        raise DimensionMismatch("x_train/y_train shapes disagree")
    if xv.ndim != 2 or xv.shape[0] != yv.size or xv.shape[1] != xt.shape[1]:
        raise DimensionMismatch("x_val/y_val shapes disagree with training data")
    if xt.shape[0] < 2 or np.unique(yt).size < 2:
        raise InsufficientData("need >= 2 training rows spanning >= 2 classes")

    sizes = [xt.shape[1], *config.hidden_sizes, N_CLASSES]
    rng = np.random.default_rng(config.seed)
    weights, biases = _init_params(sizes, rng)
    onehot_train = np.eye(N_CLASSES)[yt]
    onehot_val = np.eye(N_CLASSES)[yv]

    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_loss = np.inf
    best = None
    strikes = 0
    n = xt.shape[0]
    for _epoch in range(config.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            _, gw, gb = loss_and_gradients(
                weights, biases, xt[batch], onehot_train[batch],
                l2=config.l2, dropout=config.dropout, rng=rng,
            )
            step += 1
            corr1 = 1.0 - beta1**step
            corr2 = 1.0 - beta2**step
            for i in range(len(weights)):
                m_w[i] = beta1 * m_w[i] + (1 - beta1) * gw[i]
                v_w[i] = beta2 * v_w[i] + (1 - beta2) * gw[i] ** 2
                weights[i] -= config.learning_rate * (m_w[i] / corr1) / (
                    np.sqrt(v_w[i] / corr2) + eps
                )
                m_b[i] = beta1 * m_b[i] + (1 - beta1) * gb[i]
                v_b[i] = beta2 * v_b[i] + (1 - beta2) * gb[i] ** 2
                biases[i] -= config.learning_rate * (m_b[i] / corr1) / (
                    np.sqrt(v_b[i] / corr2) + eps
                )
        val_probs = _forward(weights, biases, xv)[0][-1]
        val_loss = _cross_entropy(val_probs, onehot_val)
        if val_loss < best_loss - 1e-12:
            best_loss = val_loss
            best = ([w.copy() for w in weights], [b.copy() for b in biases])
            strikes = 0
        else:
            strikes += 1
            if strikes >= config.patience:
                break
    if best is not None:
        weights, biases = best
    model = MlpModel(weights, biases, config, classes=classes)
    model.f1 = macro_f1(model.predict(xv), yv)
    return model
