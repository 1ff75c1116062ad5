"""From-scratch differentiable models with seeded deterministic training:
a linear hinge-loss gate classifier, the rectangle MLP detector and the
bottleneck autoencoder.  numpy only, single-threaded, full IEEE doubles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import Dataset
from .errors import (
    DimensionMismatch,
    DivergenceDetected,
    InvalidBottleneck,
    SingleClassData,
)

GATE_LAMBDA = 1e-4
GATE_EPOCHS = 200
GATE_STEP = 0.1
MLP_STEP = 0.05

MODEL_FORMAT_VERSION = 1


@dataclass
class NeuralModel:
    """Dense feed-forward network: per-layer weights, biases, activations."""

    kind: str  # linear_gate | mlp | autoencoder
    layer_dims: list[int]
    activations: list[str]  # one per non-input layer: relu | sigmoid | linear
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    seed: int

    @property
    def input_dim(self) -> int:
        return self.layer_dims[0]

    def bottleneck_index(self) -> int:
        """Index (into non-input layers) of the unique minimal hidden layer."""
        hidden = self.layer_dims[1:-1]
        if not hidden:
            raise DimensionMismatch("model has no hidden layers")
        return int(np.argmin(hidden))


@dataclass
class TrainingCurve:
    """Per-epoch (train_loss, validation_loss) pairs."""

    epochs: list[tuple[float, float]] = field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("epoch,train_loss,val_loss\n")
            for i, (tl, vl) in enumerate(self.epochs, start=1):
                fh.write(f"{i},{tl!r},{vl!r}\n")

    def __len__(self) -> int:
        return len(self.epochs)


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    if kind == "linear":
        return z
    raise ValueError(f"unknown activation {kind!r}")


def forward(model: NeuralModel, X: np.ndarray) -> list[np.ndarray]:
    """All layer outputs, input first; result[-1] is the network output."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.input_dim:
        raise DimensionMismatch(f"expected {model.input_dim} inputs, got {X.shape[1]}")
    outs = [X]
    a = X
    for W, b, act in zip(model.weights, model.biases, model.activations):
        a = _activate(a @ W + b, act)
        outs.append(a)
    return outs


def _init_layers(dims: list[int], rng: np.random.Generator):
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-limit, limit, size=fan_out))
    return weights, biases


# --- linear hinge-loss gate ------------------------------------------------

def gate_new(n_features: int) -> NeuralModel:
    return NeuralModel(
        kind="linear_gate",
        layer_dims=[n_features, 1],
        activations=["linear"],
        weights=[np.zeros((n_features, 1))],
        biases=[np.zeros(1)],
        seed=0,
    )


def gate_decision(model: NeuralModel, X: np.ndarray) -> np.ndarray:
    return forward(model, X)[-1][:, 0]


def gate_predict(model: NeuralModel, X: np.ndarray) -> np.ndarray:
    return (gate_decision(model, X) >= 0.0).astype(np.int64)


def hinge_loss_and_grads(model: NeuralModel, X: np.ndarray, labels: np.ndarray,
                         lam: float = GATE_LAMBDA):
    """L2-regularized mean hinge loss and its parameter gradients."""
    t = 2.0 * np.asarray(labels, dtype=np.float64) - 1.0
    s = gate_decision(model, X)
    margin = 1.0 - t * s
    active = margin > 0.0
    loss = float(np.mean(np.maximum(margin, 0.0)) + lam * np.sum(model.weights[0] ** 2))
    ds = -(t * active) / len(t)
    dW = X.T @ ds[:, None] + 2.0 * lam * model.weights[0]
    db = np.array([ds.sum()])
    return loss, [dW], [db]


def gate_train(learn: Dataset, lam: float = GATE_LAMBDA, epochs: int = GATE_EPOCHS,
               step: float = GATE_STEP) -> NeuralModel:
    """Full-batch gradient descent on the hinge loss, zero init, deterministic."""
    y = learn.labels
    if len(np.unique(y)) < 2:
        raise SingleClassData("gate training needs both classes")
    model = gate_new(learn.n_features)
    X = learn.X
    for epoch in range(epochs):
        loss, dWs, dbs = hinge_loss_and_grads(model, X, y, lam)
        if not np.isfinite(loss):
            raise DivergenceDetected(epoch)
        model.weights[0] = model.weights[0] - step * dWs[0]
        model.biases[0] = model.biases[0] - step * dbs[0]
    return model


# --- MLP detector ----------------------------------------------------------

def mlp_new(f: int, seed: int) -> NeuralModel:
    """Rectangle MLP [f, 2f, 2f, 1]: relu hidden layers, sigmoid output."""
    if f < 1:
        raise DimensionMismatch("need at least one feature")
    dims = [f, 2 * f, 2 * f, 1]
    weights, biases = _init_layers(dims, np.random.default_rng(seed))
    return NeuralModel("mlp", dims, ["relu", "relu", "sigmoid"], weights, biases, seed)


def loss_and_gradients(model: NeuralModel, X: np.ndarray, target: np.ndarray,
                       loss_kind: str):
    """Loss plus per-layer parameter gradients via backpropagation.

    loss_kind 'bce' expects a 0/1 target vector against a sigmoid output;
    'mse' expects a target matrix shaped like the output.
    """
    outs = forward(model, X)
    out = outs[-1]
    n = out.shape[0]
    if loss_kind == "bce":
        y = np.asarray(target, dtype=np.float64).reshape(-1, 1)
        p = np.clip(out, 1e-12, 1.0 - 1e-12)
        loss = float(np.mean(-y * np.log(p) - (1.0 - y) * np.log(1.0 - p)))
        delta = (out - y) / n  # gradient w.r.t. the sigmoid pre-activation
        skip_last_activation = True
    elif loss_kind == "mse":
        T = np.asarray(target, dtype=np.float64)
        diff = out - T
        loss = float(np.mean(diff ** 2))
        ddout = 2.0 * diff / diff.size
        delta = ddout * out * (1.0 - out) if model.activations[-1] == "sigmoid" else ddout
        skip_last_activation = True
    else:
        raise ValueError(f"unknown loss {loss_kind!r}")

    dWs = [None] * len(model.weights)
    dbs = [None] * len(model.biases)
    for layer in range(len(model.weights) - 1, -1, -1):
        a_prev = outs[layer]
        a_cur = outs[layer + 1]
        if not (layer == len(model.weights) - 1 and skip_last_activation):
            act = model.activations[layer]
            if act == "relu":
                delta = delta * (a_cur > 0.0)
            elif act == "sigmoid":
                delta = delta * a_cur * (1.0 - a_cur)
        dWs[layer] = a_prev.T @ delta
        dbs[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = delta @ model.weights[layer].T
    return loss, dWs, dbs


def _sgd_train(model: NeuralModel, X: np.ndarray, target: np.ndarray,
               Xval: np.ndarray, val_target: np.ndarray, loss_kind: str,
               epochs: int, batch: int, step: float) -> TrainingCurve:
    rng = np.random.default_rng(model.seed)
    n = X.shape[0]
    curve = TrainingCurve()
    for epoch in range(epochs):
        order = rng.permutation(n)
        seen, acc = 0, 0.0
        for start in range(0, n, batch):
            rows = order[start:start + batch]
            loss, dWs, dbs = loss_and_gradients(model, X[rows], target[rows], loss_kind)
            if not np.isfinite(loss):
                raise DivergenceDetected(epoch + 1)
            for i in range(len(model.weights)):
                model.weights[i] = model.weights[i] - step * dWs[i]
                model.biases[i] = model.biases[i] - step * dbs[i]
            acc += loss * len(rows)
            seen += len(rows)
        train_loss = acc / seen
        val_loss, _, _ = loss_and_gradients(model, Xval, val_target, loss_kind)
        if not np.isfinite(val_loss):
            raise DivergenceDetected(epoch + 1)
        curve.epochs.append((train_loss, float(val_loss)))
    return curve


def mlp_train(model: NeuralModel, learn: Dataset, validation: Dataset,
              epochs: int = 10, batch: int = 10, step: float = MLP_STEP) -> TrainingCurve:
    """Mini-batch SGD on binary cross-entropy; records TLC/VLC per epoch."""
    if learn.n_features != model.input_dim:
        raise DimensionMismatch(
            f"model expects {model.input_dim} features, got {learn.n_features}")
    return _sgd_train(model, learn.X, learn.labels, validation.X, validation.labels,
                      "bce", epochs, batch, step)


def mlp_predict(model: NeuralModel, dataset: Dataset) -> np.ndarray:
    """Sigmoid output probabilities, one per sample; class = p >= 0.5."""
    return forward(model, dataset.X)[-1][:, 0]


# --- autoencoder -----------------------------------------------------------

def ae_new(input_dim: int, bottleneck: int, seed: int) -> NeuralModel:
    """Symmetric funnel AE; intermediate layer size is the midpoint."""
    if not 1 <= bottleneck < input_dim:
        raise InvalidBottleneck(f"bottleneck {bottleneck} vs input_dim {input_dim}")
    mid = int(round((input_dim + bottleneck) / 2))
    dims = [input_dim, mid, bottleneck, mid, input_dim]
    weights, biases = _init_layers(dims, np.random.default_rng(seed))
    return NeuralModel("autoencoder", dims, ["relu", "relu", "relu", "sigmoid"],
                       weights, biases, seed)


def ae_train(model: NeuralModel, learn: Dataset, validation: Dataset,
             epochs: int = 10, batch: int = 10, step: float = MLP_STEP) -> TrainingCurve:
    """Mini-batch SGD on mean squared reconstruction error."""
    if learn.n_features != model.input_dim:
        raise DimensionMismatch(
            f"model expects {model.input_dim} features, got {learn.n_features}")
    return _sgd_train(model, learn.X, learn.X, validation.X, validation.X,
                      "mse", epochs, batch, step)


def ae_encode(model: NeuralModel, dataset: Dataset) -> Dataset:
    """Bottleneck activations as a new Dataset with anonymous names f1..fk."""
    if model.kind != "autoencoder":
        raise DimensionMismatch("ae_encode needs an autoencoder model")
    if dataset.n_features != model.input_dim:
        raise DimensionMismatch(
            f"model expects {model.input_dim} features, got {dataset.n_features}")
    latent = forward(model, dataset.X)[model.bottleneck_index() + 1]
    names = tuple(f"f{i + 1}" for i in range(latent.shape[1]))
    meta = dict(dataset.meta)
    meta["encoder"] = {"kind": "autoencoder", "seed": model.seed,
                       "bottleneck": latent.shape[1]}
    return Dataset(names, latent, dataset.labels, meta)


# --- serialization ---------------------------------------------------------

def model_to_json(model: NeuralModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "kind": model.kind,
        "layer_dims": list(model.layer_dims),
        "activations": list(model.activations),
        "seed": int(model.seed),
        "weights": [W.tolist() for W in model.weights],
        "biases": [b.tolist() for b in model.biases],
    }


def model_from_json(doc: dict) -> NeuralModel:
    if doc.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError("unsupported model format version")
    return NeuralModel(
        kind=doc["kind"],
        layer_dims=list(doc["layer_dims"]),
        activations=list(doc["activations"]),
        weights=[np.asarray(W, dtype=np.float64) for W in doc["weights"]],
        biases=[np.asarray(b, dtype=np.float64) for b in doc["biases"]],
        seed=int(doc["seed"]),
    )
