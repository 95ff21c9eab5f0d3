"""Single-hidden-layer perceptron classifier: sigmoid hidden units, softmax
output, cross-entropy loss, Adam updates, and validation early stopping."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .data_pipeline import ClassLabel

DEFAULT_LAYERS = (14, 100, 3)


@dataclass
class MlpModel:
    layer_sizes: tuple[int, int, int]
    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    seed: int

    def parameters(self):
        return [self.W1, self.b1, self.W2, self.b2]


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 500
    early_stopping: bool = True
    validation_fraction: float = 0.1
    patience: int = 10
    tol: float = 1e-4

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation fraction must lie in (0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


@dataclass
class TrainTrace:
    losses: list[float] = field(default_factory=list)
    best_validation_score: float = 0.0
    stopped_epoch: int = 0
    diverged: bool = False


def mlp_init(seed: int, layer_sizes: tuple[int, int, int] = DEFAULT_LAYERS) -> MlpModel:
    """Glorot-uniform weights, zero biases, deterministic per seed."""
    rng = np.random.default_rng(seed)
    n_in, n_hid, n_out = layer_sizes
    lim1 = np.sqrt(6.0 / (n_in + n_hid))
    lim2 = np.sqrt(6.0 / (n_hid + n_out))
    return MlpModel(
        layer_sizes=layer_sizes,
        W1=rng.uniform(-lim1, lim1, size=(n_in, n_hid)),
        b1=np.zeros(n_hid),
        W2=rng.uniform(-lim2, lim2, size=(n_hid, n_out)),
        b2=np.zeros(n_out),
        seed=seed,
    )


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def mlp_forward(model: MlpModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[1] != model.layer_sizes[0]:
        raise ValueError(f"expected {model.layer_sizes[0]} input columns, got {X.shape[1]}")
    hidden = _sigmoid(X @ model.W1 + model.b1)
    return _softmax(hidden @ model.W2 + model.b2)


def one_hot(labels, n_classes: int = 3) -> np.ndarray:
    y = np.asarray([int(l) for l in labels])
    out = np.zeros((y.size, n_classes))
    out[np.arange(y.size), y] = 1.0
    return out


def mlp_loss(model: MlpModel, X, onehot_labels) -> float:
    """Mean categorical cross-entropy."""
    Y = np.asarray(onehot_labels, dtype=float)
    if Y.ndim != 2 or not np.all((Y == 0) | (Y == 1)) or not np.all(Y.sum(axis=1) == 1):
        raise ValueError("labels must be one-hot")
    P = np.clip(mlp_forward(model, X), 1e-15, 1.0)
    return float(-np.sum(Y * np.log(P)) / Y.shape[0])


def mlp_gradients(model: MlpModel, X, onehot_labels):
    """Backpropagation gradients of the mean cross-entropy, in parameter order
    (W1, b1, W2, b2)."""
    X = np.asarray(X, dtype=float)
    Y = np.asarray(onehot_labels, dtype=float)
    n = X.shape[0]
    hidden = _sigmoid(X @ model.W1 + model.b1)
    P = _softmax(hidden @ model.W2 + model.b2)
    d_out = (P - Y) / n
    gW2 = hidden.T @ d_out
    gb2 = d_out.sum(axis=0)
    d_hidden = (d_out @ model.W2.T) * hidden * (1.0 - hidden)
    gW1 = X.T @ d_hidden
    gb1 = d_hidden.sum(axis=0)
    return [gW1, gb1, gW2, gb2]


def mlp_train(model: MlpModel, X, labels, config: TrainConfig | None = None):
    """Adam training with a deterministic per-epoch shuffle and early stopping
    on a held-out validation score (negative cross-entropy); returns
    (trained model, trace)."""
    config = config or TrainConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray([int(l) for l in labels])
    n = X.shape[0]
    if n < 50:
        raise ValueError("need at least 50 training samples")
    model = copy.deepcopy(model)

    split_rng = np.random.default_rng(model.seed)
    order = split_rng.permutation(n)
    n_val = max(1, int(round(config.validation_fraction * n)))
    train_idx, val_idx = order[:-n_val], order[-n_val:]
    Xt, yt = X[train_idx], y[train_idx]
    Xv, yv = X[val_idx], y[val_idx]
    Yt = one_hot(yt)

    m = [np.zeros_like(p) for p in model.parameters()]
    v = [np.zeros_like(p) for p in model.parameters()]
    t = 0
    trace = TrainTrace()
    best_score = -np.inf
    best_params = None
    stall = 0

    for epoch in range(1, config.max_epochs + 1):
        shuffle = np.random.default_rng(np.random.SeedSequence([model.seed, epoch]))
        idx = shuffle.permutation(len(Xt))
        for start in range(0, len(Xt), config.batch_size):
            batch = idx[start : start + config.batch_size]
            grads = mlp_gradients(model, Xt[batch], Yt[batch])
            t += 1
            params = model.parameters()
            for k, g in enumerate(grads):
                m[k] = config.beta1 * m[k] + (1 - config.beta1) * g
                v[k] = config.beta2 * v[k] + (1 - config.beta2) * g * g
                m_hat = m[k] / (1 - config.beta1**t)
                v_hat = v[k] / (1 - config.beta2**t)
                params[k] -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)

        loss = mlp_loss(model, Xt, Yt)
        trace.losses.append(loss)
        trace.stopped_epoch = epoch
        if not np.isfinite(loss):
            trace.diverged = True
            break

        if config.early_stopping:
            # negative validation loss: smoother than accuracy on small holdouts
            score = -mlp_loss(model, Xv, one_hot(yv))
            if score > best_score + config.tol:
                best_score = score
                best_params = [p.copy() for p in model.parameters()]
                stall = 0
            else:
                stall += 1
            if stall >= config.patience:
                break

    if config.early_stopping and best_params is not None:
        model.W1, model.b1, model.W2, model.b2 = best_params
        trace.best_validation_score = best_score
    return model, trace


def mlp_accuracy(model: MlpModel, X, labels) -> float:
    """Argmax accuracy; probability ties resolve to the lower class index."""
    y = np.asarray([int(l) for l in labels])
    if y.size == 0:
        raise ValueError("empty evaluation set")
    P = mlp_forward(model, X)
    predicted = P.argmax(axis=1)  # argmax takes the first maximum
    return float((predicted == y).mean())


def mlp_predict(model: MlpModel, X) -> list[ClassLabel]:
    P = mlp_forward(model, X)
    return [ClassLabel(int(i)) for i in P.argmax(axis=1)]
