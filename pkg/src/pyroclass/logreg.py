"""Logistic-regression baseline trained by full-batch gradient descent.

The loss is the mean binary log-loss of sigma(w.x + b) against labels in
{+1, -1} plus an L2 penalty on the weights only:
    loss = mean_i log(1 + exp(-y_i (w.x_i + b))) + l2_strength/2 * ||w||^2
Training runs a fixed number of fixed-step descent iterations from zero
weights, so identical inputs produce bit-identical models.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from ._binio import expect_magic, read_exact, write_header
from .dataset import LabeledDataset
from .errors import DataError, TrainingError, UsageError

LOGR_MAGIC = b"LOGR"
LOGR_VERSION = 1


@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    iterations: int = 2000
    l2_strength: float = 1e-4

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise UsageError(f"learning rate must be > 0, "
                             f"got {self.learning_rate}")
        if self.iterations < 1:
            raise UsageError(f"iterations must be >= 1, "
                             f"got {self.iterations}")
        if self.l2_strength < 0:
            raise UsageError(f"l2 strength must be >= 0, "
                             f"got {self.l2_strength}")


@dataclass(frozen=True, eq=False)
class LogRegModel:
    weights: np.ndarray
    bias: float

    def __post_init__(self):
        if self.weights.ndim != 1:
            raise DataError(f"weights must be 1-D, "
                            f"got shape {self.weights.shape}")
        if not (np.all(np.isfinite(self.weights))
                and np.isfinite(self.bias)):
            raise DataError("model parameters must be finite")

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]


def _sigmoid(t: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    e = np.exp(t[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def loss_and_grad(weights, bias: float, ds: LabeledDataset,
                  l2_strength: float):
    """Regularized log-loss and its exact analytic gradient.

    Returns (loss, grad_w, grad_b). The bias is not regularized.
    """
    w = np.asarray(weights, dtype=np.float64)
    X, y = ds.features, ds.labels.astype(np.float64)
    if w.ndim != 1 or w.shape[0] != X.shape[1]:
        raise DataError(f"weights shape {w.shape} does not match "
                        f"{X.shape[1]} features")
    n = X.shape[0]
    z = X @ w + bias
    margins = y * z
    loss = float(np.mean(np.logaddexp(0.0, -margins))
                 + 0.5 * l2_strength * np.dot(w, w))
    # d/dz of log(1 + exp(-y z)) is -y * sigma(-y z)
    dz = -y * _sigmoid(-margins) / n
    grad_w = X.T @ dz + l2_strength * w
    grad_b = float(np.add.reduce(dz))
    return loss, grad_w, grad_b


def train_gd(ds: LabeledDataset, cfg: LogRegConfig) -> LogRegModel:
    """Run exactly cfg.iterations full-batch gradient steps from zero."""
    if ds.n_samples < 1:
        raise TrainingError("need at least 1 training row")
    w = np.zeros(ds.n_features, dtype=np.float64)
    b = 0.0
    for it in range(cfg.iterations):
        loss, grad_w, grad_b = loss_and_grad(w, b, ds, cfg.l2_strength)
        if not np.isfinite(loss):
            raise TrainingError(f"non-finite loss at iteration {it}; "
                                f"reduce the learning rate")
        w = w - cfg.learning_rate * grad_w
        b = b - cfg.learning_rate * grad_b
    if not np.all(np.isfinite(w)) or not np.isfinite(b):
        raise TrainingError(f"non-finite parameters after "
                            f"{cfg.iterations} iterations; "
                            f"reduce the learning rate")
    return LogRegModel(weights=w, bias=b)


def _check_features(model: LogRegModel, d: int) -> None:
    if d != model.n_features:
        raise DataError(f"dimension mismatch: model was trained with "
                        f"{model.n_features} features, input has {d}")


def decision_many(model: LogRegModel, X) -> np.ndarray:
    """Raw margins w.x + b for each row of X (monotone in probability)."""
    Xa = np.ascontiguousarray(X, dtype=np.float64)
    if Xa.ndim != 2:
        raise DataError(f"X must be 2-D, got shape {Xa.shape}")
    _check_features(model, Xa.shape[1])
    return Xa @ model.weights + model.bias


def predict_proba_many(model: LogRegModel, X) -> np.ndarray:
    return _sigmoid(decision_many(model, X))


def predict_many(model: LogRegModel, X) -> np.ndarray:
    """Labels for each row of X; probability exactly 0.5 maps to +1."""
    return np.where(decision_many(model, X) >= 0.0, 1, -1).astype(np.int64)


def predict_proba(model: LogRegModel, x) -> float:
    xa = np.ascontiguousarray(x, dtype=np.float64)
    if xa.ndim != 1:
        raise DataError(f"x must be a 1-D feature row, got shape {xa.shape}")
    return float(predict_proba_many(model, xa[None, :])[0])


def predict(model: LogRegModel, x) -> int:
    return 1 if predict_proba(model, x) >= 0.5 else -1


def save_model(model: LogRegModel, path) -> None:
    """Write a model in the LOGR format.

    Layout (little-endian): magic "LOGR"; u32 version = 1; u64 d; f64 bias;
    f64 weights[d].
    """
    with open(path, "wb") as f:
        write_header(f, LOGR_MAGIC, LOGR_VERSION)
        f.write(struct.pack("<Qd", model.n_features, model.bias))
        f.write(np.ascontiguousarray(model.weights, dtype="<f8").tobytes())


def load_model(path) -> LogRegModel:
    """Read a LOGR file written by save_model; bit-exact round-trip."""
    p = str(path)
    try:
        f = open(path, "rb")
    except FileNotFoundError:
        raise DataError(f"{p}: file not found") from None
    with f:
        expect_magic(f, LOGR_MAGIC, LOGR_VERSION, p)
        d, bias = struct.unpack("<Qd", read_exact(f, 16, p, "model header"))
        weights = np.frombuffer(read_exact(f, 8 * d, p, "weights"),
                                dtype="<f8")
        if f.read(1):
            raise DataError(f"{p}: trailing bytes after weights")
    return LogRegModel(weights=weights, bias=bias)
