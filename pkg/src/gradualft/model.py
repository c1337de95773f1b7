"""Softmax classifier with an optional tanh hidden layer, written against numpy.

Parameters live in a plain dict of float64 arrays:

* ``hidden_dim == 0``: ``W`` (classes x features), ``b`` (classes)
* ``hidden_dim > 0``: ``W1`` (hidden x features), ``b1`` (hidden),
  ``W2`` (classes x hidden), ``b2`` (classes)

Gradients use the same keys and shapes.  Models are treated as immutable
values; :meth:`Model.step` returns a new model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datamodel import Dataset, Metrics
from .rng import Rng

CHECKPOINT_FORMAT = "gradualft-model"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelSpec:
    feature_dim: int
    num_classes: int
    hidden_dim: int = 0
    init_scale: float = 0.1

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ValueError(f"feature_dim must be positive, got {self.feature_dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be at least 2, got {self.num_classes}")
        if self.hidden_dim < 0:
            raise ValueError(f"hidden_dim must be non-negative, got {self.hidden_dim}")
        if not self.init_scale >= 0:
            raise ValueError(f"init_scale must be non-negative, got {self.init_scale}")

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        d, k, h = self.feature_dim, self.num_classes, self.hidden_dim
        if h == 0:
            return {"W": (k, d), "b": (k,)}
        return {"W1": (h, d), "b1": (h,), "W2": (k, h), "b2": (k,)}


@dataclass(frozen=True, eq=False)
class Model:
    spec: ModelSpec
    params: dict

    def __post_init__(self):
        shapes = self.spec.param_shapes()
        if set(self.params) != set(shapes):
            raise ValueError(f"parameter keys {sorted(self.params)} != {sorted(shapes)}")
        frozen = {}
        for name, shape in shapes.items():
            a = np.array(self.params[name], dtype=np.float64)
            if a.shape != shape:
                raise ValueError(f"parameter {name} has shape {a.shape}, expected {shape}")
            a.setflags(write=False)
            frozen[name] = a
        object.__setattr__(self, "params", frozen)

    @property
    def hidden(self) -> bool:
        return self.spec.hidden_dim > 0

    def is_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.params.values())

    def step(self, grad: dict, lr: float) -> "Model":
        """Plain gradient-descent update ``params - lr * grad``."""
        return Model(self.spec, {k: v - lr * grad[k] for k, v in self.params.items()})

    def same_as(self, other: "Model") -> bool:
        """Bitwise parameter equality."""
        return self.spec == other.spec and all(
            self.params[k].tobytes() == other.params[k].tobytes() for k in self.params
        )


def init(spec: ModelSpec, rng: Rng) -> Model:
    """Weights ~ U[-init_scale, init_scale], biases zero."""
    params = {}
    for name, shape in spec.param_shapes().items():
        if name.startswith("W"):
            params[name] = rng.uniform(-spec.init_scale, spec.init_scale, shape)
        else:
            params[name] = np.zeros(shape)
    return Model(spec, params)


def _check_dim(m: Model, X: np.ndarray):
    if X.shape[-1] != m.spec.feature_dim:
        raise ValueError(f"input has {X.shape[-1]} features, model expects {m.spec.feature_dim}")


def _logits(m: Model, X: np.ndarray):
    p = m.params
    if m.hidden:
        H = np.tanh(X @ p["W1"].T + p["b1"])
        return H @ p["W2"].T + p["b2"], H
    return X @ p["W"].T + p["b"], None


def _log_softmax(Z: np.ndarray) -> np.ndarray:
    Z = Z - Z.max(axis=-1, keepdims=True)
    return Z - np.log(np.exp(Z).sum(axis=-1, keepdims=True))


def logits(m: Model, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    _check_dim(m, X)
    return _logits(m, X)[0]


def forward(m: Model, x) -> np.ndarray:
    """Class probabilities for one feature vector (or a batch of rows)."""
    return np.exp(_log_softmax(logits(m, x)))


def predict(m: Model, x):
    """Most probable class; ties go to the lowest index (``np.argmax`` semantics)."""
    out = np.argmax(logits(m, x), axis=-1)
    return int(out) if out.ndim == 0 else out


def loss_and_grad(m: Model, batch: Dataset) -> tuple[float, dict]:
    """Mean cross-entropy over ``batch`` and its exact gradient."""
    if len(batch) == 0:
        raise ValueError("loss_and_grad needs a non-empty batch")
    return _loss_and_grad(m, batch.X, batch.y)


def _loss_and_grad(m: Model, X: np.ndarray, y: np.ndarray) -> tuple[float, dict]:
    _check_dim(m, X)
    n = X.shape[0]
    Z, H = _logits(m, X)
    logp = _log_softmax(Z)
    rows = np.arange(n)
    loss = -logp[rows, y].mean()

    dZ = np.exp(logp)
    dZ[rows, y] -= 1.0
    dZ /= n
    p = m.params
    if not m.hidden:
        return float(loss), {"W": dZ.T @ X, "b": dZ.sum(axis=0)}
    dA = (dZ @ p["W2"]) * (1.0 - H * H)
    return float(loss), {
        "W1": dA.T @ X,
        "b1": dA.sum(axis=0),
        "W2": dZ.T @ H,
        "b2": dZ.sum(axis=0),
    }


def evaluate(m: Model, d: Dataset) -> Metrics:
    if len(d) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    Z = logits(m, d.X)
    logp = _log_softmax(Z)
    pred = np.argmax(Z, axis=1)
    correct = pred == d.y
    per_class = []
    for k in range(d.num_classes):
        mask = d.y == k
        per_class.append(float(correct[mask].mean()) if mask.any() else None)
    return Metrics(
        accuracy=float(correct.mean()),
        per_class_accuracy=tuple(per_class),
        mean_loss=float(-logp[np.arange(len(d)), d.y].mean()),
        n=len(d),
    )


def model_to_dict(m: Model) -> dict:
    s = m.spec
    return {
        "format": CHECKPOINT_FORMAT,
        "format_version": CHECKPOINT_VERSION,
        "spec": {
            "feature_dim": s.feature_dim,
            "num_classes": s.num_classes,
            "hidden_dim": s.hidden_dim,
            "init_scale": s.init_scale,
        },
        # row-major flattening; shapes follow from ModelSpec
        "params": {k: m.params[k].ravel().tolist() for k in s.param_shapes()},
    }


def model_from_dict(d: dict) -> Model:
    if d.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"not a model checkpoint (format={d.get('format')!r})")
    if d.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {d.get('format_version')!r}")
    spec = ModelSpec(**d["spec"])
    params = {
        k: np.array(d["params"][k], dtype=np.float64).reshape(shape)
        for k, shape in spec.param_shapes().items()
    }
    return Model(spec, params)


def save_model(m: Model, path) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(m), indent=1) + "\n")


def load_model(path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text()))
