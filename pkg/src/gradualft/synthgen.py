"""Synthetic classification tasks with a controllable domain shift.

Each class is an isotropic Gaussian blob.  In-domain class means sit on a
centred regular simplex with every pair ``class_sep * noise_sigma`` apart.
When there are more classes than dimensions they go on a regular polygon
in the first two coordinates instead, and only neighbours keep that
distance.  The
out-of-domain pool uses the same blobs after three independent distortions:

* the means are rotated by ``shift_rotation_deg`` in the plane of the first
  two coordinates,
* every out-of-domain point is translated by ``shift_translation * sigma``
  along the direction of the class-0 mean,
* the class priors become ``p_k ~ (1 - out_prior_skew) ** k``.

With all three at zero the pool is exchangeable with in-domain data.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .datamodel import Dataset, Domain
from .rng import Rng


@dataclass(frozen=True)
class TaskSpec:
    feature_dim: int = 10
    num_classes: int = 4
    in_train_n: int = 40
    in_dev_n: int = 500
    in_test_n: int = 2000
    out_pool_n: int = 4000
    class_sep: float = 3.0
    noise_sigma: float = 1.0
    shift_rotation_deg: float = 30.0
    shift_translation: float = 1.0
    out_prior_skew: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.feature_dim < 1:
            raise ValueError(f"feature_dim must be positive, got {self.feature_dim}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be at least 2, got {self.num_classes}")
        if min(self.in_train_n, self.in_dev_n, self.in_test_n) < 1:
            raise ValueError("in-domain split sizes must be positive")
        if self.out_pool_n < 0:
            raise ValueError(f"out_pool_n must be non-negative, got {self.out_pool_n}")
        for name in ("class_sep", "noise_sigma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")
        if not math.isfinite(self.shift_rotation_deg):
            raise ValueError("shift_rotation_deg must be finite")
        if not (math.isfinite(self.shift_translation) and self.shift_translation >= 0):
            raise ValueError("shift_translation must be finite and non-negative")
        if not 0 <= self.out_prior_skew < 1:
            raise ValueError(f"out_prior_skew must lie in [0, 1), got {self.out_prior_skew}")
        if self.feature_dim == 1 and self.num_classes > 2:
            raise ValueError(f"cannot place {self.num_classes} equidistant blobs in 1 dimension")
        if self.feature_dim < 2 and self.shift_rotation_deg != 0:
            raise ValueError("a rotation shift needs feature_dim >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


def class_means(spec: TaskSpec) -> np.ndarray:
    """In-domain blob centres, shape (num_classes, feature_dim)."""
    k, d = spec.num_classes, spec.feature_dim
    dist = spec.class_sep * spec.noise_sigma
    means = np.zeros((k, d))
    if k <= d:
        # scaled basis vectors are pairwise sqrt(2) * scale apart
        means[np.arange(k), np.arange(k)] = dist / math.sqrt(2)
        means -= means.mean(axis=0)
    elif d == 1:
        # TaskSpec only allows two classes on a line
        means[:, 0] = [-dist / 2, dist / 2]
    else:
        radius = dist / (2 * math.sin(math.pi / k))
        angles = 2 * math.pi * np.arange(k) / k
        means[:, 0] = radius * np.cos(angles)
        means[:, 1] = radius * np.sin(angles)
    return means


def out_domain_means(spec: TaskSpec) -> np.ndarray:
    means = class_means(spec)
    if spec.feature_dim >= 2 and spec.shift_rotation_deg:
        th = math.radians(spec.shift_rotation_deg)
        c, s = math.cos(th), math.sin(th)
        x0, x1 = means[:, 0].copy(), means[:, 1].copy()
        means[:, 0] = c * x0 - s * x1
        means[:, 1] = s * x0 + c * x1
    if spec.shift_translation:
        means = means + spec.shift_translation * spec.noise_sigma * translation_direction(spec)
    return means


def translation_direction(spec: TaskSpec) -> np.ndarray:
    m0 = class_means(spec)[0]
    return m0 / np.linalg.norm(m0)


def out_priors(spec: TaskSpec) -> np.ndarray:
    w = (1.0 - spec.out_prior_skew) ** np.arange(spec.num_classes)
    return w / w.sum()


def _draw(means: np.ndarray, priors: np.ndarray, n: int, sigma: float, rng: Rng):
    labels = rng.choice(len(priors), size=n, p=priors)
    X = means[labels] + sigma * rng.normal((n, means.shape[1]))
    return X, labels


def _blob_dataset(spec, means, priors, n, domain, rng) -> Dataset:
    X, y = _draw(means, priors, n, spec.noise_sigma, rng)
    return Dataset(X, y, np.full(n, int(domain)), spec.feature_dim, spec.num_classes)


def gen_task(spec: TaskSpec) -> tuple[Dataset, Dataset, Dataset, Dataset]:
    """Return ``(train, dev, test, pool)``; the first three are in-domain."""
    rng = Rng(spec.seed).child("synthgen")
    uniform = np.full(spec.num_classes, 1.0 / spec.num_classes)
    means = class_means(spec)
    train = _blob_dataset(spec, means, uniform, spec.in_train_n, Domain.IN, rng.child("train"))
    dev = _blob_dataset(spec, means, uniform, spec.in_dev_n, Domain.IN, rng.child("dev"))
    test = _blob_dataset(spec, means, uniform, spec.in_test_n, Domain.IN, rng.child("test"))
    pool = _blob_dataset(spec, out_domain_means(spec), out_priors(spec), spec.out_pool_n,
                         Domain.OUT, rng.child("pool"))
    return train, dev, test, pool


def bayes_predict(spec: TaskSpec, X: np.ndarray) -> np.ndarray:
    """Bayes-optimal in-domain decision: uniform priors, shared isotropic noise -> nearest mean."""
    means = class_means(spec)
    d2 = ((X[:, None, :] - means[None, :, :]) ** 2).sum(axis=-1)
    return np.argmin(d2, axis=1)


def bayes_ceiling(spec: TaskSpec, n: int = 100_000, seed: int = 0) -> float:
    """Monte Carlo estimate of the best achievable in-domain accuracy."""
    rng = Rng(seed).child("bayes-ceiling")
    uniform = np.full(spec.num_classes, 1.0 / spec.num_classes)
    X, y = _draw(class_means(spec), uniform, n, spec.noise_sigma, rng)
    return float((bayes_predict(spec, X) == y).mean())
