"""Minibatch gradient descent with dev-accuracy early stopping.

``train_to_convergence`` is the ``Train(model, data)`` step of a fine-tuning
stage: it runs epochs until the in-domain dev accuracy stops improving and
hands back the best snapshot, not the last one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .datamodel import Dataset
from .model import Model, _loss_and_grad, evaluate
from .rng import Rng

# A mean batch loss above this (nats per example) means the model puts
# probability below e^-1000 on the true labels: it has collapsed even though
# softmax arithmetic is still finite.
DIVERGENCE_LOSS = 1e3


class TrainingDivergence(RuntimeError):
    """Loss or gradient blew up during training."""

    def __init__(self, message: str, epoch: Optional[int] = None, batch: Optional[int] = None, loss=None):
        self.epoch = epoch
        self.batch = batch
        self.loss = loss
        where = ", ".join(
            f"{k} {v}" for k, v in (("epoch", epoch), ("batch", batch)) if v is not None
        )
        super().__init__(f"{message} ({where})" if where else message)


@dataclass(frozen=True)
class StageHyper:
    learning_rate: float = 0.1
    batch_size: int = 32
    max_epochs: int = 200
    patience: int = 5
    min_delta: float = 0.0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 1:
            raise ValueError("batch_size, max_epochs and patience must be positive")
        if self.patience > self.max_epochs:
            raise ValueError(f"patience {self.patience} exceeds max_epochs {self.max_epochs}")
        if self.min_delta < 0:
            raise ValueError(f"min_delta must be non-negative, got {self.min_delta}")

    def with_rate(self, lr: float) -> "StageHyper":
        return StageHyper(lr, self.batch_size, self.max_epochs, self.patience, self.min_delta)


@dataclass(frozen=True)
class LrSchedule:
    """Per-stage learning rates: an explicit list, or ``base_rate * decay**t``."""

    rates: Optional[tuple[float, ...]] = None
    base_rate: Optional[float] = None
    decay: float = 1.0

    def __post_init__(self):
        if (self.rates is None) == (self.base_rate is None):
            raise ValueError("give exactly one of an explicit rate list or base_rate")
        if self.rates is not None:
            object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
            if not self.rates or not all(r > 0 for r in self.rates):
                raise ValueError(f"explicit rates must be non-empty and positive: {self.rates}")
        else:
            if not self.base_rate > 0:
                raise ValueError(f"base_rate must be positive, got {self.base_rate}")
            if not 0 < self.decay <= 1:
                raise ValueError(f"decay must lie in (0, 1], got {self.decay}")

    @classmethod
    def explicit(cls, rates: Sequence[float]) -> "LrSchedule":
        return cls(rates=tuple(rates))

    @classmethod
    def geometric(cls, base_rate: float, decay: float = 1.0) -> "LrSchedule":
        return cls(base_rate=base_rate, decay=decay)

    def to_dict(self) -> dict:
        if self.rates is not None:
            return {"rates": list(self.rates)}
        return {"base_rate": self.base_rate, "decay": self.decay}

    @classmethod
    def from_dict(cls, d: dict) -> "LrSchedule":
        if "rates" in d:
            return cls.explicit(d["rates"])
        return cls.geometric(d["base_rate"], d.get("decay", 1.0))


def stage_rates(s: LrSchedule, n_stages: int) -> list[float]:
    if s.rates is not None:
        if len(s.rates) != n_stages:
            raise ValueError(f"explicit schedule has {len(s.rates)} rates for {n_stages} stages")
        return list(s.rates)
    return [s.base_rate * s.decay**t for t in range(n_stages)]


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    dev_accuracy: float


@dataclass
class TrainTrace:
    epochs: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stopped_reason: str = "max_epochs"  # or "patience_exhausted"

    @property
    def best_dev_accuracy(self) -> float:
        return self.epochs[self.best_epoch - 1].dev_accuracy

    @property
    def n_epochs(self) -> int:
        return len(self.epochs)

    def to_dict(self) -> dict:
        return {
            "epochs": [[r.epoch, r.train_loss, r.dev_accuracy] for r in self.epochs],
            "best_epoch": self.best_epoch,
            "stopped_reason": self.stopped_reason,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TrainTrace":
        return cls(
            epochs=[EpochRecord(int(e), float(l), float(a)) for e, l, a in d["epochs"]],
            best_epoch=int(d["best_epoch"]),
            stopped_reason=d["stopped_reason"],
        )


def train_epoch(m: Model, train: Dataset, lr: float, batch_size: int, rng: Rng,
                epoch: Optional[int] = None) -> tuple[Model, float]:
    """One shuffled pass of minibatch gradient descent.

    Returns the updated model and the mean of the per-batch losses (each
    computed before that batch's update).
    """
    n = len(train)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    order = rng.permutation(n)
    X, y = train.X[order], train.y[order]
    losses = []
    for b, start in enumerate(range(0, n, batch_size)):
        loss, grad = _loss_and_grad(m, X[start:start + batch_size], y[start:start + batch_size])
        if not math.isfinite(loss) or loss > DIVERGENCE_LOSS:
            raise TrainingDivergence(f"loss {loss!r}", epoch, b, loss)
        if not all(np.isfinite(g).all() for g in grad.values()):
            raise TrainingDivergence("non-finite gradient", epoch, b, loss)
        losses.append(loss)
        if lr != 0:
            m = m.step(grad, lr)
    return m, float(np.mean(losses))


def train_to_convergence(m: Model, train: Dataset, dev: Dataset, h: StageHyper,
                         rng: Rng) -> tuple[Model, TrainTrace]:
    """Train until ``h.patience`` epochs pass without a dev-accuracy gain of ``h.min_delta``.

    Epochs are numbered from 1.  The returned model is the snapshot taken at
    ``trace.best_epoch``; ties keep the earliest epoch.
    """
    if len(train) == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(dev) == 0:
        raise ValueError("early stopping needs a non-empty dev set")

    trace = TrainTrace()
    best_model, best_acc = None, -math.inf
    # Snapshots follow any strict gain; the patience counter only resets on
    # a gain of at least min_delta over the level at its last reset.
    ref_acc, stale = -math.inf, 0
    for epoch in range(1, h.max_epochs + 1):
        m, loss = train_epoch(m, train, h.learning_rate, h.batch_size, rng, epoch=epoch)
        acc = evaluate(m, dev).accuracy
        trace.epochs.append(EpochRecord(epoch, loss, acc))
        if acc > best_acc:
            best_model, best_acc = m, acc
            trace.best_epoch = epoch
        if acc > ref_acc and acc >= ref_acc + h.min_delta:
            ref_acc, stale = acc, 0
        else:
            stale += 1
            if stale >= h.patience:
                trace.stopped_reason = "patience_exhausted"
                break
    return best_model, trace
