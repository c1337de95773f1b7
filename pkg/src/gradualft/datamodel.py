"""Core data types: examples, datasets, out-of-domain schedules, metrics."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np


class Domain(enum.IntEnum):
    IN = 0
    OUT = 1

    @property
    def tag(self) -> str:
        return "in" if self is Domain.IN else "out"

    @classmethod
    def from_tag(cls, tag: str) -> "Domain":
        try:
            return {"in": cls.IN, "out": cls.OUT}[tag]
        except KeyError:
            raise ValueError(f"unknown domain tag {tag!r} (expected 'in' or 'out')") from None


class Example(NamedTuple):
    features: np.ndarray
    label: int
    domain: Domain
    source: Optional[str] = None


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


class Dataset:
    """An ordered, immutable collection of labeled feature vectors.

    Stored column-wise: ``X`` is ``(n, feature_dim)`` float64, ``y`` the
    integer labels, ``domain`` the :class:`Domain` codes and ``source`` an
    optional free-form provenance string per example (ignored by every
    algorithm).  Construction only checks that the columns line up; use
    :func:`validate_dataset` for the label and dimension invariants.
    """

    __slots__ = ("X", "y", "domain", "source", "feature_dim", "num_classes")

    def __init__(self, X, y, domain, feature_dim: int, num_classes: int, source=None):
        X = np.array(X, dtype=np.float64)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, feature_dim)
        if X.ndim != 2:
            raise ValueError(f"features must be a 2-d array, got shape {X.shape}")
        y = np.array(y, dtype=np.int64).reshape(-1)
        domain = np.array(domain, dtype=np.int8).reshape(-1)
        n = X.shape[0]
        if len(y) != n or len(domain) != n:
            raise ValueError(f"column lengths differ: X={n}, y={len(y)}, domain={len(domain)}")
        if not np.isin(domain, (Domain.IN, Domain.OUT)).all():
            raise ValueError("domain codes must be 0 (in) or 1 (out)")
        if feature_dim < 1 or num_classes < 1:
            raise ValueError("feature_dim and num_classes must be positive")
        if source is not None:
            source = np.array(source, dtype=object).reshape(-1)
            if len(source) != n:
                raise ValueError("source column length differs from X")
        self.X = _frozen(X)
        self.y = _frozen(y)
        self.domain = _frozen(domain)
        self.source = None if source is None else _frozen(source)
        self.feature_dim = int(feature_dim)
        self.num_classes = int(num_classes)

    @classmethod
    def empty(cls, feature_dim: int, num_classes: int) -> "Dataset":
        return cls(np.zeros((0, feature_dim)), [], [], feature_dim, num_classes)

    @classmethod
    def from_examples(cls, examples: Sequence[Example], feature_dim: int, num_classes: int) -> "Dataset":
        if not examples:
            return cls.empty(feature_dim, num_classes)
        lengths = {len(e.features) for e in examples}
        if len(lengths) > 1:
            raise ValueError(f"ragged feature vectors: lengths {sorted(lengths)}")
        sources = [e.source for e in examples]
        return cls(
            np.stack([np.asarray(e.features, dtype=np.float64) for e in examples]),
            [e.label for e in examples],
            [int(e.domain) for e in examples],
            feature_dim,
            num_classes,
            source=None if all(s is None for s in sources) else sources,
        )

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> Example:
        src = None if self.source is None else self.source[i]
        return Example(self.X[i], int(self.y[i]), Domain(int(self.domain[i])), src)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def examples(self) -> list[Example]:
        return list(self)

    def take(self, indices) -> "Dataset":
        """Sub-dataset at ``indices`` (in that order, repeats allowed)."""
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        return Dataset(
            self.X[idx],
            self.y[idx],
            self.domain[idx],
            self.feature_dim,
            self.num_classes,
            source=None if self.source is None else self.source[idx],
        )

    def compatible_with(self, other: "Dataset") -> bool:
        return self.feature_dim == other.feature_dim and self.num_classes == other.num_classes

    def identical_to(self, other: "Dataset") -> bool:
        """Exact equality of contents and order (bitwise on features)."""
        if not self.compatible_with(other) or len(self) != len(other):
            return False
        src_a = self.source if self.source is not None else [None] * len(self)
        src_b = other.source if other.source is not None else [None] * len(other)
        return (
            self.X.tobytes() == other.X.tobytes()
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.domain, other.domain)
            and list(src_a) == list(src_b)
        )

    def __repr__(self):
        n_in = int((self.domain == Domain.IN).sum())
        return (
            f"Dataset(n={len(self)}, in={n_in}, out={len(self) - n_in}, "
            f"feature_dim={self.feature_dim}, num_classes={self.num_classes})"
        )


def validate_dataset(d: Dataset) -> list[str]:
    """Return every invariant violation in ``d``; an empty list means ok."""
    problems = []
    if d.X.shape[1] != d.feature_dim:
        problems.append(f"feature length {d.X.shape[1]} != feature_dim {d.feature_dim}")
    bad = np.flatnonzero((d.y < 0) | (d.y >= d.num_classes))
    for i in bad:
        problems.append(f"example {i}: label {d.y[i]} outside [0, {d.num_classes})")
    nonfinite = np.flatnonzero(~np.isfinite(d.X).all(axis=1)) if len(d) else []
    for i in nonfinite:
        problems.append(f"example {i}: non-finite feature value")
    return problems


@dataclass(frozen=True)
class Schedule:
    """Out-of-domain example count per stage, strictly decreasing.

    A trailing 0 means the last stage trains on in-domain data only; a
    schedule that stops short of 0 (e.g. ``[4000]``) is mixed-only training.
    """

    amounts: tuple[int, ...]

    def __post_init__(self):
        amounts = tuple(int(a) for a in self.amounts)
        object.__setattr__(self, "amounts", amounts)
        if not amounts:
            raise ValueError("schedule must have at least one stage")
        if any(a < 0 for a in amounts):
            raise ValueError(f"schedule amounts must be non-negative: {list(amounts)}")
        for i in range(len(amounts) - 1):
            if amounts[i] <= amounts[i + 1]:
                raise ValueError(
                    f"schedule must be strictly decreasing: amounts[{i}]={amounts[i]} "
                    f"<= amounts[{i + 1}]={amounts[i + 1]}"
                )

    def __len__(self):
        return len(self.amounts)

    def __iter__(self):
        return iter(self.amounts)

    def __getitem__(self, i):
        return self.amounts[i]

    def __str__(self):
        return " -> ".join(str(a) for a in self.amounts)


_INT_TOKEN = re.compile(r"\d+")


def parse_schedule(text: str) -> Schedule:
    """Parse ``"4000,2000,500,0"`` (commas and/or whitespace) into a Schedule."""
    tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
    if not tokens:
        raise ValueError("empty schedule")
    for t in tokens:
        if not _INT_TOKEN.fullmatch(t):
            raise ValueError(f"schedule token {t!r} is not a non-negative integer")
    return Schedule(tuple(int(t) for t in tokens))


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    per_class_accuracy: tuple[Optional[float], ...]
    mean_loss: float
    n: int

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class_accuracy": list(self.per_class_accuracy),
            "mean_loss": self.mean_loss,
            "n": self.n,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        return cls(
            accuracy=float(d["accuracy"]),
            per_class_accuracy=tuple(None if v is None else float(v) for v in d["per_class_accuracy"]),
            mean_loss=float(d["mean_loss"]),
            n=int(d["n"]),
        )
