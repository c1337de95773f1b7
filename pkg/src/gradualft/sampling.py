"""Seeded subsampling, mixing and splitting of datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .datamodel import Dataset
from .rng import Rng


class ScheduleInfeasible(ValueError):
    """A stage asked for more out-of-domain examples than its pool holds."""

    def __init__(self, amount: int, available: int, stage: Optional[int] = None):
        self.amount = amount
        self.available = available
        self.stage = stage
        where = f"stage {stage}: " if stage is not None else ""
        super().__init__(f"{where}cannot sample {amount} examples from a pool of {available}")


def sample_indices(n: int, amount: int, rng: Rng, stage: Optional[int] = None) -> np.ndarray:
    """Positions of ``amount`` items drawn uniformly without replacement from ``range(n)``.

    The positions come back in ascending order, so the sample keeps the
    pool's relative order.
    """
    if amount < 0:
        raise ValueError(f"amount must be non-negative, got {amount}")
    if amount > n:
        raise ScheduleInfeasible(amount, n, stage)
    # First `amount` entries of a uniform permutation: every subset of that
    # size is equally likely.
    return np.sort(rng.permutation(n)[:amount])


def sample(pool: Dataset, amount: int, rng: Rng, stage: Optional[int] = None) -> Dataset:
    """Uniform subsample of ``amount`` examples from ``pool``, without replacement."""
    return pool.take(sample_indices(len(pool), amount, rng, stage))


def mix(in_domain: Dataset, out_domain: Dataset, rng: Rng) -> Dataset:
    """Concatenate the two datasets and shuffle the result uniformly."""
    if not in_domain.compatible_with(out_domain):
        raise ValueError(
            "cannot mix datasets with different shapes: "
            f"(feature_dim={in_domain.feature_dim}, num_classes={in_domain.num_classes}) vs "
            f"(feature_dim={out_domain.feature_dim}, num_classes={out_domain.num_classes})"
        )
    if in_domain.source is None and out_domain.source is None:
        source = None
    else:
        source = np.concatenate([
            in_domain.source if in_domain.source is not None else np.full(len(in_domain), None, dtype=object),
            out_domain.source if out_domain.source is not None else np.full(len(out_domain), None, dtype=object),
        ])
    joined = Dataset(
        np.concatenate([in_domain.X, out_domain.X]),
        np.concatenate([in_domain.y, out_domain.y]),
        np.concatenate([in_domain.domain, out_domain.domain]),
        in_domain.feature_dim,
        in_domain.num_classes,
        source=source,
    )
    return joined.take(rng.permutation(len(joined)))


@dataclass(frozen=True)
class SplitSpec:
    train: float
    dev: float
    test: float

    def __post_init__(self):
        fr = (self.train, self.dev, self.test)
        if any(f < 0 or not math.isfinite(f) for f in fr):
            raise ValueError(f"split fractions must be finite and non-negative: {fr}")
        if abs(sum(fr) - 1.0) > 1e-9:
            raise ValueError(f"split fractions must sum to 1, got {sum(fr)!r}")


def split(d: Dataset, spec: SplitSpec, rng: Rng) -> tuple[Dataset, Dataset, Dataset]:
    """Shuffle ``d`` and cut it into train/dev/test.

    Dev and test get ``floor(fraction * n)`` examples each; train gets the
    rest.
    """
    n = len(d)
    n_dev = math.floor(spec.dev * n)
    n_test = math.floor(spec.test * n)
    if spec.dev > 0 and n_dev == 0:
        raise ValueError(f"dev fraction {spec.dev} of {n} examples yields an empty dev split")
    if spec.test > 0 and n_test == 0:
        raise ValueError(f"test fraction {spec.test} of {n} examples yields an empty test split")
    n_train = n - n_dev - n_test
    if spec.train > 0 and n_train == 0:
        raise ValueError(f"train fraction {spec.train} of {n} examples yields an empty train split")
    perm = rng.permutation(n)
    return (
        d.take(perm[:n_train]),
        d.take(perm[n_train:n_train + n_dev]),
        d.take(perm[n_train + n_dev:]),
    )
