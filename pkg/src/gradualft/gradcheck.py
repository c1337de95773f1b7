"""Finite-difference check of the analytic gradients in :mod:`gradualft.model`."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datamodel import Dataset, Domain
from .model import Model, ModelSpec, init, loss_and_grad
from .rng import Rng

FD_STEP = 1e-5
# entries whose gradient is smaller than this are compared absolutely
REL_FLOOR = 1e-6
TOLERANCE = 1e-4


def numeric_grad(m: Model, batch: Dataset, h: float = FD_STEP) -> dict:
    """Central differences ``(L(p + h) - L(p - h)) / 2h``, one coordinate at a time."""
    out = {}
    for name, p in m.params.items():
        g = np.zeros_like(p)
        for idx in np.ndindex(p.shape):
            plus, minus = p.copy(), p.copy()
            plus[idx] += h
            minus[idx] -= h
            lp, _ = loss_and_grad(Model(m.spec, {**m.params, name: plus}), batch)
            lm, _ = loss_and_grad(Model(m.spec, {**m.params, name: minus}), batch)
            g[idx] = (lp - lm) / (2 * h)
        out[name] = g
    return out


def max_rel_error(analytic: dict, numeric: dict, floor: float = REL_FLOOR) -> float:
    worst = 0.0
    for k in analytic:
        a, n = analytic[k], numeric[k]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        worst = max(worst, float((np.abs(a - n) / denom).max(initial=0.0)))
    return worst


def random_case(seed: int, max_dim: int = 6, max_classes: int = 4, max_hidden: int = 5,
                max_batch: int = 8) -> tuple[Model, Dataset]:
    """A random small model and batch; sizes and weights all come from ``seed``."""
    rng = Rng(seed).child("gradcheck")
    d = int(rng.integers(1, max_dim + 1))
    k = int(rng.integers(2, max_classes + 1))
    hidden = int(rng.integers(0, max_hidden + 1))
    n = int(rng.integers(1, max_batch + 1))
    # a larger init scale keeps the check away from the near-linear regime
    m = init(ModelSpec(d, k, hidden, init_scale=1.0), rng.child("init"))
    X = rng.normal((n, d))
    y = rng.integers(0, k, size=n)
    return m, Dataset(X, y, np.full(n, int(Domain.IN)), d, k)


@dataclass(frozen=True)
class GradcheckResult:
    seed: int
    spec: ModelSpec
    batch_size: int
    max_rel_error: float

    @property
    def ok(self) -> bool:
        return self.max_rel_error < TOLERANCE


def check(m: Model, batch: Dataset, h: float = FD_STEP) -> float:
    _, g = loss_and_grad(m, batch)
    return max_rel_error(g, numeric_grad(m, batch, h))


def run_suite(seeds=range(10)) -> list[GradcheckResult]:
    results = []
    for seed in seeds:
        m, batch = random_case(seed)
        results.append(GradcheckResult(seed, m.spec, len(batch), check(m, batch)))
    return results
