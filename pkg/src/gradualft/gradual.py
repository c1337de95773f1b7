"""Gradual fine-tuning and the baselines expressed as schedules.

Every training regime is one call to :func:`gradual_ft` with a different
out-of-domain schedule:

=============  ========================
regime         schedule
=============  ========================
no_ft_single   ``[0]``
no_ft_mixed    ``[n0]``
one_stage      ``[n0, 0]``
gradual        user schedule, e.g. ``[4000, 2000, 500, 0]``
=============  ========================
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .datamodel import Dataset, Metrics, Schedule
from .model import Model, evaluate
from .rng import Rng
from .sampling import mix, sample_indices
from .trainer import LrSchedule, StageHyper, TrainTrace, stage_rates, train_to_convergence

REGIMES = ("no_ft_single", "no_ft_mixed", "one_stage", "gradual")


def regime_schedule(regime: str, n0: int, gradual_s: Optional[Schedule] = None) -> Schedule:
    if regime == "no_ft_single":
        return Schedule((0,))
    if regime in ("no_ft_mixed", "one_stage"):
        if n0 <= 0:
            raise ValueError(f"regime {regime} needs a positive out-of-domain amount, got {n0}")
        return Schedule((n0,)) if regime == "no_ft_mixed" else Schedule((n0, 0))
    if regime == "gradual":
        if gradual_s is None:
            raise ValueError("regime 'gradual' needs a schedule")
        return gradual_s
    raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")


def regime_rates(rates: LrSchedule, n_stages: int) -> LrSchedule:
    """Fit a rate schedule written for the full gradual schedule to a shorter regime.

    An explicit list keeps its leading rates for the mixed stages and its
    last rate for the final fine-tuning stage, so ``[a, a, a, b]`` becomes
    ``[a, b]`` for one-stage fine-tuning.  A single-stage run is plain
    training, not fine-tuning, and gets the first rate.  Geometric schedules
    are indexed by stage and need no adjustment.
    """
    if rates.rates is None or len(rates.rates) == n_stages:
        return rates
    r = rates.rates
    if n_stages > len(r):
        raise ValueError(f"explicit schedule has {len(r)} rates, regime needs {n_stages}")
    if n_stages == 1:
        return LrSchedule.explicit(r[:1])
    return LrSchedule.explicit(r[:n_stages - 1] + r[-1:])


def nested_pools(pool_size: int, s: Schedule, rng: Rng) -> list[np.ndarray]:
    """Index lists into the initial pool, one per stage.

    Stage ``t`` draws ``s[t]`` items uniformly from stage ``t - 1``'s pool
    (stage 0 draws from the whole pool), so each list is a subset of the one
    before it.
    """
    current = np.arange(pool_size)
    pools = []
    for t, amount in enumerate(s):
        picked = sample_indices(len(current), amount, rng.child(f"sample/{t}"), stage=t)
        current = current[picked]
        pools.append(current)
    return pools


@dataclass
class StageReport:
    stage_index: int
    out_count: int
    train_size: int
    learning_rate: float
    epochs: int
    dev: Metrics
    test: Metrics
    trace: TrainTrace

    def to_dict(self) -> dict:
        return {
            "stage_index": self.stage_index,
            "out_count": self.out_count,
            "train_size": self.train_size,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "dev": self.dev.to_dict(),
            "test": self.test.to_dict(),
            "trace": self.trace.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "StageReport":
        return cls(
            stage_index=int(d["stage_index"]),
            out_count=int(d["out_count"]),
            train_size=int(d["train_size"]),
            learning_rate=float(d["learning_rate"]),
            epochs=int(d["epochs"]),
            dev=Metrics.from_dict(d["dev"]),
            test=Metrics.from_dict(d["test"]),
            trace=TrainTrace.from_dict(d["trace"]),
        )


@dataclass
class RunReport:
    regime: str
    schedule: Schedule
    stages: list[StageReport]
    seed: int
    wall_clock_seconds: float = 0.0
    # index lists into the initial pool; kept in memory only
    stage_pools: list = field(default_factory=list, repr=False, compare=False)

    @property
    def final_dev(self) -> Metrics:
        return self.stages[-1].dev

    @property
    def final_test(self) -> Metrics:
        return self.stages[-1].test

    def to_dict(self) -> dict:
        # wall-clock time is left out so persisted reports stay byte-stable
        return {
            "regime": self.regime,
            "schedule": list(self.schedule.amounts),
            "seed": self.seed,
            "final_dev": self.final_dev.to_dict(),
            "final_test": self.final_test.to_dict(),
            "stages": [st.to_dict() for st in self.stages],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            regime=d["regime"],
            schedule=Schedule(tuple(d["schedule"])),
            stages=[StageReport.from_dict(st) for st in d["stages"]],
            seed=int(d["seed"]),
        )


def gradual_ft(d: Dataset, o0: Dataset, m0: Model, s: Schedule, rates: LrSchedule,
               h: StageHyper, dev: Dataset, test: Dataset, rng: Rng,
               regime: str = "gradual") -> tuple[Model, RunReport]:
    """Train ``m0`` through one stage per schedule entry.

    Stage ``t`` keeps ``s[t]`` examples sampled from the previous stage's
    out-of-domain pool, trains to convergence on all of ``d`` plus those
    examples, and passes its best-dev model on to stage ``t + 1``.  Sampling,
    mixing and training at each stage draw from their own child generators
    (``sample/t``, ``mix/t``, ``train/t``) so the data chosen for a stage does
    not depend on how long earlier stages trained.
    """
    if len(d) == 0:
        raise ValueError("in-domain training data is empty")
    for name, other in (("out-of-domain pool", o0), ("dev", dev), ("test", test)):
        if not d.compatible_with(other):
            raise ValueError(f"{name} shape does not match in-domain data")
    if m0.spec.feature_dim != d.feature_dim or m0.spec.num_classes != d.num_classes:
        raise ValueError(
            f"model expects ({m0.spec.feature_dim} features, {m0.spec.num_classes} classes), "
            f"data has ({d.feature_dim}, {d.num_classes})"
        )
    lrs = stage_rates(rates, len(s))
    started = time.perf_counter()
    pools = nested_pools(len(o0), s, rng)

    m = m0
    stages = []
    for t, (amount, pool_idx, lr) in enumerate(zip(s, pools, lrs)):
        train_t = mix(d, o0.take(pool_idx), rng.child(f"mix/{t}"))
        m, trace = train_to_convergence(m, train_t, dev, h.with_rate(lr), rng.child(f"train/{t}"))
        stages.append(StageReport(
            stage_index=t,
            out_count=int(amount),
            train_size=len(train_t),
            learning_rate=lr,
            epochs=trace.n_epochs,
            dev=evaluate(m, dev),
            test=evaluate(m, test),
            trace=trace,
        ))
    report = RunReport(
        regime=regime,
        schedule=s,
        stages=stages,
        seed=rng.seed,
        wall_clock_seconds=time.perf_counter() - started,
        stage_pools=pools,
    )
    return m, report
