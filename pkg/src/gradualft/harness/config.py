"""Experiment configuration: a single JSON document, strictly validated.

Top-level keys are exactly the :class:`ExperimentConfig` field names plus
``format_version``.  Unknown keys anywhere are rejected so a typo cannot
silently fall back to a default.

``task`` is either an object of :class:`~gradualft.synthgen.TaskSpec`
fields or a string naming a directory with ``train.tsv``, ``dev.tsv``,
``test.tsv`` and ``pool.tsv`` (as written by ``gradualft gen``).  When a
synthetic task object omits ``seed``, every experiment seed generates its
own task instance; when it sets ``seed`` the data is shared by all runs and
only training randomness varies.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from ..datamodel import Schedule, parse_schedule
from ..gradual import REGIMES
from ..model import ModelSpec
from ..synthgen import TaskSpec
from ..trainer import LrSchedule, StageHyper

CONFIG_VERSION = 1


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ModelConfig:
    """ModelSpec minus the data-dependent sizes, which come from the task."""

    hidden_dim: int = 16
    init_scale: float = 0.1

    def build(self, feature_dim: int, num_classes: int) -> ModelSpec:
        return ModelSpec(feature_dim, num_classes, self.hidden_dim, self.init_scale)


@dataclass(frozen=True)
class ExperimentConfig:
    task: Union[dict, str] = field(default_factory=dict)
    schedule: Schedule = Schedule((4000, 2000, 500, 0))
    lr_schedule: LrSchedule = LrSchedule.explicit((0.1, 0.1, 0.1, 0.04))
    stage_hyper: StageHyper = StageHyper(patience=10)
    model_spec: ModelConfig = ModelConfig()
    regimes: tuple[str, ...] = REGIMES
    seeds: tuple[int, ...] = tuple(range(10))
    output_dir: Optional[str] = None

    def __post_init__(self):
        if not self.regimes:
            raise ConfigError("at least one regime is required")
        for r in self.regimes:
            if r not in REGIMES:
                raise ConfigError(f"unknown regime {r!r}; expected a subset of {REGIMES}")
        if len(set(self.regimes)) != len(self.regimes):
            raise ConfigError("regimes must not repeat")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must not repeat")
        if isinstance(self.task, dict):
            spec = self.task_spec(0)
            if self.schedule[0] > spec.out_pool_n:
                raise ConfigError(
                    f"schedule starts at {self.schedule[0]} but the task's pool has "
                    f"{spec.out_pool_n} examples")
        if self.lr_schedule.rates is not None and len(self.lr_schedule.rates) != len(self.schedule):
            raise ConfigError(
                f"lr_schedule has {len(self.lr_schedule.rates)} rates for a "
                f"{len(self.schedule)}-stage schedule")

    @property
    def synthetic(self) -> bool:
        return isinstance(self.task, dict)

    def task_spec(self, seed: int) -> TaskSpec:
        """Synthetic task for experiment seed ``seed``."""
        if not self.synthetic:
            raise ConfigError("task is a data directory, not a synthetic spec")
        params = dict(self.task)
        params.setdefault("seed", seed)
        return TaskSpec(**params)

    def with_overrides(self, seeds=None, output_dir=None) -> "ExperimentConfig":
        changes = {}
        if seeds is not None:
            changes["seeds"] = tuple(seeds)
        if output_dir is not None:
            changes["output_dir"] = str(output_dir)
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "format_version": CONFIG_VERSION,
            "task": self.task if not self.synthetic else dict(self.task),
            "schedule": list(self.schedule.amounts),
            "lr_schedule": self.lr_schedule.to_dict(),
            "stage_hyper": dataclasses.asdict(self.stage_hyper),
            "model_spec": dataclasses.asdict(self.model_spec),
            "regimes": list(self.regimes),
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
        }


def _strict(cls, d, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    allowed = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{where}: {e}") from None


def config_from_dict(d: dict) -> ExperimentConfig:
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    d = dict(d)
    version = d.pop("format_version", None)
    if version != CONFIG_VERSION:
        raise ConfigError(f"config format_version must be {CONFIG_VERSION}, got {version!r}")
    allowed = {f.name for f in dataclasses.fields(ExperimentConfig)}
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")

    kw = {}
    if "task" in d:
        task = d["task"]
        if isinstance(task, dict):
            _strict(TaskSpec, task, "task")  # validate field names and values
            kw["task"] = dict(task)
        elif isinstance(task, str):
            kw["task"] = task
        else:
            raise ConfigError("task must be an object of TaskSpec fields or a directory path")
    if "schedule" in d:
        s = d["schedule"]
        try:
            kw["schedule"] = parse_schedule(s) if isinstance(s, str) else Schedule(tuple(s))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"schedule: {e}") from None
    if "lr_schedule" in d:
        lr = d["lr_schedule"]
        if not isinstance(lr, dict) or not set(lr) <= {"rates", "base_rate", "decay"}:
            raise ConfigError("lr_schedule must be {'rates': [...]} or {'base_rate': r, 'decay': g}")
        try:
            kw["lr_schedule"] = LrSchedule.from_dict(lr)
        except (TypeError, ValueError, KeyError) as e:
            raise ConfigError(f"lr_schedule: {e}") from None
    if "stage_hyper" in d:
        kw["stage_hyper"] = _strict(StageHyper, d["stage_hyper"], "stage_hyper")
    if "model_spec" in d:
        kw["model_spec"] = _strict(ModelConfig, d["model_spec"], "model_spec")
    if "regimes" in d:
        kw["regimes"] = tuple(d["regimes"])
    if "seeds" in d:
        seeds = d["seeds"]
        if not all(isinstance(s, int) and s >= 0 for s in seeds):
            raise ConfigError("seeds must be non-negative integers")
        kw["seeds"] = tuple(seeds)
    if "output_dir" in d:
        kw["output_dir"] = d["output_dir"]
    try:
        return ExperimentConfig(**kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: invalid JSON: {e}") from None
    return config_from_dict(doc)


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=1) + "\n")
