"""Gradual fine-tuning for domain adaptation on a synthetic shift benchmark."""

from .datamodel import Dataset, Domain, Example, Metrics, Schedule, parse_schedule, validate_dataset
from .gradual import REGIMES, RunReport, StageReport, gradual_ft, regime_schedule
from .model import Model, ModelSpec, evaluate, forward, init, loss_and_grad, predict
from .rng import Rng
from .sampling import ScheduleInfeasible, SplitSpec, mix, sample, split
from .synthgen import TaskSpec, bayes_ceiling, gen_task
from .trainer import (LrSchedule, StageHyper, TrainingDivergence, TrainTrace, stage_rates,
                      train_epoch, train_to_convergence)

__version__ = "0.1.0"
