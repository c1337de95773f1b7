"""Configuration, file formats, the regime comparison matrix and the command line."""

from .config import ConfigError, ExperimentConfig, ModelConfig, config_from_dict, load_config, save_config
from .experiment import (ExperimentResult, RunFailure, emit_stage_curve, load_reports,
                         regenerate_report, run_experiment, run_one, summarize)
from .formats import DatasetFormatError, load_dataset, save_dataset
