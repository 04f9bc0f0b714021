"""Benchmark harness: configs, experiment runner, baselines, CLI."""

from .baselines import bilinear_baseline
from .config import ExperimentConfig, SweepSpec, config_from_mapping, parse_config_file
from .runner import emit_convergence, load_input, run_experiment, run_sweep, run_trial

__all__ = [
    "ExperimentConfig",
    "SweepSpec",
    "config_from_mapping",
    "parse_config_file",
    "bilinear_baseline",
    "load_input",
    "run_trial",
    "run_experiment",
    "run_sweep",
    "emit_convergence",
]
