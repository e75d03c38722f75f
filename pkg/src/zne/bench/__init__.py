"""Benchmark scenarios: circuit generators, experiment configuration and reports."""

from .config import ConfigError, ExperimentConfig, NoiseConfig
from .experiments import (RUNNERS, ScaledExecutor, run_adaptive_compare, run_param_noise_study,
                          run_random6_study, run_rb_decay, run_scenario, run_table2, run_zne)
from .generators import (generate_mirror_rb, generate_random6, generate_rb_circuit,
                         generate_rotation_circuit)
from .report import BenchmarkReport

__all__ = [
    "RUNNERS", "BenchmarkReport", "ConfigError", "ExperimentConfig", "NoiseConfig",
    "ScaledExecutor", "generate_mirror_rb", "generate_random6", "generate_rb_circuit",
    "generate_rotation_circuit", "run_adaptive_compare", "run_param_noise_study",
    "run_random6_study", "run_rb_decay", "run_scenario", "run_table2", "run_zne",
]
