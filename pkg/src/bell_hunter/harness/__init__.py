from .config import EXPERIMENTS, ExperimentConfig, InvalidConfigError, build_config
from .experiments import ExperimentResult, run_experiment
from .stats import (
    SummaryStatistics,
    k_violation,
    mean_over_trajectories,
    set_statistics,
    squared_error_stats,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "ExperimentResult",
    "InvalidConfigError",
    "SummaryStatistics",
    "build_config",
    "k_violation",
    "mean_over_trajectories",
    "run_experiment",
    "set_statistics",
    "squared_error_stats",
]
