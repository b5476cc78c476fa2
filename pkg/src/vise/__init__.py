"""Optimal acceptance thresholds for voting in a stochastic environment (ViSE)."""

from .environments import (
    EnvironmentStats,
    FamilySweep,
    Laplace,
    Normal,
    ParameterError,
    SymmetrizedPareto,
    Uniform,
    first_quartile,
    parse_spec,
    standardize_by_quartile,
    stats,
    validate,
)
from .montecarlo import RngStream, SimulationReport, Trajectory, estimate_expected_increment, run_dynamics
from .voting import (
    DegenerateEnvironmentError,
    ThresholdLadder,
    VotingRule,
    expected_increment,
    expected_increment_beta,
    expected_increment_incomplete_beta,
    expected_increment_sum,
    expected_increment_zero_threshold,
    indicator,
    optimal_absolute_threshold,
    optimal_threshold_closed_form,
    optimal_threshold_general,
    win_loss_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateEnvironmentError",
    "EnvironmentStats",
    "FamilySweep",
    "Laplace",
    "Normal",
    "ParameterError",
    "RngStream",
    "SimulationReport",
    "SymmetrizedPareto",
    "ThresholdLadder",
    "Trajectory",
    "Uniform",
    "VotingRule",
    "estimate_expected_increment",
    "expected_increment",
    "expected_increment_beta",
    "expected_increment_incomplete_beta",
    "expected_increment_sum",
    "expected_increment_zero_threshold",
    "first_quartile",
    "indicator",
    "optimal_absolute_threshold",
    "optimal_threshold_closed_form",
    "optimal_threshold_general",
    "parse_spec",
    "run_dynamics",
    "standardize_by_quartile",
    "stats",
    "validate",
    "win_loss_ratio",
]
