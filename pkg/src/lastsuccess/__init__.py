"""Odds-theorem solver for the last-success problem, with its variants,
lower bounds, and independent verification oracles."""

__version__ = "0.1.0"

from .bounds import BoundCase, BoundReport, bound_report, classify_and_bound, variant1_bound
from .core import (
    Decision,
    HomogeneousSpec,
    ProblemInstance,
    Solution,
    SuffixStats,
    extend_game,
    homogeneous_solve,
    mal_threshold,
    optimal_threshold,
    solve,
    suffix_stats,
    validate_instance,
    win_probability,
)
from .estimator import OddsStopper
from .exceptions import *  # noqa: F401,F403
from .montecarlo import Game, SimulationConfig, SimulationResult, simulate, simulate_sweep
from .oracle import cross_validate, dp_optimal, enumerate_value, threshold_sweep
