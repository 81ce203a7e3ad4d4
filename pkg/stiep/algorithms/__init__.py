"""Automatic Python configuration file."""

__version__ = "1.0.0"

# Importing solver and experiment drivers
from .gmprp import (
    SolverStatus,
    SolverConfig,
    IterationRecord,
    IterationTrace,
    SolveResult,
    TRACE_COLUMNS,
    init_point,
    initial_stepsize,
    line_search,
    descent_identity_check,
    gmprp_solve,
)
from .experiments import (
    ExperimentSpec,
    ResultRow,
    RESULT_COLUMNS,
    MinDistanceTracker,
    run_scaling,
    run_fixed_n,
    run_t_statistics,
    run_experiment,
)

__all__ = [
    "SolverStatus",
    "SolverConfig",
    "IterationRecord",
    "IterationTrace",
    "SolveResult",
    "TRACE_COLUMNS",
    "init_point",
    "initial_stepsize",
    "line_search",
    "descent_identity_check",
    "gmprp_solve",
    "ExperimentSpec",
    "ResultRow",
    "RESULT_COLUMNS",
    "MinDistanceTracker",
    "run_scaling",
    "run_fixed_n",
    "run_t_statistics",
    "run_experiment",
]
