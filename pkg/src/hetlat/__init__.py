"""Multiobjective evolutionary optimization under heterogeneous objective latencies."""

from .kernels import BACKEND
from .metrics import hypervolume_2d, igd
from .problems import make_correlated_pair, make_mnk
from .sim_clock import EvaluationSimulator, SimConfig, StoppingMode, per_objective_budget
from .strategies import StrategyConfig, StrategyKind, run_strategy

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EvaluationSimulator",
    "SimConfig",
    "StoppingMode",
    "StrategyConfig",
    "StrategyKind",
    "hypervolume_2d",
    "igd",
    "make_correlated_pair",
    "make_mnk",
    "per_objective_budget",
    "run_strategy",
]
