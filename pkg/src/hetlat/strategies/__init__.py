"""Latency-handling strategies and a dispatcher over them."""

from .base import (
    BatchSelection,
    BudgetTooSmall,
    NoInformation,
    PseudoScheme,
    RunRecord,
    Sampling,
    StrategyConfig,
    StrategyKind,
    assign_pseudovalue,
    candidate_filter,
)
from .interleave import run_brood_interleave, run_ranking_interleave, run_speculative_interleave
from .surrogate_interleave import SurrogateFitFailure, default_builder, run_surrogate_interleave
from .waiting import run_fast_first, run_waiting

RUNNERS = {
    StrategyKind.WAITING: run_waiting,
    StrategyKind.FAST_FIRST: run_fast_first,
    StrategyKind.RANKING_INTERLEAVE: run_ranking_interleave,
    StrategyKind.BROOD_INTERLEAVE: run_brood_interleave,
    StrategyKind.SPECULATIVE_INTERLEAVE: run_speculative_interleave,
    StrategyKind.SURROGATE_INTERLEAVE: run_surrogate_interleave,
}


def run_strategy(problem, sim, cfg: StrategyConfig) -> RunRecord:
    return RUNNERS[StrategyKind(cfg.kind)](problem, sim, cfg)


__all__ = [
    "BatchSelection",
    "BudgetTooSmall",
    "NoInformation",
    "PseudoScheme",
    "RUNNERS",
    "RunRecord",
    "Sampling",
    "StrategyConfig",
    "StrategyKind",
    "SurrogateFitFailure",
    "assign_pseudovalue",
    "candidate_filter",
    "default_builder",
    "run_brood_interleave",
    "run_fast_first",
    "run_ranking_interleave",
    "run_speculative_interleave",
    "run_strategy",
    "run_surrogate_interleave",
    "run_waiting",
]
