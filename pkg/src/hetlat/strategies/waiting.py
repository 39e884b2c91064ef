"""Waiting and Fast-First."""

from __future__ import annotations

import math

import numpy as np

from ..moea_core import Engine, objective_matrix, survive
from .base import BudgetTooSmall, RunContext, RunRecord, StrategyConfig


def _submit_all(ctx: RunContext, inds, objectives) -> None:
    for i in objectives:
        ctx.submit(i, inds)


def _can_submit_all(ctx: RunContext, n: int, objectives) -> bool:
    return all(ctx.sim.can_submit(i, n) for i in objectives)


def waiting_generations(ctx: RunContext, population: list, offspring: list | None = None) -> list:
    """Run Waiting generations until the budget ends; return the final population.

    ``population`` holds fully evaluated individuals (may be empty).  When
    ``offspring`` is given it is evaluated first instead of breeding a batch.
    """
    objectives = range(ctx.m)
    engine = Engine(ctx.cfg.engine)
    while True:
        if offspring is None:
            if not population:
                break
            offspring = ctx.breed_mo(population, ctx.lam)
        if not _can_submit_all(ctx, len(offspring), objectives):
            break
        _submit_all(ctx, offspring, objectives)
        ctx.advance_until_idle()
        if population:
            keep = survive(
                objective_matrix(population), objective_matrix(offspring), ctx.lam, engine, ctx.rng
            )
            pool = population + offspring
            population = [pool[i] for i in keep]
        else:
            population = list(offspring)
        ctx.note(phase="waiting")
        offspring = None
    return population


def run_waiting(problem, sim, cfg: StrategyConfig) -> RunRecord:
    """Evaluate every generation on all objectives and proceed at the slowest rate."""
    if problem.n_objectives < 2:
        raise ValueError("need at least two objectives")
    ctx = RunContext(problem, sim, cfg)
    first = ctx.spawn_random(ctx.lam)
    if not _can_submit_all(ctx, ctx.lam, range(ctx.m)):
        raise BudgetTooSmall("no complete generation fits in the budget")
    waiting_generations(ctx, [], first)
    return ctx.record()


def default_switch_time(total_time_steps: int, k_slow: int) -> int:
    """Switch point that leaves exactly two slow rounds at the end of the run."""
    return max(total_time_steps - 2 * k_slow, 0)


def run_fast_first(problem, sim, cfg: StrategyConfig) -> RunRecord:
    """Optimize the fast objective alone, then switch to Waiting late in the run.

    Phase 1 runs a (mu + lambda) single-objective EA on the fast objective
    until the switch time.  Phase 2 first evaluates the best distinct phase-1
    solutions on the remaining objectives, then continues with Waiting
    generations for whatever budget is left.
    """
    if problem.n_objectives < 2:
        raise ValueError("need at least two objectives")
    ctx = RunContext(problem, sim, cfg)
    B = sim.total_time_steps
    if cfg.switch_fraction is None:
        switch = default_switch_time(B, ctx.k_slow)
    else:
        switch = int(math.floor(cfg.switch_fraction * B))
    if sim.stopping_mode.value == "time_steps" and B - switch < ctx.k_slow:
        raise BudgetTooSmall("switch point leaves no room for a slow batch")
    others = [i for i in range(ctx.m) if i != ctx.fast]

    # phase 1
    pool = []
    pop = []
    batch = ctx.spawn_random(ctx.lam)
    while ctx.sim.now + ctx.k_fast <= switch and ctx.sim.can_submit(ctx.fast, len(batch)):
        ctx.submit(ctx.fast, batch)
        ctx.advance_until_idle()
        pool.extend(batch)
        merged = pop + batch
        vals = np.array([p.true_value(ctx.fast) for p in merged])
        order = np.argsort(vals, kind="mergesort")[: ctx.lam]
        pop = [merged[i] for i in order]
        ctx.note(phase="fast_only")
        batch = ctx.breed_so(pop, ctx.fast, ctx.lam)
    ctx.sim.idle_until(max(switch, ctx.sim.now))

    # phase 2
    if not pool:
        first = ctx.spawn_random(ctx.lam)
        if not _can_submit_all(ctx, ctx.lam, range(ctx.m)):
            raise BudgetTooSmall("no complete generation fits in the budget")
        waiting_generations(ctx, [], first)
        return ctx.record()
    chosen = _best_distinct(pool, ctx.fast, ctx.lam)
    if not _can_submit_all(ctx, len(chosen), others):
        raise BudgetTooSmall("no slow batch fits after the switch point")
    _submit_all(ctx, chosen, others)
    ctx.advance_until_idle()
    ctx.note(phase="switch")
    waiting_generations(ctx, list(chosen))
    return ctx.record()


def _best_distinct(pool, objective: int, count: int) -> list:
    vals = np.array([p.true_value(objective) for p in pool])
    seen = set()
    out = []
    for i in np.argsort(vals, kind="mergesort"):
        key = pool[i].genome.tobytes()
        if key in seen:
            continue
        seen.add(key)
        out.append(pool[i])
        if len(out) == count:
            break
    return out
