"""Interleaving strategies: ranking-based with pseudovalues, brood, speculative.

All three use the idle time of the fast objective while a slow batch is in
flight.  They are defined for one slow and one fast objective.
"""

from __future__ import annotations

import numpy as np

from ..moea_core import Engine, objective_matrix, rank_and_crowding, survive, truncate
from .base import (
    BatchSelection,
    BudgetTooSmall,
    NoInformation,
    PseudoScheme,
    RunContext,
    RunRecord,
    StrategyConfig,
    assign_pseudovalue,
    candidate_filter,
    require_biobjective,
)


def refresh_pseudovalues(ctx: RunContext, population, scheme: PseudoScheme) -> None:
    """Recompute the slow pseudovalue of every individual not yet evaluated on it.

    Individuals are visited in birth order so that inherited values cascade
    from parents to children within a single pass.
    """
    for ind in sorted(population, key=lambda i: i.id):
        if ind.is_true(ctx.slow):
            continue
        try:
            v = assign_pseudovalue(ind, ctx.parents_of(ind), population, scheme, ctx.slow)
        except NoInformation:
            continue
        ind.set_pseudo(ctx.slow, v)


# ---------------------------------------------------------------------------
# ranking-based interleaving
# ---------------------------------------------------------------------------


def run_ranking_interleave(problem, sim, cfg: StrategyConfig) -> RunRecord:
    """Unbounded population; slow values stand in as pseudovalues until revealed.

    Whenever the slow objective is idle, the next slow batch is drawn from
    fast-evaluated individuals that have not been slow-evaluated, either the
    best by nondominated rank (using pseudovalues) or the most recent ones.
    Whenever the fast objective has spare capacity, new offspring are bred
    from the whole population and evaluated on it.
    """
    require_biobjective(problem)
    ctx = RunContext(problem, sim, cfg)
    lam = ctx.lam
    scheme = PseudoScheme(cfg.pseudo_scheme)
    population = ctx.spawn_random(lam)
    if not (ctx.sim.can_submit(ctx.slow, lam) and ctx.sim.can_submit(ctx.fast, lam)):
        raise BudgetTooSmall("no complete generation fits in the budget")
    ctx.submit(ctx.slow, population)
    ctx.submit(ctx.fast, population)
    ctx.advance()

    while True:
        fresh = []
        if not ctx.sim.busy(ctx.slow) and ctx.sim.can_submit(ctx.slow, lam):
            refresh_pseudovalues(ctx, population, scheme)
            batch = _select_slow_batch(ctx, population, cfg.batch_selection)
            if len(batch) < lam and ctx.sim.can_submit(ctx.fast, lam - len(batch)):
                fresh = _breed_from(ctx, population, lam - len(batch), scheme)
                population.extend(fresh)
                batch = batch + fresh
            if batch:
                ctx.submit(ctx.slow, batch)
                ctx.note(phase="slow_batch", n=len(batch))
        if fresh:
            ctx.submit(ctx.fast, fresh)
        room = ctx.sim.free_capacity(ctx.fast)
        if room > 0 and ctx.sim.can_submit(ctx.fast, room):
            kids = _breed_from(ctx, population, room, scheme)
            population.extend(kids)
            ctx.submit(ctx.fast, kids)
        if not ctx.sim.ledger.jobs_in_flight:
            break
        ctx.advance()
    return ctx.record()


def _breed_from(ctx: RunContext, population, count: int, scheme: PseudoScheme):
    ready = [p for p in population if p.is_true(ctx.fast) and p.has_value(ctx.slow)]
    if ready and any(p.is_true(ctx.slow) for p in ready):
        kids = ctx.breed_mo(ready, count, allow_pseudo=True)
    else:
        pool = [p for p in population if p.is_true(ctx.fast)]
        kids = ctx.breed_so(pool, ctx.fast, count)
    for kid in kids:
        try:
            kid.set_pseudo(
                ctx.slow, assign_pseudovalue(kid, ctx.parents_of(kid), population, scheme, ctx.slow)
            )
        except NoInformation:
            pass
    return kids


def _select_slow_batch(ctx: RunContext, population, mode: BatchSelection):
    cands = [
        p for p in population
        if p.is_true(ctx.fast) and not p.is_true(ctx.slow) and not p.slots[ctx.slow].in_flight
    ]
    if len(cands) <= ctx.lam:
        return cands
    if BatchSelection(mode) is BatchSelection.RECENT:
        return sorted(cands, key=lambda p: -p.id)[: ctx.lam]
    ranked = [p for p in population if p.is_true(ctx.fast) and p.has_value(ctx.slow)]
    F = objective_matrix(ranked, allow_pseudo=True)
    rank, crowd = rank_and_crowding(F)
    pos = {p.id: r for r, p in enumerate(ranked)}
    idx = np.array([pos.get(p.id, -1) for p in cands])
    # candidates without any slow information rank after everything else
    r = np.where(idx >= 0, rank[np.maximum(idx, 0)], np.iinfo(np.int64).max)
    c = np.where(idx >= 0, crowd[np.maximum(idx, 0)], 0.0)
    order = np.lexsort((ctx.rng.random(len(cands)), -c, r))
    return [cands[i] for i in order[: ctx.lam]]


# ---------------------------------------------------------------------------
# brood and speculative interleaving
# ---------------------------------------------------------------------------


def _choose_next_batch(ctx: RunContext, candidates, elite, lineage):
    """Next slow batch from fast-evaluated candidates.

    Candidates passing the parent filter are preferred and, when there are
    too many, truncated NSGA-II style on (inherited slow value, fast value).
    Short batches are topped up with the best-fast failing candidates and,
    failing that, with fresh offspring of the elite.  ``lineage`` lists every
    brood individual of the cycle so inherited values can cascade through
    intermediate generations.
    """
    lam = ctx.lam
    refresh_pseudovalues(ctx, lineage, PseudoScheme.FITNESS_INHERITANCE)
    passing = [c for c in candidates if candidate_filter(c, ctx.parents_of(c), ctx.fast)]
    if len(passing) > lam:
        usable = [c for c in passing if c.has_value(ctx.slow)]
        if len(usable) == len(passing):
            keep = truncate(objective_matrix(passing, allow_pseudo=True), lam, ctx.rng)
        else:
            vals = np.array([c.true_value(ctx.fast) for c in passing])
            keep = np.sort(np.argsort(vals, kind="mergesort")[:lam])
        return [passing[i] for i in keep]
    batch = list(passing)
    if len(batch) < lam:
        ids = {c.id for c in batch}
        rest = sorted((c for c in candidates if c.id not in ids), key=lambda c: c.true_value(ctx.fast))
        batch.extend(rest[: lam - len(batch)])
    if len(batch) < lam and elite:
        batch.extend(ctx.breed_mo(elite, lam - len(batch)))
    return batch


def _interleave_cycles(ctx: RunContext, speculative: bool) -> None:
    lam = ctx.lam
    engine = Engine(ctx.cfg.engine)
    batch = ctx.spawn_random(lam)
    if not (ctx.sim.can_submit(ctx.slow, lam) and ctx.sim.can_submit(ctx.fast, lam)):
        raise BudgetTooSmall("no complete generation fits in the budget")
    elite: list = []
    while True:
        t0 = ctx.sim.now
        ctx.submit(ctx.slow, batch)
        unrated = [b for b in batch if not b.is_true(ctx.fast)]
        if unrated:
            ctx.submit(ctx.fast, unrated)
        brood = []
        inner = list(batch)
        # the fast objective runs (k_slow / k_fast - 1) brood rounds per slow batch
        rounds = ctx.k_slow // ctx.k_fast - 1
        while ctx.sim.busy(ctx.slow):
            if (
                rounds > 0
                and not ctx.sim.busy(ctx.fast)
                and ctx.sim.now + ctx.k_fast <= t0 + ctx.k_slow
                and ctx.sim.can_submit(ctx.fast, lam)
            ):
                if speculative:
                    kids = ctx.breed_so(inner, ctx.fast, lam)
                else:
                    kids = ctx.breed_uniform(batch, lam)
                ctx.submit(ctx.fast, kids)
                brood.extend(kids)
                inner = kids
                rounds -= 1
            ctx.advance()
        ctx.advance_until_idle(ctx.slow)
        if elite:
            keep = survive(objective_matrix(elite), objective_matrix(batch), lam, engine, ctx.rng)
            pool = elite + batch
            elite = [pool[i] for i in keep]
        else:
            elite = list(batch)
        ctx.note(phase="cycle", brood=len(brood))
        candidates = inner if speculative and brood else brood
        if not ctx.sim.can_submit(ctx.slow, lam):
            break
        if candidates:
            batch = _choose_next_batch(ctx, candidates, elite, brood)
        else:
            batch = ctx.breed_mo(elite, lam)
        if any(not b.is_true(ctx.fast) for b in batch) and not ctx.sim.can_submit(
            ctx.fast, sum(not b.is_true(ctx.fast) for b in batch)
        ):
            break


def run_brood_interleave(problem, sim, cfg: StrategyConfig) -> RunRecord:
    """Constant population; brood offspring of the in-flight batch fill the fast idle time."""
    require_biobjective(problem)
    ctx = RunContext(problem, sim, cfg)
    _interleave_cycles(ctx, speculative=False)
    return ctx.record()


def run_speculative_interleave(problem, sim, cfg: StrategyConfig) -> RunRecord:
    """Like brood interleaving, but an inner fast-objective EA runs during each slow batch."""
    require_biobjective(problem)
    ctx = RunContext(problem, sim, cfg)
    _interleave_cycles(ctx, speculative=True)
    return ctx.record()


__all__ = [
    "refresh_pseudovalues",
    "run_brood_interleave",
    "run_ranking_interleave",
    "run_speculative_interleave",
]
