"""Surrogate-assisted interleaving (HK-RVEA / T-SAEA control flow).

Initialization evaluates a population of ``population_size`` on both
objectives and runs a single-objective EA on the fast objective while the
slow batch is out.  Each main-loop iteration then

1. fits one surrogate per objective (slow from the archive ``A``, fast from
   ``A_fast``),
2. evolves a population over the surrogate means,
3. picks ``u`` samples by acquisition and sends them to both objectives,
4. during the slow evaluation fills the fast objective with ``u * (k_s - 1)``
   auxiliary solutions, bred from the samples (``sampling="variation"``) or
   Latin-hypercube sampled around them (``sampling="lhs"``),
5. adds the samples to ``A``.

The loop stops as soon as either objective reaches its evaluation cap.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .. import surrogate as sg
from ..moea_core import nondominated_mask, rank_and_crowding, survive, tournament, vary
from ..sim_clock import StoppingMode
from .base import BudgetTooSmall, RunContext, RunRecord, Sampling, StrategyConfig, require_biobjective


class SurrogateFitFailure(RuntimeError):
    pass


SurrogateBuilder = Callable[..., "sg.SurrogateModel"]


def default_builder(X, y, *, objective: str, iteration: int, transfer: bool) -> sg.SurrogateModel:
    """RBF interpolant for either objective.

    ``transfer`` flags the iterations on which a transfer-learning builder
    would refit the slow model from the fast one; this builder ignores it.
    """
    return sg.fit(X, y)


def _fit(builder, X, y, **kw):
    try:
        return builder(X, y, **kw)
    except sg.DegenerateSet as exc:
        raise SurrogateFitFailure(str(exc)) from exc


def _inner_moea(ctx: RunContext, models, seeds: np.ndarray, generations: int) -> np.ndarray:
    """NSGA-II over surrogate means; returns the final population genomes."""
    lam = ctx.lam
    problem = ctx.problem
    pop = seeds[:lam]
    if len(pop) < lam:
        pop = np.vstack([pop, problem.random_genomes(lam - len(pop), ctx.rng)]).astype(seeds.dtype)

    def score(G):
        X = problem.as_real(G)
        return np.column_stack([m.predict_many(X)[0] for m in models])

    F = score(pop)
    for _ in range(generations):
        rank, crowd = rank_and_crowding(F)
        picks = tournament(rank, crowd, lam, ctx.rng)
        kids = vary(pop[picks], ctx.rng, ctx.op)
        Fk = score(kids)
        keep = survive(F, Fk, lam, "generational", ctx.rng)
        pool = np.vstack([pop, kids])
        pool_F = np.vstack([F, Fk])
        pop, F = pool[keep], pool_F[keep]
    return pop


def _training(inds, objective: int, cap: int, problem):
    chosen = inds[-cap:]
    X = problem.as_real(np.vstack([i.genome for i in chosen]))
    y = np.array([i.true_value(objective) for i in chosen])
    return X, y


def run_surrogate_interleave(
    problem, sim, cfg: StrategyConfig, surrogate_builder: SurrogateBuilder | None = None
) -> RunRecord:
    require_biobjective(problem)
    if sim.stopping_mode is not StoppingMode.PER_OBJECTIVE_EVALUATIONS:
        raise ValueError("surrogate interleaving stops on per-objective evaluation counts")
    builder = surrogate_builder or default_builder
    ctx = RunContext(problem, sim, cfg)
    lam, u = ctx.lam, cfg.samples_per_iteration
    slow, fast = ctx.slow, ctx.fast
    cap_slow = sim.max_fe_per_objective[slow]
    cap_fast = sim.max_fe_per_objective[fast]
    if cfg.sampling is Sampling.LHS and problem.binary:
        raise ValueError("Latin hypercube sampling needs a continuous problem")

    def fast_room():
        return cap_fast - ctx.sim.ledger.committed(fast)

    # initialization
    P = ctx.spawn_random(lam)
    if not (ctx.sim.can_submit(slow, lam) and ctx.sim.can_submit(fast, lam)):
        raise BudgetTooSmall("initial population does not fit the evaluation caps")
    ctx.submit(slow, P)
    ctx.submit(fast, P)
    archive_fast = list(P)
    inner = list(P)
    while ctx.sim.busy(slow):
        ctx.advance()
        if not ctx.sim.busy(slow):
            break
        n = min(lam, fast_room())
        if not ctx.sim.busy(fast) and n > 0 and ctx.sim.now + ctx.k_fast <= _completion_time(ctx, slow):
            kids = ctx.breed_so(inner, fast, n)
            ctx.submit(fast, kids)
            archive_fast.extend(kids)
            inner = kids
    ctx.advance_until_idle()
    archive = list(P)
    ctx.note(phase="init", iteration=0)

    iteration = 1
    while not ctx.sim.is_exhausted():
        u_now = min(u, cap_slow - ctx.sim.ledger.committed(slow), fast_room())
        if u_now < 1:
            break
        Xs, ys = _training(archive, slow, cfg.max_training, problem)
        Xf, yf = _training(archive_fast, fast, cfg.max_training, problem)
        transfer = iteration % cfg.transfer_trigger == 0
        models = [None, None]
        models[slow] = _fit(builder, Xs, ys, objective="slow", iteration=iteration, transfer=transfer)
        models[fast] = _fit(builder, Xf, yf, objective="fast", iteration=iteration, transfer=False)

        F_arch = np.array([i.objectives() for i in archive])
        elite = np.vstack([i.genome for i, keep in zip(archive, nondominated_mask(F_arch)) if keep])
        pop = _inner_moea(ctx, models, elite, cfg.inner_generations)
        seen = {i.genome.tobytes() for i in archive}
        fresh, keys = [], set()
        for g in pop:
            k = g.tobytes()
            if k not in seen and k not in keys:
                fresh.append(g)
                keys.add(k)
        while len(fresh) < u_now:
            fresh.append(problem.random_genomes(1, ctx.rng)[0])
        fresh = np.vstack(fresh)
        pick = sg.acquire(models, problem.as_real(fresh), u_now, ctx.rng)
        P = ctx.spawn(fresh[np.sort(pick)])

        ctx.submit(slow, P)
        ctx.submit(fast, P)
        archive_fast.extend(P)
        t0 = ctx.sim.now
        if cfg.sampling is Sampling.LHS:
            per_center = max(ctx.k_slow // ctx.k_fast - 1, 1)
            design = sg.lhs_sample(
                np.vstack([p.genome for p in P]), per_center,
                cfg.lhs_box_fraction, problem.lower, problem.upper, ctx.rng,
            )
            # round-major order: each fast round takes one point around every sample
            aux_pool = design.reshape(len(P), per_center, -1).transpose(1, 0, 2).reshape(-1, problem.n_var)
        while ctx.sim.busy(slow):
            ctx.advance()
            if not ctx.sim.busy(slow):
                break
            n = min(len(P), fast_room())
            if ctx.sim.busy(fast) or n < 1 or ctx.sim.now + ctx.k_fast > t0 + ctx.k_slow:
                continue
            if cfg.sampling is Sampling.LHS:
                genomes, aux_pool = aux_pool[:n], aux_pool[n:]
                if not len(genomes):
                    continue
                aux = ctx.spawn(genomes)
            else:
                aux = ctx.breed_uniform(P, n)
            ctx.submit(fast, aux)
            archive_fast.extend(aux)
        ctx.advance_until_idle()
        archive.extend(P)
        ctx.note(phase="iteration", iteration=iteration)
        iteration += 1
    return ctx.record()


def _completion_time(ctx: RunContext, objective: int) -> int:
    """Completion time of the batch currently in flight on ``objective``."""
    return min(
        j.completion_time for j in ctx.sim.ledger.jobs_in_flight.values() if j.objective_index == objective
    )
