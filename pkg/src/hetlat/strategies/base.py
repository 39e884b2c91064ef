"""Strategy configuration, run records and the per-run bookkeeping they share."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, fields
from typing import Sequence

import numpy as np

from ..moea_core import (
    Engine,
    IncompleteVector,
    Individual,
    ParetoArchive,
    Variation,
    objective_matrix,
    rank_and_crowding,
    tournament,
    tournament_scalar,
    vary,
)
from ..sim_clock import EvaluationSimulator, SimConfig


class BudgetTooSmall(RuntimeError):
    """Not even one complete generation fits in the budget."""


class NoInformation(ValueError):
    """No slow-objective value is available to derive a pseudovalue from."""


class StrategyKind(str, enum.Enum):
    WAITING = "waiting"
    FAST_FIRST = "fast_first"
    RANKING_INTERLEAVE = "ranking_interleave"
    BROOD_INTERLEAVE = "brood_interleave"
    SPECULATIVE_INTERLEAVE = "speculative_interleave"
    SURROGATE_INTERLEAVE = "surrogate_interleave"


class PseudoScheme(str, enum.Enum):
    FITNESS_INHERITANCE = "fitness_inheritance"
    POPULATION_MEAN = "population_mean"


class BatchSelection(str, enum.Enum):
    RANK = "rank"
    RECENT = "recent"


class Sampling(str, enum.Enum):
    VARIATION = "variation"  # HK-RVEA style auxiliary solutions
    LHS = "lhs"  # T-SAEA style auxiliary solutions


_ENUM_FIELDS = {
    "kind": StrategyKind,
    "pseudo_scheme": PseudoScheme,
    "batch_selection": BatchSelection,
    "sampling": Sampling,
    "engine": Engine,
}


@dataclass(frozen=True)
class StrategyConfig:
    kind: StrategyKind
    population_size: int = 10
    engine: Engine = Engine.GENERATIONAL
    rng_seed: int = 0
    name: str | None = None
    crossover_prob: float = 0.9
    # fast-first; None reserves exactly two slow rounds at the end
    switch_fraction: float | None = None
    # ranking interleave
    pseudo_scheme: PseudoScheme = PseudoScheme.FITNESS_INHERITANCE
    batch_selection: BatchSelection = BatchSelection.RANK
    # surrogate interleave
    samples_per_iteration: int = 3
    transfer_trigger: int = 5
    sampling: Sampling = Sampling.VARIATION
    inner_generations: int = 20
    lhs_box_fraction: float = 0.1
    max_training: int = 200

    def __post_init__(self):
        for name, enum_type in _ENUM_FIELDS.items():
            object.__setattr__(self, name, enum_type(getattr(self, name)))
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.switch_fraction is not None and not 0 < self.switch_fraction <= 1:
            raise ValueError("switch_fraction must lie in (0, 1]")
        if self.samples_per_iteration < 1 or self.samples_per_iteration > self.population_size:
            raise ValueError("samples_per_iteration must lie in [1, population_size]")
        if self.transfer_trigger < 1:
            raise ValueError("transfer_trigger must be >= 1")

    @property
    def label(self) -> str:
        return self.name or self.kind.value

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = v.value if isinstance(v, enum.Enum) else v
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StrategyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown strategy field(s): {sorted(unknown)}")
        return cls(**d)


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


@dataclass
class RunRecord:
    config: dict
    seed: int
    events: list[dict]
    front: list[list[float]]
    fe: list[int]
    metrics: dict = field(default_factory=dict)
    trace: list[dict] = field(default_factory=list)
    # in-memory only
    front_individuals: list[Individual] = field(default_factory=list, repr=False, compare=False)
    individuals: dict[int, Individual] = field(default_factory=dict, repr=False, compare=False)

    def summary(self) -> dict:
        return {
            "config": self.config,
            "fe": list(self.fe),
            "front": self.front,
            "metrics": self.metrics,
            "seed": self.seed,
            "trace": self.trace,
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=1, default=_json_default) + "\n"

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e) + "\n" for e in self.events)

    @classmethod
    def from_files(cls, summary_text: str, events_text: str = "") -> "RunRecord":
        d = json.loads(summary_text)
        events = [json.loads(line) for line in events_text.splitlines() if line.strip()]
        return cls(
            config=d["config"], seed=d["seed"], events=events, front=d["front"],
            fe=d["fe"], metrics=d.get("metrics", {}), trace=d.get("trace", []),
        )

    @property
    def front_array(self) -> np.ndarray:
        return np.asarray(self.front, dtype=np.float64).reshape(-1, len(self.fe))


# ---------------------------------------------------------------------------
# pseudovalues and candidate filtering
# ---------------------------------------------------------------------------


def assign_pseudovalue(
    individual: Individual,
    parents: Sequence[Individual],
    population: Sequence[Individual],
    scheme: PseudoScheme,
    objective: int,
) -> float:
    """Provisional value for ``objective`` of an individual not yet evaluated on it.

    Fitness inheritance averages the parents' values (true or pseudo);
    population mean averages every true value known in ``population``.
    """
    scheme = PseudoScheme(scheme)
    if scheme is PseudoScheme.FITNESS_INHERITANCE:
        vals = [p.slots[objective].value for p in parents if p.has_value(objective)]
    else:
        vals = [p.slots[objective].value for p in population if p.is_true(objective)]
    if not vals:
        raise NoInformation(f"no usable value to derive a pseudovalue for individual {individual.id}")
    if len(vals) <= 2:
        return (vals[0] + vals[-1]) / 2
    return float(np.mean(vals))


def candidate_filter(offspring: Individual, parents: Sequence[Individual], objective: int) -> bool:
    """True if the offspring is strictly better than at least one parent on ``objective``."""
    f = offspring.true_value(objective)
    if not parents:
        return False
    return any(f < p.true_value(objective) for p in parents)


# ---------------------------------------------------------------------------
# run context
# ---------------------------------------------------------------------------


class RunContext:
    """Everything one strategy run mutates: simulator, RNG, individuals, archive."""

    def __init__(self, problem, sim_config: SimConfig, cfg: StrategyConfig):
        self.problem = problem
        self.sim_config = sim_config
        self.cfg = cfg
        self.sim = EvaluationSimulator(problem, sim_config)
        self.rng = np.random.default_rng(cfg.rng_seed)
        self.m = problem.n_objectives
        self.slow = problem.slow_index
        self.fast = problem.fast_index
        self.k_slow = problem.latency_profile[self.slow]
        self.k_fast = problem.latency_profile[self.fast]
        self.lam = cfg.population_size
        if self.lam > sim_config.batch_capacity:
            raise ValueError("population_size exceeds the simulator's batch capacity")
        self.op = Variation.for_problem(problem, crossover_prob=cfg.crossover_prob)
        self.individuals: dict[int, Individual] = {}
        self.archive = ParetoArchive()
        self.trace: list[dict] = []
        self._next_id = 0

    # -- individuals ------------------------------------------------------

    def spawn(self, genomes, parents: Sequence[Sequence[int]] | None = None) -> list[Individual]:
        out = []
        for r, g in enumerate(np.asarray(genomes)):
            par = tuple(parents[r]) if parents is not None else ()
            ind = Individual.new(self._next_id, g.copy(), self.m, self.sim.now, par)
            self.individuals[ind.id] = ind
            self._next_id += 1
            out.append(ind)
        return out

    def spawn_random(self, count: int) -> list[Individual]:
        return self.spawn(self.problem.random_genomes(count, self.rng))

    def parents_of(self, ind: Individual) -> list[Individual]:
        return [self.individuals[p] for p in ind.parents]

    def breed(self, parent_pool: Sequence[Individual], picks: np.ndarray) -> list[Individual]:
        """Offspring of ``parent_pool[picks]`` taken in consecutive pairs."""
        picks = np.asarray(picks)
        genomes = np.vstack([parent_pool[i].genome for i in picks])
        children = vary(genomes, self.rng, self.op)
        parents = []
        for i in range(len(picks)):
            mate = i + 1 if i % 2 == 0 else i - 1
            pair = [parent_pool[picks[i]].id]
            if mate < len(picks) and parent_pool[picks[mate]].id != pair[0]:
                pair.append(parent_pool[picks[mate]].id)
            parents.append(pair)
        return self.spawn(children, parents)

    def breed_uniform(self, pool: Sequence[Individual], count: int) -> list[Individual]:
        return self.breed(pool, self.rng.integers(0, len(pool), size=count))

    def breed_mo(self, pool: Sequence[Individual], count: int, allow_pseudo: bool = False) -> list[Individual]:
        F = objective_matrix(pool, allow_pseudo=allow_pseudo)
        rank, crowd = rank_and_crowding(F)
        return self.breed(pool, tournament(rank, crowd, count, self.rng))

    def breed_so(self, pool: Sequence[Individual], objective: int, count: int) -> list[Individual]:
        vals = np.array([p.true_value(objective) for p in pool])
        return self.breed(pool, tournament_scalar(vals, count, self.rng))

    # -- simulator --------------------------------------------------------

    def submit(self, objective: int, inds: Sequence[Individual]) -> int:
        return self.sim.submit(objective, inds)

    def advance(self):
        done = self.sim.advance()
        for job in done:
            for sid in job.solution_ids:
                ind = self.individuals[sid]
                if ind.is_complete():
                    self.archive.insert(ind)
        return done

    def advance_until_idle(self, objective: int | None = None) -> None:
        """Advance until nothing (or nothing on ``objective``) is in flight."""
        if objective is None:
            while self.sim.ledger.jobs_in_flight:
                self.advance()
        else:
            while self.sim.busy(objective):
                self.advance()

    def note(self, **kw) -> None:
        self.trace.append({"t": self.sim.now, "fe": self.sim.fe, **kw})

    # -- result -----------------------------------------------------------

    def record(self) -> RunRecord:
        self.advance_until_idle()
        members = sorted(self.archive.members, key=lambda i: tuple(i.objectives()))
        front = [[float(v) for v in ind.objectives()] for ind in members]
        return RunRecord(
            config={
                "strategy": self.cfg.to_dict(),
                "sim": self.sim_config.to_dict(),
                "problem": self.problem.descriptor,
            },
            seed=int(self.cfg.rng_seed),
            events=self.sim.event_log(),
            front=front,
            fe=self.sim.fe,
            trace=self.trace,
            front_individuals=members,
            individuals=self.individuals,
        )


def require_biobjective(problem) -> None:
    if problem.n_objectives != 2:
        raise ValueError("interleaving strategies handle exactly one slow and one fast objective")


__all__ = [
    "BatchSelection",
    "BudgetTooSmall",
    "IncompleteVector",
    "NoInformation",
    "PseudoScheme",
    "RunContext",
    "RunRecord",
    "Sampling",
    "StrategyConfig",
    "StrategyKind",
    "assign_pseudovalue",
    "candidate_filter",
]
