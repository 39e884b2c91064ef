"""Discrete-time batch evaluation simulator.

Time advances in integer steps and only evaluations consume time.  Every
objective accepts batches of at most ``batch_capacity`` solutions; a batch on
objective ``i`` started at ``t`` completes at exactly ``t + k_i`` and cannot
be interrupted or extended.  Objective values become readable only once the
batch holding them completes.

The module is split in two layers.  The free functions (``submit_batch``,
``advance_to_next_completion``, ``is_exhausted``) operate on a plain
:class:`BudgetLedger` and know nothing about solutions beyond their ids.
:class:`EvaluationSimulator` couples a ledger with a problem and writes the
revealed values into :class:`~hetlat.moea_core.Individual` slots.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence


class SimulationError(Exception):
    """Base class for simulator contract violations."""


class CapacityExceeded(SimulationError):
    pass


class BudgetExhausted(SimulationError):
    pass


class DuplicateInFlight(SimulationError):
    pass


class NothingInFlight(SimulationError):
    pass


class EarlyRead(SimulationError):
    """An objective value was requested before its batch completed."""


class StoppingMode(str, enum.Enum):
    TIME_STEPS = "time_steps"
    PER_OBJECTIVE_EVALUATIONS = "per_objective_evaluations"


@dataclass(frozen=True)
class SimConfig:
    total_time_steps: int
    batch_capacity: int
    stopping_mode: StoppingMode = StoppingMode.TIME_STEPS
    max_fe_per_objective: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "stopping_mode", StoppingMode(self.stopping_mode))
        if self.max_fe_per_objective is not None:
            object.__setattr__(
                self, "max_fe_per_objective", tuple(int(v) for v in self.max_fe_per_objective)
            )
        if int(self.total_time_steps) < 1:
            raise ValueError("total_time_steps must be >= 1")
        if int(self.batch_capacity) < 1:
            raise ValueError("batch_capacity must be >= 1")
        if self.stopping_mode is StoppingMode.PER_OBJECTIVE_EVALUATIONS:
            if not self.max_fe_per_objective:
                raise ValueError("max_fe_per_objective is required in per-objective mode")
            if any(v < 1 for v in self.max_fe_per_objective):
                raise ValueError("max_fe_per_objective entries must be positive")

    def validate_for(self, n_objectives: int) -> None:
        if (
            self.stopping_mode is StoppingMode.PER_OBJECTIVE_EVALUATIONS
            and len(self.max_fe_per_objective) != n_objectives
        ):
            raise ValueError(
                f"max_fe_per_objective has {len(self.max_fe_per_objective)} entries, "
                f"problem has {n_objectives} objectives"
            )

    def to_dict(self) -> dict:
        d = {
            "total_time_steps": int(self.total_time_steps),
            "batch_capacity": int(self.batch_capacity),
            "stopping_mode": self.stopping_mode.value,
        }
        if self.max_fe_per_objective is not None:
            d["max_fe_per_objective"] = list(self.max_fe_per_objective)
        return d


@dataclass(frozen=True)
class LatencyProfile:
    latencies: tuple[int, ...]

    def __post_init__(self):
        lat = tuple(int(k) for k in self.latencies)
        if not lat:
            raise ValueError("at least one objective latency is required")
        if any(k < 1 for k in lat):
            raise ValueError("latencies must be positive integers")
        object.__setattr__(self, "latencies", lat)

    def __len__(self):
        return len(self.latencies)

    def __getitem__(self, i):
        return self.latencies[i]

    @property
    def ratio(self) -> int | float:
        """``max(k) / min(k)``; an int whenever the division is exact."""
        hi, lo = max(self.latencies), min(self.latencies)
        return hi // lo if hi % lo == 0 else hi / lo

    @property
    def slow_index(self) -> int:
        # first occurrence wins, so a homogeneous profile designates objective 0
        return self.latencies.index(max(self.latencies))

    @property
    def fast_index(self) -> int:
        lo = min(self.latencies)
        slow = self.slow_index
        for i, k in enumerate(self.latencies):
            if k == lo and i != slow:
                return i
        return slow


@dataclass(frozen=True)
class BatchJob:
    job_id: int
    objective_index: int
    solution_ids: tuple[int, ...]
    start_time: int
    completion_time: int

    @property
    def size(self) -> int:
        return len(self.solution_ids)


@dataclass
class BudgetLedger:
    n_objectives: int
    now: int = 0
    fe_consumed: list[int] = field(default_factory=list)
    jobs_in_flight: dict[int, BatchJob] = field(default_factory=dict)
    events: list[tuple[int, str, int, int, int]] = field(default_factory=list)
    next_job_id: int = 0

    def __post_init__(self):
        if not self.fe_consumed:
            self.fe_consumed = [0] * self.n_objectives

    def in_flight_count(self, objective_index: int) -> int:
        return sum(j.size for j in self.jobs_in_flight.values() if j.objective_index == objective_index)

    def committed(self, objective_index: int) -> int:
        """Evaluations consumed plus those still in flight."""
        return self.fe_consumed[objective_index] + self.in_flight_count(objective_index)

    def event_log(self) -> list[dict]:
        """Events sorted by time, submissions before completions, then job id."""
        order = {"submit": 0, "complete": 1}
        rows = sorted(self.events, key=lambda e: (e[0], order[e[1]], e[2]))
        return [{"t": t, "event": ev, "job": job, "obj": obj, "n": n} for t, ev, job, obj, n in rows]

    def event_log_jsonl(self) -> str:
        return "".join(json.dumps(e, separators=(", ", ": ")) + "\n" for e in self.event_log())


def per_objective_budget(total_time_steps: int, batch_capacity: int, latency: int) -> int:
    """Number of evaluations one objective can receive: ``λ·⌊B/k⌋``."""
    if total_time_steps < 0 or batch_capacity < 1 or latency < 1:
        raise ValueError("need B >= 0, batch_capacity >= 1 and latency >= 1")
    return batch_capacity * (total_time_steps // latency)


def can_submit(
    ledger: BudgetLedger,
    config: SimConfig,
    profile: LatencyProfile,
    objective_index: int,
    n: int,
) -> bool:
    """True if a batch of ``n`` solutions on ``objective_index`` would be accepted now."""
    if n < 1 or ledger.in_flight_count(objective_index) + n > config.batch_capacity:
        return False
    return _within_budget(ledger, config, profile, objective_index, n)


def _within_budget(ledger, config, profile, objective_index, n):
    if config.stopping_mode is StoppingMode.TIME_STEPS:
        return ledger.now + profile[objective_index] <= config.total_time_steps
    return ledger.committed(objective_index) + n <= config.max_fe_per_objective[objective_index]


def submit_batch(
    ledger: BudgetLedger,
    config: SimConfig,
    profile: LatencyProfile,
    objective_index: int,
    solution_ids: Sequence[int],
) -> int:
    """Start evaluating ``solution_ids`` on one objective and return the job id.

    Raises:
        CapacityExceeded: the batch, together with anything already in flight on
            this objective, holds more than ``batch_capacity`` solutions.
        BudgetExhausted: the batch could not complete within the stopping rule.
        DuplicateInFlight: a listed solution is already in flight on this objective.
    """
    ids = tuple(int(s) for s in solution_ids)
    if not 0 <= objective_index < ledger.n_objectives:
        raise IndexError(f"objective index {objective_index} out of range")
    if not ids:
        raise ValueError("empty batch")
    if len(set(ids)) != len(ids):
        raise DuplicateInFlight("batch lists the same solution twice")
    if len(ids) > config.batch_capacity:
        raise CapacityExceeded(f"batch of {len(ids)} exceeds capacity {config.batch_capacity}")
    busy = ledger.in_flight_count(objective_index)
    if busy + len(ids) > config.batch_capacity:
        raise CapacityExceeded(
            f"{busy} solutions already in flight on objective {objective_index}; "
            f"cannot add {len(ids)} (capacity {config.batch_capacity})"
        )
    for job in ledger.jobs_in_flight.values():
        if job.objective_index == objective_index and not set(ids).isdisjoint(job.solution_ids):
            raise DuplicateInFlight(f"solution already in flight on objective {objective_index}")
    if not _within_budget(ledger, config, profile, objective_index, len(ids)):
        raise BudgetExhausted(
            f"batch on objective {objective_index} at t={ledger.now} would overrun the budget"
        )
    job = BatchJob(
        job_id=ledger.next_job_id,
        objective_index=objective_index,
        solution_ids=ids,
        start_time=ledger.now,
        completion_time=ledger.now + profile[objective_index],
    )
    ledger.next_job_id += 1
    ledger.jobs_in_flight[job.job_id] = job
    ledger.events.append((job.start_time, "submit", job.job_id, objective_index, job.size))
    return job.job_id


def advance_to_next_completion(ledger: BudgetLedger) -> list[BatchJob]:
    """Jump the clock to the earliest completion and retire every job finishing then."""
    if not ledger.jobs_in_flight:
        raise NothingInFlight("no batch is being evaluated")
    t = min(j.completion_time for j in ledger.jobs_in_flight.values())
    done = sorted(
        (j for j in ledger.jobs_in_flight.values() if j.completion_time == t),
        key=lambda j: j.job_id,
    )
    ledger.now = t
    for job in done:
        del ledger.jobs_in_flight[job.job_id]
        ledger.fe_consumed[job.objective_index] += job.size
        ledger.events.append((t, "complete", job.job_id, job.objective_index, job.size))
    return done


def is_exhausted(ledger: BudgetLedger, config: SimConfig, profile: LatencyProfile | None = None) -> bool:
    """Whether the stopping rule has been reached.

    In time-step mode this means no batch on any objective could still finish
    by ``B``.  In per-objective mode it is true as soon as any objective has
    used up its evaluation allowance.
    """
    if config.stopping_mode is StoppingMode.TIME_STEPS:
        k_min = min(profile.latencies) if profile is not None else 1
        return ledger.now + k_min > config.total_time_steps
    return any(
        used >= cap for used, cap in zip(ledger.fe_consumed, config.max_fe_per_objective)
    )


def replay_events(events: Iterable[dict], n_objectives: int) -> dict:
    """Rebuild job intervals and per-objective totals from an event log.

    Returns a dict with ``jobs`` (job id -> (obj, n, submit_t, complete_t)),
    ``fe`` (completed evaluations per objective) and ``max_in_flight``
    (peak number of solutions simultaneously in flight per objective).
    """
    jobs: dict[int, list] = {}
    fe = [0] * n_objectives
    for e in events:
        if e["event"] == "submit":
            jobs[e["job"]] = [e["obj"], e["n"], e["t"], None]
        else:
            jobs[e["job"]][3] = e["t"]
            fe[e["obj"]] += e["n"]
    peak = [0] * n_objectives
    times = sorted({rec[2] for rec in jobs.values()})
    for t in times:
        load = [0] * n_objectives
        for obj, n, ts, tc in jobs.values():
            if ts <= t and (tc is None or tc > t):
                load[obj] += n
        peak = [max(a, b) for a, b in zip(peak, load)]
    return {"jobs": {k: tuple(v) for k, v in jobs.items()}, "fe": fe, "max_in_flight": peak}


class EvaluationSimulator:
    """Ledger plus problem: evaluates solutions lazily when their batch completes.

    Objective functions are called only inside :meth:`advance`, at the moment
    the simulated batch finishes, so an optimizer driving the simulator cannot
    see a value early even by accident.
    """

    def __init__(self, problem, config: SimConfig, profile: LatencyProfile | None = None):
        self.problem = problem
        self.config = config
        self.profile = profile if profile is not None else problem.latency_profile
        config.validate_for(problem.n_objectives)
        if len(self.profile) != problem.n_objectives:
            raise ValueError("latency profile does not match the problem's objective count")
        self.ledger = BudgetLedger(problem.n_objectives)
        self._pending: dict[int, list] = {}

    @property
    def now(self) -> int:
        return self.ledger.now

    @property
    def fe(self) -> list[int]:
        return list(self.ledger.fe_consumed)

    def latency(self, objective_index: int) -> int:
        return self.profile[objective_index]

    def can_submit(self, objective_index: int, n: int) -> bool:
        return can_submit(self.ledger, self.config, self.profile, objective_index, n)

    def free_capacity(self, objective_index: int) -> int:
        return self.config.batch_capacity - self.ledger.in_flight_count(objective_index)

    def busy(self, objective_index: int) -> bool:
        return self.ledger.in_flight_count(objective_index) > 0

    def submit(self, objective_index: int, individuals: Sequence) -> int:
        job_id = submit_batch(
            self.ledger, self.config, self.profile, objective_index, [ind.id for ind in individuals]
        )
        for ind in individuals:
            ind.mark_submitted(objective_index)
        self._pending[job_id] = list(individuals)
        return job_id

    def advance(self) -> list[BatchJob]:
        done = advance_to_next_completion(self.ledger)
        for job in done:
            inds = self._pending.pop(job.job_id)
            genomes = [ind.genome for ind in inds]
            values = self.problem.evaluate_many(genomes, job.objective_index)
            for ind, v in zip(inds, values):
                ind.reveal(job.objective_index, float(v), self.ledger.now)
        return done

    def read(self, individual, objective_index: int) -> float:
        """Checked read of an evaluated value; raises :class:`EarlyRead` before completion."""
        slot = individual.slots[objective_index]
        if slot.revealed_at is None or slot.revealed_at > self.ledger.now:
            raise EarlyRead(
                f"solution {individual.id} read on objective {objective_index} at t={self.ledger.now} "
                "before its evaluation completed"
            )
        return slot.value

    def advance_until(self, predicate) -> None:
        """Advance until ``predicate()`` holds or nothing is left in flight."""
        while self.ledger.jobs_in_flight and not predicate():
            self.advance()

    def idle_until(self, t: int) -> None:
        """Let the clock run forward to ``t`` with no evaluation in progress."""
        if self.ledger.jobs_in_flight:
            raise SimulationError("cannot idle while batches are in flight")
        if t < self.ledger.now:
            raise SimulationError("time cannot run backwards")
        self.ledger.now = int(t)

    def drain(self) -> None:
        while self.ledger.jobs_in_flight:
            self.advance()

    def is_exhausted(self) -> bool:
        return is_exhausted(self.ledger, self.config, self.profile)

    def event_log(self) -> list[dict]:
        return self.ledger.event_log()
