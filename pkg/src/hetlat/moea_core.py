"""Shared multiobjective EA machinery (minimization throughout)."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class IncompleteVector(ValueError):
    """An objective needed for a comparison has no value yet."""


class LengthMismatch(ValueError):
    pass


class EmptyParentSet(ValueError):
    pass


class SlotTransitionError(RuntimeError):
    pass


class SlotState(enum.IntEnum):
    PENDING = 0
    PSEUDO = 1
    TRUE = 2


@dataclass
class Slot:
    state: SlotState = SlotState.PENDING
    value: float = float("nan")
    in_flight: bool = False
    revealed_at: int | None = None


@dataclass
class Individual:
    """A genome plus one value slot per objective.

    Slots move Pending -> Pseudo -> True or Pending -> True.  A Pseudo value
    may be refreshed while it is still Pseudo; a True value is final.
    """

    id: int
    genome: np.ndarray
    slots: list[Slot]
    birth_time: int = 0
    parents: tuple[int, ...] = ()

    @classmethod
    def new(cls, id, genome, n_objectives, birth_time=0, parents=()):
        return cls(id, np.asarray(genome), [Slot() for _ in range(n_objectives)], birth_time, tuple(parents))

    def state(self, i: int) -> SlotState:
        return self.slots[i].state

    def is_true(self, i: int) -> bool:
        return self.slots[i].state is SlotState.TRUE

    def has_value(self, i: int) -> bool:
        return self.slots[i].state is not SlotState.PENDING

    def value(self, i: int, allow_pseudo: bool = True) -> float:
        s = self.slots[i]
        if s.state is SlotState.PENDING or (s.state is SlotState.PSEUDO and not allow_pseudo):
            raise IncompleteVector(f"individual {self.id} has no usable value for objective {i}")
        return s.value

    def true_value(self, i: int) -> float:
        return self.value(i, allow_pseudo=False)

    def set_pseudo(self, i: int, value: float) -> None:
        s = self.slots[i]
        if s.state is SlotState.TRUE:
            raise SlotTransitionError(f"individual {self.id}: objective {i} is already true")
        s.state = SlotState.PSEUDO
        s.value = float(value)

    def mark_submitted(self, i: int) -> None:
        s = self.slots[i]
        if s.state is SlotState.TRUE:
            raise SlotTransitionError(f"individual {self.id}: objective {i} already evaluated")
        s.in_flight = True

    def reveal(self, i: int, value: float, time: int) -> None:
        s = self.slots[i]
        if s.state is SlotState.TRUE:
            raise SlotTransitionError(f"individual {self.id}: objective {i} revealed twice")
        s.state = SlotState.TRUE
        s.value = float(value)
        s.in_flight = False
        s.revealed_at = time

    def is_complete(self) -> bool:
        return all(s.state is SlotState.TRUE for s in self.slots)

    def objectives(self, allow_pseudo: bool = False) -> np.ndarray:
        if self.is_complete():
            return np.array([s.value for s in self.slots])
        return np.array([self.value(i, allow_pseudo) for i in range(len(self.slots))])


def objective_matrix(individuals: Sequence[Individual], allow_pseudo: bool = False) -> np.ndarray:
    m = len(individuals[0].slots) if individuals else 0
    usable = (SlotState.TRUE, SlotState.PSEUDO) if allow_pseudo else (SlotState.TRUE,)
    rows = []
    for ind in individuals:
        if any(s.state not in usable for s in ind.slots):
            ind.objectives(allow_pseudo)  # raises with the offending objective
        rows.append([s.value for s in ind.slots])
    return np.array(rows, dtype=np.float64).reshape(len(individuals), m)


# ---------------------------------------------------------------------------
# dominance and sorting
# ---------------------------------------------------------------------------


def _as_vector(v) -> np.ndarray:
    if isinstance(v, np.ndarray) and v.dtype == np.float64:
        if np.isnan(v).any():
            raise IncompleteVector("vector has a pending component")
        return v
    if any(x is None for x in np.atleast_1d(np.asarray(v, dtype=object))):
        raise IncompleteVector("vector has a pending component")
    arr = np.asarray(v, dtype=np.float64)
    if np.isnan(arr).any():
        raise IncompleteVector("vector has a pending component")
    return arr


def dominates(a, b) -> bool:
    """Pareto dominance for minimization."""
    a = _as_vector(a)
    b = _as_vector(b)
    if a.shape != b.shape:
        raise LengthMismatch(f"cannot compare vectors of length {a.shape} and {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def nondominated_rank(F) -> np.ndarray:
    """Front index of each row (0 = nondominated)."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    if F.ndim != 2:
        raise ValueError("expected a 2-D objective matrix")
    if np.isnan(F).any():
        raise IncompleteVector("objective matrix contains pending values")
    return kernels.nd_rank(F)


def nondominated_sort(F) -> list[list[int]]:
    """Partition row indices of ``F`` into successive nondominated fronts."""
    rank = nondominated_rank(F)
    if rank.size == 0:
        return []
    fronts: list[list[int]] = [[] for _ in range(int(rank.max()) + 1)]
    for i, r in enumerate(rank):
        fronts[r].append(i)
    return fronts


def nondominated_mask(F) -> np.ndarray:
    return nondominated_rank(F) == 0


def crowding_distance(F) -> np.ndarray:
    """NSGA-II crowding distance within one front; boundary points get inf."""
    F = np.asarray(F, dtype=np.float64)
    n, m = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    d = np.zeros(n)
    for k in range(m):
        order = np.argsort(F[:, k], kind="mergesort")
        col = F[order, k]
        span = col[-1] - col[0]
        d[order[0]] = d[order[-1]] = np.inf
        if span > 0:
            d[order[1:-1]] += (col[2:] - col[:-2]) / span
    return d


def rank_and_crowding(F) -> tuple[np.ndarray, np.ndarray]:
    """Front index and within-front crowding distance of every row."""
    F = np.asarray(F, dtype=np.float64)
    rank = nondominated_rank(F)
    n = len(rank)
    crowd = np.zeros(n)
    if n == 0:
        return rank, crowd
    pos = np.arange(n)
    for k in range(F.shape[1]):
        # fronts become contiguous runs, each sorted stably on objective k
        order = np.lexsort((F[:, k], rank))
        col = F[order, k]
        r = rank[order]
        first = np.ones(n, dtype=bool)
        last = np.ones(n, dtype=bool)
        np.not_equal(r[1:], r[:-1], out=first[1:])
        last[:-1] = first[1:]
        start = np.maximum.accumulate(np.where(first, pos, 0))
        ends = np.flatnonzero(last)
        end = ends[np.searchsorted(ends, pos)]
        span = col[end] - col[start]
        inner = np.flatnonzero(~first & ~last & (span > 0))
        crowd[order[inner]] += (col[inner + 1] - col[inner - 1]) / span[inner]
        crowd[order[first | last]] = np.inf
    return rank, crowd


def truncate(F, keep: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Indices of the ``keep`` best rows by (rank, -crowding), NSGA-II style."""
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    if keep >= n:
        return np.arange(n)
    rank, crowd = rank_and_crowding(F)
    tie = rng.random(n) if rng is not None else np.zeros(n)
    order = np.lexsort((tie, -crowd, rank))
    return np.sort(order[:keep])


def tournament(
    rank: np.ndarray, crowd: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Binary tournaments on (rank, crowding); remaining ties go to a coin flip."""
    n = len(rank)
    a = rng.integers(0, n, size=count)
    b = rng.integers(0, n, size=count)
    coin = rng.random(count) < 0.5
    better_a = (rank[a] < rank[b]) | ((rank[a] == rank[b]) & (crowd[a] > crowd[b]))
    better_b = (rank[b] < rank[a]) | ((rank[a] == rank[b]) & (crowd[b] > crowd[a]))
    return np.where(better_a, a, np.where(better_b, b, np.where(coin, a, b)))


def tournament_scalar(values: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    """Binary tournaments on a single minimized value."""
    n = len(values)
    a = rng.integers(0, n, size=count)
    b = rng.integers(0, n, size=count)
    coin = rng.random(count) < 0.5
    return np.where(values[a] < values[b], a, np.where(values[b] < values[a], b, np.where(coin, a, b)))


# ---------------------------------------------------------------------------
# variation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Variation:
    """Operator settings.

    Continuous genomes use simulated binary crossover and polynomial
    mutation clipped to ``[lower, upper]``; bit strings use uniform crossover
    and independent bit flips.  ``mutation_rate=None`` means ``1/n``.
    """

    binary: bool
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    crossover_prob: float = 0.9
    mutation_rate: float | None = None
    eta_c: float = 15.0
    eta_m: float = 20.0

    @classmethod
    def for_problem(cls, problem, **kw) -> "Variation":
        return cls(binary=problem.binary, lower=problem.lower, upper=problem.upper, **kw)


def _sbx(p1, p2, lo, hi, eta, rng):
    n = p1.shape[0]
    c1 = p1.copy()
    c2 = p2.copy()
    swap = rng.random(n) < 0.5
    u = rng.random(n)
    for j in range(n):
        if not swap[j] or abs(p1[j] - p2[j]) < 1e-14:
            continue
        y1, y2 = min(p1[j], p2[j]), max(p1[j], p2[j])
        span = y2 - y1
        beta = 1.0 + 2.0 * (y1 - lo[j]) / span
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u[j] * alpha) ** (1.0 / (eta + 1.0)) if u[j] <= 1.0 / alpha else (1.0 / (2.0 - u[j] * alpha)) ** (1.0 / (eta + 1.0))
        v1 = 0.5 * ((y1 + y2) - bq * span)
        beta = 1.0 + 2.0 * (hi[j] - y2) / span
        alpha = 2.0 - beta ** -(eta + 1.0)
        bq = (u[j] * alpha) ** (1.0 / (eta + 1.0)) if u[j] <= 1.0 / alpha else (1.0 / (2.0 - u[j] * alpha)) ** (1.0 / (eta + 1.0))
        v2 = 0.5 * ((y1 + y2) + bq * span)
        v1, v2 = min(max(v1, lo[j]), hi[j]), min(max(v2, lo[j]), hi[j])
        if rng.random() < 0.5:
            v1, v2 = v2, v1
        c1[j], c2[j] = v1, v2
    return c1, c2


def _polynomial_mutation(X, lo, hi, eta, rate, rng):
    """Mutate each row of ``X``; a row draws its ``u`` vector only if some gene is hit."""
    n_rows, n = X.shape
    mask = np.zeros(X.shape, dtype=bool)
    u = np.zeros(X.shape)
    for i in range(n_rows):
        mask[i] = rng.random(n) < rate
        if mask[i].any():
            u[i] = rng.random(n)
    hit = mask.any(axis=1)
    if not hit.any():
        return X
    y = X.copy()
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    d1 = (X - lo) / safe
    d2 = (hi - X) / safe
    mpow = 1.0 / (eta + 1.0)
    lower_half = u < 0.5
    xy1 = 1.0 - d1
    val1 = 2.0 * u + (1.0 - 2.0 * u) * xy1 ** (eta + 1.0)
    dq1 = np.abs(val1) ** mpow - 1.0
    xy2 = 1.0 - d2
    val2 = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * xy2 ** (eta + 1.0)
    dq2 = 1.0 - np.abs(val2) ** mpow
    dq = np.where(lower_half, dq1, dq2)
    step = dq * span
    y[mask] = X[mask] + step[mask]
    y[hit] = np.clip(y[hit], lo, hi)
    return y


def vary(parents, rng: np.random.Generator, op: Variation) -> np.ndarray:
    """Offspring genomes from consecutive parent pairs (one child per parent row).

    An odd trailing parent is only mutated.
    """
    P = np.asarray(parents)
    if P.ndim != 2 or P.shape[0] == 0:
        raise EmptyParentSet("vary needs at least one parent")
    n_par, n = P.shape
    rate = op.mutation_rate if op.mutation_rate is not None else 1.0 / n
    out = P.copy()
    for i in range(0, n_par - 1, 2):
        if rng.random() >= op.crossover_prob:
            continue
        if op.binary:
            mask = rng.random(n) < 0.5
            out[i] = np.where(mask, P[i], P[i + 1])
            out[i + 1] = np.where(mask, P[i + 1], P[i])
        else:
            out[i], out[i + 1] = _sbx(P[i].astype(float), P[i + 1].astype(float), op.lower, op.upper, op.eta_c, rng)
    if op.binary:
        flips = rng.random(out.shape) < rate
        return np.where(flips, 1 - out, out).astype(P.dtype)
    return _polynomial_mutation(out, op.lower, op.upper, op.eta_m, rate, rng)


# ---------------------------------------------------------------------------
# archive
# ---------------------------------------------------------------------------


@dataclass
class ParetoArchive:
    """Mutually nondominated set of fully evaluated individuals."""

    capacity: int | None = None
    members: list[Individual] = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def objectives(self) -> np.ndarray:
        if not self.members:
            return np.empty((0, 0))
        return objective_matrix(self.members)

    def insert(self, ind: Individual) -> bool:
        """Add ``ind`` unless a member dominates it; drop members it dominates."""
        if not ind.is_complete():
            raise IncompleteVector(f"individual {ind.id} is not fully evaluated")
        f = ind.objectives()
        if self.members:
            G = objective_matrix(self.members)
            rejected = np.all(G <= f, axis=1) & np.any(G < f, axis=1)
            if rejected.any() or any(mem.id == ind.id for mem in self.members):
                return False
            beaten = np.all(f <= G, axis=1) & np.any(f < G, axis=1)
            self.members = [mem for mem, b in zip(self.members, beaten) if not b]
        self.members.append(ind)
        if self.capacity is not None and len(self.members) > self.capacity:
            F = self.objectives()
            d = crowding_distance(F)
            order = np.lexsort((np.arange(len(d)), -d))
            kept = sorted(order[: self.capacity])
            self.members = [self.members[i] for i in kept]
        return True

    def extend(self, inds: Iterable[Individual]) -> int:
        return sum(self.insert(i) for i in inds)


def archive_insert(archive: ParetoArchive, ind: Individual) -> tuple[ParetoArchive, bool]:
    accepted = archive.insert(ind)
    return archive, accepted


# ---------------------------------------------------------------------------
# engines
# ---------------------------------------------------------------------------


class Engine(str, enum.Enum):
    GENERATIONAL = "generational"
    STEADY_STATE = "steady_state"


def survive(F_pop, F_off, mu: int, engine: Engine, rng: np.random.Generator) -> np.ndarray:
    """Indices into ``vstack(F_pop, F_off)`` of the next population of size ``mu``.

    Generational: NSGA-II (mu + lambda) truncation over the merged pool.
    Steady state: offspring enter one at a time, each insertion followed by
    removal of the worst member (last front, least crowded).
    """
    F_pop = np.asarray(F_pop, dtype=np.float64)
    F_off = np.asarray(F_off, dtype=np.float64)
    pool = np.vstack([F_pop, F_off]) if len(F_pop) else F_off
    if Engine(engine) is Engine.GENERATIONAL:
        return truncate(pool, mu, rng)
    current = list(range(len(F_pop)))
    for j in range(len(F_off)):
        current.append(len(F_pop) + j)
        if len(current) > mu:
            sub = pool[current]
            rank, crowd = rank_and_crowding(sub)
            worst_rank = rank.max()
            cand = np.flatnonzero(rank == worst_rank)
            cmin = crowd[cand].min()
            cand = cand[crowd[cand] == cmin]
            drop = cand[rng.integers(len(cand))] if len(cand) > 1 else cand[0]
            current.pop(int(drop))
    return np.array(sorted(current), dtype=np.int64)
