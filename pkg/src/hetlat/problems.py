"""Benchmark problems with per-objective latency tags.

All objectives are minimized.  A problem is an immutable bundle of
per-objective evaluators plus a :class:`~hetlat.sim_clock.LatencyProfile`;
the latency profile only affects the simulator, never the values.

Descriptors are JSON-able dicts of the form::

    {"kind": "mnk" | "corr_toy", "params": {...}, "seed": int, "latencies": [int, ...]}

and :func:`problem_from_descriptor` rebuilds a bit-identical instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .sim_clock import LatencyProfile


class DomainMismatch(ValueError):
    pass


class InvalidEpistasis(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NKLandscape:
    """One NK landscape: per-locus neighbourhoods and contribution tables."""

    loci: np.ndarray  # (N, K+1) int64, column 0 is the locus itself
    tables: np.ndarray  # (N, 2**(K+1)) float64 in [0, 1)

    @property
    def n(self) -> int:
        return self.loci.shape[0]

    @property
    def k(self) -> int:
        return self.loci.shape[1] - 1

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.uint8)
        return kernels.nk_evaluate(X, self.loci, self.tables)

    def lookup_indices(self, x: np.ndarray) -> np.ndarray:
        """Table index used at each locus for bit string ``x``."""
        weights = 1 << np.arange(self.k, -1, -1)
        return np.asarray(x, dtype=np.int64)[self.loci] @ weights


def random_nk(n: int, k: int, rng: np.random.Generator) -> NKLandscape:
    """Standard NK landscape with random (not adjacent) neighbourhoods."""
    if n < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= k <= n - 1:
        raise InvalidEpistasis(f"K={k} must satisfy 0 <= K <= N-1 (N={n})")
    loci = np.empty((n, k + 1), dtype=np.int64)
    for j in range(n):
        others = np.delete(np.arange(n), j)
        loci[j, 0] = j
        loci[j, 1:] = rng.choice(others, size=k, replace=False)
    tables = rng.random((n, 2 ** (k + 1)))
    return NKLandscape(loci, tables)


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    kind: str
    n_var: int
    binary: bool
    evaluators: tuple[Callable[[np.ndarray], np.ndarray], ...]
    latency_profile: LatencyProfile
    params: dict = field(default_factory=dict)
    seed: int = 0
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    @property
    def n_objectives(self) -> int:
        return len(self.evaluators)

    @property
    def slow_index(self) -> int:
        return self.latency_profile.slow_index

    @property
    def fast_index(self) -> int:
        return self.latency_profile.fast_index

    @property
    def descriptor(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "seed": int(self.seed),
            "latencies": list(self.latency_profile.latencies),
        }

    def with_latencies(self, latencies: Sequence[int]) -> "ProblemInstance":
        profile = LatencyProfile(tuple(latencies))
        if len(profile) != self.n_objectives:
            raise ValueError("latency count must match objective count")
        return replace(self, latency_profile=profile)

    def check_genome(self, genome) -> np.ndarray:
        g = np.asarray(genome)
        if g.ndim != 1 or g.shape[0] != self.n_var:
            raise DomainMismatch(f"expected a genome of length {self.n_var}, got shape {g.shape}")
        if self.binary:
            if not np.all((g == 0) | (g == 1)):
                raise DomainMismatch("binary genome contains values other than 0/1")
            return g.astype(np.uint8)
        g = g.astype(np.float64)
        if np.any(g < self.lower) or np.any(g > self.upper):
            raise DomainMismatch("continuous genome outside bounds")
        return g

    def evaluate_many(self, genomes, objective_index: int) -> np.ndarray:
        if not 0 <= objective_index < self.n_objectives:
            raise IndexError(f"objective index {objective_index} out of range")
        X = np.stack([self.check_genome(g) for g in genomes]) if len(genomes) else None
        if X is None:
            return np.empty(0)
        return np.asarray(self.evaluators[objective_index](X), dtype=np.float64)

    def random_genomes(self, count: int, rng: np.random.Generator) -> np.ndarray:
        if self.binary:
            return rng.integers(0, 2, size=(count, self.n_var), dtype=np.uint8)
        return self.lower + rng.random((count, self.n_var)) * (self.upper - self.lower)

    def as_real(self, genomes) -> np.ndarray:
        """Embed genomes as float vectors (0/1 for bit strings)."""
        return np.asarray(genomes, dtype=np.float64).reshape(-1, self.n_var)


def evaluate(problem: ProblemInstance, genome, objective_index: int) -> float:
    """Value of one objective for one genome."""
    return float(problem.evaluate_many([genome], objective_index)[0])


def _default_latencies(m: int) -> tuple[int, ...]:
    return (1,) * m


def make_mnk(
    m: int, n: int, k: int, seed: int, latencies: Sequence[int] | None = None
) -> ProblemInstance:
    """``m`` independent NK landscapes on bit strings of length ``n``."""
    if m < 1:
        raise ValueError("M must be >= 1")
    if n < 1:
        raise ValueError("N must be >= 1")
    if not 0 <= k <= n - 1:
        raise InvalidEpistasis(f"K={k} must satisfy 0 <= K <= N-1 (N={n})")
    rng = np.random.default_rng(seed)
    landscapes = tuple(random_nk(n, k, rng) for _ in range(m))
    lat = tuple(latencies) if latencies is not None else _default_latencies(m)
    return ProblemInstance(
        kind="mnk",
        n_var=n,
        binary=True,
        evaluators=landscapes,
        latency_profile=LatencyProfile(lat),
        params={"m": m, "n": n, "k": k},
        seed=seed,
    )


@dataclass(frozen=True, eq=False)
class _QuadraticPair:
    a: np.ndarray
    b: np.ndarray
    rho: float
    which: int

    def __call__(self, X):
        f1 = np.mean((X - self.a) ** 2, axis=1)
        if self.which == 0:
            return f1
        g = np.mean((X - self.b) ** 2, axis=1)
        return self.rho * f1 + (1.0 - abs(self.rho)) * g


def make_correlated_pair(
    rho: float,
    n: int,
    seed: int,
    latencies: Sequence[int] | None = None,
    binary: bool = False,
    k: int = 2,
) -> ProblemInstance:
    """Bi-objective toy problem whose inter-objective correlation follows ``rho``.

    Continuous form on ``[0, 1]^n``::

        f1(x) = mean((x - a)**2)
        f2(x) = rho * f1(x) + (1 - |rho|) * mean((x - b)**2)

    For ``rho >= 0`` the Pareto set is the part of segment ``a -> b`` with
    ``t in [0, 1 - rho]``.

    The binary form couples two NK landscapes of size ``n`` and epistasis
    ``k``: each locus table of the second landscape is copied from the first
    with probability ``(1 + rho) / 2`` and drawn fresh otherwise.
    """
    if not -1.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    lat = LatencyProfile(tuple(latencies) if latencies is not None else (1, 1))
    if len(lat) != 2:
        raise ValueError("the correlated pair has exactly two objectives")
    params = {"rho": float(rho), "n": int(n), "binary": bool(binary)}
    if binary:
        first = random_nk(n, k, rng)
        fresh = random_nk(n, k, rng)
        share = rng.random(n) < (1.0 + rho) / 2.0
        tables = np.where(share[:, None], first.tables, fresh.tables)
        # shared tables must also share the neighbourhood to be the same function
        loci = np.where(share[:, None], first.loci, fresh.loci)
        second = NKLandscape(loci, tables)
        params["k"] = int(k)
        return ProblemInstance(
            kind="corr_toy",
            n_var=n,
            binary=True,
            evaluators=(first, second),
            latency_profile=lat,
            params=params,
            seed=seed,
        )
    a = rng.random(n)
    b = rng.random(n)
    return ProblemInstance(
        kind="corr_toy",
        n_var=n,
        binary=False,
        evaluators=(_QuadraticPair(a, b, rho, 0), _QuadraticPair(a, b, rho, 1)),
        latency_profile=lat,
        params=params,
        seed=seed,
        lower=np.zeros(n),
        upper=np.ones(n),
    )


def reference_front(problem: ProblemInstance, points: int = 200) -> np.ndarray | None:
    """Sampled true Pareto front where it is known analytically, else ``None``."""
    if problem.kind != "corr_toy" or problem.binary:
        return None
    rho = problem.params["rho"]
    if rho < 0:
        return None
    pair = problem.evaluators[1]
    t = np.linspace(0.0, 1.0 - rho, points) if rho < 1 else np.zeros(1)
    X = pair.a[None, :] + t[:, None] * (pair.b - pair.a)[None, :]
    F = np.column_stack([ev(X) for ev in problem.evaluators])
    return F


PROBLEM_KINDS = ("mnk", "corr_toy")


def problem_from_descriptor(desc: dict) -> ProblemInstance:
    """Build a problem from its JSON descriptor."""
    kind = desc.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")
    if "latencies" not in desc:
        raise KeyError("latencies")
    params = dict(desc.get("params", {}))
    seed = int(desc.get("seed", 0))
    latencies = [int(v) for v in desc["latencies"]]
    if kind == "mnk":
        return make_mnk(int(params["m"]), int(params["n"]), int(params["k"]), seed, latencies)
    return make_correlated_pair(
        float(params["rho"]),
        int(params["n"]),
        seed,
        latencies,
        binary=bool(params.get("binary", False)),
        k=int(params.get("k", 2)),
    )
