"""How far apart per-objective latencies drift as the objective count grows.

For every objective count ``m`` and Beta(alpha, beta) latency distribution,
draw ``m`` latencies many times and record the smallest and largest pairwise
difference.  Results are summarized by mean and standard error
(sample standard deviation / sqrt(realizations)).

By default the draws are nested: realization ``r`` of a distribution samples
one latency vector of the largest requested length and the cell for ``m``
uses its first ``m`` entries, i.e. objectives are added to an existing
problem.  ``nested=False`` draws every cell independently instead.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

CSV_COLUMNS = ("m", "alpha", "beta", "mean_min", "se_min", "mean_max", "se_max")
NA = "NA"


class InvalidShape(ValueError):
    pass


class TooFewObjectives(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    objective_counts: tuple[int, ...] = tuple(range(1, 26))
    distributions: tuple[tuple[float, float], ...] = ((2.0, 8.0), (8.0, 2.0), (5.0, 5.0))
    realizations: int = 100
    rng_seed: int = 20200601
    nested: bool = True

    def __post_init__(self):
        object.__setattr__(self, "objective_counts", tuple(int(m) for m in self.objective_counts))
        object.__setattr__(
            self, "distributions", tuple((float(a), float(b)) for a, b in self.distributions)
        )
        if self.realizations < 2:
            raise ValueError("realizations must be >= 2 for a standard error")
        if any(m < 1 for m in self.objective_counts):
            raise ValueError("objective counts must be >= 1")
        for a, b in self.distributions:
            if not (a > 0 and b > 0):
                raise InvalidShape(f"Beta shape parameters must be positive, got ({a}, {b})")


@dataclass(frozen=True)
class Cell:
    m: int
    alpha: float
    beta: float
    mean_min: float
    se_min: float
    mean_max: float
    se_max: float


@dataclass
class StudyResult:
    config: StudyConfig
    cells: list[Cell] = field(default_factory=list)

    def cell(self, m: int, alpha: float, beta: float) -> Cell:
        for c in self.cells:
            if c.m == m and c.alpha == alpha and c.beta == beta:
                return c
        raise KeyError((m, alpha, beta))

    def series(self, alpha: float, beta: float) -> list[Cell]:
        return sorted((c for c in self.cells if (c.alpha, c.beta) == (alpha, beta)), key=lambda c: c.m)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for c in sorted(self.cells, key=lambda c: (c.alpha, c.beta, c.m)):
            vals = [c.mean_min, c.se_min, c.mean_max, c.se_max]
            w.writerow([c.m, _num(c.alpha), _num(c.beta)] + [NA if math.isnan(v) else repr(v) for v in vals])
        return buf.getvalue()


def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def read_study_csv(text: str) -> list[Cell]:
    rows = csv.DictReader(io.StringIO(text))
    out = []
    for r in rows:
        f = lambda k: float("nan") if r[k] == NA else float(r[k])  # noqa: E731
        out.append(Cell(int(r["m"]), float(r["alpha"]), float(r["beta"]),
                        f("mean_min"), f("se_min"), f("mean_max"), f("se_max")))
    return out


def sample_latencies(m: int, alpha: float, beta: float, rng: np.random.Generator) -> np.ndarray:
    """``m`` independent Beta(alpha, beta) latencies on [0, 1]."""
    if m < 1:
        raise ValueError("m must be >= 1")
    if not (alpha > 0 and beta > 0):
        raise InvalidShape(f"Beta shape parameters must be positive, got ({alpha}, {beta})")
    return rng.beta(alpha, beta, size=m)


def pairwise_extremes(latencies: Sequence[float]) -> tuple[float, float]:
    """(smallest, largest) absolute difference over all latency pairs."""
    k = np.sort(np.asarray(latencies, dtype=np.float64))
    if k.size < 2:
        raise TooFewObjectives("pairwise differences need at least two objectives")
    return float(np.diff(k).min()), float(k[-1] - k[0])


def _extremes_rows(L: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    S = np.sort(L, axis=1)
    return np.diff(S, axis=1).min(axis=1), S[:, -1] - S[:, 0]


def _cell_rng(seed: int, dist_index: int, m: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(dist_index, m)))


def _draws(config: StudyConfig, dist_index: int, m: int) -> np.ndarray:
    alpha, beta = config.distributions[dist_index]
    if config.nested:
        width = max(config.objective_counts)
        rng = np.random.default_rng(np.random.SeedSequence(config.rng_seed, spawn_key=(dist_index,)))
        L = np.vstack([sample_latencies(width, alpha, beta, rng) for _ in range(config.realizations)])
        return L[:, :m]
    rng = _cell_rng(config.rng_seed, dist_index, m)
    return np.vstack([sample_latencies(m, alpha, beta, rng) for _ in range(config.realizations)])


def run_cell(config: StudyConfig, dist_index: int, m: int) -> Cell:
    """Summary of one (objective count, distribution) cell; NaN markers for m < 2."""
    alpha, beta = config.distributions[dist_index]
    R = config.realizations
    if m < 2:
        nan = float("nan")
        return Cell(m, alpha, beta, nan, nan, nan, nan)
    L = _draws(config, dist_index, m)
    mins, maxs = _extremes_rows(L)
    root = math.sqrt(R)
    return Cell(
        m, alpha, beta,
        float(mins.mean()), float(mins.std(ddof=1) / root),
        float(maxs.mean()), float(maxs.std(ddof=1) / root),
    )


def run_study(config: StudyConfig | None = None) -> StudyResult:
    config = config or StudyConfig()
    result = StudyResult(config)
    for d in range(len(config.distributions)):
        for m in config.objective_counts:
            result.cells.append(run_cell(config, d, m))
    return result
