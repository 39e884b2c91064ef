"""Cheap predictive models for the surrogate-assisted interleaving strategy.

The model is a Gaussian-kernel RBF interpolant.  Its uncertainty is a
distance proxy: distance to the nearest training input divided by the
kernel bandwidth, so it is exactly zero on the data and grows away from it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, lstsq
from scipy.spatial.distance import cdist, pdist

from .moea_core import nondominated_rank

RIDGE = 1e-8
INTERPOLATION_TOL = 1e-9


class DegenerateSet(ValueError):
    """Training data has fewer than two distinct inputs."""


class DimensionMismatch(ValueError):
    pass


class TooFewCandidates(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurrogateModel:
    X: np.ndarray
    y: np.ndarray
    bandwidth: float
    weights: np.ndarray
    offset: float

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    def predict_many(self, Q) -> tuple[np.ndarray, np.ndarray]:
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects {self.dim} inputs, got {Q.shape[1]}")
        D = cdist(Q, self.X)
        mean = self.offset + _kernel(D, self.bandwidth) @ self.weights
        unc = D.min(axis=1) / self.bandwidth
        return mean, unc

    def predict(self, x) -> tuple[float, float]:
        mean, unc = self.predict_many(np.asarray(x, dtype=np.float64)[None, :])
        return float(mean[0]), float(unc[0])


def _kernel(D, h):
    return np.exp(-0.5 * (D / h) ** 2)


def _dedupe(X, y):
    uniq, inv = np.unique(X, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    sums = np.zeros(len(uniq))
    np.add.at(sums, inv, y)
    counts = np.bincount(inv, minlength=len(uniq))
    return uniq, sums / counts


def _solve(K0, r):
    """Ridge-jittered Cholesky solve followed by two refinement steps."""
    K = K0.copy()
    K[np.diag_indices_from(K)] += RIDGE
    try:
        factor = cho_factor(K, check_finite=False)
    except np.linalg.LinAlgError:
        return lstsq(K0, r)[0]
    w = cho_solve(factor, r, check_finite=False)
    for _ in range(2):
        w = w + cho_solve(factor, r - K0 @ w, check_finite=False)
    return w


def fit(X, y) -> SurrogateModel:
    """Fit an RBF interpolant; duplicate inputs are merged by averaging targets.

    The bandwidth starts at the median pairwise distance.  Dense inputs make
    the Gaussian kernel matrix numerically singular at that width, so the
    bandwidth is halved (bisecting on the number of halvings) until the
    training targets are reproduced to ``INTERPOLATION_TOL``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y lengths differ")
    X, y = _dedupe(X, y)
    if X.shape[0] < 2:
        raise DegenerateSet("need at least two distinct training inputs")
    dist = pdist(X)
    h = float(np.median(dist))
    if not h > 0:
        h = float(dist.max())
    offset = float(y.mean())
    r = y - offset
    D = cdist(X, X)
    tol = INTERPOLATION_TOL * max(1.0, float(np.abs(r).max()))
    floor = float(dist[dist > 0].min()) / 64
    # halvings needed to reach the floor; the floor itself is always accepted
    top = max(int(np.ceil(np.log2(h / floor))), 0) if h > floor else 0

    def attempt(j):
        K0 = _kernel(D, h / 2**j)
        w = _solve(K0, r)
        return np.abs(K0 @ w - r).max() <= tol, w

    ok, w = attempt(0)
    if ok or top == 0:
        return SurrogateModel(X, y, h, w, offset)
    # bisect on the number of halvings: lo fails, hi is accepted
    lo, hi, w_hi = 0, top, None
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, w_mid = attempt(mid)
        if ok:
            hi, w_hi = mid, w_mid
        else:
            lo = mid
    if w_hi is None:
        _, w_hi = attempt(hi)
    return SurrogateModel(X, y, h / 2**hi, w_hi, offset)


def fit_samples(samples) -> SurrogateModel:
    """``fit`` taking a list of ``(vector, value)`` pairs."""
    xs, ys = zip(*samples) if samples else ((), ())
    if not xs:
        raise DegenerateSet("no samples")
    return fit(np.vstack([np.atleast_1d(x) for x in xs]), np.asarray(ys))


def predict(model: SurrogateModel, x) -> tuple[float, float]:
    return model.predict(x)


def lhs_sample(
    centers,
    count: int,
    box_fraction: float,
    lower,
    upper,
    rng: np.random.Generator,
) -> np.ndarray:
    """Latin hypercube designs in boxes around ``centers``.

    ``count`` points are produced per centre.  Each box spans
    ``box_fraction * (upper - lower)`` per dimension, is centred on the
    centre and clipped to the bounds.  Within a box every dimension is cut
    into ``count`` equal strata holding exactly one point each.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0 < box_fraction <= 1:
        raise ValueError("box_fraction must lie in (0, 1]")
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    half = 0.5 * box_fraction * (upper - lower)
    out = []
    for c in C:
        lo = np.maximum(c - half, lower)
        hi = np.minimum(c + half, upper)
        d = C.shape[1]
        strata = np.column_stack([rng.permutation(count) for _ in range(d)])
        u = (strata + rng.random((count, d))) / count
        out.append(lo + u * (hi - lo))
    return np.vstack(out)


def acquire(models, candidates, u: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``u`` candidates chosen for true evaluation.

    Candidates are ordered by nondominated rank under the predicted means,
    then by descending summed uncertainty, then by a random tie-break.
    """
    Q = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    n = Q.shape[0]
    if u > n:
        raise TooFewCandidates(f"asked for {u} of {n} candidates")
    means = np.empty((n, len(models)))
    unc = np.zeros(n)
    for j, m in enumerate(models):
        mu, s = m.predict_many(Q)
        means[:, j] = mu
        unc += s
    rank = nondominated_rank(means)
    tie = rng.random(n)
    order = np.lexsort((tie, -unc, rank))
    return order[:u]
