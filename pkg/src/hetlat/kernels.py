"""Hot numeric kernels, each in a numba flavour and a pure-numpy flavour.

The public names (``nd_rank``, ``hv2d``, ``igd_distance``, ``nk_evaluate``)
are bound to one flavour at import time according to
:data:`hetlat._accel.USE_NUMBA`.  Both flavours stay importable under their
suffixed names so tests and ``benchmarks/bench_kernels.py`` can compare them.

All objective arrays follow the minimization convention.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# nondominated ranking
# ---------------------------------------------------------------------------


def _nd_rank_py(F):
    n, m = F.shape
    rank = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return rank
    if m == 2:
        # lexicographic order; a point can only be dominated by an earlier one
        order = np.argsort(F[:, 1], kind="mergesort")
        order = order[np.argsort(F[order, 0], kind="mergesort")]
        tail_x = np.empty(n)
        tail_y = np.empty(n)
        n_fronts = 0
        for idx in order:
            x = F[idx, 0]
            y = F[idx, 1]
            f = 0
            while f < n_fronts:
                tx = tail_x[f]
                ty = tail_y[f]
                if tx <= x and ty <= y and (tx < x or ty < y):
                    f += 1
                else:
                    break
            rank[idx] = f
            tail_x[f] = x
            tail_y[f] = y
            if f == n_fronts:
                n_fronts += 1
        return rank

    # general case: Deb's fast nondominated sort
    dom_count = np.zeros(n, dtype=np.int64)
    dominated = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        for j in range(i + 1, n):
            i_le = True
            j_le = True
            strict_i = False
            strict_j = False
            for k in range(m):
                a = F[i, k]
                b = F[j, k]
                if a > b:
                    i_le = False
                    strict_j = True
                elif a < b:
                    j_le = False
                    strict_i = True
            if i_le and strict_i:
                dominated[i, j] = True
                dom_count[j] += 1
            elif j_le and strict_j:
                dominated[j, i] = True
                dom_count[i] += 1
    current = np.empty(n, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    n_cur = 0
    for i in range(n):
        if dom_count[i] == 0:
            rank[i] = 0
            current[n_cur] = i
            n_cur += 1
    level = 0
    while n_cur > 0:
        n_nxt = 0
        for c in range(n_cur):
            i = current[c]
            for j in range(n):
                if dominated[i, j]:
                    dom_count[j] -= 1
                    if dom_count[j] == 0:
                        rank[j] = level + 1
                        nxt[n_nxt] = j
                        n_nxt += 1
        level += 1
        current, nxt = nxt, current
        n_cur = n_nxt
    return rank


def nd_rank_numpy(F):
    """Front index of every row of ``F`` (0 = nondominated)."""
    F = np.asarray(F, dtype=np.float64)
    n = F.shape[0]
    rank = np.full(n, -1, dtype=np.int64)
    if n == 0:
        return rank
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    remaining = np.ones(n, dtype=bool)
    level = 0
    while remaining.any():
        sub = dom[np.ix_(remaining, remaining)]
        front_mask = ~sub.any(axis=0)
        idx = np.flatnonzero(remaining)[front_mask]
        rank[idx] = level
        remaining[idx] = False
        level += 1
    return rank


nd_rank_numba = njit(_nd_rank_py)

# ---------------------------------------------------------------------------
# 2-D hypervolume sweep
# ---------------------------------------------------------------------------


def _hv2d_py(F, r0, r1):
    n = F.shape[0]
    if n == 0:
        return 0.0
    order = np.argsort(F[:, 1], kind="mergesort")
    order = order[np.argsort(F[order, 0], kind="mergesort")]
    area = 0.0
    y_min = r1
    for idx in order:
        x = F[idx, 0]
        y = F[idx, 1]
        if y < y_min:
            area += (r0 - x) * (y_min - y)
            y_min = y
    return area


def hv2d_numpy(F, r0, r1):
    """Area dominated by the rows of ``F`` (all assumed to dominate the reference)."""
    F = np.asarray(F, dtype=np.float64)
    if F.shape[0] == 0:
        return 0.0
    order = np.lexsort((F[:, 1], F[:, 0]))
    x = F[order, 0]
    y = F[order, 1]
    prev = np.minimum.accumulate(np.concatenate(([r1], y)))[:-1]
    return float(np.sum((r0 - x) * np.clip(prev - y, 0.0, None)))


hv2d_numba = njit(_hv2d_py)

# ---------------------------------------------------------------------------
# nearest-neighbour distances (IGD)
# ---------------------------------------------------------------------------


def _igd_distance_py(R, F):
    nr = R.shape[0]
    nf = F.shape[0]
    m = R.shape[1]
    out = np.empty(nr)
    for i in range(nr):
        best = np.inf
        for j in range(nf):
            s = 0.0
            for k in range(m):
                d = R[i, k] - F[j, k]
                s += d * d
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


def igd_distance_numpy(R, F):
    """Euclidean distance from each row of ``R`` to its nearest row of ``F``."""
    R = np.asarray(R, dtype=np.float64)
    F = np.asarray(F, dtype=np.float64)
    d2 = np.sum((R[:, None, :] - F[None, :, :]) ** 2, axis=2)
    return np.sqrt(d2.min(axis=1))


igd_distance_numba = njit(_igd_distance_py)

# ---------------------------------------------------------------------------
# NK landscape evaluation
# ---------------------------------------------------------------------------


def _nk_evaluate_py(X, loci, tables):
    # loci[j] = (j, neighbours...) ; tables[j, idx] ; idx built MSB-first
    p, n = X.shape
    width = loci.shape[1]
    out = np.empty(p)
    for r in range(p):
        s = 0.0
        for j in range(n):
            idx = 0
            for b in range(width):
                idx = (idx << 1) | X[r, loci[j, b]]
            s += tables[j, idx]
        out[r] = s / n
    return out


def nk_evaluate_numpy(X, loci, tables):
    """Mean per-locus contribution of every bit string row of ``X``."""
    X = np.asarray(X, dtype=np.int64)
    width = loci.shape[1]
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    idx = X[:, loci] @ weights  # (p, n)
    n = loci.shape[0]
    return tables[np.arange(n)[None, :], idx].mean(axis=1)


nk_evaluate_numba = njit(_nk_evaluate_py)


if USE_NUMBA:
    nd_rank = nd_rank_numba
    hv2d = hv2d_numba
    igd_distance = igd_distance_numba
    nk_evaluate = nk_evaluate_numba
else:
    nd_rank = nd_rank_numpy
    hv2d = hv2d_numpy
    igd_distance = igd_distance_numpy
    nk_evaluate = nk_evaluate_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
