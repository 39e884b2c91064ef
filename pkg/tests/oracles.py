"""Slow, obviously-correct reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def brute_dominates(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def brute_fronts(F):
    """Peel nondominated layers with the O(n^2 m) pairwise definition."""
    F = [tuple(map(float, row)) for row in np.asarray(F)]
    left = set(range(len(F)))
    fronts = []
    while left:
        layer = sorted(i for i in left if not any(brute_dominates(F[j], F[i]) for j in left if j != i))
        fronts.append(layer)
        left -= set(layer)
    return fronts


def brute_ranks(F):
    rank = np.empty(len(F), dtype=int)
    for r, layer in enumerate(brute_fronts(F)):
        rank[layer] = r
    return rank


def monte_carlo_hv(F, ref, samples, rng):
    F = np.asarray(F, dtype=float)
    lo = F.min(axis=0)
    box = np.prod(np.asarray(ref) - lo)
    pts = lo + rng.random((samples, 2)) * (np.asarray(ref) - lo)
    covered = np.zeros(samples, dtype=bool)
    for f in F:
        covered |= np.all(pts >= f, axis=1)
    return box * covered.mean()


def brute_igd(front, ref_set):
    return float(np.mean([min(math.dist(r, f) for f in front) for r in ref_set]))


def grid_attainment(fronts, level):
    """Minimal attained grid points, checked point by point over every coordinate pair."""
    need = math.ceil(level * len(fronts) - 1e-12)
    xs = sorted({float(p[0]) for f in fronts for p in f})
    ys = sorted({float(p[1]) for f in fronts for p in f})
    attained = set()
    for x, y in itertools.product(xs, ys):
        hits = sum(any(p[0] <= x and p[1] <= y for p in f) for f in fronts)
        if hits >= need:
            attained.add((x, y))
    minimal = [
        p for p in attained
        if not any(q != p and q[0] <= p[0] and q[1] <= p[1] for q in attained)
    ]
    return sorted(minimal)


def nk_direct(x, loci, tables):
    n = len(x)
    total = 0.0
    for j in range(n):
        idx = 0
        for b in loci[j]:
            idx = idx * 2 + int(x[b])
        total += tables[j][idx]
    return total / n


def wilcoxon_exact_greater(d):
    """Exact one-sided signed-rank p-value by enumerating all 2^n sign patterns (no ties/zeros)."""
    d = np.asarray(d, dtype=float)
    ranks = np.argsort(np.argsort(np.abs(d))) + 1
    w_plus = ranks[d > 0].sum()
    n = len(d)
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        if sum(r for r, s in zip(ranks, signs) if s) >= w_plus:
            count += 1
    return float(w_plus), count / 2 ** n
