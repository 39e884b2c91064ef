import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hetlat.moea_core import nondominated_rank
from hetlat.surrogate import (
    DegenerateSet,
    DimensionMismatch,
    TooFewCandidates,
    acquire,
    fit,
    fit_samples,
    lhs_sample,
    predict,
)


def test_repeated_point_is_degenerate():
    with pytest.raises(DegenerateSet):
        fit(np.ones((4, 2)), np.arange(4.0))
    with pytest.raises(DegenerateSet):
        fit_samples([])


def test_two_point_line_interpolates():
    m = fit_samples([(np.array([0.0]), 0.0), (np.array([1.0]), 1.0)])
    assert predict(m, [0.0])[0] == pytest.approx(0.0, abs=1e-6)
    assert predict(m, [1.0])[0] == pytest.approx(1.0, abs=1e-6)


def test_duplicates_merge_by_mean():
    m = fit(np.array([[0.0], [0.0], [1.0]]), np.array([1.0, 3.0, 5.0]))
    assert predict(m, [0.0])[0] == pytest.approx(2.0, abs=1e-6)


@given(st.integers(2, 60), st.integers(1, 6), st.integers(0, 10_000))
def test_interpolates_training_points_with_zero_uncertainty(n, d, seed):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = rng.normal(size=n) * 10
    m = fit(X, y)
    mean, unc = m.predict_many(X)
    np.testing.assert_allclose(mean, y, atol=1e-6)
    np.testing.assert_array_equal(unc, 0.0)


def test_beats_constant_mean_on_quadratic(rng):
    f = lambda X: np.sum((X - 0.3) ** 2, axis=1)  # noqa: E731
    X = rng.random((20, 2))
    Q = rng.random((50, 2))
    m = fit(X, f(X))
    rmse = np.sqrt(np.mean((m.predict_many(Q)[0] - f(Q)) ** 2))
    base = np.sqrt(np.mean((f(X).mean() - f(Q)) ** 2))
    assert rmse < base


def test_uncertainty_grows_with_distance_and_is_isotropic():
    m = fit(np.array([[0.0, 0.0], [1.0, 0.0]]), np.array([0.0, 1.0]))
    near = m.predict([0.1, 0.0])[1]
    far = m.predict([10.0, 10.0])[1]
    assert 0 < near < far
    assert m.predict([0.0, 0.3])[1] == pytest.approx(m.predict([0.0, -0.3])[1])
    with pytest.raises(DimensionMismatch):
        m.predict([0.0, 0.0, 0.0])


def test_fit_is_deterministic(rng):
    X, y = rng.random((15, 3)), rng.random(15)
    Q = rng.random((5, 3))
    a, b = fit(X, y), fit(X, y)
    np.testing.assert_array_equal(a.predict_many(Q)[0], b.predict_many(Q)[0])


def test_binary_embedding_interpolates(rng):
    X = rng.integers(0, 2, (30, 10)).astype(float)
    y = X.sum(axis=1)
    m = fit(X, y)
    uniq = np.unique(X, axis=0)
    for row in uniq:
        target = y[np.all(X == row, axis=1)].mean()
        assert m.predict(row)[0] == pytest.approx(target, abs=1e-6)


# -- LHS -----------------------------------------------------------------------


def test_lhs_single_point_in_box(rng):
    c = np.array([[0.5, 0.5]])
    P = lhs_sample(c, 1, 0.1, np.zeros(2), np.ones(2), rng)
    assert P.shape == (1, 2) and np.all(np.abs(P - c) <= 0.05)


@given(st.integers(1, 30), st.integers(1, 4), st.integers(0, 1000))
def test_lhs_strata_hold_one_point_each(count, d, seed):
    rng = np.random.default_rng(seed)
    c = rng.random((1, d))
    lo, hi = np.zeros(d), np.ones(d)
    P = lhs_sample(c, count, 0.2, lo, hi, rng)
    blo = np.maximum(c[0] - 0.1, lo)
    bhi = np.minimum(c[0] + 0.1, hi)
    assert np.all(P >= blo) and np.all(P <= bhi)
    strata = np.floor((P - blo) / (bhi - blo) * count).clip(0, count - 1).astype(int)
    for j in range(d):
        assert sorted(strata[:, j]) == list(range(count))


def test_lhs_clips_to_bounds(rng):
    P = lhs_sample(np.array([[0.0, 1.0]]), 8, 0.5, np.zeros(2), np.ones(2), rng)
    assert np.all(P >= 0) and np.all(P <= 1)
    assert np.all(P[:, 0] <= 0.25) and np.all(P[:, 1] >= 0.75)


def test_lhs_marginals_uniform_within_strata():
    rng = np.random.default_rng(11)
    k, designs = 4, 10_000
    fine = np.zeros(8)
    for _ in range(designs // 100):
        P = lhs_sample(np.full((100, 1), 0.5), k, 1.0, np.zeros(1), np.ones(1), rng)
        fine += np.bincount(np.minimum((P[:, 0] * 8).astype(int), 7), minlength=8)
    total = designs * k
    p = 1 / 8
    sigma = np.sqrt(total * p * (1 - p))
    assert np.all(np.abs(fine - total * p) <= 3 * sigma)


# -- acquisition -----------------------------------------------------------------


def _models(rng, d=2):
    X = rng.random((12, d))
    return [fit(X, np.sum(X ** 2, axis=1)), fit(X, np.sum((X - 1) ** 2, axis=1))]


def test_acquire_all_when_u_equals_n(rng):
    models = _models(rng)
    C = rng.random((6, 2))
    assert sorted(acquire(models, C, 6, rng)) == list(range(6))
    with pytest.raises(TooFewCandidates):
        acquire(models, C, 7, rng)


def test_acquire_matches_exhaustive_criterion(rng):
    models = _models(rng)
    C = rng.random((10, 2))
    means = np.column_stack([m.predict_many(C)[0] for m in models])
    unc = sum(m.predict_many(C)[1] for m in models)
    rank = nondominated_rank(means)
    for u in range(1, 11):
        got = list(acquire(models, C, u, np.random.default_rng(0)))
        # exhaustive: the chosen set must be a best-u set under (rank, -uncertainty)
        key = lambda i: (rank[i], -unc[i])  # noqa: E731
        best = min(itertools.combinations(range(10), u), key=lambda s: sorted(key(i) for i in s))
        assert sorted(key(i) for i in got) == sorted(key(i) for i in best)


def test_acquire_picks_dominating_uncertain_candidate_first(rng):
    X = np.array([[0.0], [1.0], [2.0]])
    models = [fit(X, X[:, 0]), fit(X, X[:, 0])]
    C = np.array([[-3.0], [1.0], [2.0]])
    assert acquire(models, C, 1, rng)[0] == 0
