import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hetlat.moea_core import dominates
from hetlat.problems import (
    DomainMismatch,
    InvalidEpistasis,
    evaluate,
    make_correlated_pair,
    make_mnk,
    problem_from_descriptor,
    reference_front,
)

from .oracles import nk_direct


def test_full_correlation_makes_objectives_identical(rng):
    p = make_correlated_pair(1.0, 4, 3)
    X = p.random_genomes(100, rng)
    np.testing.assert_array_equal(p.evaluate_many(X, 0), p.evaluate_many(X, 1))


def test_zero_correlation_second_objective_is_b_anchored(rng):
    p = make_correlated_pair(0.0, 4, 3)
    b = p.evaluators[1].b
    X = p.random_genomes(50, rng)
    np.testing.assert_allclose(p.evaluate_many(X, 1), np.mean((X - b) ** 2, axis=1))


def test_correlation_is_monotone_in_rho():
    rng = np.random.default_rng(7)
    corr = []
    for rho in (-1.0, -0.5, 0.0, 0.5, 1.0):
        p = make_correlated_pair(rho, 5, 11)
        X = p.random_genomes(10_000, rng)
        corr.append(np.corrcoef(p.evaluate_many(X, 0), p.evaluate_many(X, 1))[0, 1])
    assert all(a <= b + 1e-12 for a, b in zip(corr, corr[1:]))
    assert corr[-1] == pytest.approx(1.0)


def test_binary_correlated_pair_shares_tables():
    same = make_correlated_pair(1.0, 12, 2, binary=True, k=2)
    X = same.random_genomes(30, np.random.default_rng(0))
    np.testing.assert_array_equal(same.evaluate_many(X, 0), same.evaluate_many(X, 1))
    rng = np.random.default_rng(1)
    corr = []
    for rho in (-1.0, 0.0, 1.0):
        p = make_correlated_pair(rho, 40, 5, binary=True, k=2)
        X = p.random_genomes(3000, rng)
        corr.append(np.corrcoef(p.evaluate_many(X, 0), p.evaluate_many(X, 1))[0, 1])
    assert corr[0] < corr[1] < corr[2]


def test_reference_front_is_mutually_nondominated_and_optimal():
    p = make_correlated_pair(0.4, 3, 9)
    R = reference_front(p, 50)
    for i in range(len(R)):
        for j in range(len(R)):
            assert not dominates(R[i], R[j])
    # no random point dominates any reference point
    X = p.random_genomes(2000, np.random.default_rng(0))
    F = np.column_stack([p.evaluate_many(X, 0), p.evaluate_many(X, 1)])
    for r in R[::5]:
        assert not np.any(np.all(F <= r, axis=1) & np.any(F < r, axis=1))
    assert reference_front(make_correlated_pair(-0.5, 3, 9)) is None
    assert reference_front(make_mnk(2, 8, 1, 0)) is None


def test_mnk_determinism_and_range(rng):
    a = make_mnk(3, 16, 4, 42)
    b = make_mnk(3, 16, 4, 42)
    X = a.random_genomes(100, rng)
    for i in range(3):
        va, vb = a.evaluate_many(X, i), b.evaluate_many(X, i)
        np.testing.assert_array_equal(va, vb)
        assert np.all((va >= 0) & (va <= 1))
    assert evaluate(a, X[0], 1) == evaluate(a, X[0], 1)


def test_mnk_k0_is_mean_of_independent_lookups(rng):
    p = make_mnk(1, 20, 0, 5)
    land = p.evaluators[0]
    X = p.random_genomes(50, rng)
    direct = [np.mean([land.tables[j][x[j]] for j in range(20)]) for x in X]
    np.testing.assert_allclose(p.evaluate_many(X, 0), direct, atol=1e-14)


def test_mnk_matches_independent_lookup(rng):
    p = make_mnk(2, 10, 3, 8)
    X = p.random_genomes(20, rng)
    for i, land in enumerate(p.evaluators):
        np.testing.assert_allclose(
            p.evaluate_many(X, i), [nk_direct(x, land.loci, land.tables) for x in X], atol=1e-14
        )


def test_mnk_k0_single_flip_changes_at_most_one_over_n(rng):
    n = 15
    p = make_mnk(1, n, 0, 1)
    for x in p.random_genomes(30, rng):
        base = evaluate(p, x, 0)
        for j in range(n):
            y = x.copy()
            y[j] ^= 1
            assert abs(evaluate(p, y, 0) - base) <= 1.0 / n + 1e-15


def test_mnk_full_epistasis_single_flip_changes_every_lookup(rng):
    n = 8
    p = make_mnk(1, n, n - 1, 3)
    land = p.evaluators[0]
    for x in p.random_genomes(10, rng):
        for j in range(n):
            y = x.copy()
            y[j] ^= 1
            assert np.all(land.lookup_indices(x) != land.lookup_indices(y))


def test_invalid_epistasis():
    with pytest.raises(InvalidEpistasis):
        make_mnk(2, 5, 5, 0)


def test_domain_mismatch():
    p = make_correlated_pair(0.5, 3, 0)
    with pytest.raises(DomainMismatch):
        evaluate(p, np.zeros(4), 0)
    with pytest.raises(DomainMismatch):
        evaluate(p, np.full(3, 1.5), 0)
    q = make_mnk(2, 4, 1, 0)
    with pytest.raises(DomainMismatch):
        evaluate(q, np.array([0, 1, 2, 0]), 0)


@pytest.mark.parametrize(
    "make",
    [
        lambda: make_mnk(2, 12, 3, 17, latencies=[4, 1]),
        lambda: make_correlated_pair(0.3, 6, 17, latencies=[5, 1]),
        lambda: make_correlated_pair(0.3, 16, 17, latencies=[5, 1], binary=True, k=3),
    ],
)
def test_descriptor_round_trip(make, rng):
    p = make()
    q = problem_from_descriptor(p.descriptor)
    X = p.random_genomes(100, rng)
    for i in range(p.n_objectives):
        np.testing.assert_array_equal(p.evaluate_many(X, i), q.evaluate_many(X, i))
    assert q.descriptor == p.descriptor


def test_descriptor_requires_latencies():
    desc = make_mnk(2, 6, 1, 0).descriptor
    del desc["latencies"]
    with pytest.raises(KeyError, match="latencies"):
        problem_from_descriptor(desc)


@given(st.lists(st.integers(1, 20), min_size=2, max_size=2))
def test_latencies_never_change_values(lat):
    p = make_correlated_pair(0.2, 3, 4)
    q = p.with_latencies(lat)
    X = p.random_genomes(20, np.random.default_rng(0))
    for i in range(2):
        np.testing.assert_array_equal(p.evaluate_many(X, i), q.evaluate_many(X, i))
    assert q.slow_index == int(np.argmax(lat))
