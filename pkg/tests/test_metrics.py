import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hetlat.metrics import (
    DimensionUnsupported,
    EmptyFront,
    EmptySet,
    attainment_summary,
    default_reference_point,
    hypervolume_2d,
    hypervolume_or_zero,
    igd,
    read_polyline_csv,
    staircase_polyline,
    write_polyline_csv,
)

from .oracles import brute_igd, grid_attainment, monte_carlo_hv

pts2 = arrays(np.float64, st.tuples(st.integers(1, 15), st.just(2)), elements=st.floats(0, 0.95, allow_subnormal=False))


def test_hypervolume_examples(rng):
    assert hypervolume_2d([[0, 0]], [1, 1]) == 1.0
    assert hypervolume_2d([[0.5, 0.5]], [1, 1]) == 0.25
    F = [[0.2, 0.6], [0.6, 0.2]]
    assert hypervolume_2d(F, [1, 1]) == pytest.approx(0.48, abs=1e-12)
    assert monte_carlo_hv(F, [1, 1], 10**6, rng) == pytest.approx(0.48, abs=1e-3)


def test_hypervolume_discards_points_outside_box():
    with pytest.warns(UserWarning):
        area, dropped = hypervolume_2d([[0.5, 0.5], [1.5, 0.0], [1.0, 0.2]], [1, 1], return_discarded=True)
    assert area == 0.25 and dropped == 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(EmptyFront):
            hypervolume_2d([[2, 2]], [1, 1])
    assert hypervolume_or_zero([], [1, 1]) == 0.0
    assert hypervolume_or_zero([[2, 2]], [1, 1]) == 0.0
    with pytest.raises(DimensionUnsupported):
        hypervolume_2d([[0, 0, 0]], [1, 1, 1])


@given(pts2)
def test_hypervolume_dominated_points_do_not_count(F):
    from hetlat.moea_core import nondominated_mask

    ref = [1, 1]
    assert hypervolume_2d(F, ref) == pytest.approx(hypervolume_2d(F[nondominated_mask(F)], ref), abs=1e-12)


@given(pts2, st.floats(0, 0.95), st.floats(0, 0.95))
def test_hypervolume_monotone_under_insertion(F, x, y):
    ref = [1, 1]
    assert hypervolume_2d(np.vstack([F, [[x, y]]]), ref) >= hypervolume_2d(F, ref) - 1e-12


def test_igd_examples(rng):
    R = rng.random((7, 2))
    assert igd(R, R) == 0.0
    assert igd([[3, 4]], [[0, 0]]) == 5.0
    with pytest.raises(EmptySet):
        igd([], [[0, 0]])
    for _ in range(20):
        A, B = rng.random((10, 2)), rng.random((10, 2))
        assert igd(A, B) == pytest.approx(brute_igd(A, B), abs=1e-12)


@given(pts2, pts2)
def test_igd_zero_iff_reference_covered(F, R):
    covered = all(any(np.array_equal(r, f) for f in F) for r in R)
    assert (igd(F, R) == 0.0) == covered


def test_default_reference_point():
    ref = default_reference_point([[[1.0, 2.0]], [[3.0, -1.0]]])
    np.testing.assert_allclose(ref, [3.3, 2.2])
    ref = default_reference_point([[[-1.0, 0.0]]])
    assert ref[0] == pytest.approx(-0.9) and ref[1] > 0


def test_attainment_single_and_identical_runs():
    F = np.array([[0.1, 0.9], [0.5, 0.5], [0.9, 0.1], [0.6, 0.6]])
    staircase = [[0.1, 0.9], [0.5, 0.5], [0.9, 0.1]]
    np.testing.assert_array_equal(attainment_summary([F]), staircase)
    np.testing.assert_array_equal(attainment_summary([F, F], 0.5), staircase)


def test_attainment_hand_example():
    fronts = [
        np.array([[0.0, 1.0], [1.0, 0.0]]),
        np.array([[0.5, 0.5]]),
        np.array([[0.2, 0.8], [0.8, 0.2]]),
    ]
    got = attainment_summary(fronts, 0.5).tolist()
    assert got == [list(p) for p in grid_attainment(fronts, 0.5)]
    # (0.2, 0.8) is reached by one run only; (0.2, 1.0) by two
    assert got == [[0.2, 1.0], [0.5, 0.8], [0.8, 0.5], [1.0, 0.2]]


@given(st.lists(pts2, min_size=1, max_size=4), st.sampled_from([0.25, 0.5, 0.75, 1.0]))
def test_attainment_matches_grid_oracle(fronts, level):
    got = attainment_summary(fronts, level)
    assert [tuple(p) for p in got] == grid_attainment(fronts, level)
    # staircase: x increasing, y strictly decreasing
    assert np.all(np.diff(got[:, 0]) > 0) and np.all(np.diff(got[:, 1]) < 0)


def test_attainment_rejects_3d():
    with pytest.raises(DimensionUnsupported):
        attainment_summary([np.zeros((2, 3))])


def test_polyline_round_trip(tmp_path):
    C = np.array([[0.1, 0.9], [0.5, 0.5]])
    P = staircase_polyline(C, [1.0, 1.0])
    np.testing.assert_array_equal(P, [[0.1, 1.0], [0.1, 0.9], [0.5, 0.9], [0.5, 0.5], [1.0, 0.5]])
    write_polyline_csv(tmp_path / "p.csv", P)
    np.testing.assert_array_equal(read_polyline_csv(tmp_path / "p.csv"), P)
