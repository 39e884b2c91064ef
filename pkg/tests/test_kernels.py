import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hetlat import kernels

from .oracles import brute_ranks, nk_direct

small_ints = st.integers(0, 6).map(float)


@given(arrays(np.float64, st.tuples(st.integers(0, 30), st.integers(2, 4)), elements=small_ints))
def test_nd_rank_flavours_agree_with_oracle(F):
    expected = brute_ranks(F) if len(F) else np.empty(0, dtype=int)
    np.testing.assert_array_equal(kernels.nd_rank_numba(F), expected)
    np.testing.assert_array_equal(kernels.nd_rank_numpy(F), expected)


@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.just(2)), elements=st.floats(0, 0.99)))
def test_hv2d_flavours_agree(F):
    a = kernels.hv2d_numba(np.ascontiguousarray(F), 1.0, 1.0)
    b = kernels.hv2d_numpy(np.ascontiguousarray(F), 1.0, 1.0)
    assert a == pytest.approx(b, abs=1e-12)


@given(
    arrays(np.float64, st.tuples(st.integers(1, 12), st.just(3)), elements=st.floats(-5, 5)),
    arrays(np.float64, st.tuples(st.integers(1, 12), st.just(3)), elements=st.floats(-5, 5)),
)
def test_igd_distance_flavours_agree(R, F):
    np.testing.assert_allclose(kernels.igd_distance_numba(R, F), kernels.igd_distance_numpy(R, F), atol=1e-12)


def test_nk_flavours_agree_with_direct_lookup(rng):
    n, k = 12, 3
    loci = np.array([[j] + list(rng.choice(np.delete(np.arange(n), j), k, replace=False)) for j in range(n)])
    tables = rng.random((n, 2 ** (k + 1)))
    X = rng.integers(0, 2, size=(40, n)).astype(np.uint8)
    expected = [nk_direct(x, loci, tables) for x in X]
    np.testing.assert_allclose(kernels.nk_evaluate_numba(X, loci, tables), expected, atol=1e-14)
    np.testing.assert_allclose(kernels.nk_evaluate_numpy(X, loci, tables), expected, atol=1e-14)


def test_nd_rank_handles_duplicates():
    F = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 2.0], [2.0, 2.0]])
    np.testing.assert_array_equal(kernels.nd_rank(F), [0, 0, 0, 1])


@pytest.mark.parametrize("flag", ["HETLAT_DISABLE_NUMBA", "NUMBA_DISABLE_JIT"])
def test_env_flag_selects_numpy_backend(flag):
    env = {**os.environ, flag: "1"}
    out = subprocess.run(
        [sys.executable, "-c", "from hetlat import kernels; print(kernels.BACKEND, kernels.nd_rank is kernels.nd_rank_numpy)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split() == ["numpy", "True"]


def test_default_backend_is_numba():
    env = {k: v for k, v in os.environ.items() if k not in ("HETLAT_DISABLE_NUMBA", "NUMBA_DISABLE_JIT")}
    out = subprocess.run(
        [sys.executable, "-c", "from hetlat import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numba"
