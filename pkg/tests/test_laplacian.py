import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edgefilter import (
    DegenerateGraphError,
    NegativeOverride,
    UsageError,
    WeightParams,
    apply_filter_operator,
    apply_L,
    apply_overrides,
    bilateral_weights,
    build_laplacian,
)
from edgefilter.weights import WeightMatrix

from conftest import random_tridiagonal
from oracles import dense_laplacian

NO_SPATIAL = WeightParams(spatial_term_enabled=False)


def second_difference(n):
    L = 2 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
    L[0, 0] = L[-1, -1] = 1
    return L


def test_constant_guide_stencil():
    gl = build_laplacian(bilateral_weights(np.zeros(7), NO_SPATIAL))
    assert np.array_equal(gl.to_dense(), second_difference(7))


def test_two_by_two():
    gl = build_laplacian(WeightMatrix([[1.0, 1.0], [0.5, 0.0]]))
    np.testing.assert_array_equal(gl.d, [1.5, 1.5])
    np.testing.assert_array_equal(gl.to_dense(), [[0.5, -0.5], [-0.5, 0.5]])


def test_negative_override_row_sum():
    y = np.r_[np.zeros(5), np.full(5, 1.0)]
    w = apply_overrides(bilateral_weights(y, NO_SPATIAL), [NegativeOverride(4, -0.05)])
    gl = build_laplacian(w)
    assert gl.d[4] == 1 + w[3, 4] - 0.05
    assert gl.d[4] > 0


def test_degenerate_row_sum_names_index():
    bands = np.array([[1.0, 1.0, 1.0], [0.5, -1.0, 0.0]])
    with pytest.raises(DegenerateGraphError, match=r"d\[2\]") as exc:
        build_laplacian(WeightMatrix(bands))
    assert exc.value.index == 2


def test_negative_row_sum_allowed():
    gl = build_laplacian(WeightMatrix([[1.0, 1.0, 1.0], [0.5, -3.0, 0.0]]))
    assert gl.d[1] < 0


def test_apply_L_stencil_column():
    gl = build_laplacian(bilateral_weights(np.zeros(6), NO_SPATIAL))
    e1 = np.eye(6)[1]
    np.testing.assert_array_equal(apply_L(gl, e1), [-1, 2, -1, 0, 0, 0])


@pytest.mark.parametrize("radius", [1, 2, 3])
def test_matches_dense_oracle(rng, radius):
    for _ in range(20):
        n = int(rng.integers(radius + 1, 21))
        y = rng.standard_normal(n) * 0.1
        w = bilateral_weights(y, WeightParams(sigma_d=1.0, sigma_r=0.2, radius=radius))
        W = w.to_dense()
        L, d = dense_laplacian(W)
        gl = build_laplacian(w)
        v = rng.standard_normal(n)
        np.testing.assert_allclose(apply_L(gl, v), L @ v, rtol=0, atol=1e-14)
        np.testing.assert_allclose(apply_filter_operator(gl, v), (W @ v) / d, rtol=0, atol=1e-14)


def test_filter_operator_fixes_constants(rng):
    gl = build_laplacian(random_tridiagonal(rng, 15))
    c = 3.7 * np.ones(15)
    np.testing.assert_array_equal(apply_filter_operator(gl, c), c)


def test_diagonal_only_is_identity(rng):
    bands = np.zeros((2, 5))
    bands[0] = rng.uniform(0.5, 2, 5)
    v = rng.standard_normal(5)
    np.testing.assert_array_equal(apply_filter_operator(build_laplacian(WeightMatrix(bands)), v), v)


def test_length_mismatch():
    gl = build_laplacian(bilateral_weights(np.zeros(4), NO_SPATIAL))
    with pytest.raises(UsageError):
        apply_L(gl, np.ones(5))
    with pytest.raises(UsageError):
        apply_filter_operator(gl, np.ones(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_laplacian_invariants(seed, negative):
    r = np.random.default_rng(seed)
    n = int(r.integers(3, 25))
    w = random_tridiagonal(r, n)
    if negative:
        w = apply_overrides(w, [NegativeOverride(int(r.integers(0, n - 1)), -0.05)])
    gl = build_laplacian(w)
    Lnorm = np.abs(gl.to_dense()).sum(axis=1).max()
    assert np.abs(apply_L(gl, np.ones(n))).max() <= 1e-13 * Lnorm
    np.testing.assert_allclose(apply_filter_operator(gl, np.ones(n)), 1.0, rtol=0, atol=1e-13)
    u, v = r.standard_normal(n), r.standard_normal(n)
    assert abs(u @ apply_L(gl, v) - v @ apply_L(gl, u)) <= 1e-13 * max(1.0, Lnorm * np.linalg.norm(u) * np.linalg.norm(v))
    if not negative:
        assert v @ apply_L(gl, v) >= -1e-13


def test_row_sums_left_to_right():
    bands = np.array([[1.0, 1e-16, 1.0], [1.0, 1e16, 0.0]])
    d = WeightMatrix(bands).row_sums()
    # Row 1 summed as ((1 + 1e-16) + 1e16); left-to-right order is observable here.
    assert d[1] == (1.0 + 1e-16) + 1e16
