import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kan_dfm.splines import (
    KnotVector,
    SplineEdge,
    basis_and_derivative_matrix,
    basis_derivatives,
    basis_matrix,
    basis_values,
    build_knot_vector,
    edge_eval,
    edge_grad,
)


# ---------------------------------------------------------------------------
# Independent oracle: textbook recursive Cox-de Boor, written before (and
# kept independent of) the vectorized production path.
# ---------------------------------------------------------------------------

def oracle_basis(t, k, m, x):
    """B_{m,k}(x) by direct recursion over the knot sequence t."""
    if k == 0:
        if t[m] <= x < t[m + 1]:
            return 1.0
        # global right end belongs to the last interval (left-limit convention)
        if x == t[-1] and t[m] < t[m + 1] == t[-1]:
            return 1.0
        return 0.0
    left = 0.0
    if t[m + k] != t[m]:
        left = (x - t[m]) / (t[m + k] - t[m]) * oracle_basis(t, k - 1, m, x)
    right = 0.0
    if t[m + k + 1] != t[m + 1]:
        right = (t[m + k + 1] - x) / (t[m + k + 1] - t[m + 1]) * oracle_basis(t, k - 1, m + 1, x)
    return left + right


def oracle_all(kv, x):
    return np.array([oracle_basis(kv.knots, kv.order_k, m, x) for m in range(kv.n_basis)])


# Frozen from the oracle: oracle_all(build_knot_vector(3, 3, 0, 1), 0.5)
ORACLE_G3_K3_X05 = np.array(
    [0.0, 0.02083333333333332, 0.4791666666666666, 0.47916666666666663,
     0.02083333333333334, 0.0]
)


def fd_derivative(kv, x, h=1e-6):
    return (basis_values(kv, x + h) - basis_values(kv, x - h)) / (2 * h)


# ---------------------------------------------------------------------------
# Knot construction
# ---------------------------------------------------------------------------

def test_knot_length_formula():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    assert kv.knots.size == 3 + 2 * 3 + 1
    interior = kv.knots[3:-3]
    np.testing.assert_allclose(np.diff(interior), 1.0 / 3.0)


def test_knot_small_case():
    kv = build_knot_vector(1, 1, 0.0, 1.0)
    np.testing.assert_allclose(kv.knots, [-1.0, 0.0, 1.0, 2.0])
    assert kv.knots.size == 4


def test_basis_count():
    kv = build_knot_vector(5, 2, 0.0, 1.0)
    assert kv.knots.size == 10
    assert kv.n_basis == 7


@pytest.mark.parametrize("grid,k,lo,hi", [(0, 3, 0, 1), (3, 0, 0, 1), (3, 3, 1, 1), (3, 3, 2, 1)])
def test_knot_invalid_args(grid, k, lo, hi):
    with pytest.raises(ValueError):
        build_knot_vector(grid, k, lo, hi)


def test_knot_vector_rejects_wrong_length():
    with pytest.raises(ValueError):
        KnotVector(knots=np.linspace(0, 1, 5), order_k=3, grid_size=3)


# ---------------------------------------------------------------------------
# Basis values
# ---------------------------------------------------------------------------

def test_piecewise_constant_is_indicator():
    # degree-0 case: knots carry no extension, basis = interval indicators
    kv = KnotVector(knots=np.linspace(0.0, 1.0, 5), order_k=0, grid_size=4)
    vals = basis_values(kv, 0.3)
    assert np.count_nonzero(vals) == 1
    assert vals[1] == 1.0
    np.testing.assert_allclose(basis_values(kv, 1.0), [0, 0, 0, 1])


def test_matches_frozen_oracle_value():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    np.testing.assert_allclose(basis_values(kv, 0.5), ORACLE_G3_K3_X05, atol=1e-12)


def test_partition_of_unity_sampled():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    for x in np.linspace(0.0, 1.0, 23):
        assert abs(basis_values(kv, x).sum() - 1.0) < 1e-12


def test_out_of_span_raises():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    with pytest.raises(ValueError):
        basis_values(kv, 2.5)
    with pytest.raises(ValueError):
        basis_values(kv, -1.5)


@settings(max_examples=60, deadline=None)
@given(
    grid=st.integers(1, 7),
    k=st.integers(1, 4),
    x=st.floats(0.0, 1.0, allow_nan=False),
)
def test_oracle_equivalence(grid, k, x):
    kv = build_knot_vector(grid, k, 0.0, 1.0)
    np.testing.assert_allclose(basis_values(kv, x), oracle_all(kv, x), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(grid=st.integers(1, 7), k=st.integers(1, 4), x=st.floats(0.0, 1.0))
def test_nonneg_local_support_unity(grid, k, x):
    kv = build_knot_vector(grid, k, 0.0, 1.0)
    vals = basis_values(kv, x)
    assert np.all(vals >= -1e-15)
    assert np.count_nonzero(vals > 1e-14) <= k + 1
    assert abs(vals.sum() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# Derivatives
# ---------------------------------------------------------------------------

def test_derivative_sum_zero():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    assert abs(basis_derivatives(kv, 0.3).sum()) < 1e-10


@pytest.mark.parametrize("x", [0.1, 0.5, 0.9])
def test_derivative_matches_finite_difference(x):
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    analytic = basis_derivatives(kv, x)
    fd = fd_derivative(kv, x)
    scale = max(1.0, np.abs(analytic).max())
    assert np.abs(analytic - fd).max() / scale < 1e-5


def test_derivative_consistency_dense_grid():
    kv = build_knot_vector(4, 3, 0.0, 1.0)
    for x in np.linspace(0.02, 0.98, 100):
        analytic = basis_derivatives(kv, x)
        fd = fd_derivative(kv, x)
        scale = max(1.0, np.abs(analytic).max())
        assert np.abs(analytic - fd).max() / scale < 1e-5


def test_piecewise_constant_derivative_zero():
    kv = KnotVector(knots=np.linspace(0.0, 1.0, 5), order_k=0, grid_size=4)
    np.testing.assert_array_equal(basis_derivatives(kv, 0.37), np.zeros(4))


# ---------------------------------------------------------------------------
# Edges
# ---------------------------------------------------------------------------

def test_edge_partition_of_unity():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    edge = SplineEdge(kv, np.ones(kv.n_basis))
    for x in np.linspace(0, 1, 11):
        assert abs(edge_eval(edge, x) - 1.0) < 1e-12


def test_edge_zero():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    edge = SplineEdge(kv, np.zeros(kv.n_basis))
    assert edge_eval(edge, 0.42) == 0.0


def test_edge_matches_oracle_combination():
    rng = np.random.default_rng(7)
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    c = rng.normal(size=kv.n_basis)
    edge = SplineEdge(kv, c)
    expected = float(oracle_all(kv, 0.37) @ c)
    assert abs(edge_eval(edge, 0.37) - expected) < 1e-12


def test_edge_grad_constant_edge():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    edge = SplineEdge(kv, np.full(kv.n_basis, 2.5))
    d_dx, d_dc = edge_grad(edge, 0.6)
    assert abs(d_dx) < 1e-10
    assert abs(d_dc.sum() - 1.0) < 1e-12


def test_edge_grad_finite_difference():
    rng = np.random.default_rng(3)
    kv = build_knot_vector(4, 3, 0.0, 1.0)
    edge = SplineEdge(kv, rng.normal(size=kv.n_basis))
    for x in (0.15, 0.5, 0.83):
        d_dx, _ = edge_grad(edge, x)
        h = 1e-6
        fd = (edge_eval(edge, x + h) - edge_eval(edge, x - h)) / (2 * h)
        assert abs(d_dx - fd) / max(1.0, abs(d_dx)) < 1e-5


def test_edge_rejects_wrong_coefficient_count():
    kv = build_knot_vector(3, 3, 0.0, 1.0)
    with pytest.raises(ValueError):
        SplineEdge(kv, np.zeros(4))
    with pytest.raises(ValueError):
        SplineEdge(kv, np.array([np.nan] * kv.n_basis))


def test_batch_matches_scalar_path():
    kv = build_knot_vector(5, 3, 0.0, 1.0)
    xs = np.linspace(-0.4, 1.4, 17)  # includes extension zone
    mat, dmat = basis_and_derivative_matrix(kv, xs)
    for i, x in enumerate(xs):
        np.testing.assert_allclose(mat[i], basis_values(kv, x), atol=1e-14)
        np.testing.assert_allclose(dmat[i], basis_derivatives(kv, x), atol=1e-12)
