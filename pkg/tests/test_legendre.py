import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg
from scipy.special import eval_sh_legendre

from slnn.errors import DomainError, InvalidArgumentError, InvalidOrderError
from slnn.legendre import (
    MAX_ORDER,
    basis_table,
    eval_basis,
    eval_basis_grid,
    gauss_legendre,
    orthogonality_defect,
)


def test_first_two_polynomials():
    b = eval_basis(2, 0.75)
    np.testing.assert_array_equal(b.values, [1.0, 0.5])
    np.testing.assert_array_equal(b.d1, [0.0, 2.0])
    np.testing.assert_array_equal(b.d2, [0.0, 0.0])


def test_second_order_at_midpoint():
    # L_2 = 6 eta^2 - 6 eta + 1, L_2' = 12 eta - 6, L_2'' = 12
    b = eval_basis(3, 0.5)
    assert b.values[2] == -0.5
    assert b.d1[2] == 0.0
    assert b.d2[2] == 12.0


@pytest.mark.parametrize("eta", [0.0, 0.13, 0.5, 0.9, 1.0])
def test_l2_closed_form(eta):
    b = eval_basis(3, eta)
    assert b.values[2] == pytest.approx(6 * eta**2 - 6 * eta + 1, abs=1e-15)
    assert b.d1[2] == pytest.approx(12 * eta - 6, abs=1e-14)


def test_endpoint_one():
    np.testing.assert_array_equal(eval_basis(5, 1.0).values, np.ones(5))


def test_endpoints_exact_low_orders():
    k = np.arange(10)
    assert np.array_equal(eval_basis(10, 1.0).values, np.ones(10))
    assert np.array_equal(eval_basis(10, 0.0).values, (-1.0) ** k)


@pytest.mark.parametrize("m", [1, 2, 5, 10, 20])
def test_matches_scipy_shifted_legendre(m):
    eta = np.linspace(0, 1, 23)
    tab = basis_table(m, eta)
    for k in range(m):
        np.testing.assert_allclose(tab.values[:, k], eval_sh_legendre(k, eta), atol=1e-13)


@pytest.mark.parametrize("m", [2, 6, 12])
def test_derivatives_match_numpy_series(m):
    eta = np.linspace(0, 1, 17)
    tab = basis_table(m, eta)
    for k in range(m):
        p = npleg.Legendre.basis(k, domain=[0, 1])
        np.testing.assert_allclose(tab.d1[:, k], p.deriv(1)(eta), atol=1e-10 * max(1, k**2))
        np.testing.assert_allclose(tab.d2[:, k], p.deriv(2)(eta), atol=1e-9 * max(1, k**4))


def test_grid_matches_pointwise():
    grid = [0.2, 0.8, 0.5]
    pts = eval_basis_grid(3, grid)
    assert [p.eta for p in pts] == grid
    for p, e in zip(pts, grid):
        ref = eval_basis(3, e)
        np.testing.assert_array_equal(p.values, ref.values)
        np.testing.assert_array_equal(p.d1, ref.d1)
        np.testing.assert_array_equal(p.d2, ref.d2)


def test_grid_small_cases():
    a, b = eval_basis_grid(1, [0.2, 0.8])
    np.testing.assert_array_equal(a.values, [1.0])
    np.testing.assert_array_equal(b.values, [1.0])
    lo, hi = eval_basis_grid(2, [0.0, 1.0])
    np.testing.assert_array_equal(lo.values, [1.0, -1.0])
    np.testing.assert_array_equal(hi.values, [1.0, 1.0])


@pytest.mark.parametrize("eta", [-1e-12, 1.0000001, float("nan")])
def test_out_of_range_eta(eta):
    with pytest.raises(DomainError):
        eval_basis(3, eta)


def test_grid_error_names_index():
    with pytest.raises(DomainError, match="grid point 2"):
        eval_basis_grid(3, [0.1, 0.2, 1.5, 0.3])


@pytest.mark.parametrize("m", [0, -1, MAX_ORDER + 1, 2.5])
def test_invalid_order(m):
    with pytest.raises(InvalidOrderError):
        eval_basis(m, 0.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.0, 1.0), st.integers(3, 30))
def test_recurrence_consistency(eta, m):
    v = eval_basis(m, eta).values
    x = 2 * eta - 1
    for k in range(1, m - 1):
        lhs = (k + 1) * v[k + 1]
        rhs = (2 * k + 1) * x * v[k] - k * v[k - 1]
        assert lhs == pytest.approx(rhs, rel=1e-13, abs=1e-13)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.integers(1, 12))
def test_derivatives_vs_central_difference(eta, m):
    h = 1e-6
    b = eval_basis(m, eta)
    up, dn = eval_basis(m, eta + h), eval_basis(m, eta - h)
    fd1 = (up.values - dn.values) / (2 * h)
    fd2 = (up.d1 - dn.d1) / (2 * h)
    np.testing.assert_allclose(b.d1, fd1, rtol=1e-6, atol=1e-6)
    np.testing.assert_allclose(b.d2, fd2, rtol=1e-6, atol=1e-5)


@pytest.mark.parametrize("n", [1, 2, 3, 8, 33, 64, 128])
def test_gauss_legendre_against_numpy(n):
    x, w = gauss_legendre(n, -1.0, 1.0)
    xn, wn = npleg.leggauss(n)
    np.testing.assert_allclose(x, xn, atol=1e-14)
    np.testing.assert_allclose(w, wn, atol=1e-14)


def test_gauss_legendre_integrates_polynomials_on_unit_interval():
    x, w = gauss_legendre(6)
    for p in range(12):
        assert np.dot(w, x**p) == pytest.approx(1.0 / (p + 1), rel=1e-14)


@pytest.mark.parametrize("m,q,bound", [(1, 8, 1e-15), (5, 32, 1e-12), (10, 64, 1e-12), (64, 128, 1e-12)])
def test_orthogonality_defect(m, q, bound):
    assert orthogonality_defect(m, q) <= bound


def test_orthogonality_needs_enough_nodes():
    with pytest.raises(InvalidArgumentError):
        orthogonality_defect(5, 9)
