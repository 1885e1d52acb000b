import numpy as np
import pytest

from fefp.polynomials import (DegreeOverflowError, Polynomial, grad_dot,
                              multi_indices, norm_power)


def test_monomial_evaluation():
    p = Polynomial.monomial((2, 1, 0), 3.0)
    pts = np.array([[1.0, 2.0, 5.0], [2.0, -1.0, 0.5]])
    np.testing.assert_allclose(p(pts), [6.0, -12.0])


def test_arithmetic_and_scalar_ops():
    x = Polynomial.variable(0)
    y = Polynomial.variable(1)
    p = (x + y) * (x - y)  # x^2 - y^2
    pts = np.array([[3.0, 2.0, 0.0]])
    np.testing.assert_allclose(p(pts), [5.0])
    np.testing.assert_allclose((p * 2.0)(pts), [10.0])


def test_gradient_and_laplacian_of_norm_powers():
    # |v|^4: grad = 4 v |v|^2, lap = 20 |v|^2
    phi = norm_power(4)
    pts = np.array([[1.0, 2.0, 2.0]])  # |v|^2 = 9
    grad = phi.gradient()
    np.testing.assert_allclose([g(pts)[0] for g in grad],
                               [4 * 1 * 9, 4 * 2 * 9, 4 * 2 * 9])
    np.testing.assert_allclose(phi.laplacian()(pts), [180.0])


def test_grad_dot_matches_manual():
    p = Polynomial.monomial((1, 1, 0))
    q = norm_power(2)
    # grad(xy).grad(|v|^2) = (y, x, 0).(2x, 2y, 2z) = 4xy
    pts = np.array([[2.0, 3.0, -1.0]])
    np.testing.assert_allclose(grad_dot(p, q)(pts), [24.0])


def test_shift_matches_evaluation_at_offset():
    p = norm_power(2) * Polynomial.variable(0)
    offset = np.array([0.5, -1.0, 2.0])
    shifted = p.shift(offset)
    pts = np.array([[1.0, 1.0, 1.0], [0.0, 2.0, -3.0]])
    np.testing.assert_allclose(shifted(pts), p(pts + offset))


def test_degree_overflow_guard():
    phi = norm_power(8)
    with pytest.raises(DegreeOverflowError):
        phi * phi


def test_multi_indices_counts():
    # number of 3-variable monomials of total degree <= 2 is 10
    assert len(multi_indices(2)) == 10
    assert (0, 0, 0) in multi_indices(2)
