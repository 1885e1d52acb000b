import numpy as np
import pytest

from fefp.diagnostics import (SteadyAccumulator, gaussian_entropy_fisher,
                              predicted_entropy_rate, shock_thickness)


def test_entropy_fisher_at_equilibrium():
    H, I = gaussian_entropy_fisher(np.eye(3), theta_eq=1.0)
    assert H == pytest.approx(-1.5 * np.log(2 * np.pi * np.e))
    assert I == pytest.approx(0.0, abs=1e-14)


def test_fisher_value_of_reference_anisotropy():
    # eigenvalues (1.5, 1, 0.5): I = sum (1 - lambda)^2 / lambda = 2/3
    H, I = gaussian_entropy_fisher(np.diag([1.5, 1.0, 0.5]), theta_eq=1.0)
    assert I == pytest.approx(2.0 / 3.0)


def test_trace_identity_for_unit_temperature_spectra():
    # whenever the eigenvalues average to theta_eq = 1,
    # sum (1-l)^2/l == sum (1-l)/l   (both equal sum 1/l - 3)
    rng = np.random.default_rng(8)
    for _ in range(20):
        lams = rng.uniform(0.3, 2.0, size=3)
        lams *= 3.0 / lams.sum()  # normalize trace to 3
        lhs = np.sum((1.0 - lams) ** 2 / lams)
        rhs = np.sum((1.0 - lams) / lams)
        assert lhs == pytest.approx(rhs, rel=1e-12)


def test_predicted_entropy_rate_sign():
    rate = predicted_entropy_rate(theta=1.0, tau=2.0, fisher=2.0 / 3.0)
    assert rate == pytest.approx(-1.0 / 3.0)


def test_steady_accumulator_averages():
    acc = SteadyAccumulator(2)
    acc.add(np.array([1.0, 2.0]), np.zeros((2, 3)), np.array([1.0, 1.0]))
    acc.add(np.array([3.0, 2.0]), np.ones((2, 3)), np.array([2.0, 1.0]))
    np.testing.assert_allclose(acc.rho, [2.0, 2.0])
    np.testing.assert_allclose(acc.velocity, 0.5)
    np.testing.assert_allclose(acc.theta, [1.5, 1.0])


def test_shock_thickness_on_tanh_profile():
    x = np.linspace(0.0, 10.0, 2001)
    center, width = 6.0, 0.4
    values = 1.0 + 3.0 * 0.5 * (1.0 + np.tanh((x - center) / width))
    metrics = shock_thickness(x, values, baseline=1.0)
    # 10-90 thickness of tanh(x/w) is w * (atanh(0.8) - atanh(-0.8))
    expected = width * 2.0 * np.arctanh(0.8)
    assert metrics.thickness == pytest.approx(expected, rel=0.01)
    assert metrics.x10 < metrics.x90
    assert metrics.peak_value == pytest.approx(4.0, rel=0.01)


def test_shock_thickness_orders_sharp_vs_smooth():
    x = np.linspace(0.0, 10.0, 2001)
    sharp = 1.0 + np.tanh((x - 5.0) / 0.2)
    smooth = 1.0 + np.tanh((x - 5.0) / 0.8)
    assert (shock_thickness(x, sharp).thickness
            < shock_thickness(x, smooth).thickness)
