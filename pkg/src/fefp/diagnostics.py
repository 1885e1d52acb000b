"""Entropy surrogates, steady-state accumulation, and shock metrics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def gaussian_entropy_fisher(pressure_tensor, theta_eq: float, rho: float = 1.0):
    """Gaussian-surrogate entropy functional and Fisher information.

    ``H = -1/2 log((2 pi e)^3 det Pi)`` is the value of ``<f log f>`` for a
    Gaussian with covariance ``Pi``; ``I = tr((I/theta_eq - Pi^-1)^2 Pi)``
    is its relative Fisher information against the equilibrium at
    ``theta_eq``.  ``Pi`` is the covariance (second central moments per
    unit mass).
    """
    pi = np.asarray(pressure_tensor, dtype=float) / rho
    sign, logdet = np.linalg.slogdet(pi)
    if sign <= 0:
        raise ValueError("pressure tensor must be positive definite")
    entropy = -0.5 * (3.0 * np.log(2.0 * np.pi * np.e) + logdet)
    dev = np.eye(3) / theta_eq - np.linalg.inv(pi)
    fisher = float(np.trace(dev @ dev @ pi))
    return float(entropy), fisher


def predicted_entropy_rate(theta: float, tau: float, fisher: float) -> float:
    """Model entropy production ``dH/dt = -(theta/tau) I``."""
    return -(theta / tau) * fisher


@dataclass
class SteadyAccumulator:
    """Running per-cell means of the hydrodynamic fields.

    Accumulates density, bulk velocity, and temperature samples cell by
    cell; ``n_samples`` counts how many steps contributed.
    """

    n_cells: int

    def __post_init__(self):
        self.n_samples = 0
        self._rho = np.zeros(self.n_cells)
        self._u = np.zeros((self.n_cells, 2))
        self._theta = np.zeros(self.n_cells)
        self._theta_sq = np.zeros(self.n_cells)

    def add(self, rho, u, theta):
        self.n_samples += 1
        self._rho += rho
        self._u += u[:, :2]
        self._theta += theta
        self._theta_sq += np.asarray(theta) ** 2

    @property
    def rho(self):
        return self._rho / max(self.n_samples, 1)

    @property
    def velocity(self):
        return self._u / max(self.n_samples, 1)

    @property
    def theta(self):
        return self._theta / max(self.n_samples, 1)

    @property
    def theta_std(self):
        n = max(self.n_samples, 1)
        var = self._theta_sq / n - (self._theta / n) ** 2
        return np.sqrt(np.maximum(var, 0.0))


@dataclass(frozen=True)
class ShockMetrics:
    """10-90 rise metrics of a temperature profile along one line."""

    x10: float
    x90: float
    thickness: float
    peak_value: float
    baseline: float


def shock_thickness(x, values, baseline: float | None = None) -> ShockMetrics:
    """10-90 rise thickness of the upstream front of a profile.

    Scans from the upstream (small ``x``) side to the profile peak and
    locates by linear interpolation where the rise first crosses 10% and
    90% of the peak-over-baseline jump.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(values, dtype=float)
    if baseline is None:
        baseline = float(y[0])
    k_peak = int(np.argmax(y))
    jump = y[k_peak] - baseline
    if jump <= 0:
        raise ValueError("profile has no upstream rise")

    def crossing(level: float) -> float:
        target = baseline + level * jump
        for k in range(1, k_peak + 1):
            if y[k] >= target and y[k - 1] < target:
                frac = (target - y[k - 1]) / (y[k] - y[k - 1])
                return float(x[k - 1] + frac * (x[k] - x[k - 1]))
        return float(x[k_peak])

    x10 = crossing(0.1)
    x90 = crossing(0.9)
    return ShockMetrics(x10=x10, x90=x90, thickness=x90 - x10,
                        peak_value=float(y[k_peak]), baseline=baseline)
