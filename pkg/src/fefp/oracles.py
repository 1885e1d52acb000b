"""Independent verification oracles: quadrature, projections, rate fits.

Nothing in here reuses the moment-lookup machinery; expectations are
computed by tensor Gauss-Hermite quadrature so the two paths can be
checked against each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import MomentSet, gaussian_central_moments, mixture_central_moments
from .polynomials import Polynomial

DEFAULT_NODES_PER_AXIS = 16


@dataclass(frozen=True)
class GaussianDensity:
    """Gaussian in velocity space with mass ``rho``."""

    mean: np.ndarray
    cov: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "cov", np.asarray(self.cov, dtype=float))
        np.linalg.cholesky(self.cov)  # fail fast on non-SPD input

    @property
    def bulk_velocity(self) -> np.ndarray:
        return self.mean

    def components(self):
        return [(self.rho, self.mean, self.cov)]

    def to_moments(self, max_order: int = 8) -> MomentSet:
        return gaussian_central_moments(self.cov, rho=self.rho, max_order=max_order)


@dataclass(frozen=True)
class GaussianMixtureDensity:
    """Convex combination of Gaussians with total mass ``rho``."""

    weights: np.ndarray
    means: np.ndarray
    covs: np.ndarray
    rho: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "means", np.asarray(self.means, dtype=float))
        object.__setattr__(self, "covs", np.asarray(self.covs, dtype=float))
        if not np.isclose(self.weights.sum(), 1.0):
            raise ValueError("mixture weights must sum to one")

    @property
    def bulk_velocity(self) -> np.ndarray:
        return self.weights @ self.means

    def components(self):
        return [(self.rho * w, m, c)
                for w, m, c in zip(self.weights, self.means, self.covs)]

    def to_moments(self, max_order: int = 8) -> MomentSet:
        return mixture_central_moments(self.weights, self.means, self.covs,
                                       rho=self.rho, max_order=max_order)


def quadrature_nodes(density, nodes_per_axis: int = DEFAULT_NODES_PER_AXIS):
    """Tensor Gauss-Hermite nodes/weights for every mixture component.

    Returns ``(points, weights)`` where the weights already include the
    component masses, so ``sum(w * P(points))`` integrates ``<P, f>``.
    Exact for polynomials of total degree ``<= 2 * nodes_per_axis - 1``.
    """
    x, w = np.polynomial.hermite.hermgauss(nodes_per_axis)
    grid = np.stack(np.meshgrid(x, x, x, indexing="ij"), axis=-1).reshape(-1, 3)
    wgrid = (w[:, None, None] * w[None, :, None] * w[None, None, :]).reshape(-1)
    wgrid = wgrid / np.pi ** 1.5
    points, weights = [], []
    for mass, mean, cov in density.components():
        chol = np.linalg.cholesky(np.asarray(cov, dtype=float))
        points.append(np.asarray(mean) + np.sqrt(2.0) * grid @ chol.T)
        weights.append(mass * wgrid)
    return np.vstack(points), np.concatenate(weights)


def quadrature_expectation(density, poly: Polynomial,
                           nodes_per_axis: int = DEFAULT_NODES_PER_AXIS) -> float:
    """Evaluate ``<P(v'), f>`` with ``v' = v - bulk velocity`` by quadrature."""
    pts, wts = quadrature_nodes(density, nodes_per_axis)
    return float(wts @ poly(pts - density.bulk_velocity))


def operator_projection(density, drift, diffusion: float, test_poly: Polynomial,
                        nodes_per_axis: int = DEFAULT_NODES_PER_AXIS) -> float:
    """Weak-form projection ``<H, S[f]> = <grad H . A, f> + D <lap H, f>``.

    ``drift`` is a callable mapping centered velocities ``(N, 3)`` to drift
    vectors ``(N, 3)`` (objects with an ``evaluate`` method also work).
    """
    drift_fn = getattr(drift, "evaluate", drift)
    pts, wts = quadrature_nodes(density, nodes_per_axis)
    vprime = pts - density.bulk_velocity
    a = np.asarray(drift_fn(vprime), dtype=float)
    grad = np.stack([g(vprime) for g in test_poly.gradient()], axis=-1)
    value = wts @ np.einsum("ni,ni->n", grad, a)
    value += diffusion * (wts @ test_poly.laplacian()(vprime))
    return float(value)


def fd_rate(times, values, window: slice | None = None):
    """Exponential decay rate of ``values ~ C exp(-rate t)`` by log fit.

    Returns ``(rate, stderr)`` from a least-squares line through
    ``log |values|``; a positive rate means decay.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is not None:
        t, y = t[window], y[window]
    if np.any(y == 0.0):
        raise ValueError("cannot fit a rate through zero values")
    logy = np.log(np.abs(y))
    design = np.stack([np.ones_like(t), t], axis=1)
    coef, residual, *_ = np.linalg.lstsq(design, logy, rcond=None)
    slope = coef[1]
    dof = max(len(t) - 2, 1)
    resid = logy - design @ coef
    var = float(resid @ resid) / dof
    tvar = float(np.sum((t - t.mean()) ** 2))
    stderr = np.sqrt(var / tvar) if tvar > 0 else np.inf
    return -float(slope), float(stderr)


def richardson_order(step_sizes, errors) -> float:
    """Estimated convergence order from a log-log least-squares fit."""
    h = np.log(np.asarray(step_sizes, dtype=float))
    e = np.log(np.asarray(errors, dtype=float))
    design = np.stack([np.ones_like(h), h], axis=1)
    coef, *_ = np.linalg.lstsq(design, e, rcond=None)
    return float(coef[1])


# -- randomized inputs for property-style tests -----------------------------

def random_spd_covariance(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    a = rng.standard_normal((3, 3))
    return scale * (a @ a.T + 0.3 * np.eye(3))


def random_gaussian(rng: np.random.Generator) -> GaussianDensity:
    return GaussianDensity(mean=rng.normal(scale=0.5, size=3),
                           cov=random_spd_covariance(rng),
                           rho=float(rng.uniform(0.5, 2.0)))


def random_mixture(rng: np.random.Generator, n_components: int = 2) -> GaussianMixtureDensity:
    w = rng.uniform(0.2, 1.0, size=n_components)
    w = w / w.sum()
    means = rng.normal(scale=0.6, size=(n_components, 3))
    covs = np.stack([random_spd_covariance(rng) for _ in range(n_components)])
    return GaussianMixtureDensity(weights=w, means=means, covs=covs,
                                  rho=float(rng.uniform(0.5, 2.0)))
