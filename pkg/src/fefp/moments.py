"""Central velocity moments: exact Gaussian values and particle estimates.

All stored moments are *central* (taken about the bulk velocity) and carry
the mass density as a prefactor, i.e. ``m[alpha] = <(v - U)^alpha, f>`` for
a distribution of total mass ``rho``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from .polynomials import MAX_DEGREE, Polynomial, Term, multi_indices, norm_power

DEFAULT_MAX_ORDER = 8


# ---------------------------------------------------------------------------
# Exact Gaussian moments (pair-partition expansion)
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _pair_partition_sum(index_key: tuple[int, ...], cov_key: tuple[float, ...]) -> float:
    """Centered Gaussian moment E[v_{i1} ... v_{in}] for covariance ``cov``.

    ``index_key`` lists one axis per factor; ``cov_key`` is the flattened
    3x3 covariance.  Odd orders vanish; even orders reduce over pairings.
    """
    n = len(index_key)
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    first, rest = index_key[0], index_key[1:]
    total = 0.0
    for k in range(len(rest)):
        partner = rest[k]
        remaining = rest[:k] + rest[k + 1:]
        total += cov_key[3 * first + partner] * _pair_partition_sum(remaining, cov_key)
    return total


def gaussian_moment(alpha: Term, cov) -> float:
    """Central moment ``E[(v-U)^alpha]`` of a Gaussian with covariance ``cov``."""
    cov = np.asarray(cov, dtype=float)
    index_key = tuple([0] * alpha[0] + [1] * alpha[1] + [2] * alpha[2])
    return _pair_partition_sum(index_key, tuple(cov.ravel()))


def gaussian_central_moments(cov, rho: float = 1.0,
                             max_order: int = DEFAULT_MAX_ORDER) -> "MomentSet":
    """Moment set of a single Gaussian with covariance ``cov`` and mass ``rho``."""
    cov = np.asarray(cov, dtype=float)
    moments = {alpha: rho * gaussian_moment(alpha, cov)
               for alpha in multi_indices(max_order)}
    return MomentSet(rho=rho, mean=np.zeros(3), moments=moments, max_order=max_order)


def mixture_central_moments(weights, means, covs, rho: float = 1.0,
                            max_order: int = DEFAULT_MAX_ORDER) -> "MomentSet":
    """Moment set of a Gaussian mixture, centered about the mixture mean.

    ``weights`` must sum to one; ``rho`` scales the total mass.
    """
    weights = np.asarray(weights, dtype=float)
    means = np.asarray(means, dtype=float)
    if not np.isclose(weights.sum(), 1.0):
        raise ValueError("mixture weights must sum to one")
    mean = weights @ means
    moments = {alpha: 0.0 for alpha in multi_indices(max_order)}
    for w, mu, cov in zip(weights, means, covs):
        d = np.asarray(mu, dtype=float) - mean
        cov = np.asarray(cov, dtype=float)
        # E[(z + d)^alpha] expanded binomially per axis, z ~ N(0, cov).
        for alpha in moments:
            acc = 0.0
            for b1 in range(alpha[0] + 1):
                f1 = comb(alpha[0], b1) * d[0] ** (alpha[0] - b1)
                for b2 in range(alpha[1] + 1):
                    f2 = comb(alpha[1], b2) * d[1] ** (alpha[1] - b2)
                    for b3 in range(alpha[2] + 1):
                        f3 = comb(alpha[2], b3) * d[2] ** (alpha[2] - b3)
                        acc += f1 * f2 * f3 * gaussian_moment((b1, b2, b3), cov)
            moments[alpha] += rho * w * acc
    return MomentSet(rho=rho, mean=mean, moments=moments, max_order=max_order)


# ---------------------------------------------------------------------------
# Moment container
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MomentSet:
    """Central velocity moments of one cell (or one homogeneous ensemble).

    Attributes
    ----------
    rho
        Mass density carried by the distribution.
    mean
        Bulk velocity about which the moments are centered.
    moments
        ``m[alpha] = <(v-U)^alpha, f>`` for every ``|alpha| <= max_order``.
    """

    rho: float
    mean: np.ndarray
    moments: dict[Term, float]
    max_order: int = DEFAULT_MAX_ORDER

    def __post_init__(self):
        if self.rho <= 0.0:
            raise ValueError("rho must be positive")
        if self.max_order > MAX_DEGREE:
            raise ValueError(f"max_order cannot exceed {MAX_DEGREE}")
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))

    def moment(self, alpha: Term) -> float:
        return self.moments[tuple(alpha)]

    def contracted(self, power: int, alpha: Term = (0, 0, 0)) -> float:
        """Return ``<(v')^alpha * |v'|^power, f>`` for even ``power``."""
        poly = norm_power(power) * Polynomial.monomial(alpha)
        return expectation(poly, self)

    # -- hydrodynamic accessors ----------------------------------------
    @property
    def pressure_tensor(self) -> np.ndarray:
        """Second central moment tensor ``<v'_i v'_j, f>``."""
        out = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                alpha = [0, 0, 0]
                alpha[i] += 1
                alpha[j] += 1
                out[i, j] = self.moments[tuple(alpha)]
        return out

    @property
    def theta(self) -> float:
        """Temperature in specific-energy units, ``tr(Pi) / (3 rho)``."""
        return float(np.trace(self.pressure_tensor)) / (3.0 * self.rho)

    @property
    def pressure(self) -> float:
        return self.rho * self.theta

    @property
    def stress(self) -> np.ndarray:
        """Trace-free part of the pressure tensor."""
        pi = self.pressure_tensor
        return pi - np.eye(3) * (np.trace(pi) / 3.0)

    @property
    def heat_flux(self) -> np.ndarray:
        """``q_i = <v'_i |v'|^2, f> / 2``."""
        return 0.5 * np.array([self.contracted(2, _unit(i)) for i in range(3)])


def _unit(axis: int) -> Term:
    e = [0, 0, 0]
    e[axis] = 1
    return tuple(e)  # type: ignore[return-value]


def expectation(poly: Polynomial, ms: MomentSet) -> float:
    """Evaluate ``<P(v'), f>`` by central-moment lookup."""
    total = 0.0
    for term, coeff in poly.terms.items():
        if sum(term) > ms.max_order:
            raise ValueError(
                f"moment of order {sum(term)} not stored (max {ms.max_order})"
            )
        total += coeff * ms.moments[term]
    return total


# ---------------------------------------------------------------------------
# Particle estimates
# ---------------------------------------------------------------------------

def estimate_central_moments(velocities, rho: float = 1.0,
                             max_order: int = DEFAULT_MAX_ORDER) -> MomentSet:
    """Monte Carlo central moments of a velocity sample.

    The sample mean is used as the centering velocity, so the first
    central moments vanish identically.
    """
    v = np.asarray(velocities, dtype=float)
    if v.ndim != 2 or v.shape[1] != 3:
        raise ValueError("velocities must have shape (N, 3)")
    if v.shape[0] < 2:
        raise ValueError("need at least two particles")
    mean = v.mean(axis=0)
    dv = v - mean
    # Per-axis power tables keep the monomial products cheap.
    powers = [np.ones((max_order + 1, v.shape[0])) for _ in range(3)]
    for axis in range(3):
        for p in range(1, max_order + 1):
            powers[axis][p] = powers[axis][p - 1] * dv[:, axis]
    moments = {}
    for alpha in multi_indices(max_order):
        mono = powers[0][alpha[0]] * powers[1][alpha[1]] * powers[2][alpha[2]]
        moments[alpha] = rho * float(mono.mean())
    return MomentSet(rho=rho, mean=mean, moments=moments, max_order=max_order)
