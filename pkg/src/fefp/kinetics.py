"""Gas model, transport scales, and particle sampling utilities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Boltzmann constant [J/K], used only when converting SI inputs.
KB_SI = 1.380649e-23


class DegenerateCellError(ValueError):
    """Raised when a cell lacks the data for a well-posed closure."""


@dataclass(frozen=True)
class GasModel:
    """Monatomic gas with a power-law viscosity ``mu(T) = mu0 (T/T0)^omega``.

    ``interaction`` selects the production-term model: ``"maxwell"`` uses
    the exact Maxwell-molecule relaxation rates, ``"hard-sphere"`` keeps the
    same rate structure but evaluates them with the hard-sphere viscosity
    exponent ``omega = 0.5`` (a documented approximation).
    """

    molecular_mass: float = 1.0
    mu0: float = 1.0
    T0: float = 1.0
    omega: float = 0.5
    kB: float = 1.0
    interaction: str = "hard-sphere"

    def __post_init__(self):
        if self.molecular_mass <= 0 or self.mu0 <= 0 or self.T0 <= 0 or self.kB <= 0:
            raise ValueError("gas model scales must be positive")
        if self.interaction not in ("maxwell", "hard-sphere"):
            raise ValueError(f"unknown interaction {self.interaction!r}")
        if self.interaction == "hard-sphere" and self.omega != 0.5:
            raise ValueError("hard-sphere interaction requires omega = 0.5")
        if self.interaction == "maxwell" and self.omega != 1.0:
            raise ValueError("maxwell interaction requires omega = 1.0")

    @classmethod
    def nondimensional(cls, mu0: float = 1.0,
                       interaction: str = "hard-sphere") -> "GasModel":
        """Nondimensional gas: unit mass, unit reference temperature."""
        omega = 0.5 if interaction == "hard-sphere" else 1.0
        return cls(molecular_mass=1.0, mu0=mu0, T0=1.0, omega=omega,
                   kB=1.0, interaction=interaction)

    def temperature(self, theta: float):
        """Convert specific-energy temperature ``theta`` to model units."""
        return theta * self.molecular_mass / self.kB

    def viscosity(self, theta):
        """Dynamic viscosity at temperature ``theta = kB T / m``."""
        T = np.asarray(theta) * (self.molecular_mass / self.kB)
        return self.mu0 * (T / self.T0) ** self.omega

    def theta_ref(self) -> float:
        return self.kB * self.T0 / self.molecular_mass


def transport_scales(theta, rho, model: GasModel):
    """Return ``(mu, p, tau)`` with the relaxation time ``tau = 2 mu / p``.

    Accepts scalars or arrays; raises :class:`DegenerateCellError` for
    nonpositive scalar inputs.
    """
    theta_arr = np.asarray(theta, dtype=float)
    rho_arr = np.asarray(rho, dtype=float)
    if theta_arr.ndim == 0 and (theta_arr <= 0 or rho_arr <= 0):
        raise DegenerateCellError(
            f"nonpositive state (theta={float(theta_arr)}, rho={float(rho_arr)})"
        )
    mu = model.viscosity(theta_arr)
    p = rho_arr * theta_arr
    tau = 2.0 * mu / p
    if theta_arr.ndim == 0:
        return float(mu), float(p), float(tau)
    return mu, p, tau


def mean_free_path(theta, rho, model: GasModel):
    """Hard-sphere mean free path ``16 mu / (5 rho sqrt(2 pi theta))``."""
    mu = model.viscosity(theta)
    return 16.0 * mu / (5.0 * rho * np.sqrt(2.0 * np.pi * np.asarray(theta)))


def sound_speed(theta):
    """Adiabatic sound speed of a monatomic gas, ``sqrt(5 theta / 3)``."""
    return np.sqrt(5.0 * np.asarray(theta) / 3.0)


def sample_maxwellian(mean, theta: float, count: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` velocities from a Maxwellian at temperature ``theta``."""
    if theta <= 0:
        raise DegenerateCellError(f"nonpositive temperature {theta}")
    mean = np.asarray(mean, dtype=float)
    return mean + np.sqrt(theta) * rng.standard_normal((count, 3))


def stream_rng(seed: int, step: int, purpose: int) -> np.random.Generator:
    """Counter-style random stream keyed by ``(seed, step, purpose)``.

    Each (step, purpose) pair owns an independent Philox stream, so a run
    is reproducible regardless of how work is batched within a step.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(step), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class ParticleArray:
    """Structure-of-arrays particle storage.

    ``position`` has three columns; the third is unused by the planar
    scenarios but kept so the layout matches the velocity block.
    """

    position: np.ndarray
    velocity: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        self.position = np.atleast_2d(np.asarray(self.position, dtype=float))
        self.velocity = np.atleast_2d(np.asarray(self.velocity, dtype=float))
        if self.position.shape != self.velocity.shape or self.position.shape[1] != 3:
            raise ValueError("position and velocity must both have shape (N, 3)")

    def __len__(self) -> int:
        return self.position.shape[0]

    @property
    def mass(self) -> float:
        return self.weight * len(self)

    def select(self, mask_or_index) -> "ParticleArray":
        return ParticleArray(self.position[mask_or_index],
                             self.velocity[mask_or_index], self.weight)

    def extend(self, position, velocity) -> "ParticleArray":
        return ParticleArray(np.vstack([self.position, position]),
                             np.vstack([self.velocity, velocity]), self.weight)
