"""Split-step velocity update: exact linear relaxation plus projection.

The linear part of the drift and the diffusion are integrated exactly as
an Ornstein-Uhlenbeck step over ``s = dt / tau``; the nonlinear drift is
added explicitly; a final per-cell projection restores momentum and
fluctuation energy to machine precision.
"""

from __future__ import annotations

import numpy as np

from .closure import CellDrift

# Trust-region bound on the explicit nonlinear increment, in units of the
# local thermal speed.  The nonlinear drift is solved from sampled moments
# and can be arbitrarily large in strongly non-Gaussian, noisy cells; an
# unbounded explicit step then ejects tail particles, and the conservation
# projection responds by collapsing the remaining fluctuations -- a
# self-amplifying artificial cooling.  Capping the per-step increment at a
# few thermal speeds leaves resolved cells untouched (their increments are
# O(dt/tau) of a thermal speed) while keeping the scheme stable.
DRIFT_KICK_LIMIT = 2.0


def ou_factors(tau, theta, dt):
    """Exact relaxation factor and noise std for the linear part.

    The noise variance ``theta (1 - exp(-2 s))`` is the stationary-exact
    Ornstein-Uhlenbeck increment for diffusion ``theta / tau``.
    """
    s = np.asarray(dt) / np.asarray(tau)
    decay = np.exp(-s)
    noise_std = np.sqrt(np.asarray(theta) * (1.0 - np.exp(-2.0 * s)))
    return decay, noise_std


def conservation_projection(half_step: np.ndarray, pre_fluct: np.ndarray,
                            mean_pre: np.ndarray) -> np.ndarray:
    """Restore cell momentum and fluctuation energy after the raw update."""
    centered = half_step - half_step.mean(axis=0)
    energy_new = float(np.einsum("ni,ni->", centered, centered))
    energy_old = float(np.einsum("ni,ni->", pre_fluct, pre_fluct))
    if energy_new <= 0.0:
        return np.broadcast_to(mean_pre, half_step.shape).copy()
    eps = np.sqrt(energy_old / energy_new)
    return mean_pre + eps * centered


def advance_cell_velocities(velocities: np.ndarray, coeffs, dt: float,
                            rng: np.random.Generator | None,
                            project: bool = True) -> np.ndarray:
    """Advance the velocities of one cell by ``dt``.

    ``coeffs`` must expose ``tau``, ``diffusion`` and
    ``evaluate_nonlinear``; passing ``rng=None`` disables the noise, which
    is useful for deterministic consistency checks.
    """
    v = np.asarray(velocities, dtype=float)
    if v.shape[0] < 2:
        return v.copy()
    mean = v.mean(axis=0)
    dv = v - mean
    theta = coeffs.diffusion * coeffs.tau
    decay, noise_std = ou_factors(coeffs.tau, theta, dt)
    half = decay * dv + dt * coeffs.evaluate_nonlinear(dv)
    if rng is not None:
        half = half + noise_std * rng.standard_normal(v.shape)
    if not project:
        return mean + half
    return conservation_projection(half, dv, mean)


def _nonlinear_drift_arrays(dv: np.ndarray, ids: np.ndarray,
                            drift: CellDrift) -> np.ndarray:
    """Per-particle nonlinear drift from per-cell coefficient arrays."""
    if drift.model == "linear":
        return np.zeros_like(dv)
    n2 = np.einsum("ni,ni->n", dv, dv)
    if drift.model == "fefp":
        c0 = drift.c0[ids]
        c1 = drift.c1[ids]
        c2 = drift.c2[ids]
        c3 = drift.c3[ids]
        c4 = drift.c4[ids]
        out = c0 + np.einsum("nij,nj->ni", c1, dv)
        out += c2 * n2[:, None] + 2.0 * np.einsum("ni,ni->n", dv, c2)[:, None] * dv
        out += (4.0 * c3 * n2 - c4 * n2 ** 2)[:, None] * dv
        return out
    if drift.model == "cubic":
        cmat = drift.cmat[ids]
        gamma = drift.gamma[ids]
        lam = drift.lam[ids]
        theta = drift.theta[ids]
        qv = drift.qvec[ids]
        rho = drift.rho[ids]
        out = np.einsum("nij,nj->ni", cmat, dv)
        out += gamma * (n2 - 3.0 * theta)[:, None]
        out += lam[:, None] * (n2[:, None] * dv - 2.0 * qv / rho[:, None])
        return out
    raise ValueError(f"unknown drift model {drift.model!r}")


def advance_cells(velocities: np.ndarray, cell_ids: np.ndarray, n_cells: int,
                  drift: CellDrift, dt: float,
                  rng: np.random.Generator) -> np.ndarray:
    """Advance all particle velocities with per-cell drift coefficients.

    Cells with fewer than two particles are left untouched.  Momentum and
    fluctuation energy are conserved exactly per cell by the projection.
    """
    v = np.asarray(velocities, dtype=float)
    counts = np.bincount(cell_ids, minlength=n_cells)
    safe = np.maximum(counts, 1)
    mean = np.stack([np.bincount(cell_ids, weights=v[:, i], minlength=n_cells)
                     for i in range(3)], axis=1) / safe[:, None]
    dv = v - mean[cell_ids]
    nl = _nonlinear_drift_arrays(dv, cell_ids, drift)
    # cells flagged invalid by the closure keep the pure linear relaxation
    if drift.model != "linear":
        nl[~drift.valid[cell_ids]] = 0.0
        limit = DRIFT_KICK_LIMIT * np.sqrt(np.maximum(drift.theta, 0.0))
        kick = dt * np.linalg.norm(nl, axis=1)
        cap = limit[cell_ids]
        over = kick > cap
        if np.any(over):
            nl[over] *= (cap[over] / kick[over])[:, None]
    decay, noise_std = ou_factors(drift.tau, drift.theta, dt)
    half = (decay[cell_ids, None] * dv + dt * nl
            + noise_std[cell_ids, None] * rng.standard_normal(v.shape))
    # per-cell projection, vectorized across cells
    half_mean = np.stack([np.bincount(cell_ids, weights=half[:, i], minlength=n_cells)
                          for i in range(3)], axis=1) / safe[:, None]
    centered = half - half_mean[cell_ids]
    e_old = np.bincount(cell_ids, weights=np.einsum("ni,ni->n", dv, dv),
                        minlength=n_cells)
    e_new = np.bincount(cell_ids, weights=np.einsum("ni,ni->n", centered, centered),
                        minlength=n_cells)
    eps = np.sqrt(np.where(e_new > 0.0, e_old / np.where(e_new > 0, e_new, 1.0), 0.0))
    out = mean[cell_ids] + eps[cell_ids, None] * centered
    frozen = counts < 2
    if np.any(frozen):
        keep = frozen[cell_ids]
        out[keep] = v[keep]
    return out


def stream(positions: np.ndarray, velocities: np.ndarray, dt: float) -> np.ndarray:
    """Free flight in the two spatial coordinates (third is ignored)."""
    out = positions.copy()
    out[:, :2] += velocities[:, :2] * dt
    return out
