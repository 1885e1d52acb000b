"""Scenario drivers: homogeneous relaxation and the supersonic flat plate.

Both drivers write delimited text output (CSV with a header row) into the
requested directory and return an in-memory result object so tests and
plotting can consume the data without re-reading files.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .closure import (DEFAULT_EPS0, MOMENT_INDICES, particle_moment_tables,
                      solve_cells)
from .config import SimulationConfig
from .diagnostics import SteadyAccumulator, gaussian_entropy_fisher
from .domain import Domain, FreeStream, Grid2D, PlateSpec
from .integrator import advance_cells
from .kinetics import GasModel, sound_speed, stream_rng


class BlowUpError(RuntimeError):
    """The particle state became nonfinite (CLI exit code 3)."""


_IDX = {t: i for i, t in enumerate(MOMENT_INDICES)}
_TRACE_COLS = [_IDX[(2, 0, 0)], _IDX[(0, 2, 0)], _IDX[(0, 0, 2)]]
_PI_COLS = {(i, j): _IDX[tuple(np.bincount([i, j], minlength=3))]
            for i in range(3) for j in range(i, 3)}


def _cell_fields(table, rho):
    """Temperature, deviatoric stress (6), and heat flux (3) per cell."""
    rho_safe = np.where(rho > 0, rho, 1.0)
    theta = table[:, _TRACE_COLS].sum(axis=1) / (3.0 * rho_safe)
    sigma = np.empty((table.shape[0], 6))
    trace = table[:, _TRACE_COLS].sum(axis=1)
    for slot, (i, j) in enumerate(((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))):
        sigma[:, slot] = table[:, _PI_COLS[(i, j)]]
        if i == j:
            sigma[:, slot] -= trace / 3.0
    q = np.empty((table.shape[0], 3))
    for axis in range(3):
        e = [1, 1, 1]
        e[axis] += 2
        cols = [tuple(np.bincount([axis] * 3, minlength=3)),
                _pad(axis, (0, 2, 0) if axis != 1 else (2, 0, 0)),
                _pad(axis, (0, 0, 2) if axis != 2 else (2, 0, 0))]
        q[:, axis] = 0.5 * sum(table[:, _IDX[c]] for c in cols)
    return theta, sigma, q


def _pad(axis, base):
    e = list(base)
    e[axis] += 1
    return tuple(e)


def _initial_velocities(cfg: SimulationConfig, rng) -> np.ndarray:
    """Draw the homogeneous-relaxation initial ensemble (zero bulk velocity)."""
    n = cfg.n_particles
    if cfg.init == "gaussian":
        return rng.standard_normal((n, 3)) * np.sqrt(cfg.lambdas)[None, :]
    # Two-component mixture skewed along the x axis: zero mean, isotropic
    # pressure tensor with unit temperature, nonzero heat flux.
    w1, sep = cfg.weight, cfg.separation
    w2 = 1.0 - w1
    u1 = -w2 * sep
    u2 = w1 * sep
    var_drift = w1 * u1 ** 2 + w2 * u2 ** 2
    sx2 = 1.0 - var_drift
    if sx2 <= 0:
        raise ValueError("bigaussian separation too large for unit temperature")
    members = rng.random(n) < w1
    v = rng.standard_normal((n, 3))
    v[:, 0] *= np.sqrt(sx2)
    v[:, 0] += np.where(members, u1, u2)
    return v


@dataclass
class HomogeneousResult:
    times: np.ndarray
    stress: np.ndarray      # (n_out, 6): xx, xy, xz, yy, yz, zz
    heat_flux: np.ndarray   # (n_out, 3)
    entropy: np.ndarray
    fisher: np.ndarray
    res_moment: np.ndarray
    res_entropy: np.ndarray
    tau: float
    theta_eq: float
    csv_path: Path | None = None


def run_homogeneous(cfg: SimulationConfig, output_dir=None,
                    step_callback=None) -> HomogeneousResult:
    """Spatially homogeneous relaxation of a single ensemble."""
    gas = GasModel.nondimensional(interaction=cfg.interaction)
    n = cfg.n_particles
    velocities = _initial_velocities(cfg, stream_rng(cfg.seed, 0, 0))
    rho = np.array([1.0])
    counts = np.array([n])
    cell_ids = np.zeros(n, dtype=np.intp)
    theta_eq = float(np.mean(np.sum((velocities
                                     - velocities.mean(axis=0)) ** 2, axis=1)) / 3.0)
    dt = cfg.dt  # already in units of the reference relaxation time (tau = 2*mu/p)
    steps = cfg.steps_transient + cfg.steps_average

    rows = []
    tau_out = None
    for step in range(steps + 1):
        table = particle_moment_tables(velocities - velocities.mean(axis=0),
                                       cell_ids, 1, rho, counts)
        drift = solve_cells(table, rho, counts, gas, cfg.model, eps0=cfg.eps0)
        if tau_out is None:
            tau_out = float(drift.tau[0])
        if step % cfg.output_every == 0:
            theta, sigma, q = _cell_fields(table, rho)
            pi = np.empty((3, 3))
            for slot, (i, j) in enumerate(((0, 0), (0, 1), (0, 2),
                                           (1, 1), (1, 2), (2, 2))):
                pi[i, j] = pi[j, i] = table[0, _PI_COLS[(i, j)]]
            H, I = gaussian_entropy_fisher(pi, theta_eq)
            rm = float(drift.res_moment[0]) if drift.res_moment is not None else 0.0
            re = float(drift.res_entropy[0]) if drift.res_entropy is not None else 0.0
            rows.append((step * dt * tau_out, *sigma[0], *q[0], H, I, rm, re))
        if step == steps:
            break
        rng = stream_rng(cfg.seed, step + 1, 2)
        velocities = advance_cells(velocities, cell_ids, 1, drift,
                                   dt * tau_out, rng)
        if not np.all(np.isfinite(velocities)):
            raise BlowUpError(f"nonfinite velocities at step {step + 1}")
        if step_callback is not None:
            step_callback(step + 1, velocities)

    data = np.array(rows)
    result = HomogeneousResult(
        times=data[:, 0], stress=data[:, 1:7], heat_flux=data[:, 7:10],
        entropy=data[:, 10], fisher=data[:, 11],
        res_moment=data[:, 12], res_entropy=data[:, 13],
        tau=tau_out, theta_eq=theta_eq)
    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        path = output_dir / "relaxation.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "sxx", "sxy", "sxz", "syy", "syz", "szz",
                             "qx", "qy", "qz", "H", "I",
                             "res_moment", "res_entropy"])
            writer.writerows(data.tolist())
        result.csv_path = path
    return result


@dataclass
class ShockResult:
    grid: Grid2D
    rho: np.ndarray
    velocity: np.ndarray
    theta: np.ndarray
    mach: np.ndarray
    n_samples: np.ndarray
    slice_y: float
    slice_x: np.ndarray
    slice_temperature: np.ndarray
    slice_density: np.ndarray
    tau_ref: float
    fields_path: Path | None = None
    slice_path: Path | None = None
    extras: dict = field(default_factory=dict)


def shock_gas_model(cfg: SimulationConfig) -> GasModel:
    """Viscosity reference chosen so the hard-sphere mean free path of the
    unit free stream matches the requested Knudsen number (based on half
    the plate length)."""
    mu0 = cfg.knudsen * (cfg.plate_length / 2.0) * 5.0 * np.sqrt(2.0 * np.pi) / 16.0
    return GasModel.nondimensional(mu0=mu0, interaction=cfg.interaction)


def build_shock_domain(cfg: SimulationConfig) -> Domain:
    grid = Grid2D(nx=cfg.nx, ny=cfg.ny, lx=cfg.lx, ly=cfg.ly)
    u_inf = cfg.mach * sound_speed(1.0)
    free = FreeStream(rho=1.0, theta=1.0, velocity=np.array([u_inf, 0.0, 0.0]))
    edges = {"left": "inflow", "right": "outflow",
             "bottom": "specular", "top": "inflow"}
    plate = PlateSpec(x_pos=cfg.lx / 2.0, y_max=cfg.plate_length, theta_wall=1.0)
    return Domain(grid=grid, edges=edges, free_stream=free, plate=plate)


def run_shock(cfg: SimulationConfig, output_dir=None,
              step_callback=None) -> ShockResult:
    """Supersonic free stream over a vertical flat plate."""
    gas = shock_gas_model(cfg)
    domain = build_shock_domain(cfg)
    grid = domain.grid
    tau_ref = 2.0 * gas.mu0  # free stream has unit density and temperature
    dt = cfg.dt * tau_ref
    u_inf = domain.free_stream.velocity

    rng0 = stream_rng(cfg.seed, 0, 0)
    n0 = cfg.n_particles
    positions = rng0.random((n0, 3))
    positions[:, 0] *= grid.lx
    positions[:, 1] *= grid.ly
    positions[:, 2] = 0.0
    velocities = rng0.standard_normal((n0, 3)) + u_inf[None, :]
    weight = grid.lx * grid.ly / n0  # unit free-stream density

    steps = cfg.steps_transient + cfg.steps_average
    acc = SteadyAccumulator(grid.n_cells)
    sample_counts = np.zeros(grid.n_cells, dtype=np.int64)
    for step in range(steps):
        positions, velocities, alive = domain.move(
            positions, velocities, dt, stream_rng(cfg.seed, step, 1))
        positions, velocities = positions[alive], velocities[alive]

        ipos, ivel, irem = domain.inject(dt, weight, stream_rng(cfg.seed, step, 3))
        if len(ipos):
            ipos, ivel, ialive = domain.propagate(
                ipos, ivel, irem, stream_rng(cfg.seed, step, 4))
            positions = np.concatenate([positions, ipos[ialive]])
            velocities = np.concatenate([velocities, ivel[ialive]])

        ids = grid.cell_ids(positions)
        counts = np.bincount(ids, minlength=grid.n_cells)
        rho = weight * counts / grid.cell_area
        mean = np.empty((grid.n_cells, 3))
        safe = np.where(counts > 0, counts, 1)
        for axis in range(3):
            mean[:, axis] = np.bincount(ids, weights=velocities[:, axis],
                                        minlength=grid.n_cells) / safe
        dv = velocities - mean[ids]
        table = particle_moment_tables(dv, ids, grid.n_cells, rho, counts)
        drift = solve_cells(table, rho, counts, gas, cfg.model, eps0=cfg.eps0)

        if step >= cfg.steps_transient:
            theta = np.where(counts > 1,
                             table[:, _TRACE_COLS].sum(axis=1)
                             / (3.0 * np.where(rho > 0, rho, 1.0)), 0.0)
            acc.add(rho, mean, theta)
            sample_counts += counts

        pre = velocities
        velocities = advance_cells(velocities, ids, grid.n_cells, drift, dt,
                                   stream_rng(cfg.seed, step, 2))
        if not np.all(np.isfinite(velocities)):
            raise BlowUpError(f"nonfinite velocities at step {step + 1}")
        if step_callback is not None:
            step_callback(step=step, ids=ids, pre=pre, post=velocities,
                          drift=drift, n_cells=grid.n_cells)

    rho_m = acc.rho
    u_m = acc.velocity
    theta_m = acc.theta
    speed = np.linalg.norm(u_m, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        mach = np.where(theta_m > 0, speed / sound_speed(np.where(
            theta_m > 0, theta_m, 1.0)), 0.0)

    xc, yc = grid.cell_centers()
    # cell id layout is ix * ny + iy
    centers = np.stack([np.repeat(xc, grid.ny), np.tile(yc, grid.nx)], axis=1)
    row = min(int(cfg.slice_y / grid.dy), grid.ny - 1)
    sel = np.arange(grid.nx) * grid.ny + row
    result = ShockResult(
        grid=grid, rho=rho_m, velocity=u_m, theta=theta_m, mach=mach,
        n_samples=sample_counts, slice_y=(row + 0.5) * grid.dy,
        slice_x=centers[sel, 0], slice_temperature=theta_m[sel],
        slice_density=rho_m[sel], tau_ref=tau_ref)

    if output_dir is not None:
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        fpath = output_dir / "fields.csv"
        with open(fpath, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x1", "x2", "rho", "ux", "uy", "T",
                             "Ma", "n_samples"])
            for c in range(grid.n_cells):
                writer.writerow([centers[c, 0], centers[c, 1], rho_m[c],
                                 u_m[c, 0], u_m[c, 1], theta_m[c],
                                 mach[c], sample_counts[c]])
        spath = output_dir / "slice.csv"
        with open(spath, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x1", "rho", "T"])
            for i in range(grid.nx):
                writer.writerow([result.slice_x[i], result.slice_density[i],
                                 result.slice_temperature[i]])
        result.fields_path, result.slice_path = fpath, spath
    return result


def run_scenario(cfg: SimulationConfig, output_dir=None, step_callback=None):
    if cfg.scenario == "homogeneous":
        return run_homogeneous(cfg, output_dir, step_callback)
    return run_shock(cfg, output_dir, step_callback)
