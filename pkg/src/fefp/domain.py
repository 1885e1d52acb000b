"""Planar simulation domain: grid, boundaries, plate, and inflow sampling.

The domain is the rectangle ``[0, lx] x [0, ly]`` with a uniform cell grid.
Velocities stay three dimensional; only the first two position components
move.  Boundary events within a step are processed in flight-time order
per particle, so a trajectory can bounce off the plate and still leave
through an open edge within the same step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import erf

import numpy as np

EDGES = ("left", "right", "bottom", "top")
_EDGE_KINDS = ("inflow", "outflow", "specular")


@dataclass(frozen=True)
class Grid2D:
    """Uniform cell grid over the domain rectangle."""

    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1 or self.lx <= 0 or self.ly <= 0:
            raise ValueError("grid must have positive extent and cell counts")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def n_cells(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    def cell_ids(self, positions: np.ndarray) -> np.ndarray:
        """Bin positions; a point exactly on a face joins the higher cell."""
        ix = np.floor(positions[:, 0] / self.dx).astype(np.intp)
        iy = np.floor(positions[:, 1] / self.dy).astype(np.intp)
        ix = np.clip(ix, 0, self.nx - 1)
        iy = np.clip(iy, 0, self.ny - 1)
        return ix * self.ny + iy

    def cell_centers(self):
        x = (np.arange(self.nx) + 0.5) * self.dx
        y = (np.arange(self.ny) + 0.5) * self.dy
        return x, y


@dataclass(frozen=True)
class PlateSpec:
    """Infinitely thin diffuse isothermal plate on a vertical grid line.

    The plate occupies ``x = x_pos`` for ``0 <= y <= y_max`` and re-emits
    every impinging particle with a wall Maxwellian at ``theta_wall``.
    """

    x_pos: float
    y_max: float
    theta_wall: float


@dataclass(frozen=True)
class FreeStream:
    """Upstream state used by inflow edges."""

    rho: float
    theta: float
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "velocity",
                           np.asarray(self.velocity, dtype=float))


def inflow_flux(rho: float, theta: float, u_normal: float) -> float:
    """One-sided mass flux of a drifting Maxwellian through a plane.

    ``u_normal`` is the inward normal drift component; the speed ratio is
    ``s = u_normal / sqrt(2 theta)``.
    """
    s = u_normal / np.sqrt(2.0 * theta)
    return float(rho * np.sqrt(theta / (2.0 * np.pi))
                 * (np.exp(-s * s) + np.sqrt(np.pi) * s * (1.0 + erf(s))))


def sample_flux_normal(u_normal: float, theta: float, count: int,
                       rng: np.random.Generator) -> np.ndarray:
    """Exact flux-weighted half-Maxwellian normal speeds (all positive).

    Acceptance-rejection with the envelope
    ``u_n exp(-(v-u_n)^2/2 theta) + max(v-u_n, 0) exp(-(v-u_n)^2/2 theta)``
    for nonnegative drift; for negative drift the shifted Rayleigh alone
    dominates the target.
    """
    if count == 0:
        return np.empty(0)
    sq = np.sqrt(theta)
    out = np.empty(count)
    todo = np.arange(count)
    if u_normal >= 0.0:
        # envelope masses of the truncated-Gaussian and Rayleigh parts
        phi_pos = 0.5 * (1.0 + erf(u_normal / (sq * np.sqrt(2.0))))
        mass_gauss = u_normal * np.sqrt(2.0 * np.pi * theta) * phi_pos
        mass_ray = theta
        p_gauss = mass_gauss / (mass_gauss + mass_ray)
        while todo.size:
            n = todo.size
            pick_gauss = rng.random(n) < p_gauss
            v = np.empty(n)
            if np.any(pick_gauss):
                m = int(pick_gauss.sum())
                g = u_normal + sq * rng.standard_normal(m)
                while np.any(g <= 0.0):
                    bad = g <= 0.0
                    g[bad] = u_normal + sq * rng.standard_normal(int(bad.sum()))
                v[pick_gauss] = g
            if np.any(~pick_gauss):
                m = int((~pick_gauss).sum())
                v[~pick_gauss] = u_normal + sq * np.sqrt(2.0) * np.sqrt(
                    -np.log(rng.random(m)))
            accept = rng.random(n) * (u_normal + np.maximum(v - u_normal, 0.0)) < v
            out[todo[accept]] = v[accept]
            todo = todo[~accept]
    else:
        while todo.size:
            n = todo.size
            w = sq * np.sqrt(2.0) * np.sqrt(-np.log(rng.random(n)))
            v = u_normal + w
            accept = (v > 0.0) & (rng.random(n) * w < v)
            out[todo[accept]] = v[accept]
            todo = todo[~accept]
    return out


def sample_wall_velocity(theta_wall: float, normal_axis: int, normal_sign: float,
                         count: int, rng: np.random.Generator) -> np.ndarray:
    """Diffuse re-emission velocities from a resting wall."""
    v = np.sqrt(theta_wall) * rng.standard_normal((count, 3))
    v[:, normal_axis] = normal_sign * sample_flux_normal(0.0, theta_wall, count, rng)
    return v


@dataclass
class Domain:
    """Grid, boundary conditions, and optional plate of a planar scenario."""

    grid: Grid2D
    edges: dict[str, str]
    free_stream: FreeStream | None = None
    plate: PlateSpec | None = None

    def __post_init__(self):
        for edge in EDGES:
            kind = self.edges.get(edge)
            if kind not in _EDGE_KINDS:
                raise ValueError(f"edge {edge!r} has invalid condition {kind!r}")
            if kind == "inflow" and self.free_stream is None:
                raise ValueError("inflow edges need a free-stream state")
        if self.plate is not None:
            if not (0.0 < self.plate.x_pos < self.grid.lx):
                raise ValueError("plate must lie strictly inside the domain")

    # -- flight with boundary events -----------------------------------
    def propagate(self, positions: np.ndarray, velocities: np.ndarray,
                  remaining: np.ndarray, rng: np.random.Generator):
        """Advance particles by their remaining flight times.

        Handles plate hits, specular reflections, and open-edge deletions
        in flight-time order.  Returns ``(positions, velocities, alive)``.
        """
        x = positions[:, :2].copy()
        v = velocities.copy()
        rem = remaining.copy()
        alive = np.ones(x.shape[0], dtype=bool)
        grid = self.grid
        eps_t = 1e-14

        active = rem > 0.0
        for _ in range(64):
            if not np.any(active):
                break
            idx = np.nonzero(active)[0]
            xa, va, ra = x[idx], v[idx], rem[idx]
            times = np.full((5, idx.size), np.inf)
            # open edges: 0 left, 1 right, 2 bottom, 3 top, 4 plate
            with np.errstate(divide="ignore", invalid="ignore"):
                t = -xa[:, 0] / va[:, 0]
                times[0] = np.where((va[:, 0] < 0) & (t <= ra), t, np.inf)
                t = (grid.lx - xa[:, 0]) / va[:, 0]
                times[1] = np.where((va[:, 0] > 0) & (t <= ra), t, np.inf)
                t = -xa[:, 1] / va[:, 1]
                times[2] = np.where((va[:, 1] < 0) & (t <= ra), t, np.inf)
                t = (grid.ly - xa[:, 1]) / va[:, 1]
                times[3] = np.where((va[:, 1] > 0) & (t <= ra), t, np.inf)
                if self.plate is not None:
                    t = (self.plate.x_pos - xa[:, 0]) / va[:, 0]
                    ycross = xa[:, 1] + va[:, 1] * t
                    hit = ((t > eps_t) & (t <= ra)
                           & (ycross >= 0.0) & (ycross <= self.plate.y_max)
                           & (np.sign(xa[:, 0] - self.plate.x_pos)
                              != np.sign(xa[:, 0] + va[:, 0] * ra - self.plate.x_pos)))
                    times[4] = np.where(hit, t, np.inf)
            first = np.argmin(times, axis=0)
            t_event = times[first, np.arange(idx.size)]
            free = ~np.isfinite(t_event)

            # free flight to the end of the step
            done = idx[free]
            x[done] += v[done, :2] * rem[done][:, None]
            rem[done] = 0.0

            hit_idx = idx[~free]
            if hit_idx.size:
                te = t_event[~free]
                kind = first[~free]
                x[hit_idx] += v[hit_idx, :2] * te[:, None]
                rem[hit_idx] -= te
                for edge_code, name in enumerate(("left", "right", "bottom", "top")):
                    sel = hit_idx[kind == edge_code]
                    if not sel.size:
                        continue
                    cond = self.edges[name]
                    axis = 0 if edge_code < 2 else 1
                    if cond == "specular":
                        v[sel, axis] *= -1.0
                        # pin onto the face to avoid drifting outside
                        x[sel, axis] = 0.0 if edge_code in (0, 2) else (
                            grid.lx if axis == 0 else grid.ly)
                    else:
                        alive[sel] = False
                        rem[sel] = 0.0
                plate_sel = hit_idx[kind == 4]
                if plate_sel.size:
                    side = np.sign(v[plate_sel, 0])  # incoming direction
                    vnew = sample_wall_velocity(self.plate.theta_wall, 0, +1.0,
                                                plate_sel.size, rng)
                    vnew[:, 0] *= -side  # re-emit away from the plate
                    v[plate_sel] = vnew
                    x[plate_sel, 0] = self.plate.x_pos
            active = (rem > 0.0) & alive
        else:
            # safety: anything still bouncing after many events is dropped
            alive[active] = False

        out_pos = positions.copy()
        out_pos[:, :2] = x
        return out_pos, v, alive

    def move(self, positions: np.ndarray, velocities: np.ndarray, dt: float,
             rng: np.random.Generator):
        remaining = np.full(positions.shape[0], float(dt))
        return self.propagate(positions, velocities, remaining, rng)

    # -- injection ------------------------------------------------------
    def _edge_geometry(self, edge: str):
        grid = self.grid
        if edge == "left":
            return 0, +1.0, grid.ly
        if edge == "right":
            return 0, -1.0, grid.ly
        if edge == "bottom":
            return 1, +1.0, grid.lx
        if edge == "top":
            return 1, -1.0, grid.lx
        raise ValueError(edge)

    def inject(self, dt: float, particle_weight: float,
               rng: np.random.Generator):
        """Sample new particles entering through every inflow edge.

        Counts are Poisson distributed around the analytic one-sided flux;
        each particle enters at a uniform position on the edge and flies a
        uniform fraction of the step.  Returns the same triplet layout as
        :meth:`propagate` input: positions, velocities, remaining times.
        """
        fs = self.free_stream
        positions, velocities, remainders = [], [], []
        for edge in EDGES:
            if self.edges[edge] != "inflow":
                continue
            axis, sign, length = self._edge_geometry(edge)
            u_n = sign * fs.velocity[axis]
            flux = inflow_flux(fs.rho, fs.theta, u_n)
            expected = flux * length * dt / particle_weight
            count = int(rng.poisson(expected))
            if count == 0:
                continue
            pos = np.zeros((count, 3))
            along = rng.random(count) * length
            if axis == 0:
                pos[:, 0] = 0.0 if sign > 0 else self.grid.lx
                pos[:, 1] = along
            else:
                pos[:, 1] = 0.0 if sign > 0 else self.grid.ly
                pos[:, 0] = along
            vel = np.sqrt(fs.theta) * rng.standard_normal((count, 3))
            for t_axis in range(3):
                if t_axis != axis:
                    vel[:, t_axis] += fs.velocity[t_axis]
            vel[:, axis] = sign * sample_flux_normal(u_n, fs.theta, count, rng)
            positions.append(pos)
            velocities.append(vel)
            remainders.append(rng.random(count) * dt)
        if not positions:
            return (np.empty((0, 3)), np.empty((0, 3)), np.empty(0))
        return (np.vstack(positions), np.vstack(velocities),
                np.concatenate(remainders))
