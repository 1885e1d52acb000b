"""Matplotlib rendering of scenario results to image files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scenarios import HomogeneousResult, ShockResult

_STRESS_LABELS = (r"$\sigma_{11}$", r"$\sigma_{12}$", r"$\sigma_{13}$",
                  r"$\sigma_{22}$", r"$\sigma_{23}$", r"$\sigma_{33}$")


def render_homogeneous(result: HomogeneousResult, output_dir) -> list[Path]:
    """Time-series figures for the homogeneous relaxation run."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = []

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    for k in range(6):
        ax1.plot(result.times, result.stress[:, k], label=_STRESS_LABELS[k])
    ax1.set_xlabel("t")
    ax1.set_ylabel("stress")
    ax1.legend(fontsize=8, ncol=2)
    for k, lab in enumerate((r"$q_1$", r"$q_2$", r"$q_3$")):
        ax2.plot(result.times, result.heat_flux[:, k], label=lab)
    ax2.set_xlabel("t")
    ax2.set_ylabel("heat flux")
    ax2.legend(fontsize=8)
    fig.suptitle("Moment relaxation")
    fig.tight_layout()
    p = output_dir / "moments.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(result.times, result.entropy)
    ax1.set_xlabel("t")
    ax1.set_ylabel("H")
    ax1.set_title("Entropy")
    ax2.semilogy(result.times, np.maximum(result.fisher, 1e-16))
    ax2.set_xlabel("t")
    ax2.set_ylabel("I")
    ax2.set_title("Distance from equilibrium")
    fig.tight_layout()
    p = output_dir / "entropy.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)
    return paths


def render_shock(result: ShockResult, output_dir) -> list[Path]:
    """Field maps and the slice profile for the flat-plate run."""
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    grid = result.grid
    shape = (grid.nx, grid.ny)
    extent = (0.0, grid.lx, 0.0, grid.ly)

    fields = (("T", result.theta, "temperature"),
              ("rho", result.rho, "density"),
              ("Ma", result.mach, "Mach number"))
    fig, axes = plt.subplots(1, 3, figsize=(14, 4))
    for ax, (key, values, title) in zip(axes, fields):
        img = values.reshape(shape).T  # rows follow x2, columns x1
        im = ax.imshow(img, origin="lower", extent=extent, aspect="equal",
                       cmap="viridis")
        ax.set_title(title)
        ax.set_xlabel(r"$x_1$")
        ax.set_ylabel(r"$x_2$")
        fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    p = output_dir / "fields.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(result.slice_x, result.slice_temperature, label="T")
    ax.plot(result.slice_x, result.slice_density, label=r"$\rho$")
    ax.set_xlabel(r"$x_1$")
    ax.set_title(f"Profile at $x_2$ = {result.slice_y:.3f}")
    ax.legend()
    fig.tight_layout()
    p = output_dir / "slice.png"
    fig.savefig(p, dpi=150)
    plt.close(fig)
    paths.append(p)
    return paths


def render(result, output_dir) -> list[Path]:
    if isinstance(result, HomogeneousResult):
        return render_homogeneous(result, output_dir)
    return render_shock(result, output_dir)
