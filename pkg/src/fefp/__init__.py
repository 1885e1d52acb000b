"""Stochastic particle solver for rarefied monatomic gas flows.

The collision operator is modeled as a Fokker-Planck drift-diffusion
process whose nonlinear drift is a gradient field solved per cell from
moment-matching and entropy-dissipation constraints, with linear-drift
and cubic-drift baselines for comparison.
"""

from .closure import (CellDrift, CubicCoefficients, DriftCoefficients,
                      LinearCoefficients, assemble_system, cubic_closure,
                      fefp_closure, fisher_constraint_residual,
                      linear_closure, particle_moment_tables, solve_cells)
from .config import ConfigError, SimulationConfig, load_config
from .diagnostics import (ShockMetrics, SteadyAccumulator,
                          gaussian_entropy_fisher, predicted_entropy_rate,
                          shock_thickness)
from .domain import Domain, FreeStream, Grid2D, PlateSpec, inflow_flux
from .integrator import advance_cell_velocities, advance_cells, stream
from .kinetics import (DegenerateCellError, GasModel, ParticleArray,
                       mean_free_path, sample_maxwellian, sound_speed,
                       stream_rng, transport_scales)
from .moments import (MomentSet, estimate_central_moments, expectation,
                      gaussian_central_moments, mixture_central_moments)
from .scenarios import (BlowUpError, HomogeneousResult, ShockResult,
                        run_homogeneous, run_scenario, run_shock)

__version__ = "0.1.0"

__all__ = [
    "BlowUpError", "CellDrift", "ConfigError", "CubicCoefficients",
    "DegenerateCellError", "Domain", "DriftCoefficients", "FreeStream",
    "GasModel", "Grid2D", "HomogeneousResult", "LinearCoefficients",
    "MomentSet", "ParticleArray", "PlateSpec", "ShockMetrics",
    "ShockResult", "SimulationConfig", "SteadyAccumulator",
    "advance_cell_velocities", "advance_cells", "assemble_system",
    "cubic_closure", "estimate_central_moments", "expectation",
    "fefp_closure", "fisher_constraint_residual",
    "gaussian_central_moments", "gaussian_entropy_fisher", "inflow_flux",
    "linear_closure", "load_config", "mean_free_path",
    "mixture_central_moments", "particle_moment_tables",
    "predicted_entropy_rate", "run_homogeneous", "run_scenario",
    "run_shock", "sample_maxwellian", "shock_thickness", "solve_cells",
    "sound_speed", "stream", "stream_rng", "transport_scales",
]
