"""Run configuration: INI-style key/value files with sections.

Grammar
-------
A configuration file is standard INI text parsed by ``configparser``:

    [simulation]
    scenario        = homogeneous | shock_plate
    model           = fefp | cubic | linear
    seed            = <int>
    dt              = <float>      ; step in units of the reference tau
    steps_transient = <int>
    steps_average   = <int>
    n_particles     = <int>        ; at least 1000
    output_every    = <int>        ; sampling stride for time series
    eps0            = <float>      ; stabilizer magnitude

    [gas]
    interaction = hard-sphere | maxwell

    [domain]            ; shock_plate only
    nx = <int>          ny = <int>
    lx = <float>        ly = <float>     ; in units of the plate length
    mach = <float>
    knudsen = <float>   ; based on half the plate length
    plate_length = <float>
    slice_y = <float>   ; profile extraction height

    [homogeneous]       ; homogeneous only
    init = gaussian | bigaussian
    lambda1 = <float>  lambda2 = <float>  lambda3 = <float>
    weight = <float>   separation = <float>    ; bigaussian shape
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    """Invalid or missing configuration input (CLI exit code 2)."""


@dataclass
class SimulationConfig:
    scenario: str = "homogeneous"
    model: str = "fefp"
    seed: int = 0
    dt: float = 0.01
    steps_transient: int = 0
    steps_average: int = 100
    n_particles: int = 100_000
    output_every: int = 1
    eps0: float = 1.0e-3
    interaction: str = "hard-sphere"
    # shock scenario
    nx: int = 60
    ny: int = 60
    lx: float = 2.5
    ly: float = 3.0
    mach: float = 4.0
    knudsen: float = 0.14
    plate_length: float = 1.0
    slice_y: float = 1.875
    # homogeneous scenario
    init: str = "gaussian"
    lambdas: np.ndarray = field(default_factory=lambda: np.ones(3))
    weight: float = 0.85
    separation: float = 1.2
    output_dir: Path = Path(".")

    def validate(self) -> "SimulationConfig":
        if self.scenario not in ("homogeneous", "shock_plate"):
            raise ConfigError(f"unknown scenario {self.scenario!r}")
        if self.model not in ("fefp", "cubic", "linear"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.interaction not in ("hard-sphere", "maxwell"):
            raise ConfigError(f"unknown interaction {self.interaction!r}")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.n_particles < 1000:
            raise ConfigError("n_particles must be at least 1000")
        if self.steps_transient < 0 or self.steps_average < 1:
            raise ConfigError("step counts must be nonnegative / positive")
        if self.output_every < 1:
            raise ConfigError("output_every must be at least 1")
        if self.scenario == "shock_plate":
            if self.knudsen <= 0:
                raise ConfigError("knudsen must be positive")
            if self.mach <= 1:
                raise ConfigError("the plate scenario needs a supersonic stream")
            if not (0 < self.plate_length < self.ly):
                raise ConfigError("plate_length must fit inside the domain")
            if not (0 < self.slice_y < self.ly):
                raise ConfigError("slice_y must lie inside the domain")
            if self.nx < 4 or self.ny < 4:
                raise ConfigError("the shock grid needs at least 4x4 cells")
        if self.scenario == "homogeneous":
            if self.init not in ("gaussian", "bigaussian"):
                raise ConfigError(f"unknown init {self.init!r}")
            if self.init == "gaussian" and np.any(np.asarray(self.lambdas) <= 0):
                raise ConfigError("gaussian init needs positive variances")
            if self.init == "bigaussian" and not (0 < self.weight < 1):
                raise ConfigError("bigaussian weight must lie in (0, 1)")
        return self


_SIM_FIELDS = {
    "scenario": str, "model": str, "seed": int, "dt": float,
    "steps_transient": int, "steps_average": int, "n_particles": int,
    "output_every": int, "eps0": float,
}
_DOMAIN_FIELDS = {
    "nx": int, "ny": int, "lx": float, "ly": float, "mach": float,
    "knudsen": float, "plate_length": float, "slice_y": float,
}
_HOMOGENEOUS_FIELDS = {"init": str, "weight": float, "separation": float}


def load_config(path) -> SimulationConfig:
    """Parse and validate a configuration file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc

    cfg = SimulationConfig()
    try:
        for key, cast in _SIM_FIELDS.items():
            if parser.has_option("simulation", key):
                setattr(cfg, key, cast(parser.get("simulation", key)))
        if parser.has_option("gas", "interaction"):
            cfg.interaction = parser.get("gas", "interaction")
        for key, cast in _DOMAIN_FIELDS.items():
            if parser.has_option("domain", key):
                setattr(cfg, key, cast(parser.get("domain", key)))
        for key, cast in _HOMOGENEOUS_FIELDS.items():
            if parser.has_option("homogeneous", key):
                setattr(cfg, key, cast(parser.get("homogeneous", key)))
        if parser.has_option("homogeneous", "lambda1"):
            cfg.lambdas = np.array([
                float(parser.get("homogeneous", f"lambda{i}")) for i in (1, 2, 3)])
    except (ValueError, configparser.Error) as exc:
        raise ConfigError(f"invalid value in {path}: {exc}") from exc

    unknown = set(parser.sections()) - {"simulation", "gas", "domain", "homogeneous"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    return cfg.validate()
