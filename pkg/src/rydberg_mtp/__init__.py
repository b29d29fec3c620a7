"""Simulation of Rydberg-atom RF receivers with a phase-modulated coupling beam."""

from rydberg_mtp.analysis import MapResult, Simulation, SpectrumResult
from rydberg_mtp.atom_data import (
    AtomicParams,
    DriveParams,
    ModulationParams,
    default_drive,
    default_rb85_params,
)
from rydberg_mtp.errors import (
    ConfigError,
    NumericalError,
    OutputError,
    SimulationError,
)
from rydberg_mtp.medium import CellConfig, VelocityGrid, maxwell_grid
from rydberg_mtp.provenance import package_version

__version__ = package_version()

__all__ = [
    "AtomicParams",
    "CellConfig",
    "ConfigError",
    "DriveParams",
    "MapResult",
    "ModulationParams",
    "NumericalError",
    "OutputError",
    "Simulation",
    "SimulationError",
    "SpectrumResult",
    "VelocityGrid",
    "__version__",
    "default_drive",
    "default_rb85_params",
    "maxwell_grid",
]
