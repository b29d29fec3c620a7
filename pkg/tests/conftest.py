"""Shared test fixtures."""

from __future__ import annotations

import pytest

from rydberg_mtp.analysis import Simulation
from rydberg_mtp.atom_data import (
    AtomicParams,
    DriveParams,
    ModulationParams,
    default_drive,
    default_rb85_params,
    doppler_sigma,
    mhz_to_angular,
)
from rydberg_mtp.medium import CellConfig, VelocityGrid, maxwell_grid

# Keeps CLI runs to a few seconds: coarse quadrature, thin cell, fixed N0.
FAST_OVERRIDES = [
    "quadrature.kind=hermite",
    "quadrature.n_nodes=8",
    "cell.num_slices=4",
    "cell.atomic_density_m3=1e16",
    "run.threads=1",
]


@pytest.fixture()
def params() -> AtomicParams:
    """Rb-85 parameter set."""
    return default_rb85_params()


@pytest.fixture()
def drive() -> DriveParams:
    """Reference probe and coupling Rabi frequencies, all detunings zero."""
    return default_drive()


@pytest.fixture()
def modulation() -> ModulationParams:
    """Coupling modulation at 3 MHz with β = 0.25."""
    return ModulationParams(omega_mod=mhz_to_angular(3.0), beta=0.25)


@pytest.fixture()
def coarse_grid(params: AtomicParams) -> VelocityGrid:
    """Eight-node Gauss–Hermite grid; fast, not accurate."""
    return maxwell_grid(doppler_sigma(params), n_nodes=8, kind="hermite")


@pytest.fixture()
def thin_cell() -> CellConfig:
    """Four-slice cell at a moderate density."""
    return CellConfig(num_slices=4, atomic_density=1e16)


@pytest.fixture()
def small_sim(
    params: AtomicParams,
    drive: DriveParams,
    modulation: ModulationParams,
    thin_cell: CellConfig,
    coarse_grid: VelocityGrid,
) -> Simulation:
    """Simulation small enough for sweeps inside unit tests."""
    return Simulation(
        params=params,
        drive=drive,
        mod=modulation,
        cell=thin_cell,
        grid=coarse_grid,
        threads=1,
    )


@pytest.fixture()
def fast_overrides() -> list[str]:
    """``--set`` arguments that make a CLI run cheap."""
    args: list[str] = []
    for item in FAST_OVERRIDES:
        args.extend(["--set", item])
    return args
