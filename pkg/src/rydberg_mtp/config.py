"""Run configuration: schema, file loading and command-line overrides.

Frequencies are given as ν = ω/2π in MHz, fields in V/m, dipoles in e·a0,
the cell length in cm and wavelengths in nm. Conversion to the SI angular
units of the physics modules happens in the ``to_*`` helpers.
"""

from __future__ import annotations

import json
import logging
import tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from rydberg_mtp.atom_data import (
    ATOMIC_MASS,
    DEFAULT_PERTURBATION_FACTOR,
    RB85_MASS_AMU,
    AtomicParams,
    DriveParams,
    ModulationParams,
    doppler_sigma,
    ea0_to_si,
    mhz_to_angular,
)
from rydberg_mtp.analysis import CP_LOCK_IN_GAIN
from rydberg_mtp.errors import raise_config_error
from rydberg_mtp.medium import CellConfig, QuadratureKind, VelocityGrid, maxwell_grid

LOGGER = logging.getLogger(__name__)

Protocol = Literal["cp", "mtp"]


class ConfigBlock(BaseModel):
    """Base schema for configuration blocks; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")


class AtomBlock(ConfigBlock):
    """Atomic parameters; defaults are the Rb-85 set."""

    dipole_12_ea0: float = 1.96
    dipole_23_ea0: float = 0.01
    dipole_34_ea0: float = 2272.4
    gamma_2_mhz: float = 6.050
    gamma_3_mhz: float = 0.002
    gamma_4_mhz: float = 0.002
    transit_rate_mhz: float = 0.650
    feed_rate_mhz: float | None = None
    mass_amu: float = RB85_MASS_AMU
    lambda_probe_nm: float = 780.0
    lambda_coupling_nm: float = 480.0
    temperature_k: float = 293.15

    def to_params(self) -> AtomicParams:
        """Convert to SI units; the feed rate defaults to the transit rate."""
        feed = self.feed_rate_mhz
        if feed is None:
            feed = self.transit_rate_mhz
        return AtomicParams(
            dipole_12=ea0_to_si(self.dipole_12_ea0),
            dipole_23=ea0_to_si(self.dipole_23_ea0),
            dipole_34=ea0_to_si(self.dipole_34_ea0),
            gamma_2=mhz_to_angular(self.gamma_2_mhz),
            gamma_3=mhz_to_angular(self.gamma_3_mhz),
            gamma_4=mhz_to_angular(self.gamma_4_mhz),
            transit_rate=mhz_to_angular(self.transit_rate_mhz),
            feed_rate=mhz_to_angular(feed),
            mass=self.mass_amu * ATOMIC_MASS,
            lambda_probe=self.lambda_probe_nm * 1e-9,
            lambda_coupling=self.lambda_coupling_nm * 1e-9,
            temperature=self.temperature_k,
        )


class DriveBlock(ConfigBlock):
    """Rabi frequencies, RF field and detunings at the operating point."""

    rabi_probe_mhz: float = 1.32
    rabi_coupling_mhz: float = 2.38
    e_rf_v_per_m: float = 0.0
    perturbation_factor: float = DEFAULT_PERTURBATION_FACTOR
    delta_p_mhz: float = 0.0
    delta_2photon_mhz: float = 0.0
    delta_rf_mhz: float = 0.0

    def to_drive(self) -> DriveParams:
        """Convert to SI angular units."""
        return DriveParams(
            rabi_probe=mhz_to_angular(self.rabi_probe_mhz),
            rabi_coupling=mhz_to_angular(self.rabi_coupling_mhz),
            e_rf=self.e_rf_v_per_m,
            perturbation_factor=self.perturbation_factor,
            delta_p=mhz_to_angular(self.delta_p_mhz),
            delta_2photon=mhz_to_angular(self.delta_2photon_mhz),
            delta_rf=mhz_to_angular(self.delta_rf_mhz),
        )


class ModulationBlock(ConfigBlock):
    """Coupling phase modulation used by MTP commands."""

    omega_mod_mhz: float = 3.0
    beta: float = 0.25
    sideband_sign: Literal[1, -1] = 1

    def to_modulation(self) -> ModulationParams:
        """Convert to SI angular units."""
        return ModulationParams(
            omega_mod=mhz_to_angular(self.omega_mod_mhz),
            beta=self.beta,
            sideband_sign=float(self.sideband_sign),
        )


class CellBlock(ConfigBlock):
    """Cell geometry and density; a missing density triggers calibration."""

    length_cm: float = 7.5
    num_slices: int = 100
    atomic_density_m3: float | None = None
    target_transmission: float = 0.34
    calibration_probe: Literal["weak", "drive"] = "weak"
    attenuate_sidebands: bool = True
    max_slice_absorption: float = 0.02

    def to_cell(self, atomic_density: float | None = None) -> CellConfig:
        """Build the cell, optionally with a calibrated density."""
        density = self.atomic_density_m3 if atomic_density is None else atomic_density
        return CellConfig(
            length=self.length_cm * 1e-2,
            num_slices=self.num_slices,
            atomic_density=0.0 if density is None else density,
            attenuate_sidebands=self.attenuate_sidebands,
            max_slice_absorption=self.max_slice_absorption,
        )


class QuadratureBlock(ConfigBlock):
    """Velocity quadrature; node count and span default per kind."""

    kind: QuadratureKind = "composite"
    n_nodes: int | None = None
    span_sigmas: float | None = None
    core_sigmas: float = 0.3

    def build(self, params: AtomicParams, refinement: int = 1) -> VelocityGrid:
        """Quadrature for the thermal velocity spread of ``params``."""
        grid = maxwell_grid(
            doppler_sigma(params),
            self.n_nodes,
            self.span_sigmas,
            self.kind,
            self.core_sigmas,
        )
        if refinement == 1:
            return grid
        return maxwell_grid(
            doppler_sigma(params),
            refinement * grid.size,
            self.span_sigmas,
            self.kind,
            self.core_sigmas,
        )


class SpectrumBlock(ConfigBlock):
    """Probe-detuning sweep."""

    protocol: Protocol = "mtp"
    start_mhz: float = -20.0
    stop_mhz: float = 20.0
    points: int = 401


class ModulationMapBlock(ConfigBlock):
    """(ω_mod, β) optimisation map."""

    omega_start_mhz: float = 0.5
    omega_stop_mhz: float = 8.0
    omega_points: int = 31
    beta_start: float = 0.05
    beta_stop: float = 0.45
    beta_points: int = 21
    delta_p_start_mhz: float = 0.0
    delta_p_stop_mhz: float = 8.0
    delta_p_points: int = 9
    slope_delta_p_mhz: float = 0.1
    slope_step_mhz: float = 0.02
    refine: bool = True


class ResponseBlock(ConfigBlock):
    """Response curve versus RF field at one RF detuning."""

    protocol: Protocol = "cp"
    delta_rf_mhz: float = 0.0
    e_start_v_per_m: float = 0.0
    e_stop_v_per_m: float = 1.0
    e_points: int = 51
    cp_delta_p_mhz: float = 0.0
    mtp_delta_p_mhz: float = 0.1


class SlopesBlock(ConfigBlock):
    """Grid of the slope maps shared by slopes, bandwidth, ratio, sensitivity.

    ``cp_gain`` scales CP slopes wherever they are compared with MTP slopes.
    """

    protocol: Protocol = "cp"
    e_start_v_per_m: float = 0.0
    e_stop_v_per_m: float = 1.0
    e_points: int = 51
    delta_rf_start_mhz: float = 0.0
    delta_rf_stop_mhz: float = 30.0
    delta_rf_points: int = 101
    fit_window: int = 7
    cp_gain: float = Field(default=CP_LOCK_IN_GAIN, gt=0.0)


class BandwidthBlock(ConfigBlock):
    """Small-field evaluation point for the bandwidth contours."""

    probe_field_v_per_m: float = 0.07


class RatioBlock(ConfigBlock):
    """Guard for the MTP/CP slope ratio."""

    floor: float = 1e-6
    crossover_field_v_per_m: float = 0.05


class SensitivityBlock(ConfigBlock):
    """Inputs of the sensitivity table; noise voltages are user supplied."""

    e_rf_v_per_m: float = 0.05
    delta_rf_mhz: list[float] = Field(default_factory=lambda: [0, 5, 10, 20, 30])
    noise_cp_v: float = 1.0
    noise_mtp_v: float = 1.0
    rbw_hz: float = 1.0
    responsivity_v: float = 1.0


class ScanBlock(ConfigBlock):
    """Spectra versus probe detuning for a range of RF fields."""

    protocol: Protocol = "mtp"
    delta_p_start_mhz: float = -20.0
    delta_p_stop_mhz: float = 20.0
    delta_p_points: int = 201
    e_start_v_per_m: float = 0.0
    e_stop_v_per_m: float = 1.0
    e_points: int = 21
    delta_rf_mhz: float = 0.0


class OracleBlock(ConfigBlock):
    """Floquet versus time-domain comparison."""

    points: int = 5
    seed: int = 2024
    spread: float = 0.5
    weak_beta: float = 1e-6
    report_beta: float = 0.25
    steps_per_period: int = 2048
    max_periods: int = 4000
    settle_tolerance: float = 1e-13
    tolerance: float = 1e-6


class RunBlock(ConfigBlock):
    """Execution settings."""

    threads: int | None = None
    out_dir: str = "results"
    convergence_check: bool = False


class RunConfig(ConfigBlock):
    """Complete configuration of one ``sim`` invocation."""

    atom: AtomBlock = Field(default_factory=AtomBlock)
    drive: DriveBlock = Field(default_factory=DriveBlock)
    modulation: ModulationBlock = Field(default_factory=ModulationBlock)
    cell: CellBlock = Field(default_factory=CellBlock)
    quadrature: QuadratureBlock = Field(default_factory=QuadratureBlock)
    spectrum: SpectrumBlock = Field(default_factory=SpectrumBlock)
    modulation_map: ModulationMapBlock = Field(default_factory=ModulationMapBlock)
    response: ResponseBlock = Field(default_factory=ResponseBlock)
    slopes: SlopesBlock = Field(default_factory=SlopesBlock)
    bandwidth: BandwidthBlock = Field(default_factory=BandwidthBlock)
    ratio: RatioBlock = Field(default_factory=RatioBlock)
    sensitivity: SensitivityBlock = Field(default_factory=SensitivityBlock)
    scan: ScanBlock = Field(default_factory=ScanBlock)
    oracle: OracleBlock = Field(default_factory=OracleBlock)
    run: RunBlock = Field(default_factory=RunBlock)

    def check_physics(self) -> None:
        """Build every physical value type so its invariants are enforced."""
        params = self.atom.to_params()
        self.drive.to_drive()
        self.modulation.to_modulation()
        self.cell.to_cell()
        self.quadrature.build(params)
        if not 0.0 < self.cell.target_transmission <= 1.0:
            raise_config_error(
                "InvalidParameter",
                "target_transmission must lie in (0, 1]",
                self.cell.target_transmission,
            )


def read_config_file(path: Path) -> dict[str, Any]:
    """Read a TOML or JSON configuration file into a mapping.

    A run manifest is accepted as well; its echoed ``config`` block is used.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise_config_error("ConfigUnreadable", f"cannot read {path}", str(exc))
    try:
        if path.suffix.lower() == ".json":
            raw = json.loads(text)
        else:
            raw = tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise_config_error("ConfigSyntax", f"cannot parse {path}", str(exc))
    if not isinstance(raw, dict):
        raise_config_error("ConfigSyntax", "configuration must be a mapping")
    if "provenance" in raw and isinstance(raw.get("config"), dict):
        LOGGER.info("using the configuration echoed in manifest %s", path)
        return dict(raw["config"])
    return raw


def parse_override(text: str) -> tuple[list[str], object]:
    """Split ``a.b=value`` into its key path and a TOML-parsed value.

    Values that are not valid TOML (for example bare words) are kept as
    strings.
    """
    key, sep, value = text.partition("=")
    path = [part.strip() for part in key.split(".")]
    if not sep or not all(path):
        raise_config_error(
            "InvalidOverride", "overrides must look like block.key=value", text
        )
    try:
        parsed: object = tomllib.loads(f"value = {value.strip()}")["value"]
    except tomllib.TOMLDecodeError:
        parsed = value.strip()
    return path, parsed


def apply_overrides(raw: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Return a copy of ``raw`` with every ``--set`` override applied."""
    merged = json.loads(json.dumps(raw))
    for text in overrides:
        path, value = parse_override(text)
        node = merged
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise_config_error(
                    "InvalidOverride", f"'{part}' is not a configuration block", text
                )
            node = child
        node[path[-1]] = value
    return dict(merged)


def validate_config(raw: dict[str, Any]) -> RunConfig:
    """Validate a raw mapping against the schema and the physical invariants."""
    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as error:
        details = json.loads(error.json(include_url=False))
        raise_config_error("ValidationError", "invalid configuration", details)
    config.check_physics()
    return config


def load_config(path: Path | None, overrides: list[str] | None = None) -> RunConfig:
    """Read, override and validate a configuration (defaults when no path)."""
    raw = {} if path is None else read_config_file(path)
    return validate_config(apply_overrides(raw, overrides or []))
