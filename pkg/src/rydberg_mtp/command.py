"""Shared command definitions for the ``sim`` front end."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from typing import Any

from rydberg_mtp.analysis import Simulation
from rydberg_mtp.config import RunConfig
from rydberg_mtp.errors import NumericalError
from rydberg_mtp.medium import CalibrationResult, calibrate_density
from rydberg_mtp.output import Table

LOGGER = logging.getLogger(__name__)


@dataclass
class CommandContext:
    """Validated configuration plus the lazily calibrated simulation."""

    config: RunConfig
    threads: int
    calibration: CalibrationResult | None = None
    _simulation: Simulation | None = field(default=None, repr=False)

    def simulation(self) -> Simulation:
        """Build the simulation, calibrating N0 when the config leaves it open."""
        if self._simulation is not None:
            return self._simulation
        config = self.config
        params = config.atom.to_params()
        drive = config.drive.to_drive()
        grid = config.quadrature.build(params)
        cell = config.cell.to_cell()
        if config.cell.atomic_density_m3 is None:
            probe = None
            if config.cell.calibration_probe == "drive":
                probe = drive.rabi_probe
            self.calibration = calibrate_density(
                cell, grid, params, config.cell.target_transmission, probe
            )
            cell = config.cell.to_cell(self.calibration.atomic_density)
        self._simulation = Simulation(
            params=params,
            drive=drive,
            mod=config.modulation.to_modulation(),
            cell=cell,
            grid=grid,
            threads=self.threads,
        )
        return self._simulation

    def calibration_summary(self) -> dict[str, object]:
        """Calibration figures for the manifest (empty when N0 was given)."""
        if self.calibration is None:
            return {}
        return {
            "atomic_density_m3": self.calibration.atomic_density,
            "calibrated_transmission": self.calibration.transmission,
            "optical_depth": self.calibration.optical_depth,
            "slice_absorption": self.calibration.slice_absorption,
        }


@dataclass
class CommandOutcome:
    """Tables to write plus the summary recorded in the manifest.

    ``failure`` lets a command report a numerical verdict (exit status 3)
    after its artifacts have been written.
    """

    tables: dict[str, Table]
    results: dict[str, object] = field(default_factory=dict)
    diagnostics: dict[str, object] = field(default_factory=dict)
    failure: NumericalError | None = None


@dataclass
class CommandDefinition:
    """Description of a command that can be dispatched by ``sim``.

    Attributes:
        name: Unique name of the command.
        description: Human-readable description of the command purpose.
        handler: Callable that executes the command logic.
        config_blocks: Configuration blocks the command reads.

    """

    name: str
    description: str
    handler: Callable[[CommandContext], CommandOutcome]
    config_blocks: tuple[str, ...] = ()

    def run(self, context: CommandContext) -> CommandOutcome:
        """Execute the command."""
        LOGGER.info("running %s", self.name)
        return self.handler(context)

    def metadata(self) -> dict[str, Any]:
        """Return a discovery-friendly description of the command."""
        schema = RunConfig.model_json_schema()
        definitions = schema.get("$defs", {})
        blocks: dict[str, Any] = {}
        for block in self.config_blocks:
            reference = schema["properties"][block].get("$ref", "")
            blocks[block] = definitions.get(reference.rsplit("/", 1)[-1], {})
        return {
            "name": self.name,
            "description": self.description,
            "config_blocks": blocks,
        }
