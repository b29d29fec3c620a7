"""Probe-detuning spectra and field scans."""

from __future__ import annotations

from rydberg_mtp.analysis import field_scan, spectrum
from rydberg_mtp.command import CommandContext, CommandDefinition, CommandOutcome
from rydberg_mtp.commands.common import (
    delta_p_axis,
    e_axis,
    map_argmax,
    spectrum_summary,
)
from rydberg_mtp.output import map_table, spectrum_table


def spectrum_command() -> CommandDefinition:
    """Create the spectrum command."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.spectrum
        axis = delta_p_axis(block.start_mhz, block.stop_mhz, block.points)
        result = spectrum(context.simulation(), block.protocol, axis)
        return CommandOutcome(
            tables={"spectrum": spectrum_table(result)},
            results={"protocol": block.protocol, **spectrum_summary(result)},
        )

    return CommandDefinition(
        name="spectrum",
        description=(
            "Transparency (cp) or relative modulation amplitude (mtp) versus"
            " probe detuning."
        ),
        handler=handler,
        config_blocks=("spectrum", "drive", "modulation"),
    )


def scan_command() -> CommandDefinition:
    """Create the scan command."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.scan
        result = field_scan(
            context.simulation(),
            block.protocol,
            delta_p_axis(
                block.delta_p_start_mhz, block.delta_p_stop_mhz, block.delta_p_points
            ),
            e_axis(block.e_start_v_per_m, block.e_stop_v_per_m, block.e_points),
            block.delta_rf_mhz,
        )
        return CommandOutcome(
            tables={"scan": map_table(result)},
            results={"protocol": block.protocol, "argmax": map_argmax(result)},
        )

    return CommandDefinition(
        name="scan",
        description="Spectra versus probe detuning for a range of RF fields.",
        handler=handler,
        config_blocks=("scan", "drive", "modulation"),
    )
