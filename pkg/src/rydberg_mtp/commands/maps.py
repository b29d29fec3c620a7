"""Modulation map over (ω_mod, β)."""

from __future__ import annotations

from rydberg_mtp.analysis import linear_axis, modulation_map
from rydberg_mtp.command import CommandContext, CommandDefinition, CommandOutcome
from rydberg_mtp.commands.common import delta_p_axis, map_argmax
from rydberg_mtp.output import map_table


def map_command() -> CommandDefinition:
    """Create the map command (amplitude and slope layers in one table)."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.modulation_map
        amplitude, slope = modulation_map(
            context.simulation(),
            linear_axis(
                "omega_mod_mhz",
                "MHz",
                block.omega_start_mhz,
                block.omega_stop_mhz,
                block.omega_points,
            ),
            linear_axis(
                "beta", "1", block.beta_start, block.beta_stop, block.beta_points
            ),
            delta_p_axis(
                block.delta_p_start_mhz, block.delta_p_stop_mhz, block.delta_p_points
            ),
            block.slope_delta_p_mhz,
            block.slope_step_mhz,
            block.refine,
        )
        return CommandOutcome(
            tables={"map": map_table(amplitude, slope)},
            results={
                "amplitude_max": map_argmax(amplitude),
                "slope_max": map_argmax(slope),
            },
        )

    return CommandDefinition(
        name="map",
        description=(
            "Peak relative modulation amplitude and its probe-detuning slope"
            " over modulation frequency and depth."
        ),
        handler=handler,
        config_blocks=("modulation_map", "drive"),
    )
