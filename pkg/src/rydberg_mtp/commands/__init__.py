"""Command registration helpers for the ``sim`` front end."""

from __future__ import annotations

from rydberg_mtp.command import CommandDefinition
from rydberg_mtp.commands.checks import calibrate_command, oracle_check_command
from rydberg_mtp.commands.maps import map_command
from rydberg_mtp.commands.rf import (
    bandwidth_command,
    ratio_command,
    response_command,
    sensitivity_command,
    slopes_command,
)
from rydberg_mtp.commands.spectra import scan_command, spectrum_command


def build_commands() -> list[CommandDefinition]:
    """Instantiate every command definition in presentation order."""
    return [
        calibrate_command(),
        spectrum_command(),
        map_command(),
        response_command(),
        slopes_command(),
        bandwidth_command(),
        ratio_command(),
        sensitivity_command(),
        scan_command(),
        oracle_check_command(),
    ]


def command_index() -> dict[str, CommandDefinition]:
    """Commands keyed by name."""
    return {command.name: command for command in build_commands()}
