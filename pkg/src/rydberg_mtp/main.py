"""Entry point for the ``sim`` batch command line."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections.abc import Sequence
from pathlib import Path
from typing import NoReturn

from rydberg_mtp.analysis import convergence_diagnostics
from rydberg_mtp.command import CommandContext, CommandDefinition
from rydberg_mtp.commands import build_commands, command_index
from rydberg_mtp.config import load_config
from rydberg_mtp.errors import OutputError, SimulationError
from rydberg_mtp.output import emit, write_manifest
from rydberg_mtp.parallel import resolve_threads
from rydberg_mtp.provenance import (
    collect_provenance,
    package_version,
    print_runtime_report,
)

LOGGER = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def build_parser(commands: Sequence[CommandDefinition]) -> argparse.ArgumentParser:
    """Create the argument parser for the ``sim`` CLI."""
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Rydberg-atom RF receiver simulations (CP and MTP protocols)",
    )
    parser.add_argument(
        "command",
        choices=[command.name for command in commands],
        help="Simulation to run.",
    )
    parser.add_argument(
        "--config",
        type=Path,
        help="TOML or JSON configuration file (a previous manifest.json works too).",
    )
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="BLOCK.KEY=VALUE",
        help="Override one configuration value; may be repeated.",
    )
    parser.add_argument(
        "--out",
        type=Path,
        help="Output directory (defaults to run.out_dir).",
    )
    parser.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        default="WARNING",
        help="Logging threshold for messages on stderr (default: WARNING).",
    )
    return parser


def configure_logging(level: str) -> None:
    """Send log records to stderr in a compact one-line format."""
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def report_error(error: SimulationError) -> None:
    """Print the structured error payload to stderr."""
    print(json.dumps(error.to_dict(), default=str, sort_keys=True), file=sys.stderr)


def _unwritable(directory: Path, exc: OSError) -> NoReturn:
    raise OutputError(
        "OutputUnwritable",
        f"cannot write results to {directory}",
        {"path": str(directory), "reason": str(exc)},
    ) from exc


def run_command(
    definition: CommandDefinition,
    config_path: Path | None,
    overrides: list[str],
    out_dir: Path | None,
    argv: list[str],
) -> dict[str, object]:
    """Run one command, write its tables and manifest, return the summary.

    Raises:
        SimulationError: On configuration or numerical failure. A command that
            reports a failure after computing still gets its files written.
        OutputError: When the output directory or a result file cannot be
            written.

    """
    started = time.perf_counter()
    config = load_config(config_path, overrides)
    directory = out_dir if out_dir is not None else Path(config.run.out_dir)
    threads = resolve_threads(config.run.threads)
    context = CommandContext(config=config, threads=threads)
    outcome = definition.run(context)

    files: list[Path] = []
    try:
        for name, table in outcome.tables.items():
            files.extend(emit(table, directory, name))
    except OSError as exc:
        _unwritable(directory, exc)
    diagnostics = dict(outcome.diagnostics)
    if config.run.convergence_check:
        simulation = context.simulation()
        refined = config.quadrature.build(simulation.params, refinement=2)
        diagnostics["convergence"] = convergence_diagnostics(simulation, refined)
    results = {**context.calibration_summary(), **outcome.results}
    try:
        manifest = write_manifest(
            directory,
            command=definition.name,
            config=config.model_dump(mode="json"),
            version=package_version(),
            wall_time_s=time.perf_counter() - started,
            files=files,
            results=results,
            diagnostics=diagnostics,
            provenance=collect_provenance(config.run.threads, argv),
        )
    except OSError as exc:
        _unwritable(directory, exc)
    LOGGER.info("wrote %s", manifest)
    if outcome.failure is not None:
        raise outcome.failure
    return results


def main(argv: Sequence[str] | None = None) -> int:
    """Parse arguments, run the requested command and return the exit status."""
    raw = list(argv) if argv is not None else sys.argv[1:]
    if raw and raw[0] == "check-runtime":
        print_runtime_report()
        return 0
    if raw and raw[0] == "list":
        catalog = [command.metadata() for command in build_commands()]
        print(json.dumps(catalog, indent=2))
        return 0

    commands = command_index()
    parser = build_parser(list(commands.values()))
    args = parser.parse_args(raw)
    configure_logging(args.log_level)
    try:
        results = run_command(
            commands[args.command],
            args.config,
            args.overrides,
            args.out,
            ["sim", *raw],
        )
    except SimulationError as error:
        report_error(error)
        return error.exit_code
    print(json.dumps(results, default=str, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
