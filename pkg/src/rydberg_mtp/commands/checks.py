"""Density calibration and the time-domain cross-check of the Floquet solver."""

from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np

from rydberg_mtp.atom_data import (
    AtomicParams,
    DriveParams,
    ModulationParams,
    angular_to_mhz,
)
from rydberg_mtp.command import CommandContext, CommandDefinition, CommandOutcome
from rydberg_mtp.config import OracleBlock
from rydberg_mtp.errors import NumericalError
from rydberg_mtp.liouvillian import build_generators
from rydberg_mtp.medium import calibrate_density
from rydberg_mtp.output import Cell, Table
from rydberg_mtp.steady_state import (
    max_relative_deviation,
    solve_floquet,
    time_domain_oracle,
)

LOGGER = logging.getLogger(__name__)

ORACLE_COLUMNS = [
    "draw",
    "omega_mod_mhz",
    "rabi_probe_mhz",
    "rabi_coupling_mhz",
    "gamma_2_mhz",
    "transit_rate_mhz",
    "delta_p_mhz",
    "weak_deviation",
    "weak_periods",
    "report_deviation",
    "report_order2_residue",
]


def calibrate_command() -> CommandDefinition:
    """Create the calibrate command."""

    def handler(context: CommandContext) -> CommandOutcome:
        config = context.config
        params = config.atom.to_params()
        probe = None
        if config.cell.calibration_probe == "drive":
            probe = config.drive.to_drive().rabi_probe
        result = calibrate_density(
            config.cell.to_cell(),
            config.quadrature.build(params),
            params,
            config.cell.target_transmission,
            probe,
        )
        table = Table(
            columns=[
                "atomic_density_m3",
                "transmission",
                "optical_depth",
                "slice_absorption",
                "probe_rabi_mhz",
            ],
            rows=[
                (
                    result.atomic_density,
                    result.transmission,
                    result.optical_depth,
                    result.slice_absorption,
                    angular_to_mhz(result.probe_rabi),
                )
            ],
            metadata={"target_transmission": config.cell.target_transmission},
        )
        return CommandOutcome(
            tables={"calibrate": table},
            results={
                "atomic_density_m3": result.atomic_density,
                "transmission": result.transmission,
            },
        )

    return CommandDefinition(
        name="calibrate",
        description=(
            "Atomic density giving the target resonant probe transmission"
            " without coupling or RF."
        ),
        handler=handler,
        config_blocks=("cell", "atom", "quadrature"),
    )


def perturbed_case(
    params: AtomicParams,
    drive: DriveParams,
    omega_mod: float,
    rng: np.random.Generator,
    spread: float,
) -> tuple[AtomicParams, DriveParams, float]:
    """Scale rates, Rabi frequencies and ω_mod by factors in [1 − s, 1 + s].

    The probe detuning is drawn within ±s·Γ2 around the configured one and
    the ground-state feed follows the transit rate so the trace stays one.
    """

    def factor() -> float:
        return float(rng.uniform(1.0 - spread, 1.0 + spread))

    transit = params.transit_rate * factor()
    gamma_2 = params.gamma_2 * factor()
    new_params = replace(
        params, gamma_2=gamma_2, transit_rate=transit, feed_rate=transit
    )
    delta_p = drive.delta_p + float(rng.uniform(-spread, spread)) * gamma_2
    new_drive = replace(
        drive.with_probe_detuning(delta_p),
        rabi_probe=drive.rabi_probe * factor(),
        rabi_coupling=drive.rabi_coupling * factor(),
    )
    return new_params, new_drive, omega_mod * factor()


def _oracle_row(
    draw: int,
    params: AtomicParams,
    drive: DriveParams,
    omega_mod: float,
    block: OracleBlock,
    sign: float,
) -> tuple[tuple[Cell, ...], float]:
    def compare(beta: float) -> tuple[float, int, float]:
        mod = ModulationParams(omega_mod=omega_mod, beta=beta, sideband_sign=sign)
        generators = build_generators(params, drive, mod)
        reference = time_domain_oracle(
            generators,
            omega_mod,
            n_periods=block.max_periods,
            steps_per_period=block.steps_per_period,
            tolerance=block.settle_tolerance,
        )
        deviation = max_relative_deviation(
            solve_floquet(generators, omega_mod), reference.solution
        )
        return deviation, reference.periods, reference.order2_residue

    weak, periods, _ = compare(block.weak_beta)
    strong, _, residue = compare(block.report_beta)
    LOGGER.info(
        "draw %d: weak deviation %.3g, beta=%.3g deviation %.3g",
        draw,
        weak,
        block.report_beta,
        strong,
    )
    row: tuple[Cell, ...] = (
        draw,
        angular_to_mhz(omega_mod),
        angular_to_mhz(drive.rabi_probe),
        angular_to_mhz(drive.rabi_coupling),
        angular_to_mhz(params.gamma_2),
        angular_to_mhz(params.transit_rate),
        angular_to_mhz(drive.delta_p),
        weak,
        periods,
        strong,
        residue,
    )
    return row, weak


def oracle_check_command() -> CommandDefinition:
    """Create the oracle-check command.

    The Floquet solution must match the time-domain integration within the
    configured tolerance at the weak modulation depth; the deviation at the
    report depth is recorded together with the second-harmonic residue.
    """

    def handler(context: CommandContext) -> CommandOutcome:
        config = context.config
        block = config.oracle
        params = config.atom.to_params()
        drive = config.drive.to_drive()
        modulation = config.modulation.to_modulation()
        rng = np.random.default_rng(block.seed)
        rows: list[tuple[Cell, ...]] = []
        weak: list[float] = []
        for draw in range(block.points):
            case_params, case_drive, omega_mod = perturbed_case(
                params, drive, modulation.omega_mod, rng, block.spread
            )
            row, deviation = _oracle_row(
                draw,
                case_params,
                case_drive,
                omega_mod,
                block,
                modulation.sideband_sign,
            )
            rows.append(row)
            weak.append(deviation)
        worst = max(weak, default=0.0)
        failure = None
        if worst > block.tolerance:
            failure = NumericalError(
                "OracleMismatch",
                "Floquet and time-domain steady states disagree",
                {"max_deviation": worst, "tolerance": block.tolerance},
            )
        return CommandOutcome(
            tables={
                "oracle_check": Table(
                    columns=ORACLE_COLUMNS,
                    rows=rows,
                    metadata={"seed": block.seed, "spread": block.spread},
                )
            },
            results={
                "max_weak_deviation": worst,
                "tolerance": block.tolerance,
                "passed": failure is None,
            },
            failure=failure,
        )

    return CommandDefinition(
        name="oracle-check",
        description=(
            "Compare the Floquet steady state with direct time integration"
            " at seeded random operating points."
        ),
        handler=handler,
        config_blocks=("oracle", "drive", "modulation", "atom"),
    )
