"""RF response, slope maps and the figures derived from them."""

from __future__ import annotations

from rydberg_mtp.analysis import (
    BandwidthReport,
    ContourCrossing,
    bandwidth,
    differentiate_response,
    ratio_crossover,
    ratio_map,
    response_curve,
    response_map,
    sensitivity_table,
)
from rydberg_mtp.command import CommandContext, CommandDefinition, CommandOutcome
from rydberg_mtp.commands.common import (
    e_axis,
    map_argmax,
    protocol_slopes,
    slope_axes,
    spectrum_summary,
)
from rydberg_mtp.output import Cell, Table, map_table, spectrum_table


def response_command() -> CommandDefinition:
    """Create the response command."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.response
        result = response_curve(
            context.simulation(),
            block.protocol,
            block.delta_rf_mhz,
            e_axis(block.e_start_v_per_m, block.e_stop_v_per_m, block.e_points),
            block.cp_delta_p_mhz,
            block.mtp_delta_p_mhz,
        )
        return CommandOutcome(
            tables={"response": spectrum_table(result)},
            results={"protocol": block.protocol, **spectrum_summary(result)},
        )

    return CommandDefinition(
        name="response",
        description="Detector observable versus exterior RF field.",
        handler=handler,
        config_blocks=("response", "drive", "modulation"),
    )


def slopes_command() -> CommandDefinition:
    """Create the slopes command (response and slope layers in one table)."""

    def handler(context: CommandContext) -> CommandOutcome:
        config = context.config
        fields, detunings = slope_axes(config.slopes)
        response = response_map(
            context.simulation(),
            config.slopes.protocol,
            fields,
            detunings,
            config.response.cp_delta_p_mhz,
            config.response.mtp_delta_p_mhz,
        )
        slopes = differentiate_response(response, config.slopes.fit_window)
        return CommandOutcome(
            tables={"slopes": map_table(response, slopes)},
            results={
                "protocol": config.slopes.protocol,
                "slope_max": map_argmax(slopes),
            },
        )

    return CommandDefinition(
        name="slopes",
        description="Response and its field derivative over (E_RF, Δ_RF).",
        handler=handler,
        config_blocks=("slopes", "response", "drive", "modulation"),
    )


def _crossing_row(protocol: str, crossing: ContourCrossing) -> tuple[Cell, ...]:
    return (protocol, crossing.level_db, crossing.status, crossing.delta_rf_mhz)


def _bandwidth_summary(report: BandwidthReport) -> dict[str, object]:
    return {
        "reference_slope": report.reference_slope,
        "reference_e_rf_v_per_m": report.reference_e_rf,
        "minus6_db_mhz": report.contour_minus6.delta_rf_mhz,
        "minus6_db_status": report.contour_minus6.status,
        "minus10_db_mhz": report.contour_minus10.delta_rf_mhz,
        "minus10_db_status": report.contour_minus10.status,
    }


def bandwidth_command() -> CommandDefinition:
    """Create the bandwidth command."""

    def handler(context: CommandContext) -> CommandOutcome:
        probe_field = context.config.bandwidth.probe_field_v_per_m
        gain = context.config.slopes.cp_gain
        cp_slopes = protocol_slopes(context, "cp")
        mtp_slopes = protocol_slopes(context, "mtp")
        reports = [
            bandwidth(cp_slopes, cp_slopes, probe_field, "cp", gain),
            bandwidth(mtp_slopes, cp_slopes, probe_field, "mtp", gain),
        ]
        rows = [
            _crossing_row(report.protocol, crossing)
            for report in reports
            for crossing in (report.contour_minus6, report.contour_minus10)
        ]
        contours = Table(
            columns=["protocol", "level_db", "status", "delta_rf_mhz"],
            rows=rows,
            metadata={"probe_field_v_per_m": probe_field},
        )
        cp_report, mtp_report = reports
        profiles = Table(
            columns=["delta_rf_mhz", "cp_abs_slope", "mtp_abs_slope"],
            rows=[
                (float(delta), float(cp), float(mtp))
                for delta, cp, mtp in zip(
                    cp_report.delta_rf_axis,
                    cp_report.profile,
                    mtp_report.profile,
                    strict=True,
                )
            ],
            metadata={
                "probe_field_v_per_m": probe_field,
                "reference_slope": cp_report.reference_slope,
                "cp_gain": gain,
            },
        )
        return CommandOutcome(
            tables={"bandwidth": contours, "bandwidth_profile": profiles},
            results={
                report.protocol: _bandwidth_summary(report) for report in reports
            },
        )

    return CommandDefinition(
        name="bandwidth",
        description=(
            "-6 dB and -10 dB RF bandwidths of both protocols against the"
            " gain-scaled resonant CP slope at the same field."
        ),
        handler=handler,
        config_blocks=("bandwidth", "slopes", "response"),
    )


def ratio_command() -> CommandDefinition:
    """Create the ratio command."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.ratio
        ratios = ratio_map(
            protocol_slopes(context, "mtp"),
            protocol_slopes(context, "cp"),
            block.floor,
            context.config.slopes.cp_gain,
        )
        crossover = ratio_crossover(ratios, block.crossover_field_v_per_m)
        return CommandOutcome(
            tables={"ratio": map_table(ratios)},
            results={
                "crossover_field_v_per_m": block.crossover_field_v_per_m,
                "crossover_delta_rf_mhz": crossover,
                "max_ratio": map_argmax(ratios),
            },
        )

    return CommandDefinition(
        name="ratio",
        description="Ratio of MTP to CP slope magnitudes over (E_RF, Δ_RF).",
        handler=handler,
        config_blocks=("ratio", "slopes", "response"),
    )


def sensitivity_command() -> CommandDefinition:
    """Create the sensitivity command."""

    def handler(context: CommandContext) -> CommandOutcome:
        block = context.config.sensitivity
        comparisons = sensitivity_table(
            protocol_slopes(context, "cp"),
            protocol_slopes(context, "mtp"),
            block.e_rf_v_per_m,
            block.delta_rf_mhz,
            block.noise_cp_v,
            block.noise_mtp_v,
            block.rbw_hz,
            block.responsivity_v,
            context.config.slopes.cp_gain,
        )
        rows: list[tuple[Cell, ...]] = [
            (
                item.delta_rf_mhz,
                item.e_rf,
                item.cp.slope,
                item.cp.sensitivity,
                item.cp.infinite,
                item.mtp.slope,
                item.mtp.sensitivity,
                item.mtp.infinite,
                item.improvement,
            )
            for item in comparisons
        ]
        table = Table(
            columns=[
                "delta_rf_mhz",
                "e_rf_v_per_m",
                "cp_slope",
                "cp_sensitivity",
                "cp_infinite",
                "mtp_slope",
                "mtp_sensitivity",
                "mtp_infinite",
                "improvement",
            ],
            rows=rows,
            metadata={
                "units": "V m^-1 Hz^-1/2",
                "rbw_hz": block.rbw_hz,
                "responsivity_v": block.responsivity_v,
                "cp_gain": context.config.slopes.cp_gain,
            },
        )
        return CommandOutcome(
            tables={"sensitivity": table},
            results={
                "improvement": [item.improvement for item in comparisons],
            },
        )

    return CommandDefinition(
        name="sensitivity",
        description="Noise-equivalent field of both protocols at fixed RF field.",
        handler=handler,
        config_blocks=("sensitivity", "slopes", "response"),
    )
