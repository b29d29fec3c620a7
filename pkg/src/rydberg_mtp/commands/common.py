"""Helpers shared by the command modules."""

from __future__ import annotations

import numpy as np

from rydberg_mtp.analysis import (
    Axis,
    MapResult,
    ProtocolName,
    SpectrumResult,
    linear_axis,
    slope_map,
)
from rydberg_mtp.command import CommandContext
from rydberg_mtp.config import SlopesBlock


def e_axis(start: float, stop: float, points: int) -> Axis:
    """Exterior RF field axis in V/m."""
    return linear_axis("e_rf_v_per_m", "V/m", start, stop, points)


def delta_rf_axis(start: float, stop: float, points: int) -> Axis:
    """RF detuning axis Δ_RF/2π in MHz."""
    return linear_axis("delta_rf_mhz", "MHz", start, stop, points)


def delta_p_axis(start: float, stop: float, points: int) -> Axis:
    """Probe detuning axis Δ_p/2π in MHz."""
    return linear_axis("delta_p_mhz", "MHz", start, stop, points)


def slope_axes(block: SlopesBlock) -> tuple[Axis, Axis]:
    """(E_RF, Δ_RF) axes of the slope maps."""
    return (
        e_axis(block.e_start_v_per_m, block.e_stop_v_per_m, block.e_points),
        delta_rf_axis(
            block.delta_rf_start_mhz, block.delta_rf_stop_mhz, block.delta_rf_points
        ),
    )


def protocol_slopes(context: CommandContext, protocol: ProtocolName) -> MapResult:
    """Slope map of one protocol on the grid of the ``slopes`` block."""
    config = context.config
    fields, detunings = slope_axes(config.slopes)
    return slope_map(
        context.simulation(),
        protocol,
        fields,
        detunings,
        config.slopes.fit_window,
        config.response.cp_delta_p_mhz,
        config.response.mtp_delta_p_mhz,
    )


def spectrum_summary(result: SpectrumResult) -> dict[str, object]:
    """Extremum of a spectrum for the manifest."""
    if result.axis.size == 0:
        return {"points": 0}
    best = int(np.argmax(result.values))
    return {
        "points": result.axis.size,
        "max_value": float(result.values[best]),
        "argmax": float(result.axis.values[best]),
    }


def map_argmax(result: MapResult) -> dict[str, object]:
    """Location and value of the largest map entry."""
    if result.values.size == 0:
        return {}
    j, i = np.unravel_index(int(np.argmax(result.values)), result.values.shape)
    return {
        "value": float(result.values[j, i]),
        result.x_axis.name: float(result.x_axis.values[i]),
        result.y_axis.name: float(result.y_axis.values[j]),
    }
