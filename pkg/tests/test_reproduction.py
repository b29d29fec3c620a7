"""Acceptance-level runs against the reference operating values.

These take minutes of CPU and are deselected by default; run them with
``pytest -m reproduction``.
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from rydberg_mtp.analysis import (
    MapResult,
    Simulation,
    bandwidth,
    linear_axis,
    ratio_crossover,
    ratio_map,
    slope_map,
    spectrum,
)
from rydberg_mtp.command import CommandContext
from rydberg_mtp.commands import command_index
from rydberg_mtp.config import load_config

pytestmark = pytest.mark.reproduction


@pytest.fixture(scope="module")
def reference_sim() -> Simulation:
    """Default configuration with the calibrated density."""
    context = CommandContext(config=load_config(None), threads=8)
    return context.simulation()


@pytest.fixture(scope="module")
def slope_maps(reference_sim: Simulation) -> dict[str, MapResult]:
    """CP and MTP slope maps on the default grid."""
    fields = linear_axis("e_rf_v_per_m", "V/m", 0.0, 1.0, 51)
    detunings = linear_axis("delta_rf_mhz", "MHz", 0.0, 30.0, 101)
    return {
        protocol: slope_map(reference_sim, protocol, fields, detunings)
        for protocol in ("cp", "mtp")
    }


def test_calibrated_transmission() -> None:
    """Calibration reaches 34 % with less than 1 % loss per slice."""
    context = CommandContext(config=load_config(None), threads=1)
    context.simulation()
    assert context.calibration is not None
    assert context.calibration.transmission == pytest.approx(0.34, abs=1e-4)
    assert context.calibration.slice_absorption < 0.011


def test_destructive_interference_dip(reference_sim: Simulation) -> None:
    """The R.M.A spectrum has a sharp local minimum at zero probe detuning."""
    axis = linear_axis("delta_p_mhz", "MHz", -20.0, 20.0, 401)
    result = spectrum(reference_sim, "mtp", axis)
    centre = 200
    assert result.values[centre] <= result.values[centre - 1]
    assert result.values[centre] <= result.values[centre + 1]
    assert result.values[centre] <= 0.1 * float(np.max(result.values))


def _at_field(ratios: MapResult, e_rf: float) -> np.ndarray:
    return np.array(
        [np.interp(e_rf, ratios.x_axis.values, row) for row in ratios.values]
    )


def test_bandwidths(slope_maps: dict[str, MapResult]) -> None:
    """−6 dB and −10 dB bandwidths of both protocols near the simulated values."""
    config = load_config(None)
    field = config.bandwidth.probe_field_v_per_m
    gain = config.slopes.cp_gain
    cp = slope_maps["cp"]
    mtp = slope_maps["mtp"]
    cp_report = bandwidth(cp, cp, field, "cp", gain)
    mtp_report = bandwidth(mtp, cp, field, "mtp", gain)
    assert cp_report.reference_e_rf == field
    assert cp_report.contour_minus6.delta_rf_mhz == pytest.approx(3.5, rel=0.2)
    assert cp_report.contour_minus10.delta_rf_mhz == pytest.approx(5.5, rel=0.2)
    assert mtp_report.contour_minus6.delta_rf_mhz == pytest.approx(6.5, rel=0.25)
    assert mtp_report.contour_minus10.delta_rf_mhz == pytest.approx(17.0, rel=0.25)


def test_ratio_crossover(slope_maps: dict[str, MapResult]) -> None:
    """MTP overtakes CP a few MHz off resonance and wins by 10x further out."""
    config = load_config(None)
    field = config.ratio.crossover_field_v_per_m
    ratios = ratio_map(
        slope_maps["mtp"], slope_maps["cp"], config.ratio.floor, config.slopes.cp_gain
    )
    detunings = ratios.y_axis.values
    crossing = ratio_crossover(ratios, field)
    assert crossing == pytest.approx(3.0, abs=1.0)
    profile = _at_field(ratios, field)
    assert profile[detunings >= 5.0].min() > 2.0
    assert profile[(detunings >= 20.0) & (detunings <= 30.0)].max() > 10.0


def test_modulation_map_optima() -> None:
    """Amplitude peaks near (3.5 MHz, 0.25) and slope near (2 MHz, 0.25)."""
    outcome = command_index()["map"].run(
        CommandContext(config=load_config(None), threads=8)
    )
    amplitude = outcome.results["amplitude_max"]
    slope = outcome.results["slope_max"]
    assert isinstance(amplitude, dict)
    assert isinstance(slope, dict)
    assert amplitude["omega_mod_mhz"] == pytest.approx(3.5, abs=0.5)
    assert amplitude["beta"] == pytest.approx(0.25, abs=0.05)
    assert amplitude["value"] == pytest.approx(0.027, rel=0.3)
    assert slope["omega_mod_mhz"] == pytest.approx(2.0, abs=0.5)
    assert slope["beta"] == pytest.approx(0.25, abs=0.05)


def test_oracle_over_twenty_draws() -> None:
    """Floquet and time-domain solutions agree on 20 random operating points."""
    config = load_config(None, ["oracle.points=20"])
    outcome = command_index()["oracle-check"].run(
        CommandContext(config=config, threads=1)
    )
    assert outcome.failure is None
    worst = outcome.results["max_weak_deviation"]
    assert isinstance(worst, float)
    assert worst <= 1e-6


def test_thread_count_does_not_change_spectra(reference_sim: Simulation) -> None:
    """One and many threads give identical spectra."""
    axis = linear_axis("delta_p_mhz", "MHz", -5.0, 5.0, 41)
    serial = spectrum(replace(reference_sim, threads=1), "mtp", axis)
    parallel = spectrum(reference_sim, "mtp", axis)
    assert np.array_equal(serial.values, parallel.values)
