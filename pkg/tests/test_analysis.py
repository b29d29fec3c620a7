"""Sweeps, slope fits, bandwidth contours, sensitivity and ratios."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from rydberg_mtp.analysis import (
    Axis,
    MapResult,
    Simulation,
    bandwidth,
    contour_crossing,
    convergence_diagnostics,
    differentiate_response,
    field_scan,
    first_crossing,
    linear_axis,
    modulation_map,
    ratio_crossover,
    ratio_map,
    response_curve,
    response_map,
    sensitivity,
    sensitivity_table,
    slope_at,
    spectrum,
    windowed_derivative,
)
from rydberg_mtp.atom_data import doppler_sigma
from rydberg_mtp.errors import ConfigError, NumericalError
from rydberg_mtp.medium import maxwell_grid


def _map(values: np.ndarray, x: np.ndarray, y: np.ndarray, name: str) -> MapResult:
    return MapResult(
        x_axis=Axis("e_rf_v_per_m", "V/m", x),
        y_axis=Axis("delta_rf_mhz", "MHz", y),
        values=values,
        value_name=name,
    )


def _resolved(sim: Simulation) -> Simulation:
    # Eight Hermite nodes miss the slow atoms that carry the EIT peak.
    return replace(sim, grid=maxwell_grid(doppler_sigma(sim.params)))


def test_linear_axis_edge_cases() -> None:
    """Zero points give an empty axis, one point the start value."""
    assert linear_axis("x", "1", 0.0, 1.0, 0).size == 0
    assert linear_axis("x", "1", 2.0, 5.0, 1).values.tolist() == [2.0]
    with pytest.raises(ConfigError):
        Axis("x", "1", np.array([0.0, 0.0]))
    with pytest.raises(ConfigError):
        linear_axis("x", "1", 0.0, 1.0, -1)


def test_map_shape_is_checked() -> None:
    """Values must be shaped (len(y), len(x))."""
    with pytest.raises(NumericalError):
        _map(np.zeros((2, 3)), np.arange(2.0), np.arange(3.0), "v")


def test_windowed_derivative_is_exact_for_cubics() -> None:
    """A cubic fit differentiates a cubic exactly, edges included."""
    x = np.linspace(-1.0, 2.0, 15)
    y = x**3 - 2.0 * x + 0.5
    assert np.allclose(windowed_derivative(x, y, 7), 3.0 * x**2 - 2.0, atol=1e-9)
    with pytest.raises(NumericalError):
        windowed_derivative(x[:3], y[:3])
    with pytest.raises(ConfigError):
        windowed_derivative(x, y, 3)


def test_contour_crossing_of_a_lorentzian() -> None:
    """A unit Lorentzian of width w falls to −6 dB near w and −10 dB near 1.5w."""
    axis = np.linspace(0.0, 10.0, 10001)
    profile = 1.0 / (1.0 + (axis / 2.0) ** 2)
    minus6 = contour_crossing(axis, profile, 1.0, -6.0)
    minus10 = contour_crossing(axis, profile, 1.0, -10.0)
    expected6 = 2.0 * math.sqrt(10.0 ** (6.0 / 20.0) - 1.0)
    expected10 = 2.0 * math.sqrt(10.0 ** (10.0 / 20.0) - 1.0)
    assert minus6.status == "crossed"
    assert minus6.delta_rf_mhz == pytest.approx(expected6, abs=1e-4)
    assert minus10.delta_rf_mhz == pytest.approx(expected10, abs=1e-4)


def test_contour_statuses() -> None:
    """Open, below and undefined outcomes are reported, not raised."""
    axis = np.linspace(0.0, 5.0, 6)
    assert contour_crossing(axis, np.ones(6), 1.0, -6.0).status == "open"
    assert contour_crossing(axis, np.ones(6), 1.0, -6.0).delta_rf_mhz == 5.0
    assert contour_crossing(axis, np.full(6, 0.1), 1.0, -6.0).status == "below"
    assert contour_crossing(axis, np.zeros(6), 0.0, -6.0).status == "undefined"


def test_bandwidth_of_flat_zero_map_is_undefined() -> None:
    """A slope map that is zero everywhere yields undefined contours."""
    x = np.linspace(0.0, 1.0, 5)
    y = np.linspace(0.0, 30.0, 4)
    flat = _map(np.zeros((4, 5)), x, y, "slope")
    report = bandwidth(flat, flat, 0.05)
    assert report.reference_slope == 0.0
    assert report.contour_minus6.status == "undefined"
    assert report.contour_minus10.status == "undefined"


def test_bandwidth_reference_is_read_at_the_profile_field() -> None:
    """Reference and profile come from the same field, so CP contours are scale-free."""
    x = np.linspace(0.0, 1.0, 11)
    y = np.linspace(0.0, 20.0, 201)
    lorentz = 1.0 / (1.0 + (y / 4.0) ** 2)
    cp = _map(-np.outer(lorentz, np.exp(-x)), x, y, "cp")
    expected6 = 4.0 * math.sqrt(10.0 ** (6.0 / 20.0) - 1.0)
    at_zero = bandwidth(cp, cp, 0.0)
    assert at_zero.reference_slope == pytest.approx(1.0)
    assert at_zero.reference_e_rf == 0.0
    assert at_zero.contour_minus6.delta_rf_mhz == pytest.approx(expected6, abs=0.01)
    at_half = bandwidth(cp, cp, 0.5)
    assert at_half.reference_slope == pytest.approx(math.exp(-0.5))
    assert at_half.reference_e_rf == 0.5
    assert at_half.contour_minus6.delta_rf_mhz == pytest.approx(expected6, abs=0.01)
    scaled = bandwidth(cp, cp, 0.5, "cp", cp_gain=0.5)
    assert scaled.reference_slope == pytest.approx(0.5 * math.exp(-0.5))
    assert scaled.contour_minus6.delta_rf_mhz == pytest.approx(
        at_half.contour_minus6.delta_rf_mhz
    )
    mtp = _map(np.full((y.size, x.size), 0.6), x, y, "mtp")
    flat = bandwidth(mtp, cp, 0.0, protocol="mtp")
    assert flat.contour_minus6.status == "open"
    assert flat.contour_minus10.status == "open"


def test_bandwidth_compares_mtp_with_scaled_cp_reference() -> None:
    """The CP gain sets the level an MTP profile is measured against."""
    x = np.linspace(0.0, 1.0, 11)
    y = np.linspace(0.0, 40.0, 401)
    cp = _map(np.ones((y.size, x.size)), x, y, "cp")
    mtp = _map(np.outer(0.5 / (1.0 + (y / 8.0) ** 2), np.ones(x.size)), x, y, "mtp")
    report = bandwidth(mtp, cp, 0.3, "mtp", cp_gain=0.5)
    assert report.reference_slope == pytest.approx(0.5)
    assert report.profile[0] == pytest.approx(0.5)
    assert report.contour_minus6.delta_rf_mhz == pytest.approx(
        8.0 * math.sqrt(10.0 ** (6.0 / 20.0) - 1.0), abs=0.01
    )
    unscaled = bandwidth(mtp, cp, 0.3, "mtp")
    assert unscaled.contour_minus6.status == "below"
    with pytest.raises(ConfigError):
        bandwidth(mtp, cp, 0.3, "mtp", cp_gain=0.0)


def test_bandwidth_needs_resonant_row() -> None:
    """A reference map not starting at Δ_RF = 0 is refused."""
    x = np.linspace(0.0, 1.0, 3)
    shifted = _map(np.ones((2, 3)), x, np.array([1.0, 2.0]), "cp")
    with pytest.raises(NumericalError):
        bandwidth(shifted, shifted, 0.1)


def test_sensitivity_formula() -> None:
    """S = V0/(|slope|·√RBW); zero slope is infinite and flagged."""
    assert sensitivity(1.0, 1.0, 1.0).sensitivity == pytest.approx(1.0)
    assert sensitivity(2.0, 1.0, 1.0).sensitivity == pytest.approx(0.5)
    assert sensitivity(-2.0, 1.0, 4.0).sensitivity == pytest.approx(0.25)
    zero = sensitivity(0.0, 1.0, 1.0)
    assert zero.infinite
    assert math.isinf(zero.sensitivity)
    with pytest.raises(ConfigError):
        sensitivity(1.0, 1.0, 0.0)


def test_sensitivity_table_compares_protocols() -> None:
    """Improvement is S_cp/S_mtp at each requested detuning."""
    x = np.linspace(0.0, 1.0, 3)
    y = np.array([0.0, 10.0])
    cp = _map(np.array([[2.0, 2.0, 2.0], [0.0, 0.0, 0.0]]), x, y, "cp")
    mtp = _map(np.full((2, 3), 1.0), x, y, "mtp")
    rows = sensitivity_table(cp, mtp, 0.5, [0.0, 10.0], 1.0, 1.0, 1.0)
    assert rows[0].improvement == pytest.approx(0.5)
    assert rows[1].cp.infinite
    assert rows[1].improvement == math.inf
    assert slope_at(cp, 0.5, 5.0) == pytest.approx(1.0)
    scaled = sensitivity_table(cp, mtp, 0.5, [0.0], 1.0, 1.0, 1.0, cp_gain=0.5)
    assert scaled[0].cp.slope == pytest.approx(1.0)
    assert scaled[0].improvement == pytest.approx(1.0)


def test_ratio_map_identity_and_floor() -> None:
    """Identical maps give one; CP slopes under the floor are flagged."""
    x = np.linspace(0.0, 1.0, 3)
    y = np.array([0.0, 1.0])
    values = np.array([[1.0, -2.0, 3.0], [0.0, 1e-9, 4.0]])
    same = _map(values, x, y, "s")
    ratios = ratio_map(same, same, 1e-6)
    assert np.allclose(ratios.values, 1.0)
    assert ratios.extras["capped"].tolist() == [[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]
    with pytest.raises(ConfigError):
        ratio_map(same, same, 0.0)


def test_ratio_map_floors_only_the_cp_slope() -> None:
    """A tiny MTP slope stays tiny; a capped CP slope divides by the floor."""
    x = np.array([0.0, 1.0])
    y = np.array([0.0])
    cp = _map(np.array([[1.0, 0.0]]), x, y, "cp")
    mtp = _map(np.array([[1e-9, 2e-3]]), x, y, "mtp")
    ratios = ratio_map(mtp, cp, 1e-6)
    assert ratios.values[0, 0] == pytest.approx(1e-9)
    assert ratios.values[0, 1] == pytest.approx(2e3)
    assert ratios.extras["capped"].tolist() == [[0.0, 1.0]]


def test_ratio_map_scales_cp_by_gain() -> None:
    """The CP gain enters the denominator and is recorded."""
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 1.0])
    cp = _map(np.full((2, 2), 2.0), x, y, "cp")
    mtp = _map(np.ones((2, 2)), x, y, "mtp")
    ratios = ratio_map(mtp, cp, 1e-6, cp_gain=0.5)
    assert np.allclose(ratios.values, 1.0)
    assert ratios.metadata["cp_gain"] == 0.5
    with pytest.raises(ConfigError):
        ratio_map(mtp, cp, 1e-6, cp_gain=-1.0)


def test_ratio_crossover() -> None:
    """The first upward crossing of one is interpolated along Δ_RF."""
    x = np.array([0.0, 1.0])
    y = np.array([0.0, 2.0, 4.0])
    ratios = _map(np.array([[0.5, 0.5], [0.75, 0.75], [1.25, 1.25]]), x, y, "r")
    assert ratio_crossover(ratios, 0.5) == pytest.approx(3.0)
    assert first_crossing(y, np.array([0.1, 0.2, 0.3]), 1.0) is None


def test_spectrum_is_independent_of_thread_count(small_sim: Simulation) -> None:
    """Parallel sweeps return the same values in grid order."""
    axis = linear_axis("delta_p_mhz", "MHz", -2.0, 2.0, 5)
    serial = spectrum(small_sim, "mtp", axis)
    parallel = spectrum(replace(small_sim, threads=3), "mtp", axis)
    assert np.array_equal(serial.values, parallel.values)
    assert set(serial.extras) == {"transmission", "rma_in_phase", "rma_quadrature"}
    assert np.allclose(
        np.hypot(serial.extras["rma_in_phase"], serial.extras["rma_quadrature"]),
        serial.values,
    )


def test_cp_spectrum_shows_transparency(small_sim: Simulation) -> None:
    """The CP observable peaks near two-photon resonance."""
    sim = _resolved(small_sim)
    axis = linear_axis("delta_p_mhz", "MHz", -6.0, 6.0, 7)
    result = spectrum(sim, "cp", axis)
    assert result.value_name == "transparency"
    assert int(np.argmax(result.values)) == 3
    with pytest.raises(ConfigError):
        spectrum(small_sim, "xyz", axis)


def test_rf_field_suppresses_line_centre_transparency(small_sim: Simulation) -> None:
    """A resonant 0.65 V/m field splits the EIT peak and empties its centre."""
    sim = _resolved(small_sim)
    fields = Axis("e_rf_v_per_m", "V/m", np.array([0.0, 0.65]))
    curve = response_curve(sim, "cp", 0.0, fields)
    assert curve.values[0] > 0.0
    assert curve.values[1] < 0.5 * curve.values[0]


def test_cp_spectrum_splits_into_two_lobes(small_sim: Simulation) -> None:
    """At 0.65 V/m resonant the transparency has one lobe on each side."""
    sim = _resolved(small_sim)
    axis = linear_axis("delta_p_mhz", "MHz", -12.0, 12.0, 25)
    scan = field_scan(sim, "cp", axis, Axis("e_rf_v_per_m", "V/m", np.array([0.65])))
    values = scan.values[0]
    detunings = axis.values
    left = int(np.argmax(np.where(detunings < 0.0, values, -np.inf)))
    right = int(np.argmax(np.where(detunings > 0.0, values, -np.inf)))
    assert 3.0 <= -detunings[left] <= 10.0
    assert 3.0 <= detunings[right] <= 10.0
    assert values[12] < 0.5 * min(values[left], values[right])


def test_unmodulated_mtp_spectrum_is_zero(small_sim: Simulation) -> None:
    """Without sidebands there is no modulation transfer signal."""
    plain = replace(small_sim, mod=replace(small_sim.mod, beta=0.0))
    axis = linear_axis("delta_p_mhz", "MHz", -1.0, 1.0, 3)
    assert not np.any(spectrum(plain, "mtp", axis).values)


def test_modulation_map_zero_depth_row(small_sim: Simulation) -> None:
    """β = 0 rows are zero in both layers."""
    omega = linear_axis("omega_mod_mhz", "MHz", 2.0, 4.0, 2)
    beta = Axis("beta", "1", np.array([0.0, 0.25]))
    detuning = linear_axis("delta_p_mhz", "MHz", -2.0, 2.0, 3)
    amplitude, slope = modulation_map(small_sim, omega, beta, detuning, refine=False)
    assert amplitude.values.shape == (2, 2)
    assert not np.any(amplitude.values[0])
    assert not np.any(slope.values[0])
    assert np.all(amplitude.values[1] > 0.0)
    assert "peak_delta_p_mhz" in amplitude.extras


def test_rma_spectrum_is_even_without_rf(small_sim: Simulation) -> None:
    """With no RF field and a resonant coupling R.M.A(−Δ_p) = R.M.A(Δ_p)."""
    axis = Axis("delta_p_mhz", "MHz", np.array([-2.5, -0.7, 0.7, 2.5]))
    values = spectrum(small_sim, "mtp", axis).values
    assert values[0] == pytest.approx(values[3], rel=1e-8)
    assert values[1] == pytest.approx(values[2], rel=1e-8)


def test_modulation_map_refines_from_a_window_edge(small_sim: Simulation) -> None:
    """The bounded search never lowers the coarse peak and stays on the grid."""
    omega = Axis("omega_mod_mhz", "MHz", np.array([3.0]))
    beta = Axis("beta", "1", np.array([0.25]))
    detuning = linear_axis("delta_p_mhz", "MHz", 0.0, 6.0, 4)
    coarse, _ = modulation_map(small_sim, omega, beta, detuning, refine=False)
    refined, _ = modulation_map(small_sim, omega, beta, detuning, refine=True)
    assert refined.values[0, 0] >= coarse.values[0, 0]
    assert 0.0 <= refined.extras["peak_delta_p_mhz"][0, 0] <= 6.0


def test_response_endpoint_matches_spectrum(small_sim: Simulation) -> None:
    """At E_RF = 0 the response equals the spectrum at the operating detuning."""
    sim = _resolved(small_sim)
    fields = linear_axis("e_rf_v_per_m", "V/m", 0.0, 0.2, 3)
    curve = response_curve(sim, "cp", 0.0, fields)
    at_zero = spectrum(sim, "cp", Axis("delta_p_mhz", "MHz", np.array([0.0])))
    assert curve.values[0] == pytest.approx(at_zero.values[0], rel=1e-12)
    assert curve.values[2] < curve.values[0]


def test_resonant_responses_of_both_protocols(small_sim: Simulation) -> None:
    """CP falls steadily with field; MTP barely moves at small fields."""
    sim = _resolved(small_sim)
    fields = linear_axis("e_rf_v_per_m", "V/m", 0.0, 0.25, 6)
    cp = response_curve(sim, "cp", 0.0, fields)
    assert np.all(np.diff(cp.values) < 0.0)
    mtp = response_curve(sim, "mtp", 0.0, fields)
    small = fields.values <= 0.1
    assert np.ptp(mtp.values[small]) < 0.5 * np.ptp(cp.values[small])


def test_response_map_and_slopes(small_sim: Simulation) -> None:
    """Response maps are (Δ_RF, E_RF) shaped and differentiate row by row."""
    fields = linear_axis("e_rf_v_per_m", "V/m", 0.0, 0.3, 5)
    detunings = linear_axis("delta_rf_mhz", "MHz", 0.0, 10.0, 2)
    response = response_map(small_sim, "cp", fields, detunings)
    assert response.values.shape == (2, 5)
    slopes = differentiate_response(response, 5)
    assert slopes.value_name == "transparency_slope_per_v_per_m"
    assert slopes.values.shape == (2, 5)


def test_field_scan_layout(small_sim: Simulation) -> None:
    """Field scans put probe detuning on x and RF field on y."""
    scan = field_scan(
        small_sim,
        "cp",
        linear_axis("delta_p_mhz", "MHz", -1.0, 1.0, 3),
        linear_axis("e_rf_v_per_m", "V/m", 0.0, 0.5, 2),
    )
    assert scan.values.shape == (2, 3)
    assert scan.x_axis.name == "delta_p_mhz"


def test_convergence_diagnostics_report_changes(small_sim: Simulation) -> None:
    """Doubling slices and nodes reports relative changes."""
    refined = maxwell_grid(doppler_sigma(small_sim.params), n_nodes=16, kind="hermite")
    report = convergence_diagnostics(small_sim, refined)
    assert report["refined_velocity_nodes"] == 16.0
    assert report["slices_transmission_change"] >= 0.0
    assert 0.0 < report["base_transmission"] <= 1.0
