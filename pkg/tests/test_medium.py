"""Velocity quadrature, slice propagation and density calibration."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.special import wofz

from rydberg_mtp.atom_data import (
    AtomicParams,
    DriveParams,
    ModulationParams,
    doppler_sigma,
    mhz_to_angular,
)
from rydberg_mtp.errors import ConfigError, NumericalError
from rydberg_mtp.medium import (
    CellConfig,
    VelocityGrid,
    beat_from_amplitudes,
    calibrate_density,
    gain_coefficient,
    maxwell_grid,
    propagate_cp,
    propagate_mtp,
    transparency,
)


@pytest.mark.parametrize("kind", ["composite", "hermite", "uniform"])
def test_quadrature_moments(kind: str, params: AtomicParams) -> None:
    """Weights sum to one, nodes are symmetric and the variance is σ²."""
    sigma = doppler_sigma(params)
    grid = maxwell_grid(sigma, kind=kind)  # type: ignore[arg-type]
    assert grid.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(grid.nodes, -grid.nodes[::-1])
    assert abs(float(np.sum(grid.weights * grid.nodes))) < 1e-12 * sigma
    second = float(np.sum(grid.weights * grid.nodes**2))
    tolerance = {"hermite": 1e-9, "composite": 1e-9, "uniform": 5e-3}[kind]
    assert second == pytest.approx(sigma**2, rel=tolerance)


def test_default_node_counts(params: AtomicParams) -> None:
    """Composite, Hermite and uniform rules default to 256, 64 and 801 nodes."""
    sigma = doppler_sigma(params)
    composite = maxwell_grid(sigma)
    assert composite.size == 256
    assert 7.5 * sigma < composite.nodes[-1] < 8.0 * sigma
    assert maxwell_grid(sigma, kind="hermite").size == 64
    uniform = maxwell_grid(sigma, kind="uniform")
    assert uniform.size == 801
    assert uniform.nodes[-1] == pytest.approx(4.0 * sigma)


def test_composite_grid_is_dense_near_zero(params: AtomicParams) -> None:
    """Most composite nodes lie inside the core region."""
    sigma = doppler_sigma(params)
    grid = maxwell_grid(sigma, core_sigmas=0.3)
    inside = np.count_nonzero(np.abs(grid.nodes) < 0.3 * sigma)
    assert inside > grid.size // 2


def test_invalid_grids_are_rejected(params: AtomicParams) -> None:
    """Too few nodes, a narrow span or unnormalised weights fail."""
    sigma = doppler_sigma(params)
    with pytest.raises(ConfigError):
        maxwell_grid(sigma, n_nodes=2)
    with pytest.raises(ConfigError):
        maxwell_grid(sigma, span_sigmas=2.0)
    with pytest.raises(ConfigError):
        VelocityGrid(nodes=np.array([0.0, 1.0]), weights=np.array([0.3, 0.3]))


def test_empty_cell_transmits_everything(
    params: AtomicParams, drive: DriveParams, coarse_grid: VelocityGrid
) -> None:
    """N0 = 0 leaves the probe untouched."""
    result = propagate_cp(CellConfig(num_slices=3), coarse_grid, params, drive)
    assert result.transmission == 1.0
    assert result.beat == 0.0
    assert result.e_p0.shape == (4,)


def test_weak_probe_follows_doppler_broadened_absorption(
    params: AtomicParams,
) -> None:
    """Slice propagation reproduces the Faddeeva-function susceptibility."""
    sigma = doppler_sigma(params)
    grid = maxwell_grid(sigma)
    cell = CellConfig(num_slices=10, atomic_density=3e15)
    delta = mhz_to_angular(40.0)
    drive = DriveParams(
        rabi_probe=mhz_to_angular(1e-3), rabi_coupling=0.0, delta_p=delta
    )
    result = propagate_cp(cell, grid, params, drive)

    gamma_21 = 0.5 * params.gamma_2 + params.transit_rate
    k_sigma = params.k_probe * sigma
    z = (delta + 1j * gamma_21) / (math.sqrt(2.0) * k_sigma)
    mean_response = math.sqrt(math.pi / 2.0) * wofz(z) / k_sigma
    absorption = gain_coefficient(cell, params) * cell.slice_thickness
    step = 1.0 - 0.5 * absorption * mean_response
    expected = abs(step) ** (2 * cell.num_slices)
    assert 0.3 < expected < 0.99
    assert result.transmission == pytest.approx(expected, rel=1e-4)


def test_unmodulated_mtp_is_the_cp_path(
    params: AtomicParams,
    drive: DriveParams,
    thin_cell: CellConfig,
    coarse_grid: VelocityGrid,
) -> None:
    """β = 0 reproduces the CP propagation exactly and yields no beat."""
    mod = ModulationParams(omega_mod=mhz_to_angular(3.0), beta=0.0)
    cp = propagate_cp(thin_cell, coarse_grid, params, drive)
    mtp = propagate_mtp(thin_cell, coarse_grid, params, drive, mod)
    assert np.array_equal(cp.e_p0, mtp.e_p0)
    assert mtp.rma == 0.0


def test_modulated_propagation_builds_sidebands(
    params: AtomicParams,
    drive: DriveParams,
    modulation: ModulationParams,
    thin_cell: CellConfig,
    coarse_grid: VelocityGrid,
) -> None:
    """Sidebands start at zero and grow along the cell."""
    detuned = drive.with_probe_detuning(mhz_to_angular(1.0))
    result = propagate_mtp(thin_cell, coarse_grid, params, detuned, modulation)
    assert result.e_p_plus[0] == 0.0
    assert abs(result.e_p_plus[-1]) > 0.0
    assert result.rma > 0.0
    beat = beat_from_amplitudes(
        result.e_p0[-1], result.e_p_plus[-1], result.e_p_minus[-1]
    )
    assert result.rma == pytest.approx(abs(beat))


def test_sideband_attenuation_switch(
    params: AtomicParams,
    drive: DriveParams,
    modulation: ModulationParams,
    coarse_grid: VelocityGrid,
) -> None:
    """Disabling sideband attenuation changes the sidebands, not the carrier."""
    detuned = drive.with_probe_detuning(mhz_to_angular(1.0))
    on = CellConfig(num_slices=4, atomic_density=1e16)
    off = CellConfig(num_slices=4, atomic_density=1e16, attenuate_sidebands=False)
    attenuated = propagate_mtp(on, coarse_grid, params, detuned, modulation)
    free = propagate_mtp(off, coarse_grid, params, detuned, modulation)
    assert np.array_equal(attenuated.e_p0, free.e_p0)
    assert attenuated.e_p_plus[-1] != free.e_p_plus[-1]


@pytest.mark.parametrize(
    ("e0", "plus", "minus", "expected"),
    [
        (1.0, 0.0, 0.0, 0.0),
        (1.0, 0.3j, 0.3j, 0.0),
        (0.5, 0.01, 0.0, 0.01),
    ],
)
def test_beat_arithmetic(
    e0: complex, plus: complex, minus: complex, expected: float
) -> None:
    """|2(ℰ0·ℰ₋* + ℰ0*·ℰ₊)| on hand-checked amplitudes."""
    assert abs(beat_from_amplitudes(e0, plus, minus)) == pytest.approx(expected)


@pytest.mark.parametrize("phase", [0.3, 1.7, -2.9])
def test_rma_ignores_a_common_phase_rotation(
    phase: float,
    params: AtomicParams,
    drive: DriveParams,
    modulation: ModulationParams,
    thin_cell: CellConfig,
    coarse_grid: VelocityGrid,
) -> None:
    """Rotating carrier and both sidebands together leaves |beat| unchanged."""
    detuned = drive.with_probe_detuning(mhz_to_angular(1.0))
    result = propagate_mtp(thin_cell, coarse_grid, params, detuned, modulation)
    rotation = complex(np.exp(1j * phase))
    e0, plus, minus = result.e_p0[-1], result.e_p_plus[-1], result.e_p_minus[-1]
    rotated = beat_from_amplitudes(rotation * e0, rotation * plus, rotation * minus)
    assert abs(rotated) == pytest.approx(result.rma, rel=1e-12)


def test_transparency_vanishes_without_coupling(
    params: AtomicParams,
    drive: DriveParams,
    thin_cell: CellConfig,
    coarse_grid: VelocityGrid,
) -> None:
    """Ω_c = 0 gives zero transparency; the coupling makes it positive."""
    assert transparency(
        thin_cell, coarse_grid, params, drive.without_coupling()
    ) == pytest.approx(0.0, abs=1e-15)
    assert transparency(thin_cell, coarse_grid, params, drive) > 0.0


def test_zero_probe_is_rejected(
    params: AtomicParams, thin_cell: CellConfig, coarse_grid: VelocityGrid
) -> None:
    """Propagation normalises to the input field, which must be non-zero."""
    with pytest.raises(ConfigError):
        propagate_cp(
            thin_cell,
            coarse_grid,
            params,
            DriveParams(rabi_probe=0.0, rabi_coupling=1.0),
        )


def test_invalid_cell_is_rejected() -> None:
    """Negative densities and empty slicing are configuration errors."""
    with pytest.raises(ConfigError):
        CellConfig(atomic_density=-1.0)
    with pytest.raises(ConfigError):
        CellConfig(num_slices=0)


def test_calibration_hits_target(params: AtomicParams) -> None:
    """Brent's method finds N0 giving 34 % resonant transmission."""
    grid = maxwell_grid(doppler_sigma(params), n_nodes=16, kind="hermite")
    cell = CellConfig(num_slices=200)
    result = calibrate_density(cell, grid, params, 0.34)
    assert result.transmission == pytest.approx(0.34, abs=1e-6)
    assert result.optical_depth == pytest.approx(-math.log(0.34), rel=1e-5)
    assert result.slice_absorption < 0.01
    denser = propagate_cp(
        cell.with_density(1.1 * result.atomic_density),
        grid,
        params,
        DriveParams(rabi_probe=result.probe_rabi, rabi_coupling=0.0),
    )
    assert denser.transmission < result.transmission


def test_calibration_edge_cases(params: AtomicParams) -> None:
    """Target one means an empty cell; one thick slice is refused."""
    grid = maxwell_grid(doppler_sigma(params), n_nodes=16, kind="hermite")
    assert calibrate_density(CellConfig(), grid, params, 1.0).atomic_density == 0.0
    with pytest.raises(ConfigError):
        calibrate_density(CellConfig(), grid, params, 0.0)
    with pytest.raises(NumericalError) as excinfo:
        calibrate_density(CellConfig(num_slices=1), grid, params, 0.34)
    assert excinfo.value.error_type == "SliceTooThick"
