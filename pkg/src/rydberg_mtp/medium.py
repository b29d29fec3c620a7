"""Doppler averaging and slice-by-slice propagation through the vapor cell.

The probe carrier and its two generated sidebands are tracked as complex
amplitudes normalised to the input carrier. Every slice solves the atomic
steady state for all velocity classes at once with the locally propagated
probe Rabi frequency, averages ρ21 over the Maxwell distribution and adds
the radiated field:

    ℰ(x + dx) = ℰ(x) + i·g·dx·⟨ρ21⟩/Ω_in,   g = ω_p·N0·℘12²/(ε0·c·ħ)

which makes a resonant medium absorb.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from rydberg_mtp.atom_data import (
    EPSILON_0,
    HBAR,
    SPEED_OF_LIGHT,
    UNMODULATED,
    AtomicParams,
    DriveParams,
    ModulationParams,
    mhz_to_angular,
)
from rydberg_mtp.errors import raise_config_error, raise_numerical_error
from rydberg_mtp.liouvillian import RHO21, ComplexArray, RealArray, build_generators
from rydberg_mtp.steady_state import solve_cp, solve_floquet

LOGGER = logging.getLogger(__name__)

QuadratureKind = Literal["composite", "hermite", "uniform"]

DEFAULT_NODES: dict[str, int] = {"composite": 256, "hermite": 64, "uniform": 801}
DEFAULT_SPAN: dict[str, float] = {"composite": 8.0, "hermite": 6.0, "uniform": 4.0}
DEFAULT_CORE_SIGMAS = 0.3
PANEL_ORDER = 8

WEAK_PROBE_RABI = mhz_to_angular(1e-3)
SOFT_SLICE_ABSORPTION = 0.01
DEFAULT_TARGET_TRANSMISSION = 0.34


@dataclass(frozen=True)
class VelocityGrid:
    """Quadrature nodes (m/s) and weights for ∫P(v)·f(v)dv."""

    nodes: RealArray
    weights: RealArray

    def __post_init__(self) -> None:
        """Check shapes, weight positivity and normalisation."""
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1:
            raise_config_error(
                "InvalidGrid", "velocity nodes and weights must be 1D of equal size"
            )
        if np.any(self.weights < 0.0):
            raise_config_error("InvalidGrid", "quadrature weights must be non-negative")
        total = float(np.sum(self.weights))
        if abs(total - 1.0) > 1e-10:
            raise_config_error("InvalidGrid", "quadrature weights must sum to 1", total)

    @property
    def size(self) -> int:
        """Number of velocity classes."""
        return int(self.nodes.size)

    def average(self, values: ComplexArray) -> complex:
        """Weighted sum over the velocity axis (the last axis of ``values``)."""
        return complex(np.sum(self.weights * values, axis=-1))


def _maxwell_density(velocity: RealArray, sigma: float) -> RealArray:
    norm = math.sqrt(2.0 * math.pi) * sigma
    density = np.exp(-0.5 * (velocity / sigma) ** 2) / norm
    return np.asarray(density, dtype=np.float64)


def _normalised(nodes: RealArray, weights: RealArray) -> VelocityGrid:
    return VelocityGrid(nodes=nodes, weights=weights / np.sum(weights))


def _composite_half(
    sigma: float, n_nodes: int, span_sigmas: float, core_sigmas: float
) -> tuple[RealArray, RealArray]:
    panels = max(2, -(-n_nodes // PANEL_ORDER))
    wing_panels = max(1, panels // 4)
    core_panels = panels - wing_panels
    core_edge = core_sigmas * sigma
    edges = np.concatenate(
        [
            np.linspace(0.0, core_edge, core_panels + 1),
            np.linspace(core_edge, span_sigmas * sigma, wing_panels + 1)[1:],
        ]
    )
    reference_nodes, reference_weights = np.polynomial.legendre.leggauss(PANEL_ORDER)
    nodes = []
    weights = []
    for lower, upper in zip(edges[:-1], edges[1:], strict=True):
        half_width = 0.5 * (upper - lower)
        nodes.append(lower + half_width * (reference_nodes + 1.0))
        weights.append(half_width * reference_weights)
    return np.concatenate(nodes), np.concatenate(weights)


def maxwell_grid(
    sigma: float,
    n_nodes: int | None = None,
    span_sigmas: float | None = None,
    kind: QuadratureKind = "composite",
    core_sigmas: float = DEFAULT_CORE_SIGMAS,
) -> VelocityGrid:
    """Quadrature for the 1D Maxwell distribution of standard deviation ``sigma``.

    ``hermite`` is the Gauss–Hermite rule, exact for polynomial moments.
    ``uniform`` samples ±``span_sigmas``·σ evenly. ``composite`` places
    Gauss–Legendre panels of order 8 densely inside ±``core_sigmas``·σ and
    sparsely in the wings up to ±``span_sigmas``·σ; its node count is
    rounded up to a whole number of panels.
    """
    nodes_requested = DEFAULT_NODES[kind] if n_nodes is None else n_nodes
    span = DEFAULT_SPAN[kind] if span_sigmas is None else span_sigmas
    if not sigma > 0.0:
        raise_config_error("InvalidGrid", "velocity spread must be positive", sigma)
    if nodes_requested < 3:
        raise_config_error("InvalidGrid", "need at least 3 velocity nodes", n_nodes)
    if span < 3.0:
        raise_config_error("InvalidGrid", "span_sigmas must be at least 3", span)

    if kind == "hermite":
        x, w = np.polynomial.hermite_e.hermegauss(nodes_requested)
        return _normalised(sigma * x, w / math.sqrt(2.0 * math.pi))
    if kind == "uniform":
        v = np.linspace(-span * sigma, span * sigma, nodes_requested)
        return _normalised(v, _maxwell_density(v, sigma))
    if not 0.0 < core_sigmas < span:
        raise_config_error(
            "InvalidGrid",
            "core_sigmas must lie inside the quadrature span",
            core_sigmas,
        )
    half_nodes, half_weights = _composite_half(
        sigma, -(-nodes_requested // 2), span, core_sigmas
    )
    v = np.concatenate([-half_nodes[::-1], half_nodes])
    w = np.concatenate([half_weights[::-1], half_weights])
    return _normalised(v, w * _maxwell_density(v, sigma))


@dataclass(frozen=True)
class CellConfig:
    """Vapor-cell geometry, density and propagation switches.

    Attributes:
        length: Cell length (m).
        num_slices: Number of equal slices.
        atomic_density: Atom number density N0 (m⁻³).
        attenuate_sidebands: Whether accumulated probe sidebands are
            attenuated by the carrier's per-slice factor.
        max_slice_absorption: Hard limit on the resonant per-slice power
            loss accepted by calibration.

    """

    length: float = 0.075
    num_slices: int = 100
    atomic_density: float = 0.0
    attenuate_sidebands: bool = True
    max_slice_absorption: float = 0.02

    def __post_init__(self) -> None:
        """Validate geometry and density."""
        if not self.length > 0.0:
            raise_config_error("InvalidParameter", "cell length must be positive")
        if self.num_slices < 1:
            raise_config_error(
                "InvalidParameter", "num_slices must be at least 1", self.num_slices
            )
        if self.atomic_density < 0.0 or not math.isfinite(self.atomic_density):
            raise_config_error(
                "InvalidParameter", "atomic_density must be finite and non-negative"
            )
        if not 0.0 < self.max_slice_absorption < 1.0:
            raise_config_error(
                "InvalidParameter", "max_slice_absorption must lie in (0, 1)"
            )

    @property
    def slice_thickness(self) -> float:
        """Thickness of one slice (m)."""
        return self.length / self.num_slices

    def with_density(self, atomic_density: float) -> CellConfig:
        """Return a copy with another atom density."""
        return replace(self, atomic_density=atomic_density)


@dataclass(frozen=True)
class PropagationResult:
    """Probe amplitudes along the cell, normalised to the input carrier.

    Each amplitude array has ``num_slices + 1`` entries, from the cell
    entrance to its exit.
    """

    e_p0: ComplexArray
    e_p_plus: ComplexArray
    e_p_minus: ComplexArray
    transmission: float
    beat: complex
    max_slice_absorption: float

    @property
    def rma(self) -> float:
        """Relative modulation amplitude at the cell exit."""
        return abs(self.beat)


def beat_from_amplitudes(
    e_p0: complex, e_p_plus: complex, e_p_minus: complex
) -> complex:
    """Complex beat note 2(ℰ0·ℰ₋* + ℰ0*·ℰ₊) of normalised probe amplitudes."""
    return complex(2.0 * (e_p0 * np.conj(e_p_minus) + np.conj(e_p0) * e_p_plus))


def beat_amplitude(result: PropagationResult) -> complex:
    """In-phase and quadrature components of the demodulated probe signal."""
    return result.beat


def rma(result: PropagationResult) -> float:
    """Relative modulation amplitude |beat| at the cell exit."""
    return result.rma


def gain_coefficient(cfg: CellConfig, params: AtomicParams) -> float:
    """Coupling g = ω_p·N0·℘12²/(ε0·c·ħ) between ⟨ρ21⟩ and the field (rad/s/m)."""
    return (
        params.omega_probe
        * cfg.atomic_density
        * params.dipole_12**2
        / (EPSILON_0 * SPEED_OF_LIGHT * HBAR)
    )


def _propagate(
    cfg: CellConfig,
    grid: VelocityGrid,
    params: AtomicParams,
    drive: DriveParams,
    mod: ModulationParams,
) -> PropagationResult:
    if not drive.rabi_probe > 0.0:
        raise_config_error(
            "InvalidParameter", "propagation needs a positive probe Rabi frequency"
        )
    omega_in = drive.rabi_probe
    increment = 1j * gain_coefficient(cfg, params) * cfg.slice_thickness / omega_in

    carrier = np.ones(cfg.num_slices + 1, dtype=np.complex128)
    upper = np.zeros(cfg.num_slices + 1, dtype=np.complex128)
    lower = np.zeros(cfg.num_slices + 1, dtype=np.complex128)
    worst_loss = 0.0
    e0: complex = 1.0 + 0.0j
    e_plus: complex = 0.0j
    e_minus: complex = 0.0j
    for step in range(cfg.num_slices):
        if increment != 0.0:
            generators = build_generators(
                params, drive, mod, grid.nodes, rabi_probe=omega_in * e0
            )
            if mod.is_modulated:
                solution = solve_floquet(generators, mod.omega_mod)
                rho21_0, rho21_plus, rho21_minus = solution.rho21
            else:
                rho21_0 = solve_cp(generators)[..., RHO21]
            e_next = e0 + increment * grid.average(rho21_0)
            if mod.is_modulated:
                factor = e_next / e0 if cfg.attenuate_sidebands and e0 != 0 else 1.0
                e_plus = e_plus * factor + increment * grid.average(rho21_plus)
                e_minus = e_minus * factor + increment * grid.average(rho21_minus)
            if e0 != 0:
                worst_loss = max(worst_loss, 1.0 - abs(e_next / e0) ** 2)
            e0 = e_next
        carrier[step + 1] = e0
        upper[step + 1] = e_plus
        lower[step + 1] = e_minus

    if not (np.all(np.isfinite(carrier)) and math.isfinite(worst_loss)):
        raise_numerical_error("NonFiniteOutput", "probe amplitude became non-finite")
    return PropagationResult(
        e_p0=carrier,
        e_p_plus=upper,
        e_p_minus=lower,
        transmission=float(abs(e0) ** 2),
        beat=beat_from_amplitudes(e0, e_plus, e_minus),
        max_slice_absorption=worst_loss,
    )


def propagate_cp(
    cfg: CellConfig, grid: VelocityGrid, params: AtomicParams, drive: DriveParams
) -> PropagationResult:
    """Propagate the probe with an unmodulated coupling beam."""
    return _propagate(cfg, grid, params, drive, UNMODULATED)


def propagate_mtp(
    cfg: CellConfig,
    grid: VelocityGrid,
    params: AtomicParams,
    drive: DriveParams,
    mod: ModulationParams,
) -> PropagationResult:
    """Propagate the probe carrier and the sidebands it acquires.

    Sidebands are radiated by ρ21 at orders ±1 and do not act back on the
    atoms. With β = 0 the computation is the one of :func:`propagate_cp`.
    """
    return _propagate(cfg, grid, params, drive, mod)


def transparency(
    cfg: CellConfig,
    grid: VelocityGrid,
    params: AtomicParams,
    drive: DriveParams,
    baseline: float | None = None,
) -> float:
    """Transmission with the coupling beam minus transmission without it.

    ``baseline`` may carry a precomputed coupling-off transmission for the
    same probe detuning; it does not depend on the RF field.
    """
    with_coupling = propagate_cp(cfg, grid, params, drive).transmission
    if baseline is None:
        uncoupled = drive.without_coupling()
        baseline = propagate_cp(cfg, grid, params, uncoupled).transmission
    return with_coupling - baseline


@dataclass(frozen=True)
class CalibrationResult:
    """Density found by :func:`calibrate_density` and what it achieves."""

    atomic_density: float
    transmission: float
    optical_depth: float
    slice_absorption: float
    probe_rabi: float


def calibrate_density(
    cfg: CellConfig,
    grid: VelocityGrid,
    params: AtomicParams,
    target: float = DEFAULT_TARGET_TRANSMISSION,
    probe_rabi: float | None = None,
) -> CalibrationResult:
    """Find N0 giving the target resonant transmission without coupling or RF.

    The probe is weak (Rabi frequency 2π·1 kHz) unless ``probe_rabi`` is
    given. A per-slice power loss above 1 % is logged; above
    ``cfg.max_slice_absorption`` the calibration fails.

    Raises:
        ConfigError: If ``target`` is outside (0, 1].
        NumericalError: If no bracket is found or the slices are too thick.

    """
    if not 0.0 < target <= 1.0:
        raise_config_error("InvalidParameter", "target must lie in (0, 1]", target)
    rabi = WEAK_PROBE_RABI if probe_rabi is None else probe_rabi
    drive = DriveParams(rabi_probe=rabi, rabi_coupling=0.0)

    def transmission_at(density: float) -> float:
        return propagate_cp(cfg.with_density(density), grid, params, drive).transmission

    if target == 1.0:
        return CalibrationResult(
            atomic_density=0.0,
            transmission=1.0,
            optical_depth=0.0,
            slice_absorption=0.0,
            probe_rabi=rabi,
        )

    trial = 1e16
    trial_transmission = transmission_at(trial)
    if not 0.0 < trial_transmission < 1.0:
        raise_numerical_error(
            "BracketingFailure",
            "trial density gives no usable absorption",
            trial_transmission,
        )
    estimate = trial * math.log(target) / math.log(trial_transmission)
    upper = 1.5 * estimate
    for _ in range(60):
        if transmission_at(upper) < target:
            break
        upper *= 2.0
    else:
        raise_numerical_error(
            "BracketingFailure", "could not bracket the calibration density", upper
        )

    density = float(
        brentq(
            lambda n0: transmission_at(n0) - target,
            0.0,
            upper,
            xtol=estimate * 1e-12,
            rtol=1e-12,
        )
    )
    result = propagate_cp(cfg.with_density(density), grid, params, drive)
    calibration = CalibrationResult(
        atomic_density=density,
        transmission=result.transmission,
        optical_depth=-math.log(result.transmission),
        slice_absorption=result.max_slice_absorption,
        probe_rabi=rabi,
    )
    LOGGER.info(
        "calibrated N0 = %.6g m^-3 (T = %.6f, per-slice loss %.4f)",
        density,
        result.transmission,
        result.max_slice_absorption,
    )
    if calibration.slice_absorption > cfg.max_slice_absorption:
        raise_numerical_error(
            "SliceTooThick",
            "per-slice absorption exceeds the configured limit; add slices",
            {
                "slice_absorption": calibration.slice_absorption,
                "limit": cfg.max_slice_absorption,
            },
        )
    if calibration.slice_absorption > SOFT_SLICE_ABSORPTION:
        LOGGER.warning(
            "per-slice absorption %.4f exceeds %.2f",
            calibration.slice_absorption,
            SOFT_SLICE_ABSORPTION,
        )
    return calibration
