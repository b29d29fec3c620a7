"""Physical constants, the Rb-85 parameter set and unit conversions.

Configuration files express frequencies as ν = ω/2π in MHz and dipoles in
units of e·a0. Everything below this module works in SI angular units
(rad/s, C·m, m, kg, K).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
import scipy.constants

from rydberg_mtp.errors import raise_config_error

HBAR: float = scipy.constants.hbar
ELEMENTARY_CHARGE: float = scipy.constants.e
BOHR_RADIUS: float = scipy.constants.physical_constants["Bohr radius"][0]
BOLTZMANN: float = scipy.constants.k
ATOMIC_MASS: float = scipy.constants.atomic_mass
EPSILON_0: float = scipy.constants.epsilon_0
SPEED_OF_LIGHT: float = scipy.constants.c

EA0: float = ELEMENTARY_CHARGE * BOHR_RADIUS
RB85_MASS_AMU = 84.911789738
DEFAULT_PERTURBATION_FACTOR = 0.54


def mhz_to_angular(nu_mhz: float) -> float:
    """Convert ν = ω/2π in MHz to an angular frequency in rad/s."""
    return 2.0 * math.pi * 1e6 * nu_mhz


def angular_to_mhz(omega: float) -> float:
    """Convert an angular frequency in rad/s to ν = ω/2π in MHz."""
    return omega / (2.0 * math.pi * 1e6)


def ea0_to_si(dipole_ea0: float) -> float:
    """Convert a dipole moment from e·a0 to C·m."""
    return dipole_ea0 * EA0


def si_to_ea0(dipole: float) -> float:
    """Convert a dipole moment from C·m to e·a0."""
    return dipole / EA0


def _require_positive(name: str, value: float) -> None:
    if not (value > 0.0 and math.isfinite(value)):
        raise_config_error(
            "InvalidParameter", f"'{name}' must be strictly positive", value
        )


@dataclass(frozen=True)
class AtomicParams:
    """Level structure of the four-level ladder, in SI units.

    Attributes:
        dipole_12: Probe transition dipole (C·m).
        dipole_23: Coupling transition dipole (C·m).
        dipole_34: RF transition dipole (C·m).
        gamma_2: Population decay rate of |2⟩ (rad/s).
        gamma_3: Population decay rate of |3⟩ (rad/s).
        gamma_4: Population decay rate of |4⟩ (rad/s).
        transit_rate: Transit rate γ_t added to every element (rad/s).
        feed_rate: Ground-state feed γ_in (rad/s).
        mass: Atomic mass (kg).
        lambda_probe: Probe vacuum wavelength (m).
        lambda_coupling: Coupling vacuum wavelength (m).
        temperature: Vapor temperature (K).

    """

    dipole_12: float
    dipole_23: float
    dipole_34: float
    gamma_2: float
    gamma_3: float
    gamma_4: float
    transit_rate: float
    feed_rate: float
    mass: float
    lambda_probe: float
    lambda_coupling: float
    temperature: float

    def __post_init__(self) -> None:
        """Check that every rate, dipole and length is strictly positive."""
        for name in (
            "dipole_12",
            "dipole_23",
            "dipole_34",
            "gamma_2",
            "gamma_3",
            "gamma_4",
            "transit_rate",
            "feed_rate",
            "mass",
            "lambda_probe",
            "lambda_coupling",
            "temperature",
        ):
            _require_positive(name, getattr(self, name))

    @property
    def k_probe(self) -> float:
        """Probe wavenumber 2π/λ_p (1/m)."""
        return 2.0 * math.pi / self.lambda_probe

    @property
    def k_coupling(self) -> float:
        """Coupling wavenumber 2π/λ_c (1/m)."""
        return 2.0 * math.pi / self.lambda_coupling

    @property
    def omega_probe(self) -> float:
        """Probe optical angular frequency (rad/s)."""
        return 2.0 * math.pi * SPEED_OF_LIGHT / self.lambda_probe


@dataclass(frozen=True)
class DriveParams:
    """Field amplitudes and detunings.

    ``delta_p`` is Δ21, ``delta_2photon`` is Δ31 and ``delta_rf`` is Δ_RF, all
    in rad/s, with Δ41 = Δ31 − Δ_RF. ``e_rf`` is the RF amplitude outside the
    cell; the field seen by the atoms is ``e_rf * perturbation_factor``.
    """

    rabi_probe: float
    rabi_coupling: float
    e_rf: float = 0.0
    perturbation_factor: float = DEFAULT_PERTURBATION_FACTOR
    delta_p: float = 0.0
    delta_2photon: float = 0.0
    delta_rf: float = 0.0

    def __post_init__(self) -> None:
        """Validate Rabi frequencies, the RF field and the perturbation factor."""
        if self.rabi_probe < 0.0 or self.rabi_coupling < 0.0:
            raise_config_error(
                "InvalidParameter",
                "Rabi frequencies must be non-negative",
                {"rabi_probe": self.rabi_probe, "rabi_coupling": self.rabi_coupling},
            )
        if self.e_rf < 0.0:
            raise_config_error(
                "InvalidParameter", "RF field amplitude must be non-negative", self.e_rf
            )
        if not 0.0 < self.perturbation_factor <= 1.0:
            raise_config_error(
                "InvalidParameter",
                "perturbation_factor must lie in (0, 1]",
                self.perturbation_factor,
            )

    @property
    def delta_4(self) -> float:
        """Three-photon detuning Δ41 = Δ31 − Δ_RF (rad/s)."""
        return self.delta_2photon - self.delta_rf

    @property
    def e_rf_internal(self) -> float:
        """Average RF field inside the cell (V/m)."""
        return self.e_rf * self.perturbation_factor

    def rabi_rf(self, params: AtomicParams) -> float:
        """RF Rabi frequency Ω_RF from the internal field (rad/s)."""
        return rabi_from_field(params.dipole_34, self.e_rf_internal)

    def with_probe_detuning(self, delta_p: float) -> DriveParams:
        """Move the probe frequency, keeping the coupling detuning fixed."""
        shift = delta_p - self.delta_p
        return replace(self, delta_p=delta_p, delta_2photon=self.delta_2photon + shift)

    def with_rf(self, e_rf: float, delta_rf: float | None = None) -> DriveParams:
        """Return a copy with another exterior RF amplitude and detuning."""
        return replace(
            self,
            e_rf=e_rf,
            delta_rf=self.delta_rf if delta_rf is None else delta_rf,
        )

    def without_coupling(self) -> DriveParams:
        """Return a copy with the coupling beam switched off."""
        return replace(self, rabi_coupling=0.0)


@dataclass(frozen=True)
class ModulationParams:
    """Phase modulation of the coupling beam.

    Only the carrier and the ±1 sidebands are kept. With total power
    normalised to one, a1 = sqrt(β) and a0 = sqrt(1 − 2β), so that
    β = a1² / (2 a1² + a0²). The +1 sideband has amplitude
    ``sideband_sign * a1`` and the −1 sideband the opposite sign.
    """

    omega_mod: float = 0.0
    beta: float = 0.0
    sideband_sign: float = 1.0

    def __post_init__(self) -> None:
        """Validate the modulation depth and frequency."""
        if not 0.0 <= self.beta < 0.5:
            raise_config_error(
                "InvalidParameter", "beta must lie in [0, 0.5)", self.beta
            )
        if self.omega_mod < 0.0:
            raise_config_error(
                "InvalidParameter", "omega_mod must be non-negative", self.omega_mod
            )
        if self.beta > 0.0 and self.omega_mod == 0.0:
            raise_config_error(
                "InvalidParameter", "a modulated coupling needs omega_mod > 0", None
            )
        if self.sideband_sign not in (1.0, -1.0):
            raise_config_error(
                "InvalidParameter", "sideband_sign must be +1 or -1", self.sideband_sign
            )

    @property
    def a0(self) -> float:
        """Carrier amplitude as a fraction of the unmodulated amplitude."""
        return math.sqrt(1.0 - 2.0 * self.beta)

    @property
    def a1(self) -> float:
        """Sideband amplitude as a fraction of the unmodulated amplitude."""
        return math.sqrt(self.beta)

    @property
    def is_modulated(self) -> bool:
        """Whether the coupling field carries sidebands."""
        return self.beta > 0.0


UNMODULATED = ModulationParams()


def beta_from_amplitudes(a0: float, a1: float) -> float:
    """Modulation depth β of a carrier/sideband amplitude pair."""
    denominator = 2.0 * a1 * a1 + a0 * a0
    if denominator == 0.0:
        raise_config_error("InvalidParameter", "amplitudes must not both vanish", None)
    return a1 * a1 / denominator


def default_rb85_params() -> AtomicParams:
    """Return the Rb-85 parameter set used throughout the simulations."""
    transit = mhz_to_angular(0.650)
    return AtomicParams(
        dipole_12=ea0_to_si(1.96),
        dipole_23=ea0_to_si(0.01),
        dipole_34=ea0_to_si(2272.4),
        gamma_2=mhz_to_angular(6.050),
        gamma_3=mhz_to_angular(0.002),
        gamma_4=mhz_to_angular(0.002),
        transit_rate=transit,
        feed_rate=transit,
        mass=RB85_MASS_AMU * ATOMIC_MASS,
        lambda_probe=780e-9,
        lambda_coupling=480e-9,
        temperature=293.15,
    )


def default_drive() -> DriveParams:
    """Return the probe and coupling Rabi frequencies of the reference setup."""
    return DriveParams(
        rabi_probe=mhz_to_angular(1.32),
        rabi_coupling=mhz_to_angular(2.38),
    )


def rabi_from_field(dipole: float, field: float) -> float:
    """Return the Rabi frequency 2·℘·E/ħ (rad/s) for a dipole in C·m."""
    return 2.0 * dipole * field / HBAR


def doppler_sigma(params: AtomicParams) -> float:
    """Return the 1D Maxwell velocity spread sqrt(kB·T/m) in m/s."""
    return float(np.sqrt(BOLTZMANN * params.temperature / params.mass))
