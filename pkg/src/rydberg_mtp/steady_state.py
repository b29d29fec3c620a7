"""Stationary solutions of the vectorised master equation.

``solve_cp`` handles the unmodulated case by a direct solve of
(R − M0) ρ = N. ``solve_floquet`` truncates the Floquet expansion
ρ(t) = ρ⁰ + ρ⁺ e^{−iωt} + ρ⁻ e^{+iωt} at first order and eliminates the
sidebands from the order-zero balance equation. ``time_domain_oracle``
integrates the full time-dependent equation as an independent reference.

All solvers accept generator sets carrying a leading velocity axis.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from rydberg_mtp.errors import raise_config_error, raise_numerical_error
from rydberg_mtp.liouvillian import (
    N_COMPONENTS,
    RHO21,
    ComplexArray,
    GeneratorSet,
    devectorize,
    ground_state,
    index,
    transpose_permutation,
)

LOGGER = logging.getLogger(__name__)

RCOND_THRESHOLD = 1e-14
MIN_STEPS_PER_PERIOD = 256

_PERMUTATION = transpose_permutation()
_TRACE_INDICES = [index(i, i) for i in range(1, 5)]


@dataclass(frozen=True)
class FloquetSolution:
    """Harmonics of ρ(t) at orders 0 and ±1 as vectorised density matrices."""

    rho0: ComplexArray
    rho_plus: ComplexArray
    rho_minus: ComplexArray

    @property
    def rho21(self) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
        """Probe coherence ρ21 at orders 0, +1 and −1."""
        return (
            self.rho0[..., RHO21],
            self.rho_plus[..., RHO21],
            self.rho_minus[..., RHO21],
        )

    def trace(self) -> ComplexArray:
        """Trace of ρ⁰."""
        return np.asarray(self.rho0[..., _TRACE_INDICES].sum(axis=-1))


@dataclass(frozen=True)
class OracleResult:
    """Outcome of the time-domain integration.

    Attributes:
        solution: Fourier harmonics at orders 0 and ±1 over the last period.
        periods: Number of modulation periods integrated.
        order2_residue: max |ρ^(±2)| relative to max |ρ^(±1)|; measures the
            truncation error of a first-order Floquet ansatz.
        final_change: Stroboscopic change over the last period.

    """

    solution: FloquetSolution
    periods: int
    order2_residue: float
    final_change: float


def checked_inverse(matrix: ComplexArray) -> ComplexArray:
    """Invert a (batch of) matrices, rejecting numerically singular inputs.

    The reciprocal 1-norm condition number 1/(‖A‖₁‖A⁻¹‖₁) of every matrix
    in the batch must exceed ``RCOND_THRESHOLD``.
    """
    try:
        inverse = np.linalg.inv(matrix)
    except np.linalg.LinAlgError as exc:
        raise_numerical_error("SingularSystem", "linear system is singular", str(exc))
    norm = np.abs(matrix).sum(axis=-2).max(axis=-1)
    inverse_norm = np.abs(inverse).sum(axis=-2).max(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        rcond = 1.0 / (norm * inverse_norm)
    worst = float(np.min(np.nan_to_num(rcond, nan=0.0)))
    if worst < RCOND_THRESHOLD:
        raise_numerical_error(
            "SingularSystem",
            "reciprocal condition number below threshold",
            {"rcond": worst, "threshold": RCOND_THRESHOLD},
        )
    return np.asarray(inverse, dtype=np.complex128)


def _apply(matrix: ComplexArray, vector: ComplexArray) -> ComplexArray:
    return np.asarray(np.einsum("...ij,...j->...i", matrix, vector))


def _involution(matrix: ComplexArray) -> ComplexArray:
    """Map a superoperator block K to P·conj(K)·P (P swaps ρ_ij and ρ_ji)."""
    return np.conj(matrix)[..., _PERMUTATION, :][..., :, _PERMUTATION]


def solve_cp(generators: GeneratorSet) -> ComplexArray:
    """Solve (R − M0) ρ = N for the unmodulated steady state."""
    system = generators.r - generators.m0
    inverse = checked_inverse(system)
    rhs = np.broadcast_to(generators.n, system.shape[:-1])
    return _apply(inverse, rhs)


def solve_floquet(generators: GeneratorSet, omega_mod: float) -> FloquetSolution:
    """First-order harmonic-balance steady state of the modulated equation.

    With L0 = M0 − R the sidebands follow from the order-zero harmonic:
    ρ⁺ = −(L0 + iω)⁻¹ M₊ ρ⁰ and ρ⁻ = −(L0 − iω)⁻¹ M₋ ρ⁰, while ρ⁰ solves
    [R − M0 + M₊(L0 − iω)⁻¹M₋ + M₋(L0 + iω)⁻¹M₊] ρ⁰ = N.

    An unmodulated generator returns exactly the ``solve_cp`` result with
    vanishing sidebands.
    """
    if not generators.is_modulated:
        rho0 = solve_cp(generators)
        zeros = np.zeros_like(rho0)
        return FloquetSolution(rho0=rho0, rho_plus=zeros, rho_minus=zeros.copy())
    if omega_mod <= 0.0:
        raise_config_error(
            "InvalidParameter", "omega_mod must be positive when modulated", omega_mod
        )

    static = generators.static
    identity = np.eye(N_COMPONENTS, dtype=np.complex128)
    resolvent_plus = checked_inverse(static + 1j * omega_mod * identity)
    # L0 is invariant under the Hermiticity involution, so (L0 − iω)⁻¹ follows
    # from (L0 + iω)⁻¹ without a second inversion.
    resolvent_minus = _involution(resolvent_plus)

    m_plus = generators.m_plus
    m_minus = generators.m_minus
    effective = (
        generators.r
        - generators.m0
        + m_plus @ resolvent_minus @ m_minus
        + m_minus @ resolvent_plus @ m_plus
    )
    rhs = np.broadcast_to(generators.n, effective.shape[:-1])
    rho0 = _apply(checked_inverse(effective), rhs)
    rho_plus = -_apply(resolvent_plus @ m_plus, rho0)
    rho_minus = -_apply(resolvent_minus @ m_minus, rho0)
    return FloquetSolution(
        rho0=rho0,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
    )


def time_domain_oracle(
    generators: GeneratorSet,
    omega_mod: float,
    n_periods: int = 2000,
    steps_per_period: int = 512,
    tolerance: float = 1e-10,
) -> OracleResult:
    """Integrate dρ/dt from the ground state and project Fourier harmonics.

    A fixed-step fourth-order Runge–Kutta scheme advances whole modulation
    periods until the stroboscopic change per period drops below
    ``tolerance``. The harmonics ρ^(n) = (1/T)∫ρ(t)e^{inωt}dt are then
    evaluated over the last period by the rectangle rule, which is
    spectrally accurate for periodic integrands.

    Raises:
        ConfigError: If ``steps_per_period`` is below 256 or ``omega_mod``
            is not positive.
        NumericalError: If the state has not converged after ``n_periods``.

    """
    if steps_per_period < MIN_STEPS_PER_PERIOD:
        raise_config_error(
            "InvalidParameter",
            f"steps_per_period must be at least {MIN_STEPS_PER_PERIOD}",
            steps_per_period,
        )
    if omega_mod <= 0.0:
        raise_config_error(
            "InvalidParameter", "the oracle needs omega_mod > 0", omega_mod
        )
    if generators.m0.ndim != 2:
        raise_config_error(
            "InvalidParameter", "the oracle integrates one velocity class at a time"
        )

    period = 2.0 * math.pi / omega_mod
    dt = period / steps_per_period
    half_times = 0.5 * dt * np.arange(2 * steps_per_period + 1)
    phase = np.exp(-1j * omega_mod * half_times)[:, None, None]
    generator_at = (
        generators.static[None, :, :]
        + generators.m_plus[None, :, :] * phase
        + generators.m_minus[None, :, :] * np.conj(phase)
    )
    feed = generators.n

    rho = ground_state()
    samples = np.empty((steps_per_period, N_COMPONENTS), dtype=np.complex128)
    change = math.inf
    periods = 0
    for periods in range(1, n_periods + 1):
        start = rho
        for step in range(steps_per_period):
            samples[step] = rho
            k = 2 * step
            k1 = generator_at[k] @ rho + feed
            k2 = generator_at[k + 1] @ (rho + 0.5 * dt * k1) + feed
            k3 = generator_at[k + 1] @ (rho + 0.5 * dt * k2) + feed
            k4 = generator_at[k + 2] @ (rho + dt * k3) + feed
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        change = float(np.max(np.abs(rho - start)))
        if change < tolerance:
            break
    else:
        raise_numerical_error(
            "NonConvergence",
            "time-domain integration did not reach a periodic state",
            {"periods": n_periods, "change": change, "tolerance": tolerance},
        )
    LOGGER.debug("oracle converged after %d periods (change %.3g)", periods, change)

    sample_times = dt * np.arange(steps_per_period)

    def harmonic(order: int) -> ComplexArray:
        weights = np.exp(1j * order * omega_mod * sample_times)
        return np.asarray(np.mean(samples * weights[:, None], axis=0))

    first = max(np.max(np.abs(harmonic(1))), np.max(np.abs(harmonic(-1))))
    second = max(np.max(np.abs(harmonic(2))), np.max(np.abs(harmonic(-2))))
    residue = float(second / first) if first > 0.0 else 0.0
    return OracleResult(
        solution=FloquetSolution(
            rho0=harmonic(0), rho_plus=harmonic(1), rho_minus=harmonic(-1)
        ),
        periods=periods,
        order2_residue=residue,
        final_change=change,
    )


def max_relative_deviation(
    candidate: FloquetSolution, reference: FloquetSolution, floor: float = 1e-12
) -> float:
    """Largest relative deviation over harmonic components above ``floor``."""
    worst = 0.0
    for got, expected in (
        (candidate.rho0, reference.rho0),
        (candidate.rho_plus, reference.rho_plus),
        (candidate.rho_minus, reference.rho_minus),
    ):
        mask = np.abs(expected) > floor
        if np.any(mask):
            deviation = np.abs(got[mask] - expected[mask]) / np.abs(expected[mask])
            worst = max(worst, float(np.max(deviation)))
    return worst


def is_positive_semidefinite(rho: ComplexArray, tolerance: float = 1e-9) -> bool:
    """Whether a vectorised density matrix is Hermitian and positive."""
    matrix = devectorize(rho)
    if not np.allclose(matrix, np.conj(np.swapaxes(matrix, -1, -2)), atol=tolerance):
        return False
    eigenvalues = np.linalg.eigvalsh(matrix)
    return bool(np.all(eigenvalues >= -tolerance))
