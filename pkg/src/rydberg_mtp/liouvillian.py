"""Vectorised generators of the four-level master equation.

The density matrix is flattened row-major, so component ``4*(i-1) + (j-1)``
holds ρ_ij (levels numbered from 1). With that ordering
``vec(A ρ) = kron(A, I) vec(ρ)`` and ``vec(ρ B) = kron(I, Bᵀ) vec(ρ)``.

Hamiltonians are returned in units of ħ (rad/s). Every builder accepts either
a scalar velocity or an array of velocities; array inputs produce a leading
batch axis on the velocity-dependent pieces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from rydberg_mtp.atom_data import AtomicParams, DriveParams, ModulationParams

N_LEVELS = 4
N_COMPONENTS = N_LEVELS * N_LEVELS

ComplexArray = NDArray[np.complex128]
RealArray = NDArray[np.float64]

_IDENTITY = np.eye(N_LEVELS, dtype=np.complex128)


def index(i: int, j: int) -> int:
    """Position of ρ_ij in the 16-component vector (levels numbered from 1)."""
    return N_LEVELS * (i - 1) + (j - 1)


POPULATION_INDICES = tuple(index(i, i) for i in range(1, N_LEVELS + 1))
RHO21 = index(2, 1)


def vectorize(rho: ArrayLike) -> ComplexArray:
    """Flatten a (batch of) 4×4 density matrices into 16-component vectors."""
    matrix = np.asarray(rho, dtype=np.complex128)
    return matrix.reshape(*matrix.shape[:-2], N_COMPONENTS)


def devectorize(vector: ArrayLike) -> ComplexArray:
    """Inverse of :func:`vectorize`."""
    flat = np.asarray(vector, dtype=np.complex128)
    return flat.reshape(*flat.shape[:-1], N_LEVELS, N_LEVELS)


def transpose_permutation() -> NDArray[np.intp]:
    """Index map sending vec(ρ) to vec(ρᵀ)."""
    return np.array(
        [N_LEVELS * j + i for i in range(N_LEVELS) for j in range(N_LEVELS)],
        dtype=np.intp,
    )


def ground_state() -> ComplexArray:
    """Vectorised |1⟩⟨1|."""
    state = np.zeros(N_COMPONENTS, dtype=np.complex128)
    state[index(1, 1)] = 1.0
    return state


@dataclass(frozen=True)
class GeneratorSet:
    """Pieces of dρ/dt = (M0 + M₊e^{−iωt} + M₋e^{+iωt} − R) ρ + N.

    ``m0`` carries a leading velocity axis when built for several velocity
    classes; the sideband blocks, ``r`` and ``n`` do not depend on velocity.
    """

    m0: ComplexArray
    m_plus: ComplexArray
    m_minus: ComplexArray
    r: RealArray
    n: ComplexArray

    @property
    def is_modulated(self) -> bool:
        """Whether any sideband block is non-zero."""
        return bool(np.any(self.m_plus) or np.any(self.m_minus))

    @property
    def static(self) -> ComplexArray:
        """The time-independent generator L0 = M0 − R."""
        return self.m0 - self.r


def build_hamiltonian(
    params: AtomicParams,
    drive: DriveParams,
    mod: ModulationParams,
    velocity: ArrayLike = 0.0,
    rabi_probe: complex | None = None,
) -> tuple[ComplexArray, ComplexArray, ComplexArray]:
    """Return the carrier, +1 and −1 Hamiltonians in units of ħ.

    The carrier reproduces the rotating-frame ladder Hamiltonian with the
    coupling Rabi frequency scaled by the carrier amplitude ``a0`` and with
    Doppler-shifted detunings Δ21 − k_p v and Δ31 − k_p v + k_c v. The sideband
    matrices hold only the (2,3)/(3,2) coupling terms oscillating as
    e^{−iωt} (+1) and e^{+iωt} (−1); they are Hermitian conjugates of each
    other.

    Args:
        params: Atomic level structure.
        drive: Field amplitudes and detunings.
        mod: Coupling phase modulation.
        velocity: Longitudinal velocity (m/s), scalar or array.
        rabi_probe: Optional complex probe Rabi frequency replacing
            ``drive.rabi_probe`` (used for the locally propagated field).

    """
    v = np.asarray(velocity, dtype=np.float64)
    omega_p = complex(drive.rabi_probe if rabi_probe is None else rabi_probe)
    omega_c = mod.a0 * drive.rabi_coupling
    omega_rf = drive.rabi_rf(params)

    delta_21 = drive.delta_p - params.k_probe * v
    delta_31 = drive.delta_2photon + (params.k_coupling - params.k_probe) * v
    delta_41 = delta_31 - drive.delta_rf

    carrier = np.zeros((*v.shape, N_LEVELS, N_LEVELS), dtype=np.complex128)
    carrier[..., 0, 1] = -0.5 * np.conj(omega_p)
    carrier[..., 1, 0] = -0.5 * omega_p
    carrier[..., 1, 2] = -0.5 * omega_c
    carrier[..., 2, 1] = -0.5 * omega_c
    carrier[..., 2, 3] = -0.5 * omega_rf
    carrier[..., 3, 2] = -0.5 * omega_rf
    carrier[..., 1, 1] = -delta_21
    carrier[..., 2, 2] = -delta_31
    carrier[..., 3, 3] = -delta_41

    # Ω_c(t) = Ω_c (a0 + s·a1 e^{−iωt} − s·a1 e^{+iωt})
    sideband = mod.sideband_sign * mod.a1 * drive.rabi_coupling
    plus = np.zeros((N_LEVELS, N_LEVELS), dtype=np.complex128)
    plus[2, 1] = -0.5 * sideband
    plus[1, 2] = 0.5 * sideband
    minus = plus.conj().T.copy()
    return carrier, plus, minus


def commutator_superoperator(hamiltonian: ArrayLike) -> ComplexArray:
    """Vectorised −i[H, ·] for a (batch of) Hamiltonians in units of ħ."""
    h = np.asarray(hamiltonian, dtype=np.complex128)
    batch = h.shape[:-2]
    left = np.einsum("...ij,kl->...ikjl", h, _IDENTITY)
    right = np.einsum("ij,...lk->...ikjl", _IDENTITY, h)
    shape = (*batch, N_COMPONENTS, N_COMPONENTS)
    return np.asarray(-1j * (left - right).reshape(shape), dtype=np.complex128)


def relaxation_matrix(params: AtomicParams) -> RealArray:
    """Relaxation matrix R of dρ/dt = ... − Rρ.

    Populations decay at Γ_i + γ_t and cascade |4⟩→|3⟩→|2⟩→|1⟩; coherences
    decay at (Γ_i + Γ_j)/2 + γ_t.
    """
    gammas = (0.0, params.gamma_2, params.gamma_3, params.gamma_4)
    transit = params.transit_rate
    r = np.zeros((N_COMPONENTS, N_COMPONENTS), dtype=np.float64)
    for i in range(N_LEVELS):
        for j in range(N_LEVELS):
            k = N_LEVELS * i + j
            if i == j:
                r[k, k] = gammas[i] + transit
            else:
                r[k, k] = 0.5 * (gammas[i] + gammas[j]) + transit
    for upper in range(1, N_LEVELS):
        lower = upper - 1
        r[N_LEVELS * lower + lower, N_LEVELS * upper + upper] = -gammas[upper]
    return r


def feed_vector(params: AtomicParams) -> ComplexArray:
    """Source term N: ground-state feed γ_in, zero elsewhere."""
    n = np.zeros(N_COMPONENTS, dtype=np.complex128)
    n[index(1, 1)] = params.feed_rate
    return n


def build_generators(
    params: AtomicParams,
    drive: DriveParams,
    mod: ModulationParams,
    velocity: ArrayLike = 0.0,
    rabi_probe: complex | None = None,
) -> GeneratorSet:
    """Assemble the vectorised generator for one or several velocity classes."""
    carrier, plus, minus = build_hamiltonian(params, drive, mod, velocity, rabi_probe)
    return GeneratorSet(
        m0=commutator_superoperator(carrier),
        m_plus=commutator_superoperator(plus),
        m_minus=commutator_superoperator(minus),
        r=relaxation_matrix(params),
        n=feed_vector(params),
    )
