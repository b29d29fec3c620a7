"""Sweeps and derived figures of merit for both receiver protocols.

The conventional protocol (``"cp"``) reads the probe transparency, the
modulation transfer protocol (``"mtp"``) the relative modulation amplitude.
Every sweep point is an independent propagation dispatched through
:func:`rydberg_mtp.parallel.ordered_map`, so results are ordered by grid
index whatever the thread count.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from rydberg_mtp.atom_data import (
    AtomicParams,
    DriveParams,
    ModulationParams,
    mhz_to_angular,
)
from rydberg_mtp.errors import raise_config_error, raise_numerical_error
from rydberg_mtp.liouvillian import RealArray
from rydberg_mtp.medium import (
    CellConfig,
    PropagationResult,
    VelocityGrid,
    propagate_cp,
    propagate_mtp,
)
from rydberg_mtp.parallel import ordered_map

LOGGER = logging.getLogger(__name__)

ProtocolName = Literal["cp", "mtp"]
ContourStatus = Literal["crossed", "open", "below", "undefined"]

OBSERVABLE = {"cp": "transparency", "mtp": "rma"}
DEFAULT_MTP_DELTA_P_MHZ = 0.1
DEFAULT_SLOPE_STEP_MHZ = 0.02
DEFAULT_FIT_WINDOW = 7
FIT_DEGREE = 3
# Fundamental of a 100 % square-wave chopped transparency signal.
CP_LOCK_IN_GAIN = 2.0 / math.pi
REFINE_MAXITER = 4


@dataclass(frozen=True)
class Axis:
    """A named, strictly increasing sweep axis.

    ``name`` doubles as the CSV column header (for example ``delta_p_mhz``).
    """

    name: str
    unit: str
    values: RealArray

    def __post_init__(self) -> None:
        """Check the axis is one-dimensional and strictly increasing."""
        if self.values.ndim != 1:
            raise_config_error("InvalidGrid", f"axis '{self.name}' must be 1D")
        if self.values.size > 1 and not np.all(np.diff(self.values) > 0.0):
            raise_config_error(
                "InvalidGrid", f"axis '{self.name}' must be strictly increasing"
            )

    @property
    def size(self) -> int:
        """Number of grid points."""
        return int(self.values.size)

    def describe(self) -> dict[str, object]:
        """JSON-friendly axis summary."""
        summary: dict[str, object] = {"name": self.name, "unit": self.unit}
        summary["points"] = self.size
        if self.size:
            summary["start"] = float(self.values[0])
            summary["stop"] = float(self.values[-1])
        return summary


def linear_axis(name: str, unit: str, start: float, stop: float, points: int) -> Axis:
    """Evenly spaced axis; one point yields ``[start]``, zero an empty axis."""
    if points < 0:
        raise_config_error("InvalidGrid", f"axis '{name}' needs points >= 0", points)
    values = np.linspace(start, stop, points) if points > 1 else np.full(points, start)
    return Axis(name=name, unit=unit, values=np.asarray(values, dtype=np.float64))


@dataclass(frozen=True)
class SpectrumResult:
    """Observable sampled along one axis, with optional extra columns."""

    axis: Axis
    values: RealArray
    value_name: str
    metadata: dict[str, object] = field(default_factory=dict)
    extras: dict[str, RealArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Check every column matches the axis length."""
        for column in (self.values, *self.extras.values()):
            if column.shape != self.axis.values.shape:
                raise_numerical_error(
                    "GridMismatch", "spectrum column does not match its axis"
                )


@dataclass(frozen=True)
class MapResult:
    """Observable on a 2D grid; ``values[j, i]`` belongs to (y_j, x_i)."""

    x_axis: Axis
    y_axis: Axis
    values: RealArray
    value_name: str
    metadata: dict[str, object] = field(default_factory=dict)
    extras: dict[str, RealArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Check every layer has shape (len(y), len(x))."""
        shape = (self.y_axis.size, self.x_axis.size)
        for layer in (self.values, *self.extras.values()):
            if layer.shape != shape:
                raise_numerical_error(
                    "GridMismatch",
                    "map values do not match their axes",
                    {"expected": shape, "got": layer.shape},
                )

    def same_grid(self, other: MapResult) -> bool:
        """Whether both maps share identical axes."""
        return bool(
            np.array_equal(self.x_axis.values, other.x_axis.values)
            and np.array_equal(self.y_axis.values, other.y_axis.values)
        )


@dataclass(frozen=True)
class Simulation:
    """Everything a propagation needs, plus the worker count for sweeps."""

    params: AtomicParams
    drive: DriveParams
    mod: ModulationParams
    cell: CellConfig
    grid: VelocityGrid
    threads: int = 1

    def propagate(
        self, protocol: ProtocolName, drive: DriveParams
    ) -> PropagationResult:
        """Run one propagation at ``drive`` for the given protocol."""
        if protocol == "mtp":
            return propagate_mtp(self.cell, self.grid, self.params, drive, self.mod)
        return propagate_cp(self.cell, self.grid, self.params, drive)

    def baseline(self, drive: DriveParams) -> float:
        """Coupling-off transmission at the probe detuning of ``drive``."""
        return propagate_cp(
            self.cell, self.grid, self.params, drive.without_coupling()
        ).transmission

    def observe(
        self, protocol: ProtocolName, drive: DriveParams, baseline: float | None = None
    ) -> float:
        """Transparency (cp) or R.M.A (mtp) at ``drive``."""
        result = self.propagate(protocol, drive)
        if protocol == "mtp":
            return result.rma
        reference = self.baseline(drive) if baseline is None else baseline
        return result.transmission - reference

    def metadata(self, protocol: ProtocolName) -> dict[str, object]:
        """Operating parameters echoed next to every result."""
        meta: dict[str, object] = {
            "protocol": protocol,
            "observable": OBSERVABLE[protocol],
            "atomic_density_m3": self.cell.atomic_density,
            "num_slices": self.cell.num_slices,
            "velocity_nodes": self.grid.size,
        }
        if protocol == "mtp":
            meta["omega_mod_mhz"] = self.mod.omega_mod / (2.0e6 * math.pi)
            meta["beta"] = self.mod.beta
            meta["attenuate_sidebands"] = self.cell.attenuate_sidebands
        return meta


def _check_protocol(protocol: str) -> ProtocolName:
    if protocol not in OBSERVABLE:
        raise_config_error(
            "InvalidParameter", "protocol must be 'cp' or 'mtp'", protocol
        )
    return "cp" if protocol == "cp" else "mtp"


def _at_detuning(drive: DriveParams, delta_p_mhz: float) -> DriveParams:
    return drive.with_probe_detuning(mhz_to_angular(delta_p_mhz))


def spectrum(sim: Simulation, protocol: str, axis: Axis) -> SpectrumResult:
    """Observable versus probe detuning Δ_p/2π (MHz).

    CP spectra carry an extra ``transmission`` column; MTP spectra carry
    ``transmission`` and the two demodulated quadratures ``rma_in_phase``
    and ``rma_quadrature``.
    """
    name = _check_protocol(protocol)

    def point(delta_p_mhz: float) -> tuple[float, float, complex]:
        drive = _at_detuning(sim.drive, delta_p_mhz)
        result = sim.propagate(name, drive)
        if name == "mtp":
            return result.rma, result.transmission, result.beat
        value = result.transmission - sim.baseline(drive)
        return value, result.transmission, 0j

    rows = ordered_map(point, axis.values.tolist(), sim.threads)
    values = np.array([row[0] for row in rows], dtype=np.float64)
    extras = {"transmission": np.array([row[1] for row in rows], dtype=np.float64)}
    if name == "mtp":
        beats = np.array([row[2] for row in rows], dtype=np.complex128)
        extras["rma_in_phase"] = beats.real.copy()
        extras["rma_quadrature"] = beats.imag.copy()
    LOGGER.info("%s spectrum over %d detunings", name, axis.size)
    return SpectrumResult(
        axis=axis,
        values=values,
        value_name=OBSERVABLE[name],
        metadata=sim.metadata(name),
        extras=extras,
    )


def modulation_map(
    sim: Simulation,
    omega_axis: Axis,
    beta_axis: Axis,
    delta_p_axis: Axis,
    slope_delta_p_mhz: float = DEFAULT_MTP_DELTA_P_MHZ,
    slope_step_mhz: float = DEFAULT_SLOPE_STEP_MHZ,
    refine: bool = True,
) -> tuple[MapResult, MapResult]:
    """R.M.A amplitude and slope over (ω_mod/2π, β) with E_RF = 0.

    The amplitude is the maximum of the R.M.A spectrum sampled on
    ``delta_p_axis``, refined by a short bounded scalar search between the
    neighbours of the best sample (clipped to the grid). At E_RF = 0 with a
    resonant coupling the spectrum is even in Δ_p, so a window starting at
    zero covers both lobes. The slope is the central difference
    d(R.M.A)/d(Δ_p/2π) at ``slope_delta_p_mhz`` with half-step
    ``slope_step_mhz`` (per MHz).
    """
    if delta_p_axis.size < 1:
        raise_config_error("InvalidGrid", "modulation map needs a detuning grid")
    if not slope_step_mhz > 0.0:
        raise_config_error("InvalidParameter", "slope step must be positive")
    drive = sim.drive.with_rf(0.0)
    detunings = delta_p_axis.values

    def point(cell: tuple[float, float]) -> tuple[float, float, float]:
        beta, omega_mhz = cell
        if beta == 0.0:
            return 0.0, 0.0, 0.0
        mod = replace(sim.mod, omega_mod=mhz_to_angular(omega_mhz), beta=beta)
        local = replace(sim, mod=mod)

        def rma_at(delta_p_mhz: float) -> float:
            return local.observe("mtp", _at_detuning(drive, delta_p_mhz))

        coarse = np.array([rma_at(x) for x in detunings])
        best = int(np.argmax(coarse))
        peak, where = float(coarse[best]), float(detunings[best])
        low = float(detunings[max(best - 1, 0)])
        high = float(detunings[min(best + 1, detunings.size - 1)])
        if refine and low < high:
            search = minimize_scalar(
                lambda x: -rma_at(float(x)),
                bounds=(low, high),
                method="bounded",
                options={"xatol": 1e-3, "maxiter": REFINE_MAXITER},
            )
            if -float(search.fun) > peak:
                peak, where = -float(search.fun), float(search.x)
        slope = (
            rma_at(slope_delta_p_mhz + slope_step_mhz)
            - rma_at(slope_delta_p_mhz - slope_step_mhz)
        ) / (2.0 * slope_step_mhz)
        return peak, slope, where

    cells = [
        (b, w) for b in beta_axis.values.tolist() for w in omega_axis.values.tolist()
    ]
    rows = ordered_map(point, cells, sim.threads)
    shape = (beta_axis.size, omega_axis.size)
    amplitude = np.array([row[0] for row in rows], dtype=np.float64).reshape(shape)
    slope = np.array([row[1] for row in rows], dtype=np.float64).reshape(shape)
    location = np.array([row[2] for row in rows], dtype=np.float64).reshape(shape)
    meta = sim.metadata("mtp")
    meta.update(
        {
            "slope_delta_p_mhz": slope_delta_p_mhz,
            "slope_step_mhz": slope_step_mhz,
            "detuning_grid": delta_p_axis.describe(),
        }
    )
    LOGGER.info("modulation map of %d x %d points", *shape)
    return (
        MapResult(
            x_axis=omega_axis,
            y_axis=beta_axis,
            values=amplitude,
            value_name="rma_amplitude",
            metadata=meta,
            extras={"peak_delta_p_mhz": location},
        ),
        MapResult(
            x_axis=omega_axis,
            y_axis=beta_axis,
            values=slope,
            value_name="rma_slope_per_mhz",
            metadata=meta,
        ),
    )


def operating_drive(
    sim: Simulation,
    protocol: ProtocolName,
    cp_delta_p_mhz: float = 0.0,
    mtp_delta_p_mhz: float = DEFAULT_MTP_DELTA_P_MHZ,
) -> DriveParams:
    """Probe detuning used for RF measurements with each protocol."""
    delta = mtp_delta_p_mhz if protocol == "mtp" else cp_delta_p_mhz
    return _at_detuning(sim.drive, delta)


def response_curve(
    sim: Simulation,
    protocol: str,
    delta_rf_mhz: float,
    e_axis: Axis,
    cp_delta_p_mhz: float = 0.0,
    mtp_delta_p_mhz: float = DEFAULT_MTP_DELTA_P_MHZ,
) -> SpectrumResult:
    """Detector observable versus exterior RF field E_RF (V/m)."""
    name = _check_protocol(protocol)
    response = response_map(
        sim,
        name,
        e_axis,
        Axis("delta_rf_mhz", "MHz", np.array([delta_rf_mhz])),
        cp_delta_p_mhz,
        mtp_delta_p_mhz,
    )
    meta = dict(response.metadata)
    meta["delta_rf_mhz"] = delta_rf_mhz
    return SpectrumResult(
        axis=e_axis,
        values=response.values[0].copy(),
        value_name=response.value_name,
        metadata=meta,
    )


def response_map(
    sim: Simulation,
    protocol: str,
    e_axis: Axis,
    delta_rf_axis: Axis,
    cp_delta_p_mhz: float = 0.0,
    mtp_delta_p_mhz: float = DEFAULT_MTP_DELTA_P_MHZ,
) -> MapResult:
    """Observable over E_RF (x, V/m) and Δ_RF/2π (y, MHz)."""
    name = _check_protocol(protocol)
    drive = operating_drive(sim, name, cp_delta_p_mhz, mtp_delta_p_mhz)
    baseline = sim.baseline(drive) if name == "cp" else None

    def point(cell: tuple[float, float]) -> float:
        delta_rf_mhz, e_rf = cell
        local = drive.with_rf(e_rf, mhz_to_angular(delta_rf_mhz))
        return sim.observe(name, local, baseline)

    cells = [
        (d, e) for d in delta_rf_axis.values.tolist() for e in e_axis.values.tolist()
    ]
    values = np.array(ordered_map(point, cells, sim.threads), dtype=np.float64)
    meta = sim.metadata(name)
    meta["delta_p_mhz"] = mtp_delta_p_mhz if name == "mtp" else cp_delta_p_mhz
    LOGGER.info("%s response over %d points", name, len(cells))
    return MapResult(
        x_axis=e_axis,
        y_axis=delta_rf_axis,
        values=values.reshape(delta_rf_axis.size, e_axis.size),
        value_name=OBSERVABLE[name],
        metadata=meta,
    )


def windowed_derivative(
    x: RealArray, y: RealArray, window: int = DEFAULT_FIT_WINDOW
) -> RealArray:
    """Derivative of a sampled curve from sliding cubic least-squares fits.

    Each point uses the ``window`` samples centred on it, shifted inwards at
    the edges.
    """
    n = x.size
    if n < FIT_DEGREE + 1:
        raise_numerical_error(
            "FitFailure", f"need at least {FIT_DEGREE + 1} samples to fit", n
        )
    if window < FIT_DEGREE + 1:
        raise_config_error(
            "InvalidParameter", f"fit window must hold at least {FIT_DEGREE + 1} points"
        )
    width = min(window, n)
    slopes = np.empty(n, dtype=np.float64)
    for i in range(n):
        start = min(max(i - width // 2, 0), n - width)
        segment = slice(start, start + width)
        fit = Polynomial.fit(x[segment], y[segment], FIT_DEGREE)
        slopes[i] = fit.deriv()(x[i])
    return slopes


def differentiate_response(
    response: MapResult, window: int = DEFAULT_FIT_WINDOW
) -> MapResult:
    """Slope ∂(observable)/∂E_RF of every row of a response map."""
    slopes = np.array(
        [
            windowed_derivative(response.x_axis.values, row, window)
            for row in response.values
        ],
        dtype=np.float64,
    ).reshape(response.values.shape)
    meta = dict(response.metadata)
    meta["fit_window"] = window
    meta["fit_degree"] = FIT_DEGREE
    return MapResult(
        x_axis=response.x_axis,
        y_axis=response.y_axis,
        values=slopes,
        value_name=f"{response.value_name}_slope_per_v_per_m",
        metadata=meta,
    )


def slope_map(
    sim: Simulation,
    protocol: str,
    e_axis: Axis,
    delta_rf_axis: Axis,
    window: int = DEFAULT_FIT_WINDOW,
    cp_delta_p_mhz: float = 0.0,
    mtp_delta_p_mhz: float = DEFAULT_MTP_DELTA_P_MHZ,
) -> MapResult:
    """Response slopes over (E_RF, Δ_RF)."""
    response = response_map(
        sim, protocol, e_axis, delta_rf_axis, cp_delta_p_mhz, mtp_delta_p_mhz
    )
    return differentiate_response(response, window)


@dataclass(frozen=True)
class ContourCrossing:
    """Where a slope profile falls below a dB level.

    ``status`` is ``crossed`` (``delta_rf_mhz`` interpolated), ``open`` (not
    reached inside the grid; ``delta_rf_mhz`` is the grid end, a lower
    bound), ``below`` (the profile never reaches the level) or
    ``undefined`` (zero reference).
    """

    level_db: float
    status: ContourStatus
    delta_rf_mhz: float | None


@dataclass(frozen=True)
class BandwidthReport:
    """Bandwidth contours of one protocol against the CP resonant reference."""

    protocol: str
    reference_slope: float
    reference_e_rf: float
    probe_field: float
    delta_rf_axis: RealArray
    profile: RealArray
    contour_minus6: ContourCrossing
    contour_minus10: ContourCrossing


def contour_crossing(
    axis: RealArray, profile: RealArray, reference: float, level_db: float
) -> ContourCrossing:
    """First downward crossing of reference·10^(level/20) after the peak."""
    threshold = reference * 10.0 ** (level_db / 20.0)
    if not threshold > 0.0 or profile.size == 0:
        return ContourCrossing(level_db, "undefined", None)
    peak = int(np.argmax(profile))
    if profile[peak] < threshold:
        return ContourCrossing(level_db, "below", None)
    for j in range(peak + 1, profile.size):
        if profile[j] < threshold:
            x0, x1 = float(axis[j - 1]), float(axis[j])
            p0, p1 = float(profile[j - 1]), float(profile[j])
            return ContourCrossing(
                level_db, "crossed", x0 + (threshold - p0) * (x1 - x0) / (p1 - p0)
            )
    return ContourCrossing(level_db, "open", float(axis[-1]))


def _profile_at_field(slopes: MapResult, e_rf: float) -> RealArray:
    x = slopes.x_axis.values
    return np.array(
        [np.interp(e_rf, x, np.abs(row)) for row in slopes.values], dtype=np.float64
    )


def bandwidth(
    slopes: MapResult,
    cp_slopes: MapResult,
    probe_field: float,
    protocol: str = "cp",
    cp_gain: float = 1.0,
) -> BandwidthReport:
    """−6 dB and −10 dB RF bandwidths of ``slopes`` at a small field.

    The profile is |slope| at E_RF = ``probe_field`` versus Δ_RF, linearly
    interpolated along E_RF. The reference is the CP |slope| at Δ_RF = 0 and
    the same field, scaled by ``cp_gain``, the lock-in gain of the chopped
    CP readout relative to the MTP demodulation. A CP profile carries the
    same gain, so its contours do not depend on it.
    """
    if cp_slopes.y_axis.size == 0 or not np.isclose(cp_slopes.y_axis.values[0], 0.0):
        raise_numerical_error(
            "GridMismatch", "the reference slope map must start at delta_rf = 0"
        )
    if not cp_gain > 0.0:
        raise_config_error("InvalidParameter", "cp gain must be positive", cp_gain)
    reference = cp_gain * float(_profile_at_field(cp_slopes, probe_field)[0])
    axis = slopes.y_axis.values
    profile = _profile_at_field(slopes, probe_field)
    if protocol == "cp":
        profile = cp_gain * profile
    return BandwidthReport(
        protocol=protocol,
        reference_slope=reference,
        reference_e_rf=probe_field,
        probe_field=probe_field,
        delta_rf_axis=axis,
        profile=profile,
        contour_minus6=contour_crossing(axis, profile, reference, -6.0),
        contour_minus10=contour_crossing(axis, profile, reference, -10.0),
    )


@dataclass(frozen=True)
class SensitivityReport:
    """Noise-equivalent field S = V0/(|slope|·√RBW) in V·m⁻¹·Hz^(−1/2)."""

    slope: float
    noise_v0: float
    rbw: float
    sensitivity: float
    infinite: bool


def sensitivity(slope: float, noise_v0: float, rbw: float) -> SensitivityReport:
    """Apply S = V0/(|slope|·√RBW); a zero slope yields an infinite S, flagged."""
    if not rbw > 0.0:
        raise_config_error("InvalidParameter", "rbw must be positive", rbw)
    if noise_v0 < 0.0:
        raise_config_error("InvalidParameter", "noise_v0 must be non-negative")
    magnitude = abs(slope)
    if magnitude == 0.0:
        return SensitivityReport(slope, noise_v0, rbw, math.inf, True)
    value = noise_v0 / (magnitude * math.sqrt(rbw))
    return SensitivityReport(slope, noise_v0, rbw, value, False)


@dataclass(frozen=True)
class SensitivityComparison:
    """CP and MTP sensitivities at one RF detuning."""

    delta_rf_mhz: float
    e_rf: float
    cp: SensitivityReport
    mtp: SensitivityReport

    @property
    def improvement(self) -> float | None:
        """S_CP / S_MTP; above 1 when the MTP is more sensitive."""
        if self.mtp.infinite:
            return None if self.cp.infinite else 0.0
        return self.cp.sensitivity / self.mtp.sensitivity


def slope_at(slopes: MapResult, e_rf: float, delta_rf_mhz: float) -> float:
    """Bilinear interpolation of a slope map, clamped to its grid."""
    along_e = np.array(
        [np.interp(e_rf, slopes.x_axis.values, row) for row in slopes.values]
    )
    return float(np.interp(delta_rf_mhz, slopes.y_axis.values, along_e))


def sensitivity_table(
    cp_slopes: MapResult,
    mtp_slopes: MapResult,
    e_rf: float,
    delta_rf_values: Sequence[float],
    noise_cp: float,
    noise_mtp: float,
    rbw: float,
    responsivity: float = 1.0,
    cp_gain: float = 1.0,
) -> list[SensitivityComparison]:
    """Sensitivities of both protocols at fixed field for several RF detunings.

    ``responsivity`` (V per unit of observable) converts the dimensionless
    slopes to V per (V/m). CP slopes are further scaled by ``cp_gain``.
    """
    if not responsivity > 0.0:
        raise_config_error("InvalidParameter", "responsivity must be positive")
    if not cp_gain > 0.0:
        raise_config_error("InvalidParameter", "cp gain must be positive", cp_gain)
    rows = []
    for delta in delta_rf_values:
        cp_slope = cp_gain * responsivity * slope_at(cp_slopes, e_rf, delta)
        mtp_slope = responsivity * slope_at(mtp_slopes, e_rf, delta)
        rows.append(
            SensitivityComparison(
                delta_rf_mhz=float(delta),
                e_rf=e_rf,
                cp=sensitivity(cp_slope, noise_cp, rbw),
                mtp=sensitivity(mtp_slope, noise_mtp, rbw),
            )
        )
    return rows


def ratio_map(
    mtp_slopes: MapResult,
    cp_slopes: MapResult,
    floor: float,
    cp_gain: float = 1.0,
) -> MapResult:
    """Element-wise |MTP|/max(cp_gain·|CP|, floor).

    Entries whose scaled CP slope is below ``floor`` are flagged in the
    ``capped`` layer (1.0 where capped); capped entries where both scaled
    slopes agree keep a ratio of 1.
    """
    if not mtp_slopes.same_grid(cp_slopes):
        raise_numerical_error("GridMismatch", "ratio needs slope maps on one grid")
    if not floor > 0.0:
        raise_config_error("InvalidParameter", "ratio floor must be positive", floor)
    if not cp_gain > 0.0:
        raise_config_error("InvalidParameter", "cp gain must be positive", cp_gain)
    cp = cp_gain * np.abs(cp_slopes.values)
    mtp = np.abs(mtp_slopes.values)
    capped = cp < floor
    ratio = mtp / np.maximum(cp, floor)
    ratio[capped & (mtp == cp)] = 1.0
    meta = {
        "numerator": mtp_slopes.metadata,
        "denominator": cp_slopes.metadata,
        "floor": floor,
        "cp_gain": cp_gain,
    }
    return MapResult(
        x_axis=cp_slopes.x_axis,
        y_axis=cp_slopes.y_axis,
        values=ratio,
        value_name="slope_ratio",
        metadata=meta,
        extras={"capped": capped.astype(np.float64)},
    )


def first_crossing(axis: RealArray, profile: RealArray, level: float) -> float | None:
    """First upward crossing of ``level``, linearly interpolated."""
    if profile.size and profile[0] >= level:
        return float(axis[0])
    for j in range(1, profile.size):
        if profile[j - 1] < level <= profile[j]:
            x0, x1 = float(axis[j - 1]), float(axis[j])
            p0, p1 = float(profile[j - 1]), float(profile[j])
            return x0 + (level - p0) * (x1 - x0) / (p1 - p0)
    return None


def ratio_crossover(ratios: MapResult, e_rf: float, level: float = 1.0) -> float | None:
    """Smallest Δ_RF/2π where the ratio at field ``e_rf`` reaches ``level``."""
    profile = np.array(
        [np.interp(e_rf, ratios.x_axis.values, row) for row in ratios.values]
    )
    return first_crossing(ratios.y_axis.values, profile, level)


def field_scan(
    sim: Simulation,
    protocol: str,
    delta_p_axis: Axis,
    e_axis: Axis,
    delta_rf_mhz: float = 0.0,
) -> MapResult:
    """Spectra versus probe detuning (x) for several RF fields (y)."""
    name = _check_protocol(protocol)
    delta_rf = mhz_to_angular(delta_rf_mhz)
    detunings = delta_p_axis.values.tolist()
    baselines: list[float | None] = [None] * len(detunings)
    if name == "cp":
        found = ordered_map(
            lambda d: sim.baseline(_at_detuning(sim.drive, d)), detunings, sim.threads
        )
        baselines = [float(value) for value in found]

    def point(cell: tuple[float, int]) -> float:
        e_rf, column = cell
        drive = _at_detuning(sim.drive, detunings[column]).with_rf(e_rf, delta_rf)
        return sim.observe(name, drive, baselines[column])

    cells = [(e, i) for e in e_axis.values.tolist() for i in range(len(detunings))]
    values = np.array(ordered_map(point, cells, sim.threads), dtype=np.float64)
    meta = sim.metadata(name)
    meta["delta_rf_mhz"] = delta_rf_mhz
    return MapResult(
        x_axis=delta_p_axis,
        y_axis=e_axis,
        values=values.reshape(e_axis.size, delta_p_axis.size),
        value_name=OBSERVABLE[name],
        metadata=meta,
    )


def _relative_change(refined: float, base: float) -> float:
    if base == 0.0:
        return abs(refined - base)
    return abs(refined - base) / abs(base)


def convergence_diagnostics(
    sim: Simulation, refined_grid: VelocityGrid
) -> dict[str, float]:
    """Relative change of the observables when slices or nodes are doubled.

    Evaluated at the configured drive with the MTP pipeline, which reduces
    to the CP pipeline when the coupling is unmodulated.
    """
    base = sim.propagate("mtp", sim.drive)
    thin = replace(sim, cell=replace(sim.cell, num_slices=2 * sim.cell.num_slices))
    fine = replace(sim, grid=refined_grid)
    sliced = thin.propagate("mtp", sim.drive)
    nodes = fine.propagate("mtp", sim.drive)
    return {
        "base_transmission": base.transmission,
        "base_rma": base.rma,
        "slices_transmission_change": _relative_change(
            sliced.transmission, base.transmission
        ),
        "slices_rma_change": _relative_change(sliced.rma, base.rma),
        "nodes_transmission_change": _relative_change(
            nodes.transmission, base.transmission
        ),
        "nodes_rma_change": _relative_change(nodes.rma, base.rma),
        "velocity_nodes": float(sim.grid.size),
        "refined_velocity_nodes": float(refined_grid.size),
    }
