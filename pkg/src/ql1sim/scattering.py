"""Head-on Lennard-Jones collision of two atoms and a two-level Hamiltonian driven by it.

SI units are used for the classical trajectory; the induced Hamiltonian lives
on a dimensionless time axis ``tau = t / time_unit`` (default 1 ps) with
separations measured in ``length_unit`` (default 1 angstrom).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import kernels
from .errors import InvalidArgument, NonPositiveSeparation, StepTooLarge
from .hamcore import DenseHamiltonian, NormKind, norm_profile, time_l1_norm
from .linalg import X, Z

K_BOLTZMANN = 1.380649e-23
ATOMIC_MASS = 1.66053906660e-27
HELIUM_MASS = 4.002602 * ATOMIC_MASS
ANGSTROM = 1e-10
PICOSECOND = 1e-12
DEFAULT_DT = 5e-17
DRIFT_LIMIT = 1e-6


@dataclass(frozen=True)
class LJParams:
    """Pair potential ``eps((r_m/r)^12 - 2 (r_m/r)^6)`` and initial conditions.

    ``epsilon`` is in joules; ``mass`` is the mass of one of the two identical
    atoms; ``v0`` is the initial closing speed.
    """

    epsilon: float
    r_m: float
    mass: float
    r0: float
    v0: float

    def __post_init__(self):
        if self.r_m <= 0 or self.mass <= 0 or self.r0 <= 0:
            raise NonPositiveSeparation("r_m, mass and r0 must be positive")
        if self.epsilon < 0 or self.v0 < 0:
            raise InvalidArgument("epsilon and v0 must be nonnegative")

    @classmethod
    def from_kelvin(cls, epsilon_kelvin: float, r_m: float, mass: float, r0: float, v0: float) -> "LJParams":
        return cls(epsilon_kelvin * K_BOLTZMANN, r_m, mass, r0, v0)

    @property
    def reduced_mass(self) -> float:
        return 0.5 * self.mass


def rms_speed(mass: float, temperature: float) -> float:
    return math.sqrt(3 * K_BOLTZMANN * temperature / mass)


# Helium pair parameters eps/k_B = 10.22 K, sigma = 2.556 A (r_m = 2^(1/6) sigma),
# closing at the 25 C root-mean-square speed from 2 nm.
HELIUM_PARAMS = LJParams.from_kelvin(
    10.22, 2 ** (1 / 6) * 2.556 * ANGSTROM, HELIUM_MASS, 2e-9, rms_speed(HELIUM_MASS, 298.15)
)
# Rounded reference values (20 nm start, 1350 m/s).
QUOTED_PARAMS = LJParams.from_kelvin(10.0, 2.6 * ANGSTROM, HELIUM_MASS, 20e-9, 1350.0)
COLLISION_T_END = 2e-12


def _check_r(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise NonPositiveSeparation("separation must be positive")
    return r


def lj_potential(r, params: LJParams):
    r = _check_r(r)
    q6 = (params.r_m / r) ** 6
    return params.epsilon * (q6 * q6 - 2 * q6)


def lj_force(r, params: LJParams):
    """Radial force ``-dV/dr``."""
    r = _check_r(r)
    q6 = (params.r_m / r) ** 6
    return 12 * params.epsilon / r * (q6 * q6 - q6)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    separations: np.ndarray
    potential: np.ndarray
    velocities: np.ndarray
    params: LJParams

    def energy(self) -> np.ndarray:
        return 0.5 * self.params.reduced_mass * self.velocities**2 + self.potential

    def energy_drift(self) -> float:
        e = self.energy()
        scale = abs(e[0]) if e[0] != 0 else max(np.max(np.abs(self.potential)), 1e-300)
        return float(np.max(np.abs(e - e[0])) / scale)


def verlet(params: LJParams, r0: float, vr0: float, t_end: float, dt: float) -> Trajectory:
    """Velocity-Verlet run from separation ``r0`` with signed radial velocity ``vr0``."""
    if not dt > 0:
        raise InvalidArgument("dt must be positive")
    n = max(1, int(math.ceil(t_end / dt - 1e-9)))
    step = t_end / n
    try:
        r, v = kernels.lj_verlet(r0, vr0, params.epsilon, params.r_m, params.reduced_mass, step, n)
    except FloatingPointError as exc:
        raise StepTooLarge(str(exc)) from exc
    times = np.arange(n + 1) * step
    return Trajectory(times, r, lj_potential(r, params), v, params)


def integrate_trajectory(params: LJParams, t_end: float = COLLISION_T_END, dt: float = DEFAULT_DT) -> Trajectory:
    """Approach trajectory; raises :class:`StepTooLarge` if energy drifts by more than 1e-6."""
    traj = verlet(params, params.r0, -params.v0, t_end, dt)
    drift = traj.energy_drift()
    if drift > DRIFT_LIMIT:
        raise StepTooLarge(f"relative energy drift {drift:.3e} exceeds {DRIFT_LIMIT:g}; reduce dt")
    return traj


def closest_approach(traj: Trajectory) -> tuple[float, float]:
    """``(r_min, t_min)``, refined by a parabola through the three lowest samples."""
    r = traj.separations
    k = int(np.argmin(r))
    if 0 < k < r.size - 1:
        y0, y1, y2 = r[k - 1], r[k], r[k + 1]
        den = y0 - 2 * y1 + y2
        if den > 0:
            off = 0.5 * (y0 - y2) / den
            h = traj.times[1] - traj.times[0]
            return float(y1 - 0.25 * (y0 - y2) * off), float(traj.times[k] + off * h)
    return float(r[k]), float(traj.times[k])


def separation_spline(traj: Trajectory, time_unit: float = PICOSECOND, length_unit: float = ANGSTROM):
    """Cubic Hermite interpolant of ``r`` (in ``length_unit``) on ``tau = t / time_unit``."""
    return CubicHermiteSpline(
        traj.times / time_unit, traj.separations / length_unit, traj.velocities * time_unit / length_unit
    )


def normalized_coupling(traj: Trajectory, length_unit: float = ANGSTROM) -> float:
    """Coupling that makes the ``1/r`` term reach exactly 1 at closest approach."""
    return closest_approach(traj)[0] / length_unit


def induced_hamiltonian(
    traj: Trajectory,
    coupling_scale: float,
    base_dim: int = 2,
    delta: float = 0.0,
    time_unit: float = PICOSECOND,
    length_unit: float = ANGSTROM,
) -> DenseHamiltonian:
    """``H(tau) = delta Z + (coupling_scale / r(tau)) X`` along the trajectory."""
    if base_dim != 2:
        raise InvalidArgument("the induced model is a two-level system (base_dim = 2)")
    spline = separation_spline(traj, time_unit, length_unit)
    t_end = traj.times[-1] / time_unit

    def fn(tau):
        r = spline(np.clip(tau, 0.0, t_end))
        return delta * Z[None] + (coupling_scale / r)[:, None, None] * X[None]

    r_min, t_min = closest_approach(traj)
    meta = dict(peak_time=t_min / time_unit, coupling_scale=coupling_scale, delta=delta)
    return DenseHamiltonian(fn, 2, t_end, (), name="scattering-toy", meta=meta)


def l1_linf_ratio(h: DenseHamiltonian, n: int = 16385, tol: float = 1e-10) -> float:
    """``||H||_{inf,1} / (t ||H||_{inf,inf})``; the sup includes the recorded peak time."""
    grid = np.linspace(0.0, h.t_end, n)
    if "peak_time" in h.meta:
        grid = np.append(grid, min(max(h.meta["peak_time"], 0.0), h.t_end))
    sup = float(np.max(norm_profile(h, grid, NormKind.SPECTRAL)))
    return time_l1_norm(h, NormKind.SPECTRAL, tol=tol) / (h.t_end * sup)


def instance_config(
    params: LJParams = HELIUM_PARAMS,
    t_end: float = COLLISION_T_END,
    dt: float = DEFAULT_DT,
    delta: float = 0.0,
    coupling: float | None = None,
) -> dict:
    """JSON-ready instance description accepted by the config loader."""
    return {
        "dim": 2,
        "model": "dense-builtin",
        "t_end": t_end / PICOSECOND,
        "builtin": {
            "name": "scattering-toy",
            "params": {
                "epsilon_kelvin": params.epsilon / K_BOLTZMANN,
                "r_m": params.r_m,
                "mass": params.mass,
                "r0": params.r0,
                "v0": params.v0,
                "t_end_seconds": t_end,
                "dt": dt,
                "delta": delta,
                "coupling": coupling,
            },
        },
        "discontinuities": [],
    }
