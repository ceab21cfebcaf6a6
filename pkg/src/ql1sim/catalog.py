"""Named builtin instances spanning commuting, noncommuting, discontinuous and peaked profiles."""
from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError
from .expr import CoeffFunction
from .hamcore import DenseHamiltonian, LCHamiltonian, LCUHamiltonian, TimeDepHamiltonian
from .linalg import X, Y, Z


def _const(m: np.ndarray, c: float = 1.0):
    return lambda t: c * np.broadcast_to(m, (np.size(t),) + m.shape)


def _profile(f: Callable, m: np.ndarray, c: float = 1.0):
    return lambda t: c * np.asarray(f(np.asarray(t, dtype=float)), dtype=float)[:, None, None] * m[None]


def const_z(scale: float = 1.0, t_end: float = 1.0) -> TimeDepHamiltonian:
    return DenseHamiltonian(_const(Z, scale), 2, t_end, name="const-z",
                            meta=dict(deriv_bound=0.0, deriv_max_bound=0.0, smooth=True))


def linear_z(scale: float = 1.0, t_end: float = 1.0) -> TimeDepHamiltonian:
    """``(1 + tau) Z`` as a one-term LCU instance."""
    coeff = CoeffFunction("1+tau")
    return LCUHamiltonian([lambda t: scale * coeff(t)], [Z], t_end, name="linear-z",
                          meta=dict(deriv_bound=scale, deriv_max_bound=scale, smooth=True))


def rotating_field(scale: float = 1.0, t_end: float = np.pi) -> TimeDepHamiltonian:
    """``cos(tau) X + sin(tau) Z``; unit norm, noncommuting at different times."""

    def fn(t):
        t = np.asarray(t, dtype=float)
        return scale * (np.cos(t)[:, None, None] * X + np.sin(t)[:, None, None] * Z)

    return DenseHamiltonian(fn, 2, t_end, name="rotating-field",
                            meta=dict(deriv_bound=scale, deriv_max_bound=scale, smooth=True))


def piecewise_xz(scale: float = 1.0, t_end: float = 2.0) -> TimeDepHamiltonian:
    """``X`` on ``[0, t_end/2)`` then ``Z``, as two gated LC terms."""
    cut = 0.5 * t_end
    terms = [
        _profile(lambda t: (t < cut).astype(float), X, scale),
        _profile(lambda t: (t >= cut).astype(float), Z, scale),
    ]
    return LCHamiltonian(terms, 2, t_end, [cut], name="piecewise-xz",
                         meta=dict(deriv_bound=0.0, deriv_max_bound=0.0, smooth=False))


def lc_two(scale: float = 1.0, t_end: float = 1.0) -> TimeDepHamiltonian:
    terms = [_profile(lambda t: 1 + t, X, scale), _profile(lambda t: 2 - t, Z, scale)]
    return LCHamiltonian(terms, 2, t_end, name="lc-two",
                         meta=dict(deriv_bound=scale * np.sqrt(2), deriv_max_bound=scale, smooth=True))


def lc_three(scale: float = 1.0, t_end: float = 1.0) -> TimeDepHamiltonian:
    terms = [
        _profile(lambda t: 1 + t, X, scale),
        _profile(lambda t: 2 - t, Z, scale),
        _profile(lambda t: 1 + 0.5 * np.sin(3 * t), Y, scale),
    ]
    return LCHamiltonian(terms, 2, t_end, name="lc-three",
                         meta=dict(deriv_bound=scale * np.sqrt(1 + 1 + 2.25),
                                   deriv_max_bound=scale * np.sqrt(1 + 2.25), smooth=True))


@lru_cache(maxsize=8)
def _scattering(epsilon_kelvin, r_m, mass, r0, v0, t_end_seconds, dt, delta, coupling):
    from . import scattering as sc

    params = sc.LJParams.from_kelvin(epsilon_kelvin, r_m, mass, r0, v0)
    traj = sc.integrate_trajectory(params, t_end_seconds, dt)
    c = sc.normalized_coupling(traj) if coupling is None else coupling
    return sc.induced_hamiltonian(traj, c, 2, delta)


def scattering_toy(
    scale: float = 1.0,
    delta: float = 0.01,
    coupling: float | None = None,
    epsilon_kelvin: float | None = None,
    r_m: float | None = None,
    mass: float | None = None,
    r0: float | None = None,
    v0: float | None = None,
    t_end_seconds: float | None = None,
    dt: float | None = None,
) -> TimeDepHamiltonian:
    """Two-level system kicked by a Lennard-Jones collision (defaults: helium pair)."""
    from . import scattering as sc

    p = sc.HELIUM_PARAMS
    h = _scattering(
        p.epsilon / sc.K_BOLTZMANN if epsilon_kelvin is None else float(epsilon_kelvin),
        p.r_m if r_m is None else float(r_m),
        p.mass if mass is None else float(mass),
        p.r0 if r0 is None else float(r0),
        p.v0 if v0 is None else float(v0),
        sc.COLLISION_T_END if t_end_seconds is None else float(t_end_seconds),
        sc.DEFAULT_DT if dt is None else float(dt),
        float(delta),
        None if coupling is None else float(coupling),
    )
    out = h if scale == 1.0 else h.scaled(scale)
    out.meta.update(h.meta, smooth=True)
    out.name = "scattering-toy"
    return out


BUILTINS: dict[str, Callable[..., TimeDepHamiltonian]] = {
    "const-z": const_z,
    "linear-z": linear_z,
    "rotating-field": rotating_field,
    "piecewise-xz": piecewise_xz,
    "scattering-toy": scattering_toy,
    "lc-two": lc_two,
    "lc-three": lc_three,
}


def get_builtin(name: str, **params) -> TimeDepHamiltonian:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ConfigError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}") from None
    try:
        return factory(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for builtin {name!r}: {exc}") from None


def scaled_to_l1(h: TimeDepHamiltonian, target: float) -> TimeDepHamiltonian:
    """Copy of ``h`` rescaled so that ``||H||_{inf,1} = target``."""
    from .hamcore import time_l1_norm

    out = h.scaled(target / time_l1_norm(h))
    out.name = h.name
    return out
