"""Clock reparametrization ``s = f(t) = int_0^t Lam`` and the unit-norm Hamiltonian it induces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cumulative import CumulativeTable
from .errors import NonPositiveNorm, OutOfRange
from .hamcore import DenseHamiltonian, NormKind, TimeDepHamiltonian, norm_profile, sample_grid


@dataclass(frozen=True)
class Clock:
    table: CumulativeTable
    weight: Callable[[np.ndarray], np.ndarray]
    norm_kind: NormKind
    from_bound: bool

    @property
    def nodes(self) -> np.ndarray:
        return self.table.nodes

    @property
    def values(self) -> np.ndarray:
        return self.table.values

    @property
    def s_end(self) -> float:
        return self.table.total

    @property
    def t_end(self) -> float:
        return self.table.b

    def __call__(self, t):
        return self.table(t)


def build_clock(
    h: TimeDepHamiltonian,
    norm_kind: NormKind | str = NormKind.SPECTRAL,
    bound: Callable[[np.ndarray], np.ndarray] | None = None,
    grid_size: int = 4096,
) -> Clock:
    """Tabulate ``f(t) = int_0^t ||H||`` (or ``int bound``) on a refined grid."""
    kind = NormKind(norm_kind)
    if bound is None:
        weight = lambda x: norm_profile(h, x, kind)
    else:
        weight = lambda x: np.broadcast_to(np.asarray(bound(x), dtype=float), np.shape(x))
    probe = sample_grid(h, 2 * grid_size + 1)
    if np.min(weight(probe)) <= 0:
        k = int(np.argmin(weight(probe)))
        raise NonPositiveNorm(f"clock rate vanishes at tau={probe[k]:.6g}")
    table = CumulativeTable(weight, 0.0, h.t_end, h.discontinuities, grid_size)
    if np.min(table.d_start) <= 0 or np.min(table.d_end) <= 0:
        raise NonPositiveNorm("clock rate vanishes at a refined node")
    return Clock(table, weight, kind, bound is not None)


def invert_clock(clock: Clock, varsigma) -> np.ndarray | float:
    """``t = f^{-1}(varsigma)`` by bisection on the monotone spline."""
    scalar = np.ndim(varsigma) == 0
    v = np.atleast_1d(np.asarray(varsigma, dtype=float))
    slack = 1e-12 * max(1.0, clock.s_end)
    if np.any(v < -slack) or np.any(v > clock.s_end + slack):
        raise OutOfRange(f"clock value outside [0, {clock.s_end}]")
    t = clock.table.inverse(np.clip(v, 0.0, clock.s_end))
    return float(t[0]) if scalar else t


def rescaled_hamiltonian(h: TimeDepHamiltonian, clock: Clock) -> DenseHamiltonian:
    """``H(f^{-1}(s)) / Lam(f^{-1}(s))`` on ``[0, f(t_end)]``."""

    def fn(s):
        t = clock.table.inverse(np.asarray(s, dtype=float))
        lam = np.asarray(clock.weight(t), dtype=float)
        return h.values(t) / lam[:, None, None]

    breaks = [float(clock(x)) for x in h.discontinuities]
    return DenseHamiltonian(fn, h.dim, clock.s_end, breaks, name=f"rescaled[{h.name}]")
