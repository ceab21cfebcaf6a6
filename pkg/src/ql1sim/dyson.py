"""Truncated, discretized Dyson series for ``E(t1, t0)``.

Time is cut into ``M`` cells with midpoint nodes ``tau_m``. The default
discretization keeps repeated node indices (ordered multi-indices
``m_1 <= ... <= m_k`` weighted by ``1 / multiplicity!``), which equals the
order-``K`` truncation of ``prod_m exp(-i h H(tau_m))`` and is second-order
accurate in ``h``. With ``strict=True`` only strictly increasing indices are
kept; for constant ``H`` this is the binomial sum
``sum_k C(M, k) (-i h H)^k``, which is first-order accurate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BudgetExceeded, InvalidArgument
from .hamcore import TimeDepHamiltonian
from .rescaling import Clock, rescaled_hamiltonian

TERM_BUDGET = 10**7


@dataclass(frozen=True)
class DysonConfig:
    order: int
    grid: int
    strict: bool = False

    def __post_init__(self):
        if self.order < 0 or self.grid < 1:
            raise InvalidArgument("need order >= 0 and grid >= 1")
        if self.strict and self.order > self.grid:
            raise InvalidArgument("strict ordering needs order <= grid")


def dyson_truncated(h: TimeDepHamiltonian, t0: float, t1: float, cfg: DysonConfig) -> np.ndarray:
    """Dyson sum up to order ``cfg.order`` on a ``cfg.grid``-cell midpoint grid."""
    if t1 < t0:
        raise InvalidArgument("need t0 <= t1")
    if cfg.order * cfg.grid > TERM_BUDGET:
        raise BudgetExceeded(f"K*M = {cfg.order * cfg.grid} exceeds {TERM_BUDGET}")
    if cfg.order == 0:
        return np.eye(h.dim, dtype=np.complex128)
    step = (t1 - t0) / cfg.grid
    nodes = t0 + (np.arange(cfg.grid) + 0.5) * step
    return kernels.dyson_accumulate(h.values(nodes), cfg.order, step, not cfg.strict)


def rescaled_dyson(h: TimeDepHamiltonian, clock: Clock, cfg: DysonConfig) -> np.ndarray:
    """Dyson sum for the unit-norm rescaled Hamiltonian over ``[0, f(t_end)]``."""
    return dyson_truncated(rescaled_hamiltonian(h, clock), 0.0, clock.s_end, cfg)
