"""Closed-form query and gate-count estimates for L1-norm and L-infinity-norm algorithms.

Formulas stated only up to ``O(.)`` are evaluated with constant 1 and
flagged ``asymptotic=True``. Their ``log(x)/loglog(x)`` factors use base-2
logarithms with ``x`` clamped at ``LOG_CLAMP`` (8). Below ``2^e`` that ratio
decreases in ``x``, so a lower clamp would make estimates grow as the
target error grows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgument, MissingInput, NegativeInput
from .hamcore import (
    LCUHamiltonian,
    NormKind,
    TimeDepHamiltonian,
    derivative_norm_estimate,
    norm_profile,
    sup_norm,
    time_l1_norm,
)

LOG_CLAMP = 8.0


class FormulaId(str, Enum):
    QDRIFT_SEGMENTS = "QdriftSegments"
    QDRIFT_SM = "QdriftSM"
    QDRIFT_LCU = "QdriftLCU"
    DYSON_SM = "DysonSM"
    DYSON_LCU = "DysonLCU"
    DYSON_M = "DysonM"
    FRAC_QUERY_T = "FracQueryT"
    FRAC_QUERY_DISCRETE = "FracQueryDiscrete"
    FRAC_R1 = "FracR1"
    FRAC_S = "FracS"
    RIEMANN_QUERY_TOTAL = "RiemannQueryTotal"


@dataclass(frozen=True)
class ResourceEstimate:
    formula_id: FormulaId
    inputs: Mapping[str, float]
    value: float
    asymptotic: bool


def log_ratio(x: float) -> float:
    """``log2(x) / log2(log2(x))`` with ``x`` clamped at ``LOG_CLAMP``."""
    x = max(float(x), LOG_CLAMP)
    lx = math.log2(x)
    return lx / math.log2(lx)


@dataclass(frozen=True)
class Formula:
    required: tuple[str, ...]
    fn: Callable[..., float]
    asymptotic: bool
    norm_inputs: tuple[str, ...] = field(default=())
    doc: str = ""


def _dyson_m(s, d, eps, dh_l1, h_inf, h_max_inf):
    alpha = d * h_max_inf
    return s / (alpha * eps) * (dh_l1 / s + h_inf * h_inf)


FORMULAS: dict[FormulaId, Formula] = {
    FormulaId.QDRIFT_SEGMENTS: Formula(
        ("l1_norm", "eps"), lambda l1_norm, eps: 4 * math.ceil(l1_norm**2 / eps), False,
        ("l1_norm",), "segments r = 4 ceil(||H||_{inf,1}^2 / eps)",
    ),
    FormulaId.QDRIFT_SM: Formula(
        ("d", "max_l1", "eps"), lambda d, max_l1, eps: d**4 * max_l1**2 / eps, True,
        ("d", "max_l1"), "queries d^4 ||H||_{max,1}^2 / eps",
    ),
    FormulaId.QDRIFT_LCU: Formula(
        ("alpha_l1_l1", "eps", "g_e"),
        lambda alpha_l1_l1, eps, g_e: 4 * math.ceil(alpha_l1_l1**2 / eps) * g_e, False,
        ("alpha_l1_l1", "g_e"), "gates 4 ceil(||alpha||_{1,1}^2 / eps) g_e",
    ),
    FormulaId.DYSON_SM: Formula(
        ("d", "max_l1", "eps"),
        lambda d, max_l1, eps: d * max_l1 * log_ratio(d * max_l1 / eps), True,
        ("d", "max_l1"), "queries T log(T/eps)/loglog(T/eps), T = d ||H||_{max,1}",
    ),
    FormulaId.DYSON_LCU: Formula(
        ("terms", "alpha_inf_l1", "eps"),
        lambda terms, alpha_inf_l1, eps: terms * alpha_inf_l1 * log_ratio(terms * alpha_inf_l1 / eps), True,
        ("terms", "alpha_inf_l1"), "queries T log(T/eps)/loglog(T/eps), T = L ||alpha||_{inf,1}",
    ),
    FormulaId.DYSON_M: Formula(
        ("s", "d", "eps", "dh_l1", "h_inf", "h_max_inf"), _dyson_m, True,
        ("dh_l1", "h_inf"), "time steps (s/(alpha eps)) (||H'||_{inf,1}/s + ||H||_{inf,inf}^2), alpha = d ||H||_{max,inf}",
    ),
    FormulaId.FRAC_QUERY_T: Formula(
        ("d", "max_norm", "t"), lambda d, max_norm, t: d * d * max_norm * t, True,
        ("d", "max_norm"), "fractional queries d^2 ||H||_max t for a constant max-norm profile",
    ),
    FormulaId.FRAC_QUERY_DISCRETE: Formula(
        ("T", "d", "max_inf", "t", "eps"),
        lambda T, d, max_inf, t, eps: T * log_ratio(d * d * max_inf * t / eps), True,
        ("T", "d", "max_inf"), "discrete queries T log(x)/loglog(x), x = d^2 ||H||_{max,inf} t / eps",
    ),
    FormulaId.FRAC_R1: Formula(
        ("deriv_inf", "t", "eps"), lambda deriv_inf, t, eps: math.ceil(deriv_inf * t * t / eps), True,
        ("deriv_inf",), "steps ceil(||H'||_{inf,inf} t^2 / eps)",
    ),
    FormulaId.FRAC_S: Formula(
        ("d", "max_inf", "t", "eps"), lambda d, max_inf, t, eps: (d * d * max_inf * t) ** 2 / eps, True,
        ("d", "max_inf"), "steps (d^2 ||H||_{max,inf} t)^2 / eps",
    ),
    FormulaId.RIEMANN_QUERY_TOTAL: Formula(
        ("d", "t", "r", "max_norm_sum"),
        lambda d, t, r, max_norm_sum: d * d * max_norm_sum * t / r, False,
        ("d", "max_norm_sum"), "left Riemann sum d^2 sum_k ||H(kt/r)||_max t / r",
    ),
}


def estimate(formula_id: FormulaId | str, inputs: Mapping[str, float]) -> ResourceEstimate:
    fid = FormulaId(formula_id)
    form = FORMULAS[fid]
    missing = [k for k in form.required if k not in inputs]
    if missing:
        raise MissingInput(f"{fid.value} needs inputs {', '.join(missing)}")
    vals = {}
    for k in form.required:
        v = float(inputs[k])
        if not math.isfinite(v):
            raise MissingInput(f"input {k} of {fid.value} is not finite")
        if v < 0:
            raise NegativeInput(f"input {k} of {fid.value} is negative ({v})")
        vals[k] = v
    value = float(form.fn(**vals))
    return ResourceEstimate(fid, dict(vals), value, form.asymptotic)


def riemann_query_total(h: TimeDepHamiltonian, d: int, t: float | None = None, r: int = 64) -> float:
    """``sum_{k<r} d^2 ||H(k t / r)||_max t / r``."""
    t = h.t_end if t is None else float(t)
    if r < 1:
        raise InvalidArgument("r must be at least 1")
    taus = np.arange(r) * (t / r)
    return float(d * d * np.sum(norm_profile(h, taus, NormKind.MAX)) * t / r)


def hamiltonian_sparsity(h: TimeDepHamiltonian, n: int = 257) -> int:
    """Largest row support of ``H(tau)`` over a sample grid."""
    vals = h.values(np.linspace(0.0, h.t_end, n))
    support = np.any(np.abs(vals) > 0, axis=0)
    return int(max(1, support.sum(axis=1).max()))


def instance_inputs(h: TimeDepHamiltonian, eps: float, r: int = 1024) -> dict[str, float]:
    """Norm quantities of a concrete instance, keyed by formula input names."""
    t = h.t_end
    d = hamiltonian_sparsity(h)
    max_l1 = time_l1_norm(h, NormKind.MAX)
    max_inf = sup_norm(h, NormKind.MAX)
    l1 = time_l1_norm(h, NormKind.SPECTRAL)
    deriv = h.meta.get("deriv_bound")
    deriv = float(deriv) if deriv is not None else derivative_norm_estimate(h, NormKind.SPECTRAL)
    out = dict(
        d=d, t=t, eps=eps, l1_norm=l1, max_l1=max_l1, max_inf=max_inf, max_norm=max_inf,
        deriv_inf=deriv, terms=h.n_terms, g_e=1.0, r=r,
        max_norm_sum=float(np.sum(norm_profile(h, np.arange(r) * (t / r), NormKind.MAX))),
    )
    if isinstance(h, LCUHamiltonian):
        out["alpha_l1_l1"] = time_l1_norm(h, NormKind.ELL_ONE)
        out["alpha_inf_l1"] = time_l1_norm(h, NormKind.ELL_INF)
    else:
        out["alpha_l1_l1"] = l1
        out["alpha_inf_l1"] = l1
    out["T"] = d * d * max_l1
    # rescaled-variable quantities for the time-step count; the rescaled
    # Hamiltonian has unit max-norm, so only its derivative needs measuring
    out["s"] = max_l1
    out["h_inf"] = 1.0
    out["h_max_inf"] = 1.0
    out["dh_l1"] = _rescaled_derivative_l1(h)
    return out


def _rescaled_derivative_l1(h: TimeDepHamiltonian, n: int = 4097) -> float:
    # int ||d/ds (H / ||H||_max)|| ds = int ||d/dtau (H / ||H||_max)|| dtau
    taus = np.linspace(0.0, h.t_end, n)
    vals = h.values(taus)
    nrm = np.max(np.abs(vals), axis=(1, 2))
    unit = vals / np.where(nrm > 0, nrm, 1.0)[:, None, None]
    diffs = np.linalg.norm(np.diff(unit, axis=0), ord=2, axis=(1, 2))
    jumps = set()
    for x in h.discontinuities:
        jumps.add(int(np.searchsorted(taus, x)) - 1)
    keep = [k for k in range(diffs.size) if k not in jumps]
    return float(np.sum(diffs[keep]))


def estimates_for_instance(h: TimeDepHamiltonian, eps: float) -> list[ResourceEstimate]:
    """One estimate per formula, fed with the instance's measured norms."""
    inputs = instance_inputs(h, eps)
    return [estimate(fid, inputs) for fid in FormulaId]


def dyson_l1_vs_linf(h: TimeDepHamiltonian, eps: float) -> tuple[ResourceEstimate, ResourceEstimate]:
    """Rescaled (L1) and plain (t times L-infinity) Dyson query estimates for one instance."""
    d = hamiltonian_sparsity(h)
    l1 = time_l1_norm(h, NormKind.MAX)
    linf = h.t_end * sup_norm(h, NormKind.MAX)
    return (
        estimate(FormulaId.DYSON_SM, dict(d=d, max_l1=l1, eps=eps)),
        estimate(FormulaId.DYSON_SM, dict(d=d, max_l1=linf, eps=eps)),
    )
