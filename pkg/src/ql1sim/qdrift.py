"""Continuous qDRIFT: importance sampling of evolution times by the norm profile.

A :class:`SamplingPlan` tabulates the density ``p(tau) = Lam(tau)/||Lam||_1``
where ``Lam`` is the spectral norm of ``H(tau)`` or a user-supplied upper
bound. The ideal qDRIFT channel ``int p(tau) U(tau) rho U(tau)^dagger`` with
``U(tau) = exp(-i H(tau)/p(tau))`` is discretized by Gauss-Legendre panels
(:func:`exact_channel`) or sampled (:func:`run_qdrift`). Long evolutions are
split into segments of equal norm mass, each of which uses the global density
renormalized to unit mass on the segment.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from . import kernels
from ._parallel import fan_out
from .cumulative import CumulativeTable
from .errors import (
    DimensionMismatch,
    InvalidArgument,
    InvalidBound,
    NoConvergence,
    NumericalError,
    ZeroHamiltonian,
    ZeroTerm,
)
from .hamcore import (
    DenseHamiltonian,
    LCHamiltonian,
    NormKind,
    TimeDepHamiltonian,
    norm_profile,
    sample_grid,
    time_l1_norm,
)
from .linalg import expm_hermitian, hermitize
from .metrics import MixedUnitaryChannel, SuperOperator, compose
from .quadrature import gauss_legendre, integrate_piecewise, piece_bounds

EXCEPTIONAL_RTOL = 1e-14
TRIAL_CHUNK = 1024


@dataclass(frozen=True)
class SamplingPlan:
    """Tabulated sampling density on ``[lo, hi]``.

    ``grid``, ``density`` and ``cdf`` describe the whole underlying interval;
    a restricted plan (one segment of a longer run) keeps them and narrows
    ``window`` to its share of the cumulative mass.
    """

    grid: np.ndarray
    density: np.ndarray
    cdf: np.ndarray
    total_l1: float
    exceptional_mask: np.ndarray
    weight: Callable[[np.ndarray], np.ndarray]
    table: CumulativeTable
    peak: float
    lo: float
    hi: float
    window: tuple[float, float] = (0.0, 1.0)
    breaks: tuple[float, ...] = ()

    @property
    def mass(self) -> float:
        return self.window[1] - self.window[0]

    def density_at(self, taus) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        return np.asarray(self.weight(taus), dtype=float) / (self.total_l1 * self.mass)

    def is_exceptional(self, taus) -> np.ndarray:
        return np.asarray(self.weight(np.asarray(taus, dtype=float))) < EXCEPTIONAL_RTOL * self.peak

    def pieces(self) -> list[tuple[float, float]]:
        return piece_bounds(self.lo, self.hi, self.breaks)


def build_plan(
    h: TimeDepHamiltonian,
    bound: Callable[[np.ndarray], np.ndarray] | None = None,
    a: float = 0.0,
    b: float | None = None,
    grid_size: int = 4096,
    norm_kind: NormKind | str = NormKind.SPECTRAL,
) -> SamplingPlan:
    """Sampling plan for ``p(tau)`` proportional to ``||H(tau)||`` or ``bound(tau)``."""
    b = h.t_end if b is None else float(b)
    if grid_size < 16:
        raise InvalidArgument("grid_size must be at least 16")
    kind = NormKind(norm_kind)
    norm = lambda x: norm_profile(h, x, kind)
    if bound is None:
        weight = norm
    else:
        check = sample_grid(h, 2 * grid_size + 1)
        check = check[(check >= a) & (check <= b)]
        lam = np.broadcast_to(np.asarray(bound(check), dtype=float), check.shape)
        nv = norm(check)
        slack = 1e-12 * max(1.0, float(np.max(nv)))
        if np.any(lam < nv - slack):
            k = int(np.argmax(nv - lam))
            raise InvalidBound(f"bound {lam[k]:.6g} below norm {nv[k]:.6g} at tau={check[k]:.6g}")
        weight = lambda x: np.broadcast_to(np.asarray(bound(x), dtype=float), np.shape(x))
    table = CumulativeTable(weight, a, b, h.discontinuities, grid_size)
    total = table.total
    if not total > 0:
        raise ZeroHamiltonian("the Hamiltonian vanishes on the whole interval")
    grid = table.nodes
    wvals = np.asarray(weight(grid), dtype=float)
    mids = 0.5 * (grid[:-1] + grid[1:])
    wmid = np.asarray(weight(mids), dtype=float)
    peak = float(max(np.max(wvals), np.max(wmid)))
    panel_max = np.maximum(np.maximum(wvals[:-1], wvals[1:]), wmid)
    return SamplingPlan(
        grid=grid,
        density=wvals / total,
        cdf=table.values / total,
        total_l1=total,
        exceptional_mask=panel_max < EXCEPTIONAL_RTOL * peak,
        weight=weight,
        table=table,
        peak=peak,
        lo=float(a),
        hi=b,
        breaks=h.discontinuities,
    )


def sample_time(plan: SamplingPlan, u) -> np.ndarray | float:
    """Inverse-CDF sample by linear interpolation between grid nodes."""
    scalar = np.ndim(u) == 0
    u = np.atleast_1d(np.asarray(u, dtype=float))
    w0, w1 = plan.window
    target = w0 + u * (w1 - w0)
    cdf, grid = plan.cdf, plan.grid
    i = np.clip(np.searchsorted(cdf, target, side="right") - 1, 0, grid.size - 2)
    width = cdf[i + 1] - cdf[i]
    with np.errstate(invalid="ignore", divide="ignore"):
        frac = np.where(width > 0, (target - cdf[i]) / width, 0.0)
    tau = grid[i] + np.clip(frac, 0.0, 1.0) * (grid[i + 1] - grid[i])
    tau = np.clip(tau, plan.lo, plan.hi)
    return float(tau[0]) if scalar else tau


def qdrift_unitaries(h: TimeDepHamiltonian, plan: SamplingPlan, taus) -> np.ndarray:
    """``exp(-i H(tau)/p(tau))`` per time, identity on the exceptional set."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    p = plan.density_at(taus)
    exceptional = plan.is_exceptional(taus) | (p <= 0)
    scale = np.where(exceptional, 0.0, 1.0 / np.where(exceptional, 1.0, p))
    return expm_hermitian(h.values(taus), scale)


def qdrift_unitary(h: TimeDepHamiltonian, plan: SamplingPlan, tau: float) -> np.ndarray:
    return qdrift_unitaries(h, plan, [tau])[0]


def _liouville_of(weights: np.ndarray, unitaries: np.ndarray) -> np.ndarray:
    d = unitaries.shape[1]
    return np.einsum("k,kab,kcd->acbd", weights, unitaries, np.conj(unitaries)).reshape(d * d, d * d)


def _converge_ensemble(build, quad_points: int, max_points: int, dim: int):
    """Double the node count until the ensemble's Liouville matrix settles."""
    prev_w, prev_u = build(quad_points)
    prev = _liouville_of(prev_w, prev_u)
    q = quad_points
    while q < max_points:
        q *= 2
        w, u = build(q)
        cur = _liouville_of(w, u)
        if np.sqrt(dim) * np.linalg.norm(cur - prev, 2) < 1e-8:
            return MixedUnitaryChannel(w, u)
        prev = cur
    raise NoConvergence(f"channel quadrature did not settle by {max_points} nodes per piece")


def _piece_nodes(pieces, q: int):
    panels = max(1, int(np.ceil(q / 8)))
    los, his = [], []
    for lo, hi in pieces:
        edges = np.linspace(lo, hi, panels + 1)
        los.append(edges[:-1])
        his.append(edges[1:])
    return gauss_legendre(np.concatenate(los), np.concatenate(his), 8)


def exact_channel(
    h: TimeDepHamiltonian, plan: SamplingPlan, quad_points: int = 16, max_points: int = 1 << 14
) -> MixedUnitaryChannel:
    """Quadrature for the ideal qDRIFT channel ``int p U rho U^dagger`` over the plan's window."""
    if quad_points < 8:
        raise InvalidArgument("quad_points must be at least 8")
    pieces = plan.pieces()

    def build(q):
        x, w = _piece_nodes(pieces, q)
        weights = w * plan.density_at(x)
        return weights / weights.sum(), qdrift_unitaries(h, plan, x)

    return _converge_ensemble(build, quad_points, max_points, h.dim)


@dataclass(frozen=True)
class Segmentation:
    breakpoints: np.ndarray

    @property
    def r(self) -> int:
        return self.breakpoints.size - 1


def segment_equal_l1(plan: SamplingPlan, r: int) -> Segmentation:
    """Breakpoints splitting the plan's window into ``r`` equal-mass segments."""
    if r < 1:
        raise InvalidArgument("r must be at least 1")
    w0, w1 = plan.window
    targets = (w0 + (w1 - w0) * np.arange(1, r) / r) * plan.total_l1
    inner = plan.table.inverse(targets) if r > 1 else np.zeros(0)
    return Segmentation(np.concatenate([[plan.lo], inner, [plan.hi]]))


def restrict(plan: SamplingPlan, seg: Segmentation, j: int) -> SamplingPlan:
    """Plan for segment ``j``: the global density renormalized to unit mass there."""
    w0, w1 = plan.window
    step = (w1 - w0) / seg.r
    window = (w0 + j * step, w0 + (j + 1) * step)
    return replace(plan, lo=float(seg.breakpoints[j]), hi=float(seg.breakpoints[j + 1]), window=window)


def segment_plans(plan: SamplingPlan, r: int) -> list[SamplingPlan]:
    seg = segment_equal_l1(plan, r)
    return [restrict(plan, seg, j) for j in range(r)]


def segmented_channel(
    h: TimeDepHamiltonian, plan: SamplingPlan, r: int, quad_points: int = 16
) -> SuperOperator:
    """Composition of the ``r`` segment channels, earliest segment first."""
    return compose(*[exact_channel(h, sp, quad_points) for sp in segment_plans(plan, r)])


def _trial_uniforms(seed: int, chunk: int, n: int, r: int) -> np.ndarray:
    gen = np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, int(chunk), 0]))
    return gen.random((n, r))


def run_qdrift(
    h: TimeDepHamiltonian, plan: SamplingPlan, r: int, rng_seed: int, trials: int
) -> np.ndarray:
    """Sampled product unitaries, one per trial, shape ``(trials, d, d)``.

    Trials are processed in chunks of 1024; chunk ``c`` draws from a Philox
    stream with key ``rng_seed`` and counter block ``c``, so results do not
    depend on how chunks are scheduled.
    """
    if r < 1 or trials < 1:
        raise InvalidArgument("need r >= 1 and trials >= 1")
    plans = segment_plans(plan, r)
    starts = list(range(0, trials, TRIAL_CHUNK))

    def run_chunk(start):
        n = min(TRIAL_CHUNK, trials - start)
        u = _trial_uniforms(rng_seed, start // TRIAL_CHUNK, n, r)
        prod = np.broadcast_to(np.eye(h.dim, dtype=np.complex128), (n, h.dim, h.dim)).copy()
        for j, sp in enumerate(plans):
            taus = sample_time(sp, u[:, j])
            prod = qdrift_unitaries(h, sp, taus) @ prod
        return prod

    return np.concatenate(fan_out(run_chunk, starts))


def empirical_channel(unitaries: np.ndarray) -> MixedUnitaryChannel:
    n = len(unitaries)
    return MixedUnitaryChannel(np.full(n, 1.0 / n), unitaries)


# LC model ------------------------------------------------------------------


@dataclass(frozen=True)
class LCPlan:
    """Joint density ``p_l(tau) = ||H_l(tau)|| / sum_k ||H_k||_{inf,1}``."""

    term_plans: tuple[SamplingPlan, ...]
    marginals: np.ndarray
    total: float

    def joint_density(self, l: int, taus) -> np.ndarray:
        return self.marginals[l] * self.term_plans[l].density_at(taus)


def build_lc_plan(h: LCHamiltonian, grid_size: int = 4096) -> LCPlan:
    plans = []
    for l in range(h.n_terms):
        term = h.term(l)
        plans.append(build_plan(term, grid_size=grid_size))
    masses = np.array([p.total_l1 for p in plans])
    total = float(masses.sum())
    return LCPlan(tuple(plans), masses / total, total)


def sample_lc(plan: LCPlan, u) -> tuple[np.ndarray, np.ndarray]:
    """Map uniforms to ``(term index, time)`` pairs."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    edges = np.concatenate([[0.0], np.cumsum(plan.marginals)])
    l = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(plan.term_plans) - 1)
    local = np.clip((u - edges[l]) / plan.marginals[l], 0.0, 1.0)
    taus = np.empty_like(u)
    for k, tp in enumerate(plan.term_plans):
        m = l == k
        if np.any(m):
            taus[m] = sample_time(tp, local[m])
    return l, taus


def lc_unitaries(h: LCHamiltonian, plan: LCPlan, l: int, taus) -> np.ndarray:
    """``exp(-i H_l(tau) / p_l(tau))`` for one term across times."""
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    p = plan.joint_density(l, taus)
    tp = plan.term_plans[l]
    exceptional = tp.is_exceptional(taus) | (p <= 0)
    scale = np.where(exceptional, 0.0, 1.0 / np.where(exceptional, 1.0, p))
    return expm_hermitian(h.term(l).values(taus), scale)


def lc_exact_channel(
    h: LCHamiltonian, plan: LCPlan, quad_points: int = 16, max_points: int = 1 << 14
) -> MixedUnitaryChannel:
    """Quadrature for ``sum_l int p_l(tau) U_l(tau) rho U_l(tau)^dagger``."""

    def build(q):
        ws, us = [], []
        for l, tp in enumerate(plan.term_plans):
            x, w = _piece_nodes(tp.pieces(), q)
            wt = w * tp.density_at(x)
            ws.append(plan.marginals[l] * wt / wt.sum())
            us.append(lc_unitaries(h, plan, l, x))
        w = np.concatenate(ws)
        return w / w.sum(), np.concatenate(us)

    return _converge_ensemble(build, quad_points, max_points, h.dim)


class PiecewiseHamiltonian(DenseHamiltonian):
    """``G(tau) = H_l((tau - offset_l)/p_l) / p_l`` on consecutive intervals.

    ``pieces_info`` lists ``(lo, hi, l, p_l)``; the intervals partition
    ``[0, t]`` in term order.
    """

    def __init__(self, source: LCHamiltonian, pieces_info: Sequence[tuple[float, float, int, float]]):
        self.source = source
        self.pieces_info = tuple(pieces_info)
        offsets = np.array([p[0] for p in self.pieces_info])
        breaks = list(offsets[1:])
        for lo, _, _, pl in self.pieces_info:
            breaks += [lo + pl * x for x in source.discontinuities]
        super().__init__(self._eval, source.dim, source.t_end, breaks, name=f"G[{source.name}]")
        self._offsets = offsets

    def _eval(self, taus):
        taus = np.asarray(taus, dtype=float)
        k = np.clip(np.searchsorted(self._offsets, taus, side="right") - 1, 0, len(self.pieces_info) - 1)
        out = np.zeros((taus.size, self.dim, self.dim), dtype=np.complex128)
        for i, (lo, _, l, pl) in enumerate(self.pieces_info):
            m = k == i
            if np.any(m):
                x = np.clip((taus[m] - lo) / pl, 0.0, self.t_end)
                out[m] = self.source.term_values(x)[l] / pl
        return out


def universal_reduction(h: LCHamiltonian, tol: float = 1e-8) -> PiecewiseHamiltonian:
    """Single-term Hamiltonian whose qDRIFT channel equals the LC joint sampler's.

    Verifies at build time that ``||G||_{inf,1}`` equals the sum of term norms
    and that ``int G`` equals ``sum_l int H_l``, both within ``tol``.
    """
    grid = sample_grid(h, 2049)
    vals = h.term_values(grid)
    norms = np.max(np.abs(np.linalg.eigvalsh(hermitize(vals))), axis=-1)
    for l in range(h.n_terms):
        if np.min(norms[l]) <= 0:
            k = int(np.argmin(norms[l]))
            raise ZeroTerm(f"term {l} vanishes at tau={grid[k]:.6g}")
    plan = build_lc_plan(h)
    t = h.t_end
    pieces = []
    lo = 0.0
    for l, pl in enumerate(plan.marginals):
        hi = t if l == h.n_terms - 1 else lo + pl * t
        pieces.append((lo, hi, l, float(pl)))
        lo = hi
    g = PiecewiseHamiltonian(h, pieces)
    g_norm = time_l1_norm(g, NormKind.SPECTRAL, tol=tol / 10)
    gap1 = abs(g_norm - plan.total)
    int_g = integrate_piecewise(g.values, 0.0, t, tol / 10, g.discontinuities)
    int_h = integrate_piecewise(h.values, 0.0, t, tol / 10, h.discontinuities)
    gap2 = float(np.max(np.abs(int_g - int_h)))
    if gap1 > tol * max(1.0, plan.total) or gap2 > tol * max(1.0, plan.total):
        raise NumericalError(f"reduction identities violated: norm gap {gap1:.3e}, integral gap {gap2:.3e}")
    g.meta.update(norm_gap=gap1, integral_gap=gap2, marginals=tuple(plan.marginals))
    return g


# Averaging and discrete bounds ---------------------------------------------


def average_hamiltonian(h: TimeDepHamiltonian, t: float | None = None, tol: float = 1e-12) -> np.ndarray:
    """``(1/t) int_0^t H``, entrywise adaptive quadrature."""
    t = h.t_end if t is None else float(t)
    if not t > 0:
        raise InvalidArgument("t must be positive")
    tot = integrate_piecewise(h.values, 0.0, t, tol * t, h.discontinuities)
    return hermitize(tot / t)


def averaged_channel(h: TimeDepHamiltonian, t: float | None = None) -> MixedUnitaryChannel:
    t = h.t_end if t is None else float(t)
    return MixedUnitaryChannel.unitary(expm_hermitian(average_hamiltonian(h, t), t))


def discrete_qdrift_bound(term_norms: Sequence[float], probs: Sequence[float], t: float) -> float:
    """``2 t^2 (sum_l n_l^2 / p_l + (sum_l n_l)^2)`` for discrete qDRIFT sampling."""
    n = np.asarray(term_norms, dtype=float)
    p = np.asarray(probs, dtype=float)
    if n.shape != p.shape:
        raise DimensionMismatch(f"{n.size} norms but {p.size} probabilities")
    if np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise InvalidArgument("probs must be a probability vector")
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(n > 0, n * n / p, 0.0)
    return float(2 * t * t * (ratio.sum() + n.sum() ** 2))


def optimal_probs(term_norms: Sequence[float]) -> np.ndarray:
    n = np.asarray(term_norms, dtype=float)
    return n / n.sum()


def short_time_bound(l1_norm: float) -> float:
    return 4.0 * l1_norm * l1_norm


def long_time_bound(l1_norm: float, r: int) -> float:
    return 4.0 * l1_norm * l1_norm / r


def ideal_channel(h: TimeDepHamiltonian, tol: float = 1e-12) -> MixedUnitaryChannel:
    from .propagator import evolve

    return MixedUnitaryChannel.unitary(evolve(h, 0.0, h.t_end, tol).unitary)
