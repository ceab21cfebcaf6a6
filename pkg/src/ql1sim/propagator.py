"""Reference time-ordered propagator ``E(t, s)`` with a step-doubling error control."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NoConvergence, TimeOutOfDomain
from .hamcore import DenseHamiltonian, TimeDepHamiltonian
from .linalg import expm_hermitian, polar_unitary
from .quadrature import gauss_legendre

MAX_DOUBLINGS = 24
_CHUNK = 1 << 15


@dataclass(frozen=True)
class PropagatorResult:
    unitary: np.ndarray
    error_estimate: float
    steps_used: int


def midpoint_product(h: TimeDepHamiltonian, lo: float, hi: float, n: int) -> np.ndarray:
    """``prod_k exp(-i dt H(lo + (k + 1/2) dt))`` in time order, ``dt = (hi - lo)/n``."""
    dt = (hi - lo) / n
    total = np.eye(h.dim, dtype=np.complex128)
    for start in range(0, n, _CHUNK):
        k = np.arange(start, min(n, start + _CHUNK))
        taus = lo + (k + 0.5) * dt
        steps = expm_hermitian(h.values(taus), dt)
        total = kernels.ordered_product(steps) @ total
    return total


def _evolve_piece(h, lo, hi, tol, n0):
    n = n0
    coarse = midpoint_product(h, lo, hi, n)
    prev_ext = None
    prev_disc = np.inf
    stalls = 0
    for _ in range(MAX_DOUBLINGS):
        n *= 2
        fine = midpoint_product(h, lo, hi, n)
        ext = (4.0 * fine - coarse) / 3.0
        if prev_ext is not None:
            disc = float(np.linalg.norm(ext - prev_ext, 2))
            if disc <= tol:
                return polar_unitary(ext), disc, n
            # Two successive doublings without a halving of the discrepancy
            # at tiny values means roundoff, not truncation, dominates.
            stalls = stalls + 1 if (disc > 0.5 * prev_disc and disc < 1e-9) else 0
            if stalls >= 2:
                raise NoConvergence(
                    f"step doubling stalled at discrepancy {disc:.3e}; tolerance {tol:.3e} is below roundoff"
                )
            prev_disc = disc
        prev_ext, coarse = ext, fine
    raise NoConvergence(f"no convergence after {MAX_DOUBLINGS} doublings on [{lo}, {hi}]")


def evolve(
    h: TimeDepHamiltonian,
    s: float = 0.0,
    t: float | None = None,
    tol: float = 1e-10,
    initial_steps: int = 8,
) -> PropagatorResult:
    """Propagator from ``s`` to ``t`` (``s <= t``), error ``<= tol`` in spectral norm.

    Each smooth piece is integrated by products of midpoint exponentials.
    The midpoint rule is symmetric, so its error expands in even powers of
    the step and ``(4 U_2n - U_n)/3`` cancels the leading term. The step
    count doubles until two successive extrapolated results agree within the
    piece's share of ``tol``; that discrepancy is the reported error
    estimate. The accepted result is projected to the nearest unitary.
    """
    t = h.t_end if t is None else float(t)
    h.check_times(np.array([s, t]))
    if t < s:
        raise TimeOutOfDomain(f"evolve needs s <= t, got s={s}, t={t}")
    u = np.eye(h.dim, dtype=np.complex128)
    if t == s:
        return PropagatorResult(u, 0.0, 0)
    err, steps = 0.0, 0
    for lo, hi in h.pieces(s, t):
        piece, disc, n = _evolve_piece(h, lo, hi, tol * (hi - lo) / (t - s), initial_steps)
        u = piece @ u
        err += disc
        steps += n
    return PropagatorResult(u, err, steps)


def scaling_derivative(
    h: TimeDepHamiltonian, s_scale: float, t: float | None = None, tol: float = 1e-8, order: int = 12
) -> np.ndarray:
    """``d/ds E_s(t, 0)`` where ``E_s`` is generated by ``s * H``.

    Evaluates ``int_0^t E_s(t, tau) (-i H(tau)) E_s(tau, 0) dtau`` with
    composite Gauss-Legendre panels, doubling the panel count until the
    result moves by less than ``tol``.
    """
    t = h.t_end if t is None else float(t)
    hs = DenseHamiltonian(lambda x: s_scale * h.values(x), h.dim, h.t_end, h.discontinuities)
    pieces = h.pieces(0.0, t)
    panels = 1
    prev = None
    for _ in range(12):
        los, his = [], []
        for lo, hi in pieces:
            edges = np.linspace(lo, hi, panels + 1)
            los.append(edges[:-1])
            his.append(edges[1:])
        nodes, weights = gauss_legendre(np.concatenate(los), np.concatenate(his), order)
        n_nodes = len(nodes)
        forward = np.empty((n_nodes, h.dim, h.dim), dtype=np.complex128)
        u = np.eye(h.dim, dtype=np.complex128)
        last = 0.0
        for i, tau in enumerate(nodes):
            u = evolve(hs, last, tau, tol / (4 * n_nodes)).unitary @ u
            forward[i] = u
            last = tau
        total = evolve(hs, last, t, tol / 4).unitary @ u
        hv = h.values(nodes)
        inner = np.conj(np.swapaxes(forward, -1, -2)) @ (-1j * hv) @ forward
        cur = total @ np.tensordot(weights, inner, axes=1)
        if prev is not None and np.linalg.norm(cur - prev, 2) <= tol:
            return cur
        prev = cur
        panels *= 2
    raise NoConvergence("scaling derivative quadrature did not converge")
