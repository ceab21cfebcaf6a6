"""Vectorized quadrature: adaptive Simpson and Gauss-Legendre panels.

Integrands are batched callables ``f(x) -> array`` whose leading axis matches
``x``; trailing axes (for matrix-valued integrands) are carried along.
"""
from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNonConvergent

MAX_PANELS = 2**20


def _left_limit_eval(f: Callable, x: np.ndarray, b: float, a: float) -> np.ndarray:
    # The right endpoint of a piece is evaluated from the left so that a
    # declared discontinuity there does not leak the next piece's value.
    xe = np.where(x >= b, np.nextafter(b, a), x)
    return np.asarray(f(xe))


def _err_norm(diff: np.ndarray) -> np.ndarray:
    if diff.ndim == 1:
        return np.abs(diff)
    return np.max(np.abs(diff.reshape(diff.shape[0], -1)), axis=1)


def adaptive_simpson(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    initial_panels: int = 16,
    max_panels: int = MAX_PANELS,
) -> tuple[np.ndarray, int]:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Returns ``(value, panels_used)``. Panels are refined in batches; a panel
    is accepted once the Richardson difference between one Simpson rule and
    two half-width rules drops below 15x its tolerance share.
    """
    if b <= a:
        probe = np.asarray(f(np.array([a])))
        return np.zeros(probe.shape[1:], dtype=probe.dtype), 0
    lo = np.linspace(a, b, initial_panels + 1)
    A, B = lo[:-1], lo[1:]
    M = 0.5 * (A + B)
    vals = _left_limit_eval(f, np.concatenate([A, M, B]), b, a)
    n = A.size
    FA, FM, FB = vals[:n], vals[n : 2 * n], vals[2 * n :]
    H = B - A
    shape = (slice(None),) + (None,) * (vals.ndim - 1)
    S = (H / 6.0)[shape] * (FA + 4 * FM + FB)
    TOL = np.full(n, tol * (1.0 / initial_panels))
    total = np.zeros(vals.shape[1:], dtype=vals.dtype)
    panels = n
    while A.size:
        xl = 0.5 * (A + M)
        xr = 0.5 * (M + B)
        fv = _left_limit_eval(f, np.concatenate([xl, xr]), b, a)
        k = A.size
        FL, FR = fv[:k], fv[k:]
        h2 = (H / 12.0)[shape]
        SL = h2 * (FA + 4 * FL + FM)
        SR = h2 * (FM + 4 * FR + FB)
        diff = SL + SR - S
        err = _err_norm(diff)
        tiny = H <= 16 * np.finfo(float).eps * max(abs(a), abs(b), 1.0)
        ok = (err <= 15.0 * TOL) | tiny
        if np.any(ok):
            total = total + np.sum((SL + SR + diff / 15.0)[ok], axis=0)
        bad = ~ok
        nb = int(bad.sum())
        if nb == 0:
            break
        panels += nb
        if panels > max_panels:
            raise QuadratureNonConvergent(
                f"adaptive Simpson exceeded {max_panels} panels on [{a}, {b}] (tol={tol:g})"
            )
        A = np.concatenate([A[bad], M[bad]])
        B = np.concatenate([M[bad], B[bad]])
        newM = np.concatenate([xl[bad], xr[bad]])
        FA, FB = np.concatenate([FA[bad], FM[bad]]), np.concatenate([FM[bad], FB[bad]])
        FM = np.concatenate([FL[bad], FR[bad]])
        S = np.concatenate([SL[bad], SR[bad]])
        TOL = np.concatenate([TOL[bad], TOL[bad]]) * 0.5
        M = newM
        H = B - A
    return total, panels


def piece_bounds(a: float, b: float, breaks: Sequence[float]) -> list[tuple[float, float]]:
    """Split ``[a, b]`` at the interior points of ``breaks``."""
    cuts = sorted({float(x) for x in breaks if a < x < b})
    edges = [float(a)] + cuts + [float(b)]
    return list(zip(edges[:-1], edges[1:]))


def integrate_piecewise(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    breaks: Sequence[float] = (),
) -> np.ndarray:
    """Adaptive Simpson over each smooth piece; tolerance split by length."""
    pieces = piece_bounds(a, b, breaks)
    length = b - a
    total = None
    for lo, hi in pieces:
        val, _ = adaptive_simpson(f, lo, hi, tol * (hi - lo) / length)
        total = val if total is None else total + val
    if total is None:
        probe = np.asarray(f(np.array([a])))
        total = np.zeros(probe.shape[1:], dtype=probe.dtype)
    return total


@lru_cache(maxsize=64)
def _leggauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(q)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(lo: np.ndarray | float, hi: np.ndarray | float, q: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of ``q``-point rules on each panel ``[lo_i, hi_i]``.

    Output arrays are flattened panel-major.
    """
    x, w = _leggauss(q)
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    weights = half[:, None] * w[None, :]
    return nodes.ravel(), weights.ravel()
