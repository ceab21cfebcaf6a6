"""Monotone cumulative-integral tables ``F(t) = int_a^t lam``.

The table stores exact panel integrals (8-point Gauss-Legendre) at refined
nodes and interpolates between them with a cubic Hermite spline whose slopes
are the integrand itself. Panels are split until the spline reproduces the
midpoint integral to ``rtol * F(b)`` and satisfies the Fritsch-Carlson
monotonicity condition. Both the qDRIFT time sampler and the rescaling clock
are built on it.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureNonConvergent
from .quadrature import gauss_legendre, piece_bounds

_GL_ORDER = 8
MAX_NODES = 1 << 20


def _panel_integrals(lam: Callable, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    if lo.size == 0:
        return np.zeros(0)
    x, w = gauss_legendre(lo, hi, _GL_ORDER)
    return (w * lam(x)).reshape(lo.size, _GL_ORDER).sum(axis=1)


class CumulativeTable:
    def __init__(
        self,
        lam: Callable[[np.ndarray], np.ndarray],
        a: float,
        b: float,
        breaks: Sequence[float] = (),
        grid_size: int = 4096,
        rtol: float = 1e-10,
        max_nodes: int = MAX_NODES,
    ):
        self.lam = lam
        self.a, self.b = float(a), float(b)
        edges = [np.linspace(lo, hi, max(2, int(np.ceil(grid_size * (hi - lo) / (b - a)))) + 1)
                 for lo, hi in piece_bounds(a, b, breaks)]
        nodes = np.unique(np.concatenate(edges))
        lo, hi = nodes[:-1], nodes[1:]
        integ = _panel_integrals(lam, lo, hi)
        scale = max(float(integ.sum()), np.finfo(float).tiny)
        while True:
            mid = 0.5 * (lo + hi)
            left = _panel_integrals(lam, lo, mid)
            d0 = np.asarray(lam(lo), dtype=float)
            d1 = np.asarray(lam(np.nextafter(hi, lo)), dtype=float)
            h = hi - lo
            pred = 0.5 * integ + h * (d0 - d1) / 8.0
            bad = np.abs(pred - left) > rtol * scale
            secant = integ / h
            with np.errstate(divide="ignore", invalid="ignore"):
                alpha = np.where(secant > 0, d0 / secant, 0.0)
                beta = np.where(secant > 0, d1 / secant, 0.0)
            bad |= alpha * alpha + beta * beta > 9.0
            bad &= h > 64 * np.finfo(float).eps * max(1.0, abs(b))
            if not np.any(bad):
                break
            if lo.size + int(bad.sum()) > max_nodes:
                raise QuadratureNonConvergent(f"cumulative table needs more than {max_nodes} nodes")
            right = integ[bad] - left[bad]
            keep = ~bad
            lo = np.concatenate([lo[keep], lo[bad], mid[bad]])
            hi = np.concatenate([hi[keep], mid[bad], hi[bad]])
            integ = np.concatenate([integ[keep], left[bad], right])
            order = np.argsort(lo, kind="stable")
            lo, hi, integ = lo[order], hi[order], integ[order]
        self.nodes = np.concatenate([lo, hi[-1:]])
        self.values = np.concatenate([[0.0], np.cumsum(integ)])
        self.d_start = d0
        self.d_end = d1
        self.total = float(self.values[-1])
        for arr in (self.nodes, self.values, self.d_start, self.d_end):
            arr.setflags(write=False)

    def _hermite(self, j: np.ndarray, s: np.ndarray) -> np.ndarray:
        h = self.nodes[j + 1] - self.nodes[j]
        s2, s3 = s * s, s * s * s
        return (
            (2 * s3 - 3 * s2 + 1) * self.values[j]
            + (s3 - 2 * s2 + s) * h * self.d_start[j]
            + (-2 * s3 + 3 * s2) * self.values[j + 1]
            + (s3 - s2) * h * self.d_end[j]
        )

    def __call__(self, t) -> np.ndarray:
        t = np.clip(np.asarray(t, dtype=float), self.a, self.b)
        j = np.clip(np.searchsorted(self.nodes, t, side="right") - 1, 0, self.nodes.size - 2)
        s = (t - self.nodes[j]) / (self.nodes[j + 1] - self.nodes[j])
        return self._hermite(j, s)

    def inverse(self, target, iterations: int = 52) -> np.ndarray:
        """Bisection on the spline; returns ``t`` with ``F(t) = target``."""
        target = np.clip(np.asarray(target, dtype=float), 0.0, self.total)
        j = np.clip(np.searchsorted(self.values, target, side="right") - 1, 0, self.nodes.size - 2)
        lo = np.zeros_like(target)
        hi = np.ones_like(target)
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            below = self._hermite(j, mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        s = 0.5 * (lo + hi)
        t = self.nodes[j] + s * (self.nodes[j + 1] - self.nodes[j])
        return np.where(target >= self.total, self.b, t)
