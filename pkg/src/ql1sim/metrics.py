"""State and channel distances, including a diamond-norm lower bound.

Channels are held as Liouville matrices acting on row-major vectorized
density matrices, ``vec(rho)[a*d + c] = rho[a, c]``. For a unitary ``U`` the
Liouville matrix is ``kron(U, conj(U))``; composition is matrix product.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import fan_out
from .errors import DimensionMismatch, InvalidArgument
from .linalg import hermitize


@dataclass(frozen=True)
class MixedUnitaryChannel:
    """``rho -> sum_k w_k U_k rho U_k^dagger``."""

    weights: np.ndarray
    unitaries: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        u = np.asarray(self.unitaries, dtype=np.complex128)
        if u.ndim == 2:
            u = u[None]
        if u.ndim != 3 or u.shape[1] != u.shape[2] or u.shape[0] != w.size:
            raise DimensionMismatch(f"{w.size} weights for unitaries of shape {u.shape}")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise InvalidArgument(f"weights must be a probability vector (sum {w.sum():.12g})")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "unitaries", u)

    @classmethod
    def unitary(cls, u: np.ndarray) -> "MixedUnitaryChannel":
        return cls(np.ones(1), np.asarray(u)[None])

    @property
    def dim(self) -> int:
        return self.unitaries.shape[1]

    def liouville(self) -> np.ndarray:
        u = self.unitaries
        d = self.dim
        lv = np.einsum("k,kab,kcd->acbd", self.weights, u, np.conj(u))
        return lv.reshape(d * d, d * d)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)


@dataclass(frozen=True)
class SuperOperator:
    """General linear map on ``d x d`` matrices stored as a Liouville matrix."""

    matrix: np.ndarray
    dim: int = field(init=False)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.complex128)
        d = int(round(np.sqrt(m.shape[0])))
        if m.shape != (d * d, d * d):
            raise DimensionMismatch(f"Liouville matrix must be d^2 x d^2, got {m.shape}")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dim", d)

    def liouville(self) -> np.ndarray:
        return self.matrix

    def then(self, other: "Channel") -> "SuperOperator":
        """Apply ``self`` first, then ``other``."""
        return SuperOperator(as_liouville(other) @ self.matrix)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return apply_channel(self, rho)


Channel = MixedUnitaryChannel | SuperOperator


def as_liouville(c: Channel) -> np.ndarray:
    return c.liouville()


def compose(*channels: Channel) -> SuperOperator:
    """Channel applying ``channels[0]`` first and ``channels[-1]`` last."""
    lv = as_liouville(channels[0])
    for c in channels[1:]:
        lv = as_liouville(c) @ lv
    return SuperOperator(lv)


def apply_channel(c: Channel, rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho, dtype=np.complex128)
    if rho.shape != (c.dim, c.dim):
        raise DimensionMismatch(f"state of shape {rho.shape} for a channel on dimension {c.dim}")
    if isinstance(c, MixedUnitaryChannel):
        u = c.unitaries
        return np.einsum("k,kab,bc,kdc->ad", c.weights, u, rho, np.conj(u))
    return (c.matrix @ rho.reshape(-1)).reshape(c.dim, c.dim)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Trace norm ``||rho - sigma||_1`` (no factor 1/2)."""
    rho, sigma = np.asarray(rho), np.asarray(sigma)
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes {rho.shape} and {sigma.shape} differ")
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(rho - sigma)))))


def unitary_diamond_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Exact diamond distance between conjugation channels of ``u`` and ``v``.

    Equals ``2 sqrt(1 - delta^2)`` where ``delta`` is the distance from the
    origin to the convex hull of the eigenvalues of ``u^dagger v``.
    """
    phases = np.sort(np.angle(np.linalg.eigvals(np.conj(u).T @ v)))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    span = 2 * np.pi - np.max(gaps)
    delta = 0.0 if span >= np.pi else float(np.cos(span / 2))
    return 2.0 * float(np.sqrt(max(0.0, 1.0 - delta * delta)))


def _lift(t: np.ndarray, x: np.ndarray) -> np.ndarray:
    # (Phi (x) 1)(X) with X indexed [a, b, c, e] (system a/c, ancilla b/e).
    return np.einsum("acxy,xbye->abce", t, x)


def _lift_adjoint(t: np.ndarray, s: np.ndarray) -> np.ndarray:
    return np.einsum("abce,acxy->xbye", s, np.conj(t))


def _ascent(t: np.ndarray, psi: np.ndarray, iterations: int, cap: int) -> float:
    d = t.shape[0]
    best = 0.0
    for k in range(cap):
        p = psi.reshape(d, d)
        x = _lift(t, np.einsum("ab,ce->abce", p, np.conj(p))).reshape(d * d, d * d)
        x = hermitize(x)
        w, v = np.linalg.eigh(x)
        val = float(np.sum(np.abs(w)))
        if val <= best * (1 + (1e-15 if k < iterations else 1e-10)):
            best = max(best, val)
            break
        best = val
        sign = (v * np.sign(w)) @ np.conj(v).T
        lifted = _lift_adjoint(t, sign.reshape(d, d, d, d)).reshape(d * d, d * d)
        _, vecs = np.linalg.eigh(hermitize(lifted))
        psi = vecs[:, -1]
    return best


def diamond_lower_bound(
    a: Channel,
    b: Channel,
    restarts: int = 16,
    seed: int = 0,
    iterations: int = 50,
    polish: int = 20,
) -> float:
    """Certified lower bound on ``||A - B||_diamond``.

    Each candidate input is a pure state on system plus an equal-size
    ancilla. Starting from the maximally entangled state and from
    ``restarts`` random states, the input is improved by replacing it with
    the top eigenvector of the adjoint map lifted to the sign operator of
    the current output. Every evaluated input is feasible, so the maximum
    never exceeds the true value. Restart ``i`` draws from a stream keyed by
    ``(seed, i)``, so increasing ``restarts`` can only add candidates. The ascent converges linearly,
    so after ``iterations`` steps a start keeps going while its relative
    gain per step exceeds 1e-10, for at most ``polish * iterations`` steps.
    """
    if a.dim != b.dim:
        raise DimensionMismatch(f"channel dimensions {a.dim} and {b.dim} differ")
    d = a.dim
    t = (as_liouville(a) - as_liouville(b)).reshape(d, d, d, d)
    if not np.any(np.abs(t) > 0):
        return 0.0
    starts = [np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)]
    for i in range(restarts):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))
        psi = rng.normal(size=d * d) + 1j * rng.normal(size=d * d)
        starts.append(psi / np.linalg.norm(psi))
    vals = fan_out(lambda psi: _ascent(t, psi, iterations, polish * iterations), starts)
    # distances between channels never exceed 2; anything above is roundoff
    return min(float(max(vals)), 2.0)
