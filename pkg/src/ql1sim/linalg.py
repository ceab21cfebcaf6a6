"""Small dense linear-algebra helpers shared across modules."""
from __future__ import annotations

import numpy as np

from .errors import NotHermitian

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}

HERMITIAN_RTOL = 1e-12


def hermiticity_defect(a: np.ndarray) -> float:
    """Largest entrywise gap ``|A - A^dagger|`` relative to ``max|A|`` (batched ok)."""
    a = np.asarray(a)
    scale = np.max(np.abs(a)) if a.size else 0.0
    gap = np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2)))) if a.size else 0.0
    return float(gap / scale) if scale > 0 else float(gap)


def require_hermitian(a: np.ndarray, what: str = "matrix") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise NotHermitian(f"{what} is not square: shape {a.shape}")
    if hermiticity_defect(a) > HERMITIAN_RTOL:
        raise NotHermitian(f"{what} is not Hermitian (defect {hermiticity_defect(a):.3e})")
    return a


def hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))


def expm_hermitian(h: np.ndarray, scale=1.0) -> np.ndarray:
    """``exp(-i * scale * H)`` for a single Hermitian ``H`` or a stack ``(n, d, d)``.

    ``scale`` may be a scalar or an array broadcastable against the stack axis.
    """
    h = hermitize(np.asarray(h, dtype=np.complex128))
    w, v = np.linalg.eigh(h)
    scale = np.asarray(scale, dtype=float)
    if scale.ndim:
        scale = scale[..., None]
    phase = np.exp(-1j * w * scale)
    return (v * phase[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Nearest unitary to ``a`` in any unitarily invariant norm."""
    u, _, vh = np.linalg.svd(a)
    return u @ vh


def spectral_norm(a: np.ndarray) -> np.ndarray:
    """Operator 2-norm, batched over leading axes."""
    a = np.asarray(a)
    if a.shape[-1] == 0:
        return np.zeros(a.shape[:-2])
    return np.linalg.svd(a, compute_uv=False)[..., 0]


def hermitian_spectral_norm(a: np.ndarray) -> np.ndarray:
    """Spectral norm of Hermitian matrices via eigenvalues, batched."""
    w = np.linalg.eigvalsh(hermitize(np.asarray(a, dtype=np.complex128)))
    return np.max(np.abs(w), axis=-1)


def max_norm(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    return np.max(np.abs(a), axis=(-2, -1))


def unitarity_defect(u: np.ndarray) -> float:
    u = np.asarray(u)
    d = u.shape[-1]
    return float(np.max(np.abs(np.conj(np.swapaxes(u, -1, -2)) @ u - np.eye(d))))


def random_state(rng: np.random.Generator, d: int) -> np.ndarray:
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    return psi / np.linalg.norm(psi)


def random_density(rng: np.random.Generator, d: int, rank: int | None = None) -> np.ndarray:
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_hermitian(rng: np.random.Generator, d: int, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (g + g.conj().T)
