"""Time-dependent Hamiltonians, matrix norms and time-integrated norms.

Three representations share one interface:

* :class:`DenseHamiltonian` wraps a batched callable ``taus -> (n, d, d)``;
* :class:`LCHamiltonian` is a sum of Hermitian term functions;
* :class:`LCUHamiltonian` is ``sum_l alpha_l(tau) U_l`` with nonnegative
  coefficients and Hermitian unitaries.

Every model evaluates on arrays of times, which is what the quadrature,
propagator and samplers consume.
"""
from __future__ import annotations

from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, InvalidArgument, NegativeCoefficient, NotUnitary, TimeOutOfDomain
from .linalg import hermitian_spectral_norm, max_norm, require_hermitian, unitarity_defect
from .quadrature import integrate_piecewise, piece_bounds

BatchFn = Callable[[np.ndarray], np.ndarray]


class NormKind(str, Enum):
    SPECTRAL = "Spectral"
    MAX = "Max"
    ELL_ONE = "EllOneOfCoeffs"
    ELL_INF = "EllInfOfCoeffs"


def _domain_slack(t_end: float) -> float:
    return 1e-12 * max(1.0, abs(t_end))


class TimeDepHamiltonian:
    """Common base. Subclasses implement :meth:`term_values`."""

    model = "abstract"

    def __init__(
        self,
        dim: int,
        t_end: float,
        discontinuities: Sequence[float] = (),
        name: str = "",
        meta: dict | None = None,
    ):
        if dim < 1:
            raise DimensionMismatch(f"dimension must be positive, got {dim}")
        if not t_end > 0:
            raise TimeOutOfDomain(f"t_end must be positive, got {t_end}")
        self.dim = int(dim)
        self.t_end = float(t_end)
        self.discontinuities = tuple(sorted(float(x) for x in discontinuities if 0 < x < t_end))
        self.name = name
        self.meta = dict(meta or {})

    @property
    def n_terms(self) -> int:
        return 1

    def check_times(self, taus) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        slack = _domain_slack(self.t_end)
        if taus.size and (np.min(taus) < -slack or np.max(taus) > self.t_end + slack):
            bad = taus[(taus < -slack) | (taus > self.t_end + slack)].flat[0]
            raise TimeOutOfDomain(f"time {bad!r} outside [0, {self.t_end}]")
        return np.clip(taus, 0.0, self.t_end)

    def term_values(self, taus: np.ndarray) -> np.ndarray:
        """Per-term matrices, shape ``(L, n, d, d)``."""
        raise NotImplementedError

    def values(self, taus) -> np.ndarray:
        """``H(tau)`` for each entry of a 1-d array, shape ``(n, d, d)``."""
        taus = self.check_times(np.atleast_1d(taus))
        return self.term_values(taus).sum(axis=0)

    def at(self, tau: float) -> np.ndarray:
        return self.values(np.array([float(tau)]))[0]

    __call__ = at

    def pieces(self, a: float = 0.0, b: float | None = None) -> list[tuple[float, float]]:
        b = self.t_end if b is None else b
        return piece_bounds(a, b, self.discontinuities)

    def scaled(self, c: float) -> "TimeDepHamiltonian":
        raise NotImplementedError

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<{type(self).__name__}{label} dim={self.dim} t_end={self.t_end:g}>"


class DenseHamiltonian(TimeDepHamiltonian):
    model = "dense"

    def __init__(self, fn: BatchFn, dim: int, t_end: float, discontinuities=(), name="", meta=None):
        super().__init__(dim, t_end, discontinuities, name, meta)
        self.fn = fn

    def term_values(self, taus):
        out = np.asarray(self.fn(np.asarray(taus, dtype=float)), dtype=np.complex128)
        if out.shape != (len(taus), self.dim, self.dim):
            raise DimensionMismatch(f"Hamiltonian callable returned shape {out.shape}")
        return require_hermitian(out, "H(tau)")[None]

    def scaled(self, c):
        fn = self.fn
        return DenseHamiltonian(
            lambda t: c * fn(t), self.dim, self.t_end, self.discontinuities, self.name, self.meta
        )


class LCHamiltonian(TimeDepHamiltonian):
    model = "lc"

    def __init__(self, terms: Sequence[BatchFn], dim: int, t_end: float, discontinuities=(), name="", meta=None):
        super().__init__(dim, t_end, discontinuities, name, meta)
        if not terms:
            raise DimensionMismatch("an LC Hamiltonian needs at least one term")
        self.terms = tuple(terms)

    @property
    def n_terms(self):
        return len(self.terms)

    def term_values(self, taus):
        taus = np.asarray(taus, dtype=float)
        out = np.empty((len(self.terms), len(taus), self.dim, self.dim), dtype=np.complex128)
        for l, fn in enumerate(self.terms):
            out[l] = fn(taus)
        return require_hermitian(out, "LC term")

    def term(self, l: int) -> DenseHamiltonian:
        """Term ``l`` as a standalone Hamiltonian on the same domain."""
        return DenseHamiltonian(self.terms[l], self.dim, self.t_end, self.discontinuities, f"{self.name}[{l}]")

    def scaled(self, c):
        return LCHamiltonian(
            [(lambda t, f=f: c * f(t)) for f in self.terms],
            self.dim, self.t_end, self.discontinuities, self.name, self.meta,
        )


class LCUHamiltonian(TimeDepHamiltonian):
    model = "lcu"

    def __init__(
        self,
        coeffs: Sequence[Callable],
        unitaries,
        t_end: float,
        discontinuities=(),
        name="",
        meta=None,
        check_grid: int = 257,
    ):
        unitaries = np.asarray(unitaries, dtype=np.complex128)
        if unitaries.ndim != 3 or unitaries.shape[1] != unitaries.shape[2]:
            raise DimensionMismatch(f"unitaries must have shape (L, d, d), got {unitaries.shape}")
        if len(coeffs) != unitaries.shape[0]:
            raise DimensionMismatch(f"{len(coeffs)} coefficients for {unitaries.shape[0]} unitaries")
        super().__init__(unitaries.shape[1], t_end, discontinuities, name, meta)
        for l, u in enumerate(unitaries):
            require_hermitian(u, f"unitary {l}")
            if unitarity_defect(u) > 1e-12:
                raise NotUnitary(f"unitary {l} fails U^dagger U = I (defect {unitarity_defect(u):.2e})")
        self.coeffs = tuple(coeffs)
        self.unitaries = unitaries
        grid = np.linspace(0.0, self.t_end, check_grid)
        vals = self.coefficient_values(grid)
        if np.any(vals < 0):
            l, k = np.argwhere(vals < 0)[0]
            raise NegativeCoefficient(f"coefficient {l} is negative ({vals[l, k]:.3g}) at tau={grid[k]:.6g}")

    @property
    def n_terms(self):
        return len(self.coeffs)

    def coefficient_values(self, taus) -> np.ndarray:
        taus = np.asarray(taus, dtype=float)
        return np.stack([np.broadcast_to(np.asarray(c(taus), dtype=float), taus.shape) for c in self.coeffs])

    def term_values(self, taus):
        alpha = self.coefficient_values(taus)
        return alpha[:, :, None, None] * self.unitaries[:, None, :, :]

    def scaled(self, c):
        if c < 0:
            raise NegativeCoefficient("LCU Hamiltonians can only be scaled by nonnegative factors")
        return LCUHamiltonian(
            [(lambda t, f=f: c * np.asarray(f(t), dtype=float)) for f in self.coeffs],
            self.unitaries, self.t_end, self.discontinuities, self.name, self.meta,
        )


def eval_hamiltonian(h: TimeDepHamiltonian, tau: float) -> np.ndarray:
    """``H(tau)``; raises :class:`TimeOutOfDomain` outside ``[0, t_end]``."""
    return h.at(tau)


def matrix_norm(a: np.ndarray, kind: NormKind | str = NormKind.SPECTRAL) -> float:
    """Spectral (largest singular value) or max-entry norm of one matrix."""
    kind = NormKind(kind)
    a = np.asarray(a, dtype=np.complex128)
    if kind is NormKind.SPECTRAL:
        return float(np.linalg.svd(a, compute_uv=False)[0])
    if kind is NormKind.MAX:
        return float(np.max(np.abs(a)))
    raise InvalidArgument(f"{kind.value} is a coefficient norm; it needs an LCU Hamiltonian")


def norm_profile(h: TimeDepHamiltonian, taus, kind: NormKind | str = NormKind.SPECTRAL) -> np.ndarray:
    """``tau -> ||H(tau)||`` on an array of times."""
    kind = NormKind(kind)
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if kind in (NormKind.ELL_ONE, NormKind.ELL_INF):
        if not isinstance(h, LCUHamiltonian):
            raise InvalidArgument(f"{kind.value} is only defined for LCU Hamiltonians")
        alpha = h.coefficient_values(h.check_times(taus))
        return alpha.sum(axis=0) if kind is NormKind.ELL_ONE else alpha.max(axis=0)
    vals = h.values(taus)
    if kind is NormKind.SPECTRAL:
        return hermitian_spectral_norm(vals)
    return max_norm(vals)


def time_l1_norm(
    h: TimeDepHamiltonian,
    kind: NormKind | str = NormKind.SPECTRAL,
    a: float = 0.0,
    b: float | None = None,
    tol: float = 1e-10,
) -> float:
    """``int_a^b ||H(tau)|| dtau`` by adaptive Simpson, split at discontinuities."""
    b = h.t_end if b is None else float(b)
    if b < a:
        raise InvalidArgument(f"need a <= b, got [{a}, {b}]")
    if b == a:
        return 0.0
    return float(integrate_piecewise(lambda x: norm_profile(h, x, kind), a, b, tol, h.discontinuities))


def term_l1_norms(
    h: TimeDepHamiltonian, kind: NormKind | str = NormKind.SPECTRAL, tol: float = 1e-10
) -> np.ndarray:
    """Per-term time L1 norms; their sum is the triple norm of an LC Hamiltonian."""
    kind = NormKind(kind)
    reducer = hermitian_spectral_norm if kind is NormKind.SPECTRAL else max_norm
    out = []
    for l in range(h.n_terms):
        f = lambda x, l=l: reducer(h.term_values(h.check_times(x))[l])
        out.append(float(integrate_piecewise(f, 0.0, h.t_end, tol / h.n_terms, h.discontinuities)))
    return np.array(out)


def sample_grid(h: TimeDepHamiltonian, n: int = 4097) -> np.ndarray:
    """Uniform grid plus one-sided neighbours of every discontinuity."""
    grid = np.linspace(0.0, h.t_end, n)
    extra = []
    for x in h.discontinuities:
        extra += [np.nextafter(x, -np.inf), x]
    return np.unique(np.concatenate([grid, extra])) if extra else grid


def sup_norm(h: TimeDepHamiltonian, kind: NormKind | str = NormKind.SPECTRAL, n: int = 4097) -> float:
    """Grid estimate of ``max_tau ||H(tau)||``."""
    return float(np.max(norm_profile(h, sample_grid(h, n), kind)))


def derivative_norm_estimate(
    h: TimeDepHamiltonian, kind: NormKind | str = NormKind.SPECTRAL, n: int = 2049
) -> float:
    """Central-difference estimate of ``max_tau ||H'(tau)||`` inside smooth pieces.

    A user-supplied analytic bound (``meta['deriv_bound']``) should be preferred
    when available; this is only an estimate.
    """
    kind = NormKind(kind)
    reducer = hermitian_spectral_norm if kind is NormKind.SPECTRAL else max_norm
    best = 0.0
    for lo, hi in h.pieces():
        k = max(8, int(round(n * (hi - lo) / h.t_end)))
        step = (hi - lo) / k
        delta = min(1e-5 * max(1.0, hi - lo), 0.25 * step)
        x = np.linspace(lo + delta, np.nextafter(hi, lo) - delta, k)
        d = (h.values(x + delta) - h.values(x - delta)) / (2 * delta)
        best = max(best, float(np.max(reducer(d))))
    return best
