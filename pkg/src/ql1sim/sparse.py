"""Splitting a d-sparse Hermitian matrix into 1-sparse parts and rounding them to reflections.

A 1-sparse Hermitian matrix has at most one nonzero per row and column: a
set of disjoint off-diagonal pairs ``(j, k), (k, j)`` plus diagonal entries on
rows untouched by any pair.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NotHermitian, SparsityViolation
from .linalg import HERMITIAN_RTOL


@dataclass(frozen=True)
class OneSparseMatrix:
    dim: int
    entries: tuple[tuple[int, int, complex], ...]

    def __post_init__(self):
        rows, cols = set(), set()
        lookup = {}
        for j, k, v in self.entries:
            if j in rows or k in cols:
                raise SparsityViolation(f"entry ({j}, {k}) breaks 1-sparsity")
            rows.add(j)
            cols.add(k)
            lookup[(j, k)] = complex(v)
        for (j, k), v in lookup.items():
            w = lookup.get((k, j))
            if w is None or abs(w - np.conj(v)) > HERMITIAN_RTOL * max(1.0, abs(v)):
                raise NotHermitian(f"entry ({j}, {k}) lacks its conjugate partner")

    def dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for j, k, v in self.entries:
            out[j, k] = v
        return out

    def max_norm(self) -> float:
        return max((abs(v) for _, _, v in self.entries), default=0.0)

    def is_reflection(self) -> bool:
        """Hermitian and unitary: one unit-modulus entry per row, real on the diagonal."""
        rows = {j for j, _, _ in self.entries}
        if len(rows) != self.dim:
            return False
        for j, k, v in self.entries:
            if abs(abs(v) - 1.0) > 1e-12 or (j == k and abs(v.imag) > 0):
                return False
        return True


def _nonzero_pattern(h: np.ndarray) -> list[np.ndarray]:
    return [np.flatnonzero(h[j]) for j in range(h.shape[0])]


def sparsity(h: np.ndarray) -> int:
    """Largest number of nonzeros in any row."""
    h = np.asarray(h)
    return int(max((np.count_nonzero(row) for row in h), default=0))


def _validate(h: np.ndarray, d: int) -> np.ndarray:
    h = np.asarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SparsityViolation(f"expected a square matrix, got shape {h.shape}")
    if d < 1:
        raise SparsityViolation("sparsity d must be positive")
    counts = np.count_nonzero(h, axis=1)
    if np.any(counts > d):
        j = int(np.argmax(counts))
        raise SparsityViolation(f"row {j} has {counts[j]} nonzeros, more than d={d}")
    colcounts = np.count_nonzero(h, axis=0)
    if np.any(colcounts > d):
        k = int(np.argmax(colcounts))
        raise SparsityViolation(f"column {k} has {colcounts[k]} nonzeros, more than d={d}")
    return h


def rank_pair_blocks(h: np.ndarray, d: int) -> dict[tuple[int, int], np.ndarray]:
    """Blocks ``B[(a, b)]`` holding entries ``(j, k)`` with ``rank_j(k) = a`` and ``rank_k(j) = b``.

    ``rank_j(k)`` is the position of column ``k`` among row ``j``'s nonzeros.
    Each block has at most one entry per row and column, the blocks sum to
    ``H``, and ``B[(a, b)]^dagger = B[(b, a)]``; off the diagonal ``a = b`` the
    blocks are therefore not Hermitian on their own.
    """
    h = _validate(h, d)
    pattern = _nonzero_pattern(h)
    rank = [{int(k): s for s, k in enumerate(cols)} for cols in pattern]
    blocks: dict[tuple[int, int], np.ndarray] = {}
    for j, cols in enumerate(pattern):
        for k in cols:
            key = (rank[j][int(k)], rank[int(k)][j])
            blk = blocks.setdefault(key, np.zeros_like(h))
            blk[j, k] = h[j, k]
    return blocks


def one_sparse_decompose(h: np.ndarray, d: int) -> list[OneSparseMatrix]:
    """Hermitian 1-sparse terms summing exactly to ``h``.

    Every unordered nonzero pair ``{j, k}`` (and every diagonal entry) is an
    edge of the sparsity graph; edges are coloured greedily in row-major order
    with the smallest colour free at both endpoints. Each colour class is one
    term. At most ``2d - 1 <= d^2`` colours are needed.
    """
    h = _validate(h, d)
    n = h.shape[0]
    used: list[set[int]] = [set() for _ in range(n)]
    classes: dict[int, list[tuple[int, int, complex]]] = {}
    for j in range(n):
        for k in np.flatnonzero(h[j]):
            k = int(k)
            if k < j:
                continue
            taken = used[j] | used[k]
            c = 0
            while c in taken:
                c += 1
            used[j].add(c)
            used[k].add(c)
            bucket = classes.setdefault(c, [])
            bucket.append((j, k, complex(h[j, k])))
            if k != j:
                bucket.append((k, j, complex(h[k, j])))
    return [OneSparseMatrix(n, tuple(classes[c])) for c in sorted(classes)]


def _round_half_even(x: float, gamma: float) -> int:
    return int(np.round(x / gamma))


def _unit_steps(target: complex, eta: int) -> np.ndarray:
    """``eta`` unit-modulus numbers summing to ``target`` (needs ``|target| <= eta``)."""
    m = abs(target)
    phi = np.angle(target) if m > 0 else 0.0
    if eta == 1:
        return np.array([target / m])
    if eta % 2 == 0:
        theta = np.arccos(np.clip(m / eta, -1.0, 1.0))
        half = np.exp(1j * (phi + theta * np.array([1.0, -1.0])))
        return np.repeat(half, eta // 2)
    theta = np.arccos(np.clip((m - 1) / (eta - 1), -1.0, 1.0))
    half = np.exp(1j * (phi + theta * np.array([1.0, -1.0])))
    return np.concatenate([[np.exp(1j * phi)], np.repeat(half, (eta - 1) // 2)])


def _signs(target: int, eta: int) -> np.ndarray:
    plus = (eta + target) // 2
    return np.concatenate([np.ones(plus), -np.ones(eta - plus)])


def _parity_round(x: float, gamma: float, eta: int) -> int:
    """Nearest integer to ``x / gamma`` with the parity of ``eta``."""
    c = _round_half_even(x, gamma)
    if (c - eta) % 2:
        c += 1 if x / gamma > c else -1
    return c


def reflection_round(terms: list[OneSparseMatrix], gamma: float) -> tuple[list[OneSparseMatrix], int]:
    """Approximate each term by ``gamma`` times a sum of 1-sparse reflections.

    Real and imaginary parts are rounded to multiples of ``gamma``
    (round half to even). A term becomes ``eta_j`` reflections, each a
    Hermitian unitary with the term's off-diagonal pairs carrying unit-modulus
    entries and every other row a ``+-1`` on the diagonal. Pair targets are
    hit exactly by choosing phases; diagonal positions take the nearest
    integer with the parity of ``eta_j``; rows the term does not touch get
    cancelling signs. The max-norm error is at most ``sqrt(2) gamma``.
    Returns the reflections and their count ``eta``.
    """
    if not gamma > 0:
        raise InvalidArgument("gamma must be positive")
    out: list[OneSparseMatrix] = []
    for term in terms:
        dim = term.dim
        pairs = [(j, k, complex(_round_half_even(v.real, gamma), _round_half_even(v.imag, gamma)))
                 for j, k, v in term.entries if j < k]
        diag = {j: v.real for j, k, v in term.entries if j == k}
        touched = {j for j, _, _ in term.entries}
        idle = [j for j in range(dim) if j not in touched]
        need = max([abs(n) for *_, n in pairs] + [abs(_round_half_even(x, gamma)) for x in diag.values()] + [0])
        eta = int(np.ceil(need - 1e-12))
        if eta == 0:
            continue
        if eta == 1 and any(abs(n) != 1 for *_, n in pairs):
            # one reflection can only place unit entries on its pairs
            eta = 2
        if idle and eta % 2:
            eta += 1
        cols: list[list[tuple[int, int, complex]]] = [[] for _ in range(eta)]
        for j, k, n in pairs:
            for r, u in enumerate(_unit_steps(n, eta)):
                cols[r].append((j, k, complex(u)))
                cols[r].append((k, j, complex(np.conj(u))))
        for j, x in diag.items():
            for r, sgn in enumerate(_signs(_parity_round(x, gamma, eta), eta)):
                cols[r].append((j, j, complex(sgn)))
        for j in idle:
            for r, sgn in enumerate(_signs(0, eta)):
                cols[r].append((j, j, complex(sgn)))
        out.extend(OneSparseMatrix(dim, tuple(sorted(c))) for c in cols)
    return out, len(out)


def reconstruct(reflections: list[OneSparseMatrix], gamma: float, dim: int) -> np.ndarray:
    total = np.zeros((dim, dim), dtype=np.complex128)
    for g in reflections:
        total += g.dense()
    return gamma * total


def random_sparse_hermitian(rng: np.random.Generator, dim: int, d: int, scale: float = 1.0) -> np.ndarray:
    """Random Hermitian matrix with at most ``d`` nonzeros per row."""
    h = np.zeros((dim, dim), dtype=np.complex128)
    counts = np.zeros(dim, dtype=int)
    pairs = [(j, k) for j in range(dim) for k in range(j, dim)]
    rng.shuffle(pairs)
    for j, k in pairs:
        if counts[j] < d and counts[k] < d:
            if rng.random() < 0.6:
                if j == k:
                    h[j, j] = scale * rng.normal()
                    counts[j] += 1
                else:
                    v = scale * (rng.normal() + 1j * rng.normal())
                    h[j, k] = v
                    h[k, j] = np.conj(v)
                    counts[j] += 1
                    counts[k] += 1
    return h
