import numpy as np
import pytest
from scipy.linalg import expm

from ql1sim.errors import DimensionMismatch
from ql1sim.linalg import I2, X, Z, random_density, random_state
from ql1sim.metrics import (
    MixedUnitaryChannel,
    apply_channel,
    compose,
    diamond_lower_bound,
    trace_distance,
    unitary_diamond_distance,
)

KET0 = np.diag([1.0, 0.0]).astype(complex)
KET1 = np.diag([0.0, 1.0]).astype(complex)
PLUS = 0.5 * np.ones((2, 2), dtype=complex)


def unitary(u):
    return MixedUnitaryChannel.unitary(u)


def test_identity_channel(rng):
    rho = random_density(rng, 3)
    np.testing.assert_allclose(apply_channel(unitary(np.eye(3)), rho), rho, atol=1e-15)


def test_dephasing_mixture():
    c = MixedUnitaryChannel([0.5, 0.5], [X, Z])
    np.testing.assert_allclose(apply_channel(c, KET0), np.diag([0.5, 0.5]), atol=1e-15)


def test_bit_flip():
    np.testing.assert_allclose(apply_channel(unitary(X), KET0), KET1, atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_channel(unitary(X), np.eye(3))


def test_trace_distance_examples(rng):
    rho = random_density(rng, 4)
    assert trace_distance(rho, rho) == pytest.approx(0, abs=1e-14)
    assert trace_distance(KET0, KET1) == pytest.approx(2)
    assert trace_distance(KET0, PLUS) == pytest.approx(np.sqrt(2))


def test_compose_order():
    # first argument acts first
    h = expm(-0.4j * X)
    c = compose(unitary(h), unitary(Z))
    np.testing.assert_allclose(c.apply(KET0), Z @ h @ KET0 @ h.conj().T @ Z, atol=1e-14)


def test_channels_preserve_trace_and_positivity(rng):
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        k = int(rng.integers(1, 4))
        us = np.array([np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))[0] for _ in range(k)])
        w = rng.dirichlet(np.ones(k))
        out = apply_channel(MixedUnitaryChannel(w, us), random_density(rng, d))
        assert abs(np.trace(out) - 1) <= 1e-12
        assert np.linalg.eigvalsh(out).min() >= -1e-9


def test_diamond_equal_channels():
    c = MixedUnitaryChannel([0.3, 0.7], [X, Z])
    assert diamond_lower_bound(c, c) == 0.0


def test_diamond_perfectly_distinguishable_pair():
    # U^dagger V has eigenvalues -i, i: convex hull contains 0
    assert diamond_lower_bound(unitary(I2), unitary(expm(-0.5j * np.pi * Z))) == pytest.approx(2, abs=1e-9)


def test_diamond_small_rotation():
    theta = 0.1
    v = expm(-1j * theta * Z)
    lb = diamond_lower_bound(unitary(I2), unitary(v))
    assert lb <= 2 * np.linalg.norm(I2 - v, 2) + 1e-12
    assert lb == pytest.approx(2 * np.sin(theta), abs=1e-9)


def _random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _hull_oracle(u, v):
    # distance from 0 to the convex hull of eigenvalues on the unit circle
    ang = np.sort(np.angle(np.linalg.eigvals(u.conj().T @ v)))
    gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * np.pi]]))
    widest = gaps.max()
    if widest <= np.pi:
        return 2.0
    span = 2 * np.pi - widest
    return 2 * np.sqrt(1 - np.cos(span / 2) ** 2)


def test_single_unitary_pairs_match_hull_oracle(rng):
    for _ in range(40):
        d = int(rng.integers(2, 4))
        u, v = _random_unitary(rng, d), _random_unitary(rng, d)
        oracle = _hull_oracle(u, v)
        assert unitary_diamond_distance(u, v) == pytest.approx(oracle, abs=1e-9)
        lb = diamond_lower_bound(unitary(u), unitary(v))
        assert lb == pytest.approx(oracle, abs=1e-6)
        assert lb <= 2 * np.linalg.norm(u - v, 2) + 1e-12


def test_more_restarts_never_lower(rng):
    for _ in range(5):
        a = MixedUnitaryChannel(rng.dirichlet([1, 1, 1]), [_random_unitary(rng, 3) for _ in range(3)])
        b = MixedUnitaryChannel(rng.dirichlet([1, 1]), [_random_unitary(rng, 3) for _ in range(2)])
        vals = [diamond_lower_bound(a, b, restarts=k, seed=7) for k in (0, 1, 4, 16)]
        assert all(x <= y for x, y in zip(vals, vals[1:]))


def test_diamond_respects_thread_cap(monkeypatch, rng):
    a = MixedUnitaryChannel([0.5, 0.5], [X, Z])
    b = unitary(expm(-0.3j * X))
    serial = diamond_lower_bound(a, b, seed=3)
    monkeypatch.setenv("QL1SIM_THREADS", "4")
    assert diamond_lower_bound(a, b, seed=3) == serial
