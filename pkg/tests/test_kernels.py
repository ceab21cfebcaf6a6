import numpy as np
import pytest

from ql1sim import kernels
from ql1sim.kernels import _pykernels

try:
    from ql1sim.kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels unavailable")


def _unitaries(rng, n, d):
    z = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    return np.linalg.qr(z)[0]


def test_backend_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_pure_python_product_order(rng):
    us = _unitaries(rng, 5, 3)
    ref = us[4] @ us[3] @ us[2] @ us[1] @ us[0]
    np.testing.assert_allclose(_pykernels.ordered_product(us), ref, atol=1e-13)


@needs_ext
@pytest.mark.parametrize("n", [1, 2, 7, 64])
def test_ordered_product_backends_agree(rng, n):
    us = _unitaries(rng, n, 4)
    np.testing.assert_allclose(_ckernels.ordered_product(us), _pykernels.ordered_product(us), atol=1e-12)


@needs_ext
@pytest.mark.parametrize("collisions", [True, False])
@pytest.mark.parametrize("order", [0, 1, 3, 8])
def test_dyson_backends_agree(rng, order, collisions):
    hs = rng.normal(size=(16, 3, 3)) + 1j * rng.normal(size=(16, 3, 3))
    hs = 0.5 * (hs + np.conj(np.swapaxes(hs, 1, 2)))
    a = _ckernels.dyson_accumulate(hs, order, 0.05, collisions)
    b = _pykernels.dyson_accumulate(hs, order, 0.05, collisions)
    np.testing.assert_allclose(a, b, atol=1e-12)


@needs_ext
def test_verlet_backends_agree():
    args = (20.0, -1.0, 1.0, 1.0, 1.0, 1e-3, 30000)
    rc, vc = _ckernels.lj_verlet(*args)
    rp, vp = _pykernels.lj_verlet(*args)
    np.testing.assert_allclose(rc, rp, rtol=1e-12)
    np.testing.assert_allclose(vc, vp, rtol=1e-10, atol=1e-12)
