import numpy as np
import pytest

from ql1sim.catalog import BUILTINS, get_builtin
from ql1sim.hamcore import DenseHamiltonian, LCHamiltonian, LCUHamiltonian
from ql1sim.linalg import X, Z


def const_z(t_end=1.0, scale=1.0):
    return LCUHamiltonian([lambda t: scale + 0 * np.asarray(t)], [Z], t_end, name="z")


def ramp_z():
    return LCUHamiltonian([lambda t: 1 + np.asarray(t)], [Z], 1.0, name="ramp")


def cos_sin():
    return DenseHamiltonian(
        lambda t: np.cos(t)[:, None, None] * X + np.sin(t)[:, None, None] * Z, 2, np.pi, name="cos-sin"
    )


def x_then_z():
    gate = lambda t: (np.asarray(t) < 1).astype(float)[:, None, None]
    return LCHamiltonian([lambda t: gate(t) * X, lambda t: (1 - gate(t)) * Z], 2, 2.0, [1.0], name="x-then-z")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=sorted(BUILTINS))
def builtin(request):
    return get_builtin(request.param)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
