import json

import numpy as np
import pytest
from scipy.linalg import expm

from ql1sim.catalog import BUILTINS, get_builtin, scaled_to_l1
from ql1sim.config import format_matrix, instance_from_dict, load_instance, parse_matrix
from ql1sim.errors import ConfigError, DimensionMismatch, NotHermitian, NotUnitary, ParseError
from ql1sim.hamcore import LCHamiltonian, LCUHamiltonian, time_l1_norm
from ql1sim.linalg import X, Z
from ql1sim.propagator import evolve

ZROWS = format_matrix(Z)
XROWS = format_matrix(X)


def test_matrix_round_trip(rng):
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_array_equal(parse_matrix(format_matrix(m)), m)
    with pytest.raises(DimensionMismatch):
        parse_matrix([[[1, 0], [0, 0]]])
    with pytest.raises(DimensionMismatch):
        parse_matrix(ZROWS, dim=3)
    with pytest.raises(ConfigError):
        parse_matrix([[1, 2], [3, 4]])


def test_lcu_instance():
    doc = {"dim": 2, "model": "lcu", "t_end": 1.0, "coeffs": ["1+tau"], "unitaries": [ZROWS]}
    h = instance_from_dict(doc)
    assert isinstance(h, LCUHamiltonian)
    np.testing.assert_allclose(h.at(0.5), 1.5 * Z)
    np.testing.assert_allclose(evolve(h, tol=1e-12).unitary, expm(-1.5j * Z), atol=1e-10)


def test_lc_instance_with_discontinuity(tmp_path):
    doc = {"dim": 2, "model": "lc", "t_end": 2.0, "coeffs": ["0.5", "2*tau"], "matrices": [XROWS, ZROWS],
           "discontinuities": [1.0]}
    path = tmp_path / "two.json"
    path.write_text(json.dumps(doc))
    h = load_instance(path)
    assert isinstance(h, LCHamiltonian)
    assert h.name == "two"
    assert list(h.discontinuities) == [1.0]
    np.testing.assert_allclose(h.at(0.25), 0.5 * X + 0.5 * Z)


def test_dense_builtin_instance():
    h = instance_from_dict({"model": "dense-builtin", "dim": 2, "builtin": {"name": "linear-z", "params": {"scale": 2}}})
    assert time_l1_norm(h) == pytest.approx(3.0)
    with pytest.raises(DimensionMismatch):
        instance_from_dict({"model": "dense-builtin", "dim": 4, "builtin": "const-z"})


@pytest.mark.parametrize(
    "doc, err",
    [
        ([], ConfigError),
        ({"model": "odd"}, ConfigError),
        ({"model": "lcu", "dim": 2, "coeffs": ["1"], "unitaries": [ZROWS]}, ConfigError),
        ({"model": "lcu", "dim": 2, "t_end": 1, "coeffs": ["1"]}, ConfigError),
        ({"model": "lcu", "dim": 2, "t_end": 1, "coeffs": ["1", "2"], "unitaries": [ZROWS]}, DimensionMismatch),
        ({"model": "lcu", "dim": 2, "t_end": 1, "coeffs": ["1+"], "unitaries": [ZROWS]}, ParseError),
        ({"model": "lcu", "dim": 2, "t_end": 1, "coeffs": ["1"], "unitaries": [format_matrix(2 * Z)]}, NotUnitary),
        ({"model": "lc", "dim": 2, "t_end": 1, "coeffs": ["1"], "matrices": [format_matrix(np.triu(X))]}, NotHermitian),
        ({"model": "dense-builtin", "builtin": {"name": "nope"}}, ConfigError),
        ({"model": "dense-builtin", "builtin": {"name": "const-z", "params": {"bogus": 1}}}, ConfigError),
        ({"model": "dense-builtin"}, ConfigError),
    ],
)
def test_instance_errors(doc, err):
    with pytest.raises(err):
        instance_from_dict(doc)


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="missing.json"):
        load_instance(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_instance(bad)


def test_builtin_catalog():
    assert {"const-z", "linear-z", "rotating-field", "piecewise-xz", "scattering-toy"} <= set(BUILTINS)
    assert time_l1_norm(get_builtin("linear-z")) == pytest.approx(1.5)
    assert list(get_builtin("piecewise-xz").discontinuities) == [1.0]


@pytest.mark.parametrize("target", [0.1, 1.0, 7.5])
def test_scaled_to_l1(builtin, target):
    h = scaled_to_l1(builtin, target)
    assert time_l1_norm(h) == pytest.approx(target, rel=1e-9)
    assert h.name == builtin.name
