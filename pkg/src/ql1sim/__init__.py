"""Simulation of time-dependent Hamiltonians with cost governed by the L1 norm in time.

Submodules: :mod:`hamcore` (models and norms), :mod:`propagator` (reference
evolution), :mod:`metrics` (channel distances), :mod:`qdrift` (continuous
qDRIFT), :mod:`rescaling` (clock change of variables), :mod:`dyson`
(truncated Dyson series), :mod:`sparse` (1-sparse decompositions),
:mod:`resources` (complexity formulas), :mod:`scattering` (collision model)
and :mod:`cli`.
"""
from .errors import ConfigError, NumericalError, Ql1simError
from .hamcore import (
    DenseHamiltonian,
    LCHamiltonian,
    LCUHamiltonian,
    NormKind,
    TimeDepHamiltonian,
    eval_hamiltonian,
    matrix_norm,
    time_l1_norm,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DenseHamiltonian",
    "LCHamiltonian",
    "LCUHamiltonian",
    "NormKind",
    "NumericalError",
    "Ql1simError",
    "TimeDepHamiltonian",
    "eval_hamiltonian",
    "matrix_norm",
    "time_l1_norm",
]
