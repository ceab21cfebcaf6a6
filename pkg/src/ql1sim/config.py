"""JSON instance files.

Schema::

    {
      "dim": 2,
      "model": "lcu" | "lc" | "dense-builtin",
      "t_end": 1.0,
      "coeffs": ["1+tau", ...],                  # lcu / lc
      "unitaries": [[[re, im], ...], ...],      # one matrix per coefficient
      "builtin": {"name": "linear-z", "params": {...}},
      "discontinuities": [0.5]
    }

For ``lc`` each listed matrix only needs to be Hermitian; term ``l`` is
``coeffs[l](tau) * matrix_l``. ``matrices`` is accepted as a synonym of
``unitaries``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .catalog import get_builtin
from .errors import ConfigError, DimensionMismatch
from .expr import CoeffFunction
from .hamcore import LCHamiltonian, LCUHamiltonian, TimeDepHamiltonian
from .linalg import require_hermitian


def parse_matrix(rows, dim: int | None = None) -> np.ndarray:
    """Row-major list of ``[re, im]`` pairs to a complex matrix."""
    try:
        m = np.array([[complex(float(e[0]), float(e[1])) for e in row] for row in rows], dtype=np.complex128)
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"malformed matrix literal: {exc}") from None
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix literal is not square: shape {m.shape}")
    if dim is not None and m.shape[0] != dim:
        raise DimensionMismatch(f"matrix literal has size {m.shape[0]}, expected {dim}")
    return m


def format_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def instance_from_dict(doc: dict, name: str = "") -> TimeDepHamiltonian:
    if not isinstance(doc, dict):
        raise ConfigError("instance document must be a JSON object")
    model = doc.get("model")
    if model == "dense-builtin":
        entry = doc.get("builtin")
        if isinstance(entry, str):
            entry = {"name": entry}
        if not isinstance(entry, dict) or "name" not in entry:
            raise ConfigError("dense-builtin instances need builtin: {name, params}")
        h = get_builtin(entry["name"], **dict(entry.get("params") or {}))
        if "dim" in doc and int(doc["dim"]) != h.dim:
            raise DimensionMismatch(f"builtin {entry['name']!r} has dim {h.dim}, config says {doc['dim']}")
        return h
    if model not in ("lcu", "lc"):
        raise ConfigError(f"unknown model {model!r}; expected 'lcu', 'lc' or 'dense-builtin'")
    for key in ("dim", "t_end", "coeffs"):
        if key not in doc:
            raise ConfigError(f"instance is missing {key!r}")
    dim = int(doc["dim"])
    t_end = float(doc["t_end"])
    mats_raw = doc.get("unitaries", doc.get("matrices"))
    if mats_raw is None:
        raise ConfigError("instance is missing 'unitaries'")
    coeffs = [CoeffFunction(str(c)) for c in doc["coeffs"]]
    mats = [parse_matrix(m, dim) for m in mats_raw]
    if len(mats) != len(coeffs):
        raise DimensionMismatch(f"{len(coeffs)} coefficients but {len(mats)} matrices")
    disc = [float(x) for x in doc.get("discontinuities", [])]
    if model == "lcu":
        h = LCUHamiltonian(coeffs, np.array(mats), t_end, disc, name=name)
    else:
        for l, m in enumerate(mats):
            require_hermitian(m, f"matrix {l}")
        terms = [
            (lambda t, c=c, m=m: np.asarray(c(t), dtype=float)[:, None, None] * m[None]) for c, m in zip(coeffs, mats)
        ]
        h = LCHamiltonian(terms, dim, t_end, disc, name=name)
    h.meta["config"] = doc
    return h


def load_instance(path: str | Path) -> TimeDepHamiltonian:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read instance file {str(path)!r}: {exc.strerror or exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"instance file {str(path)!r} is not valid JSON: {exc}") from None
    return instance_from_dict(doc, name=path.stem)
