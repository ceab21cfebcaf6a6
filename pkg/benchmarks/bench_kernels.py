"""Compare the compiled and pure-Python kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat N] [--csv PATH]

Both backends are imported directly, so the environment switch that picks
the default backend has no effect here.
"""
import argparse
import csv
import sys
import timeit

import numpy as np
from scipy.linalg import expm

from ql1sim.kernels import _pykernels

try:
    from ql1sim.kernels import _ckernels
except ImportError:
    _ckernels = None


def _unitaries(rng, n, d):
    a = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    h = (a + a.conj().transpose(0, 2, 1)) / 2
    return np.ascontiguousarray(np.array([expm(-0.1j * x) for x in h]))


def _hermitians(rng, n, d):
    a = rng.normal(size=(n, d, d)) + 1j * rng.normal(size=(n, d, d))
    return np.ascontiguousarray((a + a.conj().transpose(0, 2, 1)) / 2)


def cases(rng):
    us2 = _unitaries(rng, 4096, 2)
    us8 = _unitaries(rng, 512, 8)
    hs = _hermitians(rng, 256, 4)
    lj = (2e-9, -1363.0, 1.411e-22, 2.869e-10, 3.323e-27, 5e-17, 40000)
    return [
        ("ordered_product d=2 n=4096", "ordered_product", (us2,)),
        ("ordered_product d=8 n=512", "ordered_product", (us8,)),
        ("dyson_accumulate d=4 M=256 K=8 collisions", "dyson_accumulate", (hs, 8, 1 / 256, True)),
        ("dyson_accumulate d=4 M=256 K=8 strict", "dyson_accumulate", (hs, 8, 1 / 256, False)),
        ("lj_verlet 40000 steps", "lj_verlet", lj),
    ]


def best_time(fn, args, repeat):
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv", default=None)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled backend unavailable; build with pip install -e . --no-build-isolation", file=sys.stderr)
        return 1
    rng = np.random.default_rng(0)
    rows = []
    for label, name, fargs in cases(rng):
        py = best_time(getattr(_pykernels, name), fargs, args.repeat)
        cy = best_time(getattr(_ckernels, name), fargs, args.repeat)
        a = getattr(_pykernels, name)(*fargs)
        b = getattr(_ckernels, name)(*fargs)
        a = np.concatenate([np.ravel(x) for x in a]) if isinstance(a, tuple) else np.ravel(a)
        b = np.concatenate([np.ravel(x) for x in b]) if isinstance(b, tuple) else np.ravel(b)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        rows.append((label, py, cy, py / cy, diff))
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'python [s]':>11}  {'cython [s]':>11}  {'speedup':>8}  {'max rel diff':>12}")
    for label, py, cy, sp, diff in rows:
        print(f"{label:<{width}}  {py:11.4g}  {cy:11.4g}  {sp:8.1f}  {diff:12.3g}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["kernel", "python_s", "cython_s", "speedup", "max_rel_diff"])
            w.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
