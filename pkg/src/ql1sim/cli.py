"""Command-line drivers.

Every command writes a CSV (header row, floats at 17 significant digits)
and a gnuplot script next to it in ``--out``. Exit codes: 0 success,
2 usage or configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, InvalidBound, NumericalError
from .hamcore import NormKind, TimeDepHamiltonian, norm_profile, sample_grid, time_l1_norm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_plot(path: Path, csv_name: str, title: str, plots: Sequence[str], extra: Sequence[str] = ()) -> Path:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        f"set title {json.dumps(title)}",
        *extra,
        "plot " + ", \\\n     ".join(f"'{csv_name}' {p}" for p in plots),
        "",
    ]
    path.write_text("\n".join(lines))
    return path


def _floats(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("list must be nonempty")
    return vals


def _ints(text: str) -> list[int]:
    vals = _floats(text)
    if any(v != int(v) or v < 1 for v in vals):
        raise argparse.ArgumentTypeError(f"expected comma-separated positive integers, got {text!r}")
    return [int(v) for v in vals]


@dataclass
class RunConfig:
    command: str
    instance: str | None = None
    builtin: str | None = None
    eps: float = 1e-3
    r: list[int] = field(default_factory=lambda: [1, 2, 4, 8])
    K: list[int] = field(default_factory=lambda: [8])
    M: list[int] = field(default_factory=lambda: [64])
    seed: int = 0
    trials: int = 0
    out: Path = Path("out")
    tol: float = 1e-10
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidBound(f"--eps must be positive, got {self.eps}")
        if not self.tol > 0:
            raise InvalidBound(f"--tol must be positive, got {self.tol}")
        if not (self.r and self.K and self.M):
            raise ConfigError("--r, --K and --M lists must be nonempty")
        if self.trials < 0:
            raise ConfigError("--trials must be nonnegative")

    def hamiltonian(self, default: str) -> TimeDepHamiltonian:
        from .catalog import get_builtin
        from .config import load_instance

        if self.instance is not None:
            return load_instance(self.instance)
        return get_builtin(self.builtin or default)

    def label(self, h: TimeDepHamiltonian) -> str:
        return h.name or self.builtin or Path(self.instance or "instance").stem


def cmd_simulate(cfg: RunConfig) -> int:
    from .config import format_matrix
    from .linalg import unitarity_defect
    from .propagator import evolve

    h = cfg.hamiltonian("linear-z")
    res = evolve(h, tol=cfg.tol)
    name = cfg.label(h)
    doc = {
        "instance": name,
        "dim": h.dim,
        "t_end": h.t_end,
        "tol": cfg.tol,
        "error_estimate": res.error_estimate,
        "steps_used": res.steps_used,
        "unitary": format_matrix(res.unitary),
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "propagator.json").write_text(json.dumps(doc, indent=2) + "\n")
    write_csv(
        cfg.out / "simulate.csv",
        ["instance", "dim", "t_end", "tol", "error_estimate", "steps_used", "unitarity_defect", "l1_norm"],
        [[name, h.dim, h.t_end, cfg.tol, res.error_estimate, res.steps_used, unitarity_defect(res.unitary),
          time_l1_norm(h)]],
    )
    taus = sample_grid(h, 513)
    write_csv(cfg.out / "norm_profile.csv", ["tau", "spectral_norm"],
              list(zip(taus, norm_profile(h, taus, NormKind.SPECTRAL))))
    write_plot(cfg.out / "simulate.gp", "norm_profile.csv", f"norm profile: {name}",
               ["using 1:2 with lines"], ["set xlabel 'tau'", "set ylabel '||H(tau)||'"])
    return EXIT_OK


def cmd_qdrift_bench(cfg: RunConfig) -> int:
    from .metrics import apply_channel, diamond_lower_bound, trace_distance
    from .qdrift import (
        build_plan,
        empirical_channel,
        exact_channel,
        ideal_channel,
        long_time_bound,
        run_qdrift,
        segmented_channel,
    )
    from .linalg import random_state

    h = cfg.hamiltonian("linear-z")
    name = cfg.label(h)
    plan = build_plan(h)
    ideal = ideal_channel(h)
    rng = np.random.default_rng(cfg.seed)
    psi = random_state(rng, h.dim)
    rho = np.outer(psi, psi.conj())
    rows = []
    for r in cfg.r:
        chan = exact_channel(h, plan) if r == 1 else segmented_channel(h, plan, r)
        lb = diamond_lower_bound(chan, ideal, seed=cfg.seed)
        mc = float("nan")
        if cfg.trials > 0:
            us = run_qdrift(h, plan, r, cfg.seed, cfg.trials)
            mc = trace_distance(apply_channel(empirical_channel(us), rho), apply_channel(chan, rho))
        rows.append([name, r, plan.total_l1, long_time_bound(plan.total_l1, r), lb, cfg.trials, cfg.seed, mc])
    write_csv(cfg.out / "qdrift_bench.csv",
              ["instance", "r", "l1_norm", "bound", "diamond_lb", "trials", "seed", "mc_trace_distance"], rows)
    write_plot(cfg.out / "qdrift_bench.gp", "qdrift_bench.csv", f"qDRIFT error vs segments: {name}",
               ["using 2:5 with linespoints", "using 2:4 with lines"],
               ["set logscale xy", "set xlabel 'r'", "set ylabel 'diamond distance'"])
    return EXIT_OK


def _km_pairs(cfg: RunConfig) -> list[tuple[int, int]]:
    ks, ms = cfg.K, cfg.M
    if len(ks) == 1:
        ks = ks * len(ms)
    if len(ms) == 1:
        ms = ms * len(ks)
    if len(ks) != len(ms):
        raise ConfigError(f"--K has {len(cfg.K)} entries and --M has {len(cfg.M)}; lengths must match or be 1")
    return list(zip(ks, ms))


def cmd_rescale_check(cfg: RunConfig) -> int:
    from .dyson import DysonConfig, dyson_truncated, rescaled_dyson
    from .hamcore import sup_norm
    from .propagator import evolve
    from .rescaling import build_clock, rescaled_hamiltonian

    h = cfg.hamiltonian("scattering-toy")
    name = cfg.label(h)
    pairs = _km_pairs(cfg)
    clock = build_clock(h)
    exact = evolve(h, tol=cfg.tol).unitary
    ht = rescaled_hamiltonian(h, clock)
    resc = evolve(ht, tol=cfg.tol).unitary
    l1 = time_l1_norm(h)
    write_csv(
        cfg.out / "rescale_identity.csv",
        ["instance", "tol", "identity_gap", "s_end", "rescaled_sup_norm", "l1_norm"],
        [[name, cfg.tol, float(np.linalg.norm(exact - resc, 2)), clock.s_end, sup_norm(ht), l1]],
    )
    rows = []
    for k, m in pairs:
        dc = DysonConfig(k, m)
        for flag, u in ((0, dyson_truncated(h, 0.0, h.t_end, dc)), (1, rescaled_dyson(h, clock, dc))):
            rows.append([name, flag, k, m, float(np.linalg.norm(u - exact, 2))])
    write_csv(cfg.out / "rescale_check.csv", ["instance", "rescaled", "K", "M", "spectral_error"], rows)
    write_plot(cfg.out / "rescale_check.gp", "rescale_check.csv", f"truncated Dyson error: {name}",
               ["using 4:($2==0?$5:1/0) with linespoints title 'unrescaled'",
                "using 4:($2==1?$5:1/0) with linespoints title 'rescaled'"],
               ["set logscale xy", "set xlabel 'M'", "set ylabel 'spectral error'"])
    return EXIT_OK


def cmd_decompose(cfg: RunConfig) -> int:
    from .sparse import one_sparse_decompose, random_sparse_hermitian, reconstruct, reflection_round, sparsity

    ex = cfg.extra
    if cfg.instance is None and cfg.builtin is None:
        rng = np.random.default_rng(cfg.seed)
        d = max(1, int(ex.get("sparsity") or 2))
        mat = random_sparse_hermitian(rng, int(ex.get("dim") or 8), d)
        name = f"random-{mat.shape[0]}-{d}"
    else:
        h = cfg.hamiltonian("rotating-field")
        tau = ex.get("tau")
        tau = 0.5 * h.t_end if tau is None else float(tau)
        mat = h.at(tau)
        name = f"{cfg.label(h)}@{fmt(tau)}"
    d = sparsity(mat)
    terms = one_sparse_decompose(mat, d)
    resum = sum((t.dense() for t in terms), np.zeros_like(mat))
    hmax = float(np.max(np.abs(mat))) if mat.size else 0.0
    rows = []
    for gamma in ex.get("gamma") or [0.5, 0.1, 0.01]:
        refl, eta = reflection_round(terms, gamma)
        err = float(np.max(np.abs(mat - reconstruct(refl, gamma, mat.shape[0]))))
        rows.append([name, mat.shape[0], d, len(terms), float(np.max(np.abs(mat - resum))), hmax,
                     gamma, eta, err, np.sqrt(2) * gamma])
    write_csv(cfg.out / "decompose.csv",
              ["instance", "dim", "sparsity", "one_sparse_terms", "resum_error", "max_norm", "gamma",
               "reflections", "rounding_error", "rounding_bound"], rows)
    write_plot(cfg.out / "decompose.gp", "decompose.csv", f"reflection rounding: {name}",
               ["using 7:9 with linespoints", "using 7:10 with lines"],
               ["set logscale xy", "set xlabel 'gamma'", "set ylabel 'max-norm error'"])
    return EXIT_OK


def cmd_resources(cfg: RunConfig) -> int:
    from .resources import estimates_for_instance

    h = cfg.hamiltonian("linear-z")
    name = cfg.label(h)
    rows = []
    for est in estimates_for_instance(h, cfg.eps):
        inputs = ";".join(f"{k}={fmt(v)}" for k, v in sorted(est.inputs.items()))
        rows.append([name, est.formula_id.value, inputs, est.value, est.asymptotic])
    write_csv(cfg.out / "resources.csv", ["instance", "formula_id", "inputs", "value", "asymptotic"], rows)
    write_plot(cfg.out / "resources.gp", "resources.csv", f"resource estimates: {name} (eps={fmt(cfg.eps)})",
               ["using 0:4:xtic(2) with boxes"],
               ["set style fill solid 0.5", "set logscale y", "set xtics rotate by -45", "set boxwidth 0.8"])
    return EXIT_OK


def cmd_scatter(cfg: RunConfig) -> int:
    from . import scattering as sc

    ex = cfg.extra
    params = sc.QUOTED_PARAMS if ex.get("params") == "quoted" else sc.HELIUM_PARAMS
    dt = float(ex.get("dt") or sc.DEFAULT_DT)
    # the quoted start is ten times farther out, so widen its window to cover the rebound
    default_t = sc.COLLISION_T_END if params is sc.HELIUM_PARAMS else 2 * params.r0 / params.v0
    t_end = float(ex.get("t_end") or default_t)
    traj = sc.integrate_trajectory(params, t_end, dt)
    r_min, t_min = sc.closest_approach(traj)
    stride = max(1, int(ex.get("stride") or 20))
    idx = np.arange(0, traj.times.size, stride)
    if idx[-1] != traj.times.size - 1:
        idx = np.append(idx, traj.times.size - 1)
    rows = [[traj.times[i] / sc.PICOSECOND, traj.separations[i] / sc.ANGSTROM,
             traj.potential[i] / params.epsilon] for i in idx]
    write_csv(cfg.out / "scatter.csv", ["t_ps", "r_angstrom", "V_over_epsilon"], rows)
    delta = float(ex.get("delta") or 0.0)
    h = sc.induced_hamiltonian(traj, sc.normalized_coupling(traj), 2, delta)
    ratio = sc.l1_linf_ratio(h)
    write_csv(cfg.out / "scatter_summary.csv",
              ["r_min_angstrom", "t_min_ps", "energy_drift", "l1_linf_ratio", "dt", "delta"],
              [[r_min / sc.ANGSTROM, t_min / sc.PICOSECOND, traj.energy_drift(), ratio, dt, delta]])
    (cfg.out / "scatter_instance.json").write_text(
        json.dumps(sc.instance_config(params, t_end, dt, delta), indent=2) + "\n")
    write_plot(cfg.out / "scatter.gp", "scatter.csv", "Lennard-Jones collision",
               ["using 1:2 with lines axes x1y1", "using 1:3 with lines axes x1y2"],
               ["set xlabel 't (ps)'", "set ylabel 'r (Angstrom)'", "set y2label 'V / epsilon'",
                "set y2tics", "set ytics nomirror"])
    return EXIT_OK


def cmd_avg_check(cfg: RunConfig) -> int:
    from .catalog import BUILTINS, get_builtin, scaled_to_l1
    from .metrics import diamond_lower_bound
    from .propagator import evolve
    from .qdrift import average_hamiltonian, averaged_channel, build_plan, exact_channel
    from .linalg import expm_hermitian

    if cfg.instance is not None or cfg.builtin is not None:
        bases = [cfg.hamiltonian("linear-z")]
    else:
        bases = [get_builtin(n) for n in BUILTINS]
    targets = cfg.extra.get("l1") or [0.1, 0.2, 0.4, 0.5]
    rows = []
    for base in bases:
        for target in targets:
            h = scaled_to_l1(base, target)
            l1 = time_l1_norm(h)
            e = evolve(h, tol=cfg.tol).unitary
            hav = average_hamiltonian(h)
            err = float(np.linalg.norm(e - expm_hermitian(hav, h.t_end), 2))
            lb = diamond_lower_bound(averaged_channel(h), exact_channel(h, build_plan(h)), seed=cfg.seed)
            rows.append([cfg.label(base), l1, err, 2 * l1 ** 2, lb, 4 * l1 ** 2])
    write_csv(cfg.out / "avg_check.csv",
              ["instance", "l1_norm", "avg_error", "avg_bound", "diamond_lb", "diamond_bound"], rows)
    write_plot(cfg.out / "avg_check.gp", "avg_check.csv", "averaging error vs L1 norm",
               ["using 2:3 with points", "using 2:4 with lines", "using 2:5 with points"],
               ["set logscale xy", "set xlabel 'L1 norm'", "set ylabel 'error'"])
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig], int]] = {
    "simulate": cmd_simulate,
    "qdrift-bench": cmd_qdrift_bench,
    "rescale-check": cmd_rescale_check,
    "decompose": cmd_decompose,
    "resources": cmd_resources,
    "scatter": cmd_scatter,
    "avg-check": cmd_avg_check,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--instance", metavar="PATH", help="JSON instance file")
    src.add_argument("--builtin", metavar="NAME", help="catalog instance name")
    common.add_argument("--eps", type=float, default=1e-3, help="target error for resource formulas")
    common.add_argument("--r", type=_ints, default=[1, 2, 4, 8], help="segment counts, e.g. 1,2,4")
    common.add_argument("--K", type=_ints, default=[8], help="Dyson truncation orders")
    common.add_argument("--M", type=_ints, default=[64], help="Dyson grid sizes")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=0, help="Monte Carlo trials (0 disables)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--tol", type=float, default=1e-10, help="reference propagator tolerance")

    parser = _Parser(prog="ql1sim", description="time-dependent Hamiltonian simulation experiments")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "decompose":
            p.add_argument("--gamma", type=_floats, default=None, help="rounding granularities")
            p.add_argument("--tau", type=float, default=None, help="time at which to sample H")
            p.add_argument("--dim", type=int, default=None, help="random instance dimension")
            p.add_argument("--sparsity", type=int, default=None, help="random instance sparsity")
        elif name == "scatter":
            p.add_argument("--params", choices=("helium", "quoted"), default="helium")
            p.add_argument("--dt", type=float, default=None, help="time step in seconds")
            p.add_argument("--t-end", dest="t_end", type=float, default=None, help="duration in seconds")
            p.add_argument("--delta", type=float, default=None, help="static Z splitting of the induced model")
            p.add_argument("--stride", type=int, default=None, help="write every n-th trajectory sample")
        elif name == "avg-check":
            p.add_argument("--l1", type=_floats, default=None, help="L1-norm targets")
    return parser


_CORE = {"command", "instance", "builtin", "eps", "r", "K", "M", "seed", "trials", "out", "tol"}


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    extra = {k: v for k, v in ns.items() if k not in _CORE}
    return RunConfig(**{k: v for k, v in ns.items() if k in _CORE}, extra=extra)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        code = COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except FloatingPointError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(f"wrote outputs to {cfg.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
