import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import expm

from ql1sim.cli import fmt, main, parse_config
from ql1sim.config import parse_matrix
from ql1sim.errors import ConfigError
from ql1sim.linalg import Z
from ql1sim.resources import FormulaId

COMMANDS = {
    "simulate": (["--builtin", "linear-z", "--tol", "1e-12"], ["simulate.csv", "norm_profile.csv"]),
    "qdrift-bench": (["--builtin", "linear-z", "--r", "1,2,4,8", "--trials", "200", "--seed", "5"],
                     ["qdrift_bench.csv"]),
    "rescale-check": (["--K", "4,8", "--M", "16,64"], ["rescale_check.csv", "rescale_identity.csv"]),
    "decompose": (["--seed", "3", "--dim", "6", "--sparsity", "2"], ["decompose.csv"]),
    "resources": (["--builtin", "rotating-field", "--eps", "0.01"], ["resources.csv"]),
    "scatter": ([], ["scatter.csv", "scatter_summary.csv"]),
    "avg-check": (["--builtin", "linear-z", "--l1", "0.1,0.3"], ["avg_check.csv"]),
}


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    out = {}
    for cmd, (args, _) in COMMANDS.items():
        dirs = []
        for rep in range(2):
            d = tmp_path_factory.mktemp(f"{cmd}-{rep}")
            assert main([cmd, *args, "--out", str(d)]) == 0
            dirs.append(d)
        out[cmd] = dirs
    return out


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_outputs_and_plot_script(runs, cmd):
    d = runs[cmd][0]
    for name in COMMANDS[cmd][1]:
        rows = read_rows(d / name)
        assert rows
        assert all(set(r) == set(rows[0]) for r in rows)
    scripts = list(d.glob("*.gp"))
    assert scripts
    text = scripts[0].read_text()
    assert any(f"'{name}'" in text or f'"{name}"' in text for name in COMMANDS[cmd][1])


@pytest.mark.parametrize("cmd", sorted(COMMANDS))
def test_byte_identical_reruns(runs, cmd):
    a, b = runs[cmd]
    for path in sorted(a.iterdir()):
        assert path.read_bytes() == (b / path.name).read_bytes(), path.name


def test_float_format():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(3) == "3" and fmt(True) == "1"
    assert float(fmt(np.pi)) == np.pi


def test_simulate_linear_z(runs):
    doc = json.loads((runs["simulate"][0] / "propagator.json").read_text())
    np.testing.assert_allclose(parse_matrix(doc["unitary"]), expm(-1.5j * Z), atol=1e-10)
    row = read_rows(runs["simulate"][0] / "simulate.csv")[0]
    assert float(row["error_estimate"]) <= 1e-12


def test_qdrift_bench_bound(runs):
    rows = read_rows(runs["qdrift-bench"][0] / "qdrift_bench.csv")
    assert [int(r["r"]) for r in rows] == [1, 2, 4, 8]
    for row in rows:
        assert float(row["diamond_lb"]) <= 4 * 1.5**2 / int(row["r"])
        assert float(row["bound"]) == pytest.approx(9 / int(row["r"]))
        assert 0 <= float(row["mc_trace_distance"]) <= 1


def test_resources_one_row_per_formula(runs):
    rows = read_rows(runs["resources"][0] / "resources.csv")
    assert [r["formula_id"] for r in rows] == [f.value for f in FormulaId]
    assert {r["asymptotic"] for r in rows} <= {"0", "1"}


def test_rescale_check_rows(runs):
    rows = read_rows(runs["rescale-check"][0] / "rescale_check.csv")
    assert {(r["rescaled"], r["K"], r["M"]) for r in rows} == {
        (a, k, m) for a in "01" for k, m in (("4", "16"), ("8", "64"))}
    ident = read_rows(runs["rescale-check"][0] / "rescale_identity.csv")[0]
    assert float(ident["identity_gap"]) <= 1e-8


def test_decompose_rounding_bound(runs):
    for row in read_rows(runs["decompose"][0] / "decompose.csv"):
        assert float(row["resum_error"]) <= 1e-13
        assert float(row["rounding_error"]) <= float(row["rounding_bound"])


def test_scatter_panels(runs):
    rows = read_rows(runs["scatter"][0] / "scatter.csv")
    r = np.array([float(x["r_angstrom"]) for x in rows])
    v = np.array([float(x["V_over_epsilon"]) for x in rows])
    assert r[0] == pytest.approx(20.0)
    assert v.min() >= -1 - 1e-12
    summary = read_rows(runs["scatter"][0] / "scatter_summary.csv")[0]
    assert float(summary["r_min_angstrom"]) == pytest.approx(2.142, rel=0.05)
    assert float(summary["t_min_ps"]) == pytest.approx(1.320, rel=0.05)


def test_missing_instance_exit_2(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["simulate", "--instance", str(missing), "--out", str(tmp_path)]) == 2
    assert str(missing) in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["simulate", "--bogus"],
    ["frobnicate"],
    ["simulate", "--eps", "-1"],
    ["qdrift-bench", "--r", ""],
    ["qdrift-bench", "--r", "1,x"],
    ["simulate", "--builtin", "no-such"],
    ["rescale-check", "--K", "1,2,3", "--M", "4,5"],
    ["simulate", "--instance", "a.json", "--builtin", "const-z"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert main([*argv, "--out", str(tmp_path)]) == 2


def test_no_convergence_exit_3(tmp_path, capsys):
    assert main(["simulate", "--builtin", "rotating-field", "--tol", "1e-30", "--out", str(tmp_path)]) == 3
    assert "NoConvergence" in capsys.readouterr().err


def test_parse_config_fields(tmp_path):
    cfg = parse_config(["qdrift-bench", "--builtin", "const-z", "--r", "3,5", "--K", "2", "--M", "9",
                        "--seed", "4", "--trials", "7", "--out", str(tmp_path)])
    assert (cfg.r, cfg.K, cfg.M, cfg.seed, cfg.trials) == ([3, 5], [2], [9], 4, 7)
    with pytest.raises(ConfigError):
        parse_config(["qdrift-bench", "--trials", "-1"])


def test_thread_cap_does_not_change_output(tmp_path):
    args = ["-m", "ql1sim.cli", "qdrift-bench", "--builtin", "rotating-field", "--r", "2", "--trials", "3000",
            "--seed", "9"]
    outs = []
    for threads in ("1", "4"):
        d = tmp_path / threads
        env = {"QL1SIM_THREADS": threads, "PATH": "/usr/bin:/bin"}
        res = subprocess.run([sys.executable, *args, "--out", str(d)], env=env, capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append((d / "qdrift_bench.csv").read_bytes())
    assert outs[0] == outs[1]


def test_scatter_quoted_window_covers_collision(tmp_path):
    assert main(["scatter", "--params", "quoted", "--stride", "500", "--out", str(tmp_path)]) == 0
    summary = read_rows(tmp_path / "scatter_summary.csv")[0]
    assert 1.5 < float(summary["r_min_angstrom"]) < 2.6
    assert 0 < float(summary["t_min_ps"]) < 29.7
