import subprocess
import sys

import numpy as np
import pytest

from viscofix import read_trace_csv
from viscofix.cli import main

LINEAR_BASE = """
[problem]
kind = builtin-linear
slope = 0.5

[contraction]
kind = linear
c = 0.25

[scheme]
name = new_implicit

[schedule]
preset = halpern-mix

[solver]
outer_tol = 1e-6
max_outer = 50000
"""


def _config(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_solve_linear_problem(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["solve", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "termination: converged" in out
    assert "final residual:" in out
    final = float(out.split("final point: (")[1].split(")")[0])
    assert abs(final) <= 2e-6


def test_solve_writes_trace(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    trace_path = tmp_path / "trace.csv"
    assert main(["solve", "--config", cfg, "--trace", str(trace_path)]) == 0
    rows = read_trace_csv(trace_path)
    assert len(rows) >= 10
    assert rows[0].n == 1
    assert "trace written" in capsys.readouterr().out


def test_solve_trace_path_from_output_section(tmp_path, capsys):
    trace_path = tmp_path / "from_config.csv"
    cfg = _config(tmp_path, LINEAR_BASE + f"\n[output]\ntrace = {trace_path}\n")
    assert main(["solve", "--config", cfg]) == 0
    assert trace_path.exists()


def test_unknown_key_cites_line(tmp_path, capsys):
    text = LINEAR_BASE.replace("slope = 0.5", "slope = 0.5\nslop = 1.0")
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 1
    err = capsys.readouterr().err
    assert "unknown key 'slop'" in err
    assert "line 5" in err


def test_unknown_section_rejected(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE + "\n[plotting]\nstyle = dots\n")
    assert main(["solve", "--config", cfg]) == 1
    assert "unknown section [plotting]" in capsys.readouterr().err


def test_missing_required_section(tmp_path, capsys):
    cfg = _config(tmp_path, "[problem]\nkind = builtin-linear\nslope = 0.5\n")
    assert main(["solve", "--config", cfg]) == 1
    assert "missing required section [scheme]" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["solve", "--config", str(tmp_path / "absent.cfg")]) == 1
    assert "error:" in capsys.readouterr().err


def test_gamma_range_error(tmp_path, capsys):
    text = """
[problem]
kind = monotone
gamma = 3.0
set = whole-space

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix
"""
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 1
    err = capsys.readouterr().err
    assert "(0, 2]" in err


def test_theta_range_error(tmp_path, capsys):
    text = """
[problem]
kind = pseudocontraction
k = 0.333333
lambda = 0.5
theta = 0.6

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix
"""
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 1
    assert "(0, 0.5]" in capsys.readouterr().err


def test_identity_map_converges_at_first_check(tmp_path, capsys):
    text = """
[problem]
kind = builtin-linear
slope = 1.0

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix
"""
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "iterations: 0" in out
    assert "final residual: 0" in out


def test_viscosity_scheme_requires_contraction_section(tmp_path, capsys):
    text = LINEAR_BASE.replace("[contraction]\nkind = linear\nc = 0.25\n", "")
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 1
    assert "[contraction]" in capsys.readouterr().err


def test_non_convergence_exit_code(tmp_path, capsys):
    text = LINEAR_BASE.replace("max_outer = 50000", "max_outer = 3")
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 2
    assert "max_iters" in capsys.readouterr().out


def test_schedule_range_violation_exit_code(tmp_path, capsys):
    text = LINEAR_BASE.replace(
        "preset = halpern-mix", "preset = eq75\nn0 = 1"
    )
    cfg = _config(tmp_path, text)
    assert main(["solve", "--config", cfg]) == 1
    assert "schedule_range_violation" in capsys.readouterr().out


def test_solve_warns_on_violated_conditions(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    main(["solve", "--config", cfg])
    err = capsys.readouterr().err
    assert "warning: schedule condition (ii) violated" in err
    assert "warning: schedule condition (iv) violated" in err


def test_space_section_mismatch(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE + "\n[space]\nkind = euclidean\ndim = 3\n")
    assert main(["solve", "--config", cfg]) == 1
    assert "dim" in capsys.readouterr().err


def test_validate_schedule_preset(capsys):
    assert main(["validate-schedule", "--preset", "eq75", "--horizon", "10000"]) == 0
    out = capsys.readouterr().out
    assert "(i) satisfied" in out
    assert "(ii) satisfied" in out
    assert "(iii) violated" in out
    assert "(iv) violated" in out
    assert "(v) satisfied" in out
    assert "range violations at n = 1" in out


def test_validate_schedule_halpern(capsys):
    assert main(["validate-schedule", "--preset", "halpern-mix", "--horizon", "1000"]) == 0
    assert "(ii) violated" in capsys.readouterr().out


def test_validate_schedule_unknown_preset(capsys):
    assert main(["validate-schedule", "--preset", "nope", "--horizon", "1000"]) == 1
    assert "unknown preset" in capsys.readouterr().err


def test_validate_schedule_from_config(tmp_path, capsys):
    text = """
[schedule]
kind = custom-rational
alpha1 = 0, 0.5, 0
alpha2 = 1, -1.5, 0
alpha3 = 0, 1, 0
delta = 0.5, -0.5, 1
n0 = 2
"""
    cfg = _config(tmp_path, text)
    assert main(["validate-schedule", "--config", cfg, "--horizon", "1000"]) == 0
    out = capsys.readouterr().out
    assert "custom-rational" in out
    assert "satisfied" not in out.split("(ii)")[1].split("\n")[0]


def test_validate_schedule_horizon_gate(capsys):
    assert main(["validate-schedule", "--preset", "eq75", "--horizon", "50"]) == 1
    assert "horizon" in capsys.readouterr().err


def test_compare_scheme_against_itself(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["compare", "--config", cfg, "--schemes", "new_implicit,new_implicit"]) == 0
    assert "limit distance: 0\n" in capsys.readouterr().out


def test_compare_1d_same_limit(tmp_path, capsys):
    text = LINEAR_BASE.replace("preset = halpern-mix", "preset = compare-t16").replace(
        "outer_tol = 1e-6", "outer_tol = 1e-4"
    )
    cfg = _config(tmp_path, text)
    assert main(["compare", "--config", cfg, "--schemes", "three_term,new_implicit"]) == 0
    out = capsys.readouterr().out
    distance = float(out.rsplit("limit distance: ", 1)[1])
    assert distance <= 1e-5


def test_compare_line_projection_same_limit(tmp_path, capsys):
    text = """
[problem]
kind = line-projection

[contraction]
kind = constant-point
point = 3.0, 4.0

[scheme]
name = new_implicit

[schedule]
preset = halpern-mix

[solver]
outer_tol = 1e-3
max_outer = 100000
"""
    cfg = _config(tmp_path, text)
    assert main(["compare", "--config", cfg, "--schemes", "kema,new_implicit"]) == 0
    out = capsys.readouterr().out
    distance = float(out.rsplit("limit distance: ", 1)[1])
    assert distance <= 1e-2


def test_compare_rejects_explicit_scheme(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["compare", "--config", cfg, "--schemes", "explicit,new_implicit"]) == 1
    assert "explicit" in capsys.readouterr().err


def test_compare_needs_two_schemes(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["compare", "--config", cfg, "--schemes", "kema"]) == 1
    assert main(["compare", "--config", cfg, "--schemes", "kema,kema,kema"]) == 1


def test_compare_unknown_scheme(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["compare", "--config", cfg, "--schemes", "kema,warp"]) == 1
    assert "unknown scheme" in capsys.readouterr().err


def test_compare_non_convergence_exits_2(tmp_path, capsys):
    # summable operator weights stall the plane-projection runs off the
    # fixed set, so the comparison must refuse to report a distance
    text = """
[problem]
kind = line-projection

[contraction]
kind = constant-point
point = 3.0, 4.0

[scheme]
name = new_implicit

[schedule]
preset = compare-t16

[solver]
outer_tol = 1e-4
max_outer = 2000
"""
    cfg = _config(tmp_path, text)
    assert main(["compare", "--config", cfg, "--schemes", "kema,new_implicit"]) == 2
    captured = capsys.readouterr()
    assert "did not converge" in captured.err
    assert "limit distance" not in captured.out


def test_fredholm_zero_kernel(tmp_path, capsys):
    text = """
[problem]
kind = fredholm
kernel = zero
grid_size = 8

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix
"""
    cfg = _config(tmp_path, text)
    assert main(["fredholm", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "sup error vs closed form: 0" in out
    # solution table equals the source term t on the grid
    lines = out.splitlines()
    start = lines.index("t,x") + 1
    for line in lines[start : start + 9]:
        t, x = (float(v) for v in line.split(","))
        assert x == t


def test_fredholm_separable_writes_csv(tmp_path, capsys):
    text = """
[problem]
kind = fredholm
kernel = separable-linear
grid_size = 32

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix

[solver]
outer_tol = 1e-8
"""
    cfg = _config(tmp_path, text)
    out_path = tmp_path / "solution.csv"
    assert main(["fredholm", "--config", cfg, "--out", str(out_path)]) == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,x"
    data = np.array([[float(v) for v in line.split(",")] for line in lines[1:]])
    assert data.shape == (33, 2)
    # closed form 6t/5 up to quadrature error O(h^2)
    assert np.max(np.abs(data[:, 1] - 1.2 * data[:, 0])) <= 1e-3
    sup = float(capsys.readouterr().out.split("sup error vs closed form: ")[1].split("\n")[0])
    assert sup <= 1e-3


def test_fredholm_sine_matches_picard_oracle(tmp_path, capsys):
    text = """
[problem]
kind = fredholm
kernel = sine
grid_size = 128

[scheme]
name = mann_implicit

[schedule]
preset = halpern-mix

[solver]
outer_tol = 1e-10
"""
    cfg = _config(tmp_path, text)
    assert main(["fredholm", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert "termination: converged" in out
    lines = out.splitlines()
    start = lines.index("t,x") + 1
    data = np.array([[float(v) for v in line.split(",")] for line in lines[start : start + 129]])
    # independent Picard oracle on the same grid: x = g + sum_j w_j sin(x_j)/2,
    # a 1/2-contraction, iterated to well below the comparison tolerance
    nodes = np.linspace(0.0, 1.0, 129)
    w = np.full(129, 1.0 / 128.0)
    w[0] = w[-1] = 0.5 / 128.0
    v = nodes.copy()
    for _ in range(200):
        v_next = nodes + np.sum(w * 0.5 * np.sin(v))
        if np.max(np.abs(v_next - v)) <= 1e-14:
            v = v_next
            break
        v = v_next
    assert np.max(np.abs(data[:, 1] - v)) <= 1e-8


def test_fredholm_command_needs_fredholm_problem(tmp_path, capsys):
    cfg = _config(tmp_path, LINEAR_BASE)
    assert main(["fredholm", "--config", cfg]) == 1
    assert "fredholm" in capsys.readouterr().err


def test_console_script_end_to_end(tmp_path):
    cfg = _config(tmp_path, LINEAR_BASE)
    result = subprocess.run(
        ["viscofix", "solve", "--config", cfg], capture_output=True, text=True
    )
    assert result.returncode == 0
    assert "termination: converged" in result.stdout
