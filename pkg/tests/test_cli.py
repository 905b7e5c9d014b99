"""Command-line driver: exit codes, report schemas, determinism."""

import json
import math

import pytest

from gibbskit.cli import main

BASE = """\
[model]
name = boltzmann
n_bar = 1.0

[grid]
dimension = 1
half_width = 12.0
points = 900
count = 130

[potential]
theta = 2.0

[solve]
temperature = 1.0

[sweep]
t_min = 0.5
t_max = 4.0
points = 5
spacing = log
identity_check = true

[eqf]
t1 = 1.0
t2 = 2.0

[global_min]
a0 = 1.0
b0 = 0.5
c = 3.413953413738653

[weyl]
s = 1.0
e_min = 10.0
e_max = 40.0
points = 4

[check]
seed = 7
temperature = 1.0
trials = 25
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(BASE)
    return path


def _read_summary(out_dir):
    return json.loads((out_dir / "summary.json").read_text())


def test_solve_command(config_path, tmp_path):
    out = tmp_path / "solve_out"
    assert main(["solve", "--config", str(config_path), "--out", str(out)]) == 0
    summary = _read_summary(out)
    oracle = -2.0 - math.log(1.0 - math.exp(-2.0))
    assert abs(summary["headline_values"]["mu"] - oracle) < 1e-3
    lines = (out / "solve.csv").read_text().splitlines()
    assert lines[0] == "# command=solve"
    assert lines[1].startswith("# config_hash=")
    assert lines[3] == "T,mu,energy,entropy,free_energy,rank"


def test_spectrum_command(config_path, tmp_path):
    out = tmp_path / "spec_out"
    assert main(["spectrum", "--config", str(config_path), "--out", str(out)]) == 0
    rows = [l for l in (out / "spectrum.csv").read_text().splitlines() if not l.startswith("#")]
    header, first = rows[0], rows[1]
    assert header == "j,lambda_j"
    j, lam = first.split(",")
    assert j == "0" and abs(float(lam) - 2.0) < 1e-2


def test_sweep_command_flags(config_path, tmp_path):
    out = tmp_path / "sweep_out"
    assert main(["sweep", "--config", str(config_path), "--out", str(out)]) == 0
    summary = _read_summary(out)
    head = summary["headline_values"]
    assert head["energy_strictly_increasing"] is True
    assert head["entropy_strictly_decreasing"] is True
    assert head["identity_residual"] < 1e-5
    assert head["failed_rows"] == 0


def test_eqf_command(config_path, tmp_path):
    out = tmp_path / "eqf_out"
    assert main(["eqf", "--config", str(config_path), "--out", str(out)]) == 0
    assert _read_summary(out)["headline_values"]["residual"] < 1e-5


def test_global_min_command(config_path, tmp_path):
    out = tmp_path / "gm_out"
    assert main(["global-min", "--config", str(config_path), "--out", str(out)]) == 0
    head = _read_summary(out)["headline_values"]
    assert abs(head["temperature"] - 2.0) < 2e-3
    assert abs(head["total_current"] - 0.5) < 1e-6
    assert head["admissibility_ok"] is True
    field_lines = [
        l for l in (out / "fields.csv").read_text().splitlines() if not l.startswith("#")
    ]
    assert field_lines[0] == "x,n,u,k,e"
    assert len(field_lines) == 1 + 900


def test_weyl_command(config_path, tmp_path):
    out = tmp_path / "weyl_out"
    assert main(["weyl", "--config", str(config_path), "--out", str(out)]) == 0
    head = _read_summary(out)["headline_values"]
    assert abs(head["target"] - 2.0 / (3.0 * math.pi)) < 1e-10


def test_fit_command(tmp_path):
    config = BASE.replace("name = boltzmann", "name = tsallis\nq = 2.0")
    config = config.replace("half_width = 12.0", "half_width = 20.0")
    config = config.replace("points = 900", "points = 2000")
    config = config.replace("count = 130", "count = 190")
    config += "\n[fit]\ns = 1.0\nt_min = 20.0\nt_max = 120.0\npoints = 9\n"
    path = tmp_path / "fit.ini"
    path.write_text(config)
    out = tmp_path / "fit_out"
    assert main(["fit", "--config", str(path), "--out", str(out)]) == 0
    head = _read_summary(out)["headline_values"]
    assert head["predicted_exponent"] == 0.5
    assert 0.4 < head["fitted_exponent"] < 0.6
    assert head["mu_over_t_nondecreasing"] is True


def test_check_command_passes_and_is_deterministic(config_path, tmp_path):
    out1, out2 = tmp_path / "chk1", tmp_path / "chk2"
    assert main(["check", "--config", str(config_path), "--out", str(out1)]) == 0
    assert main(["check", "--config", str(config_path), "--out", str(out2)]) == 0
    assert (out1 / "check.csv").read_bytes() == (out2 / "check.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text(BASE + "\n[model]\n")  # duplicate section
    assert main(["solve", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    path.write_text(BASE.replace("theta = 2.0", "theta = 2.0\nwhatever = 1"))
    assert main(["solve", "--config", str(path), "--out", str(tmp_path / "o")]) == 2


def test_missing_config_file(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "nope.ini"), "--out", str(tmp_path / "o")]) == 2


def test_bad_model_name(config_path, tmp_path):
    text = config_path.read_text().replace("name = boltzmann", "name = nonsense")
    bad = tmp_path / "bad_model.ini"
    bad.write_text(text)
    assert main(["solve", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_infeasible_global_min_exits_2(config_path, tmp_path):
    text = config_path.read_text().replace("c = 3.413953413738653", "c = 0.5")
    bad = tmp_path / "infeasible.ini"
    bad.write_text(text)
    assert main(["global-min", "--config", str(bad), "--out", str(tmp_path / "o")]) == 2


def test_solver_failure_exits_3(config_path, tmp_path):
    # temperature far beyond what the small trusted spectrum certifies
    text = config_path.read_text().replace("temperature = 1.0", "temperature = 40.0")
    hot = tmp_path / "hot.ini"
    hot.write_text(text)
    assert main(["solve", "--config", str(hot), "--out", str(tmp_path / "o")]) == 3


def test_default_config_runs(tmp_path):
    assert main(["check", "--out", str(tmp_path / "default_out")]) == 0
