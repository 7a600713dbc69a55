import os
import subprocess
import sys

import pytest

from repdiff import cli


def run(tmp_path, command, text=None, *flags):
    out = tmp_path / "out"
    argv = [command, "--out", str(out), *flags]
    if text is not None:
        cfg = tmp_path / "run.cfg"
        cfg.write_text(text)
        argv += ["--config", str(cfg)]
    code = cli.main(argv)
    summary = (out / "summary.txt").read_text()
    return code, out, summary


def kv(text):
    return dict(line.split(" = ", 1) for line in text.splitlines() if " = " in line)


def test_analyze_potential_newtonian(tmp_path):
    code, out, summary = run(tmp_path, "analyze-potential", "potential.kind = newtonian\n"
                                                            "potential.dimension = 3\n")
    assert code == cli.EXIT_OK
    s = kv(summary)
    for name in ("eta", "alpha", "c_w"):
        assert float(s[f"metric.{name}"]) == pytest.approx(1.0, abs=1e-3)
        assert f"metric.{name}_error" in s
    assert "tolerance.consistency" in s
    assert (out / "indices.csv").read_text().startswith("quantity,value,error")


def test_simulate_zero_data(tmp_path):
    code, out, summary = run(tmp_path, "simulate", None)
    assert code == cli.EXIT_OK
    rows = (out / "diagnostics.csv").read_text().splitlines()[1:]
    assert all(float(r.split(",")[1]) == 0.0 for r in rows)
    resolved = (out / "resolved_config.txt").read_text()
    assert "solver.dt = 0.01" in resolved and "potential.kind = newtonian" in resolved


def test_envelope_check_default_config(tmp_path):
    code, out, summary = run(tmp_path, "envelope-check", None)
    assert code == cli.EXIT_OK
    s = kv(summary)
    ratios = [float(v.split("value=")[1].split()[0]) for k, v in s.items()
              if k.endswith(".envelope")]
    assert len(ratios) == 3 and max(ratios) < 1.05
    assert len(list(out.glob("diagnostics_*.csv"))) == 3
    assert "tolerance.envelope_slack" in s


def test_strict_halves_tolerances(tmp_path):
    code, out, summary = run(tmp_path, "dichotomy", "dimension = 1\n", "--strict")
    s = kv(summary)
    assert s["strict"] == "true" and float(s["tolerance.exponent"]) == 0.025
    assert code == cli.EXIT_OK


def test_check_failure_exit_code(tmp_path):
    text = "potential.kind = morse\npotential.dimension = 2\npotential.C_A = 0\n" \
           "potential.C_R = 1\npotential.l_R = 1\ngrid.L = 8\ngrid.resolutions = 128\n" \
           "c_offsets = 1\n"
    code, _, summary = run(tmp_path, "sharpness", text)
    assert code == cli.EXIT_CHECK
    assert "FAIL" in summary


def test_config_error_exit_code(tmp_path):
    code, _, summary = run(tmp_path, "simulate", "solver.dt = fast\n")
    assert code == cli.EXIT_CONFIG
    assert "run.cfg:1" in summary
    code, _, _ = run(tmp_path, "clumping", None)
    assert code == cli.EXIT_CONFIG
    code, _, _ = run(tmp_path, "envelope-check", "potential.kind = morse\npotential.dimension = 2\n"
                     "potential.C_A = 0\npotential.C_R = 1\npotential.l_R = 1\n")
    assert code == cli.EXIT_CONFIG


def test_numerical_halt_exit_code(tmp_path):
    text = "rho0.profile = gaussian\nrho0.height = 200\nrho0.width = 0.2\nsolver.dt = 0.5\n" \
           "solver.t_end = 0.5\nsolver.max_substeps = 2\n"
    code, out, summary = run(tmp_path, "simulate", text)
    assert code == cli.EXIT_HALT
    assert "numerical-halt" in summary
    assert (out / "diagnostics.csv").exists()


def test_unused_keys_are_listed(tmp_path):
    code, _, summary = run(tmp_path, "dichotomy", "dimension = 1\ntypo_key = 3\n")
    assert code == cli.EXIT_OK
    assert "unused keys: typo_key" in summary


def test_particles_reproducible_with_seed(tmp_path):
    text = "immigration.profile = gaussian\nparticles.t_end = 0.2\nparticles.n0 = 200\n" \
           "grid.n = 64\n"
    _, out, _ = run(tmp_path, "particles", text, "--seed", "5")
    first = (out / "particles.csv").read_text()
    _, out, _ = run(tmp_path, "particles", text, "--seed", "5")
    assert (out / "particles.csv").read_text() == first
    _, out, _ = run(tmp_path, "particles", text, "--seed", "6")
    assert (out / "particles.csv").read_text() != first


def test_meanfield_threads_match_serial(tmp_path):
    text = "potential.kind = zero\ngrid.L = 8\ngrid.n = 64\nimmigration.profile = gaussian\n" \
           "particles.t_end = 0.2\nparticles.replicas = 3\nparticles.n0_ladder = 100 1000\n" \
           "solver.dt = 0.01\nparticles.dt = 0.01\n"
    _, out, _ = run(tmp_path, "meanfield", text)
    serial = (out / "meanfield.csv").read_text()
    code, out, _ = run(tmp_path, "meanfield", text, "--threads", "3")
    assert (out / "meanfield.csv").read_text() == serial
    assert code == cli.EXIT_OK


def test_module_entry_point_and_pure_backend(tmp_path):
    env = dict(os.environ, REPDIFF_PURE="1")
    res = subprocess.run([sys.executable, "-c", "import repdiff; print(repdiff.BACKEND)"],
                         capture_output=True, text=True, env=env, check=True)
    assert res.stdout.strip() == "numpy"
    res = subprocess.run([sys.executable, "-m", "repdiff", "clumping", "--out",
                          str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == cli.EXIT_CONFIG
