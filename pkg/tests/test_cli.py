import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from cscoherent.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, EXIT_QUASI, EXIT_UNSTABLE, main

CORPUS = Path(__file__).parent.parent / "scenarios"

SQUEEZED_A2 = {
    "model": {"variant": "A", "N": 2, "lambda": 1},
    "schedule": {"M": "1", "w2": "1", "tau": "pi"},
    "trajectory": {"mode": "explicit", "u0": 1, "udot0": 0, "v0": 0, "vdot0": 2},
    "quantum": {"m": 1, "n": 0},
    "quadrature": {"points_per_dim": 40},
    "suites": ["schrodinger", "unitary", "floquet"],
}


def write(tmp_path, doc, name="scn.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def run(command, scenario, out, *extra):
    return main([command, "--scenario", scenario, "--out", str(out), *extra])


def test_classical_outputs(tmp_path):
    out = tmp_path / "o"
    assert run("classical", write(tmp_path, SQUEEZED_A2), out) == EXIT_OK
    mono = json.loads((out / "monodromy.json").read_text())
    assert mono["stable"] and mono["trace"] == pytest.approx(-2.0, abs=1e-10)
    assert mono["det"] == pytest.approx(1.0, abs=1e-12)
    assert mono["tau_prime"] == pytest.approx(math.pi)
    assert mono["omega"] == pytest.approx(2.0)
    rows = list(csv.DictReader(open(out / "trajectory.csv")))
    assert float(rows[-1]["t"]) == pytest.approx(math.pi)
    assert "timestamp" in json.loads((out / "metadata.json").read_text())


def test_classical_floquet_stable(tmp_path):
    out = tmp_path / "o"
    assert run("classical", str(CORPUS / "floquet_stable.json"), out) == EXIT_OK
    assert json.loads((out / "monodromy.json").read_text())["rho_periodicity_defect"] < 1e-8


def test_classical_unstable_exit_code(tmp_path):
    out = tmp_path / "o"
    assert run("classical", str(CORPUS / "floquet_unstable.json"), out) == EXIT_UNSTABLE
    assert not json.loads((out / "monodromy.json").read_text())["stable"]
    assert run("validate", str(CORPUS / "floquet_unstable.json"), tmp_path / "v") == EXIT_UNSTABLE


def test_validate_report(tmp_path):
    out = tmp_path / "o"
    assert run("validate", write(tmp_path, SQUEEZED_A2), out) == EXIT_OK
    rows = json.loads((out / "validation.json").read_text())
    assert {r["suite"] for r in rows} == {"schrodinger", "unitary", "floquet"}
    assert all(set(r) == {"suite", "case", "metric", "value", "tolerance", "pass"} for r in rows)


def test_validate_failure_exit_code(tmp_path):
    doc = {
        "model": {"variant": "W", "N": 3, "lambda": 1, "alpha": 1},
        "schedule": {"M": "1", "w2": "1", "tau": "pi"},
        "trajectory": {"mode": "explicit", "u0": 1, "udot0": 0, "v0": 0, "vdot0": 2},
        "quantum": {"level": 0}, "suites": ["eq36"], "phase": {"eq36_form": "printed"},
    }
    assert run("validate", write(tmp_path, doc), tmp_path / "o") == EXIT_FAIL


def test_config_errors(tmp_path):
    bad = dict(SQUEEZED_A2, mdoel={})
    assert run("validate", write(tmp_path, bad), tmp_path / "o") == EXIT_CONFIG
    assert run("validate", str(tmp_path / "missing.json"), tmp_path / "o") == EXIT_CONFIG
    assert run("classical", write(tmp_path, SQUEEZED_A2), tmp_path / "o", "--seed", "-3") == EXIT_CONFIG
    assert run("sweep", write(tmp_path, SQUEEZED_A2), tmp_path / "o") == EXIT_CONFIG


def test_phase_command(tmp_path):
    out = tmp_path / "o"
    assert run("phase", write(tmp_path, SQUEEZED_A2), out, "--threads", "2") == EXIT_OK
    rep = json.loads((out / "phase_report.json").read_text())
    assert rep["gamma_closed"] == pytest.approx(3 * math.pi / 4, rel=1e-8)
    assert rep["disc_gamma"] < 1e-4 and rep["disc_routes"] < 1e-5
    assert {"scenario", "tolerances"} <= set(rep)
    with open(out / "phase_nodes.csv") as fh:
        header = fh.readline().strip()
        assert header == "t,H_exp_re,H_exp_im,overlap_dt_im"
        assert len(fh.readlines()) == 65


def test_phase_stationary(tmp_path):
    out = tmp_path / "o"
    doc = dict(SQUEEZED_A2, schedule={"M": "1", "w2": "1", "tau": "2*pi"},
               trajectory={"mode": "explicit", "u0": 1, "udot0": 0, "v0": 0, "vdot0": 1})
    assert run("phase", write(tmp_path, doc), out) == EXIT_OK
    rep = json.loads((out / "phase_report.json").read_text())
    assert abs(rep["gamma_numeric"]) < 1e-6 and rep["gamma_closed"] == 0.0


def test_quasi_periodicity_exit_code(tmp_path):
    doc = dict(SQUEEZED_A2, schedule={"M": "1", "w2": "2", "tau": "2*pi"},
               trajectory={"mode": "explicit", "u0": 1, "udot0": 0, "v0": 0, "vdot0": 1})
    assert run("phase", write(tmp_path, doc), tmp_path / "o") == EXIT_QUASI


def test_sweeps(tmp_path):
    out = tmp_path / "o"
    assert run("sweep", str(CORPUS / "sweep_labels.json"), out) == EXIT_OK
    rows = list(csv.DictReader(open(out / "sweep.csv")))
    ratios = [float(r["gamma"]) / float(r["E"]) for r in rows]
    assert max(ratios) - min(ratios) < 1e-9
    empty = dict(SQUEEZED_A2, sweep={"parameter": "lambda", "values": []})
    assert run("sweep", write(tmp_path, empty), out) == EXIT_OK
    assert (out / "sweep.csv").read_text() == "parameter,gamma,chi,E\n"


def test_sweep_failure_rows(tmp_path):
    out = tmp_path / "o"
    doc = dict(SQUEEZED_A2, sweep={"parameter": "lambda", "values": [1.0, 0.2, 2.0]})
    assert run("sweep", write(tmp_path, doc), out) == EXIT_FAIL
    rows = list(csv.DictReader(open(out / "sweep.csv")))
    assert [r["gamma"] for r in rows][1] == "nan"
    assert float(rows[2]["E"]) == pytest.approx(4.0)


def _outputs(out):
    return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.name != "metadata.json"}


@pytest.mark.parametrize("command", ["classical", "validate", "phase", "sweep"])
def test_byte_determinism(tmp_path, command):
    doc = dict(SQUEEZED_A2, suites=["orthogonality"], quadrature={"points_per_dim": 32, "samples": 40000},
               sweep={"parameter": "v_amplitude", "values": [1, 2]})
    scn = write(tmp_path, doc)
    a, b = tmp_path / "a", tmp_path / "b"
    run(command, scn, a, "--seed", "11")
    run(command, scn, b, "--seed", "11", "--threads", "3")
    assert _outputs(a) == _outputs(b) and _outputs(a)


def test_seed_override_changes_monte_carlo(tmp_path):
    doc = dict(SQUEEZED_A2, suites=["orthogonality"], quadrature={"points_per_dim": 32, "samples": 40000})
    scn = write(tmp_path, doc)
    run("validate", scn, tmp_path / "a", "--seed", "1")
    run("validate", scn, tmp_path / "b", "--seed", "2")
    assert (tmp_path / "a" / "validation.json").read_bytes() != (tmp_path / "b" / "validation.json").read_bytes()


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "cscoherent", "classical", "--scenario",
                          write(tmp_path, SQUEEZED_A2), "--out", str(tmp_path / "o")], capture_output=True)
    assert res.returncode == 0
