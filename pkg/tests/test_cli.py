import json
import os
import subprocess
import sys

import numpy as np
import pytest

from cylspectra import cli

BASE = {
    "family": {"kind": "identity"},
    "p": 2.0,
    "resolution": {"nx2": 16, "cells_per_unit": 4},
}


def write_config(tmp_path, name="cfg.json", **extra):
    cfg = dict(BASE)
    cfg.update(extra)
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "cylspectra.cli", *args],
        capture_output=True, text=True)


def test_missing_config_exits_2(tmp_path):
    r = run_cli("solve", "--config", str(tmp_path / "nope.json"))
    assert r.returncode == 2
    assert not list(tmp_path.iterdir())


def test_unknown_key_exits_2(tmp_path):
    path = write_config(tmp_path, ell=2.0, bogus=1,
                        output_dir=str(tmp_path / "runs"))
    r = run_cli("solve", "--config", path)
    assert r.returncode == 2
    assert "bogus" in r.stderr
    assert not (tmp_path / "runs").exists()  # validated before any output


def test_wrong_experiment_name_rejected(tmp_path):
    path = write_config(tmp_path, experiment="sweep", ell=2.0,
                        output_dir=str(tmp_path / "runs"))
    r = run_cli("solve", "--config", path)
    assert r.returncode == 2


def test_solve_writes_artifacts(tmp_path):
    path = write_config(tmp_path, experiment="solve", ell=2.0,
                        shape="full", bc="mixed",
                        output_dir=str(tmp_path / "runs"))
    code = cli.main(["solve", "--config", path])
    assert code == 0
    runs = list((tmp_path / "runs").iterdir())
    assert len(runs) == 1
    payload = json.loads((runs[0] / "solve.json").read_text())
    assert payload["converged"] is True
    assert payload["residual"] < 1e-6
    assert payload["lambda"] == pytest.approx(np.pi ** 2, rel=5e-3)
    manifest = json.loads((runs[0] / "manifest.json").read_text())
    for name in manifest["outputs"]:
        assert (runs[0] / name).exists()


def test_cross_section_solve(tmp_path):
    path = write_config(tmp_path, experiment="solve", shape="cross_section",
                        bc="dirichlet", output_dir=str(tmp_path / "runs"))
    assert cli.main(["solve", "--config", path]) == 0
    runs = list((tmp_path / "runs").iterdir())
    payload = json.loads((runs[0] / "solve.json").read_text())
    assert payload["lambda"] == pytest.approx(np.pi ** 2, rel=5e-3)


def test_sweep_schema_and_determinism(tmp_path):
    path = write_config(
        tmp_path, experiment="sweep",
        family={"kind": "constant_offdiag", "c": 0.3},
        ells=[2, 3], output_dir=str(tmp_path / "runs"))
    assert cli.main(["sweep", "--config", path]) == 0
    assert cli.main(["sweep", "--config", path]) == 0
    runs = sorted((tmp_path / "runs").iterdir())
    assert len(runs) == 2
    first = (runs[0] / "sweep.csv").read_bytes()
    second = (runs[1] / "sweep.csv").read_bytes()
    assert first == second
    header = first.decode().splitlines()[0]
    assert header == cli.SWEEP_HEADER
    # 17-significant-digit round trip
    row = first.decode().splitlines()[1].split(",")
    lam = float(row[3])
    assert format(lam, ".17g") == row[3]


def test_threads_flag_and_env(tmp_path, monkeypatch):
    path = write_config(tmp_path, experiment="solve", ell=1.0,
                        output_dir=str(tmp_path / "runs"))
    assert cli.main(["solve", "--config", path, "--threads", "2"]) == 0
    monkeypatch.setenv("CYLSPECTRA_THREADS", "4")
    assert cli.main(["solve", "--config", path]) == 0
    monkeypatch.setenv("CYLSPECTRA_THREADS", "nope")
    assert cli.main(["solve", "--config", path]) == 2
    runs = sorted((tmp_path / "runs").iterdir())
    manifests = [json.loads((r / "manifest.json").read_text()) for r in runs]
    assert manifests[0]["threads"] == 2
    assert manifests[1]["threads"] == 4
    a = json.loads((runs[0] / "solve.json").read_text())
    b = json.loads((runs[1] / "solve.json").read_text())
    assert a["lambda"] == b["lambda"]  # thread count never changes values


def test_ladder_outputs(tmp_path):
    path = write_config(
        tmp_path, experiment="ladder",
        family={"kind": "constant_offdiag", "c": 0.3},
        ells=[2, 3, 4], side="plus", output_dir=str(tmp_path / "runs"))
    assert cli.main(["ladder", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    lines = (run / "ladder.csv").read_text().splitlines()
    assert lines[0] == "ell,lambda_tilde,monotone_ok"
    assert len(lines) == 4
    vals = [float(l.split(",")[1]) for l in lines[1:]]
    assert vals == sorted(vals, reverse=True)
    est = json.loads((run / "nu_estimate.json").read_text())
    assert est["monotone_ok"] is True
    assert est["extrapolated"] <= est["last_value"] + 1e-12


def test_spectrum_outputs(tmp_path):
    path = write_config(tmp_path, experiment="spectrum", ell=2.0, k=3,
                        output_dir=str(tmp_path / "runs"))
    assert cli.main(["spectrum", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    lines = (run / "spectrum.csv").read_text().splitlines()
    assert lines[0] == "k,lambda,iterations,residual,converged"
    lams = [float(l.split(",")[1]) for l in lines[1:]]
    oracle = [np.pi ** 2 + (k * np.pi / 4) ** 2 for k in range(3)]
    assert np.allclose(lams, oracle, rtol=2e-2)


def test_gap_check_outputs(tmp_path):
    path = write_config(
        tmp_path, experiment="gap_check",
        family={"kind": "linear_offdiag", "c": 0.8},
        eps=[0.1], output_dir=str(tmp_path / "runs"))
    assert cli.main(["gap-check", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    payload = json.loads((run / "gapcheck.json").read_text())
    assert payload["a12_gradw_vanishes"] is False
    assert payload["gap_integral"] == pytest.approx(-0.4, rel=1e-6)
    assert payload["symmetry_S"] is False
    assert payload["exp_test"][0]["value"] > payload["mu1"]


def test_decay_outputs(tmp_path):
    path = write_config(
        tmp_path, experiment="decay",
        family={"kind": "linear_offdiag", "c": 0.8},
        ell=6.0, window=[1, 4], output_dir=str(tmp_path / "runs"))
    assert cli.main(["decay", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    fit = json.loads((run / "decay.json").read_text())
    assert 0.0 < fit["alpha_hat"] < 1.0
    lines = (run / "decay.csv").read_text().splitlines()
    assert lines[0] == "slab,grad_energy,p_mass,a_energy"
    assert len(lines) == 13  # 12 slabs


def test_beta2_outputs(tmp_path):
    path = write_config(
        tmp_path, experiment="beta2",
        family={"kind": "constant_offdiag", "c": 0.3},
        ells=[2, 3], output_dir=str(tmp_path / "runs"))
    assert cli.main(["beta2", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    lines = (run / "beta2.csv").read_text().splitlines()
    assert lines[0] == "ell,beta2_upper,lambda_half_plus,lambda_half_minus"
    assert len(lines) == 3


def test_report_empty_and_full(tmp_path):
    # empty manifest list
    cfg = {"experiment": "report", "manifests": [],
           "output_dir": str(tmp_path / "runs")}
    path = tmp_path / "report.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["report", "--config", str(path)]) == 0
    run = next((tmp_path / "runs").iterdir())
    assert "(no sections)" in (run / "report.txt").read_text()

    # sweep + report, with one absent manifest listed
    sweep_cfg = write_config(
        tmp_path, "sweep.json", experiment="sweep",
        family={"kind": "identity"}, ells=[2, 3],
        output_dir=str(tmp_path / "sweeps"))
    assert cli.main(["sweep", "--config", sweep_cfg]) == 0
    sweep_run = next((tmp_path / "sweeps").iterdir())
    cfg2 = {"experiment": "report",
            "manifests": [str(sweep_run), str(tmp_path / "missing")],
            "output_dir": str(tmp_path / "runs2")}
    path2 = tmp_path / "report2.json"
    path2.write_text(json.dumps(cfg2))
    assert cli.main(["report", "--config", str(path2)]) == 0
    run2 = next((tmp_path / "runs2").iterdir())
    text = (run2 / "report.txt").read_text()
    assert "no gap detected" in text
    assert "[absent]" in text


def test_solver_options_passthrough(tmp_path):
    path = write_config(
        tmp_path, experiment="solve", ell=2.0, p=3.0,
        solver={"tol_residual": 1e-6, "max_iters": 500},
        output_dir=str(tmp_path / "runs"))
    assert cli.main(["solve", "--config", path]) == 0


def test_invalid_solver_key_rejected(tmp_path):
    path = write_config(tmp_path, experiment="solve", ell=2.0,
                        solver={"tol_residua": 1e-6},
                        output_dir=str(tmp_path / "runs"))
    assert cli.main(["solve", "--config", path]) == 2


def test_decay_window_validated_upfront(tmp_path):
    path = write_config(tmp_path, experiment="decay", ell=2.0,
                        window=[2, 10], output_dir=str(tmp_path / "runs"))
    assert cli.main(["decay", "--config", path]) == 2
    assert not (tmp_path / "runs").exists()


def test_tabulated_family_through_cli(tmp_path):
    csv_path = tmp_path / "aniso.csv"
    rows = ["x2,a11,a12,a22"] + [
        f"{x2},2.0,0.0,1.0" for x2 in (-0.5, 0.0, 0.5)]
    csv_path.write_text("\n".join(rows) + "\n")
    path = write_config(
        tmp_path, experiment="solve", shape="cross_section", bc="dirichlet",
        family={"kind": "tabulated", "csv": str(csv_path)},
        output_dir=str(tmp_path / "runs"))
    assert cli.main(["solve", "--config", path]) == 0
    run = next((tmp_path / "runs").iterdir())
    payload = json.loads((run / "solve.json").read_text())
    assert payload["lambda"] == pytest.approx(np.pi ** 2, rel=5e-3)  # a22 = 1
