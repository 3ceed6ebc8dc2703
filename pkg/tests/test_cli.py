import csv
import json
import math
from pathlib import Path

import numpy as np
import pytest

from holomem import cli, holonomy
from holomem.holonomy import FCoefficients


def run(tmp_path, command, config=None, *extra):
    args = [command, "--out", str(tmp_path)]
    if config is not None:
        path = tmp_path / "config.yaml"
        path.write_text(config)
        args += ["--config", str(path)]
    return cli.main(args + list(extra))


def as_complex(x):
    return np.array(x)[..., 0] + 1j * np.array(x)[..., 1]


SHORT = "schedule: {kind: cycle, sweep: 1.0, max_margin: 1.0e-2}\n"


def test_holonomy_resonant(tmp_path):
    assert run(tmp_path, "holonomy", SHORT + "command: {holonomy: {sectors: [1, 2, 3]}}\n") == 0
    data = json.loads((tmp_path / "holonomy.json").read_text())
    assert data["resonant"] is True
    for sector in data["sectors"]:
        assert sector["norm_difference"] < 1e-8
        assert np.allclose(as_complex(sector["primed_diagonal"]),
                           as_complex(sector["primed_prediction"]), atol=1e-8)
    assert (tmp_path / "run_meta.json").exists()
    with open(tmp_path / "holonomy_timeseries.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:3] == ["t", "theta", "kappa"] and rows[0][-1] == "norm_K_3"
    assert len(rows) >= 202


def test_holonomy_kappa_constant(tmp_path):
    cfg = "schedule: {kind: constant, omega_1: 2.0, omega_2: 1.0, duration: 50}\n"
    assert run(tmp_path, "holonomy", cfg) == 0
    data = json.loads((tmp_path / "holonomy.json").read_text())
    for sector in data["sectors"]:
        assert np.allclose(as_complex(sector["W"]), np.eye(sector["l"] + 1), atol=1e-14)


def test_holonomy_exact_transfer(tmp_path):
    assert run(tmp_path, "holonomy", SHORT, "--mode", "exact") == 0
    data = json.loads((tmp_path / "holonomy.json").read_text())
    for sector in data["sectors"]:
        assert sector["exact_vs_integrated"] < 0.1


def test_missing_duration_exit_code(tmp_path, capsys):
    cfg = "schedule:\n  kind: constant\n  omega_1: 1.0\n  omega_2: 0.5\n"
    assert run(tmp_path, "holonomy", cfg) == 2
    assert "duration" in capsys.readouterr().err


def test_unknown_key_exit_code(tmp_path, capsys):
    assert run(tmp_path, "verify", "command: {verfy: {}}\n") == 2
    assert "verfy" in capsys.readouterr().err


def test_bad_seed(tmp_path):
    assert run(tmp_path, "protocol", None, "--seed", "-1") == 2


def test_json_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cfg = SHORT + "command: {seed: 3, protocol: {input: {kind: random, l_max: 2}, samples: 11}}\n"
    for out in (a, b):
        out.mkdir()
        assert run(out, "protocol", cfg) == 0
    for name in ("protocol.json", "protocol_adiabatic.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_protocol_adiabatic_two_pi(tmp_path):
    cfg = ("schedule: {kind: design, target_phi: 6.283185307179586}\n"
           "command: {mode: adiabatic, seed: 1, protocol: {input: {kind: random, l_max: 2}}}\n")
    assert run(tmp_path, "protocol", cfg) == 0
    data = json.loads((tmp_path / "protocol.json").read_text())
    (entry,) = data["runs"]
    assert entry["j"] == 1 and entry["deviation"] < 1e-6
    assert entry["fidelity"] == pytest.approx(1.0, abs=1e-9)
    assert entry["storage"]["photon_occupancy"] < 1e-3 * 2


def test_protocol_vacuum_both_modes(tmp_path):
    cfg = SHORT + "command: {mode: both, protocol: {input: {kind: fock, l: 0}}}\n"
    assert run(tmp_path, "protocol", cfg) == 0
    data = json.loads((tmp_path / "protocol.json").read_text())
    assert [r["fidelity"] for r in data["runs"]] == [1.0, 1.0]
    assert (tmp_path / "protocol_exact.csv").exists()


def test_protocol_precondition_exit_code(tmp_path, capsys):
    cfg = "schedule: {kind: constant, omega_1: 0.5, omega_2: 0.0, duration: 10}\n"
    assert run(tmp_path, "protocol", cfg) == 2
    assert "not cyclic" in capsys.readouterr().err


def test_verify_default_passes(tmp_path, capsys):
    assert run(tmp_path, "verify") == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("PASS") >= 10
    data = json.loads((tmp_path / "verify.json").read_text())
    assert data["passed"] is True


def test_verify_detects_corrupted_connection(tmp_path, monkeypatch, capsys):
    honest = holonomy.f_coefficients

    def flipped(p, s, t):
        f = honest(p, s, t)
        return FCoefficients(f.f_DD, -f.f_ED, -f.f_DE, f.f_EE)

    monkeypatch.setattr(holonomy, "f_coefficients", flipped)
    assert run(tmp_path, "verify", SHORT, "--suite", "connection") == 1
    assert "FAIL connection" in capsys.readouterr().out


def test_verify_finite_n(tmp_path, capsys):
    cfg = "command: {verify: {finite_n: {atoms: [3]}}}\n"
    assert run(tmp_path, "verify", cfg, "--finite-n") == 0
    checks = json.loads((tmp_path / "verify.json").read_text())["checks"]
    assert {c["suite"] for c in checks} == {"finite_n"}
    defect = next(c for c in checks if "defect" in c["name"])
    assert defect["value"] < 1e-10


def test_verify_skips_closed_form_off_resonance(tmp_path, capsys):
    cfg = "system: {delta_1: 0.05}\n" + SHORT
    assert run(tmp_path, "verify", cfg, "--suite", "closed_form") == 0
    assert "SKIP closed_form" in capsys.readouterr().out


def sweep_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_sweep_single_point(tmp_path):
    cfg = SHORT + "command: {sweep: {metric: phi, knobs: [{path: schedule.sweep, values: [0.5]}]}}\n"
    assert run(tmp_path, "sweep", cfg) == 0
    (row,) = sweep_rows(tmp_path / "sweep.csv")
    assert float(row["phi_T"]) == pytest.approx(0.5 * (1 / math.hypot(1, 0.01) - 1 / math.hypot(1, 100)))
    assert row["error"] == ""


def test_sweep_empty_grid(tmp_path, capsys):
    cfg = "command: {sweep: {knobs: [{path: system.delta_1, values: []}]}}\n"
    assert run(tmp_path, "sweep", cfg) == 2
    assert "empty" in capsys.readouterr().err
    assert run(tmp_path, "sweep", "command: {sweep: {}}\n") == 2


def test_sweep_unknown_knob(tmp_path):
    cfg = "command: {sweep: {knobs: [{path: system.nope, values: [1]}]}}\n"
    assert run(tmp_path, "sweep", cfg) == 2


def test_sweep_path_dependence(tmp_path):
    cfg = SHORT + ("command: {sweep: {metric: path_dependence, workers: 2,"
                   " knobs: [{path: system.delta_1, values: [0.0, 0.2]}]}}\n")
    assert run(tmp_path, "sweep", cfg) == 0
    rows = sweep_rows(tmp_path / "sweep.csv")
    values = [float(r["path_dependence"]) for r in rows]
    assert values[0] < 1e-7 < 1e-3 < values[1]
    # serial and parallel runs write identical files
    serial = tmp_path / "serial"
    serial.mkdir()
    assert run(serial, "sweep", cfg.replace("workers: 2", "workers: 1")) == 0
    assert (serial / "sweep.csv").read_bytes() == (tmp_path / "sweep.csv").read_bytes()


def test_sweep_ladder_is_monotone(tmp_path):
    cfg = SHORT + ("command: {sweep: {metric: deviation,"
                   " knobs: [{path: schedule.max_margin, values: [3.0e-2, 1.0e-2]}]}}\n")
    assert run(tmp_path, "sweep", cfg) == 0
    devs = [float(r["deviation"]) for r in sweep_rows(tmp_path / "sweep.csv")]
    assert devs[1] < devs[0]


def test_csv_format(tmp_path):
    path = tmp_path / "x.csv"
    cli.write_csv(path, ["a", "b"], [[0.1, 1e-20], [1 / 3, 2]])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.decode().splitlines() == ["a,b", "0.10000000000000001,9.9999999999999995e-21",
                                         "0.33333333333333331,2"]


def test_json_complex_encoding():
    data = cli.to_jsonable({"z": np.array([1 + 2j, 3.0]), "x": np.float64(0.5)})
    assert data == {"z": [[1.0, 2.0], [3.0, 0.0]], "x": 0.5}


def test_sweep_fidelity_ladder(tmp_path):
    # omega_max = 1000 g sqrt(N) pushes the photon / dark-state mismatch at t = 0 (about 1e-6)
    # below the adiabatic error, so the exact fidelity column is monotone in the margin
    cfg = ("schedule: {kind: design, target_phi: 6.283185307179586, omega_max: 1000.0}\n"
           "command: {mode: exact, protocol: {input: {kind: fock, l: 1}}, sweep: {metric: fidelity,"
           " workers: 2, knobs: [{path: schedule.max_margin, values: [3.0e-2, 1.0e-2]}]}}\n")
    assert run(tmp_path, "sweep", cfg) == 0
    rows = sweep_rows(tmp_path / "sweep.csv")
    fids = [float(r["fidelity_exact"]) for r in rows]
    assert fids[0] < fids[1] and fids[1] > 0.999
