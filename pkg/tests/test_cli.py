"""Command-line interface: outputs, formats, exit codes, reproducibility."""

import csv
import json
import subprocess
import sys

import pytest

from zhkvortex.cli import main

HEX = "0.5,0.8660254037844386"


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _run(tmp_path, name, *argv):
    out = tmp_path / name
    rc = main(list(argv) + ["--out", str(out)])
    return rc, out


def test_beta_scan_single_shape(tmp_path, capsys):
    rc, out = _run(tmp_path, "b1", "beta-scan", "--tau", "0,1")
    assert rc == 0
    assert "beta-scan" in capsys.readouterr().out
    header, rows = _read_csv(out / "beta_scan.csv")
    assert header == ["tau_re", "tau_im", "beta", "grid_N", "residual"]
    assert len(rows) == 1
    assert abs(float(rows[0][2]) - 1.1803405990) < 1e-8
    assert float(rows[0][4]) <= 1e-8
    assert (out / "beta_scan.png").exists()
    assert (out / "resolved_config.json").exists()


def test_beta_scan_grid_is_sorted(tmp_path):
    rc, out = _run(tmp_path, "b9", "beta-scan", "--tau-grid=-0.2:0.2:3,0.9:1.1:3")
    assert rc == 0
    _, rows = _read_csv(out / "beta_scan.csv")
    assert len(rows) == 9
    keys = [(float(r[1]), float(r[0])) for r in rows]
    assert keys == sorted(keys)


def test_beta_scan_reruns_are_byte_identical(tmp_path):
    _, out1 = _run(tmp_path, "r1", "beta-scan", "--tau", "0.3,1.1")
    _, out2 = _run(tmp_path, "r2", "beta-scan", "--tau", "0.3,1.1")
    assert (out1 / "beta_scan.csv").read_bytes() == (out2 / "beta_scan.csv").read_bytes()
    assert (out1 / "resolved_config.json").read_bytes() == (out2 / "resolved_config.json").read_bytes()


def test_branch_subcommand(tmp_path):
    rc, out = _run(tmp_path, "br", "branch", "--tau", "0,1", "--s", "0.02:0.04:2")
    assert rc == 0
    header, rows = _read_csv(out / "branch.csv")
    assert header == ["s", "b_s", "theta_s", "residual", "divJ_norm", "energy"]
    assert len(rows) == 2
    for r in rows:
        assert float(r[3]) <= 1e-10
        assert 0.9 < float(r[1]) < 1.0  # b_s dips below chi = 1
    cfg = json.loads((out / "resolved_config.json").read_text())
    assert cfg["M_max"] == 60  # sized from the largest amplitude
    assert (out / "branch.png").exists()


def test_branch_verify_columns(tmp_path, capsys):
    rc, out = _run(tmp_path, "bv", "branch", "--s", "0.02,0.04", "--verify")
    assert rc == 0
    assert "s-doubling ratios" in capsys.readouterr().out
    header, rows = _read_csv(out / "branch.csv")
    assert header[-5:] == ["dpsi", "dalpha", "da0", "dtheta", "db"]
    assert all(r[-1] != "" for r in rows)


def test_branch_at_applied_field(tmp_path):
    rc, out = _run(tmp_path, "bb", "branch", "--b", "0.99")
    assert rc == 0
    _, rows = _read_csv(out / "branch.csv")
    assert len(rows) == 1
    assert abs(float(rows[0][1]) - 0.99) < 1e-9


def test_branch_rejects_wrong_field_side(tmp_path, capsys):
    rc, _ = _run(tmp_path, "bx", "branch", "--b", "1.05")
    assert rc == 2
    assert "sign(chi - b)" in capsys.readouterr().err


def test_branch_self_dual_gate(tmp_path, capsys):
    rc, _ = _run(tmp_path, "sd0", "branch", "--g", "1")
    assert rc == 2
    assert "--self-dual" in capsys.readouterr().err
    rc, out = _run(tmp_path, "sd1", "branch", "--g", "1", "--self-dual",
                   "--s", "0.02:0.02:1")
    assert rc == 0
    _, rows = _read_csv(out / "branch.csv")
    assert abs(float(rows[0][1]) - 1.0) < 1e-5  # b' = 0 at g = 1


def test_verify_quick(tmp_path, capsys):
    rc, out = _run(tmp_path, "vq", "verify", "--quick")
    assert rc == 0
    text = capsys.readouterr().out
    assert "[PASS]" in text and "checks passed" in text
    report = json.loads((out / "verify_report.json").read_text())
    assert report and all(r["ok"] for r in report)


def test_verify_detects_corrupted_cocycle(tmp_path, capsys):
    rc, out = _run(tmp_path, "vc", "verify", "--quick", "--corrupt-cocycle")
    assert rc == 1
    assert "cocycle" in capsys.readouterr().err
    report = json.loads((out / "verify_report.json").read_text())
    bad = [r["name"] for r in report if not r["ok"]]
    assert bad == ["cocycle"]


def test_landscape_asymptotic_mode(tmp_path):
    rc, out = _run(tmp_path, "ls", "energy-landscape",
                   "--re-range=0:0.5:6", "--im-range=0.8:0.95:4", "--mu", "0.01")
    assert rc == 0
    header, rows = _read_csv(out / "landscape.csv")
    assert header == ["tau_re", "tau_im", "beta", "E_asymp", "E_direct", "mu", "status"]
    assert len(rows) == 24
    assert all(r[4] == "" for r in rows)  # no direct energies without spots
    arg = json.loads((out / "argmin.json").read_text())
    am = arg["argmin"]
    assert am["tau_re"] == 0.5 and 0.8 <= am["tau_im"] <= 0.9
    eigs = sorted(arg["hessian_square"]["eigs"])
    assert eigs[0] < 0.0 < eigs[1]
    assert (out / "landscape.png").exists()


def test_landscape_spot_check(tmp_path):
    rc, out = _run(tmp_path, "sp", "energy-landscape",
                   "--re-range=0.4:0.5:2", "--im-range=0.85:0.9:2",
                   "--mu", "0.01", "--spots", HEX)
    assert rc == 0
    _, rows = _read_csv(out / "landscape.csv")
    spot = [r for r in rows if r[6] == "spot"]
    assert len(spot) == 1
    e_dir, e_asym = float(spot[0][4]), float(spot[0][3])
    assert abs(e_dir - e_asym) < 1e-6


def test_branch_config_round_trip(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"tau": [0.0, 1.0], "s": [0.02], "chi": 1.0, "g": 2.0}))
    rc1, out1 = _run(tmp_path, "c1", "branch", "--config", str(cfg))
    assert rc1 == 0
    rc2, out2 = _run(tmp_path, "c2", "branch", "--config",
                     str(out1 / "resolved_config.json"))
    assert rc2 == 0
    assert (out1 / "branch.csv").read_bytes() == (out2 / "branch.csv").read_bytes()


def test_unwritable_output_exits_3(tmp_path, capsys):
    blocker = tmp_path / "file.txt"
    blocker.write_text("x")
    rc = main(["beta-scan", "--tau", "0,1", "--out", str(blocker / "sub")])
    assert rc == 3
    assert "io error" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    out = tmp_path / "m"
    proc = subprocess.run(
        [sys.executable, "-m", "zhkvortex.cli", "beta-scan", "--tau", "0,1",
         "--out", str(out)],
        capture_output=True, text=True, timeout=300,
    )
    assert proc.returncode == 0
    assert (out / "beta_scan.csv").exists()
