import csv
import io
import json
import os

import numpy as np
import pytest

from spin1chain.cli import (
    SCAN_COLUMNS,
    ValidationError,
    fingerprint,
    load_config,
    main,
)


def write_config(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        lines = [l for l in fh if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("".join(lines))))


def header_lines(path):
    with open(path) as fh:
        return [l.strip() for l in fh if l.startswith("#")]


GS_CFG = {
    "command": "gs",
    "model": {"variant": "experimental", "L": 6},
}

SSH_CFG = {
    "command": "ssh-check",
    "model": {
        "variant": "ssh",
        "cells": 4,
        "J_intra": 0.1,
        "J_inter": 1.0,
        "boundary": "periodic",
    },
    "protocol": {"ssh_check": {"n_points": 30}},
}


def test_fingerprint_canonicalization():
    a = fingerprint({"x": 1, "y": [1, 2]})
    b = fingerprint({"y": [1, 2], "x": 1})
    assert a == b and len(a) == 16
    assert fingerprint({"x": 2}) != a


def test_config_unknown_keys_rejected(tmp_path):
    path = write_config(tmp_path, {"command": "gs", "bogus": 1})
    with pytest.raises(ValidationError, match="bogus"):
        load_config(path)
    path = write_config(tmp_path, {"command": "gs", "model": {"variant": "ideal", "nope": 2}})
    with pytest.raises(ValidationError):
        load_config(path)


def test_config_bad_values(tmp_path):
    path = write_config(tmp_path, {"command": "fly"})
    with pytest.raises(ValidationError):
        load_config(path)
    bad = tmp_path / "broken.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError):
        load_config(str(bad))


def test_main_requires_command(tmp_path):
    cfg = write_config(tmp_path, {"model": {"variant": "experimental", "L": 4}})
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_main_command_conflict(tmp_path):
    cfg = write_config(tmp_path, GS_CFG)
    assert main(["rabi", "--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_gs_outputs_and_determinism(tmp_path):
    cfg = write_config(tmp_path, GS_CFG)
    out1, out2 = str(tmp_path / "run1"), str(tmp_path / "run2")
    assert main(["--config", cfg, "--out", out1]) == 0
    assert main(["gs", "--config", cfg, "--out", out2]) == 0
    with open(os.path.join(out1, "manifold.json")) as fh:
        rep = json.load(fh)
    assert rep["fingerprint"] == fingerprint(json.loads(open(cfg).read()) | {"command": "gs", "seed": 0})
    labels = sorted(round(s["m_tot"]) for s in rep["states"])
    assert labels == [-1, 0, 0, 1]
    rows = read_csv(os.path.join(out1, "magnetization.csv"))
    assert len(rows) == 6
    assert set(rows[0]) == {"site", "sz_m-1", "sz_m+0a", "sz_m+0b", "sz_m+1"}
    b1 = open(os.path.join(out1, "magnetization.csv"), "rb").read()
    b2 = open(os.path.join(out2, "magnetization.csv"), "rb").read()
    assert b1 == b2  # bitwise reproducible
    assert any("fingerprint" in h for h in header_lines(os.path.join(out1, "magnetization.csv")))


def test_ssh_check_cli(tmp_path):
    cfg = write_config(tmp_path, SSH_CFG)
    out = str(tmp_path / "out")
    assert main(["--config", cfg, "--out", out]) == 0
    with open(os.path.join(out, "ssh_check.json")) as fh:
        rep = json.load(fh)
    assert rep["min_gap_homogeneous"] <= 0.01
    assert rep["min_gap_staggered"] >= 0.1
    rows = read_csv(os.path.join(out, "ssh_check.csv"))
    kinds = {r["kind"] for r in rows}
    assert kinds == {"homogeneous", "staggered"}


def test_sweep_cli_small(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "command": "sweep",
            "model": {"variant": "experimental", "L": 4},
            "protocol": {"sweep": {"total_time": 1.0, "n_samples": 25, "k": 4}},
        },
    )
    out = str(tmp_path / "out")
    assert main(["--config", cfg, "--out", out]) == 0
    with open(os.path.join(out, "sweep_result.json")) as fh:
        rep = json.load(fh)
    assert rep["dynamic"]["m_conservation_drift"] <= 1e-8
    assert rep["static"]["min_gap_to_rest"] > 0
    rows = read_csv(os.path.join(out, "sweep_static.csv"))
    assert len(rows) == 25
    assert "overlap_aklt_ud" in rows[0]
    dyn_rows = read_csv(os.path.join(out, "sweep_dynamic.csv"))
    assert list(dyn_rows[0]) == ["t_us", "mu_hMHz", "overlap_target", "m_tot"]


def test_sweep_cli_zero_length_rejected(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "command": "sweep",
            "model": {"variant": "experimental", "L": 4},
            "protocol": {"sweep": {"total_time": 0.0}},
        },
    )
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_rabi_cli_small(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "command": "rabi",
            "model": {"variant": "experimental", "L": 4},
            "protocol": {"drive": {"rabi_frequency": 0.25, "total_time": 0.5, "n_samples": 6}},
        },
    )
    out = str(tmp_path / "out")
    assert main(["--config", cfg, "--out", out]) == 0
    rows = read_csv(os.path.join(out, "rabi.csv"))
    assert len(rows) == 6
    assert float(rows[0]["m_tot"]) == pytest.approx(-1.0, abs=1e-6)


def test_scan_cli_small_grid(tmp_path):
    cfg = write_config(
        tmp_path,
        {
            "command": "scan",
            "grid": {
                "d_range": [2.5, 3.5],
                "v_range": [0.0, 0.3],
                "resolution": [2, 2],
                "L": 20,
                "chi_max": 16,
                "max_sweeps": 6,
                "energy_tol": 1e-7,
            },
        },
    )
    out = str(tmp_path / "out")
    assert main(["--config", cfg, "--out", out, "--threads", "1"]) == 0
    rows = read_csv(os.path.join(out, "scan.csv"))
    assert len(rows) == 4
    assert list(rows[0]) == list(SCAN_COLUMNS)
    # grid order: D-major
    ds = [float(r["d"]) for r in rows]
    vs = [float(r["v"]) for r in rows]
    assert ds == [2.5, 2.5, 3.5, 3.5]
    assert vs == [0.0, 0.3, 0.0, 0.3]
    for r in rows:
        assert r["error"] == ""
        assert float(r["entropy"]) >= -1e-9
        assert int(r["tr_phase"]) == 1  # trivial large-D region
    with open(os.path.join(out, "scan_meta.json")) as fh:
        meta = json.load(fh)
    assert meta["grid"]["shape"] == [2, 2]
    assert meta["n_failed"] == 0


def test_scan_rejects_non_unit_jxy(tmp_path):
    cfg = write_config(
        tmp_path,
        {"command": "scan", "model": {"variant": "ideal", "J_xy": 2.0, "D": 0, "V": 0, "L": 8}},
    )
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_scan_rejects_empty_grid(tmp_path):
    cfg = write_config(tmp_path, {"command": "scan", "grid": {"resolution": 0}})
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 1


def test_solver_failure_exit_code(tmp_path, monkeypatch):
    import spin1chain.cli as cli
    from spin1chain.ed import ConvergenceError

    def boom(cfg, out, threads):
        raise ConvergenceError("no convergence")

    monkeypatch.setattr(cli, "cmd_gs", boom)
    cfg = write_config(tmp_path, GS_CFG)
    assert main(["--config", cfg, "--out", str(tmp_path / "o")]) == 2
