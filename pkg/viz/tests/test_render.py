"""Rendering tests, including the A9 acceptance flow.

Inputs are produced by the spin1chain CLI at small scale (the external
interface the renderer consumes); schemas are identical to the full-size
acceptance outputs.
"""

import json
import os
import subprocess
import sys
import time

import pytest

from chainviz import FigureSpec, SchemaError, render


def run_cli(cfg, out_dir):
    cfg_path = os.path.join(out_dir, "config.json")
    with open(cfg_path, "w") as fh:
        json.dump(cfg, fh)
    proc = subprocess.run(
        [sys.executable, "-m", "spin1chain.cli", "--config", cfg_path, "--out", out_dir,
         "--threads", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return out_dir


@pytest.fixture(scope="session")
def cli_outputs(tmp_path_factory):
    """Small-scale gs / sweep / rabi / scan outputs with the v1 schemas."""
    root = tmp_path_factory.mktemp("cli")
    outs = {}
    gs_dir = str(root / "gs")
    os.makedirs(gs_dir)
    run_cli({"command": "gs", "model": {"variant": "experimental", "L": 6}}, gs_dir)
    outs["gs"] = os.path.join(gs_dir, "manifold.json")

    sweep_dir = str(root / "sweep")
    os.makedirs(sweep_dir)
    run_cli(
        {
            "command": "sweep",
            "model": {"variant": "experimental", "L": 4},
            "protocol": {"sweep": {"total_time": 1.0, "n_samples": 30, "k": 4}},
        },
        sweep_dir,
    )
    outs["sweep"] = os.path.join(sweep_dir, "sweep_static.csv")

    rabi_dir = str(root / "rabi")
    os.makedirs(rabi_dir)
    run_cli(
        {
            "command": "rabi",
            "model": {"variant": "experimental", "L": 4},
            "protocol": {"drive": {"rabi_frequency": 0.25, "total_time": 1.0, "n_samples": 9}},
        },
        rabi_dir,
    )
    outs["rabi"] = os.path.join(rabi_dir, "rabi.csv")

    scan_dir = str(root / "scan")
    os.makedirs(scan_dir)
    run_cli(
        {
            "command": "scan",
            "grid": {
                "d_range": [2.5, 3.5],
                "v_range": [0.0, 0.5],
                "resolution": [3, 2],
                "L": 16,
                "chi_max": 12,
                "max_sweeps": 5,
                "energy_tol": 1e-6,
            },
        },
        scan_dir,
    )
    outs["scan"] = os.path.join(scan_dir, "scan.csv")
    return outs


def test_a9_all_kinds_render(cli_outputs, tmp_path):
    t0 = time.time()
    meta_h = render(FigureSpec(cli_outputs["scan"], "heatmap", str(tmp_path / "map.png")))
    assert meta_h["n_cells"] == 6  # heatmap cell count equals grid size
    assert meta_h["grid_shape"] == [3, 2]

    meta_p = render(FigureSpec(cli_outputs["gs"], "profile", str(tmp_path / "prof.png")))
    assert meta_p["n_states"] == 4 and meta_p["n_sites"] == 6

    meta_s = render(FigureSpec(cli_outputs["sweep"], "sweep", str(tmp_path / "sweep.png")))
    assert meta_s["xscale"] == "symlog"  # Fig.5-style horizontal axis
    assert meta_s["n_samples"] == 30

    meta_t = render(
        FigureSpec(cli_outputs["rabi"], "timeseries", str(tmp_path / "rabi.png"))
    )
    assert meta_t["n_samples"] == 9
    assert -0.55 <= meta_t["m_edge_range"][0] <= meta_t["m_edge_range"][1] <= 0.55

    for name in ("map.png", "prof.png", "sweep.png", "rabi.png"):
        assert os.path.getsize(tmp_path / name) > 0
    print(f"ACCEPTANCE A9 PASS ({time.time() - t0:.1f} s) all four figure kinds rendered")


def test_heatmap_value_columns(cli_outputs, tmp_path):
    for value in ("string_z", "aklt_overlap", "tr_phase"):
        meta = render(
            FigureSpec(
                cli_outputs["scan"], "heatmap", str(tmp_path / f"{value}.png"),
                {"value": value},
            )
        )
        assert meta["value"] == value


def test_missing_columns_hard_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError, match="missing columns"):
        render(FigureSpec(str(bad), "heatmap", str(tmp_path / "x.png")))
    with pytest.raises(SchemaError):
        render(FigureSpec(str(tmp_path / "nope.csv"), "sweep", str(tmp_path / "x.png")))


def test_bad_kind_and_bad_json(tmp_path):
    with pytest.raises(SchemaError):
        FigureSpec("x.csv", "scatter3d", "y.png")
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    with pytest.raises(SchemaError):
        render(FigureSpec(str(bad), "profile", str(tmp_path / "x.png")))


def test_cli_entry_point(cli_outputs, tmp_path):
    out = str(tmp_path / "cli_map.png")
    proc = subprocess.run(
        [sys.executable, "-m", "chainviz.render", "--in", cli_outputs["scan"],
         "--kind", "heatmap", "--out", out, "--value", "entropy"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    meta = json.loads(proc.stdout)
    assert meta["n_cells"] == 6
    assert os.path.exists(out)
    proc2 = subprocess.run(
        [sys.executable, "-m", "chainviz.render", "--in", str(tmp_path / "missing.csv"),
         "--kind", "heatmap", "--out", out],
        capture_output=True,
        text=True,
    )
    assert proc2.returncode == 1


def test_rendering_reads_only(cli_outputs, tmp_path):
    before = open(cli_outputs["scan"], "rb").read()
    render(FigureSpec(cli_outputs["scan"], "heatmap", str(tmp_path / "again.png")))
    assert open(cli_outputs["scan"], "rb").read() == before
