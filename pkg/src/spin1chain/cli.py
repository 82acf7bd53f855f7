"""Command-line front end: validated JSON configs, deterministic outputs.

Commands: scan (phase-map grid), gs (ground-manifold report), sweep
(static + dynamic preparation ramp), rabi (edge drive), ssh-check
(ramp-gap comparison).  Exit codes: 0 success, 1 validation error,
2 solver failure.

Every output file carries the fingerprint of the canonicalized config;
CSV files contain no timestamps so reruns reproduce them bitwise.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .ed import ConvergenceError
from .model import (
    BUNDLED_D,
    IdealModelParams,
    SSHParams,
    DriveSpec,
    build_terms,
    bundled_coupling_table,
    load_coupling_table,
)
from .protocols import (
    ProtocolConfigError,
    SweepSchedule,
    ground_manifold_report,
    run_rabi,
    run_sweep_dynamic,
    run_sweep_static,
    ssh_check,
)

SCAN_SCHEMA_VERSION = "scan/v1"
GS_SCHEMA_VERSION = "gs/v1"
SWEEP_STATIC_SCHEMA_VERSION = "sweep-static/v1"
SWEEP_DYNAMIC_SCHEMA_VERSION = "sweep-dynamic/v1"
RABI_SCHEMA_VERSION = "rabi/v1"
SSH_SCHEMA_VERSION = "ssh-check/v1"

SCAN_COLUMNS = (
    "d",
    "v",
    "energy",
    "converged",
    "sweeps",
    "entropy",
    "string_z",
    "string_x",
    "aklt_overlap",
    "tr_phase",
    "tr_modulus",
    "max_chi",
    "error",
)

COMMANDS = ("scan", "gs", "sweep", "rabi", "ssh-check")

_num = {"type": "number"}
_int = {"type": "integer"}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "command": {"enum": list(COMMANDS)},
        "seed": _int,
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "variant": {"enum": ["ideal", "experimental", "xxz_half", "ssh", "aklt"]},
                "L": _int,
                "J_xy": _num,
                "D": _num,
                "V": _num,
                "range_cutoff": _int,
                "lattice_spacing": _num,
                "coupling_file": {"type": "string"},
                "cells": _int,
                "J_intra": _num,
                "J_inter": _num,
                "delta": _num,
                "boundary": {"enum": ["open", "periodic"]},
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ed": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"tol": _num, "maxiter": _int},
                },
                "dmrg": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "chi_schedule": {"type": "array", "items": _int},
                        "cutoff": _num,
                        "max_sweeps": _int,
                        "energy_tol": _num,
                        "sector": {"type": ["number", "null"]},
                        "sector_weight": {"type": ["number", "null"]},
                    },
                },
            },
        },
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sweep": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "mu_max": _num,
                        "mu_max_factor": _num,
                        "total_time": _num,
                        "profile": {"enum": ["symlog", "linear"]},
                        "linear_threshold": _num,
                        "n_samples": _int,
                        "k": _int,
                        "initial_pattern": {"type": "string"},
                    },
                },
                "drive": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {
                        "rabi_frequency": _num,
                        "sites": {
                            "oneOf": [
                                {"enum": ["left_half"]},
                                {"type": "array", "items": _int},
                            ]
                        },
                        "total_time": _num,
                        "n_samples": _int,
                    },
                },
                "ssh_check": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"omega_max": _num, "n_points": _int},
                },
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "d_range": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "v_range": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                "resolution": {
                    "oneOf": [_int, {"type": "array", "items": _int, "minItems": 2, "maxItems": 2}]
                },
                "L": _int,
                "chi_max": _int,
                "chi_schedule": {"type": "array", "items": _int},
                "range_cutoff": _int,
                "string_separation": _int,
                "max_sweeps": _int,
                "energy_tol": _num,
                "cutoff": _num,
            },
        },
    },
}

DEFAULT_GRID = {
    "d_range": [-3.0, 3.0],
    "v_range": [-1.0, 3.0],
    "resolution": 11,
    "L": 48,
    "chi_max": 64,
    "range_cutoff": 5,
    "max_sweeps": 8,
    "energy_tol": 1e-8,
    "cutoff": 1e-10,
}


class ValidationError(ValueError):
    pass


def fingerprint(config: dict) -> str:
    canon = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256((canon + "|" + __version__).encode()).hexdigest()[:16]


def load_config(path) -> dict:
    import jsonschema

    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read config: {exc}") from exc
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"config invalid: {exc.message} (at {list(exc.absolute_path)})") from exc
    return cfg


def build_model(model_cfg: dict):
    """TermList plus the nearest-neighbor XY scale used for ramp defaults."""
    variant = model_cfg.get("variant")
    if variant is None:
        raise ValidationError("model.variant is required")
    if variant == "experimental":
        L = model_cfg.get("L")
        if L is None:
            raise ValidationError("experimental model needs L")
        D = model_cfg.get("D", BUNDLED_D)
        if "coupling_file" in model_cfg:
            table = load_coupling_table(model_cfg["coupling_file"], D=D)
        else:
            table = bundled_coupling_table(D=D)
        j_scale = 0.5 * (table.get(1, "J_p0") + table.get(1, "J_m0"))
        return build_terms("experimental", table, L=L), j_scale
    if variant == "ideal":
        try:
            params = IdealModelParams(
                J_xy=model_cfg["J_xy"],
                D=model_cfg["D"],
                V=model_cfg["V"],
                L=model_cfg["L"],
                range_cutoff=model_cfg.get("range_cutoff", 5),
                lattice_spacing=model_cfg.get("lattice_spacing", 1.0),
            )
        except KeyError as exc:
            raise ValidationError(f"ideal model needs {exc}") from exc
        return build_terms("ideal", params), params.J_xy
    if variant == "ssh":
        try:
            params = SSHParams(
                L=model_cfg["cells"],
                J_intra=model_cfg["J_intra"],
                J_inter=model_cfg["J_inter"],
                delta=model_cfg.get("delta", 0.0),
                boundary=model_cfg.get("boundary", "periodic"),
            )
        except KeyError as exc:
            raise ValidationError(f"ssh model needs {exc}") from exc
        return params, abs(params.J_inter)
    raise ValidationError(f"command does not support model variant {variant!r}")


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _csv_with_header(schema: str, fp: str, body: str) -> str:
    return f"# schema: {schema}\n# fingerprint: {fp}\n" + body


def _json_report(payload: dict, fp: str) -> str:
    out = {"fingerprint": fp, "version": __version__}
    out.update(payload)
    return json.dumps(out, indent=1)


# ---------------------------------------------------------------------------
# scan
# ---------------------------------------------------------------------------


@dataclass
class _ScanColumn:
    """One fixed-V column of the (D, V) grid, solved with warm starts."""

    v: float
    d_values: list
    L: int
    chi_schedule: tuple
    cutoff: float
    max_sweeps: int
    energy_tol: float
    range_cutoff: int
    string_separation: int


def _limit_blas_threads():
    try:
        from threadpoolctl import threadpool_limits

        threadpool_limits(1)
    except Exception:
        pass


def _scan_column(col: _ScanColumn) -> list[dict]:
    _limit_blas_threads()
    from .dmrg import DMRGConfig, build_mpo, dmrg_run, extract_bulk_cell
    from .mps import (
        aklt_bulk_cell,
        canonicalize,
        entanglement_report,
        measure_string,
        product_mps,
        symmetry_phase_factor,
        transfer_overlap_per_cell,
    )

    L = col.L
    sep = col.string_separation
    i0 = (L - sep) // 2
    ref_cell = aklt_bulk_cell()

    rows = []
    prev = None
    for d in col.d_values:
        row = {c: "" for c in SCAN_COLUMNS}
        row["d"], row["v"] = d, col.v
        try:
            terms = build_terms(
                "ideal", IdealModelParams(J_xy=1.0, D=d, V=col.v, L=L, range_cutoff=col.range_cutoff)
            )
            mpo = build_mpo(terms, cutoff=1e-10)
            cfg = DMRGConfig(
                chi_schedule=col.chi_schedule,
                cutoff=col.cutoff,
                max_sweeps=col.max_sweeps,
                energy_tol=col.energy_tol,
            )
            init = prev if prev is not None else product_mps(["+", "-"] * (L // 2) + ["+"] * (L % 2))
            res = dmrg_run(mpo, cfg, init)
            prev = res.mps
            row["energy"] = res.energy
            row["converged"] = int(res.converged)
            row["sweeps"] = len(res.diagnostics)
            row["max_chi"] = res.diagnostics[-1]["max_chi"]
            c = canonicalize(res.mps, L // 2 - 1)
            row["entropy"] = entanglement_report(c, L // 2).entropy
            row["string_z"] = measure_string(res.mps, "z", i0, i0 + sep)
            row["string_x"] = measure_string(res.mps, "x", i0, i0 + sep)
            try:
                cell, _resid = extract_bulk_cell(res.mps)
                row["aklt_overlap"] = transfer_overlap_per_cell(cell, ref_cell)
                tr = symmetry_phase_factor(cell)
                row["tr_phase"] = tr.phase
                row["tr_modulus"] = tr.eigenvalue_modulus
            except Exception as exc:  # diagnostics are per-point best effort
                row["error"] = f"diagnostics: {exc}"
        except Exception as exc:
            row["error"] = f"solver: {exc}"
        rows.append(row)
    return rows


def _fmt_cell(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def cmd_scan(cfg: dict, out_dir: str, threads: int) -> int:
    grid = dict(DEFAULT_GRID)
    grid.update(cfg.get("grid", {}))
    res = grid["resolution"]
    nd, nv = (res, res) if isinstance(res, int) else tuple(res)
    if nd < 1 or nv < 1:
        raise ValidationError("grid resolution must be positive")
    model = cfg.get("model", {"variant": "ideal"})
    if model.get("variant", "ideal") != "ideal":
        raise ValidationError("scan runs on the ideal model with J_xy = 1 as the energy unit")
    if model.get("J_xy", 1.0) != 1.0:
        raise ValidationError("scan fixes J_xy = 1 as the energy unit")
    d_values = list(np.linspace(grid["d_range"][0], grid["d_range"][1], nd))
    v_values = list(np.linspace(grid["v_range"][0], grid["v_range"][1], nv))
    L = grid["L"]
    chi_schedule = tuple(grid.get("chi_schedule", ())) or tuple(
        c for c in (16, 32, grid["chi_max"]) if c <= grid["chi_max"]
    ) or (grid["chi_max"],)
    sep = grid.get("string_separation", L // 2 - 4)
    cols = [
        _ScanColumn(
            v=v,
            d_values=d_values,
            L=L,
            chi_schedule=chi_schedule,
            cutoff=grid["cutoff"],
            max_sweeps=grid["max_sweeps"],
            energy_tol=grid["energy_tol"],
            range_cutoff=grid["range_cutoff"],
            string_separation=sep,
        )
        for v in v_values
    ]
    if threads > 1 and len(cols) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_scan_column, cols))
    else:
        results = [_scan_column(c) for c in cols]

    fp = fingerprint(cfg)
    lines = [",".join(SCAN_COLUMNS)]
    # grid order: D-major rows, V within a row
    for i_d in range(nd):
        for i_v in range(nv):
            row = results[i_v][i_d]
            lines.append(",".join(_fmt_cell(row[c]) for c in SCAN_COLUMNS))
    _write(
        os.path.join(out_dir, "scan.csv"),
        _csv_with_header(SCAN_SCHEMA_VERSION, fp, "\n".join(lines) + "\n"),
    )
    meta = {
        "command": "scan",
        "grid": {"d_values": d_values, "v_values": v_values, "shape": [nd, nv]},
        "settings": grid,
        "n_failed": sum(1 for rs in results for r in rs if r["error"]),
    }
    _write(os.path.join(out_dir, "scan_meta.json"), _json_report(meta, fp))
    return 0


# ---------------------------------------------------------------------------
# gs / sweep / rabi / ssh-check
# ---------------------------------------------------------------------------


def cmd_gs(cfg: dict, out_dir: str, threads: int) -> int:
    terms, _ = build_model(cfg.get("model", {}))
    rep = ground_manifold_report(terms)
    fp = fingerprint(cfg)
    _write(os.path.join(out_dir, "manifold.json"), _json_report(rep.to_dict(), fp))
    labels = []
    counts = {}
    for st in rep.states:
        m = round(st["m_tot"])
        counts[m] = counts.get(m, 0) + 1
        suffix = chr(ord("a") + counts[m] - 1) if m == 0 else ""
        labels.append(f"m{m:+d}{suffix}")
    lines = [",".join(["site"] + [f"sz_{lab}" for lab in labels])]
    for i in range(rep.L):
        lines.append(
            ",".join([str(i)] + [f"{st['sz_profile'][i]:.10g}" for st in rep.states])
        )
    _write(
        os.path.join(out_dir, "magnetization.csv"),
        _csv_with_header(GS_SCHEMA_VERSION, fp, "\n".join(lines) + "\n"),
    )
    return 0


def _schedule_from_config(cfg: dict, j_scale: float) -> SweepSchedule:
    s = cfg.get("protocol", {}).get("sweep", {})
    mu_max = s.get("mu_max", s.get("mu_max_factor", 20.0) * j_scale)
    return SweepSchedule(
        mu_max=mu_max,
        total_time=s.get("total_time", 5.0),
        profile=s.get("profile", "symlog"),
        linear_threshold=s.get("linear_threshold", j_scale),
        n_samples=s.get("n_samples", 200),
    )


def cmd_sweep(cfg: dict, out_dir: str, threads: int) -> int:
    terms, j_scale = build_model(cfg.get("model", {}))
    sched = _schedule_from_config(cfg, j_scale)
    if sched.total_time <= 0:
        raise ValidationError("zero-length sweep")
    k = cfg.get("protocol", {}).get("sweep", {}).get("k", 10)
    fp = fingerprint(cfg)
    static = run_sweep_static(terms, sched, k=k)
    _write(
        os.path.join(out_dir, "sweep_static.csv"),
        _csv_with_header(SWEEP_STATIC_SCHEMA_VERSION, fp, static.to_csv()),
    )
    pattern = cfg.get("protocol", {}).get("sweep", {}).get("initial_pattern")
    dyn = run_sweep_dynamic(terms, sched, initial_pattern=pattern)
    _write(
        os.path.join(out_dir, "sweep_dynamic.csv"),
        _csv_with_header(SWEEP_DYNAMIC_SCHEMA_VERSION, fp, dyn.to_csv()),
    )
    payload = {
        "command": "sweep",
        "schedule": {
            "mu_max": sched.mu_max,
            "total_time": sched.total_time,
            "profile": sched.profile,
            "linear_threshold": sched.linear_threshold,
        },
        "static": {"min_gap_to_rest": static.min_gap()},
        "dynamic": {
            "fidelity": dyn.fidelity,
            "initial_fidelity": dyn.initial_fidelity,
            "target_m": dyn.target_m,
            "m_conservation_drift": float(np.abs(dyn.m_tot - dyn.m_tot[0]).max()),
        },
    }
    _write(os.path.join(out_dir, "sweep_result.json"), _json_report(payload, fp))
    return 0


def cmd_rabi(cfg: dict, out_dir: str, threads: int) -> int:
    terms, _ = build_model(cfg.get("model", {}))
    d = cfg.get("protocol", {}).get("drive", {})
    sites = d.get("sites", "left_half")
    if sites == "left_half":
        sites = list(range(terms.L // 2))
    drive = DriveSpec(
        rabi_frequency=d.get("rabi_frequency", 0.25),
        driven_sites=frozenset(sites),
        total_time=d.get("total_time", 4.0),
    )
    trace = run_rabi(terms, drive, n_samples=d.get("n_samples", 81))
    fp = fingerprint(cfg)
    _write(
        os.path.join(out_dir, "rabi.csv"),
        _csv_with_header(RABI_SCHEMA_VERSION, fp, trace.to_csv()),
    )
    _write(os.path.join(out_dir, "rabi.json"), _json_report(trace.to_dict(), fp))
    return 0


def cmd_ssh_check(cfg: dict, out_dir: str, threads: int) -> int:
    params, _ = build_model(cfg.get("model", {}))
    if not isinstance(params, SSHParams):
        raise ValidationError("ssh-check needs model.variant = 'ssh'")
    s = cfg.get("protocol", {}).get("ssh_check", {})
    result = ssh_check(params, omega_max=s.get("omega_max"), n_points=s.get("n_points", 60))
    fp = fingerprint(cfg)
    lines = ["kind,omega,gap"]
    for kind in ("homogeneous", "staggered"):
        for w, g in zip(result[kind]["omegas"], result[kind]["gaps"]):
            lines.append(f"{kind},{w:.10g},{g:.10g}")
    _write(
        os.path.join(out_dir, "ssh_check.csv"),
        _csv_with_header(SSH_SCHEMA_VERSION, fp, "\n".join(lines) + "\n"),
    )
    payload = {
        "command": "ssh-check",
        "min_gap_homogeneous": result["homogeneous"]["min_gap"],
        "min_gap_staggered": result["staggered"]["min_gap"],
        "ratio": result["ratio"],
        "J_inter": result["J_inter"],
    }
    _write(os.path.join(out_dir, "ssh_check.json"), _json_report(payload, fp))
    return 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spin1chain",
        description="Spin-1 chain simulations: phase scans, manifold reports, "
        "preparation sweeps, edge drives.",
    )
    parser.add_argument("command", nargs="?", choices=COMMANDS,
                        help="overrides the config's command")
    parser.add_argument("--config", required=True, help="JSON configuration document")
    parser.add_argument("--out", required=True, help="output directory")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg["seed"] = args.seed
        cfg.setdefault("seed", 0)
        command = args.command or cfg.get("command")
        if command is None:
            raise ValidationError("no command given (config 'command' key or CLI argument)")
        if cfg.get("command") is not None and args.command and cfg["command"] != args.command:
            raise ValidationError(
                f"config command {cfg['command']!r} conflicts with CLI command {args.command!r}"
            )
        cfg["command"] = command
        os.makedirs(args.out, exist_ok=True)
        handler = {
            "scan": cmd_scan,
            "gs": cmd_gs,
            "sweep": cmd_sweep,
            "rabi": cmd_rabi,
            "ssh-check": cmd_ssh_check,
        }[command]
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        return handler(cfg, args.out, max(args.threads, 1))
    except (ValidationError, ProtocolConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ConvergenceError, RuntimeError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
