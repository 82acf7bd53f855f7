"""Render spin1chain CLI outputs (CSV/JSON) as figures.

Four figure kinds, matching the CLI's versioned output schemas:

  heatmap     scan.csv            -> (D, V) phase-map colormap
  profile     manifold.json       -> per-state site magnetization bars
  sweep       sweep_static.csv    -> ramp spectrum + overlaps on a symlog axis
  timeseries  rabi.csv            -> drive magnetizations and state overlaps

Inputs are read-only; rendering is deterministic for identical inputs.
Invoke as a script:  spin1chain-viz --in scan.csv --kind heatmap --out map.png
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

KINDS = ("heatmap", "profile", "sweep", "timeseries")

#: required columns per CSV-backed figure kind (CLI schema v1)
REQUIRED_COLUMNS = {
    "heatmap": {"d", "v", "entropy", "string_z", "string_x", "aklt_overlap", "tr_phase"},
    "sweep": {
        "t_us",
        "mu_hMHz",
        "gap_to_rest_hMHz",
        "overlap_staggered",
        "overlap_aklt_ud",
        "overlap_final_gs",
    },
    "timeseries": {"t_us", "m_tot", "m_edge", "ov_orth_uu", "ov_orth_ud", "ov_orth_du",
                   "ov_orth_dd"},
}


class SchemaError(ValueError):
    """Input file does not carry the documented column set."""


@dataclass
class FigureSpec:
    input_path: str
    kind: str
    out_path: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")


def read_csv_table(path, required):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            rows = list(csv.DictReader(l for l in fh if not l.startswith("#")))
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    missing = required - set(rows[0])
    if missing:
        raise SchemaError(f"{path}: missing columns {sorted(missing)}")
    return rows


def _col(rows, name, default=np.nan):
    out = []
    for r in rows:
        cell = r.get(name, "")
        out.append(float(cell) if cell not in ("", None) else default)
    return np.asarray(out)


# ---------------------------------------------------------------------------
# heatmap (phase map)
# ---------------------------------------------------------------------------

TR_PALETTE = ListedColormap(["#888888", "#3b6fb6", "#c23b22"])  # undefined, +1, -1


def render_heatmap(spec: FigureSpec) -> dict:
    rows = read_csv_table(spec.input_path, REQUIRED_COLUMNS["heatmap"])
    value = spec.options.get("value", "entropy")
    if value not in rows[0]:
        raise SchemaError(f"value column {value!r} not in {spec.input_path}")
    d = _col(rows, "d")
    v = _col(rows, "v")
    d_vals = np.unique(d)
    v_vals = np.unique(v)
    grid = np.full((len(v_vals), len(d_vals)), np.nan)
    for r in rows:
        i = int(np.searchsorted(v_vals, float(r["v"])))
        j = int(np.searchsorted(d_vals, float(r["d"])))
        cell = r[value]
        grid[i, j] = float(cell) if cell not in ("", None) else np.nan

    fig, ax = plt.subplots(figsize=(5.2, 4.2), constrained_layout=True)
    extent = _cell_extent(d_vals) + _cell_extent(v_vals)
    if value == "tr_phase":
        norm = BoundaryNorm([-1.5, -0.5, 0.5, 1.5], TR_PALETTE.N)
        shown = np.where(np.isnan(grid), 0.0, grid)
        im = ax.imshow(np.sign(shown), origin="lower", aspect="auto", extent=extent,
                       cmap=ListedColormap(["#c23b22", "#888888", "#3b6fb6"]), norm=norm)
        cbar = fig.colorbar(im, ax=ax, ticks=[-1, 0, 1])
        cbar.set_label("time-reversal phase factor")
    else:
        im = ax.imshow(grid, origin="lower", aspect="auto", extent=extent, cmap="viridis")
        fig.colorbar(im, ax=ax, label=value.replace("_", " "))
    ax.set_xlabel(r"$D / J^{xy}$")
    ax.set_ylabel(r"$V / J^{xy}$")
    ax.set_title(spec.options.get("title", f"phase map: {value}"))
    fig.savefig(spec.out_path, dpi=spec.options.get("dpi", 150))
    plt.close(fig)
    return {
        "kind": "heatmap",
        "n_cells": int(np.isfinite(grid).sum()),
        "grid_shape": [len(d_vals), len(v_vals)],
        "value": value,
    }


def _cell_extent(vals):
    if len(vals) > 1:
        half = 0.5 * (vals[1] - vals[0])
    else:
        half = 0.5
    return [float(vals[0] - half), float(vals[-1] + half)]


# ---------------------------------------------------------------------------
# profile (per-state site magnetization)
# ---------------------------------------------------------------------------


def render_profile(spec: FigureSpec) -> dict:
    try:
        with open(spec.input_path, "r", encoding="utf-8") as fh:
            rep = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {spec.input_path}: {exc}") from exc
    states = rep.get("states")
    if not states or any("sz_profile" not in s or "m_tot" not in s for s in states):
        raise SchemaError(f"{spec.input_path}: expected states with sz_profile and m_tot")

    n = len(states)
    fig, axes = plt.subplots(n, 1, figsize=(5.0, 1.7 * n), sharex=True,
                             constrained_layout=True)
    axes = np.atleast_1d(axes)
    for ax, st in zip(axes, states):
        prof = np.asarray(st["sz_profile"], dtype=float)
        ax.bar(np.arange(len(prof)), prof, color="#3b6fb6")
        ax.axhline(0.0, color="k", lw=0.6)
        ax.set_ylim(-1.05, 1.05)
        ax.set_ylabel(r"$\langle S^z_i \rangle$")
        ax.set_title(f"$M_\\mathrm{{tot}} = {st['m_tot']:+.0f}$", fontsize=9)
    axes[-1].set_xlabel("site")
    fig.savefig(spec.out_path, dpi=spec.options.get("dpi", 150))
    plt.close(fig)
    return {"kind": "profile", "n_states": n, "n_sites": len(states[0]["sz_profile"])}


# ---------------------------------------------------------------------------
# sweep (ramp spectrum + overlaps, symlog mu axis)
# ---------------------------------------------------------------------------


def render_sweep(spec: FigureSpec) -> dict:
    rows = read_csv_table(spec.input_path, REQUIRED_COLUMNS["sweep"])
    mu = _col(rows, "mu_hMHz")
    n_levels = sum(1 for c in rows[0] if c.startswith("E") and c.endswith("_hMHz"))
    energies = np.column_stack([_col(rows, f"E{i}_hMHz") for i in range(n_levels)])
    tracked = np.column_stack([_col(rows, f"tracked{i}") for i in range(n_levels)]) > 0.5
    e0 = energies[:, 0]

    lin = spec.options.get("linthresh", 1.0)
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.4, 6.0), sharex=True,
                                   constrained_layout=True)
    for lev in range(n_levels):
        on = tracked[:, lev]
        ax1.plot(mu[~on], (energies[:, lev] - e0)[~on], ".", color="0.6", ms=2)
    # tracked manifold states drawn on top
    for lev in range(n_levels):
        on = tracked[:, lev]
        if on.any():
            ax1.plot(mu[on], (energies[:, lev] - e0)[on], ".", ms=3, color="#c23b22")
    ax1.set_ylabel(r"$E - E_0$  (h$\cdot$MHz)")
    ax1.set_xscale("symlog", linthresh=lin)
    ax1.set_title(spec.options.get("title", "preparation ramp"))

    ax2.plot(mu, _col(rows, "overlap_staggered"), label=r"staggered product")
    ax2.plot(mu, _col(rows, "overlap_aklt_ud"), label=r"valence-bond (u,d)")
    ax2.plot(mu, _col(rows, "overlap_final_gs"), label=r"final ground state")
    ax2.set_xscale("symlog", linthresh=lin)
    ax2.set_xlabel(r"$\mu$  (h$\cdot$MHz)")
    ax2.set_ylabel(r"$|\langle \Psi_\mathrm{GS} | \Phi \rangle|^2$")
    ax2.set_ylim(-0.02, 1.02)
    ax2.legend(fontsize=8)
    ax2.invert_xaxis()
    fig.savefig(spec.out_path, dpi=spec.options.get("dpi", 150))
    xscale = ax1.get_xscale()
    plt.close(fig)
    return {"kind": "sweep", "n_samples": len(rows), "n_levels": n_levels, "xscale": xscale}


# ---------------------------------------------------------------------------
# timeseries (drive traces)
# ---------------------------------------------------------------------------


def render_timeseries(spec: FigureSpec) -> dict:
    rows = read_csv_table(spec.input_path, REQUIRED_COLUMNS["timeseries"])
    t = _col(rows, "t_us")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(5.4, 5.4), sharex=True,
                                   constrained_layout=True)
    labels = {"uu": r"$(\uparrow,\uparrow)$", "ud": r"$(\uparrow,\downarrow)$",
              "du": r"$(\downarrow,\uparrow)$", "dd": r"$(\downarrow,\downarrow)$"}
    for key, lab in labels.items():
        ax1.plot(t, _col(rows, f"ov_orth_{key}"), label=lab)
    ax1.set_ylabel("edge-state overlap")
    ax1.set_ylim(-0.02, 1.02)
    ax1.legend(fontsize=8, ncol=2)
    ax1.set_title(spec.options.get("title", "half-chain drive"))

    ax2.plot(t, _col(rows, "m_tot"), label=r"$M_\mathrm{tot}$")
    ax2.plot(t, _col(rows, "m_edge"), label=r"$M_\mathrm{edge}$")
    ax2.set_xlabel(r"$t$  ($\mu$s)")
    ax2.set_ylabel("magnetization")
    ax2.legend(fontsize=8)
    fig.savefig(spec.out_path, dpi=spec.options.get("dpi", 150))
    plt.close(fig)
    m_edge = _col(rows, "m_edge")
    return {
        "kind": "timeseries",
        "n_samples": len(rows),
        "m_edge_range": [float(m_edge.min()), float(m_edge.max())],
    }


_RENDERERS = {
    "heatmap": render_heatmap,
    "profile": render_profile,
    "sweep": render_sweep,
    "timeseries": render_timeseries,
}


def render(spec: FigureSpec) -> dict:
    """Write the figure for ``spec`` and return summary metadata."""
    return _RENDERERS[spec.kind](spec)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="spin1chain-viz", description="Render spin1chain CLI outputs as figures."
    )
    parser.add_argument("--in", dest="input_path", required=True)
    parser.add_argument("--kind", required=True, choices=KINDS)
    parser.add_argument("--out", required=True)
    parser.add_argument("--value", default=None, help="heatmap value column")
    parser.add_argument("--title", default=None)
    parser.add_argument("--linthresh", type=float, default=None,
                        help="linear region of the sweep symlog axis")
    args = parser.parse_args(argv)
    options = {}
    for key in ("value", "title", "linthresh"):
        val = getattr(args, key)
        if val is not None:
            options[key] = val
    try:
        meta = render(FigureSpec(args.input_path, args.kind, args.out, options))
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(meta))
    return 0


if __name__ == "__main__":
    sys.exit(main())
