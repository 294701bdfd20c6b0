#!/usr/bin/env python3
"""Batch figure generation from simulator CSV output.

Reads one CSV produced by the kch command line (a run diagnostics
table, a per-step coupling-iteration log, or a damping-sweep table,
recognized by their exact headers) and writes one PNG per diagnostic
family into the output directory.  Filenames are deterministic.

Usage:
    python plots/plot_run.py CSV_PATH OUT_DIR
"""

from __future__ import annotations

import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RUN_HEADER = (
    "time,v_h35,w_h5,wt_h3,q_h25,psi_h55,psit_h35,E_h45,E_minus_I_sup,"
    "J_minus_1_sup,kinetic,koiter,total_energy,interface_residual,"
    "piola_residual")
PICARD_HEADER = "step,time,iterations,contraction_ratio,rel_w"
SWEEP_HEADER = ("nu,max_v_h35,max_w_h5,max_wt_h3,max_q_h25,max_psi_h55,"
                "max_psit_h35,max_E_h45")

ENERGY_COLS = ["kinetic", "koiter", "total_energy"]
NORM_COLS = ["v_h35", "w_h5", "wt_h3", "q_h25", "psi_h55", "psit_h35", "E_h45"]
RESIDUAL_COLS = ["E_minus_I_sup", "J_minus_1_sup", "interface_residual",
                 "piola_residual"]


class SchemaError(Exception):
    pass


def load_table(path: Path) -> dict[str, list[float]]:
    """Parse a CSV into columns; the header must match a known schema."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    joined = ",".join(header)
    if joined not in (RUN_HEADER, PICARD_HEADER, SWEEP_HEADER):
        for known in (RUN_HEADER, PICARD_HEADER, SWEEP_HEADER):
            expected = known.split(",")
            if len(expected) == len(header):
                odd = [c for c in header if c not in expected]
                if odd:
                    raise SchemaError(f"{path}: unexpected column {odd[0]!r}")
        raise SchemaError(f"{path}: header matches no documented schema")
    table = {name: [] for name in header}
    for row in rows:
        if len(row) != len(header):
            raise SchemaError(f"{path}: ragged row {row}")
        for name, cell in zip(header, row):
            table[name].append(float(cell))
    return table


def _save(fig, out_dir: Path, name: str, written: list):
    path = out_dir / name
    fig.savefig(path, dpi=110)
    plt.close(fig)
    written.append(path)


def _line_figure(x, series, xlabel, title, logy=False):
    fig, ax = plt.subplots(figsize=(7, 4.2))
    for label, ys in series.items():
        ax.plot(x, ys, label=label, linewidth=1.4)
    if logy:
        positive = [y for ys in series.values() for y in ys if y > 0]
        if positive:
            ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    return fig


def plot_run_table(table, out_dir: Path) -> list:
    t = table["time"]
    written = []
    _save(_line_figure(t, {c: table[c] for c in ENERGY_COLS}, "time",
                       "energy budget"), out_dir, "energies.png", written)
    _save(_line_figure(t, {c: table[c] for c in NORM_COLS}, "time",
                       "norm proxies vs time"), out_dir, "norms.png", written)
    _save(_line_figure(t, {c: table[c] for c in RESIDUAL_COLS}, "time",
                       "residual monitors", logy=True),
          out_dir, "residuals.png", written)
    return written


def plot_picard_table(table, out_dir: Path) -> list:
    written = []
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7, 5.2), sharex=True)
    ax1.plot(table["time"], table["iterations"], drawstyle="steps-mid")
    ax1.set_ylabel("iterations")
    ax1.grid(True, alpha=0.3)
    ax2.plot(table["time"], table["contraction_ratio"], label="contraction ratio")
    rel = [max(r, 0.0) for r in table["rel_w"]]
    ax2.plot(table["time"], rel, label="final relative update")
    if any(r > 0 for r in rel):
        ax2.set_yscale("log")
    ax2.set_xlabel("time")
    ax2.grid(True, alpha=0.3)
    ax2.legend(fontsize=8)
    fig.suptitle("coupling iteration")
    fig.tight_layout()
    _save(fig, out_dir, "picard.png", written)
    return written


def plot_sweep_table(table, out_dir: Path) -> list:
    written = []
    fig, ax = plt.subplots(figsize=(7, 4.2))
    xs = range(len(table["nu"]))
    labels = [f"{nu:g}" for nu in table["nu"]]
    for col in SWEEP_HEADER.split(",")[1:]:
        base = table[col][0] if table[col][0] != 0 else 1.0
        ax.plot(xs, [v / base for v in table[col]], marker="o",
                label=col.removeprefix("max_"))
    ax.set_xticks(list(xs), labels)
    ax.set_xlabel("damping parameter")
    ax.set_ylabel("max over time, scaled to first row")
    ax.set_title("damping sweep spread")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8, ncol=2)
    fig.tight_layout()
    _save(fig, out_dir, "sweep.png", written)
    return written


def plot_run(csv_path, out_dir) -> list:
    """Dispatch on the header; returns the list of written image paths."""
    csv_path = Path(csv_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    table = load_table(csv_path)
    cols = ",".join(table.keys())
    if cols == RUN_HEADER:
        return plot_run_table(table, out_dir)
    if cols == PICARD_HEADER:
        return plot_picard_table(table, out_dir)
    return plot_sweep_table(table, out_dir)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    try:
        written = plot_run(argv[0], argv[1])
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
