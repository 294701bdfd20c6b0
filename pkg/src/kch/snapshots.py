"""Deterministic on-disk formats: diagnostics CSV and binary snapshots.

CSV floats are serialized with repr (shortest round-trip decimal), so a
rerun with the same config produces byte-identical files.  Snapshots
are little-endian binary: magic "KCH1", the three grid sizes as uint32,
the time as float64, then w, w_t, v1, v2, v3, q as float64 C-order
arrays.
"""

from __future__ import annotations

import struct

import numpy as np

from .diagnostics import NORM_FIELDS
from .errors import ConfigError
from .grid import Grid

SNAPSHOT_MAGIC = b"KCH1"

CSV_HEADER = "time," + ",".join(NORM_FIELDS)
PICARD_HEADER = "step,time,iterations,contraction_ratio,rel_w"
SWEEP_HEADER = "nu," + ",".join(
    "max_" + n for n in ("v_h35", "w_h5", "wt_h3", "q_h25", "psi_h55",
                         "psit_h35", "E_h45"))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class DiagnosticsWriter:
    """Streams NormReport rows into the documented CSV schema."""

    def __init__(self, path):
        self.path = path
        self._fh = open(path, "w", encoding="utf-8", newline="\n")
        self._fh.write(CSV_HEADER + "\n")

    def write(self, t, report):
        row = [t] + report.as_row()
        self._fh.write(",".join(_fmt(x) for x in row) + "\n")

    def close(self):
        self._fh.close()


def write_picard_csv(path, picard_rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PICARD_HEADER + "\n")
        for step, t, iters, ratio, rel_w in picard_rows:
            fh.write(",".join([str(int(step)), _fmt(t), str(int(iters)),
                               _fmt(ratio), _fmt(rel_w)]) + "\n")


def write_sweep_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SWEEP_HEADER + "\n")
        for row in rows:
            cells = [_fmt(row["nu"])] + [
                _fmt(row[c]) for c in SWEEP_HEADER.split(",")[1:]]
            fh.write(",".join(cells) + "\n")


def save_snapshot(path, state):
    """Serialize a coupled state; see the module docstring for the layout."""
    grid = state.geom.grid
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<III", grid.n1, grid.n2, grid.n3))
        fh.write(struct.pack("<d", state.t))
        for arr in (state.plate.w, state.plate.w_t, state.fluid.v[0],
                    state.fluid.v[1], state.fluid.v[2], state.fluid.q):
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_snapshot(path):
    """Read a snapshot; returns (grid, t, w, w_t, v, q)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != SNAPSHOT_MAGIC:
        raise ConfigError(f"{path}: not a snapshot file (bad magic)")
    n1, n2, n3 = struct.unpack_from("<III", blob, 4)
    (t,) = struct.unpack_from("<d", blob, 16)
    grid = Grid(n1, n2, n3)
    off = 24
    surf, vol = n1 * n2, n1 * n2 * n3

    def take(count, shape):
        nonlocal off
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=off)
        off += count * 8
        return arr.reshape(shape).copy()

    w = take(surf, (n1, n2))
    w_t = take(surf, (n1, n2))
    v = np.stack([take(vol, (n1, n2, n3)) for _ in range(3)])
    q = take(vol, (n1, n2, n3))
    if off != len(blob):
        raise ConfigError(f"{path}: trailing bytes ({len(blob) - off})")
    return grid, t, w, w_t, v, q
