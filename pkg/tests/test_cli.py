import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from kch import cli
from kch import coupling as cp
from kch import plate as pl
from kch import presets
from kch import snapshots as io
from kch.config import parse_config
from kch.errors import ConfigError
from kch.grid import Grid

BASE = """
[grid]
n1 = 16
n2 = 16
n3 = 17

[time]
dt = 1e-3
t_final = 3e-3

[initial_data]
preset = {preset}
amplitude = 1e-3

[output]
directory = {outdir}
"""


def write_cfg(tmp_path, preset="single_mode_plate", extra=""):
    path = tmp_path / "run.ini"
    path.write_text(BASE.format(preset=preset, outdir=tmp_path / "out") + extra)
    return path


def test_parse_defaults_and_types(tmp_path):
    cfg = parse_config(write_cfg(tmp_path))
    assert cfg.grid.n1 == 16
    assert cfg.time.dt == pytest.approx(1e-3)
    assert cfg.solver.picard_max_iter == 15
    assert cfg.physics.curvature_model == "non_normalized"


def test_unknown_key_suggests_alias(tmp_path):
    path = write_cfg(tmp_path, extra="\n[physics]\ndampng = 0.1\n")
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    msg = str(err.value)
    assert "dampng" in msg and "nu" in msg and "damping" in msg
    assert ":" in msg  # line-precise


def test_unknown_section_and_negative_value(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[grd]\nn1 = 16\n")
    with pytest.raises(ConfigError, match=r"unknown section"):
        parse_config(path)
    path.write_text("[physics]\nnu = -1\n")
    with pytest.raises(ConfigError, match="nu"):
        parse_config(path)


def test_line_outside_section_reports_lineno(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("n1 = 16\n")
    with pytest.raises(ConfigError, match="bad.ini:1"):
        parse_config(path)


def test_check_subcommand_exit_codes(tmp_path):
    assert cli.main(["check", "--config", str(write_cfg(tmp_path)),
                     "--quiet"]) == 0
    assert cli.main(["run", "--config", str(tmp_path / "missing.ini"),
                     "--quiet"]) == 2


def test_run_outputs_deterministic(tmp_path):
    path = write_cfg(tmp_path, preset="random_bandlimited")
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(path), "--quiet"]) == 0
    first = (out / "diagnostics.csv").read_bytes()
    first_p = (out / "picard.csv").read_bytes()
    assert cli.main(["run", "--config", str(path), "--quiet"]) == 0
    assert (out / "diagnostics.csv").read_bytes() == first
    assert (out / "picard.csv").read_bytes() == first_p
    header = first.decode().splitlines()[0]
    assert header == io.CSV_HEADER


def test_cfl_failure_exit_code(tmp_path):
    path = write_cfg(tmp_path, preset="shear_flow",
                     extra="\n[time]\ndt = 0.5\nt_final = 1.0\n"
                           "\n[initial_data]\namplitude = 1.0\n")
    assert cli.main(["run", "--config", str(path), "--quiet"]) == 4


def test_sweep_nu_writes_table(tmp_path):
    path = write_cfg(tmp_path)
    out = tmp_path / "out"
    assert cli.main(["sweep-nu", "--config", str(path), "--quiet",
                     "--nu-list", "1e-2,1e-3,0"]) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == io.SWEEP_HEADER
    assert len(lines) == 4


def test_snapshot_round_trip(tmp_path):
    g = Grid(16, 16, 17)
    params = cp.RunParams(plate=pl.PlateParams())
    w0, w1, v0 = presets.build_initial_data("random_bandlimited", g,
                                            amplitude=1e-2, seed=5)
    state = cp.initial_system_state(g, params, w0, w1, v0)
    state.fluid.q += 0.3
    p1 = tmp_path / "a.kch"
    p2 = tmp_path / "b.kch"
    io.save_snapshot(p1, state)
    grid, t, w, w_t, v, q = io.load_snapshot(p1)
    assert (grid.n1, grid.n2, grid.n3) == (16, 16, 17)
    assert t == state.t
    assert np.array_equal(w, state.plate.w)
    assert np.array_equal(v, state.fluid.v)
    state2 = cp.initial_system_state(grid, params, w, w_t, v)
    state2.fluid.q = q
    io.save_snapshot(p2, state2)
    assert p1.read_bytes() == p2.read_bytes()


def test_snapshot_resume_via_config(tmp_path):
    path = write_cfg(tmp_path, extra="\n[output]\nsnapshots = true\n")
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(path), "--quiet"]) == 0
    resume = tmp_path / "resume.ini"
    resume.write_text(BASE.format(preset="zero", outdir=tmp_path / "out2")
                      + f"\n[initial_data]\nsnapshot = {out / 'final.kch'}\n")
    assert cli.main(["run", "--config", str(resume), "--quiet"]) == 0
    lines = (tmp_path / "out2" / "diagnostics.csv").read_text().splitlines()
    assert float(lines[1].split(",")[0]) == pytest.approx(3e-3)


def test_module_invocation_smoke(tmp_path):
    path = write_cfg(tmp_path, preset="zero")
    proc = subprocess.run([sys.executable, "-m", "kch", "check",
                           "--config", str(path), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
