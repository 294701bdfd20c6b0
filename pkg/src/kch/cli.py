"""Command-line entry points: run, sweep-nu, check, selftest.

Exit codes: 0 success, 2 configuration problems, 3 failed start-up
compatibility, 4 runtime numerical guards (CFL, smallness, solver
divergence).  All file outputs are byte-deterministic for a fixed
config and seed.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import coupling as cp
from . import fluid as fl
from . import geometry as geo
from . import plate as pl
from . import presets
from . import pressure as pr
from . import snapshots as io
from .config import RunConfig, config_summary, parse_config
from .errors import CompatibilityError, ConfigError, KchError, NumericsError
from .grid import Grid, random_surface

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPAT = 3
EXIT_NUMERICS = 4


def _plate_params(cfg: RunConfig) -> pl.PlateParams:
    p = cfg.physics
    return pl.PlateParams(h=p.h, lam=p.lam, mu=p.mu, nu=p.nu,
                          curvature_model=p.curvature_model,
                          operator=p.plate_operator)


def _run_params(cfg: RunConfig) -> cp.RunParams:
    s = cfg.solver
    return cp.RunParams(plate=_plate_params(cfg), pressure_tol=s.pressure_tol,
                        pressure_max_iter=s.pressure_max_iter,
                        cfl_max=s.cfl_max,
                        divergence_cleanup=s.divergence_cleanup,
                        epsilon_smallness=s.epsilon_smallness)


def _build_state(cfg: RunConfig, grid: Grid, params: cp.RunParams,
                 check: bool = True):
    init = cfg.initial_data
    if init.snapshot:
        sgrid, t, w, w_t, v, q = io.load_snapshot(init.snapshot)
        if (sgrid.n1, sgrid.n2, sgrid.n3) != (grid.n1, grid.n2, grid.n3):
            raise ConfigError(
                f"snapshot grid {(sgrid.n1, sgrid.n2, sgrid.n3)} does not "
                f"match configured grid {(grid.n1, grid.n2, grid.n3)}")
        state = cp.initial_system_state(grid, params, w, w_t, v)
        state.fluid.q = q
        state.t = state.plate.t = state.fluid.t = t
        return state
    w0, w1, v0 = presets.build_initial_data(init.preset, grid,
                                            amplitude=init.amplitude,
                                            seed=init.seed, kmax=init.kmax)
    if check:
        cp.ensure_compatible(v0, w0, w1, grid)
    return cp.initial_system_state(grid, params, w0, w1, v0)


def _say(quiet, *msg):
    if not quiet:
        print(*msg)


def cmd_run(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    grid = Grid(cfg.grid.n1, cfg.grid.n2, cfg.grid.n3)
    params = _run_params(cfg)
    state = _build_state(cfg, grid, params)
    picard = cp.PicardConfig(tol=cfg.solver.picard_tol,
                             max_iter=cfg.solver.picard_max_iter,
                             relaxation=cfg.solver.relaxation)
    outdir.mkdir(parents=True, exist_ok=True)
    writer = io.DiagnosticsWriter(outdir / "diagnostics.csv") if cfg.output.csv else None

    def on_output(step, st, rep):
        if writer is not None:
            writer.write(st.t, rep)

    try:
        res = cp.run_simulation(grid, params, state, cfg.time.dt,
                                cfg.time.t_final, picard,
                                output_every=cfg.time.output_every,
                                on_output=on_output)
    finally:
        if writer is not None:
            writer.close()
    if cfg.output.csv:
        io.write_picard_csv(outdir / "picard.csv", res.picard)
    if cfg.output.snapshots and res.final_state is not None:
        io.save_snapshot(outdir / "final.kch", res.final_state)
    _say(quiet, f"run: {len(res.picard)} steps, status {res.status}")
    if res.status != "ok":
        _say(quiet, f"guard at t={res.guard_time}: {res.guard_message}")
        return EXIT_NUMERICS
    return EXIT_OK


def cmd_check(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    grid = Grid(cfg.grid.n1, cfg.grid.n2, cfg.grid.n3)
    init = cfg.initial_data
    w0, w1, v0 = presets.build_initial_data(init.preset, grid,
                                            amplitude=init.amplitude,
                                            seed=init.seed, kmax=init.kmax)
    rep = cp.check_compatibility(v0, w0, w1, grid)
    for item, residual in rep.residuals.items():
        _say(quiet, f"{'PASS' if residual <= rep.tol else 'FAIL'} "
                    f"{item}: residual {residual:.3e}")
    gm = geo.geometry_from_plate(w0, w1, grid)
    small = geo.smallness_report(gm, cfg.solver.epsilon_smallness)
    _say(quiet, f"smallness sup E/F/J: {small.sup_E:.3e} {small.sup_F:.3e} "
                f"{small.sup_J:.3e} (budget {small.epsilon}) -> "
                f"{'ok' if small.within else 'exceeded'}")
    return EXIT_OK if rep.passed else EXIT_COMPAT


def _sweep_worker(args):
    cfg, nu, outdir_name = args
    grid = Grid(cfg.grid.n1, cfg.grid.n2, cfg.grid.n3)
    params = _run_params(cfg)

    def make_state():
        return _build_state(cfg, grid, params)

    picard = cp.PicardConfig(tol=cfg.solver.picard_tol,
                             max_iter=cfg.solver.picard_max_iter,
                             relaxation=cfg.solver.relaxation)
    rows, _ = cp.nu_sweep(grid, params, make_state, cfg.time.dt,
                          cfg.time.t_final, picard, [nu],
                          output_every=cfg.time.output_every)
    return rows[0]


def cmd_sweep(cfg: RunConfig, outdir: Path, nu_list, quiet: bool) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, nu, str(outdir)) for nu in nu_list]
    workers = int(os.environ.get("KCH_THREADS", "1"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_worker, jobs))
    else:
        rows = [_sweep_worker(job) for job in jobs]
    io.write_sweep_csv(outdir / "sweep.csv", rows)
    cols = [c for c in io.SWEEP_HEADER.split(",")[1:]]
    for col in cols:
        vals = [r[col] for r in rows if r["status"] == "ok"]
        if vals and min(vals) > 0:
            _say(quiet, f"{col}: spread {max(vals) / min(vals):.4f}")
    bad = [r for r in rows if r["status"] != "ok"]
    _say(quiet, f"sweep: {len(rows)} runs, {len(bad)} guarded")
    return EXIT_OK if not bad else EXIT_NUMERICS


def cmd_selftest(cfg: RunConfig, outdir: Path, quiet: bool) -> int:
    """Small-grid property battery plus demo outputs for the plot scripts."""
    failures = []

    def check(name, ok, detail=""):
        _say(quiet, f"{'PASS' if ok else 'FAIL'} {name} {detail}")
        if not ok:
            failures.append(name)

    g = Grid(16, 16, 17)
    rng = np.random.default_rng(0)

    w = random_surface(g, rng, 3, 0.02)
    gm = geo.geometry_from_plate(w, np.zeros_like(w), g)
    check("map inverse identity", geo.grad_eta_times_E_residual(gm) <= 1e-12)
    check("cofactor identity", geo.F_minus_JE_residual(gm) <= 1e-12)
    check("cofactor columns divergence-free",
          geo.piola_residual(gm).max() <= 1e-11)

    params = pl.PlateParams()
    w1 = random_surface(g, rng, 3, 0.01)
    xi = random_surface(g, rng, 3, 0.01)
    err = pl.energy_gradient_check(w1, xi, params, g)
    check("elastic operator is the energy gradient", err <= 1e-6, f"({err:.1e})")

    x1 = g.x1[:, None, None]
    z = g.x3[None, None, :]
    qs = np.cos(2 * np.pi * x1) * np.cosh(2 * np.pi * z) * np.ones((1, 16, 1))
    d = np.zeros((3, 3, 16, 16, 17))
    d[0, 0] = d[1, 1] = d[2, 2] = 1.0
    interior, bot, top = pr.apply_operator(d, qs, g, 1.0)
    prob = pr.EllipticProblem(grid=g, d=d, f=None, g1=top, g0=bot,
                              robin_coeff=1.0, interior_rhs=interior)
    q, _ = pr.solve_robin_neumann(prob)
    check("pressure solve recovers manufactured field",
          np.abs(q - qs).max() / np.abs(qs).max() <= 1e-10)

    outdir.mkdir(parents=True, exist_ok=True)
    from dataclasses import replace
    for preset in ("zero", "single_mode_plate"):
        sub = replace(cfg)
        sub.initial_data.preset = preset
        sub.initial_data.amplitude = 1e-3
        sub.time.dt, sub.time.t_final, sub.time.output_every = 1e-3, 5e-3, 1
        code = cmd_run(sub, outdir / preset, quiet=True)
        check(f"demo run preset={preset}", code == EXIT_OK)
    code = cmd_sweep(cfg, outdir / "sweep", [1e-2, 0.0], quiet=True)
    check("demo damping sweep", code == EXIT_OK)

    return EXIT_OK if not failures else EXIT_NUMERICS


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kch",
        description="Inviscid channel flow coupled to a nonlinear plate")
    parser.add_argument("command",
                        choices=["run", "sweep-nu", "check", "selftest"])
    parser.add_argument("--config", required=True, help="path to the INI config")
    parser.add_argument("--output-dir", default=None,
                        help="override [output] directory")
    parser.add_argument("--nu-list", default=None,
                        help="comma-separated damping values for sweep-nu")
    parser.add_argument("--seed", type=int, default=None,
                        help="override [initial_data] seed")
    parser.add_argument("--quiet", action="store_true")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            cfg.initial_data.seed = args.seed
        outdir = Path(args.output_dir or cfg.output.directory)
        if not args.quiet:
            print(config_summary(cfg))
        if args.command == "run":
            return cmd_run(cfg, outdir, args.quiet)
        if args.command == "check":
            return cmd_check(cfg, outdir, args.quiet)
        if args.command == "sweep-nu":
            if args.nu_list:
                nu_list = [float(x) for x in args.nu_list.split(",")]
            else:
                nu_list = [1e-2, 1e-3, 1e-4, 0.0]
            return cmd_sweep(cfg, outdir, nu_list, args.quiet)
        return cmd_selftest(cfg, outdir, args.quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompatibilityError as exc:
        print(f"compatibility error: {exc}", file=sys.stderr)
        return EXIT_COMPAT
    except NumericsError as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except KchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


def entrypoint():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
