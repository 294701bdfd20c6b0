"""Per-step fixed-point coupling of map, fluid, pressure, and plate.

Each time step iterates: rebuild the map from the current plate
iterate, advance the fluid with the iterate's wall data (pressure
re-solved per stage), then advance the plate with the normalized
top-wall pressure trace.  Successive-iterate differences of velocity,
pressure, and displacement are measured in low-order norms; the step is
accepted when all drop below the relative tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import fluid as fluid_mod
from . import plate as plate_mod
from . import pressure as pressure_mod
from .diagnostics import NormReport, energy_report, sobolev_proxy
from .errors import (CompatibilityError, ConvergenceError, NumericsError,
                     SmallnessError)
from .geometry import (GeometryState, ale_matrices, extension_rate,
                       harmonic_extension, smallness_report)
from .grid import Grid
from .plate import PlateParams, PlateState


@dataclass
class SystemState:
    plate: PlateState
    fluid: fluid_mod.FluidState
    geom: GeometryState
    t: float = 0.0


@dataclass
class PicardConfig:
    tol: float = 1e-10
    max_iter: int = 15
    relaxation: float = 1.0

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1:
            raise ValueError("tol must be > 0 and max_iter >= 1")
        if not 0.0 < self.relaxation <= 1.0:
            raise ValueError("relaxation must lie in (0, 1]")


COMPAT_ITEMS = ("finite_data", "w0_zero", "w1_mean_zero", "div_free",
                "bottom_impermeable", "trace_match")


@dataclass
class CompatReport:
    residuals: dict
    tol: float

    @property
    def passed(self):
        return all(np.isfinite(r) and r <= self.tol
                   for r in self.residuals.values())

    def failed_items(self):
        return [k for k, r in self.residuals.items()
                if not (np.isfinite(r) and r <= self.tol)]


def check_compatibility(v0, w0, w1, grid: Grid, tol: float = 1e-10) -> CompatReport:
    """Residual of each start-up condition on the initial data."""
    finite = (np.all(np.isfinite(v0)) and np.all(np.isfinite(w0))
              and np.all(np.isfinite(w1)))
    if not finite:
        residuals = dict.fromkeys(COMPAT_ITEMS, np.inf)
        return CompatReport(residuals=residuals, tol=tol)
    div = grid.dx1(v0[0]) + grid.dx2(v0[1]) + grid.dz_v(v0[2])
    residuals = {
        "finite_data": 0.0,
        "w0_zero": float(np.abs(w0).max()),
        "w1_mean_zero": abs(grid.smean(w1)),
        "div_free": float(np.abs(div).max()),
        "bottom_impermeable": float(np.abs(v0[2][:, :, 0]).max()),
        "trace_match": float(np.abs(v0[2][:, :, -1] - w1).max()),
    }
    return CompatReport(residuals=residuals, tol=tol)


def ensure_compatible(v0, w0, w1, grid, tol=1e-10):
    report = check_compatibility(v0, w0, w1, grid, tol)
    if not report.passed:
        bad = {k: report.residuals[k] for k in report.failed_items()}
        raise CompatibilityError(f"initial data fails start-up conditions: {bad}")
    return report


@dataclass
class RunParams:
    """Physics plus solver knobs needed by the stepper."""
    plate: PlateParams
    pressure_tol: float = 1e-10
    pressure_max_iter: int = 200
    cfl_max: float = 0.5
    divergence_cleanup: bool = True
    epsilon_smallness: float = 0.25
    c_min: float = 0.1


@dataclass
class PicardLog:
    iterations: int
    converged: bool
    diffs: list                      # (rel_v, rel_q, rel_w) per iterate
    contraction_ratio: float


def _geom_of(w, w_t, grid, c_min):
    return ale_matrices(harmonic_extension(w, grid), extension_rate(w_t, grid),
                        grid, c_min)


def picard_timestep(state: SystemState, params: RunParams, grid: Grid,
                    dt: float, cfg: PicardConfig, solvers=None):
    """Advance the coupled state by dt; returns (state, PicardLog)."""
    pl = state.plate
    if solvers is None:
        solvers = make_solvers(grid, params)
    robin_solver, neumann_solver = solvers

    geom_t = state.geom
    rep = smallness_report(geom_t, params.epsilon_smallness)
    if not rep.within:
        raise SmallnessError(
            f"map deviation exceeds the budget {params.epsilon_smallness} "
            f"at t={state.t:.6g}: sup sizes {rep.values()[:3]}")

    # linear predictor of the end-of-step plate state
    w_end = pl.w + dt * pl.w_t
    wt_end = pl.w_t.copy()
    v_prev = q_prev = None
    diffs, converged = [], False

    for it in range(cfg.max_iter):
        geom_end = _geom_of(w_end, wt_end, grid, params.c_min)
        if max(geom_end.epsilon_report) > params.epsilon_smallness:
            raise SmallnessError(
                f"map deviation of the iterate exceeds the budget "
                f"{params.epsilon_smallness} at t={state.t:.6g}: "
                f"sup sizes {geom_end.epsilon_report}")
        geom_mid = _geom_of(0.5 * (pl.w + w_end), 0.5 * (pl.w_t + wt_end),
                            grid, params.c_min)
        plate_mid = PlateState(w=0.5 * (pl.w + w_end),
                               w_t=0.5 * (pl.w_t + wt_end), t=pl.t + 0.5 * dt)

        fluid_new, q_mid, _ = fluid_mod.fluid_step(
            state.fluid, (geom_t, geom_mid, geom_end), (pl, plate_mid),
            wt_end, params.plate, grid, dt,
            pressure_tol=params.pressure_tol,
            pressure_max_iter=params.pressure_max_iter,
            cfl_max=params.cfl_max, cleanup=params.divergence_cleanup,
            robin_solver=robin_solver, neumann_solver=neumann_solver)

        q_trace, _ = pressure_mod.normalize_surface_mean(q_mid, grid)
        forcing = grid.dealias(q_trace[:, :, -1])
        forcing -= forcing.mean()
        plate_new = plate_mod.plate_step(pl, forcing, params.plate, grid, dt)

        r = cfg.relaxation
        w_new = (1.0 - r) * w_end + r * plate_new.w
        wt_new = (1.0 - r) * wt_end + r * plate_new.w_t

        rel_w = max(_rel_diff_surface(w_new, w_end, grid),
                    grid.sl2(wt_new - wt_end) / max(grid.sl2(wt_new), 1e-14))
        rel_v = _rel_diff_volume(fluid_new.v, v_prev, grid) if v_prev is not None else np.inf
        rel_q = _rel_diff_volume_scalar(q_mid, q_prev, grid) if q_prev is not None else np.inf
        diffs.append((rel_v, rel_q, rel_w))

        w_end, wt_end = w_new, wt_new
        v_prev, q_prev = fluid_new.v, q_mid

        if rel_w <= cfg.tol and rel_v <= cfg.tol and rel_q <= cfg.tol:
            converged = True
            break
        if it == 0 and rel_w <= cfg.tol:
            # equilibrium shortcut: nothing moved on the first pass
            converged = True
            break

    ratio = _contraction_ratio(diffs)
    if not converged:
        raise ConvergenceError(
            f"coupling iteration did not contract within {cfg.max_iter} passes "
            f"at t={state.t:.6g}; last w-difference ratio {ratio:.3f}")

    geom_end = _geom_of(w_end, wt_end, grid, params.c_min)
    new_state = SystemState(
        plate=PlateState(w=w_end, w_t=wt_end, t=pl.t + dt),
        fluid=fluid_new, geom=geom_end, t=state.t + dt)
    return new_state, PicardLog(iterations=len(diffs), converged=converged,
                                diffs=diffs, contraction_ratio=ratio)


def _rel_diff_surface(a, b, grid):
    num = sobolev_proxy(a - b, grid, 2.0)
    den = max(sobolev_proxy(a, grid, 2.0), 1e-14)
    return num / den


def _rel_diff_volume(a, b, grid):
    num = np.sqrt(sum(grid.vl2(a[i] - b[i]) ** 2 for i in range(3)))
    den = max(np.sqrt(sum(grid.vl2(a[i]) ** 2 for i in range(3))), 1e-14)
    return num / den


def _rel_diff_volume_scalar(a, b, grid):
    return grid.vl2(a - b) / max(grid.vl2(a), 1e-14)


def _contraction_ratio(diffs):
    if len(diffs) < 3:
        return 0.0
    a, b = diffs[-2][2], diffs[-1][2]
    return b / a if a > 0 else 0.0


def make_solvers(grid: Grid, params: RunParams):
    """Preassembled vertical solvers shared across a run."""
    robin = pressure_mod.VerticalSolver(grid, 1.0 / params.plate.h)
    neumann = pressure_mod.WideNeumannSolver(grid)
    return robin, neumann


@dataclass
class RunResult:
    times: list
    reports: list                    # NormReport per output time
    picard: list                     # (step, t, iterations, ratio, rel_w)
    status: str = "ok"
    guard_time: float = None
    guard_message: str = ""
    final_state: SystemState = None
    vorticity: fluid_mod.VorticityState = None

    def max_over_time(self, name):
        return max(getattr(r, name) for r in self.reports)


def initial_system_state(grid: Grid, params: RunParams, w0, w1, v0) -> SystemState:
    geom = _geom_of(w0, w1, grid, params.c_min)
    plate0 = PlateState(w=w0.copy(), w_t=w1.copy(), t=0.0)
    fluid0 = fluid_mod.FluidState(v=v0.copy(),
                                  q=np.zeros((grid.n1, grid.n2, grid.n3)), t=0.0)
    return SystemState(plate=plate0, fluid=fluid0, geom=geom, t=0.0)


def run_simulation(grid: Grid, params: RunParams, state: SystemState,
                   dt: float, t_final: float, cfg: PicardConfig,
                   output_every: int = 1, on_output=None,
                   track_vorticity: bool = False) -> RunResult:
    """March picard_timestep to t_final or to a guarded failure.

    on_output(step, state, report) is called at every output interval;
    partial results are returned (not raised away) when a guard trips.
    """
    solvers = make_solvers(grid, params)
    result = RunResult(times=[], reports=[], picard=[])
    vort = None
    if track_vorticity:
        zeta0 = fluid_mod.ale_vorticity(state.fluid.v, state.geom, grid)
        vort = fluid_mod.VorticityState(zeta=zeta0, theta=zeta0.copy())

    def emit(step, st):
        rep = energy_report(st, params.plate)
        result.times.append(st.t)
        result.reports.append(rep)
        if on_output is not None:
            on_output(step, st, rep)

    emit(0, state)
    nsteps = int(round(t_final / dt))
    for step in range(1, nsteps + 1):
        try:
            if track_vorticity:
                vort = fluid_mod.vorticity_transport_step(
                    vort, state.fluid.v, state.geom, grid, dt,
                    cfl_max=params.cfl_max)
            state, log = picard_timestep(state, params, grid, dt, cfg,
                                         solvers=solvers)
        except NumericsError as exc:
            result.status = "guard"
            result.guard_time = state.t
            result.guard_message = str(exc)
            break
        result.picard.append((step, state.t, log.iterations,
                              log.contraction_ratio,
                              log.diffs[-1][2] if log.diffs else 0.0))
        if step % output_every == 0 or step == nsteps:
            emit(step, state)
    if track_vorticity and vort is not None:
        vort.zeta = fluid_mod.ale_vorticity(state.fluid.v, state.geom, grid)
        result.vorticity = vort
    result.final_state = state
    return result


def nu_sweep(grid: Grid, params: RunParams, make_state, dt, t_final, cfg,
             nu_list, output_every: int = 1):
    """Identical-data runs per damping value; returns per-nu max norms.

    make_state() must build a fresh initial state (the runs must not
    share arrays).  Failed runs are recorded and the sweep continues.
    """
    rows = []
    for nu in nu_list:
        p = RunParams(plate=dc_replace(params.plate, nu=float(nu)),
                      pressure_tol=params.pressure_tol,
                      pressure_max_iter=params.pressure_max_iter,
                      cfl_max=params.cfl_max,
                      divergence_cleanup=params.divergence_cleanup,
                      epsilon_smallness=params.epsilon_smallness,
                      c_min=params.c_min)
        res = run_simulation(grid, p, make_state(), dt, t_final, cfg,
                             output_every=output_every)
        row = {"nu": float(nu), "status": res.status}
        for name in ("v_h35", "w_h5", "wt_h3", "q_h25", "psi_h55",
                     "psit_h35", "E_h45"):
            row["max_" + name] = res.max_over_time(name) if res.reports else np.nan
        rows.append(row)
    spread = {}
    for name in ("max_v_h35", "max_w_h5", "max_wt_h3", "max_q_h25",
                 "max_psi_h55", "max_psit_h35", "max_E_h45"):
        vals = [r[name] for r in rows if r["status"] == "ok"]
        lo = min(vals) if vals else np.nan
        spread[name] = (max(vals) / lo) if vals and lo > 0 else np.nan
    return rows, spread
