"""Transformed Euler momentum step, vorticity transport, and monitors.

The velocity is advanced with an explicit midpoint step; the pressure
problem is re-solved at each stage so the top-wall Robin condition
keeps the plate acceleration consistent.  After each step the wall
conditions are imposed strongly (bottom impermeability, top kinematic
trace in the cofactor contraction) and, optionally, the transformed
divergence is projected out by one extra elliptic solve.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CFLError
from .geometry import GeometryState
from .grid import Grid
from . import pressure as pressure_mod


@dataclass
class FluidState:
    v: np.ndarray            # (3, n1, n2, n3)
    q: np.ndarray            # (n1, n2, n3), last solved pressure
    t: float = 0.0


@dataclass
class VorticityState:
    zeta: np.ndarray         # (3, n1, n2, n3) curl contraction of v
    theta: np.ndarray        # (3, n1, n2, n3) independently transported copy


def ale_gradients(f, geom: GeometryState, grid: Grid):
    """The three transformed derivatives of a scalar: E_kj d_k f, j = 1..3."""
    fz = grid.dz_v(f)
    g1 = grid.dx1(f) + grid.dealias(geom.E31 * fz)
    g2 = grid.dx2(f) + grid.dealias(geom.E32 * fz)
    g3 = grid.dealias(geom.E33 * fz)
    return g1, g2, g3, fz


def advective_terms(v, geom: GeometryState, grid: Grid):
    """Horizontal transport X_i and raw vertical slip flux Y_i.

    X_i = v1 (E_k1 d_k v_i) + v2 (E_k2 d_k v_i); Y_i = (v3 - psi_t) d3 v_i.
    The momentum equation uses X + Y/J; the pressure data contracts Y
    with the rows of E.
    """
    slip = v[2] - geom.psi_t
    X, Y = [], []
    for i in range(3):
        g1, g2, _, fz = ale_gradients(v[i], geom, grid)
        X.append(grid.dealias(v[0] * g1) + grid.dealias(v[1] * g2))
        Y.append(grid.dealias(slip * fz))
    return X, Y


def momentum_rhs(v, q, geom: GeometryState, grid: Grid) -> np.ndarray:
    """Right side of the transformed momentum equation for all components."""
    X, Y = advective_terms(v, geom, grid)
    qz = grid.dz_v(q)
    pg1 = grid.dx1(q) + grid.dealias(geom.E31 * qz)
    pg2 = grid.dx2(q) + grid.dealias(geom.E32 * qz)
    pg3 = grid.dealias(geom.E33 * qz)
    out = np.empty_like(v)
    out[0] = -(X[0] + grid.dealias(Y[0] / geom.J) + pg1)
    out[1] = -(X[1] + grid.dealias(Y[1] / geom.J) + pg2)
    out[2] = -(X[2] + grid.dealias(Y[2] / geom.J) + pg3)
    return out


def ale_divergence(v, geom: GeometryState, grid: Grid) -> np.ndarray:
    """Transformed divergence E_ki d_k v_i (zero for admissible velocities)."""
    d1 = grid.dx1(v[0]) + grid.dealias(geom.E31 * grid.dz_v(v[0]))
    d2 = grid.dx2(v[1]) + grid.dealias(geom.E32 * grid.dz_v(v[1]))
    d3 = grid.dealias(geom.E33 * grid.dz_v(v[2]))
    return d1 + d2 + d3


def ale_vorticity(v, geom: GeometryState, grid: Grid) -> np.ndarray:
    """Curl contraction zeta_i = eps_ijk E_mj d_m v_k."""
    g = [ale_gradients(v[i], geom, grid)[:3] for i in range(3)]
    zeta = np.empty_like(v)
    zeta[0] = g[2][1] - g[1][2]
    zeta[1] = g[0][2] - g[2][0]
    zeta[2] = g[1][0] - g[0][1]
    return zeta


def impose_boundary_conditions(v, geom_top: GeometryState, w_t: np.ndarray):
    """Strong wall conditions: v3 = 0 below, cofactor trace = w_t above."""
    v[2][:, :, 0] = 0.0
    v[2][:, :, -1] = (w_t - geom_top.F31_top * v[0][:, :, -1]
                      - geom_top.F32_top * v[1][:, :, -1])
    return v


def interface_residual(v, geom: GeometryState, w_t: np.ndarray) -> float:
    trace = (geom.F31_top * v[0][:, :, -1] + geom.F32_top * v[1][:, :, -1]
             + v[2][:, :, -1])
    return float(np.abs(trace - w_t).max())


def cfl_rate(v, geom: GeometryState, grid: Grid) -> float:
    """Largest advective speed over spacing, all directions."""
    r1 = np.abs(v[0]).max() * grid.n1
    r2 = np.abs(v[1]).max() * grid.n2
    r3 = np.abs((v[2] - geom.psi_t) / geom.J).max() / grid.dz
    return float(max(r1, r2, r3))


def check_cfl(v, geom, grid, dt, cfl_max):
    rate = cfl_rate(v, geom, grid)
    if rate * dt > cfl_max:
        raise CFLError(rate, dt, cfl_max)


def divergence_cleanup(v, geom: GeometryState, grid: Grid,
                       solver: pressure_mod.VerticalSolver = None,
                       div_tol: float = 2e-10, max_iter: int = 40):
    """Project out the transformed divergence of the velocity.

    Finds phi with div_E(E grad phi) = div_E(v) at interior nodes, zero
    vertical slope on the bottom wall, and zero conormal flux on top
    (the correction E grad phi then leaves both wall conditions intact),
    then subtracts E grad phi.  The fixed point inverts the flat
    Laplacian and feeds back the true discrete operator; it stops when
    the interior divergence residual reaches div_tol or stagnates.

    The wall rows of the divergence are not targeted: with the wall
    traces pinned by the strong conditions there are no degrees of
    freedom left for them, and they carry the one-sided-stencil
    truncation of the true velocity profile.
    """
    if solver is None:
        solver = pressure_mod.WideNeumannSolver(grid)
    target = geom.J * ale_divergence(v, geom, grid)
    d = geom.d_coeff
    phi = np.zeros_like(v[0])
    zeros2 = np.zeros((grid.n1, grid.n2))
    resid_prev, history = None, []
    for it in range(max_iter):
        corr = np.stack(ale_gradients(phi, geom, grid)[:3])
        op = geom.J * ale_divergence(corr, geom, grid)
        resid = float(np.abs(target - op)[:, :, 1:-1].max())
        history.append(resid)
        if resid <= div_tol:
            break
        if resid_prev is not None and resid >= 0.9 * resid_prev:
            break
        resid_prev = resid
        flat = grid.lap2(phi) + grid.dz_v(grid.dz_v(phi))
        rhs = target - (op - flat)
        gradphi = np.stack([grid.dx1(phi), grid.dx2(phi), grid.dz_v(phi)])
        g1 = -pressure_mod._boundary_correction(d, gradphi, -1)
        phi = solver.solve(rhs, zeros2, g1)
    g1c, g2c, g3c, _ = ale_gradients(phi, geom, grid)
    v[0] -= g1c
    v[1] -= g2c
    v[2] -= g3c
    return v, pressure_mod.SolveInfo(len(history), history, 0.0)


def fluid_step(state: FluidState, geoms, plates, wt_end, params, grid: Grid,
               dt: float, pressure_tol=1e-10, pressure_max_iter=200,
               cfl_max=0.5, cleanup=True, robin_solver=None,
               neumann_solver=None):
    """Two-stage explicit midpoint step with a pressure solve per stage.

    geoms = (geom at t, geom at t+dt/2, geom at t+dt) for the current
    plate iterate; plates = (plate state at t, plate state at t+dt/2).
    Returns the new fluid state, the midpoint pressure, and solver info.
    """
    geom_t, geom_mid, geom_end = geoms
    plate_t, plate_mid = plates
    v = state.v
    check_cfl(v, geom_t, grid, dt, cfl_max)

    prob1 = pressure_mod.assemble_pressure_problem(v, geom_t, plate_t, params, grid)
    q1, info1 = pressure_mod.solve_robin_neumann(
        prob1, tol=pressure_tol, max_iter=pressure_max_iter,
        solver=robin_solver, q0=state.q)
    k1 = momentum_rhs(v, q1, geom_t, grid)
    v_half = v + 0.5 * dt * k1
    impose_boundary_conditions(v_half, geom_mid, plate_mid.w_t)

    prob2 = pressure_mod.assemble_pressure_problem(v_half, geom_mid, plate_mid,
                                                   params, grid)
    q2, info2 = pressure_mod.solve_robin_neumann(
        prob2, tol=pressure_tol, max_iter=pressure_max_iter,
        solver=robin_solver, q0=q1)
    k2 = momentum_rhs(v_half, q2, geom_mid, grid)
    v_new = v + dt * k2
    impose_boundary_conditions(v_new, geom_end, wt_end)

    cleanup_info = None
    if cleanup:
        v_new, cleanup_info = divergence_cleanup(v_new, geom_end, grid,
                                                 solver=neumann_solver)
        impose_boundary_conditions(v_new, geom_end, wt_end)

    return (FluidState(v=v_new, q=q2, t=state.t + dt), q2,
            {"stage1": info1, "stage2": info2, "cleanup": cleanup_info})


def transport_rhs(theta, v, geom: GeometryState, grid: Grid) -> np.ndarray:
    """Advection plus stretching for the transported vorticity copy."""
    vgrads = [ale_gradients(v[i], geom, grid)[:3] for i in range(3)]
    slip = grid.dealias((v[2] - geom.psi_t) * geom.E33)
    out = np.empty_like(theta)
    for i in range(3):
        tz = grid.dz_v(theta[i])
        adv = (grid.dealias(v[0] * (grid.dx1(theta[i]) + grid.dealias(geom.E31 * tz)))
               + grid.dealias(v[1] * (grid.dx2(theta[i]) + grid.dealias(geom.E32 * tz)))
               + grid.dealias(slip * tz))
        stretch = (grid.dealias(theta[0] * vgrads[i][0])
                   + grid.dealias(theta[1] * vgrads[i][1])
                   + grid.dealias(theta[2] * vgrads[i][2]))
        out[i] = -adv + stretch
    return out


def vorticity_transport_step(vort: VorticityState, v, geom: GeometryState,
                             grid: Grid, dt: float, cfl_max: float = 0.5
                             ) -> VorticityState:
    """Midpoint step of the transported copy with frozen velocity and map."""
    check_cfl(v, geom, grid, dt, cfl_max)
    th = vort.theta
    k1 = transport_rhs(th, v, geom, grid)
    k2 = transport_rhs(th + 0.5 * dt * k1, v, geom, grid)
    return VorticityState(zeta=vort.zeta, theta=th + dt * k2)


def divcurl_norms(v, geom: GeometryState, grid: Grid) -> dict:
    """Diagnostic pieces of the velocity-recovery inequality."""
    from .diagnostics import sobolev_proxy, vector_proxy

    zeta = ale_vorticity(v, geom, grid)
    div = ale_divergence(v, geom, grid)
    tr_bot = sobolev_proxy(v[2][:, :, 0], grid, 3.0)
    tr_top = sobolev_proxy(v[2][:, :, -1], grid, 3.0)
    return {
        "curl_norm": vector_proxy(zeta, grid, 2.5),
        "div_norm": sobolev_proxy(div, grid, 2.5),
        "trace_norm": float(np.hypot(tr_bot, tr_top)),
        "l2_norm": float(np.sqrt(sum(grid.vl2(c) ** 2 for c in v))),
        "h35_proxy": vector_proxy(v, grid, 3.5),
    }


def stretching_term(theta, v, geom, grid):
    """Exposed for tests: theta_k E_mk d_m v_i for each i."""
    vgrads = [ale_gradients(v[i], geom, grid)[:3] for i in range(3)]
    return np.stack([
        grid.dealias(theta[0] * vgrads[i][0])
        + grid.dealias(theta[1] * vgrads[i][1])
        + grid.dealias(theta[2] * vgrads[i][2])
        for i in range(3)])
