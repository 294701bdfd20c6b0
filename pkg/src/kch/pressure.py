"""Variable-coefficient elliptic pressure problem in the fixed channel.

Applying the cofactor-divergence to the transformed momentum equation
gives div(d grad q) = div f in the interior, a Robin condition on the
top wall (the plate equation substituted into the conormal derivative)
and a Neumann condition on the bottom wall.  The coefficient d = F E^T
is a symmetric perturbation of the identity whenever the wall moves
little, so the solve iterates a constant-coefficient problem: each pass
is an independent vertical two-point solve per horizontal Fourier mode,
and the variable part of the operator is fed back as data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, SmallnessError
from .geometry import GeometryState
from .grid import Grid

CONTRACTION_RADIUS = 0.3


@dataclass
class EllipticProblem:
    """Divergence-form data: coefficient d, flux f, and wall data g1 (top), g0."""

    grid: Grid
    d: np.ndarray                 # (3, 3, n1, n2, n3), symmetric
    f: np.ndarray | None          # (3, n1, n2, n3) flux, interior rhs = div f
    g1: np.ndarray                # (n1, n2) Robin data, top
    g0: np.ndarray                # (n1, n2) Neumann data, bottom
    robin_coeff: float            # 1/h on the top wall
    interior_rhs: np.ndarray = None   # precomputed div f (or raw rhs if f is None)
    d_dev: float = field(init=False)

    def __post_init__(self):
        dev = self.d.copy()
        for i in range(3):
            dev[i, i] -= 1.0
        self.d_dev = float(np.abs(dev).max())
        if self.interior_rhs is None:
            self.interior_rhs = _divergence(self.f, self.grid)


def _gradient(q, grid):
    return np.stack([grid.dx1(q), grid.dx2(q), grid.dz_v(q)])


def _divergence(flux, grid):
    return grid.dx1(flux[0]) + grid.dx2(flux[1]) + grid.dz_v(flux[2])


def _apply_dev(d, gradq):
    """(d - I) gradq, contracted over the second index."""
    out = np.empty_like(gradq)
    for j in range(3):
        acc = (d[j, 0] - (j == 0)) * gradq[0]
        acc += (d[j, 1] - (j == 1)) * gradq[1]
        acc += (d[j, 2] - (j == 2)) * gradq[2]
        out[j] = acc
    return out


class VerticalSolver:
    """Per-mode vertical boundary-value solver for the identity coefficient.

    Interior rows carry the 3-point second difference minus |2 pi k|^2;
    the wall rows impose one-sided second-order first derivatives, with
    an optional Robin weight on the top wall.  The wall rows are folded
    into their neighbors once, leaving a tridiagonal system solved by a
    Thomas sweep vectorized over all horizontal modes.

    With robin_coeff == 0 the zero mode is a pure Neumann problem; its
    rhs is projected onto the solvable subspace using the precomputed
    left null vector and the solution is pinned at the bottom node.
    """

    def __init__(self, grid: Grid, robin_coeff: float):
        self.grid = grid
        self.robin_coeff = robin_coeff
        n3, dz = grid.n3, grid.dz
        ksq = grid.ksq[:, :, None]                      # (n1, n2c, 1)
        shape = grid.ksq.shape + (n3,)

        sub = np.zeros(shape)
        dia = np.zeros(shape)
        sup = np.zeros(shape)
        sub[..., 1:-1] = 1.0 / dz ** 2
        sup[..., 1:-1] = 1.0 / dz ** 2
        dia[..., 1:-1] = -2.0 / dz ** 2 - ksq

        # bottom wall row folded with row 1: eliminates the q_2 entry
        dia[..., 0] = -1.0 / dz
        sup[..., 0] = 1.0 / dz - 0.5 * dz * ksq[..., 0]
        # top wall row folded with row n3-2
        sub[..., -1] = -1.0 / dz + 0.5 * dz * ksq[..., 0]
        dia[..., -1] = 1.0 / dz + robin_coeff

        # pure-Neumann columns (every mode whose derivative wavenumber
        # vanishes, i.e. the zero mode and the Nyquist-zeroed ones) are
        # singular: pin the bottom node and project their rhs later
        self._pin_mask = None
        if robin_coeff == 0.0:
            self._pin_mask = grid.ksq == 0.0
            A = np.zeros((n3, n3))
            for j in range(n3):
                if j > 0:
                    A[j, j - 1] = sub[0, 0, j]
                A[j, j] = dia[0, 0, j]
                if j < n3 - 1:
                    A[j, j + 1] = sup[0, 0, j]
            _, _, vt = np.linalg.svd(A.T)
            self._null = vt[-1]
            dia[self._pin_mask, 0] = 1.0
            sup[self._pin_mask, 0] = 0.0

        self.sub, self.dia, self.sup = sub, dia, sup

    def solve_hat(self, rhs_hat: np.ndarray) -> np.ndarray:
        """Thomas sweep for the folded system; rhs_hat shape (n1, n2c, n3)."""
        n3, dz = self.grid.n3, self.grid.dz
        b = rhs_hat.copy()
        b[..., 0] = rhs_hat[..., 0] + 0.5 * dz * rhs_hat[..., 1]
        b[..., -1] = rhs_hat[..., -1] - 0.5 * dz * rhs_hat[..., -2]
        if self._pin_mask is not None:
            r = b[self._pin_mask]
            coef = (r @ self._null) / (self._null @ self._null)
            r -= coef[:, None] * self._null
            r[:, 0] = 0.0
            b[self._pin_mask] = r

        cp = np.empty_like(b)
        dp = np.empty_like(b)
        cp[..., 0] = self.sup[..., 0] / self.dia[..., 0]
        dp[..., 0] = b[..., 0] / self.dia[..., 0]
        for j in range(1, n3):
            den = self.dia[..., j] - self.sub[..., j] * cp[..., j - 1]
            cp[..., j] = self.sup[..., j] / den if j < n3 - 1 else 0.0
            dp[..., j] = (b[..., j] - self.sub[..., j] * dp[..., j - 1]) / den
        q = np.empty_like(b)
        q[..., -1] = dp[..., -1]
        for j in range(n3 - 2, -1, -1):
            q[..., j] = dp[..., j] - cp[..., j] * q[..., j + 1]
        return q

    def solve(self, interior_rhs, g0, g1):
        """Assemble the per-mode rhs from physical-space data and solve."""
        grid = self.grid
        rhs = grid.rfft2(interior_rhs).astype(complex)
        rhs[..., 0] = grid.rfft2(g0)
        rhs[..., -1] = grid.rfft2(g1)
        return grid.irfft2(self.solve_hat(rhs))


class WideNeumannSolver:
    """Per-mode solver for the composite-stencil projection operator.

    The divergence projection inverts -|2 pi k|^2 + Dz Dz, where Dz is
    the full first-derivative matrix (one-sided at the walls): the
    composite appears because the monitored divergence differentiates
    the corrected velocity, which already contains one Dz.  The wall
    rows impose one-sided first derivatives (bottom homogeneous, top
    fed by the lagged conormal correction).  Modes with a vanishing
    derivative wavenumber are singular and handled by a left-null
    projection plus pinning, as in the tridiagonal solver.
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        n3, dz = grid.n3, grid.dz
        D = np.zeros((n3, n3))
        for j in range(1, n3 - 1):
            D[j, j - 1], D[j, j + 1] = -0.5 / dz, 0.5 / dz
        D[0, 0:3] = np.array([-3.0, 4.0, -1.0]) / (2.0 * dz)
        D[-1, -3:] = np.array([1.0, -4.0, 3.0]) / (2.0 * dz)
        W = D @ D

        ksq_flat = grid.ksq.ravel()
        nmodes = ksq_flat.size
        A = np.zeros((nmodes, n3, n3))
        A[:, 1:-1, :] = W[None, 1:-1, :]
        idx = np.arange(1, n3 - 1)
        A[:, idx, idx] -= ksq_flat[:, None]
        A[:, 0, :] = D[0]
        A[:, -1, :] = D[-1]

        self._pin = ksq_flat == 0.0
        A0 = A[np.argmax(self._pin)].copy()
        _, _, vt = np.linalg.svd(A0.T)
        self._null = vt[-1]
        A[self._pin, 0, :] = 0.0
        A[self._pin, 0, 0] = 1.0
        # factor once; every later pass is a batched matrix-vector product
        self._Ainv = np.linalg.inv(A)

    def solve(self, interior_rhs, g0, g1):
        grid = self.grid
        rhs = grid.rfft2(interior_rhs).astype(complex)
        rhs[..., 0] = grid.rfft2(g0)
        rhs[..., -1] = grid.rfft2(g1)
        b = rhs.reshape(-1, grid.n3)
        if self._pin.any():
            r = b[self._pin]
            coef = (r @ self._null) / (self._null @ self._null)
            r -= coef[:, None] * self._null
            r[:, 0] = 0.0
            b[self._pin] = r
        sol = np.einsum("mij,mj->mi", self._Ainv, b)
        return grid.irfft2(sol.reshape(rhs.shape))


def _boundary_correction(d, gradq, which):
    """(d - I)_{3k} d_k q at one wall; which is 0 (bottom) or -1 (top)."""
    s = (slice(None), slice(None), which)
    c = (d[2, 0][s] * gradq[0][s] + d[2, 1][s] * gradq[1][s]
         + (d[2, 2][s] - 1.0) * gradq[2][s])
    return c


@dataclass
class SolveInfo:
    iterations: int
    update_history: list
    contraction_ratio: float


def solve_robin_neumann(problem: EllipticProblem, tol: float = 1e-10,
                        max_iter: int = 200, solver: VerticalSolver = None,
                        q0: np.ndarray = None):
    """Fixed-point solve of the variable-coefficient Robin-Neumann problem.

    Each pass solves the identity-coefficient problem with the deviation
    (d - I) grad q of the previous iterate moved to the right-hand side.
    Stops when the relative sup-norm update drops below tol.
    """
    grid = problem.grid
    if problem.d_dev > CONTRACTION_RADIUS:
        raise SmallnessError(
            f"coefficient deviation ||d - I||_inf = {problem.d_dev:.3g} exceeds "
            f"the contraction radius {CONTRACTION_RADIUS} of the "
            f"identity-perturbation solver")
    if solver is None:
        solver = VerticalSolver(grid, problem.robin_coeff)

    q = np.zeros((grid.n1, grid.n2, grid.n3)) if q0 is None else q0.copy()
    scale_floor = max(float(np.abs(problem.interior_rhs).max()),
                      float(np.abs(problem.g1).max()),
                      float(np.abs(problem.g0).max()), 1e-300)
    history = []
    for it in range(max_iter):
        gradq = _gradient(q, grid)
        dev_flux = _apply_dev(problem.d, gradq)
        rhs = problem.interior_rhs - _divergence(dev_flux, grid)
        g0 = problem.g0 - _boundary_correction(problem.d, gradq, 0)
        g1 = problem.g1 - _boundary_correction(problem.d, gradq, -1)
        q_new = solver.solve(rhs, g0, g1)
        upd = float(np.abs(q_new - q).max())
        history.append(upd)
        q = q_new
        denom = max(float(np.abs(q).max()), history[0], scale_floor * grid.dz ** 2)
        if upd <= tol * denom:
            ratio = history[-1] / history[-2] if len(history) > 1 and history[-2] > 0 else 0.0
            return q, SolveInfo(it + 1, history, ratio)
    ratio = (history[-1] / history[-2]
             if len(history) > 1 and history[-2] > 0 else float("inf"))
    raise ConvergenceError(
        f"pressure fixed point did not reach tol={tol} in {max_iter} passes; "
        f"last update ratio {ratio:.3f}")


def apply_operator(d, q, grid: Grid, robin_coeff: float):
    """Canonical discrete action of the variable-coefficient problem.

    Interior: compact Laplacian plus the divergence of the deviation
    flux (d - I) grad q; this is the operator the fixed point inverts.
    Walls: one-sided conormal functionals, Robin-weighted on top.
    Returns (interior_application, bottom_functional, top_functional).
    """
    gradq = _gradient(q, grid)
    dev_flux = _apply_dev(d, gradq)
    interior = grid.lap2(q) + grid.dzz_v(q) + _divergence(dev_flux, grid)
    bot = gradq[2][:, :, 0] + _boundary_correction(d, gradq, 0)
    top = (gradq[2][:, :, -1] + _boundary_correction(d, gradq, -1)
           + robin_coeff * q[:, :, -1])
    return interior, bot, top


def residual(problem: EllipticProblem, q: np.ndarray) -> float:
    """Relative sup-norm residual of q in the discrete variable problem."""
    interior, bot, top = apply_operator(problem.d, q, problem.grid,
                                        problem.robin_coeff)
    r_int = np.abs(interior - problem.interior_rhs)[:, :, 1:-1].max()
    scale = max(np.abs(problem.interior_rhs).max(), np.abs(interior).max(),
                np.abs(problem.g1).max(), np.abs(problem.g0).max(), 1e-300)
    return float(max(r_int, np.abs(top - problem.g1).max(),
                     np.abs(bot - problem.g0).max()) / scale)


def normalize_surface_mean(q: np.ndarray, grid: Grid):
    """Shift q by a constant so the top-wall trace has zero mean."""
    c = grid.smean(q[:, :, -1])
    return q - c, c


def assemble_pressure_problem(v, geom: GeometryState, plate_state, params,
                              grid: Grid) -> EllipticProblem:
    """Build d, f, g1, g0 from the current velocity, map, and plate state."""
    from . import plate as plate_mod
    from .fluid import advective_terms

    X, Y = advective_terms(v, geom, grid)

    psi_t = geom.psi_t
    dtJ = grid.dz_v(psi_t)
    dtp1 = grid.dx1(psi_t)
    dtp2 = grid.dx2(psi_t)

    f = np.empty((3,) + v[0].shape)
    # dtF rows are (dtJ,0,0), (0,dtJ,0), (-dtp1,-dtp2,0); E rows 1,2 are
    # identity rows, so the slip flux Y enters f[0], f[1] directly.
    f[0] = grid.dealias(dtJ * v[0]) - grid.dealias(geom.J * X[0]) - Y[0]
    f[1] = grid.dealias(dtJ * v[1]) - grid.dealias(geom.J * X[1]) - Y[1]
    f[2] = (grid.dealias(-dtp1 * v[0] - dtp2 * v[1])
            - grid.dealias(-geom.p1 * X[0] - geom.p2 * X[1] + X[2])
            - grid.dealias(geom.E31 * Y[0] + geom.E32 * Y[1] + geom.E33 * Y[2]))

    # wall data: the conormal rhs is the third flux trace; the plate terms
    # enter on the top wall, and the dtF trace vanishes on the rigid bottom.
    plate_part = (plate_mod.elastic_operator(plate_state.w, params, grid)
                  - params.nu * grid.lap2(plate_state.w_t)) / params.h
    g1 = plate_part + f[2][:, :, -1]
    g0 = f[2][:, :, 0].copy()

    return EllipticProblem(grid=grid, d=geom.d_coeff, f=f, g1=g1, g0=g0,
                           robin_coeff=1.0 / params.h)
