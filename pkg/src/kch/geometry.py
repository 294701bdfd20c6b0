"""Domain map built from the plate displacement.

The moving channel is pulled back to the reference channel by the map
eta(x) = (x1, x2, psi(x)), where psi is the harmonic extension of 1+w
with psi=0 on the bottom wall.  The extension is evaluated from the
closed-form solution of the per-mode two-point boundary value problem,
so it is harmonic up to sampling.  E = (grad eta)^{-1}, J = d3 psi, and
F = J E is the transpose of the cofactor matrix of grad eta; its
columns are divergence free (the cofactor identity), which the mixed
spectral/finite-difference scheme reproduces exactly because the
horizontal spectral derivatives commute with any vertical stencil.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import sobolev_proxy
from .errors import NondegeneracyError
from .grid import Grid

C_MIN_DEFAULT = 0.1


def _extension_profiles(grid: Grid) -> np.ndarray:
    """Vertical profile of each horizontal mode of the extension.

    Mode 0 extends linearly; mode k extends as sinh(|k~| x3)/sinh(|k~|),
    evaluated in the exponential-difference form whose exponents are all
    <= 0, so it never overflows and is monotone in x3.
    """
    if grid._ext_profiles is None:
        kap = np.sqrt(grid.ksq_full)[:, :, None]
        z = grid.x3[None, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            num = np.exp(kap * (z - 1.0)) - np.exp(-kap * (z + 1.0))
            den = 1.0 - np.exp(-2.0 * kap)
            prof = num / den
        lin = np.broadcast_to(z, prof.shape)
        prof = np.where(kap == 0.0, lin, prof)
        grid._ext_profiles = prof
    return grid._ext_profiles


def harmonic_extension(w: np.ndarray, grid: Grid) -> np.ndarray:
    """Extension psi of 1+w: psi(.,0)=0, psi(.,1)=1+w, harmonic per mode."""
    if not np.all(np.isfinite(w)):
        raise ValueError("displacement contains non-finite values")
    return grid.x3v + extension_rate(w, grid)


def extension_rate(g: np.ndarray, grid: Grid) -> np.ndarray:
    """Extension with homogeneous walls offset: maps w_t to psi_t.

    The closed-form extension is linear in its boundary data, so the
    time derivative of the extension of w is the extension of w_t.
    """
    if not np.all(np.isfinite(g)):
        raise ValueError("boundary data contains non-finite values")
    gh = grid.rfft2(g)
    psih = gh[:, :, None] * _extension_profiles(grid)
    return grid.irfft2(psih)


@dataclass
class GeometryState:
    """Map data: psi, psi_t, the horizontal slopes, and J = d3 psi."""

    grid: Grid
    psi: np.ndarray
    psi_t: np.ndarray
    p1: np.ndarray          # d1 psi
    p2: np.ndarray          # d2 psi
    J: np.ndarray           # d3 psi (vertical finite differences)
    _E: np.ndarray = field(default=None, repr=False)
    _F: np.ndarray = field(default=None, repr=False)

    # entries used pointwise by the fluid and pressure modules
    @property
    def E31(self):
        return -self.p1 / self.J

    @property
    def E32(self):
        return -self.p2 / self.J

    @property
    def E33(self):
        return 1.0 / self.J

    @property
    def F31_top(self):
        return -self.p1[:, :, -1]

    @property
    def F32_top(self):
        return -self.p2[:, :, -1]

    @property
    def E(self) -> np.ndarray:
        """Full inverse-gradient matrix, shape (3, 3, n1, n2, n3)."""
        if self._E is None:
            shp = self.psi.shape
            E = np.zeros((3, 3) + shp)
            E[0, 0] = E[1, 1] = 1.0
            E[2, 0] = self.E31
            E[2, 1] = self.E32
            E[2, 2] = self.E33
            self._E = E
        return self._E

    @property
    def F(self) -> np.ndarray:
        """Cofactor-transpose matrix, shape (3, 3, n1, n2, n3)."""
        if self._F is None:
            shp = self.psi.shape
            F = np.zeros((3, 3) + shp)
            F[0, 0] = F[1, 1] = self.J
            F[2, 0] = -self.p1
            F[2, 1] = -self.p2
            F[2, 2] = 1.0
            self._F = F
        return self._F

    @property
    def epsilon_report(self):
        """Sup norms of (E - I, F - I, J - 1), the smallness quantities."""
        sup_e = max(float(np.abs(self.E31).max()), float(np.abs(self.E32).max()),
                    float(np.abs(self.E33 - 1.0).max()))
        sup_j = float(np.abs(self.J - 1.0).max())
        sup_f = max(sup_j, float(np.abs(self.p1).max()),
                    float(np.abs(self.p2).max()))
        return sup_e, sup_f, sup_j

    @property
    def d_coeff(self) -> np.ndarray:
        """Symmetric coefficient matrix d_jk = F_ji E_ki of the pressure problem."""
        shp = self.psi.shape
        d = np.zeros((3, 3) + shp)
        d[0, 0] = d[1, 1] = self.J
        d[0, 2] = d[2, 0] = -self.p1
        d[1, 2] = d[2, 1] = -self.p2
        d[2, 2] = (1.0 + self.p1 ** 2 + self.p2 ** 2) / self.J
        return d


def ale_matrices(psi: np.ndarray, psi_t: np.ndarray, grid: Grid,
                 c_min: float = C_MIN_DEFAULT) -> GeometryState:
    """Assemble the map state; rejects degenerate maps (J <= c_min)."""
    J = grid.dz_v(psi)
    if J.min() <= c_min:
        idx = np.unravel_index(np.argmin(J), J.shape)
        raise NondegeneracyError(float(J[idx]), tuple(int(i) for i in idx), c_min)
    return GeometryState(grid=grid, psi=psi, psi_t=psi_t,
                         p1=grid.dx1(psi), p2=grid.dx2(psi), J=J)


def geometry_from_plate(w: np.ndarray, w_t: np.ndarray, grid: Grid,
                        c_min: float = C_MIN_DEFAULT) -> GeometryState:
    psi = harmonic_extension(w, grid)
    psi_t = extension_rate(w_t, grid)
    return ale_matrices(psi, psi_t, grid, c_min)


def grad_eta_times_E_residual(geom: GeometryState) -> float:
    """max |grad(eta) E - I|; an algebraic identity, limited by roundoff."""
    g = geom
    r = 0.0
    # row 3 of grad(eta) is (p1, p2, J); rows 1,2 are identity rows exactly
    r = max(r, float(np.abs(g.p1 + g.J * g.E31).max()))
    r = max(r, float(np.abs(g.p2 + g.J * g.E32).max()))
    r = max(r, float(np.abs(g.J * g.E33 - 1.0).max()))
    return r


def F_minus_JE_residual(geom: GeometryState) -> float:
    """max |F - J E| entrywise; exact up to roundoff by construction."""
    g = geom
    r = max(
        float(np.abs(-g.p1 - g.J * g.E31).max()),
        float(np.abs(-g.p2 - g.J * g.E32).max()),
        float(np.abs(1.0 - g.J * g.E33).max()),
    )
    return r


def piola_residual(geom: GeometryState) -> np.ndarray:
    """Per-column sup of |d_i F_ij|, j = 1, 2, 3.

    Columns 1 and 2 cancel exactly because the same vertical stencil
    produces J and the vertical derivative in the divergence; column 3
    is the vertical derivative of the constant entry F33 = 1.
    """
    grid = geom.grid
    r1 = np.abs(grid.dx1(geom.J) + grid.dz_v(-geom.p1)).max()
    r2 = np.abs(grid.dx2(geom.J) + grid.dz_v(-geom.p2)).max()
    r3 = np.abs(grid.dz_v(np.ones_like(geom.J))).max()
    return np.array([float(r1), float(r2), float(r3)])


def laplacian_residual(psi: np.ndarray, grid: Grid) -> float:
    """Interior sup of the discrete Laplacian of psi (harmonicity check)."""
    res = grid.lap2(psi) + grid.dzz_v(psi)
    return float(np.abs(res[:, :, 1:-1]).max())


@dataclass
class SmallnessReport:
    sup_E: float
    sup_F: float
    sup_J: float
    proxy_E: float
    proxy_F: float
    proxy_J: float
    epsilon: float
    within: bool

    def values(self):
        return (self.sup_E, self.sup_F, self.sup_J,
                self.proxy_E, self.proxy_F, self.proxy_J)


def smallness_report(geom: GeometryState, epsilon: float) -> SmallnessReport:
    """Sup and H^2.5-proxy sizes of E-I, F-I, J-1 against the budget epsilon.

    The within flag is determined by the measured sup norms; the proxy
    norms are reported for monitoring (they weight high frequencies far
    more heavily, so a fixed budget for them would depend on the grid).
    """
    g, grid = geom, geom.grid
    e_entries = [g.E31, g.E32, g.E33 - 1.0]
    f_entries = [g.J - 1.0, g.J - 1.0, -g.p1, -g.p2]
    sup_E = max(float(np.abs(a).max()) for a in e_entries)
    sup_F = max(float(np.abs(a).max()) for a in f_entries)
    sup_J = float(np.abs(g.J - 1.0).max())
    proxy_E = float(np.sqrt(sum(sobolev_proxy(a, grid, 2.5) ** 2 for a in e_entries)))
    proxy_F = float(np.sqrt(sum(sobolev_proxy(a, grid, 2.5) ** 2 for a in f_entries)))
    proxy_J = sobolev_proxy(g.J - 1.0, grid, 2.5)
    vals = (sup_E, sup_F, sup_J, proxy_E, proxy_F, proxy_J)
    return SmallnessReport(*vals, epsilon=epsilon,
                           within=all(v <= epsilon for v in vals[:3]))
