"""Norm proxies, energy functionals, and the runtime a-priori monitor.

The Sobolev proxies combine the horizontal multiplier (1 + |2 pi k|^2)^s
with integer-order vertical finite differences.  They are consistent
discrete norms used to compare a trajectory against its own initial
data; no claim is made that they equal the continuum fractional norms.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .grid import Grid

# column order of the diagnostics CSV, after the leading time column
NORM_FIELDS = (
    "v_h35", "w_h5", "wt_h3", "q_h25", "psi_h55", "psit_h35", "E_h45",
    "E_minus_I_sup", "J_minus_1_sup", "kinetic", "koiter", "total_energy",
    "interface_residual", "piola_residual",
)


def sobolev_proxy(field: np.ndarray, grid: Grid, s: float, vertical_order: int = 2) -> float:
    """Horizontal-multiplier Sobolev norm proxy of one scalar field.

    Surface fields (ndim 2): sqrt of sum over modes of (1+|2 pi k|^2)^s |fhat|^2.
    Volume fields (ndim 3): graded mixed layers, each vertical derivative
    trading one power of the horizontal multiplier, so the total weight of
    every layer is s derivatives: (1+|k~|^2)^(s-o) |d_z^o f|^2 for o up to
    ``vertical_order``, with trapezoidal quadrature in x3.
    """
    if s < 0:
        raise ValueError("order s must be >= 0")
    if vertical_order not in (0, 1, 2):
        raise ValueError("vertical_order must be 0, 1 or 2")
    colw = grid.rfft_weights[None, :]
    norm = 1.0 / (grid.n1 * grid.n2) ** 2
    if field.ndim == 2:
        mult = (1.0 + grid.ksq_full) ** s
        fh = grid.rfft2(field)
        total = np.sum(mult * colw * np.abs(fh) ** 2) * norm
        return float(np.sqrt(total))
    layers = [field]
    if vertical_order >= 1:
        layers.append(grid.dz_v(field))
    if vertical_order >= 2:
        layers.append(grid.dzz_v(field))
    total = 0.0
    for o, g in enumerate(layers):
        mult = (1.0 + grid.ksq_full) ** (s - o)
        gh = grid.rfft2(g)
        e = np.sum(np.abs(gh) ** 2 * colw[..., None] * mult[..., None], axis=(0, 1))
        total += float(e @ grid._zweights) * norm
    return float(np.sqrt(total))


def vector_proxy(components, grid: Grid, s: float, vertical_order: int = 2) -> float:
    return float(np.sqrt(sum(
        sobolev_proxy(c, grid, s, vertical_order) ** 2 for c in components)))


@dataclass
class NormReport:
    v_h35: float
    w_h5: float
    wt_h3: float
    q_h25: float
    psi_h55: float
    psit_h35: float
    E_h45: float
    E_minus_I_sup: float
    J_minus_1_sup: float
    kinetic: float
    koiter: float
    total_energy: float
    interface_residual: float
    piola_residual: float

    def as_row(self):
        return [getattr(self, name) for name in NORM_FIELDS]

    def as_dict(self):
        return {name: getattr(self, name) for name in NORM_FIELDS}


assert tuple(f.name for f in fields(NormReport)) == NORM_FIELDS


def energy_report(state, params) -> NormReport:
    """Fill every NormReport entry from the current coupled state."""
    from . import plate as plate_mod
    from .geometry import piola_residual

    grid = state.geom.grid
    g = state.geom
    v = state.fluid.v
    w, w_t = state.plate.w, state.plate.w_t

    kinetic = 0.5 * grid.vmean(g.J * (v[0] ** 2 + v[1] ** 2 + v[2] ** 2))
    koiter = plate_mod.koiter_energy(w, params, grid)
    plate_kin = 0.5 * params.h * grid.sl2(w_t) ** 2

    e_dev = np.maximum(np.abs(g.E31), np.abs(g.E32))
    e_dev = np.maximum(e_dev, np.abs(g.E33 - 1.0))
    trace = g.F31_top * v[0][:, :, -1] + g.F32_top * v[1][:, :, -1] + v[2][:, :, -1]

    return NormReport(
        v_h35=vector_proxy(v, grid, 3.5),
        w_h5=sobolev_proxy(w, grid, 5.0),
        wt_h3=sobolev_proxy(w_t, grid, 3.0),
        q_h25=sobolev_proxy(state.fluid.q, grid, 2.5),
        psi_h55=sobolev_proxy(g.psi, grid, 5.5),
        psit_h35=sobolev_proxy(g.psi_t, grid, 3.5),
        E_h45=vector_proxy(
            [g.E[i, j] for i in range(3) for j in range(3)], grid, 4.5),
        E_minus_I_sup=float(e_dev.max()),
        J_minus_1_sup=float(np.abs(g.J - 1.0).max()),
        kinetic=kinetic,
        koiter=koiter,
        total_energy=kinetic + plate_kin + koiter,
        interface_residual=float(np.abs(trace - w_t).max()),
        piola_residual=float(piola_residual(g).max()),
    )


@dataclass
class MonitorResult:
    passed: bool
    margins: dict
    bound: float


# quantities the a-priori monitor compares against C0 * M
MONITORED = ("v_h35", "w_h5", "wt_h3", "psi_h55", "psit_h35", "E_h45")


def apriori_monitor(report: NormReport, M: float, C0: float = 10.0) -> MonitorResult:
    """Check the monitored norms against C0 * M; margins are value / bound."""
    bound = C0 * max(M, 1.0)
    margins = {name: getattr(report, name) / bound for name in MONITORED}
    return MonitorResult(passed=all(m <= 1.0 for m in margins.values()),
                         margins=margins, bound=bound)
