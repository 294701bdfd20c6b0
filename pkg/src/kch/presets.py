"""Registry of start-up data sets.

Every preset returns (w0, w1, v0) that passes the compatibility gate
exactly: velocities are built from discrete curls or from vertical
profiles that the one-sided second-order stencils differentiate
exactly, so the discrete divergence vanishes to roundoff.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import Grid, TWO_PI, random_surface


def _zero(grid: Grid, amplitude, seed, kmax):
    z2 = np.zeros((grid.n1, grid.n2))
    return z2, z2.copy(), np.zeros((3, grid.n1, grid.n2, grid.n3))


def _single_mode_plate(grid: Grid, amplitude, seed, kmax):
    """Plate velocity a cos(2 pi x1) with its potential-flow response.

    The velocity is the discrete curl of the stream function
    sin(2 pi x1) sinh(2 pi x3), i.e. the irrotational field a rigid wall
    impulse would induce, so the vertical profiles start at their
    natural hyperbolic shape and the discrete divergence vanishes to
    roundoff by stencil commutation.
    """
    a = amplitude
    x1 = grid.x1[:, None]
    w1 = a * np.cos(TWO_PI * x1) * np.ones((1, grid.n2))
    x1v = grid.x1[:, None, None]
    z = grid.x3v
    c = a / (TWO_PI * np.sinh(TWO_PI))
    psi_stream = c * np.sin(TWO_PI * x1v) * np.sinh(TWO_PI * z) * np.ones((1, grid.n2, 1))
    v = np.zeros((3, grid.n1, grid.n2, grid.n3))
    v[0] = -grid.dz_v(psi_stream)
    v[2] = grid.dx1(psi_stream)
    return np.zeros_like(w1), w1, v


def _shear_flow(grid: Grid, amplitude, seed, kmax):
    v = np.zeros((3, grid.n1, grid.n2, grid.n3))
    v[0] = amplitude * np.sin(TWO_PI * grid.x2)[None, :, None]
    z2 = np.zeros((grid.n1, grid.n2))
    return z2, z2.copy(), v


def _random_bandlimited(grid: Grid, amplitude, seed, kmax):
    """Discrete curl of a random band-limited potential with x3^2 profiles."""
    rng = np.random.default_rng(seed)
    a1 = random_surface(grid, rng, kmax, amplitude, zero_mean=False)
    a2 = random_surface(grid, rng, kmax, amplitude, zero_mean=False)
    a3 = random_surface(grid, rng, kmax, amplitude, zero_mean=False)
    z = grid.x3v
    A1 = a1[:, :, None] * z ** 2
    A2 = a2[:, :, None] * z ** 2
    A3 = a3[:, :, None] * z
    v = np.empty((3, grid.n1, grid.n2, grid.n3))
    v[0] = grid.dx2(A3) - grid.dz_v(A2)
    v[1] = grid.dz_v(A1) - grid.dx1(A3)
    v[2] = grid.dx1(A2) - grid.dx2(A1)
    m = np.abs(v).max()
    if m > 0:
        v *= amplitude / m
    w1 = v[2][:, :, -1].copy()
    return np.zeros((grid.n1, grid.n2)), w1, v


REGISTRY = {
    "zero": _zero,
    "single_mode_plate": _single_mode_plate,
    "shear_flow": _shear_flow,
    "random_bandlimited": _random_bandlimited,
}


def build_initial_data(name: str, grid: Grid, amplitude: float = 1e-3,
                       seed: int = 0, kmax: int = 3):
    try:
        builder = REGISTRY[name]
    except KeyError:
        raise ConfigError(
            f"unknown preset {name!r}; registered: {sorted(REGISTRY)}") from None
    return builder(grid, amplitude, seed, kmax)
