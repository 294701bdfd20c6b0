import numpy as np
import pytest

from kch.errors import NondegeneracyError
from kch.grid import Grid, random_surface
from kch import geometry as geo


def grid32():
    return Grid(32, 32, 33)


def single_mode(grid, a=0.1):
    return a * np.cos(2 * np.pi * grid.x1)[:, None] * np.ones((1, grid.n2))


def test_flat_extension_is_linear_profile():
    g = grid32()
    psi = geo.harmonic_extension(np.zeros((g.n1, g.n2)), g)
    assert np.abs(psi - g.x3v).max() == 0.0


def test_constant_displacement_scales_linear_profile():
    g = grid32()
    c = 0.07
    psi = geo.harmonic_extension(np.full((g.n1, g.n2), c), g)
    assert np.abs(psi - (1 + c) * g.x3v).max() < 1e-14


def test_single_mode_extension_matches_closed_form():
    g = grid32()
    psi = geo.harmonic_extension(single_mode(g), g)
    exact = g.x3v + 0.1 * np.cos(2 * np.pi * g.x1)[:, None, None] \
        * (np.sinh(2 * np.pi * g.x3) / np.sinh(2 * np.pi))[None, None, :]
    assert np.abs(psi - exact).max() < 1e-13


def test_extension_rejects_non_finite_input():
    g = grid32()
    w = np.zeros((g.n1, g.n2))
    w[0, 0] = np.nan
    with pytest.raises(ValueError):
        geo.harmonic_extension(w, g)


def test_extension_is_linear_in_boundary_data():
    g = grid32()
    rng = np.random.default_rng(7)
    w1 = random_surface(g, rng, 5, 0.05)
    w2 = random_surface(g, rng, 5, 0.05)
    lhs = geo.harmonic_extension(w1 + w2, g) - g.x3v
    rhs = (geo.harmonic_extension(w1, g) - g.x3v) + (geo.harmonic_extension(w2, g) - g.x3v)
    assert np.abs(lhs - rhs).max() < 1e-14


def test_extension_commutes_with_time_derivative():
    # psi_t from the rate extension vs a centered difference of extensions
    g = grid32()
    rng = np.random.default_rng(3)
    shape = random_surface(g, rng, 4, 1.0)

    def w_of_t(t):
        return 0.05 * np.sin(3.0 * t) * shape

    t0, dt = 0.4, 1e-5
    rate = geo.extension_rate(0.05 * 3.0 * np.cos(3.0 * t0) * shape, g)
    fd = (geo.harmonic_extension(w_of_t(t0 + dt), g)
          - geo.harmonic_extension(w_of_t(t0 - dt), g)) / (2 * dt)
    assert np.abs(rate - fd).max() < 1e-8


def test_flat_matrices_are_identity():
    g = grid32()
    gm = geo.geometry_from_plate(np.zeros((g.n1, g.n2)), np.zeros((g.n1, g.n2)), g)
    assert np.abs(gm.J - 1.0).max() == 0.0
    assert np.abs(gm.E[2, 0]).max() == 0.0
    assert np.abs(gm.F[2, 1]).max() == 0.0
    assert geo.piola_residual(gm).max() == 0.0


def test_inverse_and_cofactor_identities_random_field():
    g = grid32()
    rng = np.random.default_rng(11)
    w = random_surface(g, rng, 6, 0.01)
    gm = geo.geometry_from_plate(w, np.zeros_like(w), g)
    assert geo.grad_eta_times_E_residual(gm) <= 1e-12
    assert geo.F_minus_JE_residual(gm) <= 1e-12


def test_cofactor_entry_matches_mode_derivative():
    g = grid32()
    gm = geo.geometry_from_plate(single_mode(g), np.zeros((g.n1, g.n2)), g)
    expected = 0.1 * 2 * np.pi * np.sin(2 * np.pi * g.x1)[:, None, None] \
        * (np.sinh(2 * np.pi * g.x3) / np.sinh(2 * np.pi))[None, None, :]
    assert np.abs(gm.F[2, 0] - expected).max() < 1e-12


def test_nondegeneracy_rejection_names_worst_node():
    g = grid32()
    with pytest.raises(NondegeneracyError) as err:
        geo.geometry_from_plate(single_mode(g, a=-0.95), np.zeros((g.n1, g.n2)), g)
    assert err.value.value <= 0.1
    assert len(err.value.node) == 3


def test_piola_columns_vanish_to_roundoff():
    g = grid32()
    rng = np.random.default_rng(5)
    w = random_surface(g, rng, 3, 0.02)
    gm = geo.geometry_from_plate(w, np.zeros_like(w), g)
    r = geo.piola_residual(gm)
    scale = max(1.0, np.abs(g.dx1(gm.J)).max(), np.abs(g.dx2(gm.J)).max())
    assert r[0] <= 1e-12 * scale and r[1] <= 1e-12 * scale
    assert r[2] == 0.0  # vertical derivative of the constant column


def test_laplacian_residual_second_order_in_dz():
    res = []
    for n3 in (33, 65):
        g = Grid(32, 32, n3)
        psi = geo.harmonic_extension(single_mode(g), g)
        res.append(geo.laplacian_residual(psi, g))
    ratio = res[0] / res[1]
    assert 3.0 <= ratio <= 5.0


def test_smallness_scales_linearly_in_amplitude():
    g = grid32()
    rng = np.random.default_rng(2)
    shape = random_surface(g, rng, 4, 1.0)
    reps = []
    for a in (2e-3, 1e-3):
        gm = geo.geometry_from_plate(a * shape, np.zeros_like(shape), g)
        reps.append(geo.smallness_report(gm, 0.25))
    for big, small in zip(reps[0].values(), reps[1].values()):
        assert 1.8 <= big / small <= 2.2


def test_smallness_flat_state_and_flag():
    g = grid32()
    z = np.zeros((g.n1, g.n2))
    gm = geo.geometry_from_plate(z, z, g)
    rep = geo.smallness_report(gm, 1e-12)
    assert rep.within and all(v == 0.0 for v in rep.values())
    # measured sup norms decide the flag
    gm = geo.geometry_from_plate(single_mode(g), z, g)
    rep = geo.smallness_report(gm, 0.01)
    assert rep.within == (max(rep.values()[:3]) <= 0.01)
