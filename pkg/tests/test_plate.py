import numpy as np
import pytest

from kch.grid import Grid, random_surface
from kch import plate as pl


def grid32():
    return Grid(32, 32, 9)


def cos_mode(grid, a=1.0):
    return a * np.cos(2 * np.pi * grid.x1)[:, None] * np.ones((1, grid.n2))


def test_tensor_coefficients():
    p = pl.PlateParams(h=2.0, lam=3.0, mu=0.5)
    assert p.c1 == pytest.approx(4 * 3.0 * 0.5 / (3.0 + 2 * 0.5))
    assert p.c2 == pytest.approx(2.0)


def test_params_validation():
    with pytest.raises(ValueError):
        pl.PlateParams(h=-1.0)
    with pytest.raises(ValueError):
        pl.PlateParams(nu=-0.1)
    with pytest.raises(ValueError):
        pl.PlateParams(curvature_model="bogus")


def test_metric_change_single_mode():
    g = grid32()
    a = 0.3
    g11, g12, g22 = pl.metric_change(cos_mode(g, a), g)
    expected = (a * 2 * np.pi * np.sin(2 * np.pi * g.x1)[:, None]) ** 2 \
        * np.ones((1, g.n2))
    assert np.abs(g11 - expected).max() < 1e-12
    assert np.abs(g12).max() < 1e-14 and np.abs(g22).max() < 1e-14


def test_metric_change_quadratic_homogeneity():
    g = grid32()
    rng = np.random.default_rng(0)
    w = random_surface(g, rng, 5, 0.2)
    a2 = [x * 4.0 for x in pl.metric_change(w, g)]
    b = pl.metric_change(2.0 * w, g)
    for x, y in zip(a2, b):
        assert np.abs(x - y).max() <= 1e-12 * max(1.0, np.abs(y).max())


def test_curvature_single_mode_and_model_agreement():
    g = grid32()
    a = 0.2
    r11, r12, r22 = pl.curvature_change(cos_mode(g, a), g)
    expected = -a * (2 * np.pi) ** 2 * np.cos(2 * np.pi * g.x1)[:, None] * np.ones((1, g.n2))
    assert np.abs(r11 - expected).max() < 1e-10
    assert np.abs(r12).max() < 1e-12 and np.abs(r22).max() < 1e-12

    # normalized vs plain Hessian merge quadratically as amplitude shrinks
    rng = np.random.default_rng(1)
    shape = random_surface(g, rng, 2, 1.0)
    gaps = []
    for a in (0.04, 0.02):
        rn = pl.curvature_change(a * shape, g, pl.NORMALIZED)
        rp = pl.curvature_change(a * shape, g, pl.NON_NORMALIZED)
        num = np.sqrt(sum(np.mean((x - y) ** 2) for x, y in zip(rn, rp)))
        den = np.sqrt(sum(np.mean(y ** 2) for y in rp))
        gaps.append(num / den)
    assert 3.0 <= gaps[0] / gaps[1] <= 5.0


def test_koiter_energy_zero_and_positive():
    g = grid32()
    p = pl.PlateParams()
    assert pl.koiter_energy(np.zeros((g.n1, g.n2)), p, g) == 0.0
    rng = np.random.default_rng(9)
    for _ in range(5):
        w = random_surface(g, rng, 5, 0.3)
        assert pl.koiter_energy(w, p, g) >= 0.0


def test_koiter_energy_single_mode_value():
    # bending part has the closed-form value; the quartic membrane part is
    # checked against an independent trapezoid-free quadrature of the density
    g = grid32()
    p = pl.PlateParams(h=0.5, lam=2.0, mu=1.5)
    a = 0.05
    w = cos_mode(g, a)
    bend = (p.h ** 3 / 48.0) * (p.c1 + p.c2) * a ** 2 * (2 * np.pi) ** 4 * 0.5
    s = a * 2 * np.pi * np.sin(2 * np.pi * g.x1)
    membrane_density = (p.c1 + p.c2) * (s ** 2) ** 2
    membrane = (p.h / 4.0) * membrane_density.mean()
    assert pl.koiter_energy(w, p, g) == pytest.approx(bend + membrane, rel=1e-12)


def test_bending_symbol_on_single_mode():
    g = Grid(16, 16, 9)
    p = pl.PlateParams(h=1.3, lam=0.7, mu=2.0)
    w = cos_mode(g)
    expected = (p.h ** 3 / 24.0) * (p.c1 + p.c2) * (2 * np.pi) ** 4 * w
    rel = np.abs(pl.bending_operator(w, p, g) - expected).max() / np.abs(expected).max()
    assert rel <= 1e-12


def test_membrane_cubic_homogeneity():
    g = grid32()
    p = pl.PlateParams()
    rng = np.random.default_rng(4)
    w = random_surface(g, rng, 5, 0.1)
    l1 = pl.membrane_operator(w, p, g)
    l3 = pl.membrane_operator(3.0 * w, p, g)
    assert np.abs(l3 - 27.0 * l1).max() <= 1e-12 * np.abs(l3).max()


def test_elastic_operator_zero_mean_and_zero_input():
    g = grid32()
    rng = np.random.default_rng(6)
    for model in (pl.NON_NORMALIZED, pl.NORMALIZED):
        p = pl.PlateParams(curvature_model=model)
        assert np.abs(pl.elastic_operator(np.zeros((g.n1, g.n2)), p, g)).max() == 0.0
        w = random_surface(g, rng, 5, 0.05)
        assert abs(pl.elastic_operator(w, p, g).mean()) < 1e-13


@pytest.mark.parametrize("model,tol", [(pl.NON_NORMALIZED, 1e-6),
                                       (pl.NORMALIZED, 1e-5)])
def test_energy_gradient_duality(model, tol):
    g = grid32()
    p = pl.PlateParams(h=1.0, lam=1.0, mu=1.0, curvature_model=model)
    rng = np.random.default_rng(20)
    for _ in range(5):
        w = random_surface(g, rng, 5, 0.01)
        xi = random_surface(g, rng, 5, 0.01)
        assert pl.energy_gradient_check(w, xi, p, g, fd_step=1e-5) <= tol


def test_operator_model_gap_scales_quadratically():
    g = grid32()
    rng = np.random.default_rng(8)
    shape = random_surface(g, rng, 4, 1.0)
    gaps = []
    for a in (0.04, 0.02, 0.01):
        pn = pl.PlateParams(curvature_model=pl.NORMALIZED)
        pp = pl.PlateParams(curvature_model=pl.NON_NORMALIZED)
        ln = pl.elastic_operator(a * shape, pn, g)
        lp = pl.elastic_operator(a * shape, pp, g)
        gaps.append(np.sqrt(np.mean((ln - lp) ** 2)) / np.sqrt(np.mean(lp ** 2)))
    assert 2.8 <= gaps[0] / gaps[1] <= 5.2
    assert 2.8 <= gaps[1] / gaps[2] <= 5.2


def test_plate_step_rejections_and_equilibrium():
    g = grid32()
    p = pl.PlateParams()
    z = np.zeros((g.n1, g.n2))
    st = pl.PlateState(w=z.copy(), w_t=z.copy())
    with pytest.raises(ValueError):
        pl.plate_step(st, z, p, g, dt=0.0)
    with pytest.raises(ValueError, match="zero surface mean"):
        pl.plate_step(st, z + 1.0, p, g, dt=1e-3)
    out = pl.plate_step(st, z, p, g, dt=1e-3)
    assert np.abs(out.w).max() == 0.0 and np.abs(out.w_t).max() == 0.0


def test_plate_energy_drift_second_order():
    g = Grid(16, 16, 9)
    p = pl.PlateParams()
    w0 = cos_mode(g, 0.15)
    z = np.zeros_like(w0)

    def max_drift(dt, nsteps):
        st = pl.PlateState(w=w0.copy(), w_t=z.copy())
        e0 = pl.plate_energy(st, p, g)
        worst = 0.0
        for _ in range(nsteps):
            st = pl.plate_step(st, z, p, g, dt)
            worst = max(worst, abs(pl.plate_energy(st, p, g) - e0))
        return worst

    d1 = max_drift(1e-3, 1000)
    d2 = max_drift(5e-4, 2000)
    assert 2.8 <= d1 / d2 <= 5.2


def test_damped_energy_monotone_and_means_preserved():
    g = Grid(16, 16, 9)
    p = pl.PlateParams(nu=0.1)
    st = pl.PlateState(w=cos_mode(g, 0.01), w_t=np.zeros((g.n1, g.n2)))
    z = np.zeros((g.n1, g.n2))
    e_prev = pl.plate_energy(st, p, g)
    for _ in range(1000):
        st = pl.plate_step(st, z, p, g, 1e-3)
        e = pl.plate_energy(st, p, g)
        assert e <= e_prev
        e_prev = e
        assert abs(st.w_t.mean()) <= 1e-13
        assert abs(st.w.mean() - 0.01 * cos_mode(g, 1.0).mean()) <= 1e-13


def test_linear_biharmonic_variant_drops_membrane():
    g = grid32()
    p = pl.PlateParams(operator=pl.LINEAR_BIHARMONIC)
    rng = np.random.default_rng(12)
    w = random_surface(g, rng, 5, 0.1)
    lk = pl.elastic_operator(w, p, g)
    lb = pl.bending_operator(w, p, g, model=pl.NON_NORMALIZED)
    assert np.abs(lk - g.dealias(lb)).max() <= 1e-12 * max(1.0, np.abs(lb).max())
