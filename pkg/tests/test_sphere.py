import numpy as np
import pytest

from ymalpha import quat, sphere
from ymalpha.sphere import RadialGrid, Lattice4D

rng = np.random.default_rng(7)


def test_weight_identities():
    pts = rng.normal(scale=2.0, size=(50, 4))
    r2 = np.sum(pts ** 2, axis=-1)
    assert np.allclose(sphere.round_weight(pts), 16.0 / (1.0 + r2) ** 4)
    assert np.allclose(sphere.frame_scale(pts), 0.5 * (1.0 + r2))
    # 2-form weight is the inverse of the volume weight
    assert np.allclose(sphere.two_form_weight(pts) * sphere.round_weight(pts), 1.0)
    # 1-form weight = frame_scale^2 * round_weight = (2/(1+r^2))^2
    w2rw = sphere.frame_scale(pts) ** 2 * sphere.round_weight(pts)
    assert np.allclose(w2rw, (2.0 / (1.0 + r2)) ** 2)


def test_round_volume():
    g = RadialGrid(96)
    vol = g.integrate_round(np.ones(g.n))
    assert np.isclose(vol, sphere.VOL_S4, rtol=1e-12)
    lat = Lattice4D(6.0, 31)
    # lattice covers only a chart box; its volume is below the full sphere
    assert lat.integrate_round(np.ones(lat.points.shape[0])) < sphere.VOL_S4


def test_flat_vs_round_measure():
    # int f dV_g = int f * round_weight dzeta for radial f
    g = RadialGrid(96)
    f = np.exp(-g.s)
    a = g.integrate_round(f)
    b = g.integrate_flat(f * sphere.round_weight(g.axis_points()))
    assert np.isclose(a, b, rtol=1e-12)


def test_chi_lambda_values():
    pts = rng.normal(size=(30, 4))
    assert np.allclose(sphere.chi_lambda(pts, 1.0), 1.0)
    # chi at the origin is lambda^{-4}; at infinity it grows like lambda^4
    assert np.isclose(sphere.chi_lambda(np.zeros(4), 2.0), 2.0 ** -4)
    d = sphere.dchi_dloglambda(pts, 1.3)
    h = 1e-6
    fd = (sphere.chi_lambda(pts, 1.3 * np.exp(h))
          - sphere.chi_lambda(pts, 1.3 * np.exp(-h))) / (2 * h)
    assert np.allclose(d, fd, rtol=1e-6)


def test_conformal_map_inverse():
    m = sphere.ConformalMap(xi1=np.array([0.1, 0, -0.2, 0.05]),
                            xi2=np.array([0.3, -0.1, 0, 0.2]), lam=1.7)
    pts = rng.normal(size=(40, 4))
    back = m.inverse().apply(m.apply(pts))
    assert np.allclose(back, pts, atol=1e-10)


def test_conformal_jacobian_fd():
    m = sphere.ConformalMap(xi2=np.array([0.2, 0, 0.1, 0]), lam=1.4)
    pts = rng.normal(size=(10, 4))
    J = m.jacobian(pts)
    h = 1e-6
    for a in range(4):
        dp = pts.copy(); dp[:, a] += h
        dm = pts.copy(); dm[:, a] -= h
        fd = (m.apply(dp) - m.apply(dm)) / (2 * h)
        assert np.allclose(J[..., a], fd, atol=1e-6)


def test_rotation_is_isometry_of_r2():
    p = rng.normal(size=4); p /= np.linalg.norm(p)
    q = rng.normal(size=4); q /= np.linalg.norm(q)
    m = sphere.rotation(p, q)
    pts = rng.normal(size=(40, 4))
    assert np.allclose(np.sum(m.apply(pts) ** 2, axis=-1),
                       np.sum(pts ** 2, axis=-1), rtol=1e-12)


def test_dilation_translation():
    d = sphere.dilation(2.5)
    assert np.allclose(d.apply(np.ones((3, 4))), 2.5 * np.ones((3, 4)))
    t = sphere.translation(np.array([1.0, 0, 0, 0]))
    assert np.allclose(t.apply(np.zeros(4)), [1.0, 0, 0, 0])


def test_hodge_star_involution_and_split():
    F = rng.normal(size=(20, 4, 4, 3))
    F = F - np.swapaxes(F, -3, -2)
    assert np.allclose(sphere.hodge_star(sphere.hodge_star(F)), F)
    Fp, Fm = sphere.hodge_split(F)
    assert np.allclose(Fp + Fm, F)
    assert np.allclose(sphere.hodge_star(Fp), Fp)
    assert np.allclose(sphere.hodge_star(Fm), -Fm)
    # the split is orthogonal
    assert np.allclose(np.sum(Fp * Fm, axis=(-3, -2, -1)), 0.0, atol=1e-12)


def test_radial_grid_quadrature_exactness():
    # smooth radial integrand known in closed form:
    # int (1+s)^{-4} dV_g picks up the round weight squared / 16 ... use
    # int dV_g / (1+r^2) = 2 pi^2 int sin^3 cos^2(theta/2) dtheta
    g = RadialGrid(64)
    val = g.integrate_round(1.0 / (1.0 + g.s))
    from scipy.integrate import quad
    ref = quad(lambda t: 2 * np.pi ** 2 * np.sin(t) ** 3 * np.cos(t / 2) ** 2,
               0, np.pi)[0]
    assert np.isclose(val, ref, rtol=1e-12)


def test_lattice_layout():
    lat = Lattice4D(2.0, 5)
    assert lat.points.shape == (5 ** 4, 4)
    assert np.isclose(lat.h, 1.0)
    grid = lat.field(lat.points, 4)
    assert grid.shape == (5, 5, 5, 5, 4)
    assert np.allclose(grid[0, 0, 0, 0], [-2, -2, -2, -2])


def test_pairwise_sum_deterministic():
    v = rng.normal(size=12345)
    assert sphere.pairwise_sum(v) == sphere.pairwise_sum(v.copy())
    assert np.isclose(sphere.pairwise_sum(v), np.sum(v), rtol=1e-12)
