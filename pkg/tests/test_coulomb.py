import numpy as np
import pytest

from ymalpha import coulomb, fields, flow, quat, sphere
from ymalpha.sphere import Lattice4D

rng = np.random.default_rng(17)
LAT = Lattice4D(3.0, 11)        # coarse but fast; n = 15 runs in acceptance


def _chart():
    return coulomb._chart(LAT)


def _windowed_sigma(seed, amp=0.15):
    r = np.sqrt(LAT.r2)
    win = np.cos(0.5 * np.pi * np.clip((r - 0.5 * LAT.R)
                                       / (0.27 * LAT.R), 0.0, 1.0)) ** 2
    sig = fields.random_bump_sigma(np.random.default_rng(seed), amp=amp)
    return (sig(LAT.points) * win[:, None]).reshape(LAT.shape + (3,))


def test_divergence_is_adjoint_of_gradient():
    ch = _chart()
    sig = rng.normal(size=LAT.shape + (3,))
    ups = rng.normal(size=LAT.shape + (4, 3))
    phi2 = ch.phi2
    lhs = np.sum(ch.cov_grad(sig) * (phi2[..., None, None] * ups))
    rhs = np.sum(sig * ch.divergence(ups))
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_laplacian_spd():
    ch = _chart()
    for _ in range(3):
        sig = rng.normal(size=LAT.shape + (3,))
        assert np.sum(sig * ch.laplace(sig)) > 0


def test_trivial_projection_is_exact():
    res = coulomb.coulomb_project(fields.basic_connection(), lattice=LAT)
    assert res.residuals[-1] == 0.0
    assert np.max(np.abs(res.sigma)) == 0.0
    assert coulomb.distance_to_basic(res) == 0.0


def test_round_trip_recovers_gauge():
    ch = _chart()
    sig0 = _windowed_sigma(1)
    dec = fields.LatticeField(LAT, coulomb.gauge_action_lattice(ch, sig0, ch.gamma))
    res = coulomb.coulomb_project(dec, tol=1e-9, lattice=LAT)
    assert res.converged
    # discrete gauge actions compose exactly: projection undoes the
    # decoration and returns to the basic potential
    assert coulomb.distance_to_basic(res) < 1e-7
    assert np.max(np.abs(res.sigma + sig0)) < 1e-7


def test_residual_contraction():
    ch = _chart()
    dec = fields.LatticeField(
        LAT, coulomb.gauge_action_lattice(ch, _windowed_sigma(2, amp=0.2), ch.gamma))
    res = coulomb.coulomb_project(dec, tol=1e-10, lattice=LAT)
    for a, b in zip(res.residuals, res.residuals[1:]):
        assert b < a


def test_gauge_action_lattice_identity():
    ch = _chart()
    zero = np.zeros(LAT.shape + (3,))
    out = coulomb.gauge_action_lattice(ch, zero, ch.gamma)
    assert np.array_equal(out, ch.gamma)


def test_dstar_against_continuum_operator():
    # the lattice divergence approximates the continuum covariant divergence
    from ymalpha import variational
    sig = fields.random_bump_sigma(np.random.default_rng(3), amp=0.1)

    def ups_coord(q):
        d2 = np.sum((np.asarray(q, float)[..., :1] - 0.2) ** 2, axis=-1)
        return np.exp(-np.sum(np.asarray(q, float) ** 2, axis=-1)
                      )[..., None, None] * np.ones((4, 3)) * 0.1

    def fn(q):
        return sphere.frame_scale(q)[..., None, None] * ups_coord(q)

    ch = _chart()
    pts = LAT.points[ch.interior.ravel()]       # fixed comparison points
    cont = variational.dstar_oneform(fn, fields.basic_connection(), pts, h=1e-3)
    errs = []
    for lat in (LAT, Lattice4D(3.0, 21)):       # nested: n=11 nodes in n=21
        div = coulomb.dstar_against_basic(ups_coord(lat.points), lat)
        idx = np.rint((pts + lat.R) / lat.h).astype(int)
        at = div[idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]]
        errs.append(np.max(np.abs(at - cont)))
    # halving h cuts the defect by about 4 (second-order stencils)
    assert errs[1] < errs[0] / 3.0


def test_support_gate():
    # a perturbation that does not vanish near the chart boundary is rejected
    sig = fields.AnalyticGauge(lambda z: 0.3 * np.ones(np.shape(z)[:-1] + (3,)))
    bad = fields.gauge_act(sig, fields.basic_connection())
    with pytest.raises(ValueError, match="not supported"):
        coulomb.coulomb_project(bad, lattice=LAT)


def test_max_outer_error():
    ch = _chart()
    dec = fields.LatticeField(
        LAT, coulomb.gauge_action_lattice(ch, _windowed_sigma(4), ch.gamma))
    with pytest.raises(coulomb.CoulombError, match="max-outer-exceeded"):
        coulomb.coulomb_project(dec, tol=1e-16, max_outer=2, lattice=LAT)


def test_write_log_schema(tmp_path):
    c = flow.random_flow_seed(np.random.default_rng(5), amp=0.1,
                              s_range=(0.1, 5.0))
    res = coulomb.coulomb_project(c, tol=1e-7, lattice=LAT)
    p = tmp_path / "log.csv"
    res.write_log(p)
    lines = p.read_text().strip().split("\n")
    assert lines[0] == "outer_iter,residual,cg_iters,sigma_sup_norm"
    assert len(lines) == len(res.residuals) + 1


def test_lifted_pullback_of_basic_is_basic():
    p = rng.normal(size=4); p /= np.linalg.norm(p)
    q = rng.normal(size=4); q /= np.linalg.norm(q)
    m = sphere.rotation(p, q)
    lifted = coulomb.lifted_pullback(m, fields.basic_connection())
    pts = rng.normal(size=(25, 4))
    assert np.allclose(lifted.potential(pts),
                       fields.basic_connection().potential(pts), atol=1e-12)


def test_commute_with_exact_lattice_rotation():
    c = flow.random_flow_seed(np.random.default_rng(6), amp=0.1,
                              s_range=(0.1, 5.0))
    m = sphere.rotation(quat.ONE, quat.I)   # maps the lattice to itself
    defect = coulomb.commute_check(c, m, tol=1e-6, lattice=LAT)
    assert defect < 1e-5


def test_w_operator_trivial_and_isometry():
    pts = rng.normal(size=(40, 4))
    c = fields.Adhm(None, 1.2)
    zero = np.zeros((40, 3))
    ups = coulomb.w_operator(zero, c, pts)
    diff = c.potential(pts) - fields.basic_connection().potential(pts)
    assert np.allclose(ups, diff, atol=1e-12)
    # conjugation by a unit quaternion preserves the pointwise norm
    sig = rng.normal(scale=0.3, size=(40, 3))
    ups2 = coulomb.w_operator(sig, c, pts)
    assert np.allclose(np.sum(ups2 ** 2, axis=(-2, -1)),
                       np.sum(diff ** 2, axis=(-2, -1)), rtol=1e-10)
