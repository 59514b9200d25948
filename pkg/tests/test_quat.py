import numpy as np
import pytest
from hypothesis import given, strategies as st

from ymalpha import quat

finite = st.floats(-10.0, 10.0, allow_nan=False)
quats = st.tuples(finite, finite, finite, finite).map(
    lambda t: np.array(t, float))
ims = st.tuples(finite, finite, finite).map(lambda t: np.array(t, float))


def test_basis_table():
    # i j = k and cyclic, i^2 = -1
    assert np.allclose(quat.qmul(quat.I, quat.J), quat.K)
    assert np.allclose(quat.qmul(quat.J, quat.K), quat.I)
    assert np.allclose(quat.qmul(quat.K, quat.I), quat.J)
    for e in (quat.I, quat.J, quat.K):
        assert np.allclose(quat.qmul(e, e), -quat.ONE)


@given(quats, quats, quats)
def test_associative(a, b, c):
    lhs = quat.qmul(quat.qmul(a, b), c)
    rhs = quat.qmul(a, quat.qmul(b, c))
    assert np.allclose(lhs, rhs, atol=1e-9)


@given(quats, quats)
def test_norm_multiplicative(a, b):
    assert np.isclose(quat.qnorm(quat.qmul(a, b)),
                      quat.qnorm(a) * quat.qnorm(b), rtol=1e-9, atol=1e-12)


@given(quats, quats)
def test_conj_antihomomorphism(a, b):
    lhs = quat.qconj(quat.qmul(a, b))
    rhs = quat.qmul(quat.qconj(b), quat.qconj(a))
    assert np.allclose(lhs, rhs, atol=1e-9)


@given(quats)
def test_inverse(a):
    if quat.qnorm(a) < 1e-6:
        return
    assert np.allclose(quat.qmul(a, quat.qinv(a)), quat.ONE, atol=1e-9)
    assert np.allclose(quat.qmul(quat.qinv(a), a), quat.ONE, atol=1e-9)


@given(ims, ims)
def test_bracket_is_double_cross(x, y):
    assert np.allclose(quat.bracket(x, y), 2.0 * np.cross(x, y), atol=1e-9)


@given(ims)
def test_exp_im_unit(x):
    assert np.isclose(quat.qnorm(quat.exp_im(x)), 1.0, rtol=1e-12)


def test_exp_im_axis():
    # exp of t*i/... rotates by |t|; at |x| = pi the exponential is -1
    x = np.array([np.pi, 0.0, 0.0])
    assert np.allclose(quat.exp_im(x), -quat.ONE, atol=1e-12)
    assert np.allclose(quat.exp_im(np.zeros(3)), quat.ONE)


@given(ims, ims)
def test_conjugation_preserves_norm_and_bracket(x, y):
    s = quat.exp_im(x)
    cy = quat.conjugate_im(s, y)
    assert np.isclose(quat.inorm2(cy), quat.inorm2(y), rtol=1e-9, atol=1e-12)
    lhs = quat.conjugate_im(s, quat.bracket(y, y + x))
    rhs = quat.bracket(quat.conjugate_im(s, y), quat.conjugate_im(s, y + x))
    assert np.allclose(lhs, rhs, atol=1e-8)


def test_broadcast_shapes():
    rng = np.random.default_rng(0)
    a = rng.normal(size=(5, 7, 4))
    b = rng.normal(size=(7, 4))
    assert quat.qmul(a, b).shape == (5, 7, 4)
    assert quat.im_part(a).shape == (5, 7, 3)
    assert quat.from_im(quat.im_part(a)).shape == (5, 7, 4)
