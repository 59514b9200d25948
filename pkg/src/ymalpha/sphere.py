"""Round four-sphere geometry in the stereographic chart.

Metric convention: g = 4(1+|zeta|^2)^{-2} delta (unit radius), so the volume
density against the flat chart measure is 16(1+r^2)^{-4}, the pointwise
2-form weight is (1/16)(1+r^2)^4 and the orthonormal frame is
e_a = ((1+r^2)/2) d/dzeta^a.  Orientation is fixed so that the instanton
family below is anti-self-dual.
"""

from dataclasses import dataclass, field

import numpy as np

from . import quat
from .quat import qmul, qconj, qnorm2

VOL_S4 = 8.0 * np.pi ** 2 / 3.0


def r2(zeta):
    return qnorm2(zeta)


def round_weight(zeta):
    """Volume density dV_g / dV_flat = 16 (1+|zeta|^2)^{-4}."""
    return 16.0 / (1.0 + r2(zeta)) ** 4


def frame_scale(zeta):
    """w = (1+r^2)/2: orthonormal frame e_a = w d_a; 1-form weight is w^2."""
    return 0.5 * (1.0 + r2(zeta))


def two_form_weight(zeta):
    """Pointwise weight converting |F|^2_coord to |F|^2_g: (1/16)(1+r^2)^4."""
    return (1.0 + r2(zeta)) ** 4 / 16.0


def chi_lambda(zeta, lam):
    """Conformal density lam^{-4} ((1+|lam zeta|^2)/(1+|zeta|^2))^4."""
    s = r2(zeta)
    return lam ** (-4) * ((1.0 + lam ** 2 * s) / (1.0 + s)) ** 4


def dchi_dloglambda(zeta, lam):
    """d chi_lambda / d log(lambda) = chi * 4 (lam^2 r^2 - 1)/(lam^2 r^2 + 1)."""
    s = r2(zeta)
    return chi_lambda(zeta, lam) * 4.0 * (lam ** 2 * s - 1.0) / (lam ** 2 * s + 1.0)


def mu(zeta):
    """(r^2 - 1)/(r^2 + 1), i.e. minus the cosine of the polar angle."""
    s = r2(zeta)
    return (s - 1.0) / (s + 1.0)


def rotation_matrix(p, q):
    """4x4 matrix of u -> p u conj(q) for unit quaternions p, q."""
    cols = [qmul(qmul(p, quat.E_BASIS[a]), qconj(q)) for a in range(4)]
    return np.stack(cols, axis=-1)  # M[j, a] = (p e_a q^-1)^j


@dataclass(frozen=True)
class ConformalMap:
    """Conformal automorphism zeta -> xi2 + lam * rho(zeta - xi1)/|zeta - xi1|^eps.

    rho is the rotation u -> p u conj(q); eps in {0, 2} (2 = inversion)."""
    xi1: np.ndarray = field(default_factory=lambda: np.zeros(4))
    xi2: np.ndarray = field(default_factory=lambda: np.zeros(4))
    lam: float = 1.0
    p: np.ndarray = field(default_factory=lambda: quat.ONE.copy())
    q: np.ndarray = field(default_factory=lambda: quat.ONE.copy())
    eps: int = 0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("dilation factor must be positive")
        if self.eps not in (0, 2):
            raise ValueError("eps must be 0 or 2")

    def apply(self, zeta):
        u = np.asarray(zeta, float) - self.xi1
        ru = qmul(qmul(self.p, u), qconj(self.q))
        if self.eps == 2:
            n2 = qnorm2(u)
            if np.any(n2 == 0.0):
                raise ZeroDivisionError("conformal map pole hit at xi1")
            ru = ru / n2[..., None]
        return self.xi2 + self.lam * ru

    def jacobian(self, zeta):
        """J[..., i, j] = d phi^j / d zeta^i."""
        u = np.asarray(zeta, float) - self.xi1
        R = rotation_matrix(self.p, self.q)  # R[j, a]
        if self.eps == 0:
            J = np.broadcast_to(self.lam * R.T, u.shape[:-1] + (4, 4))
            return np.array(J)
        n2 = qnorm2(u)
        if np.any(n2 == 0.0):
            raise ZeroDivisionError("conformal map pole hit at xi1")
        ru = qmul(qmul(self.p, u), qconj(self.q))
        # d/du^i [ (R u)^j / |u|^2 ] = R[j,i]/|u|^2 - 2 u^i (R u)^j / |u|^4
        J = (R.T[None] / n2[..., None, None]
             - 2.0 * u[..., :, None] * ru[..., None, :] / (n2 ** 2)[..., None, None])
        return self.lam * J

    def inverse(self):
        if self.eps == 2:
            # (xi2 + lam rho(u)/|u|^2)^-1: invert via the same family
            # zeta = xi1 + lam rho^{-1}(z - xi2)/|z - xi2|^2 using |rho(u)|=|u|
            return ConformalMap(xi1=self.xi2, xi2=self.xi1, lam=self.lam,
                                p=qconj(self.p), q=qconj(self.q), eps=2)
        return ConformalMap(
            xi1=self.xi2, xi2=self.xi1, lam=1.0 / self.lam,
            p=qconj(self.p), q=qconj(self.q), eps=0)


def dilation(lam):
    return ConformalMap(lam=float(lam))


def translation(xi):
    return ConformalMap(xi2=np.asarray(xi, float))


def rotation(p, q):
    return ConformalMap(p=np.asarray(p, float), q=np.asarray(q, float))


# ---------------------------------------------------------------------------
# Hodge star / (anti)self-dual splitting
# ---------------------------------------------------------------------------

# ordered index pairs of a 2-form and their Hodge duals, eps_{1234} = +1
_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
_DUAL = {(0, 1): ((2, 3), +1.0), (0, 2): ((1, 3), -1.0), (0, 3): ((1, 2), +1.0),
         (1, 2): ((0, 3), +1.0), (1, 3): ((0, 2), -1.0), (2, 3): ((0, 1), +1.0)}


def hodge_star(F):
    """Hodge star on 2-form components in an orthonormal frame.

    Acts identically on chart-coordinate components (the conformal weights
    cancel for middle-degree forms in four dimensions)."""
    F = np.asarray(F, float)
    out = np.zeros_like(F)
    for (i, j), ((k, l), sgn) in _DUAL.items():
        out[..., i, j, :] = sgn * F[..., k, l, :]
        out[..., j, i, :] = -sgn * F[..., k, l, :]
    return out


def hodge_split(F):
    """F -> (F_plus, F_minus) with F± = (F ± *F)/2."""
    sF = hodge_star(F)
    return 0.5 * (F + sF), 0.5 * (F - sF)


def f_norm2_coord(F):
    """Full double-sum |F|^2 on coordinate components, shape (...,)."""
    F = np.asarray(F, float)
    return np.sum(F * F, axis=(-3, -2, -1))


# ---------------------------------------------------------------------------
# Quadrature grids
# ---------------------------------------------------------------------------

class RadialGrid:
    """Gauss-Legendre grid in the geodesic polar angle theta in (0, pi).

    r = tan(theta/2); dV_g = 2 pi^2 sin^3(theta) dtheta for radial integrands.
    """

    def __init__(self, n=64):
        x, w = np.polynomial.legendre.leggauss(n)
        self.n = n
        self.theta = 0.5 * np.pi * (x + 1.0)
        self.wtheta = 0.5 * np.pi * w
        self.r = np.tan(0.5 * self.theta)
        self.s = self.r ** 2
        # round-volume weights for radial functions of theta
        self.vol_w = 2.0 * np.pi ** 2 * np.sin(self.theta) ** 3 * self.wtheta
        # flat-measure weights: int f dzeta = int f(r) 2 pi^2 r^3 dr
        self.flat_w = 2.0 * np.pi ** 2 * self.r ** 3 \
            * 0.5 * (1.0 + self.r ** 2) * self.wtheta

    def integrate_round(self, values):
        """Integrate a radial function (sampled on nodes) against dV_g."""
        return pairwise_sum(values * self.vol_w)

    def integrate_flat(self, values):
        """Integrate a radial function against the flat chart measure."""
        return pairwise_sum(values * self.flat_w)

    def axis_points(self, center=None, scale=1.0):
        """Chart points (n, 4) along the real axis at radii scale*r (+center)."""
        pts = np.zeros((self.n, 4))
        pts[:, 0] = scale * self.r
        if center is not None:
            pts = pts + np.asarray(center, float)
        return pts


class Lattice4D:
    """Regular axis-aligned chart lattice on [-R, R]^4 with round weights."""

    def __init__(self, R=3.0, n=24):
        self.R = float(R)
        self.n = int(n)
        self.axis = np.linspace(-self.R, self.R, self.n)
        self.h = self.axis[1] - self.axis[0]
        g = np.meshgrid(self.axis, self.axis, self.axis, self.axis, indexing="ij")
        self.points = np.stack([a.ravel() for a in g], axis=-1)
        self.r2 = qnorm2(self.points)
        self.weights = round_weight(self.points) * self.h ** 4
        self.shape = (self.n,) * 4

    def integrate_round(self, values):
        return pairwise_sum(np.asarray(values).ravel() * self.weights)

    def field(self, values, ncomp):
        """Reshape flat per-point values to the (n,n,n,n,ncomp) grid layout."""
        return np.asarray(values).reshape(self.shape + (ncomp,))


def pairwise_sum(values):
    """Deterministic pairwise reduction (bit-reproducible at fixed length)."""
    v = np.asarray(values, float).ravel()
    return float(np.add.reduce(v))
