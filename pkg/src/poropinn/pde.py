"""Nondimensional 2D poroelasticity: residual operators and the manufactured solution.

Coordinates are ordered (x, z, t) and fields (u, v, p) everywhere.  The
residual operators read derivative entries by position from a
:class:`~poropinn.net.DerivBundle`, so they accept single points, batches and
traced (autodiff) bundles alike.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .net import DerivBundle

X, Z, T = 0, 1, 2
U, V, P = 0, 1, 2


@dataclass(frozen=True)
class SolutionParams:
    alpha: float = 0.5
    beta: float = 2.0
    delta: float = 1.0
    eps: float = 1.0
    zeta: float = 1.5
    eta: float = 2.5

    def __post_init__(self):
        for name in ("alpha", "beta", "delta", "eps", "zeta", "eta"):
            if not np.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")


@dataclass(frozen=True)
class MaterialParams:
    lambda_lame: float
    mu_lame: float
    k_hydraulic: float
    gamma_f: float
    l_ref: float

    def __post_init__(self):
        for name in ("mu_lame", "k_hydraulic", "gamma_f", "l_ref"):
            if not getattr(self, name) > 0:
                raise ParameterError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not np.isfinite(self.lambda_lame):
            raise ParameterError("lambda_lame must be finite")
        if not self.lambda_lame + 2.0 * self.mu_lame > 0:
            raise ParameterError("lambda_lame + 2 mu_lame must be positive")

    @property
    def stiffness(self):
        return self.lambda_lame + 2.0 * self.mu_lame

    @property
    def time_scale(self):
        """Factor converting dimensional time to nondimensional time."""
        return self.stiffness * self.k_hydraulic / (self.gamma_f * self.l_ref**2)


def eta_from_lame(lambda_lame, mu_lame):
    if not mu_lame > 0:
        raise ParameterError(f"mu_lame must be positive, got {mu_lame!r}")
    return 1.0 + lambda_lame / mu_lame


def nondimensionalize(point_dim, fields_dim, mat):
    if not isinstance(mat, MaterialParams):
        raise ParameterError("mat must be a MaterialParams")
    xb, zb, tb = point_dim
    ub, vb, pb = fields_dim
    l = mat.l_ref
    point = (xb / l, zb / l, mat.time_scale * tb)
    fields = (ub / l, vb / l, pb / mat.stiffness)
    return point, fields


def redimensionalize(point, fields, mat):
    if not isinstance(mat, MaterialParams):
        raise ParameterError("mat must be a MaterialParams")
    x, z, t = point
    u, v, p = fields
    l = mat.l_ref
    return (x * l, z * l, t / mat.time_scale), (u * l, v * l, p * mat.stiffness)


def _split(point):
    q = np.asarray(point, dtype=np.float64)
    return q[..., X], q[..., Z], q[..., T]


def analytic_solution(point, sp=SolutionParams()):
    """Manufactured (u, v, p); ``point`` is (3,) or (N, 3), result has the same shape."""
    x, z, t = _split(point)
    u = x * (1.0 - np.exp(-sp.alpha * z)) * t * np.exp(-sp.delta * t)
    v = (1.0 - np.exp(-sp.beta * z)) * t**2 * np.exp(-sp.eps * t)
    p = 3.0 * z * (1.0 - z) * np.exp(-sp.zeta * t)
    return np.stack([u, v, p], axis=-1)


def analytic_bundle(point, sp=SolutionParams()):
    """Closed-form first and second derivatives of the manufactured solution."""
    q = np.asarray(point, dtype=np.float64)
    x, z, t = _split(q)
    a, b, d, e, c = sp.alpha, sp.beta, sp.delta, sp.eps, sp.zeta
    ea, eb = np.exp(-a * z), np.exp(-b * z)
    ed, ee, ec = np.exp(-d * t), np.exp(-e * t), np.exp(-c * t)
    zero = np.zeros_like(x)

    # u = x * A(z) * B(t)
    A, Az, Azz = 1.0 - ea, a * ea, -a * a * ea
    B, Bt, Btt = t * ed, (1.0 - d * t) * ed, d * (d * t - 2.0) * ed
    # v = C(z) * D(t)
    C, Cz, Czz = 1.0 - eb, b * eb, -b * b * eb
    D, Dt, Dtt = t**2 * ee, t * (2.0 - e * t) * ee, (2.0 - 4.0 * e * t + e * e * t**2) * ee
    # p = E(z) * F(t)
    E, Ez, Ezz = 3.0 * z * (1.0 - z), 3.0 * (1.0 - 2.0 * z), -6.0 + zero
    F, Ft, Ftt = ec, -c * ec, c * c * ec

    value = np.stack([x * A * B, C * D, E * F], axis=-1)
    jac = np.stack(
        [
            np.stack([A * B, x * Az * B, x * A * Bt], axis=-1),
            np.stack([zero, Cz * D, C * Dt], axis=-1),
            np.stack([zero, Ez * F, E * Ft], axis=-1),
        ],
        axis=-2,
    )

    def sym(xx, xz, xt, zz, zt, tt):
        return np.stack(
            [
                np.stack([xx, xz, xt], axis=-1),
                np.stack([xz, zz, zt], axis=-1),
                np.stack([xt, zt, tt], axis=-1),
            ],
            axis=-2,
        )

    hess = np.stack(
        [
            sym(zero, Az * B, A * Bt, x * Azz * B, x * Az * Bt, x * A * Btt),
            sym(zero, zero, zero, Czz * D, Cz * Dt, C * Dtt),
            sym(zero, zero, zero, Ezz * F, Ez * Ft, E * Ftt),
        ],
        axis=-3,
    )
    return DerivBundle(q, value, jac, hess)


def residual_f(b, eta):
    h, j = b.hessians, b.jacobian
    return (
        (eta + 1.0) * h[..., U, X, X]
        + h[..., U, Z, Z]
        + eta * h[..., V, X, Z]
        + (eta + 1.0) * j[..., P, X]
    )


def residual_g(b, eta):
    h, j = b.hessians, b.jacobian
    return (
        h[..., V, X, X]
        + (eta + 1.0) * h[..., V, Z, Z]
        + eta * h[..., U, X, Z]
        + (eta + 1.0) * j[..., P, Z]
    )


def residual_h(b):
    h = b.hessians
    return h[..., U, T, X] + h[..., V, T, Z] - h[..., P, X, X] - h[..., P, Z, Z]


def source_ru(point, sp=SolutionParams()):
    x, z, t = _split(point)
    return -sp.alpha**2 * t * x * np.exp(-sp.alpha * z) * np.exp(-sp.delta * t)


def source_rv(point, sp=SolutionParams()):
    x, z, t = _split(point)
    eta = sp.eta
    return (
        sp.alpha * eta * t * np.exp(-sp.alpha * z) * np.exp(-sp.delta * t)
        - sp.beta**2 * (eta + 1.0) * t**2 * np.exp(-sp.beta * z) * np.exp(-sp.eps * t)
        + 3.0 * (eta + 1.0) * (1.0 - 2.0 * z) * np.exp(-sp.zeta * t)
    )


def source_rp(point, sp=SolutionParams()):
    x, z, t = _split(point)
    return (
        sp.beta * t * (2.0 - sp.eps * t) * np.exp(-sp.beta * z) * np.exp(-sp.eps * t)
        + (1.0 - np.exp(-sp.alpha * z)) * (1.0 - sp.delta * t) * np.exp(-sp.delta * t)
        + 6.0 * np.exp(-sp.zeta * t)
    )


def sources(point, sp=SolutionParams()):
    """(r_u, r_v, r_p) stacked along the last axis."""
    return np.stack([source_ru(point, sp), source_rv(point, sp), source_rp(point, sp)], axis=-1)


def residuals(b, sp=SolutionParams()):
    """(f, g, h) of a bundle, as a tuple (works on traced bundles)."""
    return residual_f(b, sp.eta), residual_g(b, sp.eta), residual_h(b)


def source_rv_factored(point, sp=SolutionParams()):
    """r_v in the factored form with a common exponential prefactor.

    Overflows for large arguments; kept only as a cross-check of :func:`source_rv`.
    """
    x, z, t = _split(point)
    a, b, d, e, c, eta = sp.alpha, sp.beta, sp.delta, sp.eps, sp.zeta, sp.eta
    bracket = (
        a * eta * t * np.exp(b * z + e * t + t * c)
        - b**2 * t**2 * (eta + 1.0) * np.exp(a * z + d * t + t * c)
        - 3.0 * (eta + 1.0) * (2.0 * z - 1.0) * np.exp(a * z + b * z + d * t + e * t)
    )
    return bracket * np.exp(-a * z - b * z - d * t - e * t - t * c)


def source_rp_factored(point, sp=SolutionParams()):
    """r_p written with the signs as grouped in the closed-form derivation."""
    x, z, t = _split(point)
    a, b, d, e, c = sp.alpha, sp.beta, sp.delta, sp.eps, sp.zeta
    return (
        -b * t * (e * t - 2.0) * np.exp(-b * z) * np.exp(-e * t)
        - (1.0 - np.exp(-a * z)) * (d * t - 1.0) * np.exp(-d * t)
        + 6.0 * np.exp(-c * t)
    )

