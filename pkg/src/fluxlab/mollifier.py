"""Friedrichs mollifier, the commutator kernel of [A, Phi_eps] and its Schur norms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import ArgumentError, CapabilityError, DomainError
from .fields import GridField
from .operator import apply_operator
from .quadrature import MAX_SPHERE_DEGREE, sphere_area, unit_ball_rule

DEFAULT_VOLUME_DEGREE = 16
DEFAULT_RADIAL_NODES = 48
FINE_RADIAL_NODES = 72


def _profile(r2):
    """exp(-1/(1 - r^2)) for r < 1, zero elsewhere."""
    r2 = np.asarray(r2, dtype=float)
    out = np.zeros_like(r2)
    inside = r2 < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - r2[inside]))
    return out


@lru_cache(maxsize=None)
def bump_constant(n):
    """c with c * int_{B_1} exp(-1/(1-|x|^2)) dx = 1."""
    radial, _ = quad(lambda r: np.exp(-1.0 / (1.0 - r * r)) * r ** (n - 1), 0.0, 1.0, epsabs=1e-14, epsrel=1e-12)
    return 1.0 / (sphere_area(n) * radial)


@dataclass(frozen=True)
class MollifierKernel:
    """phi_eps(w) = eps^-n phi(w / eps) with phi = c exp(-1/(1-|w|^2)) on the unit ball."""

    n: int
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ArgumentError(f"mollifier radius must be positive, got {self.eps}")

    @property
    def constant(self):
        return bump_constant(self.n)

    def __call__(self, w):
        z = np.asarray(w, dtype=float) / self.eps
        return self.constant * _profile(np.sum(z * z, axis=-1)) / self.eps**self.n

    def gradient(self, w):
        z = np.asarray(w, dtype=float) / self.eps
        r2 = np.sum(z * z, axis=-1)
        inside = r2 < 1.0
        factor = np.zeros_like(r2)
        factor[inside] = -2.0 / (1.0 - r2[inside]) ** 2
        val = self.constant * _profile(r2)
        return (val * factor)[..., None] * z / self.eps ** (self.n + 1)

    def mass(self, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
        z, w = _ball(self.n, volume_degree, radial_nodes)
        return float(np.sum(w * self(self.eps * z)) * self.eps**self.n)


def _ball(n, volume_degree, radial_nodes):
    return unit_ball_rule(n, min(volume_degree, MAX_SPHERE_DEGREE), radial_nodes)


@dataclass(frozen=True, eq=False)
class CommutatorKernel:
    """K(x, y) with [A, Phi_eps] u (x) = int K(x, y) u(y) dy; no derivative ever falls on u.

    K = A(x, grad phi_eps(x-y)) - A(y, grad phi_eps(x-y)) + divA(y) phi_eps(x-y)
        + (B(x) - B(y)) phi_eps(x-y).
    """

    op: object
    eps: float

    @property
    def mollifier(self):
        return MollifierKernel(self.op.n, self.eps)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        x, y = np.broadcast_arrays(x, y)
        m = self.mollifier
        w = x - y
        g = m.gradient(w)
        phi = m(w)[..., None, None]
        op = self.op
        K = op.symbol(x, g) - op.symbol(y, g) + op.div_symbol(y) * phi + (op.zeroth_order(x) - op.zeroth_order(y)) * phi
        outside = np.sum(w * w, axis=-1) > self.eps**2
        K[outside] = 0.0
        return K


def _check_ball(fld, x, eps):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    for p in x:
        if not fld.domain.contains_ball(p, eps):
            raise DomainError(f"ball of radius {eps} about {p.tolist()} leaves the field domain")
    return x


def _nodes(x, eps, volume_degree, radial_nodes):
    z, w = _ball(x.shape[-1], volume_degree, radial_nodes)
    y = x[:, None, :] + eps * z[None]
    return y, w * eps ** x.shape[-1]


def mollify_at(fld, eps, x, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """(Phi_eps u)(x) at points x of shape (P, n)."""
    x = _check_ball(fld, x, eps)
    y, w = _nodes(x, eps, volume_degree, radial_nodes)
    phi = MollifierKernel(x.shape[1], eps)(x[:, None, :] - y)
    return np.einsum("q,pq,pqe->pe", w, phi, fld(y))


def mollify(fld, eps, shape=None, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """Phi_eps u sampled on a regular grid over {dist(x, boundary) > eps}."""
    ext = fld.domain.extents
    if not 0 < eps < 0.5 * float(np.min(ext)):
        raise ArgumentError(f"eps={eps} must be positive and below half the smallest domain extent {np.min(ext)}")
    shape = tuple(shape or (33,) * fld.n)
    inner = fld.domain.shrink(eps * (1 + 1e-9))
    axes = [np.linspace(a, b, k) for a, b, k in zip(inner.lo, inner.hi, shape)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, fld.n)
    vals = mollify_at(fld, eps, pts, volume_degree, radial_nodes)
    return GridField(tuple(inner.lo), tuple(inner.extents), vals.reshape(shape + (fld.dimE,)), name=f"mollified({fld.name})")


def commutator_apply(op, fld, eps, x, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """[A, Phi_eps] u at points x (P, n) -> (P, dimF), using only values of u."""
    if fld.n != op.n or fld.dimE != op.dimE:
        raise ArgumentError("field and operator dimensions differ")
    x = _check_ball(fld, x, eps)
    y, w = _nodes(x, eps, volume_degree, radial_nodes)
    K = CommutatorKernel(op, eps)(x[:, None, :], y)
    return np.einsum("q,pqfe,pqe->pf", w, K, fld(y))


def kernel_row_integral(op, eps, x, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """int K(x, y) dy at points x (P, n) -> (P, dimF, dimE); vanishes when B is affine."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y, w = _nodes(x, eps, volume_degree, radial_nodes)
    return np.einsum("q,pqfe->pfe", w, CommutatorKernel(op, eps)(x[:, None, :], y))


def schur_norms(kernel, points, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """Sampled sup_x int |K(x,y)| dy and sup_y int |K(x,y)| dx (spectral norm of each matrix)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    y, w = _nodes(pts, kernel.eps, volume_degree, radial_nodes)
    rows = np.einsum("q,pq->p", w, np.linalg.norm(kernel(pts[:, None, :], y), ord=2, axis=(-2, -1)))
    cols = np.einsum("q,pq->p", w, np.linalg.norm(kernel(y, pts[:, None, :]), ord=2, axis=(-2, -1)))
    return float(rows.max()), float(cols.max())


def iii0_defect(op, eps, points, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """max |int K(x,y) dy| / (1 + ||K||_1) over sample points."""
    ker = CommutatorKernel(op, eps)
    defect = np.linalg.norm(kernel_row_integral(op, eps, points, volume_degree, radial_nodes), ord=2, axis=(-2, -1))
    k1, _ = schur_norms(ker, points, volume_degree, radial_nodes)
    return float(defect.max() / (1.0 + k1))


@dataclass
class FriedrichsCheck:
    points: np.ndarray
    applied_mollified: np.ndarray
    mollified_applied: np.ndarray
    commutator: np.ndarray
    defect: np.ndarray
    tolerance: np.ndarray

    @property
    def ok(self):
        return bool(np.all(self.defect <= self.tolerance))


def _friedrichs_terms(op, fld, eps, x, volume_degree, radial_nodes):
    y, w = _nodes(x, eps, volume_degree, radial_nodes)
    m = MollifierKernel(op.n, eps)
    xb = x[:, None, :]
    g = m.gradient(xb - y)
    phi = m(xb - y)
    u = fld(y)
    lhs_kernel = op.symbol(np.broadcast_to(xb, y.shape), g) + op.zeroth_order(xb) * phi[..., None, None]
    applied = np.einsum("q,pqfe,pqe->pf", w, lhs_kernel, u)
    smoothed = np.einsum("q,pq,pqf->pf", w, phi, apply_operator(op, fld, y))
    comm = commutator_apply(op, fld, eps, x, volume_degree, radial_nodes)
    return applied, smoothed, comm


def friedrichs_identity(op, fld, eps, points, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """Check A(Phi_eps u) - Phi_eps(A u) = [A, Phi_eps] u at sample points.

    The tolerance per point is 10x the change of the defect between two radial
    resolutions plus a round-off floor scaled by the term sizes.
    """
    if not fld.has_derivative:
        raise CapabilityError(f"field {fld.name} has no derivative, so Phi_eps(A u) is unavailable")
    x = _check_ball(fld, points, eps)
    a0, s0, c0 = _friedrichs_terms(op, fld, eps, x, volume_degree, radial_nodes)
    a1, s1, c1 = _friedrichs_terms(op, fld, eps, x, volume_degree, FINE_RADIAL_NODES)
    d0 = np.linalg.norm(a0 - s0 - c0, axis=1)
    d1 = np.linalg.norm(a1 - s1 - c1, axis=1)
    scale = np.linalg.norm(a1, axis=1) + np.linalg.norm(s1, axis=1) + np.linalg.norm(c1, axis=1)
    tol = 10 * np.abs(d1 - d0) + 1e-12 * (1 + scale)
    return FriedrichsCheck(x, a1, s1, c1, d1, tol)


@dataclass
class DecayTable:
    eps: np.ndarray
    max_norm: np.ndarray
    schur: list
    non_increasing: bool
    slack: float

    def to_dict(self):
        return {
            "eps": self.eps.tolist(),
            "max_norm": self.max_norm.tolist(),
            "schur_norms": [list(s) for s in self.schur],
            "non_increasing": self.non_increasing,
            "slack": self.slack,
        }


def commutator_decay(op, fld, eps0, levels, points, slack=0.1, volume_degree=DEFAULT_VOLUME_DEGREE, radial_nodes=DEFAULT_RADIAL_NODES):
    """max over points of |[A, Phi_eps] u| for eps = eps0 / 2^k, k = 0..levels-1."""
    if levels < 1:
        raise ArgumentError("levels must be >= 1")
    eps = eps0 * 0.5 ** np.arange(levels)
    norms, schur = [], []
    for e in eps:
        c = commutator_apply(op, fld, e, points, volume_degree, radial_nodes)
        norms.append(float(np.max(np.linalg.norm(c, axis=1))))
        schur.append(schur_norms(CommutatorKernel(op, e), points, volume_degree, radial_nodes))
    norms = np.array(norms)
    floor = 1e-12 * (1 + float(np.max(np.abs(fld(np.atleast_2d(points))))))
    ok = bool(np.all(norms[1:] <= (1 + slack) * norms[:-1] + floor))
    return DecayTable(eps, norms, schur, ok, slack)
