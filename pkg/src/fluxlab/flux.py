"""Truncated and maximal flux operators, limit estimation, harmonic
differentials and the kernel-projected (adapted) difference quotients."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil

import numpy as np

from .errors import ArgumentError, CapabilityError, DomainError
from .quadrature import ball_volume, make_sphere_rule, sphere_area, unit_ball_rule
from .symbols import DEFAULT_RANK_TOL

DEFAULT_SPHERE_DEGREE = 16
DEFAULT_BALL_DEGREE = 8
JITTER = 0.05


def _check(op, fld, x, eps):
    x = np.asarray(x, dtype=float)
    if op is not None:
        if x.shape != (op.n,) or fld.n != op.n:
            raise ArgumentError(f"point and field must live in R^{op.n}")
        if fld.dimE != op.dimE:
            raise ArgumentError(f"field has dimE={fld.dimE}, operator expects {op.dimE}")
    elif x.shape != (fld.n,):
        raise ArgumentError(f"point must have length {fld.n}")
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    if eps.size == 0:
        raise ArgumentError("empty radius list")
    if np.any(eps <= 0):
        raise ArgumentError("radii must be positive")
    if not fld.domain.contains_ball(x, float(eps.max())):
        raise DomainError(f"ball of radius {eps.max():g} about {x.tolist()} leaves the field domain")
    return x, eps


@dataclass
class TruncatedValue:
    x: np.ndarray
    eps: float
    boundary_term: np.ndarray
    interior_term: np.ndarray
    total: np.ndarray
    sphere_degree: int
    ball_degree: int


def _truncated_terms(op, fld, x, eps, sphere_degree, ball_degree):
    """Boundary and interior parts for each radius in ``eps``: arrays (K, F)."""
    n = op.n
    rule = make_sphere_rule(n, sphere_degree)
    om = ball_volume(n)
    y = x + eps[:, None, None] * rule.nodes[None]  # (K, m, n)
    sym = op.symbol(y, np.broadcast_to(rule.nodes, y.shape))
    u = fld(y)
    bnd = np.einsum("k,ikfe,ike->if", rule.weights, sym, u) / (eps[:, None] * om)
    if op.pure_flux:
        inter = np.zeros_like(bnd)
    else:
        pts, wts = unit_ball_rule(n, ball_degree)
        y = x + eps[:, None, None] * pts[None]
        inter = np.einsum("k,ikfe,ike->if", wts, op.source(y), fld(y)) / om
    return bnd, inter


def truncated_apply(op, fld, x, eps, sphere_degree=DEFAULT_SPHERE_DEGREE, ball_degree=DEFAULT_BALL_DEGREE):
    """A_eps u(x): flux through the sphere of radius eps plus the interior
    source term, both divided by the ball volume."""
    x, e = _check(op, fld, x, eps)
    bnd, inter = _truncated_terms(op, fld, x, e[:1], sphere_degree, ball_degree)
    return TruncatedValue(x, float(e[0]), bnd[0], inter[0], bnd[0] + inter[0], sphere_degree, ball_degree)


def maximal_operator(op, fld, x, eps_grid, sphere_degree=DEFAULT_SPHERE_DEGREE, ball_degree=DEFAULT_BALL_DEGREE):
    """max over the radius grid of |A_eps u(x)|."""
    if len(np.atleast_1d(eps_grid)) == 0:
        raise ArgumentError("maximal operator needs a non-empty radius grid")
    x, e = _check(op, fld, x, eps_grid)
    bnd, inter = _truncated_terms(op, fld, x, e, sphere_degree, ball_degree)
    return float(np.max(np.linalg.norm(bnd + inter, axis=1)))


def geometric_schedule(eps0, ratio, steps, seed=0, jitter=JITTER):
    """eps_k = eps0 ratio^k (1 + j_k) with j_k uniform in [-jitter, jitter]."""
    if steps < 1 or not 0 < ratio < 1 or eps0 <= 0:
        raise ArgumentError("need steps >= 1, 0 < ratio < 1, eps0 > 0")
    rng = np.random.default_rng(seed)
    j = rng.uniform(-jitter, jitter, size=steps)
    return eps0 * ratio ** np.arange(steps) * (1 + j)


@dataclass
class LimitEstimate:
    value: np.ndarray
    observed_order: float
    eps: np.ndarray
    residuals: np.ndarray
    status: str
    method: str
    reference: np.ndarray | None = None
    growth_order: float = float("nan")
    boundary_norms: np.ndarray | None = None
    interior_norms: np.ndarray | None = None
    values: np.ndarray | None = field(default=None, repr=False)

    def table(self):
        """Rows (eps, residual, boundary_norm, interior_norm)."""
        b = self.boundary_norms if self.boundary_norms is not None else np.full(len(self.eps), np.nan)
        i = self.interior_norms if self.interior_norms is not None else np.full(len(self.eps), np.nan)
        return [(float(a), float(r), float(bb), float(ii)) for a, r, bb, ii in zip(self.eps, self.residuals, b, i)]


def _slope(eps, r):
    ok = r > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps[ok]), np.log(r[ok]), 1)[0])


def robust_limit(eps, values, reference=None, floor=None):
    """Aggregate a sequence of approximations taken at shrinking radii.

    Pairwise Richardson extrapolants over the last ceil(K/2) levels are
    combined by a componentwise median. Residuals that grow for three
    consecutive levels (above the round-off floor) mark the sequence as
    divergent; the value is then the last iterate.
    """
    eps = np.asarray(eps, dtype=float)
    order = np.argsort(-eps, kind="stable")
    eps = eps[order]
    V = np.asarray(values, dtype=float)[order]
    shape = V.shape[1:]
    V = V.reshape(len(eps), -1)
    K = len(eps)
    mags = np.linalg.norm(V, axis=1)
    if floor is None:
        floor = 1e-11 * (1.0 + float(np.median(mags)))
    d = np.r_[np.nan, np.linalg.norm(np.diff(V, axis=0), axis=1)]
    growth = 0
    divergent = False
    for k in range(2, K):
        if d[k] > floor and d[k] > d[k - 1] * (1 + 1e-9) and d[k - 1] > floor:
            growth += 1
            if growth >= 3:
                divergent = True
                break
        else:
            growth = 0
    tail = np.arange(K - ceil(K / 2), K)
    if divergent:
        val = V[-1]
        ref = reference.reshape(-1) if reference is not None else None
        res = np.linalg.norm(V - (ref if ref is not None else 0.0), axis=1) if ref is not None else d.copy()
        if ref is None:
            res[0] = np.nan
        growth_order = _slope(eps[tail], mags[tail])
        est = LimitEstimate(
            val.reshape(shape), _slope(eps[tail], np.nan_to_num(res[tail])), eps, res, "divergent",
            "last-iterate (divergent)", reference, growth_order,
        )
        est.values = V.reshape((K,) + shape)
        return est
    dt = d[tail[1:]] if len(tail) > 1 else np.array([])
    et = eps[tail[1:]] if len(tail) > 1 else np.array([])
    p_hat = _slope(et, np.where(dt > floor, dt, 0.0))
    p = 2 if not np.isfinite(p_hat) else int(np.clip(np.rint(p_hat), 1, 4))
    if len(tail) >= 2:
        a, b = tail[:-1], tail[1:]
        ea, eb = eps[a][:, None] ** p, eps[b][:, None] ** p
        ext = (ea * V[b] - eb * V[a]) / (ea - eb)
        val = np.median(ext, axis=0)
    else:
        val = V[-1]
    ref = val if reference is None else np.asarray(reference, dtype=float).reshape(-1)
    res = np.linalg.norm(V - ref, axis=1)
    rfloor = 1e-12 * (1.0 + float(np.linalg.norm(ref)))
    observed = _slope(eps[tail], np.where(res[tail] > rfloor, res[tail], 0.0))
    est = LimitEstimate(
        val.reshape(shape), observed, eps, res, "converged", f"richardson-median(p={p})",
        None if reference is None else np.asarray(reference, dtype=float).reshape(shape),
    )
    est.values = V.reshape((K,) + shape)
    return est


def estimate_limit(
    op, fld, x, eps0=0.2, ratio=0.5, steps=8, jitter_seed=0,
    sphere_degree=DEFAULT_SPHERE_DEGREE, ball_degree=DEFAULT_BALL_DEGREE, reference=None,
):
    """Estimate A u(x) = lim A_eps u(x) along a jittered geometric schedule.

    The reference for residuals is ``reference`` if given, else the exact
    A u(x) when the field is smooth and has a derivative evaluator, else the
    extrapolated value.
    """
    eps = geometric_schedule(eps0, ratio, steps, jitter_seed)
    x, eps = _check(op, fld, x, eps)
    bnd, inter = _truncated_terms(op, fld, x, eps, sphere_degree, ball_degree)
    if reference is None and fld.smooth:
        from .operator import apply_operator

        ref = apply_operator(op, fld, x)
        reference = ref if np.all(np.isfinite(ref)) else None
    est = robust_limit(eps, bnd + inter, reference)
    order = np.argsort(-eps, kind="stable")
    est.boundary_norms = np.linalg.norm(bnd[order], axis=1)
    est.interior_norms = np.linalg.norm(inter[order], axis=1)
    return est


def spherical_mean(fld, x, eps, sphere_degree=DEFAULT_SPHERE_DEGREE):
    """(1/sigma_{n-1}) sum_i w_i u(x + eps xi_i)."""
    x, e = _check(None, fld, x, eps)
    rule = make_sphere_rule(fld.n, sphere_degree)
    return rule.weights @ fld(x + e[0] * rule.nodes) / sphere_area(fld.n)


def harmonic_difference(fld, x, eps, sphere_degree=DEFAULT_SPHERE_DEGREE):
    """(1/omega_n) sum_i w_i ((u(x + eps eta_i) - u(x)) / eps) (x) eta_i, an E x n matrix."""
    x, e = _check(None, fld, x, eps)
    rule = make_sphere_rule(fld.n, sphere_degree)
    diff = (fld(x + e[0] * rule.nodes) - fld(x)) / e[0]
    return np.einsum("k,ke,kj->ej", rule.weights, diff, rule.nodes) / ball_volume(fld.n)


@dataclass
class HarmonicDifferential:
    matrix: np.ndarray
    limit: LimitEstimate


def harmonic_differential(fld, x, eps_schedule, sphere_degree=DEFAULT_SPHERE_DEGREE):
    """Limit of ``harmonic_difference`` along the given radii."""
    eps = np.atleast_1d(np.asarray(eps_schedule, dtype=float))
    x, eps = _check(None, fld, x, eps)
    mats = np.array([harmonic_difference(fld, x, e, sphere_degree) for e in eps])
    reference = None
    if fld.smooth:
        ref = fld.jacobian(x)
        reference = ref if np.all(np.isfinite(ref)) else None
    est = robust_limit(eps, mats, reference)
    return HarmonicDifferential(est.value, est)


def _projections(op, x, nodes, tol):
    mats = op.symbol(np.broadcast_to(x, nodes.shape), nodes)
    _, s, Vh = np.linalg.svd(mats, full_matrices=True)
    smax = np.maximum(s[:, :1], 1e-300)
    ranks = np.sum(s > tol * smax, axis=1)
    if np.all(ranks == op.dimE):
        return None
    P = np.empty((len(nodes), op.dimE, op.dimE))
    for k, r in enumerate(ranks):
        V = Vh[k, :r].T
        P[k] = V @ V.T
    return P


def adapted_difference(op, fld, x, eps, blowup=None, sphere_degree=DEFAULT_SPHERE_DEGREE, tol=DEFAULT_RANK_TOL):
    """(1/omega_n) sum_i w_i P(xi_i) ((u(x + eps xi_i) - b(xi_i)) / eps) (x) xi_i

    with P(xi) = A(x, xi)^+ A(x, xi). ``blowup`` b is a callable on unit
    vectors, a constant E-vector, or None for the constant u(x). When every
    P(xi_i) is the identity the projection step is skipped entirely.
    """
    x, e = _check(op, fld, x, eps)
    rule = make_sphere_rule(op.n, sphere_degree)
    u = fld(x + e[0] * rule.nodes)
    if blowup is None:
        b = np.broadcast_to(fld(x), u.shape)
    elif callable(blowup):
        b = np.asarray(blowup(rule.nodes), dtype=float)
    else:
        b = np.broadcast_to(np.asarray(blowup, dtype=float), u.shape)
    diff = (u - b) / e[0]
    P = _projections(op, x, rule.nodes, tol)
    if P is not None:
        diff = np.einsum("kab,kb->ka", P, diff)
    return np.einsum("k,ke,kj->ej", rule.weights, diff, rule.nodes) / ball_volume(op.n)


def cancellation_identity_check(op, fld, x, eps, const_blowup, sphere_degree=DEFAULT_SPHERE_DEGREE):
    """| sum_i w_i A(xi_i) u(x + eps xi_i) - sum_k w_k A(eta_k) (eps D eta_k) |
    where D is the adapted difference with constant blow-up; same rule on both sides."""
    if not (op.constant_coefficients and op.homogeneous):
        raise CapabilityError("cancellation identity needs a homogeneous constant-coefficient operator")
    x, e = _check(op, fld, x, eps)
    rule = make_sphere_rule(op.n, sphere_degree)
    sym = op.symbol(x, rule.nodes)
    lhs = np.einsum("k,kfe,ke->f", rule.weights, sym, fld(x + e[0] * rule.nodes))
    D = adapted_difference(op, fld, x, e[0], blowup=const_blowup, sphere_degree=sphere_degree)
    rhs = np.einsum("k,kfe,ej,kj->f", rule.weights, sym, e[0] * D, rule.nodes)
    return float(np.linalg.norm(lhs - rhs))


def flux_scale(op, fld, x, eps, sphere_degree=DEFAULT_SPHERE_DEGREE):
    """sum_i w_i |A(xi_i)| |u(x + eps xi_i)|: magnitude of the flux sum without cancellation."""
    rule = make_sphere_rule(op.n, sphere_degree)
    x = np.asarray(x, dtype=float)
    sym = op.symbol(x, rule.nodes)
    u = fld(x + eps * rule.nodes)
    return float(np.sum(rule.weights * np.linalg.norm(sym, axis=(1, 2)) * np.linalg.norm(u, axis=1)))
