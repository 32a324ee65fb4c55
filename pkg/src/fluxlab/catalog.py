"""Ready-made operators and fields with known reference facts.

Each entry carries ``facts`` (name -> expected value) and ``sources``
(name -> short note on where the value comes from: a definition, a hand
computation, or a classical worked example).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Any

import numpy as np

from .errors import ArgumentError
from .fields import AnalyticField, Box
from .operator import make_operator
from .poly import MultiPoly, PolyArray
from .quadrature import sphere_area

J = np.array([[0.0, -1.0], [1.0, 0.0]])
GAMMA0 = np.array([[0.0, -1.0], [1.0, 0.0]])
GAMMA1 = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass
class CatalogEntry:
    id: str
    kind: str
    obj: Any
    facts: dict = field(default_factory=dict)
    sources: dict = field(default_factory=dict)
    note: str = ""


# ---------------------------------------------------------------- operators


def cauchy_riemann():
    return make_operator("cauchy-riemann", [0.5 * np.eye(2), 0.5 * J])


def total_derivative(n, m=1):
    """(Du)_{i*n+j} = d_j u_i."""
    A = np.zeros((n, m * n, m))
    for i in range(m):
        for j in range(n):
            A[j, i * n + j, i] = 1.0
    return make_operator(f"grad-{n}" if m == 1 else f"total-derivative-{n}x{m}", A)


def divergence(n):
    A = np.zeros((n, 1, n))
    for j in range(n):
        A[j, 0, j] = 1.0
    return make_operator(f"div-{n}", A)


def curl_matrix(n):
    """Row-wise curl of an n x n matrix field: (curl M)_{i,(j,k)} = d_j M_ik - d_k M_ij for j < k."""
    pairs = list(combinations(range(n), 2))
    A = np.zeros((n, n * len(pairs), n * n))
    for i in range(n):
        for p, (j, k) in enumerate(pairs):
            A[j, i * len(pairs) + p, i * n + k] += 1.0
            A[k, i * len(pairs) + p, i * n + j] -= 1.0
    return make_operator(f"curl-{n}", A)


def form_basis(n):
    """Subsets of {0..n-1} ordered by grade, then lexicographically."""
    return [s for g in range(n + 1) for s in combinations(range(n), g)]


def wedge_matrix(n, j):
    """Matrix of w -> e_j ^ w on the full exterior algebra."""
    basis = form_basis(n)
    index = {s: k for k, s in enumerate(basis)}
    W = np.zeros((len(basis), len(basis)))
    for k, s in enumerate(basis):
        if j in s:
            continue
        sign = (-1) ** sum(1 for i in s if i < j)
        W[index[tuple(sorted(s + (j,)))], k] = sign
    return W


def interior_matrix(n, v):
    """Matrix of w -> v _| w (adjoint of v ^ . for the standard inner product)."""
    return sum(v[j] * wedge_matrix(n, j).T for j in range(n))


def exterior_derivative(n):
    if n not in (2, 3):
        raise ArgumentError("exterior derivative fixtures exist for n = 2, 3")
    return make_operator(f"d-{n}", np.array([wedge_matrix(n, j) for j in range(n)]))


def _sym_rows(n, trace_free):
    """Coefficients of (d_k u_i + d_i u_k)/2 - [trace_free] delta_ik div u / n, row (i,k) -> i*n+k."""
    A = np.zeros((n, n * n, n))
    for i in range(n):
        for k in range(n):
            row = i * n + k
            A[k, row, i] += 0.5
            A[i, row, k] += 0.5
            if trace_free and i == k:
                for l in range(n):
                    A[l, row, l] -= 1.0 / n
    return A


def symmetric_gradient(n):
    return make_operator(f"sym-grad-{n}", _sym_rows(n, False))


def deviatoric(n):
    return make_operator(f"deviatoric-{n}", _sym_rows(n, True))


def tracefree_symmetric_basis(n):
    """Orthonormal basis (Frobenius) of trace-free symmetric n x n matrices, as rows of length n*n."""
    rows = []
    for i, k in combinations(range(n), 2):
        m = np.zeros((n, n))
        m[i, k] = m[k, i] = 1 / np.sqrt(2)
        rows.append(m.reshape(-1))
    for d in range(1, n):
        diag = np.zeros(n)
        diag[:d] = 1.0
        diag[d] = -d
        diag /= np.linalg.norm(diag)
        rows.append(np.diag(diag).reshape(-1))
    return np.array(rows)


def ahlfors(n):
    """Conformal Killing operator with values in trace-free symmetric matrices."""
    Bm = tracefree_symmetric_basis(n)
    A = np.einsum("bf,jfe->jbe", Bm, _sym_rows(n, True))
    return make_operator(f"ahlfors-{n}", A)


def skew_trace(n):
    """(d_k u_i - d_i u_k)/2 + delta_ik div u / n: elliptic but not C-elliptic."""
    A = np.zeros((n, n * n, n))
    for i in range(n):
        for k in range(n):
            row = i * n + k
            A[k, row, i] += 0.5
            A[i, row, k] -= 0.5
            if i == k:
                for l in range(n):
                    A[l, row, l] += 1.0 / n
    return make_operator(f"skew-trace-{n}", A)


def mizohata(k):
    """Symbol xi_1 I + x_1^k xi_2 J."""
    xk = MultiPoly.variable(0, 2, k)
    A2 = np.array([[0.0, -xk], [xk, 0.0]], dtype=object)
    return make_operator(f"mizohata-{k}", np.array([np.eye(2).astype(object), A2]))


def dirac_cl11():
    return make_operator("dirac-cl11", [GAMMA0, GAMMA1])


# ------------------------------------------------------------------- fields


def polynomial_field(name, polys, domain, n):
    """Field with components given by a PolyArray (or nested MultiPoly list) of shape (E,)."""
    P = polys if isinstance(polys, PolyArray) else PolyArray.from_entries(polys, n)
    D = [P.deriv(j) for j in range(n)]

    def value(x):
        return P(x)

    def derivative(x):
        return np.stack([d(x) for d in D], axis=-1)

    return AnalyticField(n, P.shape[0], domain, value, derivative, name=name)


def affine_field(M, c, domain=None, name="affine"):
    M = np.asarray(M, dtype=float)
    c = np.asarray(c, dtype=float)
    E, n = M.shape
    domain = domain or Box.cube(n, 2.0)
    return AnalyticField(
        n, E, domain, lambda x: x @ M.T + c, lambda x: np.broadcast_to(M, np.shape(x)[:-1] + M.shape), name=name
    )


def random_polynomial_field(n, E, degree, seed, domain=None, name=None):
    rng = np.random.default_rng(seed)
    comps = []
    exps = [e for e in np.ndindex(*(degree + 1,) * n) if sum(e) <= degree]
    for _ in range(E):
        comps.append(MultiPoly(n, tuple((e, rng.normal()) for e in exps)))
    return polynomial_field(name or f"poly{degree}-{n}x{E}-s{seed}", comps, domain or Box.cube(n, 2.0), n)


def holomorphic_power(k, domain=None):
    """Real form (Re z^k, Im z^k)."""

    def value(x):
        z = (x[..., 0] + 1j * x[..., 1]) ** k
        return np.stack([z.real, z.imag], axis=-1)

    def derivative(x):
        f = k * (x[..., 0] + 1j * x[..., 1]) ** (k - 1)
        # columns d/dx = f', d/dy = i f'
        return np.stack(
            [np.stack([f.real, -f.imag], axis=-1), np.stack([f.imag, f.real], axis=-1)], axis=-2
        )

    return AnalyticField(2, 2, domain or Box.cube(2, 2.0), value, derivative, name=f"z{k}")


def point_source(n, domain=None):
    """x/|x|^n, smooth off the origin."""

    def value(x):
        r = np.linalg.norm(x, axis=-1, keepdims=True)
        return x / r**n

    def derivative(x):
        r = np.linalg.norm(x, axis=-1)[..., None, None]
        outer = x[..., :, None] * x[..., None, :]
        return np.eye(n) / r**n - n * outer / r ** (n + 2)

    return AnalyticField(
        n, n, domain or Box.cube(n, 2.0), value, derivative, name=f"point-source-{n}", singular_points=(tuple([0.0] * n),)
    )


def point_source_form(n, domain=None):
    """x/|x|^n as a 1-form inside the full exterior algebra of R^n."""
    base = point_source(n, domain)
    dim = 2**n

    def value(x):
        out = np.zeros(np.shape(x)[:-1] + (dim,))
        out[..., 1 : n + 1] = base(x)
        return out

    def derivative(x):
        out = np.zeros(np.shape(x)[:-1] + (dim, n))
        out[..., 1 : n + 1, :] = base.jacobian(x)
        return out

    return AnalyticField(
        n, dim, base.domain, value, derivative, name=f"point-source-form-{n}", singular_points=base.singular_points,
        blowup=lambda xi: value(xi),
    )


def piecewise_polynomial_field(name, n, axis, offset, minus, plus, domain=None):
    """Polynomial on each side of the plane x_axis = offset (plus side included at the plane)."""
    Pm = PolyArray.from_entries(minus, n)
    Pp = PolyArray.from_entries(plus, n)
    Dm = [Pm.deriv(j) for j in range(n)]
    Dp = [Pp.deriv(j) for j in range(n)]

    def value(x):
        side = (np.asarray(x)[..., axis] >= offset)[..., None]
        return np.where(side, Pp(x), Pm(x))

    def derivative(x):
        side = (np.asarray(x)[..., axis] >= offset)[..., None, None]
        return np.where(side, np.stack([d(x) for d in Dp], -1), np.stack([d(x) for d in Dm], -1))

    return AnalyticField(
        n, Pm.shape[0], domain or Box.cube(n, 2.0), value, derivative, name=name, discontinuities=((axis, float(offset)),)
    )


def sign_jump(n, v0, offset=0.0, domain=None, name=None):
    """sign(x_n - offset) v0."""
    v0 = np.asarray(v0, dtype=float)
    return piecewise_polynomial_field(name or f"sign-jump-{n}", n, n - 1, offset, list(-v0), list(v0), domain)


def tangential_jump_form(n=3, offset=0.0, domain=None):
    """e_n ^ omega with d-closed omega on each side; the jump lies in ker(e_n ^ .)."""
    basis = form_basis(n)
    idx = {s: k for k, s in enumerate(basis)}
    X = [MultiPoly.variable(j, n) for j in range(n)]
    one = MultiPoly.constant(1.0, n)
    plus = [MultiPoly(n)] * len(basis)
    minus = [MultiPoly(n)] * len(basis)
    last = n - 1
    if n == 2:
        plus[idx[(1,)]] = (one + X[1]) * 1.5
        minus[idx[(1,)]] = one * -0.5
    elif n == 3:
        g = one + X[2]
        # e3 ^ (c + x2 e1 + x1 e2) = c e3 - x2 e13 - x1 e23
        plus[idx[(2,)]] = g * 1.5
        plus[idx[(0, 2)]] = -(g * X[1])
        plus[idx[(1, 2)]] = -(g * X[0])
        minus[idx[(2,)]] = one * -0.5
        minus[idx[(0, 2)]] = X[1] * -2.0
        minus[idx[(1, 2)]] = X[0] * -2.0
    else:
        raise ArgumentError("tangential jump forms exist for n = 2, 3")
    return piecewise_polynomial_field(f"tangential-jump-form-{n}", n, last, offset, minus, plus, domain)


def homogeneous_ratio(domain=None):
    """q(x)^{-1} P(x) with P cubic, q = x1^2 + 2 x2^2: continuous, not differentiable at 0."""

    def parts(x):
        x1, x2 = x[..., 0], x[..., 1]
        q = x1**2 + 2 * x2**2
        P = np.stack([x1**3 + 2 * x1 * x2**2 - x2**3, x1**2 * x2 + 0.5 * x2**3], axis=-1)
        return P, q

    def value(x):
        P, q = parts(np.asarray(x, dtype=float))
        with np.errstate(invalid="ignore", divide="ignore"):
            out = P / q[..., None]
        return np.where(q[..., None] == 0, 0.0, out)

    return AnalyticField(
        2, 2, domain or Box.cube(2, 2.0), value, None, name="homogeneous-ratio", singular_points=((0.0, 0.0),),
        blowup=value,
    )


def radial_norm(n=2, domain=None):
    return AnalyticField(
        n, 1, domain or Box.cube(n, 2.0), lambda x: np.linalg.norm(x, axis=-1, keepdims=True), None,
        name=f"norm-{n}", singular_points=(tuple([0.0] * n),),
    )


def lipschitz_kink(n=2, E=2, domain=None):
    """u_e(x) = |x_0 + (-1)^e x_{n-1} - c_e| + 0.3 x_{(e+1) mod n}: Lipschitz, not C^1, kinked on oblique planes."""
    c = np.array([0.05, -0.03, 0.02, 0.04])[:E]

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.stack(
            [np.abs(x[..., 0] + (-1) ** e * x[..., n - 1] - c[e]) + 0.3 * x[..., (e + 1) % n] for e in range(E)],
            axis=-1,
        )

    return AnalyticField(n, E, domain or Box.cube(n, 2.0), value, None, name=f"lipschitz-kink-{n}x{E}")


def step_field(n=2, axis=0, offset=0.0, domain=None):
    def value(x):
        return np.where(np.asarray(x)[..., axis:axis + 1] >= offset, 1.0, -1.0)

    def derivative(x):
        return np.zeros(np.shape(x)[:-1] + (1, n))

    return AnalyticField(
        n, 1, domain or Box.cube(n, 2.0), value, derivative, name=f"step-{n}", discontinuities=((axis, float(offset)),)
    )


def smooth_field(n, E, seed=0, domain=None):
    """u_e(x) = sin(<a_e,x> + b_e) + c_e exp(<g_e,x>), analytic with closed-form Jacobian."""
    rng = np.random.default_rng(1000 + seed)
    a = 0.9 * rng.normal(size=(E, n))
    b = rng.uniform(0, np.pi, size=E)
    c = rng.uniform(0.3, 1.0, size=E)
    g = 0.5 * rng.normal(size=(E, n))

    def value(x):
        x = np.asarray(x, dtype=float)
        return np.sin(x @ a.T + b) + c * np.exp(x @ g.T)

    def derivative(x):
        x = np.asarray(x, dtype=float)
        s = np.cos(x @ a.T + b)[..., None] * a
        e = (c * np.exp(x @ g.T))[..., None] * g
        return s + e

    return AnalyticField(n, E, domain or Box.cube(n, 2.0), value, derivative, name=f"smooth-{n}x{E}-s{seed}")


def sym_grad_kernel_field(n, seed=0):
    rng = np.random.default_rng(seed)
    S = rng.normal(size=(n, n))
    return affine_field(S - S.T, rng.normal(size=n), name=f"rigid-motion-{n}")


def conformal_killing_field(n, seed=0):
    """<a,x>x - (a/2)|x|^2 + Sx + b + c x with S skew."""
    rng = np.random.default_rng(seed)
    a, b = rng.normal(size=n), rng.normal(size=n)
    S = rng.normal(size=(n, n))
    S = S - S.T
    c = rng.normal()
    X = [MultiPoly.variable(j, n) for j in range(n)]
    r2 = sum((xj * xj for xj in X), MultiPoly(n))
    ax = sum((X[j] * a[j] for j in range(n)), MultiPoly(n))
    comps = []
    for i in range(n):
        p = ax * X[i] - r2 * (a[i] / 2) + b[i] + X[i] * c
        for j in range(n):
            p = p + X[j] * S[i, j]
        comps.append(p)
    return polynomial_field(f"conformal-killing-{n}", comps, Box.cube(n, 2.0), n)


# ------------------------------------------------------------------ catalog


def _op_entries():
    out = []

    def add(op, facts, sources, note=""):
        out.append(CatalogEntry(op.name, "operator", op, facts, sources, note))

    add(
        cauchy_riemann(),
        {"elliptic": True, "complex_elliptic": False, "constant_rank": True, "cocancelling": True, "cancelling": False,
         "pure_flux": True},
        {"elliptic": "det of the real form is (xi1^2+xi2^2)/4",
         "complex_elliptic": "det vanishes at zeta = (1, i)",
         "constant_rank": "injective square symbol", "cocancelling": "injective symbol",
         "cancelling": "every image is all of R^2", "pure_flux": "homogeneous, constant coefficients"},
        "real form of (d_x + i d_y)/2",
    )
    for n in (2, 3):
        add(total_derivative(n),
            {"elliptic": True, "complex_elliptic": True, "cancelling": True, "cocancelling": True},
            {"elliptic": "xi != 0 is injective on R", "complex_elliptic": "zeta != 0 is injective on C",
             "cancelling": "images span(xi) meet only in 0", "cocancelling": "injective"})
    add(total_derivative(2, 2),
        {"elliptic": True, "complex_elliptic": True, "cancelling": True},
        {"elliptic": "v -> v (x) xi injective", "complex_elliptic": "v -> v (x) zeta injective",
         "cancelling": "images {v (x) xi} meet only in 0"})
    for n in (2, 3):
        add(divergence(n),
            {"elliptic": False, "cocancelling": True, "cancelling": False, "constant_rank": True},
            {"elliptic": "kernel xi^perp", "cocancelling": "intersection of all xi^perp is 0",
             "cancelling": "image is R for every xi", "constant_rank": "rank 1 for every xi"})
    for n in (2, 3):
        add(curl_matrix(n),
            {"elliptic": False, "constant_rank": True, "cocancelling": True, "wave_cone_rank_one": True},
            {"elliptic": "kernel {a (x) xi}", "constant_rank": "kernel always n-dimensional",
             "cocancelling": "the sets {a (x) xi} meet only in 0",
             "wave_cone_rank_one": "kernel consists of rank-one matrices a (x) xi"})
    for n in (2, 3):
        add(exterior_derivative(n),
            {"elliptic": False, "constant_rank": True, "cocancelling": False, "cocancelling_dim": 1,
             "cancelling": False, "cancelling_dim": 1, "pure_flux": True},
            {"elliptic": "xi ^ xi = 0", "constant_rank": "ker(xi ^ .) = xi ^ Lambda for every xi",
             "cocancelling": "top-degree forms are killed by every xi ^ .",
             "cocancelling_dim": "the top-degree line", "cancelling": "top-degree forms lie in every image",
             "cancelling_dim": "the top-degree line", "pure_flux": "constant coefficients, B = 0"},
            "w -> sum_j e_j ^ d_j w on the full exterior algebra, basis ordered by grade then lexicographically")
    for n in (2, 3):
        add(symmetric_gradient(n),
            {"elliptic": True, "complex_elliptic": True, "cancelling": True},
            {"elliptic": "sym(v (x) xi) = 0 forces v = 0", "complex_elliptic": "same computation over C",
             "cancelling": "images meet only in 0"})
    add(deviatoric(3),
        {"elliptic": True, "complex_elliptic": True},
        {"elliptic": "finite-dimensional conformal Killing kernel", "complex_elliptic": "holds for n >= 3"})
    add(ahlfors(3),
        {"elliptic": True, "complex_elliptic": True},
        {"elliptic": "conformal Killing operator", "complex_elliptic": "holds for n >= 3"},
        "sym Du - (div u / n) I in orthonormal trace-free symmetric coordinates")
    add(skew_trace(3),
        {"elliptic": True, "complex_elliptic": False},
        {"elliptic": "skew(v (x) xi) = 0 and <v, xi> = 0 force v = 0",
         "complex_elliptic": "zeta = v = (1, i, 0) is in the kernel"},
        "(Du - Du^T)/2 + (div u / n) I")
    for k in (1, 2):
        add(mizohata(k),
            {"elliptic_at_origin": False, "elliptic_off_axis": True, "degenerate_directions_at_origin": [[0.0, 1.0], [0.0, -1.0]],
             "pure_flux": True},
            {"elliptic_at_origin": "xi1^2 + x1^(2k) xi2^2 vanishes at x1 = 0, xi = (0, +-1)",
             "elliptic_off_axis": "xi1^2 + x1^(2k) xi2^2 > 0 when x1 != 0",
             "degenerate_directions_at_origin": "same determinant", "pure_flux": "d_2 (x1^k J) = 0, B = 0"},
            "xi_1 I + x_1^k xi_2 J")
    add(dirac_cl11(),
        {"elliptic": False, "hyperbolic_in_e0": True, "light_cone": "xi0^2 = xi1^2"},
        {"elliptic": "det = xi0^2 - xi1^2", "hyperbolic_in_e0": "gamma0^{-1} gamma1 = diag(1, -1)",
         "light_cone": "det = xi0^2 - xi1^2"},
        "xi0 gamma0 + xi1 gamma1 with gamma0 = [[0,-1],[1,0]], gamma1 = [[0,1],[1,0]]")
    return out


def _field_entries():
    out = []
    for k in (1, 2, 3):
        out.append(CatalogEntry(f"z{k}", "field", holomorphic_power(k),
                                {"exact_Au": {"cauchy-riemann": 0.0}},
                                {"exact_Au": "holomorphic polynomial"}))
    for n in (2, 3):
        out.append(CatalogEntry(f"point-source-{n}", "field", point_source(n),
                                {"flux_around_origin": {f"div-{n}": sphere_area(n)}},
                                {"flux_around_origin": "divergence of x/|x|^n is the sphere area times delta_0"}))
        out.append(CatalogEntry(f"point-source-form-{n}", "field", point_source_form(n),
                                {"flux_around_origin": {f"d-{n}": 0.0}},
                                {"flux_around_origin": "nu ^ x/|x|^n = 0 on spheres about 0"}))
    out.append(CatalogEntry("tangential-jump-form-3", "field", tangential_jump_form(3),
                            {"weak_solution": {"d-3": True}}, {"weak_solution": "jump lies in ker(e3 ^ .)"}))
    out.append(CatalogEntry("tangential-jump-form-2", "field", tangential_jump_form(2),
                            {"weak_solution": {"d-2": True}}, {"weak_solution": "jump lies in ker(e2 ^ .)"}))
    out.append(CatalogEntry("sign-jump-2", "field", sign_jump(2, [1.0, 0.5]),
                            {"weak_solution": {"cauchy-riemann": False}},
                            {"weak_solution": "A(e2) v0 != 0 for an injective symbol"}))
    out.append(CatalogEntry("sign-jump-form-2", "field", sign_jump(2, [0.0, 1.0, 0.0, 0.0], name="sign-jump-form-2"),
                            {"weak_solution": {"d-2": False}}, {"weak_solution": "e2 ^ e1 != 0"}))
    out.append(CatalogEntry("homogeneous-ratio", "field", homogeneous_ratio(), {}, {}))
    out.append(CatalogEntry("norm-2", "field", radial_norm(2), {"harmonic_differential_at_origin": 0.0},
                            {"harmonic_differential_at_origin": "odd first moment of |xi| vanishes"}))
    out.append(CatalogEntry("lipschitz-kink", "field", lipschitz_kink(), {}, {}))
    out.append(CatalogEntry("step-2", "field", step_field(2), {"mollified_at_interface": 0.0},
                            {"mollified_at_interface": "symmetric half-mass"}))
    out.append(CatalogEntry("rigid-motion-3", "field", sym_grad_kernel_field(3),
                            {"exact_Au": {"sym-grad-3": 0.0}}, {"exact_Au": "skew linear part"}))
    out.append(CatalogEntry("conformal-killing-3", "field", conformal_killing_field(3),
                            {"exact_Au": {"deviatoric-3": 0.0, "ahlfors-3": 0.0}},
                            {"exact_Au": "conformal Killing field"}))
    for op in operator_objects():
        out.append(CatalogEntry(f"smooth-{op.name}", "field", smooth_field(op.n, op.dimE, seed=len(out)), {}, {}))
        out.append(CatalogEntry(f"quadratic-{op.name}", "field",
                                random_polynomial_field(op.n, op.dimE, 2, seed=len(out), name=f"quadratic-{op.name}"), {}, {}))
    return out


@lru_cache(maxsize=None)
def _ops():
    return tuple(_op_entries())


@lru_cache(maxsize=None)
def _fields():
    return tuple(_field_entries())


def operators():
    return list(_ops())


def operator_objects():
    return [e.obj for e in _ops()]


def fields():
    return list(_fields())


def entries():
    return operators() + fields()


def get(entry_id):
    for e in entries():
        if e.id == entry_id:
            return e
    raise ArgumentError(f"unknown catalog id {entry_id!r}")


def get_operator(entry_id):
    e = get(entry_id)
    if e.kind != "operator":
        raise ArgumentError(f"catalog id {entry_id!r} is not an operator")
    return e.obj


def get_field(entry_id):
    e = get(entry_id)
    if e.kind != "field":
        raise ArgumentError(f"catalog id {entry_id!r} is not a field")
    return e.obj


def smooth_pairs():
    """(operator, smooth non-polynomial field) pairs whose A u is known in closed form."""
    return [(e.obj, get_field(f"smooth-{e.id}")) for e in _ops()]
