"""Principal-symbol classification: ellipticity, rank profile, wave cone,
cancellation properties and hyperbolic directions."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, qmc

from .errors import ArgumentError, PreconditionError

DEFAULT_RANK_TOL = 1e-8
DEFAULT_COMPLEX_MARGIN = 1e-6


def pseudo_inverse(M, tol=1e-12):
    """Moore-Penrose inverse via SVD, dropping singular values <= tol * sigma_max."""
    M = np.asarray(M)
    if M.size == 0:
        return np.zeros(M.shape[::-1], dtype=M.dtype)
    U, s, Vh = np.linalg.svd(M, full_matrices=False)
    if s[0] == 0:
        return np.zeros(M.shape[::-1], dtype=M.dtype)
    keep = s > tol * s[0]
    return (Vh[keep].conj().T / s[keep]) @ U[:, keep].conj().T


def _rank(s, tol):
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def kernel_projection(op, x, xi, tol=DEFAULT_RANK_TOL, complement=False):
    """Orthogonal projection A(x,xi)^+ A(x,xi) onto (ker A(x,xi))^perp.

    Injective symbols return the identity exactly.
    """
    M = op.symbol(np.asarray(x, dtype=float), np.asarray(xi, dtype=float))
    _, s, Vh = np.linalg.svd(M, full_matrices=True)
    r = _rank(s, tol)
    if r == op.dimE:
        P = np.eye(op.dimE)
    else:
        V = Vh[:r].T
        P = V @ V.T
    return np.eye(op.dimE) - P if complement else P


def sphere_samples(n, count, seed=0):
    """Scrambled-Halton directions pushed through the Gaussian quantile, plus
    +-e_i and the normalized +-e_i +-e_j."""
    extra = []
    eye = np.eye(n)
    for i in range(n):
        extra += [eye[i], -eye[i]]
    for i, j in combinations(range(n), 2):
        for a in (1, -1):
            for b in (1, -1):
                extra.append((a * eye[i] + b * eye[j]) / np.sqrt(2))
    pts = [np.array(extra)]
    if count > 0 and n > 1:
        u = qmc.Halton(d=n, scramble=True, seed=seed).random(count)
        g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        pts.append(g)
    return np.concatenate(pts)


def complex_sphere_samples(n, count, seed=1):
    u = qmc.Halton(d=2 * n, scramble=True, seed=seed).random(count)
    g = norm.ppf(np.clip(u, 1e-12, 1 - 1e-12))
    z = g[:, :n] + 1j * g[:, n:]
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def isotropic_probes(n):
    """(e_j +- i e_k)/sqrt(2): the usual places where real-elliptic symbols lose complex injectivity."""
    eye = np.eye(n)
    out = [(eye[j] + s * 1j * eye[k]) / np.sqrt(2) for j, k in combinations(range(n), 2) for s in (1, -1)]
    return np.array(out) if out else np.zeros((0, n), dtype=complex)


def _smallest_injective_sv(M, dimE):
    s = np.linalg.svd(M, compute_uv=False)
    if M.shape[-2] < dimE:
        return np.zeros(M.shape[:-2])
    return s[..., dimE - 1]


@dataclass
class SymbolReport:
    operator: str
    x: list
    samples: int
    min_singular_value: float
    max_singular_value: float
    real_margin: float
    min_complex_singular_value: float
    complex_margin: float
    complex_argmin: list
    rank_histogram: dict
    elliptic: bool
    complex_elliptic: bool
    constant_rank: bool
    wave_cone_samples: list
    characteristic_directions: list
    cancelling: bool
    cancelling_dim: int
    cocancelling: bool
    cocancelling_dim: int
    spanning: bool
    spanning_dim: int
    lorentz_samples: list
    constant_coefficients: bool
    tolerances: dict = field(default_factory=dict)

    def to_dict(self, include_bases=False):
        d = asdict(self)
        d["rank_histogram"] = {str(k): v for k, v in sorted(self.rank_histogram.items())}
        if include_bases:
            d["wave_cone_samples"] = [
                {"xi": [float(v) for v in xi], "kernel": np.asarray(K).tolist()} for xi, K in self.wave_cone_samples
            ]
        else:
            d["wave_cone_samples"] = [
                {"xi": [float(v) for v in xi], "kernel_dim": int(np.shape(K)[1])} for xi, K in self.wave_cone_samples
            ]
        d["characteristic_directions"] = [[float(v) for v in xi] for xi in self.characteristic_directions]
        d["lorentz_samples"] = [[float(v) for v in xi] for xi in self.lorentz_samples]
        return d


def _intersect(Q, basis, tol):
    """Intersection of span(Q) with span(basis); both orthonormal column sets."""
    if Q.shape[1] == 0:
        return Q
    if basis.shape[1] == 0:
        return Q[:, :0]
    P = basis @ basis.T
    R = Q - P @ Q
    _, s, Vh = np.linalg.svd(R, full_matrices=True)
    s_full = np.zeros(Q.shape[1])
    s_full[: len(s)] = s
    null = Vh[s_full <= tol].T
    if null.shape[1] == 0:
        return Q[:, :0]
    W = Q @ null
    u, sv, _ = np.linalg.svd(W, full_matrices=False)
    return u[:, sv > 0.5]


def _subspace_intersections(mats, dimE, dimF, tol):
    ker = np.eye(dimE)
    img = np.eye(dimF)
    for M in mats:
        U, s, Vh = np.linalg.svd(M, full_matrices=True)
        r = _rank(s, tol)
        img = _intersect(img, U[:, :r], tol)
        ker = _intersect(ker, Vh[r:].T, tol)
    return ker, img


def cancelling_cocancelling(op, samples=400, tol=DEFAULT_RANK_TOL, x=None):
    """Dimensions of the intersections of all sampled images and kernels.

    Returns ``((cancelling, dim), (cocancelling, dim))``. Variable-coefficient
    operators are frozen at ``x`` (default origin).
    """
    x = np.zeros(op.n) if x is None else np.asarray(x, dtype=float)
    xis = sphere_samples(op.n, samples)
    mats = op.symbol(x, xis)
    ker, img = _subspace_intersections(mats, op.dimE, op.dimF, tol)
    return (img.shape[1] == 0, int(img.shape[1])), (ker.shape[1] == 0, int(ker.shape[1]))


def wave_cone(op, x, samples=400, tol=DEFAULT_RANK_TOL):
    """(xi, kernel basis) for each sampled xi where A(x, xi) is not injective."""
    x = np.asarray(x, dtype=float)
    xis = sphere_samples(op.n, samples)
    mats = op.symbol(x, xis)
    out = []
    for xi, M in zip(xis, mats):
        _, s, Vh = np.linalg.svd(M, full_matrices=True)
        r = _rank(s, tol)
        if r < op.dimE:
            out.append((xi, Vh[r:].T.copy()))
    return out


def _complex_search(op, x, count, seed, probes):
    A = op.coefficients(x).astype(complex)

    def smin(z):
        z = np.atleast_2d(z)
        return _smallest_injective_sv(np.einsum("kj,jfe->kfe", z, A), op.dimE)

    cands = [complex_sphere_samples(op.n, count, seed)]
    cands.append(isotropic_probes(op.n))
    if probes is not None and len(probes):
        p = np.asarray(probes, dtype=complex)
        cands.append(p / np.linalg.norm(p, axis=1, keepdims=True))
    Z = np.concatenate(cands)
    vals = smin(Z)
    best = np.argsort(vals)[:6]

    def objective(v):
        z = v[: op.n] + 1j * v[op.n :]
        nz = np.linalg.norm(z)
        return float(smin(z / nz)[0]) if nz > 0 else np.inf

    best_val, best_z = float(vals[best[0]]), Z[best[0]]
    for k in best:
        v0 = np.concatenate([Z[k].real, Z[k].imag])
        res = minimize(objective, v0, method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 4000})
        if res.fun < best_val:
            z = res.x[: op.n] + 1j * res.x[op.n :]
            best_val, best_z = float(res.fun), z / np.linalg.norm(z)
    return best_val, best_z


def classify(
    op,
    x=None,
    samples=None,
    tol=DEFAULT_RANK_TOL,
    complex_samples=None,
    complex_margin_tol=DEFAULT_COMPLEX_MARGIN,
    complex_probes=None,
    seed=0,
):
    """Sample the symbol over the real and complex unit spheres and build a SymbolReport."""
    x = np.zeros(op.n) if x is None else np.asarray(x, dtype=float)
    if x.shape != (op.n,):
        raise ArgumentError(f"point must have length {op.n}")
    samples = 50 * op.n if samples is None else int(samples)
    if samples < 50 * op.n:
        raise ArgumentError(f"need at least {50 * op.n} sphere samples, got {samples}")
    xis = sphere_samples(op.n, samples, seed)
    mats = op.symbol(x, xis)
    U, s, Vh = np.linalg.svd(mats, full_matrices=True)
    smax_all = float(np.max(s[:, 0])) if s.size else 0.0
    ranks = np.array([_rank(si, tol) for si in s])
    hist = {}
    for r in ranks:
        hist[int(r)] = hist.get(int(r), 0) + 1
    smin = _smallest_injective_sv(mats, op.dimE)
    min_sv = float(np.min(smin))
    elliptic = bool(np.all(ranks == op.dimE))

    wave, chars, lorentz = [], [], []
    for k in np.flatnonzero(ranks < op.dimE):
        wave.append((xis[k], Vh[k, ranks[k] :].T.copy()))
        chars.append(xis[k])
        if op.dimE == op.dimF:
            lorentz.append(xis[k])

    ker, img = _subspace_intersections(mats, op.dimE, op.dimF, tol)
    if wave:
        span = np.hstack([K for _, K in wave])
        span_dim = int(np.linalg.matrix_rank(span, tol=1e-8)) if span.size else 0
    else:
        span_dim = 0

    scale = smax_all if smax_all > 0 else 1.0
    csamples = 20 * op.n * op.n if complex_samples is None else int(complex_samples)
    cmin, cz = _complex_search(op, x, csamples, seed + 1, complex_probes)
    cmargin = cmin / scale
    return SymbolReport(
        operator=op.name,
        x=[float(v) for v in x],
        samples=len(xis),
        min_singular_value=min_sv,
        max_singular_value=smax_all,
        real_margin=min_sv / scale,
        min_complex_singular_value=cmin,
        complex_margin=cmargin,
        complex_argmin=[[float(z.real), float(z.imag)] for z in cz],
        rank_histogram=hist,
        elliptic=elliptic,
        complex_elliptic=bool(elliptic and cmargin > complex_margin_tol),
        constant_rank=len(hist) == 1,
        wave_cone_samples=wave,
        characteristic_directions=chars,
        cancelling=img.shape[1] == 0,
        cancelling_dim=int(img.shape[1]),
        cocancelling=ker.shape[1] == 0,
        cocancelling_dim=int(ker.shape[1]),
        spanning=span_dim == op.dimE,
        spanning_dim=span_dim,
        lorentz_samples=lorentz,
        constant_coefficients=op.constant_coefficients,
        tolerances={"rank_rel": tol, "complex_margin": complex_margin_tol, "complex_samples": csamples},
    )


@dataclass
class HyperbolicCertificate:
    hyperbolic: bool
    worst_asymmetry: float
    worst_imaginary: float
    tested_directions: int
    degenerate_directions: list


def hyperbolic_direction_test(op, nu, samples=200, tol=1e-8, x=None):
    """Check that A(nu)^{-1} A(xi) is symmetric with real spectrum for sampled xi orthogonal to nu.

    The certificate lists the directions -lambda nu + xi on which the symbol
    degenerates, one per real eigenvalue lambda.
    """
    if op.dimE != op.dimF:
        raise PreconditionError("hyperbolic direction test needs a square symbol")
    x = np.zeros(op.n) if x is None else np.asarray(x, dtype=float)
    nu = np.asarray(nu, dtype=float)
    nu = nu / np.linalg.norm(nu)
    Anu = op.symbol(x, nu)
    s = np.linalg.svd(Anu, compute_uv=False)
    if s[-1] <= tol * max(s[0], 1e-300):
        raise PreconditionError("symbol is singular in the given direction")
    if op.n == 1:
        return HyperbolicCertificate(True, 0.0, 0.0, 0, [])
    xis = sphere_samples(op.n, samples)
    xis = xis - np.outer(xis @ nu, nu)
    norms = np.linalg.norm(xis, axis=1)
    xis = xis[norms > 1e-6] / norms[norms > 1e-6, None]
    inv = np.linalg.inv(Anu)
    worst_asym = worst_imag = 0.0
    degenerate = []
    for xi in xis:
        M = inv @ op.symbol(x, xi)
        scale = max(np.linalg.norm(M), 1e-300)
        worst_asym = max(worst_asym, float(np.linalg.norm(M - M.T) / scale))
        lam = np.linalg.eigvals(M)
        worst_imag = max(worst_imag, float(np.max(np.abs(lam.imag)) / scale))
        for l in lam[np.abs(lam.imag) <= tol * scale].real:
            d = xi - l * nu
            degenerate.append((d / np.linalg.norm(d)).tolist())
    ok = worst_asym <= tol and worst_imag <= tol
    return HyperbolicCertificate(bool(ok), worst_asym, worst_imag, len(xis), degenerate)
