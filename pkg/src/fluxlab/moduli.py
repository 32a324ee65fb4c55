"""p-modulus of finite surface families by convex optimization over grid densities."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from .errors import ArgumentError
from .fields import Box
from .quadrature import sphere_area


@dataclass(frozen=True, eq=False)
class Surface:
    points: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    label: str = ""

    @property
    def measure(self):
        return float(self.weights.sum())


@dataclass(frozen=True, eq=False)
class SurfaceFamily:
    surfaces: tuple
    bbox: Box
    label: str = "family"

    def __post_init__(self):
        for s in self.surfaces:
            if np.any(s.weights <= 0):
                raise ArgumentError(f"surface {s.label!r} has non-positive quadrature weights")
            if not np.all(self.bbox.contains(s.points)):
                raise ArgumentError(f"surface {s.label!r} leaves the bounding box")

    def __len__(self):
        return len(self.surfaces)

    def union(self, other, label=None):
        lo = np.minimum(self.bbox.lo, other.bbox.lo)
        hi = np.maximum(self.bbox.hi, other.bbox.hi)
        return SurfaceFamily(self.surfaces + other.surfaces, Box(tuple(lo), tuple(hi)), label or f"{self.label}+{other.label}")


def _unit_sphere_points(n, count):
    if n == 2:
        t = (np.arange(count) + 0.5) * 2 * np.pi / count
        return np.stack([np.cos(t), np.sin(t)], axis=1)
    if n == 3:
        # Fibonacci lattice: near-uniform, equal-area cells
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = np.pi * (1 + 5**0.5) * k
        r = np.sqrt(1 - z * z)
        return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    raise ArgumentError(f"sphere families are available for n = 2, 3, got {n}")


def sphere_surface(center, radius, points_per_surface, label=""):
    center = np.asarray(center, dtype=float)
    n = len(center)
    if not radius > 0:
        raise ArgumentError("sphere radius must be positive")
    xi = _unit_sphere_points(n, points_per_surface)
    w = np.full(points_per_surface, sphere_area(n) * radius ** (n - 1) / points_per_surface)
    return Surface(center + radius * xi, w, label or f"sphere(r={radius:g})")


def annulus_spheres(n=2, a=1.0, b=2.0, count=64, center=None, bbox=None, points_per_surface=None):
    """Concentric spheres with radii equally spaced on [a, b]."""
    if not 0 < a < b:
        raise ArgumentError("need 0 < a < b")
    if count < 1:
        raise ArgumentError("count must be >= 1")
    center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    bbox = bbox or Box.cube(n, b, center)
    m = points_per_surface or (4096 if n == 2 else 20000)
    radii = np.linspace(a, b, count) if count > 1 else np.array([a])
    surfaces = tuple(sphere_surface(center, r, m) for r in radii)
    return SurfaceFamily(surfaces, bbox, f"annulus-spheres(n={n},a={a:g},b={b:g},count={count})")


def annulus_modulus(n, a, b, p):
    """Closed form for the family of all spheres about one center with radii in [a, b]:
    M_p = sigma^{1-p} int_a^b r^{(n-1)(1-p)} dr."""
    s = sphere_area(n)
    e = (n - 1) * (1 - p)
    integral = np.log(b / a) if e == -1 else (b ** (e + 1) - a ** (e + 1)) / (e + 1)
    return float(s ** (1 - p) * integral)


@dataclass(frozen=True)
class GridSpec:
    lo: tuple
    hi: tuple
    shape: tuple

    @classmethod
    def cover(cls, box, cells):
        shape = (cells,) * box.n if np.isscalar(cells) else tuple(cells)
        return cls(tuple(box.lo), tuple(box.hi), tuple(int(k) for k in shape))

    @property
    def n(self):
        return len(self.shape)

    @property
    def h(self):
        return (np.array(self.hi) - np.array(self.lo)) / np.array(self.shape)

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def cell_volume(self):
        return float(np.prod(self.h))

    def cell_volumes(self):
        return np.full(self.size, self.cell_volume)

    def cell_index(self, points):
        points = np.asarray(points, dtype=float)
        lo, hi = np.array(self.lo), np.array(self.hi)
        tol = 1e-12 * (1 + np.abs(hi - lo))
        if np.any(points < lo - tol) or np.any(points > hi + tol):
            raise ArgumentError("grid does not cover the family's points")
        idx = np.floor((points - lo) / self.h).astype(int)
        idx = np.clip(idx, 0, np.array(self.shape) - 1)
        return np.ravel_multi_index(tuple(idx.T), self.shape)

    def to_dict(self):
        return {"lo": list(self.lo), "hi": list(self.hi), "shape": list(self.shape)}


def assemble_constraints(family, grid):
    """W[i, c] = quadrature weight of surface i falling in cell c (CSR, rows sum to measures)."""
    rows, cols, vals = [], [], []
    for i, s in enumerate(family.surfaces):
        cells = grid.cell_index(s.points)
        uniq, inv = np.unique(cells, return_inverse=True)
        rows.append(np.full(len(uniq), i))
        cols.append(uniq)
        vals.append(np.bincount(inv, weights=s.weights))
    if not rows:
        return sparse.csr_matrix((0, grid.size))
    return sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(len(family), grid.size)
    )


@dataclass
class ModulusSolution:
    p: float
    grid: object
    rho: np.ndarray = field(repr=False)
    primal: float
    dual: float
    slacks: np.ndarray = field(repr=False)
    iterations: int
    status: str
    method: str

    @property
    def gap(self):
        return self.primal - self.dual

    @property
    def converged(self):
        return self.status == "converged"

    def to_dict(self):
        return {
            "p": self.p,
            "grid": self.grid.to_dict() if hasattr(self.grid, "to_dict") else self.grid,
            "primal": self.primal,
            "dual": self.dual,
            "gap": self.gap,
            "min_slack": float(self.slacks.min()) if len(self.slacks) else None,
            "iterations": self.iterations,
            "status": self.status,
            "method": self.method,
        }


@dataclass(frozen=True)
class SolverOptions:
    rel_gap: float = 1e-4
    max_iter: int = 20000
    check_every: int = 10


def _dual_parts(W, vol, p, lam):
    s = np.maximum(W.T @ lam, 0.0)
    rho = (s / (p * vol)) ** (1.0 / (p - 1))
    value = lam.sum() - (p - 1) * float(vol @ rho**p)
    return value, rho


def _primal_from(W, vol, p, rho):
    load = W @ rho
    if load.size == 0 or load.min() <= 0:
        return np.inf, rho
    r = rho / load.min()
    return float(vol @ r**p), r


def _solve_lp(W, vol, grid, opts):
    m = W.shape[0]
    res = linprog(vol, A_ub=-W, b_ub=-np.ones(m), bounds=(0, None), method="highs")
    if res.status != 0:
        rho = np.zeros(W.shape[1])
        return ModulusSolution(1.0, grid, rho, np.inf, 0.0, W @ rho - 1, res.nit, "max-iterations", "highs-lp")
    lam = -np.asarray(res.ineqlin.marginals)
    return ModulusSolution(1.0, grid, res.x, float(res.fun), float(lam.sum()), W @ res.x - 1, res.nit, "converged", "highs-lp")


def solve_modulus(W, cell_volumes, p, grid=None, opts=None):
    """min sum_c vol_c rho_c^p subject to W rho >= 1, rho >= 0.

    p > 1: accelerated projected gradient ascent on the concave dual in the
    multipliers lambda >= 0; each iterate yields a dual lower bound and, after
    rescaling the induced density to feasibility, a primal upper bound.
    p = 1: the problem is a linear program, solved by HiGHS with its dual.
    """
    opts = opts or SolverOptions()
    if p < 1:
        raise ArgumentError("p must be >= 1")
    W = sparse.csr_matrix(W)
    vol = np.asarray(cell_volumes, dtype=float)
    m = W.shape[0]
    if m == 0:
        rho = np.zeros(W.shape[1])
        return ModulusSolution(float(p), grid, rho, 0.0, 0.0, np.zeros(0), 0, "converged", "empty-family")
    if p == 1:
        return _solve_lp(W, vol, grid, opts)
    # best multiple of the all-ones multiplier as warm start
    _, rho1 = _dual_parts(W, vol, p, np.ones(m))
    q = p / (p - 1)
    C = (p - 1) * float(vol @ rho1**p)
    lam = np.ones(m) * (m / (C * q)) ** (1 / (q - 1))
    val, rho = _dual_parts(W, vol, p, lam)
    best_dual, (best_primal, best_rho) = float(val), _primal_from(W, vol, p, rho)
    y, lam_prev, t_mom = lam.copy(), lam.copy(), 1.0
    step = 1.0 / max(float(sparse.linalg.norm(W) ** 2 / (2 * vol.min())), 1e-300) if p == 2 else 1.0
    status, it = "max-iterations", 0
    if best_primal - best_dual <= opts.rel_gap * best_primal:
        status = "converged"
    for it in range(1, opts.max_iter + 1):
        if status == "converged":
            it -= 1
            break
        gy, rho_y = _dual_parts(W, vol, p, y)
        grad = 1.0 - W @ rho_y
        while True:
            cand = np.maximum(y + step * grad, 0.0)
            d = cand - y
            gc, rho_c = _dual_parts(W, vol, p, cand)
            if gc >= gy + grad @ d - (d @ d) / (2 * step) - 1e-15 * abs(gy):
                break
            step *= 0.5
        stalled = False
        if gc < val:
            # adaptive restart keeps the ascent monotone; a plain step that cannot ascend means round-off stall
            stalled = t_mom == 1.0
            y, t_mom = lam.copy(), 1.0
        else:
            lam_prev, lam, val, rho = lam, cand, gc, rho_c
            t_next = 0.5 * (1 + np.sqrt(1 + 4 * t_mom**2))
            y = lam + ((t_mom - 1) / t_next) * (lam - lam_prev)
            t_mom = t_next
            step *= 1.1
        if stalled or it % opts.check_every == 0:
            best_dual = max(best_dual, float(val))
            pv, r = _primal_from(W, vol, p, rho)
            if pv < best_primal:
                best_primal, best_rho = pv, r
            if best_primal - best_dual <= opts.rel_gap * best_primal:
                status = "converged"
                break
            if stalled:
                status = "stalled"
                break
    best_dual = float(max(best_dual, val))
    return ModulusSolution(
        float(p), grid, best_rho, best_primal, best_dual, W @ best_rho - 1.0, it, status, "dual-accelerated-projected-gradient"
    )


def modulus(family, grid, p, opts=None):
    W = assemble_constraints(family, grid)
    return solve_modulus(W, grid.cell_volumes(), p, grid, opts)


def check_monotone_subadditive(nested=(), unions=(), abs_tol=1e-6):
    """Check M(F) <= M(F') for (F, F') in ``nested`` and M(F1 u F2) <= M(F1) + M(F2)
    for (F1, F2, F1 u F2) in ``unions``, each within the solver gaps plus ``abs_tol``."""
    report = {"monotone": [], "subadditive": [], "abs_tol": abs_tol}
    for small, big in nested:
        slack = small.gap + big.gap + abs_tol
        report["monotone"].append(
            {"smaller": small.primal, "larger": big.primal, "slack": slack, "ok": bool(small.primal <= big.primal + slack)}
        )
    for a, b, u in unions:
        slack = a.gap + b.gap + u.gap + abs_tol
        report["subadditive"].append(
            {"parts": [a.primal, b.primal], "union": u.primal, "slack": slack, "ok": bool(u.primal <= a.primal + b.primal + slack)}
        )
    report["ok"] = all(r["ok"] for r in report["monotone"] + report["subadditive"])
    return report
