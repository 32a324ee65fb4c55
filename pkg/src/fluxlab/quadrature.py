"""Quadrature on spheres, balls and boxes, plus random disjoint cube families."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi

from .errors import ArgumentError, CapabilityError
from .fields import Box

MAX_SPHERE_DEGREE = 20
SPHERE_DIMENSIONS = (2, 3, 4)


def ball_volume(n):
    """omega_n = |B_1| in R^n."""
    return pi ** (n / 2) / gamma(n / 2 + 1)


def sphere_area(n):
    """sigma_{n-1} = H^{n-1}(S^{n-1}) = n omega_n."""
    return n * ball_volume(n)


@dataclass(frozen=True, eq=False)
class SphereRule:
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def check(self):
        """Raise if the weight sum, first moment or second moment is off."""
        w, xi = self.weights, self.nodes
        if abs(w.sum() - sphere_area(self.n)) > 1e-12 * sphere_area(self.n):
            raise AssertionError("sphere weights do not sum to the sphere area")
        if np.max(np.abs(w @ xi)) > 1e-10:
            raise AssertionError("sphere rule first moment is not zero")
        second = np.einsum("k,ki,kj->ij", w, xi, xi) / ball_volume(self.n)
        if np.max(np.abs(second - np.eye(self.n))) > 1e-8:
            raise AssertionError("sphere rule second moment is not the identity")


def _circle(m):
    theta = (np.arange(m) + 0.5) * 2 * pi / m
    return np.stack([np.cos(theta), np.sin(theta)], axis=1), np.full(m, 2 * pi / m)


def _circle_count(degree):
    # trapezoid with m nodes is exact to trig degree m-1; m = 0 mod 4 keeps
    # nodes off both coordinate axes
    m = degree + 1
    return m + (-m) % 4


def _gauss_count(degree):
    q = degree // 2 + 1
    return q + q % 2  # even, so t = 0 is never a node


def _sphere_nodes(n, degree):
    if n == 2:
        return _circle(_circle_count(degree))
    inner_x, inner_w = _sphere_nodes(n - 1, degree)
    a = (n - 3) / 2
    t, wt = roots_jacobi(_gauss_count(degree), a, a)
    r = np.sqrt(1 - t**2)
    nodes = np.concatenate(
        [np.hstack([r[k] * inner_x, np.full((len(inner_x), 1), t[k])]) for k in range(len(t))]
    )
    weights = np.concatenate([wt[k] * inner_w for k in range(len(t))])
    return nodes, weights


@lru_cache(maxsize=None)
def _cached_rule(n, degree):
    nodes, weights = _sphere_nodes(n, degree)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    rule = SphereRule(n, nodes, weights, degree)
    rule.check()
    return rule


def make_sphere_rule(n, degree):
    """Product rule on S^{n-1} exact for polynomials of total degree <= ``degree``.

    n = 2 is the offset trapezoid rule; n >= 3 is Gauss-Jacobi in the last
    coordinate times the rule on S^{n-2}. No node lies on a coordinate
    hyperplane and the node set is symmetric under xi -> -xi.
    """
    if n not in SPHERE_DIMENSIONS:
        raise CapabilityError(f"sphere rules are available for n in {SPHERE_DIMENSIONS}, got {n}")
    if not 0 <= degree <= MAX_SPHERE_DEGREE:
        raise CapabilityError(f"sphere rule degree must be in [0, {MAX_SPHERE_DEGREE}], got {degree}")
    return _cached_rule(int(n), int(degree))


def unit_ball_rule(n, degree, radial_nodes=None):
    """Points and weights on B_1, exact for polynomials of degree <= ``degree``
    unless ``radial_nodes`` overrides the radial Gauss count."""
    sph = make_sphere_rule(n, min(degree, MAX_SPHERE_DEGREE))
    q = radial_nodes or (degree + n - 1) // 2 + 1
    t, wt = np.polynomial.legendre.leggauss(q)
    r = 0.5 * (t + 1)
    wr = 0.5 * wt * r ** (n - 1)
    pts = (r[:, None, None] * sph.nodes[None]).reshape(-1, n)
    w = (wr[:, None] * sph.weights[None]).reshape(-1)
    return pts, w


def _gauss_segments(a, b, degree, cuts=()):
    """Composite Gauss-Legendre on [a, b], split at the cut points inside (a, b)."""
    q = degree // 2 + 1
    t, wt = np.polynomial.legendre.leggauss(q)
    edges = [a] + sorted(c for c in cuts if a < c < b) + [b]
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        xs.append(0.5 * (hi - lo) * t + 0.5 * (hi + lo))
        ws.append(0.5 * (hi - lo) * wt)
    return np.concatenate(xs), np.concatenate(ws)


def _tensor(axes):
    grids = np.meshgrid(*[x for x, _ in axes], indexing="ij")
    wgrids = np.meshgrid(*[w for _, w in axes], indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = np.prod(np.stack([g.reshape(-1) for g in wgrids], axis=1), axis=1)
    return pts, w


@dataclass(frozen=True, eq=False)
class GreenDomain:
    """A ball or box with boundary rule (points, outward normals, weights) and interior rule."""

    kind: str
    params: dict
    boundary_points: np.ndarray = field(repr=False)
    boundary_normals: np.ndarray = field(repr=False)
    boundary_weights: np.ndarray = field(repr=False)
    interior_points: np.ndarray = field(repr=False)
    interior_weights: np.ndarray = field(repr=False)
    volume: float
    boundary_measure: float
    boundary_degree: int
    splits: tuple = ()

    @property
    def n(self):
        return self.boundary_points.shape[1]

    def with_degree(self, degree):
        return make_green_domain(self.kind, self.params, degree, splits=self.splits)

    def split_at(self, planes):
        planes = tuple(planes)
        if not planes or self.kind != "box":
            return self
        return make_green_domain(self.kind, self.params, self.boundary_degree, splits=self.splits + planes)

    def shifted(self, offset):
        offset = np.asarray(offset, dtype=float)
        if self.kind == "ball":
            params = dict(self.params, center=tuple(np.add(self.params["center"], offset)))
        else:
            params = dict(
                self.params, lo=tuple(np.add(self.params["lo"], offset)), hi=tuple(np.add(self.params["hi"], offset))
            )
        return make_green_domain(self.kind, params, self.boundary_degree)

    def bounding_box(self):
        if self.kind == "ball":
            c, r = np.asarray(self.params["center"]), self.params["radius"]
            return c - r, c + r
        return np.asarray(self.params["lo"]), np.asarray(self.params["hi"])

    def descriptor(self):
        return {k: (list(map(float, v)) if isinstance(v, tuple) else float(v)) for k, v in self.params.items()} | {
            "kind": self.kind
        }


def _ball(center, radius, degree):
    center = np.asarray(center, dtype=float)
    n = len(center)
    if not radius > 0:
        raise ArgumentError(f"ball radius must be positive, got {radius}")
    sph = make_sphere_rule(n, degree)
    bp = center + radius * sph.nodes
    bw = radius ** (n - 1) * sph.weights
    ip, iw = unit_ball_rule(n, degree)
    vol = ball_volume(n) * radius**n
    return bp, sph.nodes.copy(), bw, center + radius * ip, radius**n * iw, vol, sphere_area(n) * radius ** (n - 1)


@lru_cache(maxsize=None)
def _unit_box_rule(n, degree):
    """Reference rules on [0,1]^n: interior, and per face (points, normal, weights)."""
    axes = [_gauss_segments(0.0, 1.0, degree) for _ in range(n)]
    ip, iw = _tensor(axes)
    faces = []
    for k in range(n):
        fp, fw = _tensor(axes[:-1]) if n > 1 else (np.zeros((1, 0)), np.ones(1))
        for side, val in ((-1.0, 0.0), (1.0, 1.0)):
            pts = np.insert(fp, k, val, axis=1)
            nrm = np.zeros_like(pts)
            nrm[:, k] = side
            faces.append((k, pts, nrm, fw))
    return ip, iw, faces


def _box(lo, hi, degree, splits):
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    n = len(lo)
    if lo.shape != hi.shape or not np.all(hi > lo):
        raise ArgumentError(f"degenerate box lo={lo.tolist()} hi={hi.tolist()}")
    ext = hi - lo
    vol = float(np.prod(ext))
    area = float(sum(2 * vol / ext[k] for k in range(n)))
    cuts = [[c for (ax, c) in splits if ax == k and lo[k] < c < hi[k]] for k in range(n)]
    if not any(cuts):
        ip, iw, faces = _unit_box_rule(n, degree)
        bp = np.concatenate([lo + ext * pts for _, pts, _, _ in faces])
        bn = np.concatenate([nrm for _, _, nrm, _ in faces])
        bw = np.concatenate([fw * (vol / ext[k]) for k, _, _, fw in faces])
        return bp, bn, bw, lo + ext * ip, iw * vol, vol, area
    axes = [_gauss_segments(lo[k], hi[k], degree, cuts[k]) for k in range(n)]
    ip, iw = _tensor(axes)
    bps, bns, bws = [], [], []
    for k in range(n):
        others = [axes[j] for j in range(n) if j != k]
        fp, fw = _tensor(others) if others else (np.zeros((1, 0)), np.ones(1))
        for side, val in ((-1.0, lo[k]), (1.0, hi[k])):
            pts = np.insert(fp, k, val, axis=1)
            nrm = np.zeros_like(pts)
            nrm[:, k] = side
            bps.append(pts)
            bns.append(nrm)
            bws.append(fw)
    return np.concatenate(bps), np.concatenate(bns), np.concatenate(bws), ip, iw, vol, area


def make_green_domain(kind, params, boundary_degree=8, splits=()):
    """Build a ball (``center``, ``radius``) or box (``lo``, ``hi``) domain.

    ``kind="shifted"`` takes ``base`` (a GreenDomain) and ``offset``.
    ``splits`` is a tuple of (axis, coordinate) planes at which box rules are
    made composite.
    """
    if kind == "shifted":
        return params["base"].shifted(params["offset"])
    if kind == "ball":
        p = {"center": tuple(map(float, params["center"])), "radius": float(params["radius"])}
        parts = _ball(p["center"], p["radius"], boundary_degree)
    elif kind == "box":
        p = {"lo": tuple(map(float, params["lo"])), "hi": tuple(map(float, params["hi"]))}
        parts = _box(p["lo"], p["hi"], boundary_degree, splits)
    else:
        raise ArgumentError(f"unknown domain kind {kind!r}")
    return GreenDomain(kind, p, *parts, boundary_degree=int(boundary_degree), splits=tuple(splits))


def make_cube(lo, side, degree=8):
    lo = np.asarray(lo, dtype=float)
    return make_green_domain("box", {"lo": lo, "hi": lo + side}, degree)


def boxes_overlap(lo1, hi1, lo2, hi2):
    """Open boxes intersect iff every coordinate interval overlaps with positive length."""
    return bool(np.all((np.asarray(lo1) < np.asarray(hi2)) & (np.asarray(lo2) < np.asarray(hi1))))


def sample_disjoint_family(box, count, size_range, rng_seed, degree=8, max_attempts=None):
    """Rejection-sample pairwise-disjoint axis-aligned cubes inside ``box``.

    Returns fewer than ``count`` cubes if the attempt cap is reached.
    """
    if count < 1:
        raise ArgumentError("count must be >= 1")
    box = box if isinstance(box, Box) else Box(*box)
    smin, smax = map(float, size_range)
    if not 0 < smin <= smax or smax > np.min(box.extents):
        raise ArgumentError(f"cube sizes {size_range} do not fit in {box}")
    rng = np.random.default_rng(rng_seed)
    lo_box, hi_box = np.array(box.lo), np.array(box.hi)
    los = np.empty((0, box.n))
    his = np.empty((0, box.n))
    attempts = max_attempts or 200 * count
    for _ in range(attempts):
        if len(los) >= count:
            break
        side = rng.uniform(smin, smax)
        lo = rng.uniform(lo_box, hi_box - side)
        hi = lo + side
        if len(los) and np.any(np.all((lo < his) & (los < hi), axis=1)):
            continue
        los = np.vstack([los, lo])
        his = np.vstack([his, hi])
    return [make_green_domain("box", {"lo": a, "hi": b}, degree) for a, b in zip(los, his)]
