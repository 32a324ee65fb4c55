"""Vector fields on axis-aligned boxes: analytic closures or sampled grids."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import ArgumentError, DomainError


@dataclass(frozen=True)
class Box:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or not all(b > a for a, b in zip(lo, hi)):
            raise ArgumentError(f"degenerate box lo={lo} hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, n, half=1.0, center=None):
        c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        return cls(tuple(c - half), tuple(c + half))

    @property
    def n(self):
        return len(self.lo)

    @property
    def extents(self):
        return np.array(self.hi) - np.array(self.lo)

    @property
    def volume(self):
        return float(np.prod(self.extents))

    def contains(self, x, margin=0.0):
        x = np.asarray(x, dtype=float)
        tol = 1e-12 * (1 + np.max(np.abs(self.extents)))
        return np.all((x >= np.array(self.lo) + margin - tol) & (x <= np.array(self.hi) - margin + tol), axis=-1)

    def contains_ball(self, center, radius):
        return bool(np.all(self.contains(np.asarray(center), margin=radius)))

    def contains_box(self, lo, hi):
        return bool(self.contains(np.asarray(lo)) and self.contains(np.asarray(hi)))

    def shrink(self, eps):
        return Box(tuple(np.array(self.lo) + eps), tuple(np.array(self.hi) - eps))


class Field:
    """Common interface. Subclasses provide ``__call__`` and maybe ``jacobian``.

    ``discontinuities`` lists axis-aligned planes (axis, offset) across which
    the field may jump; quadrature on boxes is split there.
    """

    kind = "abstract"
    n: int
    dimE: int
    domain: Box
    name: str
    discontinuities: tuple = ()

    @property
    def has_derivative(self):
        return False

    @property
    def smooth(self):
        return self.has_derivative and not self.discontinuities

    def jacobian(self, x):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class AnalyticField(Field):
    n: int
    dimE: int
    domain: Box
    value: Callable
    derivative: Optional[Callable] = None
    name: str = "field"
    discontinuities: tuple = ()
    singular_points: tuple = ()
    blowup: Optional[Callable] = None
    kind: str = field(default="analytic", init=False)

    def __call__(self, x):
        return np.asarray(self.value(np.asarray(x, dtype=float)), dtype=float)

    @property
    def has_derivative(self):
        return self.derivative is not None

    @property
    def smooth(self):
        return self.has_derivative and not self.discontinuities and not self.singular_points

    def jacobian(self, x):
        if self.derivative is None:
            from .errors import CapabilityError

            raise CapabilityError(f"field {self.name!r} has no derivative evaluator")
        return np.asarray(self.derivative(np.asarray(x, dtype=float)), dtype=float)


@dataclass(frozen=True, eq=False)
class GridField(Field):
    """Row-major samples on a regular grid, multilinear interpolation."""

    origin: tuple
    extents: tuple
    samples: np.ndarray = field(repr=False)
    name: str = "grid"
    kind: str = field(default="grid", init=False)
    _interp: RegularGridInterpolator = field(init=False, repr=False)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim < 2:
            raise ArgumentError("grid samples need shape (*shape, dimE)")
        if len(self.origin) != s.ndim - 1 or len(self.extents) != s.ndim - 1:
            raise ArgumentError("origin/extents length must equal grid dimension")
        if any(k < 2 for k in s.shape[:-1]):
            raise ArgumentError("grid needs at least two samples per axis")
        object.__setattr__(self, "samples", s)
        axes = [o + np.linspace(0.0, e, k) for o, e, k in zip(self.origin, self.extents, s.shape[:-1])]
        object.__setattr__(self, "_interp", RegularGridInterpolator(axes, s, method="linear"))

    @property
    def n(self):
        return self.samples.ndim - 1

    @property
    def dimE(self):
        return self.samples.shape[-1]

    @property
    def shape(self):
        return self.samples.shape[:-1]

    @property
    def h(self):
        return np.asarray(self.extents, dtype=float) / (np.array(self.shape) - 1)

    @property
    def domain(self):
        return Box(tuple(self.origin), tuple(np.add(self.origin, self.extents)))

    @property
    def has_derivative(self):
        return True

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(self.domain.contains(x)):
            raise DomainError("grid field evaluated outside its domain")
        lo = np.asarray(self.origin, dtype=float)
        xc = np.clip(x, lo, lo + np.asarray(self.extents))
        return self._interp(xc.reshape(-1, self.n)).reshape(x.shape[:-1] + (self.dimE,))

    def jacobian(self, x):
        """Central differences at spacing h; refuses points closer than one cell to the boundary."""
        x = np.asarray(x, dtype=float)
        h = self.h
        if not np.all(self.domain.contains(x, margin=0.0)) or not np.all(
            (x - h >= np.asarray(self.origin) - 1e-12 * h)
            & (x + h <= np.add(self.origin, self.extents) + 1e-12 * h)
        ):
            raise DomainError("central difference stencil leaves the grid (one-sided stencils are refused)")
        cols = []
        for j in range(self.n):
            e = np.zeros(self.n)
            e[j] = h[j]
            cols.append((self(x + e) - self(x - e)) / (2 * h[j]))
        return np.stack(cols, axis=-1)

    @classmethod
    def sample(cls, field, box, shape, name=None):
        axes = [np.linspace(a, b, k) for a, b, k in zip(box.lo, box.hi, shape)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        return cls(tuple(box.lo), tuple(box.extents), field(pts), name=name or f"grid({field.name})")


def derivative_consistency(field, points, step=1e-6):
    """Largest relative mismatch between ``field.jacobian`` and central differences."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    scale = 1.0 + np.max(np.abs(points))
    h = step * scale
    jac = field.jacobian(points)
    worst = 0.0
    for j in range(field.n):
        e = np.zeros(field.n)
        e[j] = h
        fd = (field(points + e) - field(points - e)) / (2 * h)
        err = np.abs(fd - jac[..., j]) / (1.0 + np.abs(jac[..., j]))
        worst = max(worst, float(np.max(err)))
    return worst
