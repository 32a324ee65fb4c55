"""Gegenbauer polynomials, zonal harmonics and degree projections on the sphere."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError
from .quadrature import sphere_area

MAX_DEGREE = 8


def gegenbauer(lam, d, t):
    """C_d^lam(t) by the three-term recurrence."""
    if d < 0:
        raise ArgumentError("degree must be non-negative")
    t = np.asarray(t, dtype=float)
    prev, cur = np.zeros_like(t), np.ones_like(t)
    for k in range(1, d + 1):
        if k == 1:
            prev, cur = cur, 2 * lam * t
        else:
            prev, cur = cur, (2 * t * (k + lam - 1) * cur - (k + 2 * lam - 2) * prev) / k
    return cur


@dataclass(frozen=True)
class ZonalKernel:
    """Reproducing kernel of degree-d spherical harmonics on S^{n-1}:
    Z_d(x, y) = (C_d^{n/2}(t) - C_{d-2}^{n/2}(t)) / sigma_{n-1}, t = <x, y>."""

    n: int
    d: int

    def __post_init__(self):
        if not 0 <= self.d <= MAX_DEGREE:
            raise ArgumentError(f"zonal degree must be in [0, {MAX_DEGREE}]")

    def of_cosine(self, t):
        lam = self.n / 2
        c = gegenbauer(lam, self.d, t)
        if self.d >= 2:
            c = c - gegenbauer(lam, self.d - 2, t)
        return c / sphere_area(self.n)

    def __call__(self, x, y):
        t = np.clip(np.sum(np.asarray(x) * np.asarray(y), axis=-1), -1.0, 1.0)
        return self.of_cosine(t)


def project_degree(values, d, rule, at=None):
    """Degree-d component of a sampled sphere function.

    ``values`` has shape (m,) or (m, E) on the nodes of ``rule``; the result
    is v_d(xi) = sum_i w_i Z_d(xi, eta_i) v(eta_i) evaluated at ``at``
    (default: the rule nodes).
    """
    values = np.asarray(values, dtype=float)
    at = rule.nodes if at is None else np.atleast_2d(at)
    Z = ZonalKernel(rule.n, d).of_cosine(np.clip(at @ rule.nodes.T, -1.0, 1.0))
    return (Z * rule.weights) @ values


def sphere_inner(a, b, rule):
    """L^2(S^{n-1}) inner product of two sampled functions, summed over components."""
    a = np.asarray(a, dtype=float).reshape(len(rule.weights), -1)
    b = np.asarray(b, dtype=float).reshape(len(rule.weights), -1)
    return float(np.sum(rule.weights[:, None] * a * b))


def limitint_check(op, values, rule, x=None):
    """| sum w A(xi) v(xi) - sum w A(xi) v_1(xi) |: only the degree-1 part of v is seen by the symbol."""
    x = np.zeros(op.n) if x is None else np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float).reshape(len(rule.weights), -1)
    sym = op.symbol(x, rule.nodes)
    full = np.einsum("k,kfe,ke->f", rule.weights, sym, values)
    v1 = project_degree(values, 1, rule)
    proj = np.einsum("k,kfe,ke->f", rule.weights, sym, v1)
    return float(np.linalg.norm(full - proj))
