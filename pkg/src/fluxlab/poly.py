"""Multivariate polynomials with real coefficients.

``MultiPoly`` is the scalar entry type used in operator files. ``PolyArray``
is a compiled array of polynomials sharing one monomial table, which is what
the numerical code evaluates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Real

import numpy as np

from .errors import ArgumentError


def _normalize(n_vars, terms):
    acc = {}
    for exps, coef in terms:
        exps = tuple(int(e) for e in exps)
        if len(exps) != n_vars:
            raise ArgumentError(f"exponent {exps} has length {len(exps)}, expected {n_vars}")
        if any(e < 0 for e in exps):
            raise ArgumentError(f"negative exponent in {exps}")
        acc[exps] = acc.get(exps, 0.0) + float(coef)
    return tuple(sorted((e, c) for e, c in acc.items() if c != 0.0))


@dataclass(frozen=True)
class MultiPoly:
    n_vars: int
    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize(self.n_vars, self.terms))

    @classmethod
    def constant(cls, c, n_vars):
        return cls(n_vars, (((0,) * n_vars, c),))

    @classmethod
    def variable(cls, j, n_vars, power=1):
        exps = [0] * n_vars
        exps[j] = power
        return cls(n_vars, ((tuple(exps), 1.0),))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1])
        for exps, coef in self.terms:
            out = out + coef * np.prod(x ** np.array(exps), axis=-1)
        return out

    def deriv(self, j):
        terms = []
        for exps, coef in self.terms:
            if exps[j] > 0:
                e = list(exps)
                e[j] -= 1
                terms.append((tuple(e), coef * exps[j]))
        return MultiPoly(self.n_vars, tuple(terms))

    def is_zero(self):
        return len(self.terms) == 0

    def is_constant(self):
        return all(sum(e) == 0 for e, _ in self.terms)

    @property
    def degree(self):
        return max((sum(e) for e, _ in self.terms), default=0)

    def _lift(self, other):
        if isinstance(other, MultiPoly):
            if other.n_vars != self.n_vars:
                raise ArgumentError("polynomials in different numbers of variables")
            return other
        return MultiPoly.constant(float(other), self.n_vars)

    def __add__(self, other):
        other = self._lift(other)
        return MultiPoly(self.n_vars, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.n_vars, tuple((e, -c) for e, c in self.terms))

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if isinstance(other, Real):
            return MultiPoly(self.n_vars, tuple((e, c * float(other)) for e, c in self.terms))
        other = self._lift(other)
        terms = [
            (tuple(a + b for a, b in zip(e1, e2)), c1 * c2)
            for e1, c1 in self.terms
            for e2, c2 in other.terms
        ]
        return MultiPoly(self.n_vars, tuple(terms))

    __rmul__ = __mul__

    def to_json(self):
        if self.is_constant():
            return self.terms[0][1] if self.terms else 0.0
        return [{"exps": list(e), "coef": c} for e, c in self.terms]

    @classmethod
    def from_json(cls, entry, n_vars, where="entry"):
        if isinstance(entry, bool):
            raise ArgumentError(f"{where}: expected number or term list, got boolean")
        if isinstance(entry, Real):
            return cls.constant(float(entry), n_vars)
        if not isinstance(entry, list):
            raise ArgumentError(f"{where}: expected number or list of {{exps, coef}} terms")
        terms = []
        for k, t in enumerate(entry):
            if not isinstance(t, dict) or "exps" not in t or "coef" not in t:
                raise ArgumentError(f"{where}[{k}]: term must be an object with 'exps' and 'coef'")
            try:
                terms.append((tuple(t["exps"]), float(t["coef"])))
            except (TypeError, ValueError) as exc:
                raise ArgumentError(f"{where}[{k}]: {exc}") from None
        try:
            return cls(n_vars, tuple(terms))
        except ArgumentError as exc:
            raise ArgumentError(f"{where}: {exc}") from None


def as_poly(entry, n_vars):
    if isinstance(entry, MultiPoly):
        if entry.n_vars != n_vars:
            raise ArgumentError(f"entry has {entry.n_vars} variables, expected {n_vars}")
        return entry
    return MultiPoly.constant(float(entry), n_vars)


@dataclass(frozen=True)
class PolyArray:
    """An array of polynomials stored as exps (M, n) and coefs (M, *shape)."""

    n_vars: int
    shape: tuple
    exps: np.ndarray = field(repr=False)
    coefs: np.ndarray = field(repr=False)

    @classmethod
    def from_entries(cls, entries, n_vars):
        ent = np.asarray(entries, dtype=object)
        polys = [as_poly(e, n_vars) for e in ent.reshape(-1)]
        shape = ent.shape
        table = {}
        for p in polys:
            for e, _ in p.terms:
                table.setdefault(e, len(table))
        exps = np.array(sorted(table), dtype=int).reshape(-1, n_vars)
        index = {tuple(e): k for k, e in enumerate(exps)}
        coefs = np.zeros((len(exps), len(polys)))
        for i, p in enumerate(polys):
            for e, c in p.terms:
                coefs[index[e], i] = c
        return cls(n_vars, shape, exps, coefs.reshape((len(exps),) + shape))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if len(self.exps) == 0:
            return np.zeros(x.shape[:-1] + self.shape)
        mono = np.prod(x[..., None, :] ** self.exps, axis=-1)
        return np.tensordot(mono, self.coefs, axes=([-1], [0]))

    def deriv(self, j):
        keep = self.exps[:, j] > 0
        exps = self.exps[keep].copy()
        scale = exps[:, j].astype(float)
        exps[:, j] -= 1
        coefs = self.coefs[keep] * scale.reshape((-1,) + (1,) * len(self.shape))
        return PolyArray(self.n_vars, self.shape, exps, coefs)

    def is_zero(self):
        return not np.any(self.coefs)

    def is_constant(self):
        nz = np.any(self.coefs.reshape(len(self.exps), -1) != 0, axis=1)
        return bool(np.all(self.exps[nz].sum(axis=1) == 0)) if len(self.exps) else True

    def entry(self, idx):
        c = self.coefs[(slice(None),) + tuple(idx)]
        return MultiPoly(self.n_vars, tuple((tuple(e), float(v)) for e, v in zip(self.exps, c)))

    def entries(self):
        out = np.empty(self.shape, dtype=object)
        for idx in np.ndindex(*self.shape):
            out[idx] = self.entry(idx)
        return out
