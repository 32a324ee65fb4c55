"""First-order operators A u = sum_j A_j(x) d_j u + B(x) u with polynomial coefficients."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError, CapabilityError, DomainError
from .poly import MultiPoly, PolyArray


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    """Coefficients ``A`` (n matrices, dimF x dimE) and ``B`` (dimF x dimE).

    Entries may be numbers or ``MultiPoly``; they are compiled once into
    ``PolyArray`` tables so evaluation at many points is a single tensordot.
    """

    n: int
    dimE: int
    dimF: int
    A: tuple
    B: tuple
    name: str = "operator"
    _A: PolyArray = field(init=False, repr=False)
    _B: PolyArray = field(init=False, repr=False)
    _divA: PolyArray = field(init=False, repr=False)
    _src: PolyArray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=object)
        B = np.asarray(self.B, dtype=object)
        if A.shape != (self.n, self.dimF, self.dimE):
            raise ArgumentError(
                f"{self.name}: A has shape {A.shape}, expected {(self.n, self.dimF, self.dimE)}"
            )
        if B.shape != (self.dimF, self.dimE):
            raise ArgumentError(f"{self.name}: B has shape {B.shape}, expected {(self.dimF, self.dimE)}")
        cA = PolyArray.from_entries(A, self.n)
        cB = PolyArray.from_entries(B, self.n)
        object.__setattr__(self, "A", tuple(tuple(tuple(row) for row in m) for m in cA.entries()))
        object.__setattr__(self, "B", tuple(tuple(row) for row in cB.entries()))
        object.__setattr__(self, "_A", cA)
        object.__setattr__(self, "_B", cB)
        div = [cA.deriv(j) for j in range(self.n)]
        entries = np.empty((self.dimF, self.dimE), dtype=object)
        for idx in np.ndindex(self.dimF, self.dimE):
            total = MultiPoly(self.n)
            for j, d in enumerate(div):
                total = total + d.entry((j,) + idx)
            entries[idx] = total
        object.__setattr__(self, "_divA", PolyArray.from_entries(entries, self.n))
        object.__setattr__(self, "_src", PolyArray.from_entries(cB.entries() - entries, self.n))

    def coefficients(self, x):
        """A_j(x) stacked: shape (..., n, dimF, dimE)."""
        return self._A(x)

    def zeroth_order(self, x):
        return self._B(x)

    def div_symbol(self, x):
        return self._divA(x)

    def source(self, x):
        """B(x) - div A(x), the interior density of the flux functional."""
        return self._src(x)

    def symbol(self, x, xi):
        """A(x, xi) with broadcasting over leading axes of x and xi."""
        return np.einsum("...j,...jfe->...fe", xi, self._A(x))

    @property
    def constant_coefficients(self):
        return self._A.is_constant()

    @property
    def homogeneous(self):
        return self._B.is_zero()

    @property
    def pure_flux(self):
        return self._src.is_zero()

    def scaled(self, c):
        return make_operator(self.name, self._A.entries() * c, self._B.entries() * c)


def make_operator(name, A, B=None):
    A = np.asarray(A, dtype=object)
    n, dimF, dimE = A.shape
    if B is None:
        B = np.zeros((dimF, dimE))
    return OperatorSpec(n=n, dimE=dimE, dimF=dimF, A=A, B=np.asarray(B, dtype=object), name=name)


@dataclass(frozen=True)
class SymbolValue:
    matrix: np.ndarray
    x: np.ndarray
    xi: np.ndarray


def _vec(v, n, what):
    v = np.asarray(v)
    if v.shape != (n,):
        raise ArgumentError(f"{what} must have length {n}, got shape {v.shape}")
    return v


def eval_symbol(op, x, xi):
    x = _vec(np.asarray(x, dtype=float), op.n, "point")
    xi = _vec(np.asarray(xi, dtype=float), op.n, "covector")
    return SymbolValue(op.symbol(x, xi), x, xi)


def eval_complex_symbol(op, x, zeta):
    x = _vec(np.asarray(x, dtype=float), op.n, "point")
    zeta = _vec(np.asarray(zeta, dtype=complex), op.n, "complex covector")
    return np.einsum("j,jfe->fe", zeta, op.coefficients(x).astype(complex))


def divergence_of_symbol(op, x):
    return op.div_symbol(_vec(np.asarray(x, dtype=float), op.n, "point"))


def formal_adjoint(op):
    """Coefficients (-A_j^T, B^T - sum_j d_j A_j^T)."""
    At = np.transpose(op._A.entries(), (0, 2, 1))
    Bt = op._B.entries().T
    div_t = op._divA.entries().T
    return make_operator(f"adjoint({op.name})", -At, Bt - div_t)


def is_pure_flux(op):
    """Return (flag, residual) where residual(x) = ||B(x) - div A(x)||."""

    def residual(x):
        return float(np.linalg.norm(op.source(np.asarray(x, dtype=float))))

    return op.pure_flux, residual


def apply_operator(op, field, x):
    """Evaluate A u at x (shape (n,) or (P, n)).

    Analytic fields use their derivative evaluator; grid fields use central
    differences at the grid spacing.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != op.n or field.n != op.n:
        raise ArgumentError("point/field dimension does not match operator")
    if field.dimE != op.dimE:
        raise ArgumentError(f"field has dimE={field.dimE}, operator expects {op.dimE}")
    if not np.all(field.domain.contains(x)):
        raise DomainError(f"point outside field domain {field.domain}")
    if not field.has_derivative:
        raise CapabilityError(f"field {field.name!r} has no derivative evaluator")
    jac = field.jacobian(x)  # (..., E, n)
    return np.einsum("...jfe,...ej->...f", op.coefficients(x), jac) + np.einsum(
        "...fe,...e->...f", op.zeroth_order(x), field(x)
    )
