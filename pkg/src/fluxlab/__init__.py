"""Flux calculus for first-order linear systems: symbols, truncated operators,
Morera tests, mollifier commutators and surface-family moduli."""

__version__ = "0.1.0"
