"""Finite-scale measurement spaces: subspace quantales of matrix algebras,
finite involutive quantales and locales, and observer contexts."""

from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    canonicalize,
    contains,
    distance,
    equal,
    involution,
    join,
    meet,
    product,
    zero_subspace,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOL",
    "Subspace",
    "Tolerance",
    "canonicalize",
    "contains",
    "distance",
    "equal",
    "involution",
    "join",
    "meet",
    "product",
    "zero_subspace",
    "__version__",
]
