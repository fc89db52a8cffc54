"""Named subspace fixtures for the 2x2 and 3x3 matrix measurement spaces.

The generators are entered exactly as printed in standard spin notation
(unnormalized projections are fine, canonicalization normalizes them), and
constant observable prefactors are dropped since spans forget scalars.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    canonicalize,
    contains,
    equal,
    full_subspace,
    join,
    meet,
    subspace_to_json,
    zero_subspace,
)

__all__ = [
    "FixtureSet",
    "spin_half_fixtures",
    "spin_one_fixtures",
    "hasse",
    "distributivity_witness",
    "DistributivityWitness",
    "SPIN_HALF_Z_ATOMS",
    "SPIN_HALF_X_ATOMS",
    "SPIN_ONE_Z_ATOMS",
    "SPIN_ONE_X_ATOMS",
]

# Atom name order is fixed (down/minus first, then zero, then up/plus); the
# observer-side identification of lattice atoms with points depends on it.
SPIN_HALF_Z_ATOMS = ("z_down", "z_up")
SPIN_HALF_X_ATOMS = ("x_down", "x_up")
SPIN_ONE_Z_ATOMS = ("z_minus", "z_zero", "z_plus")
SPIN_ONE_X_ATOMS = ("x_minus", "x_zero", "x_plus")


@dataclass(frozen=True)
class FixtureSet:
    """Named subspaces of a common ambient matrix algebra."""

    n: int
    named: dict[str, Subspace]

    def __getitem__(self, name: str) -> Subspace:
        return self.named[name]

    def __contains__(self, name: str) -> bool:
        return name in self.named

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "named": {name: subspace_to_json(p) for name, p in self.named.items()},
        }


def spin_half_fixtures(tol: Tolerance = DEFAULT_TOL) -> FixtureSet:
    """The nine standard subspaces of the 2x2 matrices.

    ``z`` and ``x`` are the unital abelian algebras generated by the spin
    observables, the arrows are spanned by the eigenspace projections.
    """
    I = np.eye(2)
    sigma_z = np.diag([1.0, -1.0])
    sigma_x = np.array([[0.0, 1.0], [1.0, 0.0]])
    named = {
        "0": zero_subspace(2),
        "e": canonicalize([I], tol),
        "1": full_subspace(2, tol),
        "z": canonicalize([I, sigma_z], tol),
        "z_up": canonicalize([np.diag([1.0, 0.0])], tol),
        "z_down": canonicalize([np.diag([0.0, 1.0])], tol),
        "x": canonicalize([I, sigma_x], tol),
        "x_up": canonicalize([np.ones((2, 2))], tol),
        "x_down": canonicalize([np.array([[1.0, -1.0], [-1.0, 1.0]])], tol),
    }
    return FixtureSet(2, named)


def spin_one_fixtures(tol: Tolerance = DEFAULT_TOL) -> FixtureSet:
    """The spin-1 subspaces of the 3x3 matrices.

    ``z`` is the diagonal algebra (generated by S_z and the identity),
    ``x`` the algebra generated by S_x; the rank-one fixtures are spanned
    by the projections onto the printed spinors.
    """
    I = np.eye(3)
    s_z = np.diag([1.0, 0.0, -1.0])
    s_x = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])
    r2 = np.sqrt(2.0)
    x_minus = np.array([[1.0, -r2, 1.0], [-r2, 2.0, -r2], [1.0, -r2, 1.0]])
    x_zero = np.array([[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]])
    x_plus = np.array([[1.0, r2, 1.0], [r2, 2.0, r2], [1.0, r2, 1.0]])
    named = {
        "z": canonicalize([I, s_z, s_z @ s_z], tol),
        "z_minus": canonicalize([np.diag([0.0, 0.0, 1.0])], tol),
        "z_zero": canonicalize([np.diag([0.0, 1.0, 0.0])], tol),
        "z_plus": canonicalize([np.diag([1.0, 0.0, 0.0])], tol),
        "x": canonicalize([I, s_x, s_x @ s_x], tol),
        "x_minus": canonicalize([x_minus], tol),
        "x_zero": canonicalize([x_zero], tol),
        "x_plus": canonicalize([x_plus], tol),
        "e": canonicalize([I], tol),
        "0": zero_subspace(3),
        "1": full_subspace(3, tol),
    }
    return FixtureSet(3, named)


def hasse(
    elements: list[Subspace], tol: Tolerance = DEFAULT_TOL
) -> list[tuple[int, int]]:
    """Cover relations of the containment order restricted to ``elements``.

    Returns index pairs (i, j) meaning elements[i] is covered by elements[j].
    Raises on duplicate elements.
    """
    k = len(elements)
    for i in range(k):
        for j in range(i + 1, k):
            if equal(elements[i], elements[j], tol):
                raise ValueError(f"duplicate elements at positions {i} and {j}")
    leq = np.zeros((k, k), dtype=bool)
    for i in range(k):
        for j in range(k):
            leq[i, j] = contains(elements[j], elements[i], tol)
    covers = []
    for i in range(k):
        for j in range(k):
            if i == j or not leq[i, j]:
                continue
            between = any(
                leq[i, m] and leq[m, j] for m in range(k) if m != i and m != j
            )
            if not between:
                covers.append((i, j))
    return sorted(covers)


@dataclass(frozen=True)
class DistributivityWitness:
    lhs: Subspace
    rhs: Subspace
    distributive: bool


def distributivity_witness(
    p: Subspace, m: Subspace, n: Subspace, tol: Tolerance = DEFAULT_TOL
) -> DistributivityWitness:
    """Compare (p^m) v (p^n) with p^(m v n); equality is distributivity."""
    lhs = join(meet(p, m, tol), meet(p, n, tol), tol)
    rhs = meet(p, join(m, n, tol), tol)
    return DistributivityWitness(lhs, rhs, equal(lhs, rhs, tol))
