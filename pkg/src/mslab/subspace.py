"""Arithmetic on linear subspaces of the n-by-n complex matrices.

Subspaces are the elements of the quantale of a matrix algebra: the product
of two subspaces is the span of all pairwise matrix products, the involution
is computed pointwise from the adjoint, joins are spans of unions and meets
are intersections.  Every subspace is kept in canonical form: an ordered
orthonormal basis under the trace inner product ``<A, B> = tr(A^* B)``,
obtained by sequential Gram-Schmidt in generator order so that equal inputs
produce identical bases.

All rank decisions (is this residual zero?) go through ``Tolerance`` so the
threshold has a single source of truth.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "Subspace",
    "as_matrix",
    "canonicalize",
    "zero_subspace",
    "full_subspace",
    "matrix_unit",
    "join",
    "meet",
    "product",
    "involution",
    "complement",
    "contains",
    "equal",
    "distance",
    "subspace_to_json",
    "subspace_from_json",
    "matrix_to_json",
    "matrix_from_json",
]


@dataclass(frozen=True)
class Tolerance:
    """Threshold for rank decisions and residual tests."""

    eps: float = 1e-9

    def __post_init__(self) -> None:
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")

    def is_negligible(self, residual: float, scale: float = 1.0) -> bool:
        """True when a residual norm counts as zero at the given scale."""
        return residual < self.eps * (1.0 + scale)


DEFAULT_TOL = Tolerance()


def as_matrix(entries, n: int | None = None) -> np.ndarray:
    """Validate and convert to an n-by-n complex matrix.

    Rejects non-square input, ambient dimension 0, NaN and Inf entries.
    """
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] == 0:
        raise ValueError("ambient dimension 0 is not allowed")
    if n is not None and m.shape[0] != n:
        raise ValueError(f"ambient dimension mismatch: expected {n}, got {m.shape[0]}")
    if not np.isfinite(m.view(np.float64)).all():
        raise ValueError("matrix entries must be finite")
    return m


class Subspace:
    """A linear subspace of the n-by-n matrices in canonical orthonormal form.

    Instances are immutable; build them with :func:`canonicalize` (or the
    other operations in this module), not by hand.
    """

    __slots__ = ("n", "vecs")

    def __init__(self, n: int, vecs: np.ndarray):
        vecs = np.asarray(vecs, dtype=np.complex128)
        if vecs.ndim != 2 or vecs.shape[1] != n * n:
            raise ValueError(f"basis array must have shape (dim, {n * n})")
        if vecs.shape[0] > n * n:
            raise ValueError("dim exceeds ambient dimension")
        gram = vecs @ vecs.conj().T
        if vecs.shape[0] and np.abs(gram - np.eye(vecs.shape[0])).max() > 1e-6:
            raise ValueError("basis is not orthonormal; use canonicalize()")
        vecs.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "vecs", vecs)

    @classmethod
    def _trusted(cls, n: int, vecs: np.ndarray) -> "Subspace":
        # internal fast path for rows straight out of _orthonormalize
        self = object.__new__(cls)
        vecs.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "vecs", vecs)
        return self

    def __setattr__(self, name, value):  # immutable
        raise AttributeError("Subspace is immutable")

    @property
    def dim(self) -> int:
        return self.vecs.shape[0]

    @property
    def basis(self) -> list[np.ndarray]:
        """Canonical orthonormal basis as a list of n-by-n matrices."""
        return [self.vecs[i].reshape(self.n, self.n) for i in range(self.dim)]

    def projector(self) -> np.ndarray:
        """Orthogonal projector onto the subspace in the flattened space."""
        return self.vecs.T @ self.vecs.conj()

    def __repr__(self) -> str:
        return f"Subspace(n={self.n}, dim={self.dim})"


def _orthonormalize(rows: np.ndarray, tol: Tolerance) -> np.ndarray:
    """Sequential Gram-Schmidt in row order.

    A row is discarded when its residual norm after projection onto the
    already accepted rows is negligible relative to the row's input norm.
    One re-orthogonalization pass keeps the basis orthonormal to machine
    precision without sacrificing determinism.
    """
    m, d = rows.shape
    if m == 0:
        return np.zeros((0, d), dtype=np.complex128)
    rows = rows.astype(np.complex128, copy=False)
    scales = np.sqrt(np.einsum("ij,ij->i", rows, rows.conj()).real)
    out = np.empty((m, d), dtype=np.complex128)
    k = 0
    for idx in range(m):
        scale = float(scales[idx])
        v = rows[idx].copy()
        if k:
            q = out[:k]
            v -= q.T @ (q.conj() @ v)
            r = float(np.sqrt(np.vdot(v, v).real))
            # re-orthogonalize once when cancellation ate most of the norm
            if r < 0.7 * scale:
                v -= q.T @ (q.conj() @ v)
                r = float(np.sqrt(np.vdot(v, v).real))
        else:
            r = scale
        if not tol.is_negligible(r, scale) and k < d:
            out[k] = v / r
            k += 1
    return out[:k].copy()


def canonicalize(
    generators: Iterable, tol: Tolerance = DEFAULT_TOL, n: int | None = None
) -> Subspace:
    """Span of the generators in canonical orthonormal form.

    Orthonormalization is deterministic: generators are processed in the
    given order and near-dependent ones are dropped.  ``n`` is only needed
    when the generator list is empty.
    """
    mats = [as_matrix(g) for g in generators]
    for m in mats:
        if m.shape[0] != mats[0].shape[0]:
            raise ValueError(
                f"ambient dimension mismatch among generators: "
                f"{mats[0].shape[0]} vs {m.shape[0]}"
            )
    if mats:
        if n is not None and mats[0].shape[0] != n:
            raise ValueError(f"ambient dimension mismatch: expected {n}")
        n = mats[0].shape[0]
    elif n is None:
        raise ValueError("empty generator list needs an explicit ambient n")
    elif n <= 0:
        raise ValueError("ambient dimension 0 is not allowed")
    rows = (
        np.array([m.reshape(-1) for m in mats])
        if mats
        else np.zeros((0, n * n), dtype=np.complex128)
    )
    return Subspace._trusted(n, _orthonormalize(rows, tol))


def zero_subspace(n: int) -> Subspace:
    """The impossible measurement: the zero subspace of the n-by-n matrices."""
    if n <= 0:
        raise ValueError("ambient dimension 0 is not allowed")
    return Subspace(n, np.zeros((0, n * n), dtype=np.complex128))


def matrix_unit(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n), dtype=np.complex128)
    m[i, j] = 1.0
    return m


def full_subspace(n: int, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """The whole matrix algebra as a subspace (the top measurement)."""
    units = [matrix_unit(n, i, j) for i in range(n) for j in range(n)]
    return canonicalize(units, tol)


def _check_same_ambient(p: Subspace, q: Subspace) -> None:
    if p.n != q.n:
        raise ValueError(f"ambient dimension mismatch: {p.n} vs {q.n}")


def join(p: Subspace, q: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Smallest subspace containing both arguments (span of the union)."""
    _check_same_ambient(p, q)
    if q.dim == 0 or contains(p, q, tol):
        return p
    if p.dim == 0:
        return q
    return Subspace._trusted(p.n, _orthonormalize(np.vstack([p.vecs, q.vecs]), tol))


def complement(p: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Orthogonal complement within the flattened n*n-dimensional space.

    Computed by extending the canonical basis with the standard basis and
    keeping the vectors accepted past the original ones, so the rank rule
    is the same one used everywhere else.
    """
    d = p.n * p.n
    seeded = np.vstack([p.vecs, np.eye(d, dtype=np.complex128)])
    full = _orthonormalize(seeded, tol)
    return Subspace._trusted(p.n, full[p.dim :].copy())


def meet(p: Subspace, q: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Intersection of two subspaces.

    The intersection is the orthogonal complement of the sum of the two
    orthogonal complements, evaluated at the working tolerance.
    """
    _check_same_ambient(p, q)
    return complement(join(complement(p, tol), complement(q, tol), tol), tol)


def product(p: Subspace, q: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Quantale product: span of all pairwise matrix products.

    Closure of the span is automatic in finite dimension.
    """
    _check_same_ambient(p, q)
    if p.dim == 0 or q.dim == 0:
        return zero_subspace(p.n)
    n = p.n
    a = p.vecs.reshape(p.dim, n, n)
    b = q.vecs.reshape(q.dim, n, n)
    prods = np.einsum("aij,bjk->abik", a, b).reshape(p.dim * q.dim, n * n)
    return Subspace._trusted(n, _orthonormalize(prods, tol))


def involution(p: Subspace, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Span of the adjoints of the basis elements (pointwise involution)."""
    n = p.n
    if p.dim == 0:
        return zero_subspace(n)
    rows = p.vecs.reshape(p.dim, n, n).conj().transpose(0, 2, 1).reshape(p.dim, n * n)
    return Subspace._trusted(n, _orthonormalize(rows, tol))


def contains(p: Subspace, q: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True when every basis vector of q projects into p up to the tolerance."""
    _check_same_ambient(p, q)
    if q.dim == 0:
        return True
    resid = q.vecs - (q.vecs @ p.vecs.conj().T) @ p.vecs
    worst = float(np.linalg.norm(resid, axis=1).max())
    return tol.is_negligible(worst, 1.0)


def equal(p: Subspace, q: Subspace, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Mutual containment at the working tolerance."""
    return contains(p, q, tol) and contains(q, p, tol)


def distance(a, p: Subspace, tol: Tolerance = DEFAULT_TOL) -> float:
    """Trace-norm distance from the matrix ``a`` to the subspace ``p``."""
    m = as_matrix(a, p.n)
    v = m.reshape(-1)
    resid = v - p.vecs.T @ (p.vecs.conj() @ v)
    return float(np.linalg.norm(resid))


def matrix_to_json(m: np.ndarray) -> list:
    """Row-major nested lists of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def matrix_from_json(doc: Sequence) -> np.ndarray:
    rows = []
    for row in doc:
        rows.append([complex(pair[0], pair[1]) for pair in row])
    return as_matrix(rows)


def subspace_to_json(p: Subspace) -> dict:
    return {"n": p.n, "generators": [matrix_to_json(b) for b in p.basis]}


def subspace_from_json(doc: dict, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    n = int(doc["n"])
    gens = [matrix_from_json(g) for g in doc["generators"]]
    return canonicalize(gens, tol, n=n)
