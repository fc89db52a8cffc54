"""Boolean relation quantales, finite groupoids, and the support/embedding
pair between coordinate subspaces and relations.

Arrows of a pair groupoid are kept in matrix-unit order: the arrow with
index i*n + j plays the role of the (i, j) matrix unit, i.e. it goes from
object j to object i, so the quantale of the pair groupoid and the boolean
matrix quantale share element numbering.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .finquant import FiniteQuantale, alexandrov_opens
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    canonicalize,
    matrix_unit,
    zero_subspace,
)

__all__ = [
    "BoolMatrix",
    "bool_product",
    "bool_involution",
    "Arrow",
    "FiniteGroupoid",
    "pair_groupoid",
    "groupoid_quantale",
    "GroupoidQuantale",
    "relation_quantale",
    "supp",
    "iota",
    "groupoid_observer",
    "groupoid_to_json",
    "groupoid_from_json",
]


class BoolMatrix:
    """An n-by-n boolean matrix, i.e. a binary relation on {0..n-1}."""

    __slots__ = ("n", "bits")

    def __init__(self, bits):
        bits = np.asarray(bits, dtype=bool)
        if bits.ndim != 2 or bits.shape[0] != bits.shape[1]:
            raise ValueError(f"expected a square boolean matrix, got {bits.shape}")
        bits.setflags(write=False)
        object.__setattr__(self, "n", bits.shape[0])
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("BoolMatrix is immutable")

    @classmethod
    def from_pairs(cls, n: int, pairs) -> "BoolMatrix":
        bits = np.zeros((n, n), dtype=bool)
        for i, j in pairs:
            bits[i, j] = True
        return cls(bits)

    @classmethod
    def identity(cls, n: int) -> "BoolMatrix":
        return cls(np.eye(n, dtype=bool))

    @classmethod
    def full(cls, n: int) -> "BoolMatrix":
        return cls(np.ones((n, n), dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "BoolMatrix":
        return cls(np.zeros((n, n), dtype=bool))

    def pairs(self) -> list[tuple[int, int]]:
        return [tuple(map(int, ij)) for ij in np.argwhere(self.bits)]

    def __eq__(self, other):
        return (
            isinstance(other, BoolMatrix)
            and self.n == other.n
            and bool((self.bits == other.bits).all())
        )

    def __hash__(self):
        return hash((self.n, self.bits.tobytes()))

    def __le__(self, other: "BoolMatrix") -> bool:
        return bool((~self.bits | other.bits).all())

    def __or__(self, other: "BoolMatrix") -> "BoolMatrix":
        return BoolMatrix(self.bits | other.bits)

    def __repr__(self):
        return f"BoolMatrix({self.bits.astype(int).tolist()})"


def bool_product(s: BoolMatrix, t: BoolMatrix) -> BoolMatrix:
    """Relation composition: (st)_ij = OR_k s_ik t_kj."""
    if s.n != t.n:
        raise ValueError(f"size mismatch: {s.n} vs {t.n}")
    return BoolMatrix(s.bits @ t.bits)


def bool_involution(s: BoolMatrix) -> BoolMatrix:
    """Relation converse: the transpose."""
    return BoolMatrix(s.bits.T)


@dataclass(frozen=True)
class Arrow:
    src: int
    tgt: int
    label: str


class FiniteGroupoid:
    """Objects, arrows, a partial composition table and a total inverse.

    ``compose[h][g]`` is the index of h after g, defined exactly when
    src(h) = tgt(g); undefined entries are -1.
    """

    def __init__(self, objects, arrows, compose, inverse):
        self.objects = list(objects)
        self.arrows = list(arrows)
        k = len(self.arrows)
        compose = np.asarray(compose, dtype=np.int64)
        if compose.shape != (k, k):
            raise ValueError("compose table must be square over the arrows")
        inverse = np.asarray(inverse, dtype=np.int64)
        if inverse.shape != (k,):
            raise ValueError("inverse table must be total")
        compose.setflags(write=False)
        inverse.setflags(write=False)
        self.compose = compose
        self.inverse = inverse
        self.validate()

    def validate(self) -> None:
        arrows, comp, inv = self.arrows, self.compose, self.inverse
        k = len(arrows)
        n_obj = len(self.objects)
        for a in arrows:
            if not (0 <= a.src < n_obj and 0 <= a.tgt < n_obj):
                raise ValueError(f"arrow {a} references unknown objects")
        identities: dict[int, int] = {}
        for h in range(k):
            for g in range(k):
                defined = arrows[h].src == arrows[g].tgt
                if defined != (comp[h, g] >= 0):
                    raise ValueError(
                        f"composition defined iff src(h)=tgt(g); violated at ({h},{g})"
                    )
                if defined:
                    c = arrows[comp[h, g]]
                    if c.src != arrows[g].src or c.tgt != arrows[h].tgt:
                        raise ValueError(f"composite of ({h},{g}) has wrong endpoints")
        for h in range(k):
            for g in range(k):
                if comp[h, g] < 0:
                    continue
                for f in range(k):
                    if comp[g, f] < 0:
                        continue
                    if comp[comp[h, g], f] != comp[h, comp[g, f]]:
                        raise ValueError(f"composition not associative at ({h},{g},{f})")
        for g in range(k):
            gi = int(inv[g])
            if arrows[gi].src != arrows[g].tgt or arrows[gi].tgt != arrows[g].src:
                raise ValueError(f"inverse of arrow {g} has wrong endpoints")
            left = int(comp[gi, g])
            right = int(comp[g, gi])
            for e, obj in ((left, arrows[g].src), (right, arrows[g].tgt)):
                a = arrows[e]
                if a.src != obj or a.tgt != obj:
                    raise ValueError(f"g^-1 g / g g^-1 not an identity for arrow {g}")
                identities.setdefault(obj, e)
                if identities[obj] != e:
                    raise ValueError(f"two identities at object {obj}")
        for obj, e in identities.items():
            for g in range(k):
                if arrows[g].src == obj and comp[g, e] != g:
                    raise ValueError(f"identity law fails at object {obj}, arrow {g}")
                if arrows[g].tgt == obj and comp[e, g] != g:
                    raise ValueError(f"identity law fails at object {obj}, arrow {g}")
        missing = set(range(len(self.objects))) - set(identities)
        if missing:
            raise ValueError(f"objects without identity arrows: {sorted(missing)}")
        self.identities = identities


def pair_groupoid(n: int) -> FiniteGroupoid:
    """The groupoid with exactly one arrow between every ordered pair of
    {0..n-1}; arrow i*n + j goes from j to i."""
    if n < 1:
        raise ValueError("pair groupoid needs at least one point")
    arrows = [Arrow(src=j, tgt=i, label=f"({i},{j})") for i in range(n) for j in range(n)]
    k = n * n
    comp = np.full((k, k), -1, dtype=np.int64)
    for h in range(k):
        for g in range(k):
            if arrows[h].src == arrows[g].tgt:
                comp[h, g] = arrows[h].tgt * n + arrows[g].src
    inv = np.array([(a.src * n + a.tgt) for a in arrows], dtype=np.int64)
    return FiniteGroupoid([str(i) for i in range(n)], arrows, comp, inv)


@dataclass
class GroupoidQuantale:
    """The quantale of a finite discrete groupoid.

    ``elements[i]`` is the arrow-index set of carrier element i; elements
    are ordered by their bitmask over arrow indices, so for a pair groupoid
    the numbering coincides with the boolean-matrix quantale's.
    """

    groupoid: FiniteGroupoid
    quantale: FiniteQuantale
    elements: list[frozenset]


def groupoid_quantale(g: FiniteGroupoid, alexandrov: bool = False) -> GroupoidQuantale:
    """Carrier = all arrow sets; product is pointwise composition, the
    involution is pointwise inverse and the order is inclusion."""
    a = len(g.arrows)
    if a > 12:
        raise ValueError(
            f"{a} arrows would give a {1 << a}-element carrier; "
            "restrict the groupoid to at most 12 arrows"
        )
    k = 1 << a
    elements = [frozenset(i for i in range(a) if (s >> i) & 1) for s in range(k)]
    leq = np.zeros((k, k), dtype=bool)
    for s in range(k):
        for t in range(k):
            leq[s, t] = (s & t) == s
    prod = np.zeros((k, k), dtype=np.int64)
    pair_comp: dict[tuple[int, int], int] = {}
    for h in range(a):
        for gg in range(a):
            c = int(g.compose[h, gg])
            if c >= 0:
                pair_comp[(h, gg)] = c
    for s in range(k):
        hs = [i for i in range(a) if (s >> i) & 1]
        for t in range(k):
            gs = [i for i in range(a) if (t >> i) & 1]
            out = 0
            for h in hs:
                for gg in gs:
                    c = pair_comp.get((h, gg))
                    if c is not None:
                        out |= 1 << c
            prod[s, t] = out
    inv = np.zeros(k, dtype=np.int64)
    for s in range(k):
        out = 0
        for i in range(a):
            if (s >> i) & 1:
                out |= 1 << int(g.inverse[i])
        inv[s] = out
    opens = alexandrov_opens(leq) if alexandrov else None
    q = FiniteQuantale(leq, prod, inv, opens)
    return GroupoidQuantale(g, q, elements)


def relation_quantale(n: int, alexandrov: bool = False) -> tuple[FiniteQuantale, list[BoolMatrix]]:
    """The boolean matrix quantale on {0..n-1}, with elements in bitmask
    order (bit i*n + j is entry (i, j))."""
    if n < 1:
        raise ValueError("need at least one point")
    if n * n > 12:
        raise ValueError("relation quantale enumeration limited to n*n <= 12")
    k = 1 << (n * n)
    elements = []
    for s in range(k):
        bits = np.array(
            [[(s >> (i * n + j)) & 1 for j in range(n)] for i in range(n)], dtype=bool
        )
        elements.append(BoolMatrix(bits))
    index = {m: i for i, m in enumerate(elements)}
    leq = np.zeros((k, k), dtype=bool)
    prod = np.zeros((k, k), dtype=np.int64)
    inv = np.zeros(k, dtype=np.int64)
    for s in range(k):
        inv[s] = index[bool_involution(elements[s])]
        for t in range(k):
            leq[s, t] = elements[s] <= elements[t]
            prod[s, t] = index[bool_product(elements[s], elements[t])]
    opens = alexandrov_opens(leq) if alexandrov else None
    return FiniteQuantale(leq, prod, inv, opens), elements


def supp(p: Subspace, tol: Tolerance = DEFAULT_TOL) -> BoolMatrix:
    """Coordinates where some element of the subspace is nonzero.

    A coordinate that vanishes on every basis matrix vanishes on the whole
    span, so sweeping the canonical basis is exact.
    """
    bits = np.zeros((p.n, p.n), dtype=bool)
    for b in p.basis:
        bits |= np.abs(b) > tol.eps
    return BoolMatrix(bits)


def iota(u: BoolMatrix, tol: Tolerance = DEFAULT_TOL) -> Subspace:
    """Span of the matrix units at the relation's coordinates."""
    units = [matrix_unit(u.n, i, j) for i, j in u.pairs()]
    if not units:
        return zero_subspace(u.n)
    return canonicalize(units, tol)


def groupoid_observer(n: int, tol: Tolerance = DEFAULT_TOL):
    """The coordinate-subspace observer context of the n-by-n matrix space.

    The carrier is the image of ``iota`` over all relations; the retraction
    embeds the support back, i.e. r = iota o supp.
    """
    from .observer import MaxMatrixAmbient, ObserverContext

    if n < 1:
        raise ValueError("need at least one point")
    carrier = []
    for s in range(1 << (n * n)):
        bits = np.array(
            [[(s >> (i * n + j)) & 1 for j in range(n)] for i in range(n)], dtype=bool
        )
        carrier.append(iota(BoolMatrix(bits), tol))
    return ObserverContext(
        ambient=MaxMatrixAmbient(n, tol),
        carrier=carrier,
        retraction=lambda p: iota(supp(p, tol), tol),
    )


def groupoid_to_json(g: FiniteGroupoid) -> dict:
    return {
        "objects": list(g.objects),
        "arrows": [{"src": a.src, "tgt": a.tgt, "id": a.label} for a in g.arrows],
        "compose": g.compose.tolist(),
        "inverse": g.inverse.tolist(),
    }


def groupoid_from_json(doc: dict) -> FiniteGroupoid:
    arrows = [Arrow(int(a["src"]), int(a["tgt"]), str(a["id"])) for a in doc["arrows"]]
    return FiniteGroupoid(doc["objects"], arrows, doc["compose"], doc["inverse"])
