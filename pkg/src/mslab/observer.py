"""Observer contexts: carriers with retractions, conditional expectations,
approximation maps, the lower hyperspace, and change-of-basis maps.

Ambient measurement spaces come in two flavors, the subspace quantale of an
n-by-n matrix algebra and an explicit finite table quantale; the checkers
only use the operations an ambient exposes, so both share the same code.
Carriers are finite element lists and retractions are functions cached on
the elements actually touched.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .finquant import FiniteQuantale, LawReport, _fingerprint
from .loctop import FiniteSpace, discrete_space, finite_space
from .maxa import (
    SPIN_HALF_X_ATOMS,
    SPIN_HALF_Z_ATOMS,
    SPIN_ONE_X_ATOMS,
    SPIN_ONE_Z_ATOMS,
    FixtureSet,
    spin_half_fixtures,
    spin_one_fixtures,
)
from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    as_matrix,
    canonicalize,
    contains,
    equal,
    involution,
    join,
    matrix_unit,
    meet,
    product,
    zero_subspace,
)

__all__ = [
    "MaxMatrixAmbient",
    "TableAmbient",
    "ObserverContext",
    "ConditionalExpectation",
    "diag_expectation",
    "observer_from_expectation",
    "check_observer_axioms",
    "ApproximationMap",
    "approximation_map",
    "LowerHyperspace",
    "lower_hyperspace",
    "BasisChangeMap",
    "beta",
    "SpinObserver",
    "spin_observer",
    "BetaBundle",
    "spin_beta",
]


class MaxMatrixAmbient:
    """Operations of the subspace quantale of the n-by-n matrices."""

    def __init__(self, n: int, tol: Tolerance = DEFAULT_TOL):
        self.n = n
        self.tol = tol
        self.zero = zero_subspace(n)

    def validate(self, x) -> None:
        if not isinstance(x, Subspace) or x.n != self.n:
            raise ValueError(f"element outside the ambient {self.n}x{self.n} space")

    def join(self, a, b):
        return join(a, b, self.tol)

    def meet(self, a, b):
        return meet(a, b, self.tol)

    def prod(self, a, b):
        return product(a, b, self.tol)

    def inv(self, a):
        return involution(a, self.tol)

    def equal(self, a, b) -> bool:
        return equal(a, b, self.tol)

    def key(self, a) -> bytes:
        return _fingerprint(a)


class TableAmbient:
    """A finite table quantale as an ambient; elements are indices."""

    def __init__(self, q: FiniteQuantale):
        self.q = q
        self.zero = q.bottom()

    def validate(self, x) -> None:
        if not isinstance(x, (int, np.integer)) or not 0 <= int(x) < self.q.size:
            raise ValueError(f"element {x!r} outside the ambient carrier")

    def join(self, a, b):
        return int(self.q.join_table()[a, b])

    def meet(self, a, b):
        return int(self.q.meet_table()[a, b])

    def prod(self, a, b):
        return int(self.q.prod[a, b])

    def inv(self, a):
        return int(self.q.inv[a])

    def equal(self, a, b) -> bool:
        return int(a) == int(b)

    def key(self, a) -> int:
        return int(a)

    def all_elements(self) -> list[int]:
        return list(range(self.q.size))


@dataclass
class ObserverContext:
    """A carrier inside an ambient quantale plus a retraction onto it."""

    ambient: object
    carrier: list
    retraction: Callable

    def carrier_index(self, x) -> int | None:
        for i, c in enumerate(self.carrier):
            if self.ambient.equal(c, x):
                return i
        return None


@dataclass(frozen=True)
class ConditionalExpectation:
    """Coordinate-block restriction of square matrices.

    Entries outside the blocks are zeroed; with singleton blocks this is
    restriction to the main diagonal.  The induced map is idempotent,
    commutes with the adjoint and fixes the block algebra.
    """

    n: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen = sorted(i for b in self.blocks for i in b)
        if seen != list(range(self.n)):
            raise ValueError("blocks must partition the index range")

    def mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        for b in self.blocks:
            for i in b:
                for j in b:
                    m[i, j] = True
        return m

    def apply(self, a) -> np.ndarray:
        m = as_matrix(a, self.n)
        return np.where(self.mask(), m, 0.0)

    def block_algebra(self, tol: Tolerance = DEFAULT_TOL) -> Subspace:
        units = [matrix_unit(self.n, i, j) for i, j in np.argwhere(self.mask())]
        return canonicalize(units, tol)


def diag_expectation(n: int) -> ConditionalExpectation:
    """Restriction to the main diagonal."""
    if n < 1:
        raise ValueError("need n >= 1")
    return ConditionalExpectation(n, tuple((i,) for i in range(n)))


def observer_from_expectation(
    theta: ConditionalExpectation,
    lattice: list[Subspace],
    tol: Tolerance = DEFAULT_TOL,
) -> ObserverContext:
    """Observer context with retraction P -> span(theta(P)) * B.

    ``lattice`` must be the locale of the block algebra B (all joins of its
    atoms, plus the zero subspace); it is the carrier of the context.
    """
    for i, a in enumerate(lattice):
        for b in lattice[i:]:
            j = join(a, b, tol)
            if all(not equal(j, c, tol) for c in lattice):
                raise ValueError("lattice not join-closed")
    block = theta.block_algebra(tol)
    cache: dict[bytes, Subspace] = {}

    def retract(p: Subspace) -> Subspace:
        key = _fingerprint(p)
        hit = cache.get(key)
        if hit is not None:
            return hit
        image = canonicalize([theta.apply(b) for b in p.basis], tol, n=theta.n)
        out = product(image, block, tol)
        cache[key] = out
        return out

    return ObserverContext(
        ambient=MaxMatrixAmbient(theta.n, tol), carrier=list(lattice), retraction=retract
    )


def _distinct(ambient, elements) -> list:
    out = []
    keys = set()
    for e in elements:
        k = ambient.key(e)
        if k not in keys:
            keys.add(k)
            out.append(e)
    return out


def check_observer_axioms(ctx: ObserverContext, samples=None) -> LawReport:
    """Verify the observer-context conditions on the supplied sample pairs.

    Checks, in order: the carrier contains 0 and is closed under join,
    product and involution; the retraction fixes the carrier and lands in
    it; and on the samples it preserves binary joins, the involution, and
    right multiplication by carrier elements.  When the ambient is a table
    quantale and no samples are given, all pairs are checked.
    """
    amb = ctx.ambient
    if samples is None:
        if isinstance(amb, TableAmbient):
            elems = amb.all_elements()
            samples = [(m, n) for m in elems for n in elems]
        else:
            raise ValueError("samples are required for a matrix-space ambient")
    for m, n in samples:
        amb.validate(m)
        amb.validate(n)
    carrier = ctx.carrier
    r = ctx.retraction
    report = LawReport()

    has_zero = any(amb.equal(c, amb.zero) for c in carrier)
    report.add("carrier-contains-zero", has_zero,
               witness=None if has_zero else (0,))

    def closed_under(op, law):
        for i in range(len(carrier)):
            for j in range(len(carrier)):
                if ctx.carrier_index(op(carrier[i], carrier[j])) is None:
                    report.add(law, False, witness=(i, j))
                    return
        report.add(law, True)

    closed_under(amb.join, "carrier-join-closed")
    closed_under(amb.prod, "carrier-product-closed")
    bad = None
    for i in range(len(carrier)):
        if ctx.carrier_index(amb.inv(carrier[i])) is None:
            bad = (i,)
            break
    report.add("carrier-involution-closed", bad is None, witness=bad)

    bad = None
    for i, c in enumerate(carrier):
        if not amb.equal(r(c), c):
            bad = (i,)
            break
    report.add("retraction-fixes-carrier", bad is None, witness=bad)

    universe = _distinct(amb, [m for pair in samples for m in pair])
    bad = None
    for i, m in enumerate(universe):
        if ctx.carrier_index(r(m)) is None:
            bad = (i,)
            break
    report.add("retraction-into-carrier", bad is None, witness=bad)

    bad = None
    for i, (m, n) in enumerate(samples):
        if not amb.equal(r(amb.join(m, n)), amb.join(r(m), r(n))):
            bad = (i,)
            break
    report.add("preserves-joins", bad is None, witness=bad)

    bad = None
    for i, m in enumerate(universe):
        if not amb.equal(r(amb.inv(m)), amb.inv(r(m))):
            bad = (i,)
            break
    report.add("preserves-involution", bad is None, witness=bad)

    bad = None
    for i, m in enumerate(universe):
        for w, omega in enumerate(carrier):
            if not amb.equal(r(amb.prod(m, omega)), amb.prod(r(m), omega)):
                bad = (i, w)
                break
        if bad:
            break
    report.add("module-law", bad is None, witness=bad)
    return report


def check_observer_axioms_exhaustive(ctx: ObserverContext, closure) -> LawReport:
    """Observer axioms over every pair of a closed bounded-closure result.

    The closure's tables stand in for the ambient operations, so after one
    retraction evaluation per element the laws reduce to exhaustive integer
    table identities.  The carrier must be contained in the closure set.
    """
    if not closure.closed or closure.quantale is None:
        raise ValueError("need a closed closure with tables")
    amb = ctx.ambient
    q = closure.quantale
    elems = closure.elements
    k = len(elems)
    index: dict = {}
    for i, e in enumerate(elems):
        index[amb.key(e)] = i

    def locate(x) -> int | None:
        i = index.get(amb.key(x))
        if i is not None and amb.equal(elems[i], x):
            return i
        for i, e in enumerate(elems):
            if amb.equal(e, x):
                return i
        return None

    carrier_idx = []
    for c in ctx.carrier:
        i = locate(c)
        if i is None:
            raise ValueError("carrier element missing from the closure set")
        carrier_idx.append(i)
    report = LawReport()
    bottom = q.bottom()
    report.add("carrier-contains-zero", bottom in carrier_idx,
               witness=None if bottom in carrier_idx else (bottom,))
    jt = q.join_table()
    cset = set(carrier_idx)

    def closed_under_table(table, law):
        for a in carrier_idx:
            for b in carrier_idx:
                if int(table[a, b]) not in cset:
                    report.add(law, False, witness=(a, b))
                    return
        report.add(law, True)

    closed_under_table(jt, "carrier-join-closed")
    closed_under_table(q.prod, "carrier-product-closed")
    bad = None
    for a in carrier_idx:
        if int(q.inv[a]) not in cset:
            bad = (a,)
            break
    report.add("carrier-involution-closed", bad is None, witness=bad)

    rmap = np.zeros(k, dtype=np.int64)
    for i, e in enumerate(elems):
        ri = locate(ctx.retraction(e))
        if ri is None:
            report.add("retraction-into-carrier", False, witness=(i,))
            return report
        rmap[i] = ri
    in_carrier = np.isin(rmap, list(cset))
    if in_carrier.all():
        report.add("retraction-into-carrier", True)
    else:
        report.add("retraction-into-carrier", False,
                   witness=(int(np.flatnonzero(~in_carrier)[0]),))

    bad = None
    for a in carrier_idx:
        if rmap[a] != a:
            bad = (a,)
            break
    report.add("retraction-fixes-carrier", bad is None, witness=bad)

    ok = rmap[jt] == jt[np.ix_(rmap, rmap)]
    if ok.all():
        report.add("preserves-joins", True)
    else:
        i, j = map(int, np.argwhere(~ok)[0])
        report.add("preserves-joins", False, witness=(i, j))

    ok = rmap[q.inv] == q.inv[rmap]
    if ok.all():
        report.add("preserves-involution", True)
    else:
        report.add("preserves-involution", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))

    bad = None
    for w in carrier_idx:
        ok = rmap[q.prod[:, w]] == q.prod[rmap, w]
        if not ok.all():
            bad = (int(np.flatnonzero(~ok)[0]), w)
            break
    report.add("module-law", bad is None, witness=bad)
    return report


@dataclass
class ApproximationMap:
    """A retraction restricted to a source subquantale, with its law report.

    Product non-preservation is expected and therefore reported as
    witnesses, not as a failure.
    """

    src_carrier: list
    images: list
    report: LawReport
    product_witnesses: list[tuple[int, int]] = field(default_factory=list)

    def __call__(self, x):
        return self.images[self._index(x)]

    def _index(self, x) -> int:
        for i, c in enumerate(self.src_carrier):
            if self._equal(c, x):
                return i
        raise KeyError("element not in the source carrier")

    _equal: Callable = None  # bound by approximation_map


def approximation_map(ctx: ObserverContext, src_carrier: list) -> ApproximationMap:
    """Restrict the context's retraction to a source subquantale.

    Verifies that shared elements are fixed and that binary joins and the
    involution are preserved; pairs whose product image differs from the
    image product are collected as witnesses.
    """
    amb = ctx.ambient

    def index_of(x) -> int | None:
        for i, c in enumerate(src_carrier):
            if amb.equal(c, x):
                return i
        return None

    for i in range(len(src_carrier)):
        for j in range(len(src_carrier)):
            for op in (amb.join, amb.prod):
                if index_of(op(src_carrier[i], src_carrier[j])) is None:
                    raise ValueError(f"source carrier not closed under ops at ({i},{j})")
        if index_of(amb.inv(src_carrier[i])) is None:
            raise ValueError(f"source carrier not closed under involution at {i}")

    images = [ctx.retraction(m) for m in src_carrier]
    report = LawReport()

    bad = None
    for i, m in enumerate(src_carrier):
        if ctx.carrier_index(m) is not None and not amb.equal(images[i], m):
            bad = (i,)
            break
    report.add("fixes-shared-elements", bad is None, witness=bad)

    bad = None
    for i in range(len(src_carrier)):
        for j in range(len(src_carrier)):
            lhs = images[index_of(amb.join(src_carrier[i], src_carrier[j]))]
            if not amb.equal(lhs, amb.join(images[i], images[j])):
                bad = (i, j)
                break
        if bad:
            break
    report.add("preserves-joins", bad is None, witness=bad)

    bad = None
    for i in range(len(src_carrier)):
        if not amb.equal(images[index_of(amb.inv(src_carrier[i]))], amb.inv(images[i])):
            bad = (i,)
            break
    report.add("preserves-involution", bad is None, witness=bad)

    witnesses = []
    for i in range(len(src_carrier)):
        for j in range(len(src_carrier)):
            lhs = images[index_of(amb.prod(src_carrier[i], src_carrier[j]))]
            if not amb.equal(lhs, amb.prod(images[i], images[j])):
                witnesses.append((i, j))
    out = ApproximationMap(list(src_carrier), images, report, witnesses)
    out._equal = amb.equal
    return out


@dataclass
class LowerHyperspace:
    """Closed sets of a finite space under the lower Vietoris topology.

    ``diamond[i]`` is the hyperspace open attached to base open i: the set
    of closed sets meeting it.  The topology is generated by the diamonds
    under finite intersection and union.
    """

    base: FiniteSpace
    points: tuple[frozenset, ...]
    space: FiniteSpace
    diamond: tuple[frozenset, ...]

    def point_index(self, closed_set: frozenset) -> int:
        return self.points.index(closed_set)


def lower_hyperspace(x: FiniteSpace) -> LowerHyperspace:
    """Enumerate the closed sets and the diamond-generated topology."""
    if x.size > 12:
        raise ValueError("hyperspace enumeration limited to 12 base points")
    points = tuple(x.closed_sets())
    pt_index = {c: i for i, c in enumerate(points)}
    diamonds = []
    for o in x.opens:
        diamonds.append(frozenset(i for i, c in enumerate(points) if c & o))
    family = set(diamonds)
    changed = True
    while changed:
        changed = False
        current = list(family)
        for a in current:
            for b in current:
                for c in (a & b, a | b):
                    if c not in family:
                        family.add(c)
                        changed = True
    family.add(frozenset())
    family.add(frozenset(range(len(points))))
    labels = ["{" + ",".join(x.points[i] for i in sorted(c)) + "}" for c in points]
    space = finite_space(labels, [sorted(o) for o in family])
    return LowerHyperspace(x, points, space, tuple(diamonds))


@dataclass
class BasisChangeMap:
    """A point of the source space goes to a closed set of the target base.

    ``assignment[i]`` is the closed subset of the target base assigned to
    source point i; the report carries the defining adjunction and the
    continuity verdicts.
    """

    source: FiniteSpace
    target: LowerHyperspace
    assignment: tuple[frozenset, ...]
    report: LawReport


def beta(xq: FiniteSpace, xp: FiniteSpace, f: Sequence[int]) -> BasisChangeMap:
    """Change-of-basis map from a union-preserving map on opens.

    ``f[i]`` gives the index in ``xp.opens`` of the image of ``xq.opens[i]``.
    The returned map sends a point x of xp to the complement of the union
    of all opens U of xq with x outside f(U); the defining adjunction
    "preimage of diamond-U equals f(U)" is then verified for every open,
    along with continuity for the hyperspace topology.
    """
    f = [int(v) for v in f]
    if len(f) != len(xq.opens):
        raise ValueError("f must be total on the opens of the source topology")
    for v in f:
        if not 0 <= v < len(xp.opens):
            raise ValueError("f image out of range")
    open_index = {o: i for i, o in enumerate(xq.opens)}
    empty_q = open_index[frozenset()]
    if xp.opens[f[empty_q]] != frozenset():
        raise ValueError(f"f does not preserve the empty set: open {empty_q}")
    for i, a in enumerate(xq.opens):
        for j, b in enumerate(xq.opens):
            u = open_index[a | b]
            if xp.opens[f[u]] != xp.opens[f[i]] | xp.opens[f[j]]:
                raise ValueError(f"f does not preserve unions: opens ({i}, {j})")

    full_q = frozenset(range(xq.size))
    assignment = []
    for x in range(xp.size):
        excluded = frozenset()
        for i, u in enumerate(xq.opens):
            if x not in xp.opens[f[i]]:
                excluded |= u
        assignment.append(full_q - excluded)

    hyper = lower_hyperspace(xq)
    report = LawReport()

    bad = None
    for i, u in enumerate(xq.opens):
        pre = frozenset(x for x in range(xp.size) if assignment[x] & u)
        if pre != xp.opens[f[i]]:
            bad = (i,)
            break
    report.add("diamond-adjunction", bad is None, witness=bad)

    point_of = [hyper.point_index(c) for c in assignment]
    opens_p = set(xp.opens)
    bad = None
    for o in hyper.space.opens:
        pre = frozenset(x for x in range(xp.size) if point_of[x] in o)
        if pre not in opens_p:
            bad = (tuple(sorted(o)),)
            break
    report.add("continuous", bad is None, witness=bad)

    empties = [x for x in range(xp.size) if not assignment[x]]
    report.add(
        "nonempty-values",
        True,
        note=("all values nonempty" if not empties
              else f"empty at points {empties} (recorded, not required)"),
    )

    singletons = {frozenset([i]) for i in range(xq.size)}
    if singletons <= set(xq.opens):
        for x in range(xp.size):
            direct = frozenset(
                y for y in range(xq.size)
                if x in xp.opens[f[open_index[frozenset([y])]]]
            )
            if direct != assignment[x]:
                raise RuntimeError("discrete-base cross-check failed")

    return BasisChangeMap(xp, hyper, tuple(assignment), report)


@dataclass
class SpinObserver:
    """The diagonal observer of a spin fixture set, with the approximation
    map from the transverse measurement family."""

    n: int
    fixtures: FixtureSet
    z_atoms: tuple[str, ...]
    x_atoms: tuple[str, ...]
    z_carrier: list[Subspace]
    z_names: list[str]
    x_carrier: list[Subspace]
    x_names: list[str]
    context: ObserverContext
    af: ApproximationMap

    def name_of(self, p: Subspace) -> str:
        idx = self.context.carrier_index(p)
        return self.z_names[idx] if idx is not None else repr(p)


def _atom_lattice(fixtures: FixtureSet, atoms: tuple[str, ...], top_name: str,
                  tol: Tolerance):
    """All joins of the atoms, in subset-bitmask order, with display names."""
    elements: list[Subspace] = []
    names: list[str] = []
    k = len(atoms)
    for s in range(1 << k):
        chosen = [atoms[i] for i in range(k) if (s >> i) & 1]
        if not chosen:
            elements.append(zero_subspace(fixtures.n))
            names.append("0")
            continue
        acc = fixtures[chosen[0]]
        for name in chosen[1:]:
            acc = join(acc, fixtures[name], tol)
        elements.append(acc)
        if len(chosen) == k:
            names.append(top_name)
        else:
            names.append("∨".join(chosen))
    return elements, names


def spin_observer(spin: str, tol: Tolerance = DEFAULT_TOL) -> SpinObserver:
    """Build the diagonal observer for the chosen spin fixture set."""
    if spin == "half":
        fixtures = spin_half_fixtures(tol)
        z_atoms, x_atoms = SPIN_HALF_Z_ATOMS, SPIN_HALF_X_ATOMS
    elif spin == "one":
        fixtures = spin_one_fixtures(tol)
        z_atoms, x_atoms = SPIN_ONE_Z_ATOMS, SPIN_ONE_X_ATOMS
    else:
        raise ValueError(f"unknown spin {spin!r} (use 'half' or 'one')")
    z_carrier, z_names = _atom_lattice(fixtures, z_atoms, "z", tol)
    x_carrier, x_names = _atom_lattice(fixtures, x_atoms, "x", tol)
    ctx = observer_from_expectation(diag_expectation(fixtures.n), z_carrier, tol)
    af = approximation_map(ctx, x_carrier)
    return SpinObserver(
        fixtures.n, fixtures, z_atoms, x_atoms,
        z_carrier, z_names, x_carrier, x_names, ctx, af,
    )


@dataclass
class BetaBundle:
    """A change-of-basis map together with the open-set map it came from."""

    observer: SpinObserver
    xq: FiniteSpace
    xp: FiniteSpace
    f: list[int]
    map: BasisChangeMap

    def assignment_by_label(self) -> dict[str, tuple[str, ...]]:
        out = {}
        for i, label in enumerate(self.xp.points):
            closed = self.map.assignment[i]
            out[label] = tuple(self.xq.points[j] for j in sorted(closed))
        return out


_POINT_LABELS = {2: ("down", "up"), 3: ("minus", "zero", "plus")}


def spin_beta(spin: str, tol: Tolerance = DEFAULT_TOL) -> BetaBundle:
    """Change of basis induced by restricting the diagonal retraction to the
    transverse measurement locale, under the discrete atom identification.

    Atom order is fixed as down/minus, zero, up/plus on both sides.
    """
    obs = spin_observer(spin, tol)
    labels = _POINT_LABELS[obs.n]
    xq = discrete_space(labels)
    xp = discrete_space(labels)
    k = len(labels)
    # x-lattice elements are indexed by atom bitmask; reuse that for opens.
    f = []
    for o in xq.opens:
        mask = sum(1 << i for i in o)
        image = obs.af.images[mask]
        atom_set = frozenset(
            i for i in range(k)
            if contains(image, obs.fixtures[obs.z_atoms[i]], tol)
        )
        f.append(xp.opens.index(atom_set))
    return BetaBundle(obs, xq, xp, f, beta(xq, xp, f))
