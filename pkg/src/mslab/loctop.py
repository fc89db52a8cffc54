"""Finite topological spaces and finite lattices as locales.

Finite scale degenerates several classical notions, and the checkers here
lean on that honestly: every directed subset of a finite order has a
greatest element, so the Scott topology is the upper-set (Alexandrov)
topology; every finite distributive lattice is a countably-based locally
compact locale, so spectra exist outright.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .finquant import FiniteQuantale, LawReport, alexandrov_opens

__all__ = [
    "FiniteSpace",
    "FiniteLattice",
    "finite_space",
    "discrete_space",
    "spin_z_space",
    "topology_lattice",
    "specialization_order",
    "SpecializationResult",
    "check_sober",
    "points_of_locale",
    "check_distributive",
    "alexandrov_scott",
    "spectrum",
    "check_classical",
    "check_local",
    "space_to_json",
    "space_from_json",
    "lattice_to_json",
    "lattice_from_json",
]


@dataclass(frozen=True)
class FiniteSpace:
    """Point labels plus a finite topology given as index sets."""

    points: tuple[str, ...]
    opens: tuple[frozenset, ...]

    def __post_init__(self):
        k = len(self.points)
        family = set(self.opens)
        if len(family) != len(self.opens):
            raise ValueError("duplicate open sets")
        full = frozenset(range(k))
        if frozenset() not in family or full not in family:
            raise ValueError("topology must contain the empty and the full set")
        for o in self.opens:
            if o and (min(o) < 0 or max(o) >= k):
                raise ValueError("open set index out of range")
        for a in self.opens:
            for b in self.opens:
                if a | b not in family or a & b not in family:
                    raise ValueError(
                        f"topology not closed under union/intersection: "
                        f"{sorted(a)}, {sorted(b)}"
                    )

    @property
    def size(self) -> int:
        return len(self.points)

    def closed_sets(self) -> list[frozenset]:
        full = frozenset(range(self.size))
        return sorted((full - o for o in self.opens), key=lambda c: (len(c), sorted(c)))


def finite_space(points, open_index_lists) -> FiniteSpace:
    """Build a FiniteSpace from labels and lists of open-point indices."""
    opens = {frozenset(int(i) for i in o) for o in open_index_lists}
    canonical = tuple(sorted(opens, key=lambda o: (len(o), sorted(o))))
    return FiniteSpace(tuple(str(p) for p in points), canonical)


def discrete_space(labels) -> FiniteSpace:
    k = len(labels)
    subsets = []
    for s in range(1 << k):
        subsets.append([i for i in range(k) if (s >> i) & 1])
    return finite_space(labels, subsets)


def spin_z_space() -> FiniteSpace:
    """Three measurements sharing one apparatus: record only the lower
    deflection, only the upper one, or whichever occurs."""
    return finite_space(
        ("z_down", "z_up", "z"),
        [[], [2], [0, 2], [1, 2], [0, 1, 2]],
    )


class FiniteLattice:
    """A finite lattice: bottom, top and all binary joins/meets must exist."""

    def __init__(self, leq):
        leq = np.asarray(leq, dtype=bool)
        k = leq.shape[0]
        if leq.shape != (k, k):
            raise ValueError("leq must be square")
        _check_order(leq)
        self.size = k
        leq.setflags(write=False)
        self.leq = leq
        self.join, join_missing = _bound_table(leq, upper=True)
        self.meet, meet_missing = _bound_table(leq, upper=False)
        if join_missing:
            raise ValueError(f"pair {join_missing[0]} has no join")
        if meet_missing:
            raise ValueError(f"pair {meet_missing[0]} has no meet")
        if not leq.all(axis=1).any():
            raise ValueError("no bottom element")
        if not leq.all(axis=0).any():
            raise ValueError("no top element")
        self.bottom = int(np.flatnonzero(leq.all(axis=1))[0])
        self.top = int(np.flatnonzero(leq.all(axis=0))[0])


def _check_order(leq: np.ndarray) -> None:
    k = leq.shape[0]
    if not leq.diagonal().all():
        raise ValueError("order not reflexive")
    if (leq & leq.T & ~np.eye(k, dtype=bool)).any():
        raise ValueError("order not antisymmetric")
    if ((leq @ leq) & ~leq).any():
        raise ValueError("order not transitive")


def _bound_table(leq: np.ndarray, upper: bool):
    k = leq.shape[0]
    tab = np.full((k, k), -1, dtype=np.int64)
    missing = []
    for i in range(k):
        for j in range(i, k):
            bounds = (leq[i] & leq[j]) if upper else (leq[:, i] & leq[:, j])
            cand = np.flatnonzero(bounds)
            if len(cand) == 0:
                missing.append((i, j))
                continue
            sub = leq[np.ix_(cand, cand)]
            best = cand[sub.all(axis=1)] if upper else cand[sub.all(axis=0)]
            if len(best) != 1:
                missing.append((i, j))
                continue
            tab[i, j] = tab[j, i] = best[0]
    tab.setflags(write=False)
    return tab, missing


@dataclass(frozen=True)
class SpecializationResult:
    """Specialization preorder of a space plus its sober-lattice candidacy."""

    leq: np.ndarray
    report: LawReport


def specialization_order(x: FiniteSpace) -> SpecializationResult:
    """m <= n iff every open containing m also contains n (m in cl{n})."""
    k = x.size
    member = np.zeros((len(x.opens), k), dtype=bool)
    for oi, o in enumerate(x.opens):
        member[oi, list(o)] = True
    leq = np.ones((k, k), dtype=bool)
    for m in range(k):
        for n in range(k):
            leq[m, n] = bool((~member[:, m] | member[:, n]).all())
    leq.setflags(write=False)
    report = LawReport()
    t0 = not (leq & leq.T & ~np.eye(k, dtype=bool)).any()
    if t0:
        report.add("t0", True)
    else:
        i, j = map(int, np.argwhere(leq & leq.T & ~np.eye(k, dtype=bool))[0])
        report.add("t0", False, witness=(i, j))
    minima = np.flatnonzero(leq.all(axis=1))
    report.add(
        "has-bottom",
        len(minima) == 1,
        witness=None if len(minima) == 1 else tuple(map(int, np.flatnonzero(
            ~(leq.T & ~np.eye(k, dtype=bool)).any(axis=1))[:2])),
    )
    if t0:
        _, missing = _bound_table(leq, upper=True)
        report.add(
            "has-binary-joins",
            not missing,
            witness=missing[0] if missing else None,
        )
    else:
        report.add("has-binary-joins", False, witness=(0, 0),
                   note="not a partial order")
    return SpecializationResult(leq, report)


def _irreducible(c: frozenset, closed: list[frozenset]) -> bool:
    if not c:
        return False
    proper = [d for d in closed if d < c]
    return not any(a | b == c for a, b in combinations(proper, 2))


def check_sober(x: FiniteSpace) -> LawReport:
    """Brute-force sobriety: each irreducible closed set has a unique
    generic point.  T0 is reported separately."""
    spec = specialization_order(x)
    report = LawReport()
    t0 = spec.report.result("t0")
    report.add("t0", t0.holds, witness=t0.witness)
    closed = x.closed_sets()
    closure_of_point = []
    for m in range(x.size):
        closure_of_point.append(frozenset(int(i) for i in np.flatnonzero(spec.leq[:, m])))
    bad = None
    for c in closed:
        if not c or not _irreducible(c, closed):
            continue
        generics = [m for m in range(x.size) if closure_of_point[m] == c]
        if len(generics) != 1:
            bad = (tuple(sorted(c)), tuple(generics))
            break
    report.add("sober", bad is None, witness=bad)
    return report


def points_of_locale(lattice: FiniteLattice) -> list[tuple[int, ...]]:
    """All lattice maps to {0,1} preserving top, binary meets, bottom and
    binary joins.

    Such a map is the indicator of a principal upward filter at a nonzero
    join-prime element, so the points are enumerated through those.
    """
    k = lattice.size
    points = []
    for u in range(k):
        if u == lattice.bottom:
            continue
        prime = True
        for a in range(k):
            for b in range(k):
                if lattice.leq[u, lattice.join[a, b]] and not (
                    lattice.leq[u, a] or lattice.leq[u, b]
                ):
                    prime = False
                    break
            if not prime:
                break
        if prime:
            points.append(tuple(int(lattice.leq[u, v]) for v in range(k)))
    return points


def check_distributive(lattice: FiniteLattice) -> LawReport:
    """Exhaustive ternary check of meet-over-join distributivity."""
    j, m = lattice.join, lattice.meet
    lhs = m[:, j]
    rhs = j[m[:, :, None], m[:, None, :]]
    ok = lhs == rhs
    report = LawReport()
    if ok.all():
        report.add("distributive", True)
    else:
        w = tuple(int(v) for v in np.argwhere(~ok)[0])
        report.add("distributive", False, witness=w)
    return report


def alexandrov_scott(lattice: FiniteLattice) -> FiniteSpace:
    """Scott topology of a finite lattice.

    Every directed subset of a finite order has a greatest element, so the
    Scott opens degenerate to exactly the upper-closed sets.
    """
    opens = alexandrov_opens(lattice.leq)
    return finite_space([str(i) for i in range(lattice.size)], [sorted(o) for o in opens])


def spectrum(lattice: FiniteLattice, require_distributive: bool = True) -> FiniteSpace:
    """The sober space whose opens realize the lattice.

    Points are the lattice points (truth valuations); the open attached to
    a lattice element is the set of points sending it to 1.  The map from
    lattice elements to opens is verified to be an order isomorphism.
    """
    if require_distributive:
        rep = check_distributive(lattice)
        if not rep.ok:
            raise ValueError(
                f"lattice is not distributive, witness {rep.result('distributive').witness}"
            )
    pts = points_of_locale(lattice)
    extents = []
    for v in range(lattice.size):
        extents.append(frozenset(i for i, p in enumerate(pts) if p[v]))
    space = finite_space([f"p{i}" for i in range(len(pts))], [sorted(e) for e in extents])
    if len(set(extents)) != lattice.size:
        raise RuntimeError("lattice does not embed in its spectrum's topology")
    for a in range(lattice.size):
        for b in range(lattice.size):
            if lattice.leq[a, b] != (extents[a] <= extents[b]):
                raise RuntimeError("spectrum does not reflect the lattice order")
    if len(space.opens) != lattice.size:
        raise RuntimeError("spectrum topology has extra opens")
    return space


def topology_lattice(x: FiniteSpace) -> FiniteLattice:
    """The lattice of open sets of a finite space, ordered by inclusion."""
    k = len(x.opens)
    leq = np.zeros((k, k), dtype=bool)
    for i, a in enumerate(x.opens):
        for j, b in enumerate(x.opens):
            leq[i, j] = a <= b
    return FiniteLattice(leq)


def check_classical(q: FiniteQuantale) -> LawReport:
    """Finite surrogate of classicality for a table quantale.

    The order must be a distributive lattice (countably-based local
    compactness is automatic for finite distributive lattices), the
    topology, when present, must be the Scott (= upper-set) topology of
    the order, and m <= m m* m must hold throughout.
    """
    from .finquant import check_axioms  # local to avoid import noise at module load

    axioms = check_axioms(q)
    if not axioms.ok:
        raise ValueError(f"quantale fails axioms: {axioms.failures()[0].law}")
    report = LawReport()
    lattice = FiniteLattice(q.leq)
    dist = check_distributive(lattice)
    res = dist.result("distributive")
    report.add(
        "order-distributive",
        res.holds,
        witness=res.witness,
        note="finite distributive lattices are countably-based locally compact locales",
    )
    if q.opens is not None:
        scott = set(alexandrov_opens(q.leq))
        same = set(q.opens) == scott
        if same:
            report.add("topology-is-scott", True,
                       note="Scott topology = upper sets at finite size")
        else:
            diff = set(q.opens) ^ scott
            sample = tuple(sorted(next(iter(diff))))
            report.add("topology-is-scott", False, witness=(sample,))
    else:
        report.add("topology-is-scott", True, note="skipped: no topology attached")
    idx = np.arange(q.size)
    mmm = q.prod[q.prod[idx, q.inv], idx]
    ok = q.leq[idx, mmm]
    if ok.all():
        report.add("strong-reversibility", True)
    else:
        report.add("strong-reversibility", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))
    return report


def check_local(q: FiniteQuantale) -> LawReport:
    """Product equals meet and involution is trivial."""
    report = LawReport()
    mt = q.meet_table()
    ok = q.prod == mt
    if ok.all():
        report.add("product-is-meet", True)
    else:
        i, j = map(int, np.argwhere(~ok)[0])
        report.add("product-is-meet", False, witness=(i, j))
    idx = np.arange(q.size)
    ok = q.inv == idx
    if ok.all():
        report.add("involution-trivial", True)
    else:
        report.add("involution-trivial", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))
    return report


def space_to_json(x: FiniteSpace) -> dict:
    return {"points": list(x.points), "opens": [sorted(o) for o in x.opens]}


def space_from_json(doc: dict) -> FiniteSpace:
    return finite_space(doc["points"], doc["opens"])


def lattice_to_json(lattice: FiniteLattice) -> dict:
    return {"size": lattice.size, "leq": lattice.leq.astype(int).tolist()}


def lattice_from_json(doc: dict) -> FiniteLattice:
    return FiniteLattice(doc["leq"])
