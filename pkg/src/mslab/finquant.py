"""Finite involutive quantales as explicit tables, with exhaustive law checkers.

A finite lattice with a bottom element and all binary joins has all joins,
and a product that preserves binary joins and the bottom in each variable
preserves arbitrary joins in each variable (induction on subset size).  The
checkers below therefore verify the binary and empty cases; the reduction is
exact at finite scale, not an approximation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .subspace import (
    DEFAULT_TOL,
    Subspace,
    Tolerance,
    contains,
    equal,
    involution,
    join,
    meet,
    product,
)

__all__ = [
    "LawResult",
    "LawReport",
    "FiniteQuantale",
    "check_complete_lattice",
    "check_axioms",
    "check_continuity",
    "check_homomorphism",
    "bounded_closure",
    "ClosureResult",
    "meet_quantale",
    "alexandrov_opens",
    "quantale_to_json",
    "quantale_from_json",
]


@dataclass(frozen=True)
class LawResult:
    """Verdict for one law, with a minimal counterexample when it fails."""

    law: str
    holds: bool
    witness: tuple | None = None
    note: str = ""

    def __post_init__(self):
        if not self.holds and self.witness is None:
            raise ValueError("failed law needs a witness")
        if self.holds and self.witness is not None:
            raise ValueError("passing law must not carry a witness")


class LawReport:
    """Ordered collection of law verdicts."""

    def __init__(self, results: Sequence[LawResult] = ()):
        self.results: list[LawResult] = list(results)

    def add(self, law: str, holds: bool, witness: tuple | None = None, note: str = ""):
        self.results.append(LawResult(law, holds, witness, note))

    def extend(self, other: "LawReport") -> "LawReport":
        self.results.extend(other.results)
        return self

    @property
    def ok(self) -> bool:
        return all(r.holds for r in self.results)

    def failures(self) -> list[LawResult]:
        return [r for r in self.results if not r.holds]

    def result(self, law: str) -> LawResult:
        for r in self.results:
            if r.law == law:
                return r
        raise KeyError(law)

    def lines(self) -> list[str]:
        out = []
        for r in self.results:
            tag = "PASS" if r.holds else "FAIL"
            line = f"{tag} {r.law}"
            if r.witness is not None:
                line += f" witness={r.witness}"
            if r.note:
                line += f" ({r.note})"
            out.append(line)
        return out

    def to_json(self) -> dict:
        return {
            "ok": self.ok,
            "laws": [
                {
                    "law": r.law,
                    "holds": r.holds,
                    "witness": list(r.witness) if r.witness is not None else None,
                    "note": r.note,
                }
                for r in self.results
            ],
        }

    def __repr__(self) -> str:
        return f"LawReport(ok={self.ok}, laws={len(self.results)})"


def _as_bool_table(leq, k: int) -> np.ndarray:
    t = np.asarray(leq, dtype=bool)
    if t.shape != (k, k):
        raise ValueError(f"leq must be {k}x{k}")
    t.setflags(write=False)
    return t


def _as_index_table(tab, shape, k: int, name: str) -> np.ndarray:
    t = np.asarray(tab, dtype=np.int64)
    if t.shape != shape:
        raise ValueError(f"{name} must have shape {shape}")
    if t.size and (t.min() < 0 or t.max() >= k):
        raise ValueError(f"{name} has indices outside 0..{k - 1}")
    t.setflags(write=False)
    return t


def _canonical_opens(opens, k: int) -> tuple[frozenset, ...]:
    sets = [frozenset(int(i) for i in o) for o in opens]
    for o in sets:
        if o and (min(o) < 0 or max(o) >= k):
            raise ValueError("open set index out of range")
    return tuple(sorted(set(sets), key=lambda o: (len(o), sorted(o))))


class FiniteQuantale:
    """Carrier {0..k-1} with order, product and involution tables.

    ``opens`` (optional) is a finite topology on the carrier, given as
    index sets; it must contain the empty and the full set and be closed
    under union and intersection.
    """

    def __init__(self, leq, prod, inv, opens=None):
        prod = np.asarray(prod)
        k = prod.shape[0]
        self.size = k
        self.leq = _as_bool_table(leq, k)
        self.prod = _as_index_table(prod, (k, k), k, "prod")
        self.inv = _as_index_table(inv, (k,), k, "inv")
        self.opens = None if opens is None else _canonical_opens(opens, k)
        if self.opens is not None:
            _validate_topology(self.opens, k)
        self._join = None
        self._meet = None

    def bottom(self) -> int:
        below_all = self.leq.all(axis=1)
        idx = np.flatnonzero(below_all)
        if len(idx) != 1:
            raise ValueError("no unique bottom element")
        return int(idx[0])

    def top(self) -> int:
        above_all = self.leq.all(axis=0)
        idx = np.flatnonzero(above_all)
        if len(idx) != 1:
            raise ValueError("no unique top element")
        return int(idx[0])

    def join_table(self) -> np.ndarray:
        if self._join is None:
            tab, missing = _pairwise_bound_table(self.leq, upper=True)
            if missing:
                raise ValueError(f"pair {missing[0]} has no join")
            self._join = tab
        return self._join

    def meet_table(self) -> np.ndarray:
        if self._meet is None:
            tab, missing = _pairwise_bound_table(self.leq, upper=False)
            if missing:
                raise ValueError(f"pair {missing[0]} has no meet")
            self._meet = tab
        return self._meet


def _validate_topology(opens: tuple[frozenset, ...], k: int) -> None:
    family = set(opens)
    full = frozenset(range(k))
    if frozenset() not in family or full not in family:
        raise ValueError("topology must contain the empty and the full set")
    for a in opens:
        for b in opens:
            if a | b not in family or a & b not in family:
                raise ValueError(
                    f"topology not closed under union/intersection: "
                    f"{sorted(a)}, {sorted(b)}"
                )


def _pairwise_bound_table(leq: np.ndarray, upper: bool):
    """Least upper (or greatest lower) bound table; lists pairs lacking one."""
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
    return tab, missing


def _check_poset(leq: np.ndarray) -> None:
    k = leq.shape[0]
    if not leq.diagonal().all():
        i = int(np.flatnonzero(~leq.diagonal())[0])
        raise ValueError(f"leq not reflexive at {i}")
    anti = leq & leq.T & ~np.eye(k, dtype=bool)
    if anti.any():
        i, j = map(int, np.argwhere(anti)[0])
        raise ValueError(f"leq not antisymmetric at ({i}, {j})")
    closure = leq @ leq
    gaps = closure & ~leq
    if gaps.any():
        i, j = map(int, np.argwhere(gaps)[0])
        raise ValueError(f"leq not transitive at ({i}, {j})")


def check_complete_lattice(q: FiniteQuantale) -> LawReport:
    """Bottom plus all binary joins; enough for completeness at finite size."""
    _check_poset(q.leq)
    report = LawReport()
    k = q.size
    below_all = np.flatnonzero(q.leq.all(axis=1))
    if len(below_all) == 1:
        report.add("bottom-exists", True)
    else:
        strictly_below = q.leq.T & ~np.eye(k, dtype=bool)
        minimal = np.flatnonzero(~strictly_below.any(axis=1))
        report.add(
            "bottom-exists",
            False,
            witness=tuple(int(i) for i in minimal[:2]),
            note="several minimal elements" if len(minimal) > 1 else "no minimum",
        )
    _, missing = _pairwise_bound_table(q.leq, upper=True)
    if missing:
        report.add("binary-joins-exist", False, witness=missing[0])
    else:
        report.add("binary-joins-exist", True)
    return report


def check_axioms(q: FiniteQuantale, exhaustive: bool | None = None) -> LawReport:
    """Verify the measurement-space axioms on the tables.

    Associativity, distributivity over binary joins on both sides,
    absorption by the bottom on both sides, the two involution laws, and
    reversibility (m m* m <= m forces equality).  Exhaustive over all
    triples by default up to size 256; beyond that a documented random
    sample of 200000 triples is used unless ``exhaustive=True``.
    """
    lattice = check_complete_lattice(q)
    if not lattice.ok:
        raise ValueError(f"not a complete lattice: {lattice.failures()[0].law}")
    k = q.size
    if exhaustive is None:
        exhaustive = k <= 256
    p, inv = q.prod, q.inv
    jt = q.join_table()
    bot = q.bottom()
    report = LawReport()
    idx = np.arange(k)

    def first_bad(ok_cube, law):
        w = tuple(int(x) for x in np.argwhere(~ok_cube)[0])
        report.add(law, False, witness=w)

    if exhaustive:
        lhs = p[p, :]
        rhs = p[:, p]
        ok = lhs == rhs
        report.add("associativity", True) if ok.all() else first_bad(ok, "associativity")

        lhs = p[jt, :]
        rhs = jt[p[:, None, :], p[None, :, :]]
        ok = lhs == rhs
        (report.add("distributivity-right", True) if ok.all()
         else first_bad(ok, "distributivity-right"))

        lhs = p[:, jt]
        rhs = jt[p[:, :, None], p[:, None, :]]
        ok = lhs == rhs
        (report.add("distributivity-left", True) if ok.all()
         else first_bad(ok, "distributivity-left"))
    else:
        rng = np.random.default_rng(0)
        count = 200_000
        trip = rng.integers(0, k, size=(count, 3))
        a, b, c = trip[:, 0], trip[:, 1], trip[:, 2]
        note = f"sampled {count} random triples (size {k} > 256)"
        ok = p[p[a, b], c] == p[a, p[b, c]]
        if ok.all():
            report.add("associativity", True, note=note)
        else:
            w = int(np.flatnonzero(~ok)[0])
            report.add("associativity", False,
                       witness=(int(a[w]), int(b[w]), int(c[w])), note=note)
        ok = p[jt[a, b], c] == jt[p[a, c], p[b, c]]
        if ok.all():
            report.add("distributivity-right", True, note=note)
        else:
            w = int(np.flatnonzero(~ok)[0])
            report.add("distributivity-right", False,
                       witness=(int(a[w]), int(b[w]), int(c[w])), note=note)
        ok = p[c, jt[a, b]] == jt[p[c, a], p[c, b]]
        if ok.all():
            report.add("distributivity-left", True, note=note)
        else:
            w = int(np.flatnonzero(~ok)[0])
            report.add("distributivity-left", False,
                       witness=(int(c[w]), int(a[w]), int(b[w])), note=note)

    ok = p[bot, :] == bot
    if ok.all():
        report.add("absorption-right", True)
    else:
        report.add("absorption-right", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))
    ok = p[:, bot] == bot
    if ok.all():
        report.add("absorption-left", True)
    else:
        report.add("absorption-left", False, witness=(int(np.flatnonzero(~ok)[0]),))

    ok = inv[inv] == idx
    if ok.all():
        report.add("involution-squared", True)
    else:
        report.add("involution-squared", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))

    ok = inv[p] == p[np.ix_(inv, inv)].T
    if ok.all():
        report.add("involution-antidistributes", True)
    else:
        i, j = map(int, np.argwhere(~ok)[0])
        report.add("involution-antidistributes", False, witness=(i, j))

    mmm = p[p[idx, inv], idx]
    lax = q.leq[mmm, idx]
    bad = lax & (mmm != idx)
    if bad.any():
        report.add("reversibility", False, witness=(int(np.flatnonzero(bad)[0]),))
    else:
        report.add("reversibility", True)

    dist_ok = all(
        report.result(law).holds
        for law in ("distributivity-right", "distributivity-left",
                    "absorption-right", "absorption-left")
    )
    report.add(
        "product-preserves-all-joins",
        dist_ok,
        witness=None if dist_ok else (bot,),
        note="binary joins + bottom suffice for all joins at finite size",
    )
    return report


def _rectangle_open(pre: np.ndarray, opens, masks) -> tuple | None:
    """First pair of the preimage not inside an open rectangle, or None.

    A set of pairs is open in the product topology exactly when every pair
    lies in some open rectangle U x V contained in the set; this is the
    literal oracle, with no monotonicity shortcuts.
    """
    k = pre.shape[0]
    rows = [sum(1 << j for j in range(k) if pre[i, j]) for i in range(k)]
    covered = np.zeros_like(pre)
    for u_idx, u in enumerate(opens):
        if not u:
            continue
        inter = ~0
        for i in u:
            inter &= rows[i]
        if inter == 0:
            continue
        w = 0
        for v in opens:
            vm = masks[v]
            if vm and (vm & ~inter) == 0:
                w |= vm
        if not w:
            continue
        cols = [j for j in range(k) if (w >> j) & 1]
        for i in u:
            covered[i, cols] = True
    bad = pre & ~covered
    if bad.any():
        i, j = map(int, np.argwhere(bad)[0])
        return (i, j)
    return None


def check_continuity(q: FiniteQuantale) -> LawReport:
    """Literal preimage-openness of involution, product and binary join."""
    if q.opens is None:
        raise ValueError("quantale has no topology")
    k = q.size
    opens = q.opens
    family = set(opens)
    masks = {o: sum(1 << j for j in o) for o in opens}
    report = LawReport()

    bad = None
    for o in opens:
        pre = frozenset(i for i in range(k) if q.inv[i] in o)
        if pre not in family:
            bad = (tuple(sorted(o)),)
            break
    report.add("involution-continuous", bad is None, witness=bad)

    jt = q.join_table()
    for law, table in (("product-continuous", q.prod), ("join-continuous", jt)):
        bad = None
        for o in opens:
            member = np.zeros(k, dtype=bool)
            member[list(o)] = True
            pre = member[table]
            w = _rectangle_open(pre, opens, masks)
            if w is not None:
                bad = (w[0], w[1], tuple(sorted(o)))
                break
        report.add(law, bad is None, witness=bad)
    return report


def check_homomorphism(
    h: Sequence[int], src: FiniteQuantale, dst: FiniteQuantale
) -> LawReport:
    """Bottom, binary joins, product, involution; continuity when both sides
    carry topologies."""
    hm = np.asarray(h, dtype=np.int64)
    if hm.shape != (src.size,):
        raise ValueError(f"map must be total on 0..{src.size - 1}")
    if hm.size and (hm.min() < 0 or hm.max() >= dst.size):
        raise ValueError("map image out of range")
    report = LawReport()
    report.add(
        "maps-bottom-to-bottom",
        int(hm[src.bottom()]) == dst.bottom(),
        witness=None if int(hm[src.bottom()]) == dst.bottom() else (src.bottom(),),
    )
    sj, dj = src.join_table(), dst.join_table()
    ok = hm[sj] == dj[np.ix_(hm, hm)]
    if ok.all():
        report.add("preserves-binary-joins", True)
    else:
        i, j = map(int, np.argwhere(~ok)[0])
        report.add("preserves-binary-joins", False, witness=(i, j))
    ok = hm[src.prod] == dst.prod[np.ix_(hm, hm)]
    if ok.all():
        report.add("preserves-product", True)
    else:
        i, j = map(int, np.argwhere(~ok)[0])
        report.add("preserves-product", False, witness=(i, j))
    ok = hm[src.inv] == dst.inv[hm]
    if ok.all():
        report.add("preserves-involution", True)
    else:
        report.add("preserves-involution", False,
                   witness=(int(np.flatnonzero(~ok)[0]),))
    if src.opens is not None and dst.opens is not None:
        src_family = set(src.opens)
        bad = None
        for o in dst.opens:
            pre = frozenset(i for i in range(src.size) if hm[i] in o)
            if pre not in src_family:
                bad = (tuple(sorted(o)),)
                break
        report.add("continuous", bad is None, witness=bad)
    else:
        report.add("continuous", True, note="skipped: topology missing on one side")
    return report


def meet_quantale(leq, opens=None) -> FiniteQuantale:
    """Quantale with product = meet and trivial involution over a lattice order."""
    k = np.asarray(leq).shape[0]
    q = FiniteQuantale(leq, np.zeros((k, k), dtype=np.int64), np.arange(k), opens)
    q.prod = q.meet_table()
    return q


def alexandrov_opens(leq) -> list[frozenset]:
    """All upper-closed subsets of a finite order (its Alexandrov topology)."""
    leq = np.asarray(leq, dtype=bool)
    k = leq.shape[0]
    if k > 16:
        raise ValueError("Alexandrov enumeration limited to 16 elements")
    up_masks = [sum(1 << j for j in range(k) if leq[i, j]) for i in range(k)]
    opens = []
    for s in range(1 << k):
        if all((s >> i) & 1 == 0 or (s & up_masks[i]) == up_masks[i] for i in range(k)):
            opens.append(frozenset(i for i in range(k) if (s >> i) & 1))
    return opens


def _proj_fingerprint(proj: np.ndarray, dim: int) -> bytes:
    rounded = np.round(np.ascontiguousarray(proj).view(np.float64), 4) + 0.0
    return bytes([dim]) + rounded.tobytes()


def _fingerprint(p: Subspace) -> bytes:
    """Span-determined key: the rounded orthogonal projector."""
    return _proj_fingerprint(p.projector(), p.dim)


@dataclass
class ClosureResult:
    """Outcome of a bounded closure run; ``quantale`` is None on failure."""

    closed: bool
    elements: list[Subspace]
    growth: list[int] = field(default_factory=list)
    quantale: FiniteQuantale | None = None


class _SubspacePool:
    """Dedup pool for subspaces keyed by projector fingerprint.

    Two subspaces whose projectors agree entrywise within 1e-11 are equal at
    any eps above 16e-11 (the projector gap bounds every basis residual), so
    near-identical candidates skip the exact containment test.
    """

    def __init__(self, tol: Tolerance):
        self.tol = tol
        self.elements: list[Subspace] = []
        self.projs: list[np.ndarray] = []
        self.buckets: dict[bytes, list[int]] = {}

    def find(self, p: Subspace, proj: np.ndarray | None = None) -> int | None:
        if proj is None:
            proj = p.projector()
        for idx in self.buckets.get(_proj_fingerprint(proj, p.dim), ()):
            if float(np.abs(self.projs[idx] - proj).max()) < 1e-11:
                return idx
            if equal(self.elements[idx], p, self.tol):
                return idx
        return None

    def add(self, p: Subspace) -> tuple[int, bool]:
        proj = p.projector()
        idx = self.find(p, proj)
        if idx is not None:
            return idx, False
        self.elements.append(p)
        self.projs.append(proj)
        idx = len(self.elements) - 1
        self.buckets.setdefault(_proj_fingerprint(proj, p.dim), []).append(idx)
        return idx, True


def bounded_closure(
    seed: list[Subspace],
    depth: int,
    tol: Tolerance = DEFAULT_TOL,
    max_size: int = 512,
) -> ClosureResult:
    """Close ``seed`` under join, product and involution.

    The sweep pairs every element with every other, including elements
    discovered during the sweep, so a terminating closure completes within
    the first of the ``depth`` rounds; ``max_size`` aborts runaway growth,
    in which case the result carries the growth counts and the elements
    collected so far instead of tables.

    Meets are not generators: closing subspaces under ambient intersection
    does not terminate in general (intersections of generic pairs keep
    producing fresh subspaces), and the table-level consumers only need a
    join-closed carrier, where greatest lower bounds exist relative to the
    carrier and are supplied by ``FiniteQuantale.meet_table``.

    On success the elements are reordered by a span-determined key, so the
    output does not depend on the seed order, and the order, product and
    involution tables are returned as a FiniteQuantale (topology omitted).
    """
    if depth < 1:
        raise ValueError("depth must be positive")
    if not seed:
        raise ValueError("seed must be nonempty")
    n = seed[0].n
    for s in seed:
        if s.n != n:
            raise ValueError(f"ambient dimension mismatch: {n} vs {s.n}")
    pool = _SubspacePool(tol)
    for s in seed:
        pool.add(s)
    growth = [len(pool.elements)]
    elems = pool.elements
    prod_of: dict[tuple[int, int], int] = {}
    join_of: dict[tuple[int, int], int] = {}
    inv_of: dict[int, int] = {}
    i = 0
    while i < len(elems):
        if len(elems) > max_size:
            growth.append(len(elems))
            return ClosureResult(False, list(elems), growth, None)
        inv_of[i], _ = pool.add(involution(elems[i], tol))
        for j in range(i + 1):
            a, b = elems[i], elems[j]
            idx, _ = pool.add(join(a, b, tol))
            join_of[(i, j)] = join_of[(j, i)] = idx
            prod_of[(i, j)], _ = pool.add(product(a, b, tol))
            if i != j:
                prod_of[(j, i)], _ = pool.add(product(b, a, tol))
        i += 1
    growth.append(len(elems))

    order = sorted(range(len(elems)),
                   key=lambda t: (elems[t].dim, _fingerprint(elems[t])))
    rank = {old: new for new, old in enumerate(order)}
    final = [elems[t] for t in order]
    k = len(final)
    leq = np.zeros((k, k), dtype=bool)
    for a in range(k):
        for b in range(k):
            leq[a, b] = contains(final[b], final[a], tol)
    prod_tab = np.zeros((k, k), dtype=np.int64)
    inv_tab = np.zeros(k, dtype=np.int64)
    for old_i in range(len(elems)):
        inv_tab[rank[old_i]] = rank[inv_of[old_i]]
        for old_j in range(len(elems)):
            prod_tab[rank[old_i], rank[old_j]] = rank[prod_of[(old_i, old_j)]]
    q = FiniteQuantale(leq, prod_tab, inv_tab)
    return ClosureResult(True, final, growth, q)


def quantale_to_json(q: FiniteQuantale) -> dict:
    doc = {
        "size": q.size,
        "leq": q.leq.astype(int).tolist(),
        "prod": q.prod.tolist(),
        "inv": q.inv.tolist(),
    }
    if q.opens is not None:
        doc["opens"] = [sorted(o) for o in q.opens]
    return doc


def quantale_from_json(doc: dict) -> FiniteQuantale:
    return FiniteQuantale(
        doc["leq"], doc["prod"], doc["inv"], doc.get("opens")
    )
