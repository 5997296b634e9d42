"""Partitions of a finite vertex set and the marked-partition operations.

A ``Partition`` stores its universe sorted and, for every element, the
minimum element of its block (its label).  Two partitions are equal iff their
universes and label vectors are equal, which makes them cheap to hash.

A marked partition is a triple ``(P, B, w)`` where ``B`` is a set of blocks of
``P`` (given by their labels) and ``w`` a weight.  ``MarkedPartitionSet``
holds many of them over one universe and keeps, per ``(P, B)``, the least
weight only.

The per-entry functions (``glue_entry``, ``project_entry``...) are what the
VRP dynamic program calls; the set-level functions are built on top.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

WEIGHT_LIMIT = 2**63 - 1


class WeightOverflowError(OverflowError):
    pass


def checked_add(a: int, b: int) -> int:
    s = a + b
    if s > WEIGHT_LIMIT:
        raise WeightOverflowError(f"weight {s} exceeds {WEIGHT_LIMIT}")
    return s


class Partition:
    __slots__ = ("universe", "labels", "_hash")

    def __init__(self, universe, labels):
        self.universe = tuple(universe)
        self.labels = tuple(labels)
        self._hash = hash((self.universe, self.labels))

    @classmethod
    def from_blocks(cls, blocks: Iterable[Iterable[int]]) -> "Partition":
        label = {}
        for block in blocks:
            block = list(block)
            if not block:
                raise ValueError("empty block")
            m = min(block)
            for x in block:
                if x in label:
                    raise ValueError(f"element {x} appears in two blocks")
                label[x] = m
        universe = sorted(label)
        return cls(universe, (label[x] for x in universe))

    @classmethod
    def singletons(cls, universe: Iterable[int]) -> "Partition":
        u = sorted(universe)
        return cls(u, u)

    def __eq__(self, other):
        return (isinstance(other, Partition) and self.universe == other.universe
                and self.labels == other.labels)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Partition({self.blocks()})"

    def label_map(self) -> dict[int, int]:
        return dict(zip(self.universe, self.labels))

    def blocks(self) -> list[tuple[int, ...]]:
        """Blocks in canonical order (sorted by minimum element)."""
        groups = {}
        for x, l in zip(self.universe, self.labels):
            groups.setdefault(l, []).append(x)
        return [tuple(groups[l]) for l in sorted(groups)]

    def block_of(self, x: int) -> tuple[int, ...]:
        l = self.label_map()[x]
        return tuple(y for y, m in zip(self.universe, self.labels) if m == l)

    def refines(self, other: "Partition") -> bool:
        """``self ⊑ other``: every block of self lies inside a block of other."""
        if self.universe != other.universe:
            return False
        seen = {}
        for l, m in zip(self.labels, other.labels):
            if seen.setdefault(l, m) != m:
                return False
        return True


def _relabel(universe, parent) -> Partition:
    """Turn a union-find forest over ``universe`` into a canonical partition."""

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    # roots are always the smallest element of their tree (see _union)
    return Partition(universe, (find(x) for x in universe))


def _union(parent, a, b):
    while parent[a] != a:
        a = parent[a]
    while parent[b] != b:
        b = parent[b]
    if a != b:
        if a < b:
            parent[b] = a
        else:
            parent[a] = b


def coarsen_join(p: Partition, q: Partition) -> Partition:
    """Finest common coarsening ``p ⊔ q``."""
    if p.universe != q.universe:
        raise ValueError("partitions over different universes")
    parent = {x: x for x in p.universe}
    for x, l in zip(p.universe, p.labels):
        _union(parent, x, l)
    for x, l in zip(q.universe, q.labels):
        _union(parent, x, l)
    return _relabel(p.universe, parent)


def restrict(p: Partition, v: Iterable[int]) -> Partition:
    """``P↓V``: intersect every block with V, dropping empty intersections."""
    v = set(v)
    if not v <= set(p.universe):
        raise ValueError("restriction set not contained in the universe")
    first = {}
    universe, labels = [], []
    for x, l in zip(p.universe, p.labels):
        if x in v:
            universe.append(x)
            labels.append(first.setdefault(l, x))
    return Partition(universe, labels)


def extend(p: Partition, v: Iterable[int]) -> Partition:
    """``P↑V``: add every element of V outside the universe as a singleton."""
    v = set(v)
    if not set(p.universe) <= v:
        raise ValueError("extension set does not contain the universe")
    label = p.label_map()
    universe = sorted(v)
    return Partition(universe, (label.get(x, x) for x in universe))


def singleton_except(universe: Iterable[int], v: Iterable[int]) -> Partition:
    """``U[V] = {V} ∪ {{u} | u ∈ U∖V}``."""
    universe = sorted(universe)
    v = set(v)
    if not v <= set(universe):
        raise ValueError("V not contained in the universe")
    m = min(v) if v else None
    return Partition(universe, (m if x in v else x for x in universe))


# ---------------------------------------------------------------------------
# marked partitions, one entry at a time
#
# An entry is (partition, marked) with marked a frozenset of block labels.


def _marks_after_coarsening(old: Partition, marked, new: Partition) -> frozenset:
    """Labels of the blocks of ``new`` containing some marked block of ``old``."""
    if not marked:
        return frozenset()
    new_label = new.label_map()
    return frozenset(new_label[l] for l in marked)


def glue_entry(u: int, v: int, p: Partition, marked: frozenset):
    q = coarsen_join(p, singleton_except(p.universe, (u, v)))
    return q, _marks_after_coarsening(p, marked, q)


def insert_entry(v: Iterable[int], depots, p: Partition, marked: frozenset):
    v = set(v)
    if v & set(p.universe):
        raise ValueError("inserted vertices already in the universe")
    q = extend(p, set(p.universe) | v)
    return q, marked | frozenset(x for x in v if x in depots)


def project_entry(v: Iterable[int], p: Partition, marked: frozenset):
    """Return the projected entry, or None if some x ∈ V has no partner outside V."""
    v = set(v)
    if not v:
        return p, marked
    keep_label = {}
    for x, l in zip(p.universe, p.labels):
        if x not in v:
            keep_label.setdefault(l, x)
    for x, l in zip(p.universe, p.labels):
        if x in v and l not in keep_label:
            return None
    q = restrict(p, set(p.universe) - v)
    return q, frozenset(keep_label[l] for l in marked)


def detach_entry(v: Iterable[int], p: Partition, marked: frozenset):
    """Return the detached entry, or None unless every block meeting V is a marked block inside V."""
    v = set(v)
    if not v:
        return p, marked
    touched = {l for x, l in zip(p.universe, p.labels) if x in v}
    for x, l in zip(p.universe, p.labels):
        if l in touched and x not in v:
            return None
    if not touched <= marked:
        return None
    q = restrict(p, set(p.universe) - v)
    return q, marked - touched


def join_entry(p: Partition, pm: frozenset, q: Partition, qm: frozenset):
    r = coarsen_join(p, q)
    lab = r.label_map()
    return r, frozenset(lab[l] for l in pm | qm)


# ---------------------------------------------------------------------------
# sets of marked partitions


class MarkedPartitionSet:
    """Marked partitions over one universe, one minimum weight per (P, B)."""

    __slots__ = ("universe", "entries")

    def __init__(self, universe: Iterable[int], entries: Optional[dict] = None):
        self.universe = tuple(sorted(universe))
        self.entries = {}
        for (p, marked), w in (entries or {}).items():
            self.add(p, marked, w)

    @classmethod
    def of(cls, universe, triples) -> "MarkedPartitionSet":
        s = cls(universe)
        for p, marked, w in triples:
            s.add(p, frozenset(marked), w)
        return s

    def add(self, p: Partition, marked: frozenset, w: int) -> bool:
        """Insert keeping the minimum; returns True if the set changed."""
        if p.universe != self.universe:
            raise ValueError("entry over a different universe")
        if w < 0 or w > WEIGHT_LIMIT:
            raise WeightOverflowError(f"weight {w} out of range")
        key = (p, frozenset(marked))
        old = self.entries.get(key)
        if old is None or w < old:
            self.entries[key] = w
            return True
        return False

    def __iter__(self) -> Iterator[tuple[Partition, frozenset, int]]:
        for (p, m), w in self.entries.items():
            yield p, m, w

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return (isinstance(other, MarkedPartitionSet) and self.universe == other.universe
                and self.entries == other.entries)

    def __repr__(self):
        items = ", ".join(f"({p.blocks()}, {sorted(m)}, {w})" for p, m, w in self)
        return f"MarkedPartitionSet({list(self.universe)}: {items})"

    def triples(self) -> set:
        return {(p, m, w) for p, m, w in self}


def rmc(a) -> MarkedPartitionSet:
    """Remove copies: keep the cheapest entry per (P, B).

    Accepts a MarkedPartitionSet or any iterable of triples over one universe.
    """
    if isinstance(a, MarkedPartitionSet):
        return MarkedPartitionSet(a.universe, a.entries)
    triples = list(a)
    if not triples:
        return MarkedPartitionSet(())
    return MarkedPartitionSet.of(triples[0][0].universe, triples)


def _same_universe(a: MarkedPartitionSet, c: MarkedPartitionSet):
    if a.universe != c.universe:
        raise ValueError("marked partition sets over different universes")


def union_min(a: MarkedPartitionSet, c: MarkedPartitionSet) -> MarkedPartitionSet:
    _same_universe(a, c)
    out = MarkedPartitionSet(a.universe, a.entries)
    for p, m, w in c:
        out.add(p, m, w)
    return out


def shift(w: int, a: MarkedPartitionSet) -> MarkedPartitionSet:
    out = MarkedPartitionSet(a.universe)
    for p, m, x in a:
        out.add(p, m, checked_add(x, w))
    return out


def glue(u: int, v: int, a: MarkedPartitionSet, edge_weight: Optional[int] = None) -> MarkedPartitionSet:
    if u not in a.universe or v not in a.universe:
        raise ValueError(f"glue endpoints {u}, {v} not in the universe")
    out = MarkedPartitionSet(a.universe)
    for p, m, w in a:
        q, qm = glue_entry(u, v, p, m)
        out.add(q, qm, w)
    return out if edge_weight is None else shift(edge_weight, out)


def insert(v: Iterable[int], depots: Iterable[int], a: MarkedPartitionSet) -> MarkedPartitionSet:
    v = set(v)
    depots = set(depots)
    if v & set(a.universe):
        raise ValueError("inserted vertices already in the universe")
    out = MarkedPartitionSet(set(a.universe) | v)
    for p, m, w in a:
        q, qm = insert_entry(v, depots, p, m)
        out.add(q, qm, w)
    return out


def project(v: Iterable[int], a: MarkedPartitionSet) -> MarkedPartitionSet:
    v = set(v)
    if not v <= set(a.universe):
        raise ValueError("projected vertices not in the universe")
    out = MarkedPartitionSet(set(a.universe) - v)
    for p, m, w in a:
        r = project_entry(v, p, m)
        if r is not None:
            out.add(r[0], r[1], w)
    return out


def detach(v: Iterable[int], a: MarkedPartitionSet) -> MarkedPartitionSet:
    v = set(v)
    if not v <= set(a.universe):
        raise ValueError("detached vertices not in the universe")
    out = MarkedPartitionSet(set(a.universe) - v)
    for p, m, w in a:
        r = detach_entry(v, p, m)
        if r is not None:
            out.add(r[0], r[1], w)
    return out


def join_sets(a: MarkedPartitionSet, c: MarkedPartitionSet) -> MarkedPartitionSet:
    _same_universe(a, c)
    out = MarkedPartitionSet(a.universe)
    for p, pm, pw in a:
        for q, qm, qw in c:
            r, rm = join_entry(p, pm, q, qm)
            out.add(r, rm, checked_add(pw, qw))
    return out
