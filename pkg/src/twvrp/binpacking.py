"""Exact heterogeneous multidimensional fingerprint bin packing.

Items carry a size vector and a fingerprint.  Bins come in kinds; a kind has
a capacity vector, a number of available bins and a validity predicate over
the multiset of fingerprints packed into one bin.

Items with equal (size, fingerprint) are interchangeable, so the solver works
on the census of such keys.  A configuration says how many items of every key
go into one bin; the search picks how many bins of each kind use each
configuration, memoizing on the residual census.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Optional, Sequence

from .errors import InstanceError


def accept_all(fingerprints: Counter) -> bool:
    return True


@dataclass(frozen=True)
class BinKind:
    capacity: tuple[int, ...]
    count: int
    valid: Callable[[Counter], bool] = field(default=accept_all, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "capacity", tuple(self.capacity))
        if self.count < 0 or any(c < 0 for c in self.capacity):
            raise InstanceError("bin kind with negative capacity or count")


@dataclass(frozen=True)
class HetInstance:
    sizes: tuple[tuple[int, ...], ...]
    fingerprints: tuple[Hashable, ...]
    kinds: tuple[BinKind, ...]

    def __post_init__(self):
        sizes = tuple(tuple(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "fingerprints", tuple(self.fingerprints))
        object.__setattr__(self, "kinds", tuple(self.kinds))
        if len(sizes) != len(self.fingerprints):
            raise InstanceError("sizes and fingerprints differ in length")
        d = self.dimension
        for i, s in enumerate(sizes):
            if len(s) != d or any(x < 0 for x in s) or not any(s):
                raise InstanceError("item size must be a nonzero nonnegative vector", f"sizes[{i}]")
        for j, kind in enumerate(self.kinds):
            if len(kind.capacity) != d:
                raise InstanceError("capacity dimension mismatch", f"kinds[{j}]")

    @property
    def dimension(self) -> int:
        if self.sizes:
            return len(self.sizes[0])
        return len(self.kinds[0].capacity) if self.kinds else 0

    def keys(self) -> list[tuple]:
        """Distinct (size, fingerprint) keys in a fixed order."""
        return sorted(set(zip(self.sizes, self.fingerprints)), key=repr)

    def census(self) -> Counter:
        return Counter(zip(self.sizes, self.fingerprints))

    def kind_order(self) -> list[int]:
        """Kind indices by descending 1-norm of capacity (stable)."""
        return sorted(range(len(self.kinds)), key=lambda i: -sum(self.kinds[i].capacity))


@dataclass(frozen=True)
class BinPackingInstance:
    sizes: tuple[int, ...]
    capacity: int
    bins: int

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(self.sizes))
        if self.capacity < 0 or self.bins < 0:
            raise InstanceError("capacity and bin count must be nonnegative")
        for i, s in enumerate(self.sizes):
            if s < 1:
                raise InstanceError("item sizes must be positive", f"sizes[{i}]")
            if s > self.capacity:
                raise InstanceError(f"item of size {s} exceeds capacity {self.capacity}", f"sizes[{i}]")


def _fits(load, cap) -> bool:
    return all(a <= b for a, b in zip(load, cap))


def _configurations(keys, bound, kind: BinKind) -> list[tuple[int, ...]]:
    """Count vectors over ``keys`` within capacity (and ``bound`` per key) accepted by the kind."""
    d = len(kind.capacity)
    out = []
    counts = [0] * len(keys)

    def rec(j, load):
        if j == len(keys):
            fps = Counter()
            for (size, fp), c in zip(keys, counts):
                if c:
                    fps[fp] += c
            if kind.valid(fps):
                out.append(tuple(counts))
            return
        size = keys[j][0]
        c = 0
        cur = load
        while True:
            counts[j] = c
            rec(j + 1, cur)
            if bound is not None and c >= bound[j]:
                break
            cur = tuple(cur[x] + size[x] for x in range(d))
            if not _fits(cur, kind.capacity):
                break
            c += 1
        counts[j] = 0

    rec(0, (0,) * d)
    return out


def configuration_bound(inst: HetInstance) -> int:
    """``(‖B₁‖₁^d + 1)^{|K|}``, the bound on configurations per kind."""
    if not inst.kinds:
        return 1
    b1 = max(sum(k.capacity) for k in inst.kinds)
    return (b1 ** inst.dimension + 1) ** len(inst.keys())


def enumerate_configurations(inst: HetInstance, kind: int) -> list[dict]:
    """All feasible configurations of one bin kind, as key -> count maps."""
    keys = inst.keys()
    configs = _configurations(keys, None, inst.kinds[kind])
    assert len(configs) <= configuration_bound(inst)
    return [{k: c for k, c in zip(keys, cfg) if c} for cfg in configs]


@dataclass
class HetSolution:
    bins: list[tuple[int, tuple[int, ...]]]  # (kind index, item indices)


def solve_het(inst: HetInstance, exact_counts: bool = False) -> Optional[HetSolution]:
    """Pack every item, or return None.

    With ``exact_counts`` every available bin of every kind must be used
    (a bin may stay empty only if its predicate accepts the empty multiset).
    """
    keys = inst.keys()
    census = inst.census()
    q = tuple(census[k] for k in keys)
    d = inst.dimension
    order = inst.kind_order()

    total = [sum(s[x] for s in inst.sizes) for x in range(d)]
    room = [sum(k.capacity[x] * k.count for k in inst.kinds) for x in range(d)]
    if not _fits(total, room):
        return None

    configs = []
    for i in order:
        kind = inst.kinds[i]
        cs = [c for c in _configurations(keys, q, kind)]
        if not exact_counts:
            cs = [c for c in cs if any(c)]
        # larger configurations first: finds packings sooner
        cs.sort(key=lambda c: -sum(c))
        configs.append(cs)

    # remaining capacity of all kinds from position j on, for pruning
    suffix_room = [[0] * d for _ in range(len(order) + 1)]
    for j in range(len(order) - 1, -1, -1):
        kind = inst.kinds[order[j]]
        suffix_room[j] = [suffix_room[j + 1][x] + kind.capacity[x] * kind.count for x in range(d)]
    key_size = [k[0] for k in keys]

    @lru_cache(maxsize=None)
    def search(j, ci, left, residual):
        """Place the residual census using kinds order[j:], current kind from config ci on."""
        if j == len(order):
            return () if not any(residual) else None
        if ci == 0 and left == inst.kinds[order[j]].count:
            need = [sum(r * key_size[t][x] for t, r in enumerate(residual)) for x in range(d)]
            if not _fits(need, suffix_room[j]):
                return None
        cs = configs[j]
        if left == 0 or ci == len(cs):
            if exact_counts and left:
                return None
            if j + 1 == len(order):
                return () if not any(residual) else None
            return search(j + 1, 0, inst.kinds[order[j + 1]].count, residual)
        cfg = cs[ci]
        # take this configuration t times, t from as many as possible down to 0
        most = left
        for t, c in enumerate(cfg):
            if c:
                most = min(most, residual[t] // c)
        for times in range(most, -1, -1):
            rest = tuple(r - times * c for r, c in zip(residual, cfg))
            sub = search(j, ci + 1, left - times, rest)
            if sub is not None:
                return ((order[j], cfg),) * times + sub
        return None

    if not order:
        return HetSolution([]) if not any(q) else None
    plan = search(0, 0, inst.kinds[order[0]].count, q)
    search.cache_clear()
    if plan is None:
        return None
    pools = {k: [] for k in keys}
    for idx, key in enumerate(zip(inst.sizes, inst.fingerprints)):
        pools[key].append(idx)
    bins = []
    for kind, cfg in plan:
        items = []
        for key, c in zip(keys, cfg):
            for _ in range(c):
                items.append(pools[key].pop())
        bins.append((kind, tuple(sorted(items))))
    return HetSolution(bins)


def solve_plain(bp: BinPackingInstance) -> Optional[list[list[int]]]:
    """Bins as lists of item indices (nonempty bins only), or None."""
    het = HetInstance(tuple((s,) for s in bp.sizes), (0,) * len(bp.sizes),
                      (BinKind((bp.capacity,), bp.bins),))
    sol = solve_het(het)
    if sol is None:
        return None
    return [list(items) for _, items in sol.bins]


def eulerian_trail_predicate(pairs: Sequence[tuple], target: tuple[int, int], require_depot: bool) -> bool:
    """Whether walks with the given endpoint fingerprints chain into one u-v walk.

    ``pairs`` holds ``(a, b, depot_bit)`` fingerprints; each is an edge of an
    undirected multigraph (a loop when a == b).  The answer is yes iff that
    multigraph has an Eulerian trail from u to v and the depot bits agree
    with ``require_depot`` (some bit set iff required).
    """
    u, v = target
    has_depot = any(p[2] for p in pairs)
    if has_depot != bool(require_depot):
        return False
    if not pairs:
        return u == v
    degree = Counter()
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            x = parent[x]
        return x

    for a, b, _ in pairs:
        degree[a] += 1
        degree[b] += 1
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    odd = {x for x, deg in degree.items() if deg % 2}
    if u == v:
        if odd:
            return False
    elif odd != {u, v}:
        return False
    if u not in degree or v not in degree:
        return False
    root = find(u)
    return all(find(x) == root for x in degree)
