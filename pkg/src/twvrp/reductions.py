"""Instance factories: hardness constructions and a seeded random family.

Each construction also offers the certificate direction, turning a solution
of the source problem into a routing that can be checked with
``verify_routing``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .binpacking import BinPackingInstance
from .errors import InstanceError, ScaleGuardError, scale_guard_enabled
from .instance import (CAPACITATED, GAS_VARIANTS, LOAD_VARIANTS, VARIANTS, Edge, Graph, Routing,
                       VrpInstance, Walk)

DEFAULT_UNARY_CAP = 64
NTDM_TAGS = (1, 4, 16)  # low-bit tags for clients from X, Y, Z


def _capacity_fields(variant: str, ell: int, g: int, demands: dict) -> dict:
    kw = {}
    if variant in LOAD_VARIANTS:
        kw.update(ell=ell, demands=demands)
    if variant in GAS_VARIANTS:
        kw["g"] = g
    return kw


# ---------------------------------------------------------------------------
# bin packing -> routing on a tree


@dataclass
class BinPackingReduction:
    instance: VrpInstance
    depot: int
    branches: list[list[int]]  # per item: its client path, depot side first

    def routing_for(self, bins: Sequence[Sequence[int]]) -> Routing:
        """One walk per bin, going out and back along each branch of the bin."""
        graph = self.instance.graph
        walks, assignment = [], {}
        for items in bins:
            verts = [self.depot]
            for u in items:
                path = self.branches[u]
                verts += path + path[-2::-1] + [self.depot]
            for u in items:
                for x in self.branches[u]:
                    assignment[x] = len(walks)
            walks.append(Walk.from_vertices(graph, verts))
        return Routing(tuple(walks), assignment)

    def bins_for(self, routing: Routing) -> list[list[int]]:
        """Item sets by the walk that serves the first client of each branch."""
        bins = [[] for _ in routing.walks]
        for u, path in enumerate(self.branches):
            bins[routing.assignment[path[0]]].append(u)
        return [b for b in bins if b]


def from_binpacking(bp: BinPackingInstance, variant: str = "LoadCVRP",
                    cap: int = DEFAULT_UNARY_CAP) -> BinPackingReduction:
    """Star of paths: depot 0 and a path of s(u) clients per item u."""
    if variant not in CAPACITATED:
        raise InstanceError(f"bin packing reduces to a capacitated variant, not {variant}", "variant")
    total = sum(bp.sizes)
    if scale_guard_enabled() and total > cap:
        raise ScaleGuardError(f"unary size {total} exceeds the cap {cap}")
    edges, branches = [], []
    nxt = 1
    for s in bp.sizes:
        path = list(range(nxt, nxt + s))
        nxt += s
        edges.append(Edge(0, path[0], 1))
        edges += [Edge(a, b, 1) for a, b in zip(path, path[1:])]
        branches.append(path)
    graph = Graph(nxt, tuple(edges))
    clients = range(1, nxt)
    kw = _capacity_fields(variant, bp.capacity, 2 * bp.capacity, {c: 1 for c in clients})
    inst = VrpInstance(graph, {0}, clients, bp.bins, variant, r=2 * len(edges), **kw)
    return BinPackingReduction(inst, 0, branches)


# ---------------------------------------------------------------------------
# triangle packing


def from_trianglepacking(graph: Graph, variant: str = "LoadCVRP") -> VrpInstance:
    """Unit weights, every vertex a depot and a client, k = q, r = 3q."""
    if graph.n % 3:
        raise InstanceError(f"vertex count {graph.n} is not divisible by 3", "n")
    if variant not in CAPACITATED:
        raise InstanceError(f"triangle packing reduces to a capacitated variant, not {variant}", "variant")
    q = graph.n // 3
    unit = Graph(graph.n, tuple(Edge(e.u, e.v, 1, e.mult) for e in graph.edges), graph.allow_loops)
    everyone = range(graph.n)
    kw = _capacity_fields(variant, 3, 3, {c: 1 for c in everyone})
    return VrpInstance(unit, everyone, everyone, q, variant, r=3 * q, **kw)


def triangle_routing(inst: VrpInstance, triangles: Sequence[Sequence[int]]) -> Routing:
    walks, assignment = [], {}
    for tri in triangles:
        a, b, c = sorted(tri)
        walks.append(Walk.from_vertices(inst.graph, [a, b, c, a]))
        for x in tri:
            assignment[x] = len(walks) - 1
    return Routing(tuple(walks), assignment)


# ---------------------------------------------------------------------------
# numerical 3-dimensional matching


@dataclass
class NtdmReduction:
    instance: VrpInstance
    leaf: dict = field(default_factory=dict)  # (set index, number) -> client vertex

    def routing_for(self, triples: Sequence[Sequence[int]]) -> Routing:
        """One walk per triple (x, y, z), visiting the three leaves in turn."""
        graph = self.instance.graph
        walks, assignment = [], {}
        for triple in triples:
            verts = [0]
            for which, a in enumerate(triple):
                leaf = self.leaf[(which, a)]
                verts += [leaf, 0]
                assignment[leaf] = len(walks)
            walks.append(Walk.from_vertices(graph, verts))
        return Routing(tuple(walks), assignment)


def from_ntdm(x: Sequence[int], y: Sequence[int], z: Sequence[int], b: int,
              mode: str = "demand") -> NtdmReduction:
    """Star around depot 0 with one leaf per number.

    ``mode="demand"`` puts the numbers on the edges (64a + tag) with unit
    demands, ell = 3 and g = 2(64b + 21).  ``mode="gas"`` swaps the roles:
    unit edges, demands 64a + tag, ell = 64b + 21 and g = 6.  Either way
    k = m and r = k * g.
    """
    m = len(x)
    if len(y) != m or len(z) != m:
        raise InstanceError("X, Y and Z must have the same size")
    for name, seq in (("x", x), ("y", y), ("z", z)):
        if len(set(seq)) != len(seq) or any(a < 1 for a in seq):
            raise InstanceError("numbers must be distinct positive integers", name)
    if set(x) & set(y) or set(x) & set(z) or set(y) & set(z):
        raise InstanceError("X, Y and Z must be pairwise disjoint")
    total = sum(x) + sum(y) + sum(z)
    if total != m * b:
        raise InstanceError(f"sum of all numbers is {total}, expected m*b = {m * b}", "b")
    if mode not in ("demand", "gas"):
        raise InstanceError(f"unknown mode {mode!r}", "mode")

    edges, leaf, demands = [], {}, {}
    for which, seq in enumerate((x, y, z)):
        for a in seq:
            v = len(edges) + 1
            leaf[(which, a)] = v
            code = 64 * a + NTDM_TAGS[which]
            if mode == "demand":
                edges.append(Edge(0, v, code))
                demands[v] = 1
            else:
                edges.append(Edge(0, v, 1))
                demands[v] = code
    graph = Graph(len(edges) + 1, tuple(edges))
    if mode == "demand":
        ell, g = 3, 2 * (64 * b + sum(NTDM_TAGS))
    else:
        ell, g = 64 * b + sum(NTDM_TAGS), 6
    inst = VrpInstance(graph, {0}, demands.keys(), m, "LoadGasCVRP",
                       ell=ell, demands=demands, g=g, r=m * g)
    return NtdmReduction(inst, leaf)


# ---------------------------------------------------------------------------
# random family


def random_graph(rng: random.Random, n: int, max_edges: int, weights=(1, 5),
                 tw2: bool = False, connected: bool = False) -> Graph:
    """Random simple graph; with ``tw2`` a subgraph of a random 2-tree."""
    if n <= 1:
        return Graph(n, ())
    if tw2:
        pool = [(0, 1)]
        for v in range(2, n):
            a, b = rng.choice(pool)
            pool += [(a, v), (b, v)]
    else:
        pool = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = set()
    if connected:
        # a spanning tree inside the pool first
        seen = {0}
        while len(seen) < n:
            a, b = rng.choice([p for p in pool if (p[0] in seen) != (p[1] in seen)])
            chosen.add((a, b))
            seen |= {a, b}
    rest = [p for p in pool if p not in chosen]
    extra = rng.randint(0, max(0, min(max_edges - len(chosen), len(rest))))
    chosen |= set(rng.sample(rest, extra))
    lo, hi = weights
    return Graph(n, tuple(Edge(a, b, rng.randint(lo, hi)) for a, b in sorted(chosen)))


def random_instance(seed: int, variant: str = "VRP", n_max: int = 6, max_edges: int = 10,
                    weights=(1, 5), k_max: int = 3, ell_max: int = 3, g_max: int = 8,
                    tw2: bool = False, connected: bool = False,
                    rng: Optional[random.Random] = None, n_min: int = 1,
                    k_min: int = 0, depot_max: Optional[int] = None) -> VrpInstance:
    """Seeded random instance of the given variant."""
    if variant not in VARIANTS:
        raise InstanceError(f"unknown variant {variant!r}", "variant")
    rng = rng or random.Random(seed)
    n = rng.randint(n_min, n_max)
    graph = random_graph(rng, n, max_edges, weights, tw2, connected)
    depots = rng.sample(range(n), rng.randint(1, min(n, depot_max or n)))
    clients = rng.sample(range(n), rng.randint(0, n))
    k = rng.randint(k_min, k_max)
    kw = {}
    if variant == "EVRP":
        kw["kappa"] = tuple(rng.randint(0, 2) for _ in graph.edges)
    if variant in LOAD_VARIANTS:
        ell = rng.randint(1, ell_max)
        kw.update(ell=ell, demands={c: rng.randint(1, min(2, ell)) for c in clients})
    if variant in GAS_VARIANTS:
        kw["g"] = rng.randint(0, g_max)
    return VrpInstance(graph, depots, clients, k, variant, **kw)
