"""Brute-force reference solvers.

They are deliberately naive and share no code with the real solvers beyond
the instance model, so that agreement between the two means something.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Optional, Sequence

from .errors import ScaleGuardError, scale_guard_enabled
from .instance import Routing, Solution, VrpInstance, Walk
from .walks import extract_walks

INF = float("inf")


def oracle_vrp(inst: VrpInstance) -> Optional[int]:
    """Minimum weight of an Eulerian sub-multigraph routing, or None."""
    best = _oracle_vrp(inst)
    return None if best is None else best[0]


def oracle_vrp_solution(inst: VrpInstance) -> Optional[Solution]:
    """Like ``oracle_vrp`` but with a routing built from the optimal edge multiset."""
    best = _oracle_vrp(inst)
    if best is None:
        return None
    weight, h = best
    routing = extract_walks(h, inst) if (h or inst.clients) else Routing()
    return Solution(weight, routing)


def _oracle_vrp(inst: VrpInstance):
    """Optimum and its edge multiset (edge index -> copies), or None.

    Every edge may be taken 0, 1 or 2 times (fewer if its capacity says so).
    For a fixed support S the connectivity conditions are fixed, and parity
    only depends on which edges of S are taken once, so the enumeration runs
    over pairs (S, O ⊆ S) -- every 0/1/2 assignment exactly once.
    """
    if inst.variant not in ("VRP", "EVRP"):
        raise ValueError("oracle_vrp handles VRP and EVRP only")
    graph = inst.graph
    caps = []
    for i, e in enumerate(graph.edges):
        caps.append(2 if inst.kappa is None else min(inst.kappa[i] * e.mult, 2))
    space = 1
    for c in caps:
        space *= c + 1
    if scale_guard_enabled() and (inst.n > 8 or space > 3 ** 11):
        raise ScaleGuardError(f"oracle_vrp refuses n={inst.n} with {space} edge-copy choices")

    usable = [i for i, c in enumerate(caps) if c > 0]
    m = len(usable)
    ends = [(graph.edges[i].u, graph.edges[i].v) for i in usable]
    weights = [graph.edges[i].weight for i in usable]
    single_only = sum(1 << j for j, i in enumerate(usable) if caps[i] == 1)

    # parity vector and weight of every subset of usable edges
    parity = [0] * (1 << m)
    wsum = [0] * (1 << m)
    for mask in range(1, 1 << m):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        a, b = ends[low]
        parity[mask] = parity[rest] ^ (1 << a) ^ (1 << b)
        wsum[mask] = wsum[rest] + weights[low]

    best = None
    for support in range(1 << m):
        vehicles = _support_vehicles(inst, ends, support)
        if vehicles is None or vehicles > inst.k:
            continue
        forced = support & single_only
        # weight = 2*w(S) - w(O); maximize w(O) over even O with forced ⊆ O ⊆ S
        free = support & ~forced
        best_o = None
        sub = free
        while True:
            o = sub | forced
            if parity[o] == 0 and (best_o is None or wsum[o] > best_o):
                best_o = wsum[o]
                odd = o
            if sub == 0:
                break
            sub = (sub - 1) & free
        if best_o is None:
            continue
        w = 2 * wsum[support] - best_o
        if best is None or w < best[0]:
            best = (w, support, odd)
    if best is None:
        return None
    w, support, odd = best
    h = Counter()
    for j, i in enumerate(usable):
        if support >> j & 1:
            h[i] = 1 if odd >> j & 1 else 2
    return w, h


def _support_vehicles(inst: VrpInstance, ends, support) -> Optional[int]:
    """Walks needed for a support set, or None if some component is unserviceable."""
    parent = list(range(inst.n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    touched = set()
    j = 0
    s = support
    while s:
        if s & 1:
            a, b = ends[j]
            touched.add(a)
            touched.add(b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        s >>= 1
        j += 1
    comps = {}
    for v in touched:
        comps.setdefault(find(v), set()).add(v)
    for comp in comps.values():
        if not comp & inst.depots:
            return None
    count = len(comps)
    for c in inst.clients:
        if c not in touched:
            if c not in inst.depots:
                return None
            count += 1
    return count


def _floyd_warshall(inst: VrpInstance):
    """Distances and next-hop edges: hop[i][j] = (next vertex, edge index)."""
    n = inst.n
    d = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    hop = [[None] * n for _ in range(n)]
    for idx, e in enumerate(inst.graph.edges):
        if e.weight < d[e.u][e.v]:
            d[e.u][e.v] = d[e.v][e.u] = e.weight
            hop[e.u][e.v] = (e.v, idx)
            hop[e.v][e.u] = (e.u, idx)
    for m in range(n):
        dm = d[m]
        for i in range(n):
            dim = d[i][m]
            if dim == INF:
                continue
            di = d[i]
            for j in range(n):
                if dim + dm[j] < di[j]:
                    di[j] = dim + dm[j]
                    hop[i][j] = hop[i][m]
    return d, hop


def _set_partitions(items: Sequence[int]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def oracle_cvrp(inst: VrpInstance) -> Optional[int]:
    """Minimum routing weight by enumerating client groups, orders and depots."""
    best = _oracle_cvrp(inst)
    return None if best is None else best[0]


def oracle_cvrp_solution(inst: VrpInstance) -> Optional[Solution]:
    """Like ``oracle_cvrp`` but with the shortest-path walks of the best split."""
    best = _oracle_cvrp(inst)
    if best is None:
        return None
    weight, tours, hop = best
    walks, assignment = [], {}
    for dep, order in tours:
        verts, edges = [dep], []
        for target in list(order) + [dep]:
            while verts[-1] != target:
                nxt, idx = hop[verts[-1]][target]
                verts.append(nxt)
                edges.append(idx)
        for c in order:
            assignment[c] = len(walks)
        walks.append(Walk(tuple(verts), tuple(edges)))
    return Solution(weight, Routing(tuple(walks), assignment))


def _oracle_cvrp(inst: VrpInstance):
    """Optimum, its tours as (depot, client order) and the next-hop table.

    Each vehicle's walk is the shortest-path concatenation depot -> c1 -> ...
    -> cj -> depot.  Any walk visiting the clients in that order is at least
    as heavy, so testing the gas limit on it is exact.  Works for every
    variant; the capacity tests apply only where the variant has them.
    """
    clients = sorted(inst.clients)
    if scale_guard_enabled() and (len(clients) > 6 or inst.k > 3):
        raise ScaleGuardError(f"oracle_cvrp refuses |C|={len(clients)}, k={inst.k}")
    if inst.variant == "EVRP":
        raise ValueError("oracle_cvrp does not model edge capacities")
    if not clients:
        return 0, [], None
    d, hop = _floyd_warshall(inst)
    depots = sorted(inst.depots)
    ell = inst.ell if inst.has_load else None
    gas = inst.g if inst.has_gas else None

    cache = {}

    def group_cost(group):
        key = tuple(group)
        if key in cache:
            return cache[key][0]
        best, tour = INF, None
        if ell is None or sum(inst.demand(c) for c in group) <= ell:
            for order in itertools.permutations(group):
                inner = sum(d[a][b] for a, b in zip(order, order[1:]))
                if inner == INF:
                    continue
                for dep in depots:
                    w = d[dep][order[0]] + inner + d[order[-1]][dep]
                    if gas is not None and w > gas:
                        continue
                    if w < best:
                        best, tour = w, (dep, order)
        cache[key] = (best, tour)
        return best

    best, best_part = INF, None
    for part in _set_partitions(clients):
        if len(part) > inst.k:
            continue
        total = 0
        for group in part:
            total += group_cost(sorted(group))
            if total >= best:
                break
        if total < best:
            best, best_part = total, part
    if best == INF:
        return None
    tours = sorted(cache[tuple(sorted(group))][1] for group in best_part)
    return int(best), tours, hop
