"""Solvers whose running time is exponential only in the number of clients.

Every walk of a routing can be shortcut to a closed tour through its
assigned clients along shortest paths.  So it suffices to split the clients
into at most k groups and price each group by its cheapest depot tour
(Held-Karp over subsets), then combine groups with a subset-cover DP.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import networkx as nx

from .errors import ScaleGuardError, UnsupportedVariantError, scale_guard_enabled
from .instance import (LOAD_VARIANTS, Graph, Routing, Solution, VrpInstance, Walk,
                       contract_zero_edges)

DEFAULT_CLIENT_CAP = 9
INF = float("inf")


@dataclass
class DistanceTable:
    dist: dict  # source -> {target: distance}
    paths: dict  # source -> {target: vertex list}
    graph: Graph

    def d(self, a: int, b: int) -> float:
        return self.dist.get(a, {}).get(b, INF)

    def walk(self, a: int, b: int) -> tuple[list[int], list[int]]:
        """Vertices and edge indices of a shortest a-b path."""
        verts = self.paths[a][b]
        edges = [self.graph.cheapest_edge(x, y) for x, y in zip(verts, verts[1:])]
        return list(verts), edges


def apsp(graph: Graph, sources=None) -> DistanceTable:
    """Shortest-path distances and paths from every source (default: all vertices)."""
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    for e in graph.edges:
        if not g.has_edge(e.u, e.v) or g[e.u][e.v]["weight"] > e.weight:
            g.add_edge(e.u, e.v, weight=e.weight)
    dist, paths = {}, {}
    for s in sorted(range(graph.n) if sources is None else set(sources)):
        dist[s], paths[s] = nx.single_source_dijkstra(g, s, weight="weight")
    return DistanceTable(dist, paths, graph)


def _block_tours(inst: VrpInstance, clients: list[int], table: DistanceTable):
    """Cheapest closed depot tour for every client subset (bitmask).

    Returns (cost, choice) lists where choice[S] = (depot, client order).
    """
    c = len(clients)
    full = 1 << c
    cost = [INF] * full
    choice = [None] * full
    cost[0] = 0
    choice[0] = (None, ())
    for dep in sorted(inst.depots):
        # f[S][i]: cheapest path from dep through exactly S ending at clients[i]
        f = [[INF] * c for _ in range(full)]
        parent = [[-1] * c for _ in range(full)]
        for i in range(c):
            f[1 << i][i] = table.d(dep, clients[i])
        for s in range(1, full):
            row = f[s]
            for i in range(c):
                base = row[i]
                if base == INF:
                    continue
                for j in range(c):
                    if s >> j & 1:
                        continue
                    nxt = base + table.d(clients[i], clients[j])
                    t = s | 1 << j
                    if nxt < f[t][j]:
                        f[t][j] = nxt
                        parent[t][j] = i
        for s in range(1, full):
            for i in range(c):
                if f[s][i] == INF:
                    continue
                total = f[s][i] + table.d(clients[i], dep)
                if total < cost[s]:
                    order = []
                    cur, last = s, i
                    while last != -1:
                        order.append(clients[last])
                        cur, last = cur & ~(1 << last), parent[cur][last]
                    cost[s] = total
                    choice[s] = (dep, tuple(reversed(order)))
    return cost, choice


def solve_by_clients(inst: VrpInstance, cap: int = DEFAULT_CLIENT_CAP) -> Optional[Solution]:
    """Optimal routing by splitting clients into at most k tours, or None."""
    if inst.variant == "EVRP":
        raise UnsupportedVariantError("the client-count solver does not model edge capacities")
    clients = sorted(inst.clients)
    if scale_guard_enabled() and len(clients) > cap:
        raise ScaleGuardError(f"{len(clients)} clients exceed the client-solver cap {cap}")
    if not clients:
        return Solution(0, Routing())
    table = apsp(inst.graph, inst.depots | inst.clients)
    cost, choice = _block_tours(inst, clients, table)
    c = len(clients)
    full = 1 << c

    demand = [inst.demand(x) for x in clients]
    for s in range(1, full):
        if cost[s] == INF:
            continue
        if inst.has_load and sum(demand[i] for i in range(c) if s >> i & 1) > inst.ell:
            cost[s] = INF
        elif inst.has_gas and cost[s] > inst.g:
            cost[s] = INF

    # best[j][S]: cheapest cover of S by at most j blocks; the block holding
    # the lowest client of S is chosen first so each split is seen once
    blocks = min(inst.k, c)
    best = [[INF] * full for _ in range(blocks + 1)]
    pick = [[0] * full for _ in range(blocks + 1)]
    for j in range(blocks + 1):
        best[j][0] = 0
    for j in range(1, blocks + 1):
        prev, row = best[j - 1], best[j]
        for s in range(1, full):
            low = s & -s
            rest = s ^ low
            sub = rest
            while True:
                t = sub | low
                if cost[t] != INF and prev[s ^ t] != INF:
                    val = cost[t] + prev[s ^ t]
                    if val < row[s]:
                        row[s] = val
                        pick[j][s] = t
                if sub == 0:
                    break
                sub = (sub - 1) & rest
    if blocks == 0 or best[blocks][full - 1] == INF:
        return None

    parts = []
    s, j = full - 1, blocks
    while s:
        t = pick[j][s]
        parts.append(t)
        s ^= t
        j -= 1
    walks = []
    assignment = {}
    for t in sorted(parts, key=lambda m: choice[m][1]):
        dep, order = choice[t]
        stops = [dep, *order, dep]
        verts, edges = [dep], []
        for a, b in zip(stops, stops[1:]):
            pv, pe = table.walk(a, b)
            verts.extend(pv[1:])
            edges.extend(pe)
        for x in order:
            assignment[x] = len(walks)
        walks.append(Walk(tuple(verts), tuple(edges)))
    return Solution(int(best[blocks][full - 1]), Routing(tuple(walks), assignment))


def client_lower_bound_rejects(inst: VrpInstance, r: int) -> bool:
    """True if no routing of weight ≤ r can exist, by counting clients.

    With positive weights a closed walk of weight w visits at most w
    vertices, and a zero-length walk visits one depot.
    """
    free = min(inst.k, len(inst.clients & inst.depots))
    return r < len(inst.clients) - free


def decide_weight_bound(inst: VrpInstance, r: int, cap: int = DEFAULT_CLIENT_CAP) -> bool:
    """Is there a routing of weight at most r?"""
    if inst.variant == "EVRP":
        raise UnsupportedVariantError("decide_weight_bound does not handle EVRP")
    if inst.variant in LOAD_VARIANTS:
        if any(e.weight == 0 for e in inst.graph.edges):
            raise UnsupportedVariantError(
                f"{inst.variant} with zero-weight edges: contraction cannot merge demands")
        reduced = inst
    else:
        reduced = contract_zero_edges(inst)
    if client_lower_bound_rejects(reduced, r):
        return False
    sol = solve_by_clients(reduced, cap)
    return sol is not None and sol.weight <= r


def capacity_rejects(inst: VrpInstance) -> bool:
    """True if k vehicles cannot cover all clients under the capacities."""
    if inst.has_load and inst.k * inst.ell < len(inst.clients):
        return True
    if inst.has_gas and inst.variant == "GasCVRP":
        reduced = contract_zero_edges(inst)
        if inst.k * max(inst.g, 1) < len(reduced.clients):
            return True
    return False


def decide_k_capacity(inst: VrpInstance, cap: int = DEFAULT_CLIENT_CAP) -> Optional[Solution]:
    """Volume check by k and the capacities, then the client-count solver."""
    if inst.variant not in ("LoadCVRP", "GasCVRP", "LoadGasCVRP"):
        raise UnsupportedVariantError("decide_k_capacity needs a capacitated variant")
    if capacity_rejects(inst):
        return None
    return solve_by_clients(inst, cap)
