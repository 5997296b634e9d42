"""Conversion between Eulerian edge multisets and walk routings."""

from __future__ import annotations

from collections import Counter
from typing import Mapping

import networkx as nx

from .errors import RoutingError
from .instance import Routing, VrpInstance, Walk


def walks_to_subgraph(routing: Routing) -> Counter:
    """Multiset union of the edges used by all walks (edge index -> count)."""
    h = Counter()
    for p in routing.walks:
        h.update(p.edges)
    return h


def _components(inst: VrpInstance, h: Mapping[int, int]) -> list[list[int]]:
    parent = list(range(inst.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    touched = set()
    for i, m in h.items():
        if m <= 0:
            continue
        e = inst.graph.edges[i]
        touched.update((e.u, e.v))
        a, b = find(e.u), find(e.v)
        if a != b:
            parent[max(a, b)] = min(a, b)
    groups = {}
    for v in sorted(touched):
        groups.setdefault(find(v), []).append(v)
    return list(groups.values())


def extract_walks(h: Mapping[int, int], inst: VrpInstance) -> Routing:
    """One closed walk per component of ``h``, starting at its smallest depot.

    Depot clients outside every component get a zero-length walk.  Walks are
    ordered by their smallest vertex; each client goes to the first walk
    containing it.
    """
    graph = inst.graph
    degree = Counter()
    for i, m in h.items():
        if m < 0:
            raise RoutingError(f"negative multiplicity for edge {i}")
        e = graph.edges[i]
        degree[e.u] += m
        degree[e.v] += m
    for v in sorted(degree):
        if degree[v] % 2:
            raise RoutingError(f"not Eulerian at {v}")

    pieces = []
    covered = set()
    for comp in _components(inst, h):
        depots = [v for v in comp if v in inst.depots]
        if not depots:
            raise RoutingError(f"component containing {comp[0]} has no depot")
        covered.update(comp)
        mg = nx.MultiGraph()
        for i in sorted(h):
            e = graph.edges[i]
            if e.u in comp:
                for c in range(h[i]):
                    mg.add_edge(e.u, e.v, key=(i, c))
        start = depots[0]
        vertices, edges = [start], []
        for a, b, (i, _) in nx.eulerian_circuit(mg, source=start, keys=True):
            vertices.append(b)
            edges.append(i)
        pieces.append((comp[0], Walk(tuple(vertices), tuple(edges))))
    for c in sorted(inst.clients - covered):
        if c not in inst.depots:
            raise RoutingError(f"client {c} is not covered by any depot component")
        pieces.append((c, Walk((c,), ())))
    pieces.sort(key=lambda x: x[0])
    walks = tuple(p for _, p in pieces)
    if len(walks) > inst.k:
        raise RoutingError(f"{len(walks)} walks needed but only k={inst.k} vehicles")
    assignment = {}
    for idx, p in enumerate(walks):
        for v in p.vertices:
            if v in inst.clients and v not in assignment:
                assignment[v] = idx
    return Routing(walks, assignment)
