"""Treewidth dynamic program for VRP and EVRP over marked partitions.

A cell ``dp[t][(X, L, c)]`` maps ``(P, B)`` to the least weight of a partial
solution in the graph below ``t`` that uses exactly the bag vertices ``X``,
has odd degree exactly on ``L``, has ``c`` components already closed off
(each holding a depot), and whose still-open components restricted to the
bag form ``P`` with the depot-holding ones marked by ``B``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Optional, Union

from . import partitions as pt
from .decomposition import (FORGET, INTRODUCE_EDGE, INTRODUCE_VERTEX, JOIN, LEAF,
                            NiceDecomposition, TreeDecomposition, heuristic_decompose, nicify)
from .errors import UnsupportedVariantError
from .instance import Edge, Graph, Routing, Solution, VrpInstance
from .walks import extract_walks


def expand_capacities(inst: VrpInstance) -> tuple[Graph, list[int]]:
    """Multigraph with ``min(capacity, 2)`` copies of each edge.

    Returns the graph (copies expressed as multiplicity) and, for each of its
    edges, the index of the original edge.  A VRP edge may be used any number
    of times, so it always gets two copies.
    """
    if inst.variant not in ("VRP", "EVRP"):
        raise UnsupportedVariantError(f"capacity expansion is for VRP/EVRP, not {inst.variant}")
    edges, origin = [], []
    for i, e in enumerate(inst.graph.edges):
        cap = 2 if inst.kappa is None else min(inst.kappa[i] * e.mult, 2)
        if cap:
            edges.append(Edge(e.u, e.v, e.weight, cap))
            origin.append(i)
    return Graph(inst.n, tuple(edges)), origin


@dataclass
class DpTable:
    nd: NiceDecomposition
    cells: list[dict]  # per node: (X, L, c) -> {(P, B): (weight, witness)}
    cap: int

    def root_weights(self) -> dict[int, int]:
        """Component count c -> weight of the (∅, ∅) entry at the root."""
        out = {}
        empty = (pt.Partition((), ()), frozenset())
        for (x, l, c), entries in self.cells[self.nd.root].items():
            if not x and not l and empty in entries:
                out[c] = entries[empty][0]
        return out

    def witness_edges(self, t: int, key, entry) -> Counter:
        """Edge copies (indices into ``nd.graph.edges``) of the stored partial solution."""
        used = Counter()
        stack = [(t, key, entry)]
        while stack:
            t, key, entry = stack.pop()
            node = self.nd.nodes[t]
            wit = self.cells[t][key][entry][1]
            if node.kind == LEAF:
                continue
            if node.kind == JOIN:
                (k1, e1), (k2, e2) = wit
                stack.append((node.children[0], k1, e1))
                stack.append((node.children[1], k2, e2))
                continue
            ckey, centry, took = wit
            if node.kind == INTRODUCE_EDGE and took:
                used[node.edge] += 1
            stack.append((node.children[0], ckey, centry))
        return used


def _put(cell: dict, key, p, m, w, wit):
    entries = cell.setdefault(key, {})
    old = entries.get((p, m))
    if old is None or w < old[0]:
        entries[(p, m)] = (w, wit)


def run_dp(inst: VrpInstance, nd: NiceDecomposition) -> DpTable:
    """Fill the table bottom-up, storing only reachable presignatures."""
    if nd.graph.n != inst.n:
        raise ValueError("decomposition and instance have different vertex counts")
    depots, clients = inst.depots, inst.clients
    cap = min(inst.k, len(depots))
    cells: list[dict] = [None] * len(nd.nodes)
    for t, node in enumerate(nd.nodes):
        cell: dict = {}
        if node.kind == LEAF:
            cell[(frozenset(), frozenset(), 0)] = {(pt.Partition((), ()), frozenset()): (0, None)}

        elif node.kind == INTRODUCE_VERTEX:
            v = node.vertex
            for key, entries in cells[node.children[0]].items():
                x, l, c = key
                for (p, m), (w, _) in entries.items():
                    q, qm = pt.insert_entry((v,), depots, p, m)
                    _put(cell, (x | {v}, l, c), q, qm, w, (key, (p, m), False))
                    if v not in clients:
                        _put(cell, key, p, m, w, (key, (p, m), False))

        elif node.kind == INTRODUCE_EDGE:
            e = nd.graph.edges[node.edge]
            u, v = e.u, e.v
            for key, entries in cells[node.children[0]].items():
                x, l, c = key
                glued = u in x and v in x
                nkey = (x, l ^ {u, v}, c)
                for (p, m), (w, _) in entries.items():
                    _put(cell, key, p, m, w, (key, (p, m), False))
                    if glued:
                        q, qm = pt.glue_entry(u, v, p, m)
                        _put(cell, nkey, q, qm, pt.checked_add(w, e.weight), (key, (p, m), True))

        elif node.kind == FORGET:
            v = node.vertex
            for key, entries in cells[node.children[0]].items():
                x, l, c = key
                if v not in x:
                    for (p, m), (w, _) in entries.items():
                        _put(cell, key, p, m, w, (key, (p, m), False))
                    continue
                if v in l:
                    continue
                x2 = x - {v}
                for (p, m), (w, _) in entries.items():
                    r = pt.project_entry((v,), p, m)
                    if r is not None:
                        _put(cell, (x2, l, c), r[0], r[1], w, (key, (p, m), False))
                    if c + 1 <= cap:
                        r = pt.detach_entry((v,), p, m)
                        if r is not None:
                            _put(cell, (x2, l, c + 1), r[0], r[1], w, (key, (p, m), True))

        elif node.kind == JOIN:
            left, right = cells[node.children[0]], cells[node.children[1]]
            by_x = {}
            for key in right:
                by_x.setdefault(key[0], []).append(key)
            for k1, e1 in left.items():
                x, l1, c1 = k1
                for k2 in by_x.get(x, ()):
                    _, l2, c2 = k2
                    if c1 + c2 > cap:
                        continue
                    nkey = (x, l1 ^ l2, c1 + c2)
                    e2 = right[k2]
                    for (p, pm), (pw, _) in e1.items():
                        for (q, qm), (qw, _) in e2.items():
                            r, rm = pt.join_entry(p, pm, q, qm)
                            _put(cell, nkey, r, rm, pt.checked_add(pw, qw), ((k1, (p, pm)), (k2, (q, qm))))
        else:
            raise ValueError(f"unknown node kind {node.kind}")
        cells[t] = cell
    return DpTable(nd, cells, cap)


def _nice_for(inst: VrpInstance, expanded: Graph,
              decomposition: Union[None, TreeDecomposition, NiceDecomposition]) -> NiceDecomposition:
    if isinstance(decomposition, NiceDecomposition):
        return decomposition
    td = decomposition if decomposition is not None else heuristic_decompose(inst.graph)
    return nicify(td, expanded, expand=True)


def solve_vrp_tw(inst: VrpInstance,
                 decomposition: Union[None, TreeDecomposition, NiceDecomposition] = None
                 ) -> Optional[Solution]:
    """Optimal routing, or None if the instance is infeasible.

    ``decomposition`` may be a tree decomposition of the instance graph (it is
    nicified over the expanded multigraph) or an already nice decomposition of
    the expanded multigraph; by default a min-fill decomposition is used.
    The weight bound ``r`` is ignored here; see ``decide``.
    """
    expanded, origin = expand_capacities(inst)
    nd = _nice_for(inst, expanded, decomposition)
    table = run_dp(inst, nd)
    roots = table.root_weights()
    if not roots:
        return None
    best_c = min(roots, key=lambda c: (roots[c], c))
    key = (frozenset(), frozenset(), best_c)
    entry = (pt.Partition((), ()), frozenset())
    used = table.witness_edges(nd.root, key, entry)
    h = Counter()
    for i, m in used.items():
        h[origin[i]] += m
    routing = extract_walks(h, inst) if (h or inst.clients) else Routing()
    return Solution(roots[best_c], routing)
