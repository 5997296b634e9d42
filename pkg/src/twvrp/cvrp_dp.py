"""XP dynamic program for the capacitated variants over nice decompositions.

A partial solution below node ``t`` is cut by the bag into pieces: maximal
stretches of vehicle walks inside the graph introduced so far.  Each piece
with an endpoint in the bag is summarized by an item ``(a, b, lam, w, dep)``:
unordered endpoints ``a <= b``, clients served ``lam``, weight ``w`` and
whether it touches a depot.  The multiset of items is the counter pair
``(s, s*)`` split by ``dep``.  LoadCVRP keeps ``w = 0`` and GasCVRP keeps
``lam = 0`` in every item, as only one capacity needs tracking.

A cell is keyed by ``(X, c, items)``: bag clients already handed to some
piece, number of finished (detached) walks, and the counter.  Only states
reachable from the leaves are generated.  Pieces are combined by
concatenating two of them at a shared endpoint; at an IntroduceEdge node a
concatenation must involve a new edge copy, at a Join node it must involve
pieces from both sides, so every combination is generated once per order.
"""

from __future__ import annotations

import bisect
import sys
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Union

import networkx as nx

from .binpacking import BinKind, HetInstance, eulerian_trail_predicate, solve_het
from .decomposition import (FORGET, INTRODUCE_EDGE, INTRODUCE_VERTEX, JOIN, LEAF,
                            NiceDecomposition, TreeDecomposition, heuristic_decompose, nicify)
from .errors import UnsupportedVariantError
from .instance import CAPACITATED, Routing, Solution, VrpInstance, Walk

# tags used while combining pieces
OLD, NEW, LEFT, RIGHT, MIXED = 0, 1, 0, 1, 2


def counters(items) -> tuple[Counter, Counter]:
    """Split items into the depot-free counter s and the depot counter s*."""
    s, s_star = Counter(), Counter()
    for a, b, lam, w, dep in items:
        (s_star if dep else s)[(a, b, lam, w)] += 1
    return s, s_star


def _concat(x, y, via):
    a = x[1] if x[0] == via else x[0]
    b = y[1] if y[0] == via else y[0]
    if a > b:
        a, b = b, a
    return (a, b, x[2] + y[2], x[3] + y[3], x[4] or y[4])


@lru_cache(maxsize=200_000)
def reducible(s1: tuple, s2: tuple) -> bool:
    """Can the pieces ``s1`` be merged into exactly the pieces ``s2``?

    Both are tuples of items.  Sums of clients and weight must agree; then
    a bin packing decides it: items are the pieces of ``s1`` sized
    ``(lam, w, [lam = w = 0])`` with fingerprint ``(a, b, dep)``, and every
    piece of ``s2`` is a bin that must receive a set of pieces forming an
    Eulerian trail between its endpoints, with a depot iff it has one.
    """
    if sum(x[2] for x in s1) != sum(x[2] for x in s2):
        return False
    if sum(x[3] for x in s1) != sum(x[3] for x in s2):
        return False
    zero = sum(1 for x in s1 if x[2] == 0 and x[3] == 0)
    sizes = tuple((x[2], x[3], int(x[2] == 0 and x[3] == 0)) for x in s1)
    fps = tuple((x[0], x[1], x[4]) for x in s1)
    kinds = []
    for (a, b, lam, w, dep), count in sorted(Counter(s2).items()):
        def valid(fpc, a=a, b=b, dep=dep):
            return eulerian_trail_predicate(list(fpc.elements()), (a, b), dep)
        kinds.append(BinKind((lam, w, zero), count, valid))
    return solve_het(HetInstance(sizes, fps, tuple(kinds)), exact_counts=True) is not None


@dataclass
class CvrpTable:
    nd: NiceDecomposition
    cells: list[dict]  # per node: (X, c, items) -> (weight, witness)
    transitions_checked: int = 0
    # least weight lower bound among states dropped for exceeding the bound
    dropped: Optional[int] = None

    def drop(self, w: int):
        if self.dropped is None or w < self.dropped:
            self.dropped = w

    def root_weights(self) -> dict[int, int]:
        out = {}
        for (x, c, items), (w, _) in self.cells[self.nd.root].items():
            if not x and not items:
                out[c] = w
        return out


STEP = 1000000


class _Limits:
    def __init__(self, inst: VrpInstance):
        self.k = inst.k
        self.ell = inst.ell if inst.has_load else None
        self.g = inst.g if inst.has_gas else None

    def item_ok(self, item) -> bool:
        return ((self.ell is None or item[2] <= self.ell)
                and (self.g is None or item[3] <= self.g))

    def items_ok(self, items, c) -> bool:
        walks = self.k - c
        if walks < 0:
            return False
        if self.ell is not None and sum(x[2] for x in items) > walks * self.ell:
            return False
        if self.g is not None and sum(x[3] for x in items) > walks * self.g:
            return False
        return True

    def wasteful(self, items, c) -> bool:
        """Pieces no traversal-minimal optimal routing has.

        A closed piece serving no client can be cut out of its walk unless
        it holds every depot visit of that walk.  So such pieces need a
        depot, there is at most one per open walk, and a walk that has one
        has no other depot piece.  Only the load variants know whether a
        piece serves clients.
        """
        if self.ell is None:
            return False
        idle = 0
        other_depot = False
        for a, b, lam, _, dep in items:
            if a == b and lam == 0:
                if not dep:
                    return True
                idle += 1
            elif dep:
                other_depot = True
        return idle > 0 and idle + other_depot > self.k - c

    def future_cost(self, items, c, remaining) -> Optional[int]:
        """Lower bound on the weight still needed to continue the pieces.

        Every piece end at x needs a later traversal of an edge at x that is
        not introduced yet; ``remaining[x]`` lists their weights.  Each such
        edge is traversed at most twice by each of the ``k - c`` open walks,
        and one traversal serves at most two ends.  A closed piece with a
        depot may already be a whole walk and needs nothing; a closed piece
        without one needs two ends.  Returns None if some end cannot be
        served at all.
        """
        ends = Counter()
        for a, b, _, _, dep in items:
            if a != b:
                ends[a] += 1
                ends[b] += 1
            elif not dep:
                ends[a] += 2
        per_edge = 2 * (self.k - c)
        total = 0
        for x, n in ends.items():
            weights = remaining.get(x, ())
            if n > per_edge * len(weights):
                return None
            total += n * weights[0]
        return (total + 1) // 2


def _closure(start: tuple, limits: _Limits, c: int, mergeable) -> dict:
    """All tagged multisets reachable by concatenations allowed by ``mergeable``.

    ``start`` is a sorted tuple of (item, tag).  Returns multiset -> ops,
    ops being (i, j, via) positions in the sorted tuple at each step.
    """
    seen = {start: ()}
    frontier = [start]
    while frontier:
        nxt = []
        for state in frontier:
            ops = seen[state]
            n = len(state)
            for i in range(n):
                if i and state[i] == state[i - 1]:
                    continue
                xi, ti = state[i]
                for j in range(i + 1, n):
                    if j > i + 1 and state[j] == state[j - 1]:
                        continue
                    xj, tj = state[j]
                    if not mergeable(ti, tj):
                        continue
                    for via in {xi[0], xi[1]} & {xj[0], xj[1]}:
                        item = _concat(xi, xj, via)
                        if not limits.item_ok(item):
                            continue
                        tag = max(ti, tj) if mergeable is _edge_mergeable else MIXED
                        rest = state[:i] + state[i + 1:j] + state[j + 1:]
                        new = tuple(sorted(rest + ((item, tag),)))
                        if new not in seen:
                            seen[new] = ops + ((i, j, via),)
                            nxt.append(new)
        frontier = nxt
    return seen


def _edge_mergeable(ti, tj):
    return ti == NEW or tj == NEW


def _join_mergeable(ti, tj):
    return ti != tj or ti == MIXED


def run_cvrp_dp(inst: VrpInstance, nd: NiceDecomposition, check_transitions: bool = False,
                bound: Optional[int] = None, outcome_cache: Optional[dict] = None) -> CvrpTable:
    """Fill the capacitated table bottom-up.

    ``nd`` must be a nice decomposition of the instance graph with each edge
    entry introduced once.  States heavier than ``bound`` are dropped; this
    is exact for every routing of weight at most ``bound`` since weights only
    grow towards the root.  With ``check_transitions`` every IntroduceEdge
    and Join transition is re-validated with ``reducible`` (slow; for tests).
    ``outcome_cache`` may be shared between runs on the same ``nd``.
    """
    if inst.variant not in CAPACITATED:
        raise UnsupportedVariantError(f"the capacitated DP does not handle {inst.variant}")
    limits = _Limits(inst)
    if outcome_cache is None:
        outcome_cache = {}
    k = inst.k
    depots, clients = inst.depots, inst.clients
    graph = nd.graph
    cells: list[dict] = [None] * len(nd.nodes)
    table = CvrpTable(nd, cells)

    incident = [[] for _ in range(graph.n)]
    for i, e in enumerate(graph.edges):
        incident[e.u].append(i)
        incident[e.v].append(i)
    below: list[frozenset] = [None] * len(nd.nodes)

    def put(cell, key, w, wit):
        if limits.wasteful(key[2], key[1]):
            return
        rest = limits.future_cost(key[2], key[1], remaining)
        if rest is None:
            return
        if bound is not None and w + rest > bound:
            table.drop(w + rest)
            return
        old = cell.get(key)
        if old is None or w < old[0]:
            cell[key] = (w, wit)

    for t, node in enumerate(nd.nodes):
        done = frozenset().union(*(below[ch] for ch in node.children))
        if node.kind == INTRODUCE_EDGE:
            done = done | {node.edge}
        below[t] = done
        # weights of the edges at each bag vertex still to be introduced, ascending
        remaining = {x: sorted(graph.edges[i].weight for i in incident[x] if i not in done)
                     for x in node.bag}
        cell: dict = {}
        if node.kind == LEAF:
            cell[(frozenset(), 0, ())] = (0, None)

        elif node.kind == INTRODUCE_VERTEX:
            v = node.vertex
            child = cells[node.children[0]]
            if v in clients:
                lam = inst.demand(v) if inst.has_load else 0
                item = (v, v, lam, 0, v in depots)
                fits = limits.item_ok(item)
            for key, (w, _) in child.items():
                x, c, items = key
                put(cell, key, w, (key, ("skip",)))
                if v in clients and fits:
                    new_items = tuple(sorted(items + (item,)))
                    if limits.items_ok(new_items, c):
                        put(cell, (x | {v}, c, new_items), w, (key, ("client", v)))

        elif node.kind == INTRODUCE_EDGE:
            e = graph.edges[node.edge]
            edge_item = (min(e.u, e.v), max(e.u, e.v), 0,
                         e.weight if inst.has_gas else 0, e.u in depots or e.v in depots)
            usable = limits.item_ok(edge_item)
            child = cells[node.children[0]]

            def most_for(c, w):
                most = 2 * (k - c)
                if bound is not None and e.weight:
                    most = min(most, (bound - w) // e.weight)
                return most

            need = {}
            for (_, c, items), (w, _) in child.items():
                need[items, c] = max(need.get((items, c), -1), most_for(c, w))
            for (items, c), most in need.items():
                ck = (node.edge, items, c)
                if ck not in outcome_cache or outcome_cache[ck][0] < most:
                    outcome_cache[ck] = (most, _edge_outcomes(items, c, edge_item, usable, limits,
                                                              most, e.u, e.v))
            for key, (w, _) in child.items():
                x, c, items = key
                most = most_for(c, w)
                if usable and most < 2 * (k - c):
                    table.drop(w + (most + 1) * e.weight)
                for new_items, (copies, ops) in outcome_cache[node.edge, items, c][1].items():
                    if copies > most:
                        continue
                    nw = w + copies * e.weight
                    if check_transitions and copies:
                        table.transitions_checked += 1
                        assert reducible(tuple(sorted(items + (edge_item,) * copies)), new_items)
                    put(cell, (x, c, new_items), nw, (key, ("edge", copies, ops)))

        elif node.kind == FORGET:
            v = node.vertex
            for key, (w, _) in cells[node.children[0]].items():
                x, c, items = key
                if v in clients and v not in x:
                    continue
                gone = [i for i, it in enumerate(items) if it[0] == v or it[1] == v]
                if any(not (items[i][0] == items[i][1] == v and items[i][4]) for i in gone):
                    continue
                # a finished walk serving nobody is never needed
                if inst.has_load and any(items[i][2] == 0 for i in gone):
                    continue
                c2 = c + len(gone)
                if c2 > k:
                    continue
                rest = tuple(it for i, it in enumerate(items) if i not in gone)
                put(cell, (x - {v}, c2, rest), w, (key, ("forget", tuple(gone))))

        elif node.kind == JOIN:
            left, right = cells[node.children[0]], cells[node.children[1]]
            memo = {}
            for k1, (w1, _) in left.items():
                x1, c1, items1 = k1
                for k2, (w2, _) in right.items():
                    x2, c2, items2 = k2
                    if x1 & x2 or c1 + c2 > k:
                        continue
                    c = c1 + c2
                    mk = (items1, items2, c)
                    if mk not in memo:
                        start = tuple(sorted([(it, LEFT) for it in items1] + [(it, RIGHT) for it in items2]))
                        outs = {}
                        if limits.items_ok(tuple(it for it, _ in start), c):
                            for tagged, ops in _closure(start, limits, c, _join_mergeable).items():
                                new_items = tuple(sorted(it for it, _ in tagged))
                                if new_items not in outs or len(ops) < len(outs[new_items]):
                                    outs[new_items] = ops
                        memo[mk] = outs
                    for new_items, ops in memo[mk].items():
                        if check_transitions:
                            table.transitions_checked += 1
                            assert reducible(tuple(sorted(items1 + items2)), new_items)
                        put(cell, (x1 | x2, c, new_items), w1 + w2, ((k1, k2), ("join", ops)))
        else:
            raise ValueError(f"unknown node kind {node.kind}")
        cells[t] = cell
    return table


def _other_end(item, at):
    return item[1] if item[0] == at else item[0]


def _attach_moves(items: tuple, u: int, v: int, edge_item):
    """Ways to lay one copy of edge u-v: (new item, removed positions, op).

    The copy is joined to at most one piece ending at u and at most one
    ending at v (its neighbours on the walk).  Joining both ends of the same
    piece closes it; the closed piece is anchored at u or at v.
    """
    _, _, el, ew, ed = edge_item
    at_u, at_v = [None], [None]
    prev = None
    for i, it in enumerate(items):
        if it != prev:
            if it[0] == u or it[1] == u:
                at_u.append(i)
            if it[0] == v or it[1] == v:
                at_v.append(i)
        prev = it
    for ia in at_u:
        pa = items[ia] if ia is not None else None
        for ib in at_v:
            if ia is not None and ia == ib:
                if (pa[0], pa[1]) == (edge_item[0], edge_item[1]):
                    lam, w, dep = pa[2] + el, pa[3] + ew, pa[4] or ed
                    for anchor in sorted({u, v}):
                        yield (anchor, anchor, lam, w, dep), (ia,), (ia, ia, anchor)
                    if ia + 1 < len(items) and items[ia + 1] == pa:
                        # two equal pieces joined through the copy
                        ends = sorted((_other_end(pa, u), _other_end(pa, v)))
                        yield ((ends[0], ends[1], 2 * pa[2] + el, 2 * pa[3] + ew, pa[4] or ed),
                               (ia, ia + 1), (ia, ia + 1, None))
                continue
            x, lam, w, dep = u, el, ew, ed
            if pa is not None:
                x = _other_end(pa, u)
                lam, w, dep = lam + pa[2], w + pa[3], dep or pa[4]
            y = v
            if ib is not None:
                pb = items[ib]
                y = _other_end(pb, v)
                lam, w, dep = lam + pb[2], w + pb[3], dep or pb[4]
            gone = tuple(sorted(i for i in (ia, ib) if i is not None))
            yield (min(x, y), max(x, y), lam, w, dep), gone, (ia, ib, None)


def _sum(*parts):
    return (sum(p[2] for p in parts), sum(p[3] for p in parts), any(p[4] for p in parts))


def _edge_outcomes(items, c, edge_item, usable, limits, most, u, v) -> dict:
    """Result counters after adding copies of one edge: items -> (copies, ops)."""
    best = {items: (0, ())}
    if not usable:
        return best
    # laying copies keeps the total load of the pieces and adds a fixed
    # weight per copy, so the aggregate test depends on the copy count only
    walks = limits.k - c
    if limits.ell is not None and sum(x[2] for x in items) > walks * limits.ell:
        return best
    if limits.g is not None and edge_item[3]:
        most = min(most, (walks * limits.g - sum(x[3] for x in items)) // edge_item[3])
    item_ok = limits.item_ok
    layer = {items: ()}
    for copies in range(1, most + 1):
        grown = {}
        for state, ops in layer.items():
            for item, gone, op in _attach_moves(state, u, v, edge_item):
                if not item_ok(item):
                    continue
                rest = list(state)
                for i in reversed(gone):  # ascending positions
                    del rest[i]
                bisect.insort(rest, item)
                new = tuple(rest)
                if new in best or new in grown:
                    continue
                grown[new] = ops + (op,)
        for new, ops in grown.items():
            best[new] = (copies, ops)
        layer = grown
        if not layer:
            break
    return best


# ---------------------------------------------------------------------------
# reconstruction


@dataclass
class _Piece:
    item: tuple
    vertices: tuple
    edges: tuple
    clients: tuple = ()


def _orient(p: _Piece, start: int) -> tuple[tuple, tuple]:
    if p.vertices[0] == start:
        return p.vertices, p.edges
    return tuple(reversed(p.vertices)), tuple(reversed(p.edges))


def _cat_pieces(p: _Piece, q: _Piece, via: int) -> _Piece:
    pv, pe = _orient(p, via)
    pv, pe = tuple(reversed(pv)), tuple(reversed(pe))  # now ends at via
    qv, qe = _orient(q, via)
    return _Piece(_concat(p.item, q.item, via), pv + qv[1:], pe + qe, p.clients + q.clients)


def _replay(pieces: list, tags: list, ops) -> list:
    """Apply recorded concatenations to concrete pieces (with tags)."""
    work = sorted(zip(pieces, tags), key=lambda pt: (pt[0].item, pt[1]))
    for op in ops:
        _, i, j, via = op if op[0] == "m" else ("m",) + tuple(op)
        (p, tp), (q, tq) = work[i], work[j]
        merged = _cat_pieces(p, q, via)
        tag = MIXED
        work = work[:i] + work[i + 1:j] + work[j + 1:] + [(merged, tag)]
        work.sort(key=lambda pt: (pt[0].item, pt[1]))
    return [p for p, _ in work]


def _lay_copy(pieces: list, op, copy: _Piece) -> list:
    """Replay one move of ``_attach_moves`` on concrete pieces sorted by item."""
    ia, ib, anchor = op
    u, v = copy.vertices
    if ia is not None and ia == ib:
        a = pieces[ia]
        # orient a to end at the copy's start, then close through the copy
        if anchor == v:
            av, ae = _orient(a, v)
            merged = _Piece(None, av + (v,), ae + copy.edges, a.clients)
        else:
            av, ae = _orient(a, u)
            merged = _Piece(None, av + (u,), ae + copy.edges, a.clients)
        merged.item = (anchor, anchor) + _sum(a.item, copy.item)
        gone = {ia}
    else:
        merged = copy
        gone = set()
        if ia is not None:
            merged = _cat_pieces(pieces[ia], merged, u)
            gone.add(ia)
        if ib is not None:
            merged = _cat_pieces(merged, pieces[ib], v)
            gone.add(ib)
    rest = [p for i, p in enumerate(pieces) if i not in gone]
    return sorted(rest + [merged], key=lambda p: p.item)


def _reconstruct(table: CvrpTable, inst: VrpInstance, t: int, key):
    """Concrete pieces (sorted by item) and finished walks for a stored state."""
    nd = table.nd
    node = nd.nodes[t]
    _, wit = table.cells[t][key]
    if node.kind == LEAF:
        return [], []
    if node.kind == JOIN:
        (k1, k2), (_, ops) = wit
        p1, d1 = _reconstruct(table, inst, node.children[0], k1)
        p2, d2 = _reconstruct(table, inst, node.children[1], k2)
        pieces = _replay(p1 + p2, [LEFT] * len(p1) + [RIGHT] * len(p2), [("m",) + op for op in ops])
        return sorted(pieces, key=lambda p: p.item), d1 + d2
    ckey, action = wit
    pieces, done = _reconstruct(table, inst, node.children[0], ckey)
    if action[0] == "client":
        v = action[1]
        lam = inst.demand(v) if inst.has_load else 0
        pieces = sorted(pieces + [_Piece((v, v, lam, 0, v in inst.depots), (v,), (), (v,))],
                        key=lambda p: p.item)
    elif action[0] == "edge":
        _, copies, ops = action
        if copies:
            e = nd.graph.edges[node.edge]
            a, b = min(e.u, e.v), max(e.u, e.v)
            item = (a, b, 0, e.weight if inst.has_gas else 0, e.u in inst.depots or e.v in inst.depots)
            for op in ops:
                pieces = _lay_copy(pieces, op, _Piece(item, (e.u, e.v), (node.edge,)))
    elif action[0] == "forget":
        gone = set(action[1])
        done = done + [p for i, p in enumerate(pieces) if i in gone]
        pieces = [p for i, p in enumerate(pieces) if i not in gone]
    return pieces, done


def _closed_walk(p: _Piece, depots) -> Walk:
    verts, edges = p.vertices, p.edges
    starts = [i for i, v in enumerate(verts[:-1] or verts) if v in depots]
    i = min(starts, key=lambda i: (verts[i], i))
    if len(verts) > 1:
        verts = verts[i:] + verts[1:i + 1]
        edges = edges[i:] + edges[:i]
    return Walk(tuple(verts), tuple(edges))


def _nice_for(inst, decomposition) -> NiceDecomposition:
    if isinstance(decomposition, NiceDecomposition):
        return decomposition
    td = decomposition if decomposition is not None else heuristic_decompose(inst.graph)
    return nicify(td, inst.graph, expand=False)


def weight_ceiling(inst: VrpInstance) -> int:
    """No optimal routing is heavier: each of k walks uses an edge at most twice."""
    total = sum(e.weight for e in inst.graph.edges)
    ceiling = 2 * inst.k * total
    if inst.has_gas:
        ceiling = min(ceiling, inst.k * inst.g)
    return ceiling


def _plainly_infeasible(inst: VrpInstance) -> bool:
    """Necessary conditions checked before any table is built."""
    clients = inst.clients
    if not clients:
        return False
    if inst.k == 0:
        return True
    if inst.has_load and sum(inst.demand(x) for x in clients) > inst.k * inst.ell:
        return True
    g = nx.Graph()
    g.add_nodes_from(range(inst.n))
    for e in inst.graph.edges:
        if not g.has_edge(e.u, e.v) or g[e.u][e.v]["weight"] > e.weight:
            g.add_edge(e.u, e.v, weight=e.weight)
    dist = nx.multi_source_dijkstra_path_length(g, set(inst.depots), weight="weight")
    for x in clients:
        if x not in dist:
            return True
        if inst.has_gas and 2 * dist[x] > inst.g:
            return True
    return False


def solve_cvrp_tw(inst: VrpInstance,
                  decomposition: Union[None, TreeDecomposition, NiceDecomposition] = None,
                  check_transitions: bool = False) -> Optional[Solution]:
    """Optimal capacitated routing, or None if infeasible.  Ignores ``r``."""
    if _plainly_infeasible(inst):
        return None
    nd = _nice_for(inst, decomposition)
    # A failed run at some bound cut every routing at a dropped state, so
    # the least dropped value is a lower bound on the optimum.  Bounds grow
    # slowly because a run costs little while the bound is below the optimum.
    ceiling = weight_ceiling(inst)
    cache = {}
    bound = 0
    while True:
        table = run_cvrp_dp(inst, nd, check_transitions, bound, cache)
        roots = table.root_weights()
        if roots:
            break
        if table.dropped is None or table.dropped > ceiling:
            return None
        bound = min(ceiling, max(table.dropped, bound + bound // STEP))
    c = min(roots, key=lambda c: (roots[c], c))
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * len(nd.nodes) + 1000))
    pieces, done = _reconstruct(table, inst, nd.root, (frozenset(), c, ()))
    assert not pieces
    walks = sorted(((_closed_walk(p, inst.depots), p.clients) for p in done),
                   key=lambda wc: (wc[0].vertices, wc[0].edges))
    assignment = {}
    for idx, (_, served) in enumerate(walks):
        for x in served:
            assignment[x] = idx
    return Solution(roots[c], Routing(tuple(w for w, _ in walks), assignment))
