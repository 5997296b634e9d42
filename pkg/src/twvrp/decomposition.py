"""Tree decompositions: heuristic construction, validation, nice form, .td files."""

from __future__ import annotations

import sys
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx
from networkx.algorithms.approximation import treewidth_min_fill_in

from .errors import InstanceError
from .instance import Graph

LEAF = "leaf"
INTRODUCE_VERTEX = "introduce_vertex"
INTRODUCE_EDGE = "introduce_edge"
FORGET = "forget"
JOIN = "join"


@dataclass
class TreeDecomposition:
    """Bags indexed 0..len-1; ``edges`` are tree edges between bag indices."""

    bags: list[frozenset]
    edges: list[tuple[int, int]] = field(default_factory=list)
    n: int = 0

    def __post_init__(self):
        self.bags = [frozenset(b) for b in self.bags]
        self.edges = [tuple(sorted(e)) for e in self.edges]

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=0) - 1

    def adjacency(self) -> list[list[int]]:
        adj = [[] for _ in self.bags]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        for lst in adj:
            lst.sort()
        return adj


def _is_tree(td: TreeDecomposition) -> bool:
    if not td.bags:
        return False
    if len(td.edges) != len(td.bags) - 1:
        return False
    adj = td.adjacency()
    seen = {0}
    stack = [0]
    while stack:
        for y in adj[stack.pop()]:
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(td.bags)


def validate(td: TreeDecomposition, graph: Graph) -> tuple[bool, list[str]]:
    """Check the three tree-decomposition conditions; returns (ok, violations)."""
    violations = []
    if not _is_tree(td):
        violations.append("decomposition is not a tree")
    for i, (a, b) in enumerate(td.edges):
        if not (0 <= a < len(td.bags) and 0 <= b < len(td.bags)):
            violations.append(f"tree edge {i} references a missing bag")
    covered = set().union(*td.bags) if td.bags else set()
    for v in range(graph.n):
        if v not in covered:
            violations.append(f"vertex {v} is in no bag")
    for x in covered:
        if not (isinstance(x, int) and 0 <= x < graph.n):
            violations.append(f"bag vertex {x} is not a graph vertex")
    for i, e in enumerate(graph.edges):
        if not any(e.u in b and e.v in b for b in td.bags):
            violations.append(f"edge {i} ({e.u}, {e.v}) is in no bag")
    if not violations:
        adj = td.adjacency()
        for v in sorted(covered):
            nodes = [i for i, b in enumerate(td.bags) if v in b]
            seen = {nodes[0]}
            stack = [nodes[0]]
            while stack:
                for y in adj[stack.pop()]:
                    if y not in seen and v in td.bags[y]:
                        seen.add(y)
                        stack.append(y)
            if len(seen) != len(nodes):
                violations.append(f"bags containing vertex {v} are not connected")
    return not violations, violations


def heuristic_decompose(graph: Graph) -> TreeDecomposition:
    """Min-fill decomposition; components are joined through an empty bag."""
    g = nx.Graph()
    g.add_nodes_from(range(graph.n))
    g.add_edges_from((e.u, e.v) for e in graph.edges)
    components = sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])
    bags: list[frozenset] = []
    edges: list[tuple[int, int]] = []
    anchors = []
    for comp in components:
        _, tree = treewidth_min_fill_in(g.subgraph(comp))
        # networkx names tree nodes by their bags; order them deterministically
        order = sorted(tree.nodes, key=lambda b: (-len(b), sorted(b)))
        base = len(bags)
        index = {b: base + i for i, b in enumerate(order)}
        bags.extend(order)
        edges.extend(tuple(sorted((index[a], index[b]))) for a, b in tree.edges)
        anchors.append(base)
    if len(anchors) != 1:
        hub = len(bags)
        bags.append(frozenset())
        edges.extend((a, hub) for a in anchors)
    return TreeDecomposition(bags, sorted(edges), graph.n)


# ---------------------------------------------------------------------------
# .td files (1-based on disk)


def parse_td(text: str) -> TreeDecomposition:
    header = None
    bags = {}
    edges = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "s":
            if header is not None or len(parts) != 5 or parts[1] != "td":
                raise InstanceError(f"line {lineno}: malformed header")
            try:
                header = tuple(int(x) for x in parts[2:])
            except ValueError:
                raise InstanceError(f"line {lineno}: malformed header") from None
            continue
        if header is None:
            raise InstanceError(f"line {lineno}: content before header")
        try:
            nums = [int(x) for x in parts[1:]] if parts[0] == "b" else [int(x) for x in parts]
        except ValueError:
            raise InstanceError(f"line {lineno}: non-integer field") from None
        if parts[0] == "b":
            if not nums:
                raise InstanceError(f"line {lineno}: bag line without id")
            bid = nums[0]
            if not 1 <= bid <= header[0] or bid in bags:
                raise InstanceError(f"line {lineno}: bad or repeated bag id {bid}")
            if any(not 1 <= v <= header[2] for v in nums[1:]):
                raise InstanceError(f"line {lineno}: vertex out of range")
            bags[bid] = frozenset(v - 1 for v in nums[1:])
        else:
            if len(nums) != 2 or any(not 1 <= x <= header[0] for x in nums):
                raise InstanceError(f"line {lineno}: malformed tree edge")
            edges.append((nums[0] - 1, nums[1] - 1))
    if header is None:
        raise InstanceError("missing 's td' header")
    nbags, width1, n = header
    if len(bags) != nbags:
        raise InstanceError(f"header announces {nbags} bags, found {len(bags)}")
    td = TreeDecomposition([bags[i] for i in range(1, nbags + 1)], edges, n)
    if max((len(b) for b in td.bags), default=0) != width1:
        raise InstanceError(f"header width field {width1} does not match the largest bag")
    return td


def emit_td(td: TreeDecomposition) -> str:
    lines = [f"s td {len(td.bags)} {td.width + 1} {td.n}"]
    for i, bag in enumerate(td.bags):
        lines.append(" ".join(["b", str(i + 1)] + [str(v + 1) for v in sorted(bag)]))
    for a, b in sorted(td.edges):
        lines.append(f"{a + 1} {b + 1}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# nice decompositions


@dataclass(frozen=True)
class NiceNode:
    kind: str
    bag: frozenset
    children: tuple[int, ...] = ()
    vertex: Optional[int] = None
    edge: Optional[int] = None  # index into graph.edges
    copy: int = 0


@dataclass
class NiceDecomposition:
    """Nodes in postorder (children before parents); the last node is the root."""

    nodes: list[NiceNode]
    graph: Graph

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max(len(t.bag) for t in self.nodes) - 1

    def edge_endpoints(self, t: int) -> tuple[int, int]:
        e = self.graph.edges[self.nodes[t].edge]
        return e.u, e.v


def nicify(td: TreeDecomposition, graph: Graph, expand: bool = True) -> NiceDecomposition:
    """Turn a valid decomposition into a nice one.

    With ``expand`` every parallel copy of an edge (``mult``) gets its own
    IntroduceEdge node; otherwise each edge entry is introduced once.  Edges
    are introduced just below the forget node of whichever endpoint is
    forgotten first, in edge-index order.
    """
    ok, violations = validate(td, graph)
    if not ok:
        raise InstanceError("invalid tree decomposition: " + "; ".join(violations))
    incident: list[list[int]] = [[] for _ in range(graph.n)]
    for i, e in enumerate(graph.edges):
        incident[e.u].append(i)
        incident[e.v].append(i)
    introduced = [False] * len(graph.edges)
    nodes: list[NiceNode] = []

    def add(node: NiceNode) -> int:
        nodes.append(node)
        return len(nodes) - 1

    def forget(cur: int, v: int) -> int:
        bag = nodes[cur].bag
        for i in incident[v]:
            if introduced[i]:
                continue
            introduced[i] = True
            copies = graph.edges[i].mult if expand else 1
            for c in range(copies):
                cur = add(NiceNode(INTRODUCE_EDGE, bag, (cur,), edge=i, copy=c))
        return add(NiceNode(FORGET, bag - {v}, (cur,), vertex=v))

    def transition(cur: int, target: frozenset) -> int:
        for v in sorted(nodes[cur].bag - target):
            cur = forget(cur, v)
        for v in sorted(target - nodes[cur].bag):
            cur = add(NiceNode(INTRODUCE_VERTEX, nodes[cur].bag | {v}, (cur,), vertex=v))
        return cur

    adj = td.adjacency()
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 10 * len(td.bags) + 1000))

    def build(t: int, parent: Optional[int]) -> int:
        bag = td.bags[t]
        subs = [transition(build(c, t), bag) for c in adj[t] if c != parent]
        if not subs:
            return transition(add(NiceNode(LEAF, frozenset())), bag)
        cur = subs[0]
        for other in subs[1:]:
            cur = add(NiceNode(JOIN, bag, (cur, other)))
        return cur

    top = build(0, None)
    transition(top, frozenset())
    return NiceDecomposition(nodes, graph)


def validate_nice(nd: NiceDecomposition, expand: bool = True) -> list[str]:
    """Violations of the nice-decomposition invariants (empty list if none)."""
    out = []
    nodes = nd.nodes
    if nodes[-1].bag:
        out.append("root bag not empty")
    parents = Counter()
    for i, t in enumerate(nodes):
        for c in t.children:
            if c >= i:
                out.append(f"node {i}: child {c} not before parent")
            parents[c] += 1
        kids = [nodes[c].bag for c in t.children]
        if t.kind == LEAF:
            if t.children or t.bag:
                out.append(f"node {i}: leaf must be childless with empty bag")
        elif t.kind == INTRODUCE_VERTEX:
            if len(kids) != 1 or t.vertex in kids[0] or t.bag != kids[0] | {t.vertex}:
                out.append(f"node {i}: bad introduce-vertex bag")
        elif t.kind == FORGET:
            if len(kids) != 1 or t.vertex not in kids[0] or t.bag != kids[0] - {t.vertex}:
                out.append(f"node {i}: bad forget bag")
        elif t.kind == INTRODUCE_EDGE:
            u, v = nd.edge_endpoints(i)
            if len(kids) != 1 or t.bag != kids[0] or u not in t.bag or v not in t.bag:
                out.append(f"node {i}: bad introduce-edge node")
        elif t.kind == JOIN:
            if len(kids) != 2 or kids[0] != t.bag or kids[1] != t.bag:
                out.append(f"node {i}: bad join bags")
        else:
            out.append(f"node {i}: unknown kind {t.kind}")
    for i in range(len(nodes) - 1):
        if parents[i] != 1:
            out.append(f"node {i} has {parents[i]} parents")
    got = Counter(t.edge for t in nodes if t.kind == INTRODUCE_EDGE)
    for i, e in enumerate(nd.graph.edges):
        want = e.mult if expand else 1
        if got[i] != want:
            out.append(f"edge {i} introduced {got[i]} times, expected {want}")
    return out
