"""Problem instances, routings, their JSON documents, and the routing checker.

Five variants share one instance type:

    VRP          closed walks only
    EVRP         plus per-edge usage caps ``kappa``
    LoadCVRP     plus per-vehicle load cap ``ell`` and client ``demands``
    GasCVRP      plus per-vehicle walk-weight cap ``g``
    LoadGasCVRP  both of the above

Vertices are dense integers ``0..n-1``.  Parallel edges are either separate
entries of ``Graph.edges`` or a single entry with ``mult > 1``; walks always
name the edge entry they traverse by its index.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Mapping, NamedTuple, Optional, Sequence

from .errors import InstanceError, UnsupportedVariantError

VARIANTS = ("VRP", "EVRP", "LoadCVRP", "GasCVRP", "LoadGasCVRP")
LOAD_VARIANTS = frozenset({"LoadCVRP", "LoadGasCVRP"})
GAS_VARIANTS = frozenset({"GasCVRP", "LoadGasCVRP"})
CAPACITATED = LOAD_VARIANTS | GAS_VARIANTS

# field -> variants that require it; every other variant forbids it
_VARIANT_FIELDS = {
    "kappa": frozenset({"EVRP"}),
    "ell": LOAD_VARIANTS,
    "demands": LOAD_VARIANTS,
    "g": GAS_VARIANTS,
}


class Edge(NamedTuple):
    u: int
    v: int
    weight: int
    mult: int = 1


@dataclass(frozen=True)
class Graph:
    n: int
    edges: tuple[Edge, ...] = ()
    allow_loops: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise InstanceError("vertex count must be a nonnegative integer", "n")
        edges = tuple(Edge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        for i, (u, v, w, m) in enumerate(edges):
            path = f"edges[{i}]"
            for x in (u, v):
                if not isinstance(x, int) or not 0 <= x < self.n:
                    raise InstanceError(f"vertex id {x!r} out of range [0, {self.n})", path)
            if u == v and not self.allow_loops:
                raise InstanceError(f"self-loop at {u} rejected", path)
            if not isinstance(w, int) or w < 0:
                raise InstanceError("weight must be a nonnegative integer", path)
            if not isinstance(m, int) or m < 1:
                raise InstanceError("multiplicity must be a positive integer", path)

    def edges_between(self, u: int, v: int) -> list[int]:
        return [i for i, e in enumerate(self.edges) if {e.u, e.v} == {u, v}]

    def cheapest_edge(self, u: int, v: int) -> Optional[int]:
        candidates = self.edges_between(u, v)
        if not candidates:
            return None
        return min(candidates, key=lambda i: (self.edges[i].weight, i))

    def neighbors(self) -> list[set[int]]:
        adj = [set() for _ in range(self.n)]
        for u, v, _, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def total_weight(self) -> int:
        return sum(e.weight * e.mult for e in self.edges)

    def copy_count(self) -> int:
        return sum(e.mult for e in self.edges)


@dataclass(frozen=True)
class Walk:
    vertices: tuple[int, ...]
    edges: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))

    @classmethod
    def from_vertices(cls, graph: Graph, vertices: Sequence[int]) -> "Walk":
        """Build a walk choosing the cheapest edge entry for every step."""
        edges = []
        for a, b in zip(vertices, vertices[1:]):
            e = graph.cheapest_edge(a, b)
            if e is None:
                raise InstanceError(f"no edge between {a} and {b}")
            edges.append(e)
        return cls(tuple(vertices), tuple(edges))

    @property
    def start(self) -> int:
        return self.vertices[0]

    def is_closed(self) -> bool:
        return self.vertices[0] == self.vertices[-1]

    def weight(self, graph: Graph) -> int:
        return sum(graph.edges[e].weight for e in self.edges)


@dataclass(frozen=True)
class Routing:
    walks: tuple[Walk, ...] = ()
    assignment: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "walks", tuple(self.walks))
        object.__setattr__(self, "assignment", dict(self.assignment))

    def weight(self, graph: Graph) -> int:
        return sum(p.weight(graph) for p in self.walks)


@dataclass(frozen=True)
class Solution:
    weight: int
    routing: Routing


@dataclass(frozen=True)
class VrpInstance:
    graph: Graph
    depots: frozenset
    clients: frozenset
    k: int
    variant: str = "VRP"
    kappa: Optional[tuple[int, ...]] = None
    ell: Optional[int] = None
    demands: Optional[Mapping[int, int]] = None
    g: Optional[int] = None
    r: Optional[int] = None
    names: Optional[tuple[str, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "depots", frozenset(self.depots))
        object.__setattr__(self, "clients", frozenset(self.clients))
        if self.kappa is not None:
            object.__setattr__(self, "kappa", tuple(self.kappa))
        if self.demands is not None:
            object.__setattr__(self, "demands", dict(self.demands))
        self._validate()

    def _validate(self):
        n = self.graph.n
        if self.variant not in VARIANTS:
            raise InstanceError(f"unknown variant {self.variant!r}", "variant")
        if not self.depots:
            raise InstanceError("at least one depot is required", "depots")
        for name in ("depots", "clients"):
            for x in getattr(self, name):
                if not isinstance(x, int) or not 0 <= x < n:
                    raise InstanceError(f"vertex id {x!r} out of range [0, {n})", name)
        if not isinstance(self.k, int) or self.k < 0:
            raise InstanceError("vehicle count must be a nonnegative integer", "k")
        for fname, allowed in _VARIANT_FIELDS.items():
            present = getattr(self, fname) is not None
            if present and self.variant not in allowed:
                raise InstanceError(f"field {fname} forbidden for {self.variant}", fname)
            if not present and self.variant in allowed:
                raise InstanceError(f"field {fname} required for {self.variant}", fname)
        if self.kappa is not None:
            if len(self.kappa) != len(self.graph.edges):
                raise InstanceError("kappa must be aligned with edges", "kappa")
            for i, x in enumerate(self.kappa):
                if not isinstance(x, int) or x < 0:
                    raise InstanceError("edge capacity must be a nonnegative integer", f"kappa[{i}]")
        if self.ell is not None and (not isinstance(self.ell, int) or self.ell < 1):
            raise InstanceError("load capacity must be a positive integer", "ell")
        if self.g is not None and (not isinstance(self.g, int) or self.g < 0):
            raise InstanceError("gas capacity must be a nonnegative integer", "g")
        if self.r is not None and (not isinstance(self.r, int) or self.r < 0):
            raise InstanceError("weight bound must be a nonnegative integer", "r")
        if self.demands is not None:
            for c, lam in self.demands.items():
                if c not in self.clients:
                    raise InstanceError(f"demand given for non-client {c}", f"demands.{c}")
                if not isinstance(lam, int) or lam < 1:
                    raise InstanceError("demand must be positive", f"demands.{c}")
            missing = sorted(self.clients - set(self.demands))
            if missing:
                raise InstanceError(f"clients without demand: {missing}", "demands")

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def has_load(self) -> bool:
        return self.variant in LOAD_VARIANTS

    @property
    def has_gas(self) -> bool:
        return self.variant in GAS_VARIANTS

    def demand(self, c: int) -> int:
        return self.demands[c] if self.demands is not None else 1

    def with_bound(self, r: Optional[int]) -> "VrpInstance":
        return replace(self, r=r)


# ---------------------------------------------------------------------------
# documents


def _dump_lines(pairs) -> str:
    body = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v, separators=(', ', ': '))}" for k, v in pairs)
    return "{\n" + body + "\n}\n"


def _load_json(text) -> dict:
    if isinstance(text, Mapping):
        return dict(text)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise InstanceError("document must be a JSON object")
    return doc


def _int_field(doc, name, required=True):
    if name not in doc:
        if required:
            raise InstanceError("missing field", name)
        return None
    value = doc[name]
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceError("expected an integer", name)
    return value


def _int_list(doc, name):
    value = doc.get(name, [])
    if not isinstance(value, list) or any(isinstance(x, bool) or not isinstance(x, int) for x in value):
        raise InstanceError("expected an array of integers", name)
    return value


def parse_instance(text) -> VrpInstance:
    """Parse and validate an instance document (JSON text or a dict)."""
    doc = _load_json(text)
    known = {"n", "edges", "depots", "clients", "k", "variant", "kappa", "ell", "demands", "g", "r", "names"}
    for key in doc:
        if key not in known:
            raise InstanceError("unknown field", key)
    n = _int_field(doc, "n")
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise InstanceError("expected an array", "edges")
    edges = []
    for i, e in enumerate(raw_edges):
        if (not isinstance(e, list) or len(e) not in (3, 4)
                or any(isinstance(x, bool) or not isinstance(x, int) for x in e)):
            raise InstanceError("edge must be [u, v, w] or [u, v, w, mult]", f"edges[{i}]")
        edges.append(Edge(*e))
    graph = Graph(n, tuple(edges))
    variant = doc.get("variant", "VRP")
    if not isinstance(variant, str):
        raise InstanceError("expected a string", "variant")
    demands = doc.get("demands")
    if demands is not None:
        if not isinstance(demands, dict):
            raise InstanceError("expected an object", "demands")
        parsed = {}
        for key, lam in demands.items():
            try:
                c = int(key)
            except ValueError:
                raise InstanceError("client key must be an integer", f"demands.{key}") from None
            if isinstance(lam, bool) or not isinstance(lam, int):
                raise InstanceError("expected an integer", f"demands.{key}")
            parsed[c] = lam
        demands = parsed
    kappa = doc.get("kappa")
    if kappa is not None:
        kappa = tuple(_int_list(doc, "kappa"))
    names = doc.get("names")
    if names is not None:
        if not isinstance(names, list) or len(names) != n or not all(isinstance(x, str) for x in names):
            raise InstanceError("names must be an array of n strings", "names")
        names = tuple(names)
    return VrpInstance(
        graph=graph,
        depots=frozenset(_int_list(doc, "depots")),
        clients=frozenset(_int_list(doc, "clients")),
        k=_int_field(doc, "k"),
        variant=variant,
        kappa=kappa,
        ell=_int_field(doc, "ell", required=False),
        demands=demands,
        g=_int_field(doc, "g", required=False),
        r=_int_field(doc, "r", required=False),
        names=names,
    )


def instance_to_dict(inst: VrpInstance) -> dict:
    doc = {
        "n": inst.n,
        "edges": [[e.u, e.v, e.weight] if e.mult == 1 else list(e) for e in inst.graph.edges],
        "depots": sorted(inst.depots),
        "clients": sorted(inst.clients),
        "k": inst.k,
        "variant": inst.variant,
    }
    if inst.kappa is not None:
        doc["kappa"] = list(inst.kappa)
    if inst.ell is not None:
        doc["ell"] = inst.ell
    if inst.demands is not None:
        doc["demands"] = {str(c): inst.demands[c] for c in sorted(inst.demands)}
    if inst.g is not None:
        doc["g"] = inst.g
    if inst.r is not None:
        doc["r"] = inst.r
    if inst.names is not None:
        doc["names"] = list(inst.names)
    return doc


def emit_document(doc: Mapping) -> str:
    """Canonical text of a flat document: one top-level key per line."""
    return _dump_lines(doc.items())


def emit_instance(inst: VrpInstance) -> str:
    return _dump_lines(instance_to_dict(inst).items())


def routing_to_dict(routing: Routing) -> dict:
    return {
        "walks": [{"vertices": list(p.vertices), "edges": list(p.edges)} for p in routing.walks],
        "assignment": {str(c): routing.assignment[c] for c in sorted(routing.assignment)},
    }


def emit_routing(routing: Routing) -> str:
    return _dump_lines(routing_to_dict(routing).items())


def parse_routing(text, graph: Optional[Graph] = None) -> Routing:
    """Parse a routing document.

    A walk is either ``{"vertices": [...], "edges": [...]}`` or a bare vertex
    array; the bare form needs ``graph`` to pick the cheapest edge per step.
    """
    doc = _load_json(text)
    raw_walks = doc.get("walks")
    if not isinstance(raw_walks, list):
        raise InstanceError("expected an array", "walks")
    walks = []
    for i, raw in enumerate(raw_walks):
        path = f"walks[{i}]"
        if isinstance(raw, list):
            if not raw or not all(isinstance(x, int) and not isinstance(x, bool) for x in raw):
                raise InstanceError("walk must be a nonempty vertex array", path)
            if graph is None:
                raise InstanceError("bare vertex walks need the instance graph", path)
            try:
                walks.append(Walk.from_vertices(graph, raw))
            except InstanceError as exc:
                raise InstanceError(str(exc), path) from None
        elif isinstance(raw, dict):
            verts, edges = raw.get("vertices"), raw.get("edges", [])
            if (not isinstance(verts, list) or not verts or not isinstance(edges, list)
                    or not all(isinstance(x, int) and not isinstance(x, bool) for x in verts + edges)):
                raise InstanceError("walk needs integer arrays 'vertices' and 'edges'", path)
            if len(edges) != len(verts) - 1:
                raise InstanceError("'edges' must have one entry per step", path)
            walks.append(Walk(tuple(verts), tuple(edges)))
        else:
            raise InstanceError("walk must be an array or an object", path)
    raw_assign = doc.get("assignment", {})
    if not isinstance(raw_assign, dict):
        raise InstanceError("expected an object", "assignment")
    assignment = {}
    for key, idx in raw_assign.items():
        try:
            c = int(key)
        except ValueError:
            raise InstanceError("client key must be an integer", f"assignment.{key}") from None
        if isinstance(idx, bool) or not isinstance(idx, int):
            raise InstanceError("expected a walk index", f"assignment.{key}")
        assignment[c] = idx
    return Routing(tuple(walks), assignment)


# ---------------------------------------------------------------------------
# checking


@dataclass
class VerificationReport:
    feasible: bool
    weight: int
    violations: list[str]


def verify_routing(inst: VrpInstance, routing: Routing, allow_zero_length: bool = True) -> VerificationReport:
    """Check a routing against every constraint of the instance's variant.

    ``allow_zero_length=False`` is the strict reading in which a vehicle that
    never leaves its depot does not visit anything.
    """
    graph = inst.graph
    violations = []
    weight = 0
    usage = Counter()
    walks = routing.walks
    if len(walks) > inst.k:
        violations.append(f"too many walks: {len(walks)} > k={inst.k}")
    walk_weights = []
    for i, p in enumerate(walks):
        w = 0
        ok = True
        if not p.vertices:
            violations.append(f"walk {i} is empty")
            walk_weights.append(0)
            continue
        if len(p.edges) != len(p.vertices) - 1:
            violations.append(f"walk {i} has {len(p.edges)} edge choices for {len(p.vertices) - 1} steps")
            ok = False
        for j, (a, b) in enumerate(zip(p.vertices, p.vertices[1:])):
            if not ok:
                break
            e = p.edges[j]
            if not 0 <= e < len(graph.edges) or {graph.edges[e].u, graph.edges[e].v} != {a, b}:
                violations.append(f"walk {i} step {j}: edge {e} does not join {a} and {b}")
                ok = False
                break
            w += graph.edges[e].weight
            usage[e] += 1
        if any(not 0 <= x < graph.n for x in p.vertices):
            violations.append(f"walk {i} leaves the vertex range")
        if not p.is_closed():
            violations.append(f"walk {i} is not closed")
        if p.start not in inst.depots:
            violations.append(f"walk {i} does not start at a depot")
        if not allow_zero_length and len(p.vertices) == 1:
            violations.append(f"walk {i} has zero length")
        walk_weights.append(w)
        weight += w

    load = Counter()
    for c in sorted(inst.clients):
        idx = routing.assignment.get(c)
        if idx is None:
            violations.append(f"client {c} is not assigned")
            continue
        if not 0 <= idx < len(walks):
            violations.append(f"client {c} assigned to missing walk {idx}")
            continue
        if c not in walks[idx].vertices:
            violations.append(f"client {c} not visited by its walk {idx}")
        load[idx] += inst.demand(c)

    if inst.variant == "EVRP":
        for e, used in sorted(usage.items()):
            cap = inst.kappa[e] * graph.edges[e].mult
            if used > cap:
                violations.append(f"edge {e} used {used} times, capacity {cap}")
    if inst.has_load:
        for i in range(len(walks)):
            if load[i] > inst.ell:
                violations.append(f"load exceeded on walk {i}")
    if inst.has_gas:
        for i, w in enumerate(walk_weights):
            if w > inst.g:
                violations.append(f"gas exceeded on walk {i}")
    if inst.r is not None and weight > inst.r:
        violations.append(f"weight {weight} exceeds bound r={inst.r}")
    return VerificationReport(not violations, weight, violations)


# ---------------------------------------------------------------------------
# zero-weight edge contraction


def contraction_map(inst: VrpInstance) -> list[int]:
    """Map each vertex to its class id after contracting zero-weight edges.

    Class ids are dense and ordered by the smallest original vertex.
    """
    parent = list(range(inst.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in inst.graph.edges:
        if e.weight == 0:
            a, b = find(e.u), find(e.v)
            if a != b:
                parent[max(a, b)] = min(a, b)
    roots = sorted({find(x) for x in range(inst.n)})
    dense = {r: i for i, r in enumerate(roots)}
    return [dense[find(x)] for x in range(inst.n)]


def contract_zero_edges(inst: VrpInstance) -> VrpInstance:
    if inst.variant not in ("VRP", "GasCVRP"):
        raise UnsupportedVariantError(
            f"zero-edge contraction is unsound for {inst.variant}: demands cannot be merged")
    if all(e.weight > 0 for e in inst.graph.edges):
        return inst
    cls = contraction_map(inst)
    edges = tuple(Edge(cls[e.u], cls[e.v], e.weight, e.mult)
                  for e in inst.graph.edges if cls[e.u] != cls[e.v])
    return replace(
        inst,
        graph=Graph(max(cls) + 1 if cls else 0, edges),
        depots=frozenset(cls[d] for d in inst.depots),
        clients=frozenset(cls[c] for c in inst.clients),
        names=None,
    )


def load_instance(path) -> VrpInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())
