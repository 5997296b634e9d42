"""Acceptance criteria, one check each.

Every check prints a single ``PASS``/``FAIL`` line.  Under pytest the lines
are collected and shown in the terminal summary; run this file directly to
see them without pytest.
"""

import os
import random
import sys
import time
from itertools import product
from unittest import mock

import pytest

import naive_binpacking
import test_partitions
from twvrp import compact
from twvrp.binpacking import BinPackingInstance, solve_het, solve_plain
from twvrp.compact import decide_k_capacity, decide_weight_bound, solve_by_clients
from twvrp.cvrp_dp import solve_cvrp_tw
from twvrp.instance import Edge, Graph, VrpInstance, verify_routing
from twvrp.oracle import oracle_cvrp, oracle_vrp
from twvrp.partitions import Partition, coarsen_join
from twvrp.reductions import from_binpacking, from_ntdm, from_trianglepacking, random_instance
from twvrp.vrp_dp import solve_vrp_tw

CAPACITATED = ["LoadCVRP", "GasCVRP", "LoadGasCVRP"]
RESULTS = []


def weight(sol):
    return None if sol is None else sol.weight


def routing_ok(inst, sol):
    if sol is None:
        return True
    report = verify_routing(inst, sol.routing)
    return report.feasible and report.weight == sol.weight


def feasible_at(inst, r, sol):
    return sol is not None and sol.weight <= r


# ---------------------------------------------------------------------------


def c1_uncapacitated_equivalence():
    bad, positive = [], 0
    for seed in range(300):
        inst = random_instance(seed, "VRP", n_max=7, max_edges=10, weights=(1, 5), k_max=3,
                               connected=seed % 2 == 0, n_min=3, k_min=1, depot_max=2)
        a, b, c = solve_vrp_tw(inst), solve_by_clients(inst), oracle_vrp(inst)
        positive += bool(c)
        if not (weight(a) == weight(b) == c and routing_ok(inst, a) and routing_ok(inst, b)):
            bad.append(seed)
    return not bad, f"300 instances ({positive} with positive optimum), mismatched seeds {bad}"


# load and gas together make most small instances infeasible, so that
# variant gets more seeds to reach a similar number of feasible ones
C2_SEEDS = {"LoadCVRP": 150, "GasCVRP": 150, "LoadGasCVRP": 500}


def c2_capacitated_equivalence():
    bad, positive = [], 0
    for variant in CAPACITATED:
        for seed in range(C2_SEEDS[variant]):
            inst = random_instance(seed, variant, n_max=6, max_edges=10, weights=(1, 3), k_max=3,
                                   ell_max=3, g_max=8, tw2=True, connected=True, n_min=3,
                                   k_min=1, depot_max=2)
            a, b, c = solve_cvrp_tw(inst), solve_by_clients(inst), oracle_cvrp(inst)
            positive += bool(c)
            if not (weight(a) == weight(b) == c and routing_ok(inst, a) and routing_ok(inst, b)):
                bad.append((variant, seed))
    total = sum(C2_SEEDS.values())
    return not bad, f"{total} instances ({positive} with positive optimum), mismatches {bad}"


def c3_ntdm():
    red = from_ntdm([1, 2], [5, 6], [7, 9], 15)
    inst = red.instance
    sol = solve_cvrp_tw(inst)
    cert = verify_routing(inst, red.routing_for([(1, 5, 9), (2, 6, 7)]))
    leaf_of = {v: a for (_, a), v in red.leaf.items()}
    groups = sorted(sorted(leaf_of[v] for v, i in sol.routing.assignment.items() if i == walk)
                    for walk in range(len(sol.routing.walks)))
    ok = (inst.g == 1962 and inst.r == 3924 and sol.weight == 3924 and routing_ok(inst, sol)
          and cert.feasible and cert.weight == 3924 and groups == [[1, 5, 9], [2, 6, 7]])
    return ok, f"g={inst.g}, solver weight {sol.weight}, matching {groups}"


def c4_binpacking():
    details = []
    ok = True
    for variant in CAPACITATED:
        yes = from_binpacking(BinPackingInstance((5, 1, 3), 5, 2), variant).instance
        no = from_binpacking(BinPackingInstance((5, 1, 3), 5, 1), variant).instance
        ok &= len(yes.clients) == 9 and yes.r == 18 and len(yes.graph.edges) == 9
        with mock.patch.dict(os.environ, {"TWVRP_SCALE_GUARD": "off"}):
            oy, on = oracle_cvrp(yes), oracle_cvrp(no)
        dy, dn = solve_cvrp_tw(yes), solve_cvrp_tw(no)
        ok &= oy is not None and oy <= 18 and feasible_at(yes, 18, dy) and routing_ok(yes, dy)
        ok &= (on is None or on > 18) and not feasible_at(no, 18, dn)
        details.append(f"{variant}: k=2 {oy}/{weight(dy)}, k=1 {on}/{weight(dn)}")
    return ok, "; ".join(details)


def c5_triangles():
    two = Graph(6, (Edge(0, 1, 1), Edge(1, 2, 1), Edge(0, 2, 1),
                    Edge(3, 4, 1), Edge(4, 5, 1), Edge(3, 5, 1)))
    c6 = Graph(6, tuple(Edge(i, (i + 1) % 6, 1) for i in range(6)))
    ok = True
    for variant in CAPACITATED:
        yes, no = from_trianglepacking(two, variant), from_trianglepacking(c6, variant)
        ok &= yes.r == 6 == no.r
        ok &= oracle_cvrp(yes) == 6 and feasible_at(yes, 6, solve_cvrp_tw(yes))
        on = oracle_cvrp(no)
        ok &= (on is None or on > 6) and not feasible_at(no, 6, solve_cvrp_tw(no))
    return ok, "two triangles feasible at 6, C6 not, for all three variants"


def c6_multiplicity():
    g = Graph(5, (Edge(0, 1, 1), Edge(1, 2, 1), Edge(1, 3, 1), Edge(1, 4, 1)))
    inst = VrpInstance(g, {0}, {2, 3, 4}, 3, "LoadCVRP", ell=1, demands={2: 1, 3: 1, 4: 1})
    sol = solve_cvrp_tw(inst)
    total = sum(w.edges.count(0) for w in sol.routing.walks)
    per_walk = max(w.edges.count(e) for w in sol.routing.walks for e in w.edges)
    ok = (sol.weight == oracle_cvrp(inst) and routing_ok(inst, sol) and total > 2 and per_walk <= 2)
    return ok, f"{{d,v}} used {total} times in total, at most {per_walk} per walk"


def c7_bin_packing():
    rng = random.Random(7)
    bad = 0
    for _ in range(500):
        inst = naive_binpacking.random_het(rng, n_max=7, d_max=3, m_max=3)
        exact = rng.random() < 0.25
        bad += (solve_het(inst, exact) is not None) != naive_binpacking.feasible(inst, exact)
    plain_bad = 0
    for _ in range(300):
        cap = rng.randint(1, 10)
        sizes = [rng.randint(1, cap) for _ in range(rng.randint(0, 8))]
        bins = rng.randint(0, 8)
        got = solve_plain(BinPackingInstance(sizes, cap, bins)) is not None
        plain_bad += got != naive_binpacking.plain_feasible(sizes, cap, bins)
    return bad == plain_bad == 0, f"500 het and 300 plain instances, {bad} + {plain_bad} disagreements"


def c8_partitions():
    for size in range(5):
        test_partitions.test_coarsen_join_matches_reference(size)
        test_partitions.test_restrict_extend_match_reference(size)
    for size in range(1, 5):
        test_partitions.test_entry_operations_match_reference(size)
    for size in range(4):
        parts = [Partition.from_blocks(b) if b else Partition.singletons(range(size))
                 for b in map(list, test_partitions.naive.all_partitions(range(size)))]
        for p, q in product(parts, repeat=2):
            assert coarsen_join(p, q) == coarsen_join(q, p)
            assert coarsen_join(p, p) == p
        for p, q, r in product(parts, repeat=3):
            assert coarsen_join(coarsen_join(p, q), r) == coarsen_join(p, coarsen_join(q, r))
    return True, "all operations match the references on universes of size <= 4"


def _refuse(*args, **kwargs):
    raise AssertionError("search invoked")


def c9_deciders():
    rng = random.Random(9)
    checked = 0
    with mock.patch.object(compact, "solve_by_clients", _refuse):
        for seed in range(300):
            inst = random_instance(seed, rng.choice(["VRP", "LoadCVRP", "GasCVRP"]), n_max=7,
                                   weights=(1, 5), k_max=3)
            free = min(inst.k, len(inst.clients & inst.depots))
            r = len(inst.clients) - free - 1
            if r < 0:
                continue
            assert decide_weight_bound(inst, r) is False
            checked += 1
        loaded = 0
        for n in range(3, 9):
            g = Graph(n, tuple(Edge(0, i, 1) for i in range(1, n)))
            clients = list(range(1, n))
            for ell in range(1, 3):
                for k in range(0, len(clients)):
                    if k * ell < len(clients):
                        inst = VrpInstance(g, {0}, clients, k, "LoadCVRP", ell=ell,
                                           demands=dict.fromkeys(clients, 1))
                        assert decide_k_capacity(inst) is None
                        loaded += 1
    return checked > 100 and loaded > 20, f"{checked} weight-bound and {loaded} capacity rejections"


CRITERIA = [
    ("1 oracle equivalence, uncapacitated", c1_uncapacitated_equivalence),
    ("2 oracle equivalence, capacitated", c2_capacitated_equivalence),
    ("3 NTDM figure instance", c3_ntdm),
    ("4 bin packing figure instance", c4_binpacking),
    ("5 triangle packing round trip", c5_triangles),
    ("6 edge multiplicity counterexample", c6_multiplicity),
    ("7 generalized bin packing vs exhaustive", c7_bin_packing),
    ("8 partition algebra suite", c8_partitions),
    ("9 deciders reject without search", c9_deciders),
]


def run(name, check):
    start = time.perf_counter()
    try:
        ok, detail = check()
    except Exception as exc:  # a crash is a failure of the criterion
        ok, detail = False, f"{type(exc).__name__}: {exc}"
    line = f"{'PASS' if ok else 'FAIL'} criterion {name}: {detail} ({time.perf_counter() - start:.1f}s)"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("name, check", CRITERIA, ids=[n.split()[0] for n, _ in CRITERIA])
def test_criterion(name, check):
    ok, line = run(name, check)
    assert ok, line


if __name__ == "__main__":
    sys.exit(0 if all([run(n, c)[0] for n, c in CRITERIA]) else 1)
