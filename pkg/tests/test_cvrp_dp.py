import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twvrp.compact import solve_by_clients
from twvrp.cvrp_dp import counters, reducible, run_cvrp_dp, solve_cvrp_tw, weight_ceiling
from twvrp.decomposition import heuristic_decompose, nicify
from twvrp.errors import UnsupportedVariantError
from twvrp.instance import Edge, Graph, VrpInstance, verify_routing
from twvrp.oracle import oracle_cvrp
from twvrp.reductions import random_instance
from twvrp.vrp_dp import solve_vrp_tw

CAPACITATED = ["LoadCVRP", "GasCVRP", "LoadGasCVRP"]
STAR = Graph(3, (Edge(0, 1, 1), Edge(0, 2, 1)))
# depot 0, hub 1, three clients behind the hub
BEHIND_HUB = Graph(5, (Edge(0, 1, 1), Edge(1, 2, 1), Edge(1, 3, 1), Edge(1, 4, 1)))


def star(k):
    return VrpInstance(STAR, {0}, {1, 2}, k, "LoadGasCVRP", ell=1, demands={1: 1, 2: 1}, g=2)


def test_star_examples():
    sol = solve_cvrp_tw(star(2))
    assert sol.weight == 4 and len(sol.routing.walks) == 2
    assert verify_routing(star(2), sol.routing).feasible
    assert solve_cvrp_tw(star(1)) is None


def test_reducible_examples():
    u, v = 1, 2
    s1 = ((u, v, 1, 2, False), (u, v, 1, 2, False))
    assert reducible(s1, ((u, u, 2, 4, False),))
    assert reducible(s1, s1)
    assert not reducible(s1, ((u, u, 2, 3, False),))
    assert not reducible(s1, ((u, u, 2, 4, True),))
    with_depot = ((u, v, 1, 2, True), (u, v, 0, 1, False))
    assert reducible(with_depot, ((u, u, 1, 3, True),))


def test_counters_split_by_depot():
    s, s_star = counters([(1, 2, 1, 0, False), (1, 2, 1, 0, False), (3, 3, 0, 0, True)])
    assert s[(1, 2, 1, 0)] == 2 and s_star[(3, 3, 0, 0)] == 1


def test_edge_used_more_than_twice_overall():
    inst = VrpInstance(BEHIND_HUB, {0}, {2, 3, 4}, 3, "LoadCVRP", ell=1,
                       demands={2: 1, 3: 1, 4: 1})
    sol = solve_cvrp_tw(inst)
    assert sol.weight == 12
    assert sum(w.edges.count(0) for w in sol.routing.walks) == 6
    for w in sol.routing.walks:
        assert max(w.edges.count(e) for e in set(w.edges)) <= 2
    assert verify_routing(inst, sol.routing).feasible


def test_two_triangles_with_cross_edges():
    edges = [Edge(0, 1, 1), Edge(1, 2, 1), Edge(0, 2, 1),
             Edge(3, 4, 1), Edge(4, 5, 1), Edge(3, 5, 1), Edge(2, 3, 1), Edge(0, 5, 1)]
    g = Graph(6, tuple(edges))
    for variant in CAPACITATED:
        kw = {"ell": 3, "demands": dict.fromkeys(range(6), 1)} if "Load" in variant else {}
        if "Gas" in variant:
            kw["g"] = 3
        inst = VrpInstance(g, range(6), range(6), 2, variant, r=6, **kw)
        sol = solve_cvrp_tw(inst)
        assert sol.weight == 6
        assert verify_routing(inst, sol.routing).feasible


def test_volume_bound():
    inst = VrpInstance(BEHIND_HUB, {0}, {2, 3, 4}, 1, "LoadCVRP", ell=2, demands={2: 1, 3: 1, 4: 1})
    assert solve_cvrp_tw(inst) is None


def test_rejects_uncapacitated_variants():
    inst = VrpInstance(STAR, {0}, {1}, 1)
    nd = nicify(heuristic_decompose(STAR), STAR, expand=False)
    with pytest.raises(UnsupportedVariantError):
        run_cvrp_dp(inst, nd)


def test_weight_ceiling():
    assert weight_ceiling(star(2)) == 4
    inst = VrpInstance(STAR, {0}, {1}, 3, "LoadCVRP", ell=1, demands={1: 1})
    assert weight_ceiling(inst) == 12


# oracle values, frozen
FROZEN = {("LoadCVRP", 5): 10, ("LoadCVRP", 20): 8, ("LoadCVRP", 26): 14,
          ("GasCVRP", 10): 6, ("GasCVRP", 202): 8,
          ("LoadGasCVRP", 103): 6, ("LoadGasCVRP", 112): 6}


@pytest.mark.parametrize("variant, seed", sorted(FROZEN))
def test_frozen_values(variant, seed):
    inst = random_instance(seed, variant, n_max=6, weights=(1, 3), tw2=True, connected=True)
    sol = solve_cvrp_tw(inst)
    assert sol.weight == FROZEN[(variant, seed)]
    assert verify_routing(inst, sol.routing).feasible


def _check_solution(inst, sol):
    report = verify_routing(inst, sol.routing)
    assert report.feasible and report.weight == sol.weight
    for w in sol.routing.walks:
        for e in set(w.edges):
            assert w.edges.count(e) <= 2


@settings(max_examples=90, deadline=None)
@given(st.integers(0, 1_000_000), st.sampled_from(CAPACITATED))
def test_matches_oracle_and_client_solver(seed, variant):
    inst = random_instance(seed, variant, n_max=6, weights=(1, 3), tw2=True)
    want = oracle_cvrp(inst)
    sol = solve_cvrp_tw(inst)
    assert (None if sol is None else sol.weight) == want
    other = solve_by_clients(inst)
    assert (None if other is None else other.weight) == want
    if sol is not None:
        _check_solution(inst, sol)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1_000_000), st.sampled_from(CAPACITATED))
def test_transitions_are_reducible(seed, variant):
    inst = random_instance(seed, variant, n_max=5, max_edges=6, weights=(1, 2), tw2=True)
    plain = solve_cvrp_tw(inst)
    checked = solve_cvrp_tw(inst, check_transitions=True)
    assert (plain is None) == (checked is None)
    if plain is not None:
        assert plain.weight == checked.weight


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1_000_000), st.sampled_from(CAPACITATED))
def test_stored_states_respect_the_capacities(seed, variant):
    inst = random_instance(seed, variant, n_max=5, max_edges=6, weights=(1, 2), tw2=True)
    nd = nicify(heuristic_decompose(inst.graph), inst.graph, expand=False)
    # any bound works for the invariants; the optimum keeps the table small
    table = run_cvrp_dp(inst, nd, bound=oracle_cvrp(inst) or 0)
    total = sum(inst.demand(x) for x in inst.clients) if inst.has_load else 0
    for cell in table.cells:
        for (x, c, items), (w, _) in cell.items():
            assert c <= inst.k and x <= inst.clients
            assert list(items) == sorted(items)
            assert sum(it[2] for it in items) <= total
            for a, b, lam, ww, dep in items:
                assert a <= b
                assert not inst.has_load or lam <= inst.ell
                assert not inst.has_gas or ww <= inst.g


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1_000_000))
def test_loose_capacities_give_the_vrp_optimum(seed):
    base = random_instance(seed, "VRP", n_max=6, weights=(1, 3), tw2=True)
    total = 2 * base.k * sum(e.weight for e in base.graph.edges)
    want = solve_vrp_tw(base)
    clients = sorted(base.clients)
    inst = VrpInstance(base.graph, base.depots, clients, base.k, "LoadGasCVRP",
                       ell=len(clients) or 1, demands=dict.fromkeys(clients, 1), g=total)
    got = solve_cvrp_tw(inst)
    assert (None if got is None else got.weight) == (None if want is None else want.weight)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 1_000_000), st.sampled_from(CAPACITATED))
def test_failed_run_reports_a_lower_bound(seed, variant):
    inst = random_instance(seed, variant, n_max=5, max_edges=6, weights=(1, 3), tw2=True,
                           connected=True, k_min=1)
    best = oracle_cvrp(inst)
    if not best:
        return
    nd = nicify(heuristic_decompose(inst.graph), inst.graph, expand=False)
    for bound in range(best):
        table = run_cvrp_dp(inst, nd, bound=bound)
        assert not table.root_weights()
        assert bound < table.dropped <= best
