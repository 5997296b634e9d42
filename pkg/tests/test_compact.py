import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twvrp import compact
from twvrp.compact import (apsp, capacity_rejects, client_lower_bound_rejects,
                           decide_k_capacity, decide_weight_bound, solve_by_clients)
from twvrp.errors import ScaleGuardError, UnsupportedVariantError
from twvrp.instance import Edge, Graph, VrpInstance, verify_routing
from twvrp.oracle import oracle_cvrp, oracle_vrp
from twvrp.reductions import random_instance

K3 = Graph(3, (Edge(0, 1, 1), Edge(1, 2, 1), Edge(0, 2, 1)))
STAR = Graph(3, (Edge(0, 1, 1), Edge(0, 2, 1)))
PATH6 = Graph(6, tuple(Edge(i, i + 1, 1) for i in range(5)))


def no_search(*args, **kwargs):
    raise AssertionError("search was invoked")


def test_apsp_examples():
    t = apsp(K3)
    assert all(t.d(a, b) == 1 for a in range(3) for b in range(3) if a != b)
    t = apsp(Graph(3, (Edge(0, 1, 1),)))
    assert t.d(0, 2) == math.inf
    t = apsp(Graph(3, (Edge(0, 1, 2), Edge(1, 2, 3))))
    assert t.d(0, 2) == 5
    assert t.walk(0, 2) == ([0, 1, 2], [0, 1])


def test_star_tour():
    inst = VrpInstance(STAR, {0}, {1, 2}, 1)
    sol = solve_by_clients(inst)
    assert sol.weight == 4
    assert [w.vertices for w in sol.routing.walks] in ([(0, 1, 0, 2, 0)], [(0, 2, 0, 1, 0)])
    assert solve_by_clients(VrpInstance(STAR, {0}, (), 1)).weight == 0


def test_gas_star_needs_two_walks():
    inst = VrpInstance(STAR, {0}, {1, 2}, 2, "GasCVRP", g=2)
    sol = solve_by_clients(inst)
    assert sol.weight == 4 and len(sol.routing.walks) == 2
    assert verify_routing(inst, sol.routing).feasible
    assert solve_by_clients(VrpInstance(STAR, {0}, {1, 2}, 1, "GasCVRP", g=2)) is None


def test_client_cap_and_evrp():
    many = VrpInstance(Graph(12, ()), range(12), range(12), 12)
    with pytest.raises(ScaleGuardError):
        solve_by_clients(many)
    ev = VrpInstance(STAR, {0}, {1}, 1, "EVRP", kappa=(1, 1))
    with pytest.raises(UnsupportedVariantError):
        solve_by_clients(ev)


def test_decide_weight_bound_examples(monkeypatch):
    five = VrpInstance(PATH6, {0}, {1, 2, 3, 4, 5}, 2)
    monkeypatch.setattr(compact, "solve_by_clients", no_search)
    assert client_lower_bound_rejects(five, 4)
    assert decide_weight_bound(five, 4) is False
    monkeypatch.undo()
    assert decide_weight_bound(VrpInstance(K3, {0}, {0, 1, 2}, 1), 3) is True
    assert decide_weight_bound(VrpInstance(K3, {0}, {0, 1, 2}, 1), 2) is False
    zero = Graph(2, (Edge(0, 1, 0),))
    load = VrpInstance(zero, {0}, {1}, 1, "LoadCVRP", ell=1, demands={1: 1})
    with pytest.raises(UnsupportedVariantError):
        decide_weight_bound(load, 3)


def test_depot_clients_are_free():
    inst = VrpInstance(Graph(3, ()), {0, 1, 2}, {0, 1, 2}, 3)
    assert not client_lower_bound_rejects(inst, 0)
    assert decide_weight_bound(inst, 0)


def test_decide_k_capacity_examples(monkeypatch):
    three = VrpInstance(PATH6, {0}, {1, 2, 3}, 1, "LoadCVRP", ell=2, demands={1: 1, 2: 1, 3: 1})
    monkeypatch.setattr(compact, "solve_by_clients", no_search)
    assert capacity_rejects(three)
    assert decide_k_capacity(three) is None
    gas = VrpInstance(PATH6, {0}, {1, 2, 3}, 2, "GasCVRP", g=1)
    assert decide_k_capacity(gas) is None
    monkeypatch.undo()
    ok = VrpInstance(PATH6, {0}, {1, 2, 3}, 2, "LoadCVRP", ell=2, demands={1: 1, 2: 1, 3: 1})
    assert decide_k_capacity(ok).weight == oracle_cvrp(ok) == 8
    with pytest.raises(UnsupportedVariantError):
        decide_k_capacity(VrpInstance(PATH6, {0}, {1}, 1))


def test_gas_bound_counts_contracted_clients():
    # clients 1 and 2 are joined by a zero edge and count once
    g = Graph(3, (Edge(0, 1, 1), Edge(1, 2, 0)))
    inst = VrpInstance(g, {0}, {1, 2}, 1, "GasCVRP", g=2)
    assert not capacity_rejects(inst)
    assert decide_k_capacity(inst).weight == 2


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 1_000_000), st.sampled_from(["VRP", "LoadCVRP", "GasCVRP", "LoadGasCVRP"]))
def test_matches_oracles(seed, variant):
    inst = random_instance(seed, variant, n_max=6, max_edges=9)
    want = oracle_vrp(inst) if variant == "VRP" else oracle_cvrp(inst)
    sol = solve_by_clients(inst)
    assert (None if sol is None else sol.weight) == want
    if sol is not None:
        report = verify_routing(inst, sol.routing)
        assert report.feasible and report.weight == want


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 1_000_000), st.integers(0, 20))
def test_decide_weight_bound_agrees_with_optimum(seed, r):
    inst = random_instance(seed, "VRP", n_max=6, max_edges=9, weights=(0, 3))
    want = oracle_vrp(inst)
    assert decide_weight_bound(inst, r) == (want is not None and want <= r)
