"""Exact solvers for vehicle routing on graphs of small treewidth."""

from .compact import decide_k_capacity, decide_weight_bound, solve_by_clients
from .cvrp_dp import solve_cvrp_tw
from .errors import InstanceError, RoutingError, ScaleGuardError, UnsupportedVariantError
from .instance import (Edge, Graph, Routing, Solution, VrpInstance, Walk, emit_instance,
                       emit_routing, parse_instance, parse_routing, verify_routing)
from .oracle import oracle_cvrp, oracle_vrp
from .vrp_dp import solve_vrp_tw

__all__ = [
    "Edge", "Graph", "InstanceError", "Routing", "RoutingError", "ScaleGuardError", "Solution",
    "UnsupportedVariantError", "VrpInstance", "Walk", "decide_k_capacity", "decide_weight_bound",
    "emit_instance", "emit_routing", "oracle_cvrp", "oracle_vrp", "parse_instance",
    "parse_routing", "solve_by_clients", "solve_cvrp_tw", "solve_vrp_tw", "verify_routing",
]
