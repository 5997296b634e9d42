"""Command line: solve, verify, gen and decompose.

Exit codes: 0 success (an infeasible instance is a normal result), 1 a
routing failed verification, 2 a malformed or invalid input, 4 an exact
algorithm refused the input size.  Setting ``TWVRP_SCALE_GUARD=off`` lifts
the size caps -- here be exponential dragons.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional

from . import compact, cvrp_dp, oracle, reductions, vrp_dp
from .binpacking import BinPackingInstance, solve_plain
from .decomposition import emit_td, heuristic_decompose, parse_td, validate
from .errors import (InstanceError, RoutingError, ScaleGuardError, UnsupportedVariantError,
                     scale_guard_enabled)
from .instance import (CAPACITATED, VARIANTS, Edge, Graph, Solution, VrpInstance,
                       contract_zero_edges, emit_document, emit_instance, parse_instance,
                       parse_routing, routing_to_dict, verify_routing)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_SCALE = 0, 1, 2, 4

VRP_WIDTH_CAP = 6
CVRP_WIDTH_CAP = 3
ORACLE_CVRP_CLIENT_CAP = 6


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: Optional[str], text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CliError(f"expected comma-separated integers, got {text!r}") from None


# ---------------------------------------------------------------------------
# solving


def _decomposition(inst: VrpInstance, td_path: Optional[str]):
    if td_path is None:
        return heuristic_decompose(inst.graph)
    td = parse_td(_read(td_path))
    ok, problems = validate(td, inst.graph)
    if not ok:
        raise CliError("invalid tree decomposition: " + "; ".join(problems))
    return td


def _run_tw_dp(inst: VrpInstance, td) -> Optional[Solution]:
    capacitated = inst.variant in CAPACITATED
    cap = CVRP_WIDTH_CAP if capacitated else VRP_WIDTH_CAP
    if scale_guard_enabled() and td.width > cap:
        raise ScaleGuardError(f"decomposition width {td.width} exceeds the tw-dp cap {cap}")
    if capacitated:
        return cvrp_dp.solve_cvrp_tw(inst, td)
    return vrp_dp.solve_vrp_tw(inst, td)


def _run_oracle(inst: VrpInstance) -> Optional[Solution]:
    if inst.variant in ("VRP", "EVRP"):
        return oracle.oracle_vrp_solution(inst)
    return oracle.oracle_cvrp_solution(inst)


def _pick_auto(inst: VrpInstance, td) -> str:
    if inst.variant not in CAPACITATED:
        return "tw-dp"
    if not scale_guard_enabled() or td.width <= CVRP_WIDTH_CAP:
        return "tw-dp"
    if len(inst.clients) <= compact.DEFAULT_CLIENT_CAP:
        return "clients"
    if len(inst.clients) <= ORACLE_CVRP_CLIENT_CAP and inst.k <= 3:
        return "oracle"
    raise ScaleGuardError("no applicable exact algorithm at this scale")


def run_solver(inst: VrpInstance, algorithm: str = "auto", td_path: Optional[str] = None):
    """Returns (solution or None, algorithm actually used)."""
    td = _decomposition(inst, td_path) if algorithm in ("auto", "tw-dp") else None
    if algorithm == "auto":
        algorithm = _pick_auto(inst, td)
    if algorithm == "tw-dp":
        return _run_tw_dp(inst, td), algorithm
    if algorithm == "clients":
        return compact.solve_by_clients(inst), algorithm
    if algorithm == "oracle":
        return _run_oracle(inst), algorithm
    raise CliError(f"unknown algorithm {algorithm!r}")


def _bound_rejects(inst: VrpInstance, r: int) -> bool:
    """The client-count test of decide_weight_bound, where it is sound."""
    if inst.variant == "EVRP":
        return False
    if inst.variant in ("VRP", "GasCVRP"):
        return compact.client_lower_bound_rejects(contract_zero_edges(inst), r)
    if any(e.weight == 0 for e in inst.graph.edges):
        return False
    return compact.client_lower_bound_rejects(inst, r)


def _solve_document(sol, algorithm, decide):
    doc = {"status": "infeasible" if sol is None else "optimal", "algorithm": algorithm}
    if decide is not None:
        doc["r"] = decide
        doc["decision"] = "yes" if sol is not None and sol.weight <= decide else "no"
    doc["weight"] = None if sol is None else sol.weight
    if sol is not None:
        doc.update(routing_to_dict(sol.routing))
    return doc


def _human(doc: dict) -> str:
    if "decision" in doc:
        return doc["decision"] + "\n"
    lines = [f"status: {doc['status']}", f"algorithm: {doc['algorithm']}"]
    if doc["weight"] is not None:
        lines.append(f"weight: {doc['weight']}")
        for i, walk in enumerate(doc["walks"]):
            lines.append(f"walk {i}: " + " ".join(map(str, walk["vertices"])))
    if "wall_time" in doc:
        lines.append(f"wall time: {doc['wall_time']:.3f}s")
    return "\n".join(lines) + "\n"


def _solve_binpacking(args) -> int:
    raw = _read(args.instance)
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict) or not all(f in doc for f in ("items", "B", "k")):
        raise CliError("bin packing document needs fields items, B and k")
    bp = BinPackingInstance(tuple(doc["items"]), doc["B"], doc["k"])
    bins = solve_plain(bp)
    out = {"status": "infeasible" if bins is None else "feasible"}
    if bins is not None:
        out["bins"] = bins
    if args.out:
        _write(args.out, emit_document(out))
    _write(None, f"status: {out['status']}\n" + "".join(
        f"bin {i}: {' '.join(map(str, b))}\n" for i, b in enumerate(out.get("bins", []))))
    return EXIT_OK


def cmd_solve(args) -> int:
    if args.variant == "binpacking":
        return _solve_binpacking(args)
    inst = parse_instance(_read(args.instance))
    if args.variant is not None and args.variant != inst.variant:
        raise CliError(f"--variant {args.variant} but the instance is {inst.variant}")
    start = time.perf_counter()
    if args.decide is not None and _bound_rejects(inst, args.decide):
        sol, algorithm = None, "client-count bound"
        doc = _solve_document(sol, algorithm, args.decide)
        doc["status"] = "rejected"
        del doc["weight"]
    else:
        sol, algorithm = run_solver(inst, args.algorithm, args.td)
        doc = _solve_document(sol, algorithm, args.decide)
    if args.timing:
        doc["wall_time"] = round(time.perf_counter() - start, 6)
    if args.out:
        _write(args.out, emit_document(doc))
    _write(None, _human(doc))
    return EXIT_OK


def cmd_verify(args) -> int:
    inst = parse_instance(_read(args.instance))
    routing = parse_routing(_read(args.routing), inst.graph)
    report = verify_routing(inst, routing)
    if report.feasible:
        print(f"feasible, weight {report.weight}")
        return EXIT_OK
    print(f"infeasible, weight {report.weight}")
    for v in report.violations:
        print(f"  {v}")
    return EXIT_INFEASIBLE


def _graph_from_file(path: str) -> Graph:
    raw = _read(path)
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict) or "n" not in doc or "edges" not in doc:
        raise CliError("graph document needs fields n and edges")
    try:
        edges = tuple(Edge(e[0], e[1], e[2] if len(e) > 2 else 1, e[3] if len(e) > 3 else 1)
                      for e in doc["edges"])
    except (TypeError, IndexError):
        raise CliError("edges must be arrays [u, v] or [u, v, w] or [u, v, w, mult]") from None
    return Graph(doc["n"], edges)


def cmd_gen(args) -> int:
    src = args.source
    if src == "binpacking":
        if args.input:
            doc = json.loads(_read(args.input))
            sizes, capacity, bins = doc["items"], doc["B"], doc["k"]
        else:
            if args.sizes is None or args.capacity is None or args.bins is None:
                raise CliError("binpacking needs --sizes, --capacity and --bins (or --input)")
            sizes, capacity, bins = _int_list(args.sizes), args.capacity, args.bins
        bp = BinPackingInstance(tuple(sizes), capacity, bins)
        inst = reductions.from_binpacking(bp, args.variant or "LoadCVRP").instance
    elif src == "triangle":
        if args.graph is None:
            raise CliError("triangle needs --graph FILE")
        inst = reductions.from_trianglepacking(_graph_from_file(args.graph), args.variant or "LoadCVRP")
    elif src == "ntdm":
        if None in (args.x, args.y, args.z, args.b):
            raise CliError("ntdm needs --x, --y, --z and --b")
        inst = reductions.from_ntdm(_int_list(args.x), _int_list(args.y), _int_list(args.z),
                                    args.b, args.mode).instance
    else:
        inst = reductions.random_instance(args.seed, args.variant or "VRP", n_max=args.n_max,
                                          max_edges=args.max_edges, tw2=args.tw2,
                                          connected=args.connected)
    _write(args.out, emit_instance(inst))
    return EXIT_OK


def cmd_decompose(args) -> int:
    inst = parse_instance(_read(args.instance))
    _write(args.out, emit_td(heuristic_decompose(inst.graph)))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twvrp", description="Exact vehicle routing solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--algorithm", choices=["auto", "tw-dp", "clients", "oracle"], default="auto")
    p.add_argument("--variant", choices=list(VARIANTS) + ["binpacking"],
                   help="expected variant; 'binpacking' reads a plain bin packing document")
    p.add_argument("--td", help="tree decomposition (.td) of the instance graph")
    p.add_argument("--decide", type=int, metavar="R", help="answer yes/no for weight bound R")
    p.add_argument("--out", help="write the result document here")
    p.add_argument("--threads", type=int, default=1,
                   help="accepted for compatibility; the solvers run single-threaded")
    p.add_argument("--timing", action="store_true", help="record wall time in the result")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a routing against an instance")
    p.add_argument("--instance", required=True)
    p.add_argument("--routing", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--from", dest="source", required=True,
                   choices=["binpacking", "triangle", "ntdm", "random"])
    p.add_argument("--variant", choices=list(VARIANTS))
    p.add_argument("--out")
    p.add_argument("--input", help="bin packing document with items, B and k")
    p.add_argument("--sizes", help="item sizes, comma separated")
    p.add_argument("--capacity", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--graph", help="graph document with n and edges")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--z")
    p.add_argument("--b", type=int)
    p.add_argument("--mode", choices=["demand", "gas"], default="demand")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", type=int, default=6)
    p.add_argument("--max-edges", type=int, default=10)
    p.add_argument("--tw2", action="store_true", help="keep the graph inside a 2-tree")
    p.add_argument("--connected", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("decompose", help="emit a heuristic tree decomposition")
    p.add_argument("--instance", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScaleGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (InstanceError, UnsupportedVariantError, RoutingError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (KeyError, TypeError) as exc:
        print(f"error: malformed input ({exc})", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
