"""Command-line front end: ``dotalg <command> FILE [options]``.

Input files are DPP programs, JSON diagrams or hierarchies, conjunctive
queries (``.cq``) or JSON attack trees.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import applications as apps
from .algebraise import algebrise_hierarchical, algebrise_report, pipeline_stats
from .circuit import compile_circuit
from .decomposition import (branch_decomposition_to_dot, branch_decomposition_to_json, dependency_hypergraph,
                            graph_to_dot, hypergraph_to_dot, primal_graph, tree_decomposition_to_dot,
                            tree_decomposition_to_json, validate_decomposition)
from .diagrams import (AND, NOT, OBSERVE, OR, DotDiagram, HierarchicalDotDiagram, Signature, diagram_from_json,
                       diagram_to_json, flip_probability, hierarchy_from_json, hierarchy_to_json, single_node,
                       unfold, validate)
from .errors import DotAlgError, ParseError, PreconditionError, UnresolvedAcceptance
from .evaluate import interpret_term
from .frontend import load_program, pretty
from .inference import DEFAULT_PRECISION_CAP, infer
from .oracle import oracle_semantics
from .semiring import (INF, Interpretation, Matrix, boolean, random_interpretation, random_prime_field_for,
                       semiring_by_name, substochastic, tropical)
from .terms import dag_size, term_to_json, width

CORE_SYMBOLS = {AND, OR, NOT, OBSERVE}
DEFAULT_SEMIRING = {"query": "bool", "attack": "tropical"}


@dataclass
class Workload:
    """What a command operates on: always a hierarchy, plus the query or
    attack tree it came from when there is one."""

    kind: str
    h: HierarchicalDotDiagram
    query: apps.ConjunctiveQuery | None = None
    tree: apps.AttackTree | None = None


def _signature_of(f: DotDiagram) -> Signature:
    return Signature(frozenset(f.sorts), f.symbol_types())


def load_workload(path: str, entry: str | None = None) -> Workload:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    if path.endswith(".cq"):
        q = apps.parse_query(text)
        f = apps.query_to_diagram(q)
        return Workload("query", single_node(f, _signature_of(f), q.name), query=q)
    if not path.endswith(".json"):
        return Workload("program", load_program(text, entry))
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise ParseError("expected a JSON object")
    if "base" in data:
        return Workload("hierarchy", hierarchy_from_json(data))
    if "assignments" in data:
        f = diagram_from_json(data)
        return Workload("diagram", single_node(f, _signature_of(f)))
    if "root" in data and "nodes" in data:
        tree = apps.load_attack_tree(text)
        f = apps.attack_tree_to_diagram(tree)
        return Workload("attack", single_node(f, _signature_of(f), tree.root), tree=tree)
    raise ParseError("unrecognised JSON input: expected a diagram, a hierarchy or an attack tree")


def interpretation_for(w: Workload, semiring: str, seed: int) -> Interpretation:
    """Programs over the Boolean core get their standard reading in each
    semiring; other signatures get seeded random matrices."""
    if w.kind == "attack":
        if semiring != "tropical":
            raise PreconditionError("attack trees are evaluated over the tropical semiring")
        return apps.attack_interpretation(w.tree.costs)
    types = dict(w.h.base.symbols)
    core = all(s in CORE_SYMBOLS or flip_probability(s) is not None for s in types)
    if core and semiring in ("rational", "bool", "tropical"):
        return {"rational": substochastic, "bool": boolean, "tropical": tropical}[semiring]()
    sr = semiring_by_name(semiring)
    dims = dict.fromkeys(w.h.base.sorts, 2)
    if sr.modulus:
        return random_prime_field_for(types, seed, dims)
    return random_interpretation(sr, types, seed, dims)


def _format_element(x) -> str:
    if x == INF:
        return "inf"
    if isinstance(x, Fraction):
        return str(x)
    return str(x).lower() if isinstance(x, bool) else str(x)


def _matrix_json(m: Matrix) -> dict:
    sr = m.semiring
    return {"semiring": sr.name, "rows": m.rows, "cols": m.cols,
            "data": [[sr.to_json(x) for x in row] for row in m.to_rows()]}


def _matrix_text(m: Matrix) -> str:
    return "\n".join(" ".join(_format_element(x) for x in row) for row in m.to_rows())


def _emit(args, data, text: str) -> None:
    print(json.dumps(data, indent=2) if args.json else text)


def _root_body(w: Workload) -> DotDiagram:
    return w.h.nodes[w.h.root].body


def cmd_parse(args, w: Workload):
    if w.kind == "query":
        body = diagram_to_json(_root_body(w))
        _emit(args, body, json.dumps(body, indent=2))
    elif w.kind == "program":
        _emit(args, hierarchy_to_json(w.h), pretty(w.h))
    else:
        data = hierarchy_to_json(w.h) if w.kind == "hierarchy" else diagram_to_json(_root_body(w))
        print(json.dumps(data, indent=2))
    diagnostics = validate(w.h)
    for d in diagnostics:
        print(f"diagnostic: {d}", file=sys.stderr)
    return 3 if diagnostics else 0


def cmd_graph(args, w: Workload):
    f = _root_body(w)
    if args.hypergraph:
        H = dependency_hypergraph(f)
        data = {"vertices": list(H.vertices), "edges": [sorted(e) for e in H.edges], "labels": list(H.labels)}
        _emit(args, data, hypergraph_to_dot(H))
    else:
        G = primal_graph(f)
        data = {"vertices": list(G.vertices), "edges": sorted(sorted(e) for e in G.edges)}
        _emit(args, data, graph_to_dot(G))


def cmd_decompose(args, w: Workload):
    f = _root_body(w)
    rep = algebrise_report(f, args.mode, always_decompose=True)
    T, B = rep.tree, rep.branch
    G, H = primal_graph(f), dependency_hypergraph(f)
    diagnostics = [str(d) for d in validate_decomposition(T, G) + validate_decomposition(B, H)]
    if args.dot:
        print(tree_decomposition_to_dot(T))
        print(branch_decomposition_to_dot(B, H))
    else:
        data = {"treewidth": T.width, "branch_width": rep.branch_width,
                "tree": tree_decomposition_to_json(T), "branch": branch_decomposition_to_json(B, H),
                "diagnostics": diagnostics}
        _emit(args, data, f"treewidth {T.width}\nbranch width {rep.branch_width}\n"
                          f"diagnostics {len(diagnostics)}")
    return 3 if diagnostics else 0


def cmd_algebraise(args, w: Workload):
    t = algebrise_hierarchical(w.h, args.mode)
    report = {"width": width(t), "dag_size": dag_size(t)}
    if not args.json:
        print(f"width {report['width']}\ndag_size {report['dag_size']}")
        return
    stages = {}
    for v in w.h.topological():
        rep = algebrise_report(w.h.nodes[v].body, args.mode, always_decompose=True)
        stages[v] = {
            "tree": tree_decomposition_to_json(rep.tree),
            "branch": branch_decomposition_to_json(rep.branch),
            "branch_width": rep.branch_width,
            "refactored": hierarchy_to_json(rep.hierarchy) if rep.hierarchy else None,
            "term": term_to_json(rep.term),
        }
    print(json.dumps({**report, "stages": stages, "term": term_to_json(t)}, indent=2))


def cmd_compile(args, w: Workload):
    interp = interpretation_for(w, args.semiring, args.seed)
    C = compile_circuit(algebrise_hierarchical(w.h, args.mode), interp)
    print(json.dumps(C.to_json(), indent=None if args.compact else 2))


def cmd_infer(args, w: Workload):
    result = infer(w.h, args.digits, args.method, args.precision_cap, args.mode)
    _emit(args, result.to_json(), str(result))


def cmd_eval(args, w: Workload):
    if w.kind == "query":
        if args.instance is None:
            raise PreconditionError("evaluating a query needs --instance")
        if args.semiring != "bool":
            raise PreconditionError("queries are evaluated over the Boolean semiring")
        A = apps.load_instance(Path(args.instance).read_text())
        answers = apps.evaluate_query(w.query, A, args.mode)
        _emit(args, {"free": list(w.query.free), "answers": sorted(list(map(list, answers)))},
              apps.format_answers(w.query, A, answers))
        return
    if w.kind == "attack":
        cost = apps.attack_min_cost(w.tree, args.mode)
        _emit(args, {"min_cost": "inf" if cost == INF else cost}, _format_element(cost))
        return
    m = interpret_term(algebrise_hierarchical(w.h, args.mode), interpretation_for(w, args.semiring, args.seed))
    _emit(args, _matrix_json(m), _matrix_text(m))


def cmd_oracle(args, w: Workload):
    if w.kind == "query":
        if args.instance is None:
            raise PreconditionError("evaluating a query needs --instance")
        A = apps.load_instance(Path(args.instance).read_text())
        answers = apps.naive_join(w.query, A)
        _emit(args, {"free": list(w.query.free), "answers": sorted(list(map(list, answers)))},
              apps.format_answers(w.query, A, answers))
        return
    if w.kind == "attack":
        cost = apps.brute_force_min_cost(w.tree)
        _emit(args, {"min_cost": "inf" if cost == INF else cost}, _format_element(cost))
        return
    f = unfold(w.h, args.max_unfold)
    m = oracle_semantics(f, interpretation_for(w, args.semiring, args.seed))
    _emit(args, _matrix_json(m), _matrix_text(m))


def cmd_stats(args, w: Workload):
    s = pipeline_stats(w.h, args.mode)
    lines = [f"k {s.k}  L {s.L}  M {s.M}  N {s.N}",
             f"term width {s.term_width}  dag_size {s.term_dag_size}",
             f"{'node':<20} {'assign':>6} {'tw':>4} {'bw':>4} {'width':>6} {'12bw':>5} {'dag':>7}"]
    for v, r in s.nodes.items():
        lines.append(f"{v:<20} {r.assignments:>6} {r.treewidth:>4} {r.branch_width:>4} "
                     f"{r.term_width:>6} {12 * r.branch_width:>5} {r.term_dag_size:>7}")
    _emit(args, s.to_json(), "\n".join(lines))


COMMANDS = {
    "parse": (cmd_parse, "check a program and print it (or its hierarchy with --json)"),
    "graph": (cmd_graph, "primal graph or dependency hypergraph as DOT"),
    "decompose": (cmd_decompose, "tree and branch decompositions"),
    "algebraise": (cmd_algebraise, "term width and DAG size; --json dumps every stage"),
    "compile": (cmd_compile, "arithmetic circuit as JSON"),
    "infer": (cmd_infer, "probability of returning true to --digits binary digits"),
    "eval": (cmd_eval, "matrix semantics through the pipeline"),
    "oracle": (cmd_oracle, "matrix semantics by brute force"),
    "stats": (cmd_stats, "hierarchy parameters and achieved widths"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dotalg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file")
        p.add_argument("--fn", help="entry function of a program (default: the last one)")
        p.add_argument("--mode", choices=("heuristic", "exact"), default="heuristic",
                       help="tree decomposition search")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--seed", type=int, default=0, help="seed for random interpretations")
        if name in ("graph", "decompose"):
            p.add_argument("--dot", action="store_true", help="DOT output")
        if name == "graph":
            p.add_argument("--hypergraph", action="store_true", help="dependency hypergraph instead")
        if name in ("compile", "eval", "oracle"):
            p.add_argument("--semiring", choices=("rational", "bool", "tropical", "prime"),
                           help="default: bool for queries, tropical for attack trees, else rational")
        if name == "compile":
            p.add_argument("--compact", action="store_true", help="single-line JSON")
        if name in ("eval", "oracle"):
            p.add_argument("--instance", help="CSV instance for a conjunctive query")
        if name == "oracle":
            p.add_argument("--max-unfold", type=int, default=10**5, help="assignment cap when unfolding")
        if name == "infer":
            p.add_argument("--digits", type=int, required=True)
            p.add_argument("--method", choices=("auto", "exact", "truncated"), default="auto")
            p.add_argument("--precision-cap", type=int, default=DEFAULT_PRECISION_CAP)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        w = load_workload(args.file, args.fn)
        if hasattr(args, "semiring") and args.semiring is None:
            args.semiring = DEFAULT_SEMIRING.get(w.kind, "rational")
        status = COMMANDS[args.command][0](args, w)
    except UnresolvedAcceptance as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                          "p_acc_upper_bound": exc.upper_bound.to_json()}), file=sys.stderr)
        return exc.exit_code
    except DotAlgError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return exc.exit_code
    return status or 0


if __name__ == "__main__":
    sys.exit(main())
