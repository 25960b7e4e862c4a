"""Seeded generators for diagrams, programs, circuits, queries and attack
trees, plus a replayable seed corpus and reproducer dumps.

Everything here is deterministic in its seed.  The brute-force oracle lives in
:mod:`dotalg.oracle` and shares no code with the evaluation pipeline.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .applications import AttackTree, Atom, ConjunctiveQuery, RelationalInstance
from .circuit import CONST, PLUS, TIMES, ArithmeticCircuit
from .diagrams import (BOOL, Assignment, CallNode, DotDiagram, HierarchicalDotDiagram, Signature,
                       diagram_to_json, hierarchy_to_json, single_node, unfold)
from .errors import InvalidInput
from .frontend import BinOp, Call, Flip, Function, Let, Not, Observe, Program, Var, desugar
from .oracle import oracle_semantics
from .semiring import BOOLEAN, PRIME61, RATIONAL, TROPICAL, random_interpretation, substochastic

__all__ = [
    "oracle_semantics", "random_diagram", "random_hierarchy", "random_program", "random_circuit",
    "random_query", "random_instance", "random_attack_tree", "corpus_instance", "load_corpus",
    "minimise", "dump_reproducer", "SORT_DIMS", "SEMIRINGS",
]

SORT_DIMS = {"B": 2, "C": 3}
SEMIRINGS = (RATIONAL, BOOLEAN, TROPICAL, PRIME61)
FLIP_CHOICES = (Fraction(1, 2), Fraction(1, 3), Fraction(1, 4), Fraction(1, 10), Fraction(3, 4),
                Fraction(0), Fraction(1))


def _compact(sorts, assignments, inputs, outputs) -> DotDiagram:
    """Drop variables nobody mentions and renumber the rest."""
    used = dict.fromkeys(v for a in assignments for v in a.ins + a.outs)
    used.update(dict.fromkeys(inputs))
    used.update(dict.fromkeys(outputs))
    index = {v: i for i, v in enumerate(sorted(used))}
    return DotDiagram(
        tuple(sorts[v] for v in sorted(used)),
        tuple(a.mapped(index.__getitem__) for a in assignments),
        tuple(index[v] for v in inputs),
        tuple(index[v] for v in outputs),
    )


def random_diagram(seed: int, num_vars: int | None = None, num_assignments: int | None = None,
                   max_arity: int = 2, max_interface: int = 3, sorts: Sequence[str] = ("B", "C"),
                   duplicates: bool = True, symbols: dict | None = None,
                   rng: random.Random | None = None, prefix: str = "") -> DotDiagram:
    """A random diagram whose every variable is mentioned.

    ``symbols`` maps extra symbol names to their types; assignments use them
    when the sorts fit.  With ``duplicates`` interface and argument lists may
    repeat a variable.
    """
    rng = rng or random.Random(seed)
    n = rng.randint(1, 6) if num_vars is None else num_vars
    m = rng.randint(0, 6) if num_assignments is None else num_assignments
    var_sorts = [rng.choice(sorts) for _ in range(n)]

    def pick(k: int) -> tuple[int, ...]:
        if n == 0:
            return ()
        if duplicates:
            return tuple(rng.randrange(n) for _ in range(k))
        return tuple(rng.sample(range(n), min(k, n)))

    known = dict(symbols or {})
    assignments = []
    for i in range(m):
        reuse = [s for s in known if rng.random() < 0.3]
        if reuse and n:
            sym = rng.choice(reuse)
            dom, cod = known[sym]
            by_sort = {s: [v for v in range(n) if var_sorts[v] == s] for s in set(dom + cod)}
            if all(by_sort.values()):
                ins = tuple(rng.choice(by_sort[s]) for s in dom)
                outs = tuple(rng.choice(by_sort[s]) for s in cod)
                assignments.append(Assignment(outs, sym, ins))
                continue
        ins, outs = pick(rng.randint(0, max_arity)), pick(rng.randint(0, max_arity))
        sym = f"{prefix}g{i}"
        while sym in known:
            sym += "'"
        known[sym] = (tuple(var_sorts[v] for v in ins), tuple(var_sorts[v] for v in outs))
        assignments.append(Assignment(outs, sym, ins))
    inputs = pick(rng.randint(0, max_interface))
    outputs = pick(rng.randint(0, max_interface))
    return _compact(var_sorts, assignments, inputs, outputs)


def random_hierarchy(seed: int, num_nodes: int | None = None, max_unfolded_vars: int = 12,
                     sorts: Sequence[str] = ("B", "C")) -> HierarchicalDotDiagram:
    """Random call DAG: node ``k`` may call nodes ``0..k-1``; the root is the
    last node.  Retries until the unfolded diagram has at most
    ``max_unfolded_vars`` variables."""
    rng = random.Random(seed)
    while True:
        count = rng.randint(1, 3) if num_nodes is None else num_nodes
        bodies: list[DotDiagram] = []
        for k in range(count):
            callable_ = {f"call{j}": (bodies[j].dom, bodies[j].cod) for j in range(k)}
            bodies.append(random_diagram(0, rng.randint(1, 4), rng.randint(0, 3), sorts=sorts,
                                         symbols=callable_, rng=rng, prefix=f"s{k}_"))
        nodes = {}
        types = {}
        for k, body in enumerate(bodies):
            local = {}
            for sym, ty in body.symbol_types().items():
                if sym.startswith("call"):
                    local[sym] = ty
                else:
                    types[sym] = ty
            nodes[f"n{k}"] = CallNode(body, local, {c: "n" + c[4:] for c in local})
        root = f"n{count - 1}"
        h = HierarchicalDotDiagram(root, nodes, Signature(frozenset(sorts), types))
        reachable = set(h.topological())
        h = HierarchicalDotDiagram(root, {v: nodes[v] for v in nodes if v in reachable}, h.base)
        if unfold(h).num_vars <= max_unfolded_vars:
            return h


def _random_expr(rng: random.Random, scope: list[str], callables: list[Function], depth: int):
    roll = rng.random()
    if depth <= 0 or roll < 0.3:
        if scope and rng.random() < 0.7:
            return Var(rng.choice(scope))
        return Flip(rng.choice(FLIP_CHOICES))
    single = [f for f in callables if len(f.returns) == 1]
    if single and roll < 0.45:
        f = rng.choice(single)
        return Call(f.name, tuple(_random_expr(rng, scope, [], 0) for _ in f.params))
    if roll < 0.6:
        return Not(_random_expr(rng, scope, callables, depth - 1))
    op = "and" if rng.random() < 0.5 else "or"
    return BinOp(op, _random_expr(rng, scope, callables, depth - 1), _random_expr(rng, scope, callables, depth - 1))


def random_program_ast(rng: random.Random, num_functions: int, observe_density: float = 0.25,
                       max_lets: int = 3) -> Program:
    functions: list[Function] = []
    for k in range(num_functions):
        entry = k == num_functions - 1
        params = () if entry else tuple(f"a{i}" for i in range(rng.randint(0, 2)))
        scope = list(params)
        body = []
        for i in range(rng.randint(1, max_lets)):
            multi = [f for f in functions if len(f.returns) > 1]
            if multi and rng.random() < 0.2:
                f = rng.choice(multi)
                targets = tuple(f"x{i}_{j}" for j in range(len(f.returns)))
                body.append(Let(targets, Call(f.name, tuple(_random_expr(rng, scope, [], 0) for _ in f.params))))
            else:
                targets = (f"x{i}",)
                body.append(Let(targets, _random_expr(rng, scope, functions, 2)))
            scope.extend(targets)
            if rng.random() < observe_density:
                body.append(Observe(_random_expr(rng, scope, [], 1)))
        returns = 1 if entry else rng.randint(1, 2)
        functions.append(Function(f"f{k}", params, tuple(body),
                                  tuple(Var(rng.choice(scope)) for _ in range(returns))))
    return Program(tuple(functions))


def random_program(seed: int, num_functions: int | None = None, observe_density: float = 0.25,
                   max_unfolded_vars: int = 12) -> HierarchicalDotDiagram:
    """A random closed Boolean program with one output, desugared."""
    rng = random.Random(seed)
    while True:
        count = rng.randint(1, 3) if num_functions is None else num_functions
        h = desugar(random_program_ast(rng, count, observe_density))
        if unfold(h).num_vars <= max_unfolded_vars:
            return h


def random_circuit(seed: int, size: int = 30, num_roots: int = 2) -> ArithmeticCircuit:
    """A rational circuit whose constants and node values all lie in [0, 1]."""
    rng = random.Random(seed)
    nodes: list[tuple] = []
    values: list[Fraction] = []
    for _ in range(rng.randint(2, 5)):
        c = Fraction(rng.randint(0, 16), 16) if rng.random() < 0.5 else Fraction(rng.randint(0, 9), rng.randint(9, 13))
        nodes.append((CONST, c))
        values.append(c)
    while len(nodes) < size:
        a, b = rng.randrange(len(nodes)), rng.randrange(len(nodes))
        if rng.random() < 0.5 and values[a] + values[b] <= 1:
            nodes.append((PLUS, a, b))
            values.append(values[a] + values[b])
        elif rng.random() < 0.2:
            c = Fraction(rng.randint(0, 10), 10)
            nodes.append((CONST, c))
            values.append(c)
        else:
            nodes.append((TIMES, a, b))
            values.append(values[a] * values[b])
    roots = tuple(range(len(nodes) - num_roots, len(nodes)))
    return ArithmeticCircuit(RATIONAL, tuple(nodes), 1, num_roots, roots)


def random_query(seed: int, max_atoms: int = 4, max_vars: int = 6) -> ConjunctiveQuery:
    rng = random.Random(seed)
    variables = [f"v{i}" for i in range(rng.randint(1, max_vars))]
    arities = {f"R{i}": rng.randint(1, 3) for i in range(rng.randint(1, 3))}
    atoms = []
    for _ in range(rng.randint(0, max_atoms)):
        r = rng.choice(sorted(arities))
        atoms.append(Atom(r, tuple(rng.choice(variables) for _ in range(arities[r]))))
    mentioned = list(dict.fromkeys(x for a in atoms for x in a.args)) or variables[:1]
    free = tuple(rng.sample(mentioned, rng.randint(0, min(2, len(mentioned)))))
    return ConjunctiveQuery("q", free, tuple(atoms))


def random_instance(seed: int, q: ConjunctiveQuery, domain_size: int | None = None,
                    density: float = 0.3) -> RelationalInstance:
    rng = random.Random(seed)
    n = rng.randint(1, 6) if domain_size is None else domain_size
    relations = {}
    arities = q.arities
    for r, k in arities.items():
        relations[r] = {t for t in _tuples(n, k) if rng.random() < density}
    return RelationalInstance(tuple(str(i) for i in range(n)), relations, dict(arities))


def _tuples(n: int, k: int) -> Iterator[tuple[int, ...]]:
    if k == 0:
        yield ()
        return
    for head in range(n):
        for rest in _tuples(n, k - 1):
            yield (head,) + rest


def random_attack_tree(seed: int, max_leaves: int = 12, max_cost: int = 20) -> AttackTree:
    """Random AND/OR tree; some gates reuse an existing basic event, which
    makes the structure a DAG."""
    rng = random.Random(seed)
    leaves = [f"e{i}" for i in range(rng.randint(1, max_leaves))]
    costs = {e: rng.randint(0, max_cost) for e in leaves}
    pool = list(leaves)
    gates = {}
    g = 0
    while len(pool) > 1:
        k = min(len(pool), rng.randint(2, 3))
        children = [pool.pop(rng.randrange(len(pool))) for _ in range(k)]
        if rng.random() < 0.15:
            extra = rng.choice(leaves)
            if extra not in children:
                children.append(extra)
        name = f"g{g}"
        g += 1
        gates[name] = ("AND" if rng.random() < 0.5 else "OR", tuple(children))
        pool.append(name)
    return AttackTree(pool[0], gates, costs)


def corpus_instance(entry: dict) -> HierarchicalDotDiagram:
    """Rebuild one corpus entry ``{"kind": ..., "seed": ...}``."""
    kind, seed = entry["kind"], entry["seed"]
    if kind == "diagram":
        f = random_diagram(seed)
        return single_node(f, Signature(frozenset(SORT_DIMS), f.symbol_types()))
    if kind == "hierarchy":
        return random_hierarchy(seed)
    if kind == "program":
        return random_program(seed)
    raise InvalidInput(f"unknown corpus kind {kind!r}")


def corpus_interpretation(h: HierarchicalDotDiagram, semiring, seed: int):
    """Random matrices for the base symbols, or the probabilistic reading for
    Boolean programs over the rationals."""
    if semiring == RATIONAL and set(h.base.sorts) == {BOOL} and "and" in h.base.symbols:
        return substochastic()
    return random_interpretation(semiring, h.base.symbols, seed=seed, dims=SORT_DIMS)


def load_corpus(path: str | Path) -> list[dict]:
    return json.loads(Path(path).read_text())["entries"]


def minimise(f: DotDiagram, still_fails: Callable[[DotDiagram], bool]) -> DotDiagram:
    """Greedily delete assignments while the failure persists."""
    changed = True
    while changed:
        changed = False
        for i in range(len(f.assignments)):
            rest = f.assignments[:i] + f.assignments[i + 1:]
            smaller = _compact(f.sorts, rest, f.inputs, f.outputs)
            try:
                fails = still_fails(smaller)
            except Exception:
                fails = False
            if fails:
                f, changed = smaller, True
                break
    return f


def dump_reproducer(obj, directory: str | Path, tag: str,
                    still_fails: Callable[[DotDiagram], bool] | None = None) -> Path:
    """Write a failing diagram (minimised when ``still_fails`` is given) or
    hierarchy as JSON and return the file path."""
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    if isinstance(obj, DotDiagram):
        if still_fails is not None:
            obj = minimise(obj, still_fails)
        data = {"diagram": diagram_to_json(obj)}
    else:
        data = {"hierarchy": hierarchy_to_json(obj)}
    out = path / f"{tag}.json"
    out.write_text(json.dumps(data, indent=1, sort_keys=True))
    return out
