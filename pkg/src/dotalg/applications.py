"""Conjunctive queries over relational instances and min-cost attack trees,
both evaluated through the generic diagram pipeline."""

from __future__ import annotations

import csv
import io
import itertools
import json
import re
from dataclasses import dataclass, field
from typing import Mapping

from .algebraise import algebrise
from .diagrams import AND, BOOL, OBSERVE, OR, Assignment, DotDiagram
from .errors import InvalidInput, ParseError
from .evaluate import interpret_term
from .semiring import BOOLEAN, INF, TROPICAL, Interpretation, Matrix, tropical

DOMAIN = "D"


@dataclass(frozen=True)
class Atom:
    relation: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class ConjunctiveQuery:
    """``name(free) :- atoms``; every other variable is existential."""

    name: str
    free: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self):
        _ = self.arities

    @property
    def arities(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for a in self.atoms:
            if out.setdefault(a.relation, len(a.args)) != len(a.args):
                raise InvalidInput(f"relation {a.relation} is used with arities {out[a.relation]} and {len(a.args)}")
        return out

    @property
    def variables(self) -> list[str]:
        seen = dict.fromkeys(self.free)
        for a in self.atoms:
            seen.update(dict.fromkeys(a.args))
        return list(seen)

    @property
    def existential(self) -> list[str]:
        return [v for v in self.variables if v not in self.free]

    def __str__(self) -> str:
        body = ", ".join(f"{a.relation}({', '.join(a.args)})" for a in self.atoms)
        return f"{self.name}({', '.join(self.free)}) :- {body}."


_ATOM_RE = re.compile(r"\s*([A-Za-z_]\w*)\s*\(([^()]*)\)\s*")


def _names(text: str, line: int) -> tuple[str, ...]:
    parts = [p.strip() for p in text.split(",")] if text.strip() else []
    for p in parts:
        if not re.fullmatch(r"[A-Za-z_]\w*", p):
            raise ParseError(f"bad variable name {p!r}", line)
    return tuple(parts)


def parse_query(text: str) -> ConjunctiveQuery:
    """Datalog-style ``q(u, c) :- R(u, h), S(h, c).``; ``#`` starts a comment."""
    lines = [(i + 1, ln.split("#", 1)[0]) for i, ln in enumerate(text.splitlines())]
    src = " ".join(ln for _, ln in lines).strip()
    line = next((i for i, ln in lines if ln.strip()), 1)
    if ":-" not in src:
        raise ParseError("expected 'head :- body'", line)
    head, body = src.split(":-", 1)
    m = _ATOM_RE.fullmatch(head)
    if not m:
        raise ParseError(f"bad query head {head.strip()!r}", line)
    name, free = m.group(1), _names(m.group(2), line)
    body = body.strip()
    if body.endswith("."):
        body = body[:-1]
    atoms = []
    pos = 0
    while pos < len(body) and body[pos:].strip():
        m = _ATOM_RE.match(body, pos)
        if not m:
            raise ParseError(f"bad atom near {body[pos:pos + 20]!r}", line)
        atoms.append(Atom(m.group(1), _names(m.group(2), line)))
        pos = m.end()
        if pos < len(body):
            if body[pos] != ",":
                raise ParseError(f"expected ',' near {body[pos:pos + 20]!r}", line)
            pos += 1
    if len(set(free)) != len(free):
        raise ParseError("free variables must be distinct", line)
    return ConjunctiveQuery(name, free, tuple(atoms))


def query_to_diagram(q: ConjunctiveQuery) -> DotDiagram:
    """One zero-output assignment per atom; the free variables are the inputs."""
    variables = q.variables
    index = {v: i for i, v in enumerate(variables)}
    assignments = tuple(Assignment((), a.relation, tuple(index[x] for x in a.args)) for a in q.atoms)
    return DotDiagram((DOMAIN,) * len(variables), assignments, tuple(index[v] for v in q.free), (),
                      tuple(variables))


@dataclass
class RelationalInstance:
    domain: tuple[str, ...]
    relations: dict[str, set[tuple[int, ...]]] = field(default_factory=dict)
    arities: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.domain)
        for r, rows in self.relations.items():
            for t in rows:
                if self.arities.setdefault(r, len(t)) != len(t):
                    raise InvalidInput(f"relation {r} has tuples of different lengths")
                if not all(0 <= x < n for x in t):
                    raise InvalidInput(f"tuple {t} of {r} is outside the domain")


def load_instance(text: str) -> RelationalInstance:
    """CSV rows ``relation,value,...``.  An optional ``domain,...`` row fixes
    the domain and its order; otherwise values are numbered as they appear."""
    domain: list[str] = []
    index: dict[str, int] = {}
    fixed = False
    relations: dict[str, set[tuple[int, ...]]] = {}
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
        row = [c.strip() for c in row]
        if not row or not row[0] or row[0].startswith("#"):
            continue
        name, values = row[0], row[1:]
        if name == "domain":
            if domain:
                raise ParseError("the domain row must come first", lineno)
            domain = list(dict.fromkeys(values))
            index = {v: i for i, v in enumerate(domain)}
            fixed = True
            continue
        for v in values:
            if v not in index:
                if fixed:
                    raise ParseError(f"value {v!r} is not in the declared domain", lineno)
                index[v] = len(domain)
                domain.append(v)
        relations.setdefault(name, set()).add(tuple(index[v] for v in values))
    return RelationalInstance(tuple(domain), relations)


def instance_to_interpretation(A: RelationalInstance, arities: Mapping[str, int] | None = None) -> Interpretation:
    """Each relation becomes a 1 x |D|^arity Boolean row; the first argument is
    the most significant digit of the column index.  Relations named only in
    ``arities`` are empty."""
    n = len(A.domain)
    table = dict(A.arities)
    for r, k in (arities or {}).items():
        if table.setdefault(r, k) != k:
            raise InvalidInput(f"relation {r} has arity {table[r]} in the instance, {k} in the query")
    interp = Interpretation(BOOLEAN, {DOMAIN: n})
    for r, k in table.items():
        data = [False] * (n ** k)
        for t in A.relations.get(r, ()):
            col = 0
            for x in t:
                col = col * n + x
            data[col] = True
        interp.symbols[r] = Matrix(1, n ** k, data, BOOLEAN)
    return interp


def _decode(col: int, n: int, k: int) -> tuple[int, ...]:
    out = []
    for _ in range(k):
        col, x = divmod(col, n)
        out.append(x)
    return tuple(reversed(out))


def evaluate_query(q: ConjunctiveQuery, A: RelationalInstance, mode: str = "heuristic") -> set[tuple[int, ...]]:
    """Answers of ``q`` on ``A`` as tuples of domain indices."""
    m = interpret_term(algebrise(query_to_diagram(q), mode), instance_to_interpretation(A, q.arities))
    n, k = len(A.domain), len(q.free)
    return {_decode(j, n, k) for j in range(m.cols) if m[0, j]}


def naive_join(q: ConjunctiveQuery, A: RelationalInstance) -> set[tuple[int, ...]]:
    """Nested loops over the tuples of each atom, then free variables that no
    atom mentions range over the whole domain."""
    answers: set[tuple[int, ...]] = set()

    def extend(i: int, binding: dict[str, int]):
        if i == len(q.atoms):
            loose = [v for v in q.free if v not in binding]
            for values in itertools.product(range(len(A.domain)), repeat=len(loose)):
                full = {**binding, **dict(zip(loose, values))}
                answers.add(tuple(full[v] for v in q.free))
            return
        atom = q.atoms[i]
        for t in A.relations.get(atom.relation, ()):
            b = dict(binding)
            if all(b.setdefault(x, val) == val for x, val in zip(atom.args, t)):
                extend(i + 1, b)

    extend(0, {})
    return answers


def format_answers(q: ConjunctiveQuery, A: RelationalInstance, answers) -> str:
    rows = sorted(tuple(A.domain[x] for x in t) for t in answers)
    return "\n".join([",".join(q.free)] + [",".join(r) for r in rows])


# Attack trees.

@dataclass(frozen=True)
class AttackTree:
    """``gates`` maps a gate to its kind (``AND``/``OR``) and children; every
    other node is a basic event with a cost in ``costs``.  Children may be
    shared, so the tree can be a DAG."""

    root: str
    gates: Mapping[str, tuple[str, tuple[str, ...]]]
    costs: Mapping[str, int]

    def __post_init__(self):
        for g, (kind, children) in self.gates.items():
            if kind not in ("AND", "OR"):
                raise InvalidInput(f"gate {g} has unknown kind {kind!r}")
            if not children:
                raise InvalidInput(f"gate {g} has no children")
            for c in children:
                if c not in self.gates and c not in self.costs:
                    raise InvalidInput(f"gate {g} refers to unknown node {c!r}")
        if self.root not in self.gates and self.root not in self.costs:
            raise InvalidInput(f"unknown root {self.root!r}")
        for e, c in self.costs.items():
            if not (isinstance(c, int) and c >= 0):
                raise InvalidInput(f"cost of {e} must be a nonnegative integer")
        self.order()

    def order(self) -> list[str]:
        """Reachable nodes, children first; raises on cycles."""
        out: list[str] = []
        state: dict[str, int] = {}

        def visit(v):
            stack = [(v, iter(self.gates[v][1] if v in self.gates else ()))]
            state[v] = 1
            while stack:
                u, it = stack[-1]
                c = next(it, None)
                if c is None:
                    stack.pop()
                    state[u] = 2
                    out.append(u)
                elif state.get(c) == 1:
                    raise InvalidInput(f"attack tree has a cycle through {c!r}")
                elif c not in state:
                    state[c] = 1
                    stack.append((c, iter(self.gates[c][1] if c in self.gates else ())))

        visit(self.root)
        return out

    @property
    def events(self) -> list[str]:
        return [v for v in self.order() if v not in self.gates]

    def to_json(self) -> dict:
        nodes = {g: {"gate": k, "children": list(cs)} for g, (k, cs) in self.gates.items()}
        nodes.update({e: {"cost": c} for e, c in self.costs.items()})
        return {"root": self.root, "nodes": nodes}

    @classmethod
    def from_json(cls, data) -> AttackTree:
        gates, costs = {}, {}
        for name, node in data["nodes"].items():
            if "gate" in node:
                gates[name] = (str(node["gate"]).upper(), tuple(node["children"]))
            else:
                costs[name] = node["cost"]
        return cls(data["root"], gates, costs)


def load_attack_tree(text: str) -> AttackTree:
    try:
        return AttackTree.from_json(json.loads(text))
    except KeyError as e:
        raise ParseError(f"bad attack tree: missing key {e}") from None
    except (json.JSONDecodeError, TypeError) as e:
        raise ParseError(f"bad attack tree: {e}") from None


def event_symbol(name: str) -> str:
    return f"event:{name}"


def attack_tree_to_diagram(tree: AttackTree) -> DotDiagram:
    """One Boolean variable per node, true when the node is compromised.  A
    basic event chooses its value, gates are ``and``/``or`` chains, and the
    root is observed to be true."""
    var: dict[str, int] = {}
    names: list[str] = []
    assignments: list[Assignment] = []

    def fresh(name: str) -> int:
        names.append(name)
        return len(names) - 1

    for v in tree.order():
        if v not in tree.gates:
            var[v] = fresh(v)
            assignments.append(Assignment((var[v],), event_symbol(v), ()))
            continue
        kind, children = tree.gates[v]
        sym = AND if kind == "AND" else OR
        acc = var[children[0]]
        for i, c in enumerate(children[1:], 1):
            out = fresh(v if i == len(children) - 1 else f"{v}%{i}")
            assignments.append(Assignment((out,), sym, (acc, var[c])))
            acc = out
        var[v] = acc
    assignments.append(Assignment((), OBSERVE, (var[tree.root],)))
    return DotDiagram((BOOL,) * len(names), tuple(assignments), (), (), tuple(names))


def attack_interpretation(costs: Mapping[str, int]) -> Interpretation:
    """Gates as 0/infinity feasibility tables; an event costs nothing when
    skipped and its cost when performed."""
    interp = tropical()
    for e, c in costs.items():
        interp.symbols[event_symbol(e)] = Matrix(2, 1, (0, c), TROPICAL)
    return interp


def attack_min_cost(tree: AttackTree, mode: str = "heuristic"):
    """Cheapest set of basic events that compromises the root, or infinity."""
    m = interpret_term(algebrise(attack_tree_to_diagram(tree), mode), attack_interpretation(tree.costs))
    return m[0, 0]


def brute_force_min_cost(tree: AttackTree):
    events = tree.events
    if len(events) > 20:
        raise InvalidInput("brute force is limited to 20 basic events")
    order = tree.order()
    best = INF
    for mask in range(1 << len(events)):
        on = {e for i, e in enumerate(events) if mask >> i & 1}
        value: dict[str, bool] = {}
        for v in order:
            if v in tree.gates:
                kind, children = tree.gates[v]
                vals = [value[c] for c in children]
                value[v] = all(vals) if kind == "AND" else any(vals)
            else:
                value[v] = v in on
        if value[tree.root]:
            best = min(best, sum(tree.costs[e] for e in on))
    return best
