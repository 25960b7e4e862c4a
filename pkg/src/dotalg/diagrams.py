"""Dot diagrams and hierarchical dot diagrams.

A dot diagram is a set of sorted variables, an ordered list of assignments
``outs = sym(ins)`` and ordered input/output variable lists.  Variables are the
integers ``0 .. n-1`` local to one diagram and ``sorts[i]`` is the sort of
variable ``i``.

The structural operations (:func:`compose`, :func:`tensor`,
:func:`substitute`, :func:`unfold`) glue variables with a union-find over the
disjoint union of their operands and renumber the classes by first occurrence,
so two constructions of the same diagram compare equal as Python values.

Gluing can leave a variable that no assignment or interface list mentions
(``del`` after ``new`` is the smallest example).  Such *isolated* variables are
kept: under a matrix interpretation each one contributes a factor equal to the
dimension of its sort.  Diagrams written by hand or produced by the frontend
never contain them, and :meth:`DotDiagram.isolated` reports them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import InterfaceMismatch, InvalidInput, ResourceLimit

Sorts = tuple[str, ...]
SymbolType = tuple[Sorts, Sorts]

BOOL = "B"
AND, OR, NOT, OBSERVE = "and", "or", "not", "observe"

DEFAULT_UNFOLD_CAP = 10**6


@dataclass(frozen=True)
class Signature:
    """Sorts plus a table ``symbol -> (domain sorts, codomain sorts)``."""

    sorts: frozenset
    symbols: Mapping[str, SymbolType]

    def __post_init__(self):
        object.__setattr__(self, "sorts", frozenset(self.sorts))
        table = {s: (tuple(d), tuple(c)) for s, (d, c) in self.symbols.items()}
        object.__setattr__(self, "symbols", table)
        for sym, (dom, cod) in table.items():
            missing = [s for s in dom + cod if s not in self.sorts]
            if missing:
                raise InvalidInput(f"symbol {sym!r} uses unknown sorts {missing}")

    def __contains__(self, sym: str) -> bool:
        return sym in self.symbols

    def type_of(self, sym: str) -> SymbolType:
        return self.symbols[sym]

    def merged(self, other: Signature) -> Signature:
        table = dict(self.symbols)
        for sym, ty in other.symbols.items():
            if sym in table and table[sym] != ty:
                raise InterfaceMismatch(f"symbol {sym!r} has two different types")
            table[sym] = ty
        return Signature(self.sorts | other.sorts, table)


def flip_symbol(p) -> str:
    return f"flip({Fraction(p)})"


_FLIP_RE = re.compile(r"^flip\((\d+)(?:/(\d+))?\)$")


def flip_probability(sym: str) -> Fraction | None:
    """The probability encoded in a ``flip(p)`` symbol name, or None."""
    m = _FLIP_RE.match(sym)
    if not m:
        return None
    return Fraction(int(m.group(1)), int(m.group(2) or 1))


def bool_stoch_signature(probabilities: Iterable = ()) -> Signature:
    b = (BOOL,)
    table: dict[str, SymbolType] = {
        AND: (b + b, b),
        OR: (b + b, b),
        NOT: (b, b),
        OBSERVE: (b, ()),
    }
    for p in probabilities:
        table[flip_symbol(p)] = ((), b)
    return Signature(frozenset({BOOL}), table)


@dataclass(frozen=True)
class Assignment:
    outs: tuple[int, ...]
    sym: str
    ins: tuple[int, ...]

    def mapped(self, f) -> Assignment:
        return Assignment(tuple(f(v) for v in self.outs), self.sym, tuple(f(v) for v in self.ins))


@dataclass(frozen=True)
class DotDiagram:
    sorts: Sorts
    assignments: tuple[Assignment, ...] = ()
    inputs: tuple[int, ...] = ()
    outputs: tuple[int, ...] = ()
    names: tuple[str, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "assignments", tuple(self.assignments))
        n = len(self.sorts)
        for v in self._mentions():
            if not (isinstance(v, int) and 0 <= v < n):
                raise InvalidInput(f"variable {v!r} out of range 0..{n - 1}")
        if self.names is not None and len(self.names) != n:
            raise InvalidInput("names must list one name per variable")

    def _mentions(self):
        yield from self.inputs
        for a in self.assignments:
            yield from a.ins
            yield from a.outs
        yield from self.outputs

    @property
    def num_vars(self) -> int:
        return len(self.sorts)

    @property
    def dom(self) -> Sorts:
        return tuple(self.sorts[v] for v in self.inputs)

    @property
    def cod(self) -> Sorts:
        return tuple(self.sorts[v] for v in self.outputs)

    def sorts_of(self, vs: Iterable[int]) -> Sorts:
        return tuple(self.sorts[v] for v in vs)

    def isolated(self) -> list[int]:
        seen = set(self._mentions())
        return [v for v in range(self.num_vars) if v not in seen]

    def is_pure_wiring(self) -> bool:
        return not self.assignments

    def symbol_types(self) -> dict[str, SymbolType]:
        """Symbol types as used by the assignments; conflicting uses raise."""
        table: dict[str, SymbolType] = {}
        for a in self.assignments:
            ty = (self.sorts_of(a.ins), self.sorts_of(a.outs))
            if table.setdefault(a.sym, ty) != ty:
                raise InterfaceMismatch(f"symbol {a.sym!r} used at two different types")
        return table

    def check(self, sig: Signature) -> None:
        for i, a in enumerate(self.assignments):
            if a.sym not in sig:
                raise InterfaceMismatch(f"assignment {i}: unknown symbol {a.sym!r}")
            if sig.type_of(a.sym) != (self.sorts_of(a.ins), self.sorts_of(a.outs)):
                raise InterfaceMismatch(f"assignment {i}: sorts do not match {a.sym!r}")

    def canonical(self) -> DotDiagram:
        """Renumber variables by first occurrence (inputs, assignments, outputs)."""
        g = _Glue()
        g.add(self.sorts)
        return g.build(self.assignments, self.inputs, self.outputs)

    def var_name(self, v: int) -> str:
        if self.names is not None and self.names[v]:
            return self.names[v]
        return f"v{v}"


def symbol_diagram(sym: str, dom: Sequence[str], cod: Sequence[str]) -> DotDiagram:
    """The one-assignment diagram ``y = sym(x)`` with fresh ``x``, ``y``."""
    m, n = len(dom), len(cod)
    ins = tuple(range(m))
    outs = tuple(range(m, m + n))
    return DotDiagram(tuple(dom) + tuple(cod), (Assignment(outs, sym, ins),), ins, outs)


def wiring(sorts: Sequence[str], inputs: Sequence[int], outputs: Sequence[int]) -> DotDiagram:
    return DotDiagram(tuple(sorts), (), tuple(inputs), tuple(outputs))


def identity_wiring(sorts: Sequence[str]) -> DotDiagram:
    vs = tuple(range(len(sorts)))
    return DotDiagram(tuple(sorts), (), vs, vs)


def empty_diagram() -> DotDiagram:
    return DotDiagram(())


class _Glue:
    """Union-find over a growing pool of sorted variables."""

    def __init__(self):
        self.parent: list[int] = []
        self.sorts: list[str] = []

    def add(self, sorts: Sequence[str]) -> int:
        off = len(self.parent)
        self.parent.extend(range(off, off + len(sorts)))
        self.sorts.extend(sorts)
        return off

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        if self.sorts[a] != self.sorts[b]:
            raise InterfaceMismatch(f"cannot identify sorts {self.sorts[a]!r} and {self.sorts[b]!r}")
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if ra < rb:
                ra, rb = rb, ra
            self.parent[ra] = rb

    def build(self, assignments, inputs, outputs) -> DotDiagram:
        number: dict[int, int] = {}
        find = self.find

        def num(v: int) -> int:
            r = find(v)
            k = number.get(r)
            if k is None:
                k = number[r] = len(number)
            return k

        ins = tuple(num(v) for v in inputs)
        ass = []
        for a in assignments:
            a_ins = tuple(num(v) for v in a.ins)
            ass.append(Assignment(tuple(num(v) for v in a.outs), a.sym, a_ins))
        outs = tuple(num(v) for v in outputs)
        for v in range(len(self.parent)):
            num(v)
        sorts = [""] * len(number)
        for r, k in number.items():
            sorts[k] = self.sorts[r]
        return DotDiagram(tuple(sorts), tuple(ass), ins, outs)


def _shift(a: Assignment, off: int) -> Assignment:
    return Assignment(tuple(v + off for v in a.outs), a.sym, tuple(v + off for v in a.ins))


def compose(g: DotDiagram, f: DotDiagram) -> DotDiagram:
    """``g ∘ f``: outputs of ``f`` are glued to inputs of ``g``."""
    if f.cod != g.dom:
        raise InterfaceMismatch(f"cannot compose: codomain {f.cod} vs domain {g.dom}")
    glue = _Glue()
    glue.add(f.sorts)
    off = glue.add(g.sorts)
    for x, y in zip(f.outputs, g.inputs):
        glue.union(x, y + off)
    assignments = list(f.assignments) + [_shift(a, off) for a in g.assignments]
    return glue.build(assignments, f.inputs, [v + off for v in g.outputs])


def tensor(f: DotDiagram, g: DotDiagram) -> DotDiagram:
    glue = _Glue()
    glue.add(f.sorts)
    off = glue.add(g.sorts)
    assignments = list(f.assignments) + [_shift(a, off) for a in g.assignments]
    return glue.build(
        assignments,
        list(f.inputs) + [v + off for v in g.inputs],
        list(f.outputs) + [v + off for v in g.outputs],
    )


def substitute(f: DotDiagram, bindings: Mapping[str, DotDiagram]) -> DotDiagram:
    """Replace every assignment whose symbol is bound by a fresh copy of its body.

    The copy's input and output variables are identified with the arguments and
    results at the call site.  Bound symbols that ``f`` never uses are ignored.
    """
    if not any(a.sym in bindings for a in f.assignments):
        return f
    glue = _Glue()
    glue.add(f.sorts)
    assignments: list[Assignment] = []
    for a in f.assignments:
        body = bindings.get(a.sym)
        if body is None:
            assignments.append(a)
            continue
        if body.dom != f.sorts_of(a.ins) or body.cod != f.sorts_of(a.outs):
            raise InterfaceMismatch(f"binding for {a.sym!r} does not match its call site")
        off = glue.add(body.sorts)
        for x, y in zip(a.ins, body.inputs):
            glue.union(x, y + off)
        for x, y in zip(a.outs, body.outputs):
            glue.union(x, y + off)
        assignments.extend(_shift(b, off) for b in body.assignments)
    return glue.build(assignments, f.inputs, f.outputs)


@dataclass(frozen=True)
class CallNode:
    """One function of a hierarchical diagram.

    ``local`` types the symbols this body calls; ``defn`` maps each of them to
    the node that defines it.
    """

    body: DotDiagram
    local: Mapping[str, SymbolType] = field(default_factory=dict)
    defn: Mapping[str, str] = field(default_factory=dict)

    @property
    def children(self) -> list[str]:
        return list(dict.fromkeys(self.defn.values()))


@dataclass(frozen=True)
class Diagnostic:
    node: str
    condition: int
    message: str

    def __str__(self):
        return f"{self.node}: condition {self.condition}: {self.message}"


@dataclass(frozen=True)
class HierarchicalDotDiagram:
    root: str
    nodes: Mapping[str, CallNode]
    base: Signature

    @property
    def call_nodes(self) -> set[str]:
        return set(self.nodes)

    @property
    def call_edges(self) -> list[tuple[str, str]]:
        return [(v, c) for v, node in self.nodes.items() for c in node.children]

    def node_signature(self, v: str) -> Signature:
        return self.base.merged(Signature(self.base.sorts, self.nodes[v].local))

    def topological(self) -> list[str]:
        """Nodes reachable from the root, children before parents."""
        order: list[str] = []
        state: dict[str, int] = {}
        stack = [(self.root, iter(self.nodes[self.root].children))]
        state[self.root] = 1
        while stack:
            v, it = stack[-1]
            child = next(it, None)
            if child is None:
                stack.pop()
                state[v] = 2
                order.append(v)
            elif state.get(child) is None:
                state[child] = 1
                stack.append((child, iter(self.nodes[child].children)))
            elif state[child] == 1:
                raise InvalidInput(f"call graph has a cycle through {child!r}")
        return order

    def unfolded_size(self) -> int:
        """Assignment count of :func:`unfold` without building it."""
        count: dict[str, int] = {}
        for v in self.topological():
            node = self.nodes[v]
            count[v] = sum(
                count[node.defn[a.sym]] if a.sym in node.defn else 1 for a in node.body.assignments
            )
        return count[self.root]


def single_node(body: DotDiagram, base: Signature, name: str = "main") -> HierarchicalDotDiagram:
    return HierarchicalDotDiagram(name, {name: CallNode(body)}, base)


def unfold(h: HierarchicalDotDiagram, max_assignments: int = DEFAULT_UNFOLD_CAP) -> DotDiagram:
    """Inline every call recursively; refuses results above ``max_assignments``."""
    size = h.unfolded_size()
    if size > max_assignments:
        raise ResourceLimit(f"unfolding needs {size} assignments (cap {max_assignments})")
    done: dict[str, DotDiagram] = {}
    for v in h.topological():
        node = h.nodes[v]
        done[v] = substitute(node.body, {sym: done[c] for sym, c in node.defn.items()})
    return done[h.root]


def validate(h: HierarchicalDotDiagram) -> list[Diagnostic]:
    """Check the four conditions on hierarchical diagrams; [] means well formed."""
    out: list[Diagnostic] = []
    if h.root not in h.nodes:
        return [Diagnostic(h.root, 1, "root is not a node")]
    for v, node in h.nodes.items():
        for sym, child in node.defn.items():
            if child not in h.nodes:
                out.append(Diagnostic(v, 1, f"{sym!r} is defined by unknown node {child!r}"))
    if out:
        return out
    try:
        reachable = set(h.topological())
    except InvalidInput as exc:
        return [Diagnostic(h.root, 1, str(exc))]
    parents = {c for _, c in h.call_edges}
    if h.root in parents:
        out.append(Diagnostic(h.root, 1, "root has a parent"))
    for v in h.nodes:
        if v not in reachable:
            out.append(Diagnostic(v, 1, "node is not reachable from the root"))

    for v, node in h.nodes.items():
        body = node.body
        for sym in node.local:
            if sym in h.base:
                out.append(Diagnostic(v, 2, f"local symbol {sym!r} clashes with the base signature"))
        for i, a in enumerate(body.assignments):
            ty = node.local.get(a.sym) or h.base.symbols.get(a.sym)
            if ty is None:
                out.append(Diagnostic(v, 2, f"assignment {i}: unknown symbol {a.sym!r}"))
            elif ty != (body.sorts_of(a.ins), body.sorts_of(a.outs)):
                out.append(Diagnostic(v, 2, f"assignment {i}: sorts do not match {a.sym!r}"))
        bad_sorts = {s for s in body.sorts if s not in h.base.sorts}
        if bad_sorts:
            out.append(Diagnostic(v, 2, f"unknown sorts {sorted(bad_sorts)}"))
        if body.isolated():
            out.append(Diagnostic(v, 2, f"variables {body.isolated()} are never used"))

        if set(node.defn) != set(node.local):
            out.append(Diagnostic(v, 3, "defn and local signature cover different symbols"))
        targets = list(node.defn.values())
        if len(set(targets)) != len(targets):
            out.append(Diagnostic(v, 3, "defn is not injective: two symbols share a child"))
        for sym, child in node.defn.items():
            ty = node.local.get(sym)
            cb = h.nodes[child].body
            if ty is not None and ty != (cb.dom, cb.cod):
                out.append(Diagnostic(v, 3, f"{sym!r} does not match the interface of {child!r}"))

        if len(node.children) > len(body.assignments):
            out.append(
                Diagnostic(v, 4, f"{len(node.children)} children but {len(body.assignments)} assignments")
            )
    return out


def equivalent(f: DotDiagram, g: DotDiagram, trials: int = 3, seed: int = 0) -> bool:
    """Randomised semantic equality test; a False answer is always correct.

    Each trial interprets every symbol as a random matrix over a 61-bit prime
    field and compares brute-force semantics of both diagrams.
    """
    from .oracle import oracle_semantics
    from .semiring import random_prime_field_for

    if f.dom != g.dom or f.cod != g.cod:
        return False
    tf, tg = f.symbol_types(), g.symbol_types()
    for sym in tf.keys() & tg.keys():
        if tf[sym] != tg[sym]:
            return False
    types = {**tf, **tg}
    dims = dict.fromkeys(set(f.sorts) | set(g.sorts), 2)
    for k in range(trials):
        interp = random_prime_field_for(types, seed=seed * 7919 + k, dims=dims)
        if oracle_semantics(f, interp) != oracle_semantics(g, interp):
            return False
    return True


def diagram_width(f: DotDiagram) -> int:
    """Largest interface: the diagram's own or that of any assignment."""
    sizes = [len(f.inputs), len(f.outputs)]
    sizes += [max(len(a.ins), len(a.outs)) for a in f.assignments]
    return max(sizes)


def diagram_to_json(f: DotDiagram) -> dict:
    out = {
        "sorts": list(f.sorts),
        "assignments": [{"outs": list(a.outs), "sym": a.sym, "ins": list(a.ins)} for a in f.assignments],
        "inputs": list(f.inputs),
        "outputs": list(f.outputs),
    }
    if f.names is not None:
        out["names"] = list(f.names)
    return out


def diagram_from_json(data: Mapping) -> DotDiagram:
    try:
        return DotDiagram(
            tuple(data["sorts"]),
            tuple(Assignment(tuple(a["outs"]), a["sym"], tuple(a["ins"])) for a in data["assignments"]),
            tuple(data["inputs"]),
            tuple(data["outputs"]),
            tuple(data["names"]) if data.get("names") is not None else None,
        )
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed diagram JSON: {exc}") from None


def _types_to_json(table: Mapping[str, SymbolType]) -> dict:
    return {sym: {"dom": list(d), "cod": list(c)} for sym, (d, c) in sorted(table.items())}


def _types_from_json(data: Mapping) -> dict:
    return {sym: (tuple(t["dom"]), tuple(t["cod"])) for sym, t in data.items()}


def hierarchy_to_json(h: HierarchicalDotDiagram) -> dict:
    return {
        "root": h.root,
        "base": {"sorts": sorted(h.base.sorts), "symbols": _types_to_json(h.base.symbols)},
        "nodes": {
            v: {
                "body": diagram_to_json(node.body),
                "local": _types_to_json(node.local),
                "defn": dict(sorted(node.defn.items())),
            }
            for v, node in h.nodes.items()
        },
        "call_edges": [list(e) for e in h.call_edges],
    }


def hierarchy_from_json(data: Mapping) -> HierarchicalDotDiagram:
    try:
        base = Signature(frozenset(data["base"]["sorts"]), _types_from_json(data["base"]["symbols"]))
        nodes = {
            v: CallNode(diagram_from_json(n["body"]), _types_from_json(n.get("local", {})), dict(n.get("defn", {})))
            for v, n in data["nodes"].items()
        }
        return HierarchicalDotDiagram(data["root"], nodes, base)
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed hierarchy JSON: {exc}") from None
