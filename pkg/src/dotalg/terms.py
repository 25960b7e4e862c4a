"""Hypergraph terms stored as a maximally shared DAG.

A :class:`TermStore` interns nodes structurally, so two equal subterms always
get the same integer reference.  Node kinds are ``symbol``, the structural
generators ``id``, ``swap``, ``copy``, ``del``, ``equate``, ``new`` (each over a
list of sorts), ``seq`` (``seq(s, t)`` is ``s`` after ``t``) and ``par``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .diagrams import (
    DotDiagram,
    Sorts,
    compose,
    identity_wiring,
    symbol_diagram,
    tensor,
)
from .errors import InterfaceMismatch, InvalidInput

GENERATOR_KINDS = ("id", "swap", "copy", "del", "equate", "new")


@dataclass(frozen=True)
class TermNode:
    kind: str
    label: Any
    args: tuple[int, ...]
    dom: Sorts
    cod: Sorts


class TermStore:
    def __init__(self):
        self.nodes: list[TermNode] = []
        self._index: dict[tuple, int] = {}
        self._sort_lists: dict[Sorts, Sorts] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def sorts(self, s: Iterable[str]) -> Sorts:
        s = tuple(s)
        return self._sort_lists.setdefault(s, s)

    def _intern(self, kind: str, label, args: tuple, dom: Sorts, cod: Sorts) -> int:
        key = (kind, label, args, dom, cod)
        ref = self._index.get(key)
        if ref is None:
            ref = len(self.nodes)
            self.nodes.append(TermNode(kind, label, args, dom, cod))
            self._index[key] = ref
        return ref

    def node(self, ref: int) -> TermNode:
        return self.nodes[ref]

    def symbol(self, name: str, dom, cod) -> int:
        return self._intern("symbol", name, (), self.sorts(dom), self.sorts(cod))

    def id(self, s) -> int:
        s = self.sorts(s)
        return self._intern("id", s, (), s, s)

    def swap(self, s, t) -> int:
        s, t = self.sorts(s), self.sorts(t)
        return self._intern("swap", (s, t), (), self.sorts(s + t), self.sorts(t + s))

    def copy(self, s) -> int:
        s = self.sorts(s)
        return self._intern("copy", s, (), s, self.sorts(s + s))

    def delete(self, s) -> int:
        s = self.sorts(s)
        return self._intern("del", s, (), s, ())

    def equate(self, s) -> int:
        s = self.sorts(s)
        return self._intern("equate", s, (), self.sorts(s + s), s)

    def new(self, s) -> int:
        s = self.sorts(s)
        return self._intern("new", s, (), (), s)

    def generator(self, kind: str, label) -> int:
        if kind == "swap":
            return self.swap(*label)
        return {"id": self.id, "copy": self.copy, "del": self.delete,
                "equate": self.equate, "new": self.new}[kind](label)

    def seq(self, s: int, t: int) -> int:
        """``s ∘ t``: first ``t``, then ``s``."""
        ns, nt = self.nodes[s], self.nodes[t]
        if ns.dom != nt.cod:
            raise InterfaceMismatch(f"seq: domain {ns.dom} does not match codomain {nt.cod}")
        return self._intern("seq", None, (s, t), nt.dom, ns.cod)

    def par(self, s: int, t: int) -> int:
        ns, nt = self.nodes[s], self.nodes[t]
        return self._intern("par", None, (s, t), self.sorts(ns.dom + nt.dom), self.sorts(ns.cod + nt.cod))

    def chain(self, layers: Sequence[int]) -> int:
        """Compose layers given in application order."""
        acc = layers[0]
        for layer in layers[1:]:
            acc = self.seq(layer, acc)
        return acc

    def tensor_all(self, parts: Sequence[int]) -> int:
        """Tensor of the parts, dropping identities on the empty list."""
        unit = self.id(())
        parts = [p for p in parts if p != unit]
        if not parts:
            return unit
        acc = parts[-1]
        for p in reversed(parts[:-1]):
            acc = self.par(p, acc)
        return acc


@dataclass(frozen=True)
class Term:
    store: TermStore
    ref: int

    @property
    def node(self) -> TermNode:
        return self.store.nodes[self.ref]

    @property
    def dom(self) -> Sorts:
        return self.node.dom

    @property
    def cod(self) -> Sorts:
        return self.node.cod


def reachable(store: TermStore, root: int) -> list[int]:
    """Refs reachable from ``root``, children before parents."""
    nodes = store.nodes
    order: list[int] = []
    done: set[int] = set()
    stack = [(root, 0)]
    while stack:
        ref, i = stack.pop()
        args = nodes[ref].args
        if i < len(args):
            stack.append((ref, i + 1))
            child = args[i]
            if child not in done:
                stack.append((child, 0))
        elif ref not in done:
            done.add(ref)
            order.append(ref)
    return order


def dag_size(t: Term) -> int:
    return len(reachable(t.store, t.ref))


def width(t: Term) -> int:
    nodes = t.store.nodes
    return max(len(nodes[r].dom) + len(nodes[r].cod) for r in reachable(t.store, t.ref))


def symbols_of(t: Term) -> dict[str, tuple[Sorts, Sorts]]:
    nodes = t.store.nodes
    return {
        nodes[r].label: (nodes[r].dom, nodes[r].cod)
        for r in reachable(t.store, t.ref)
        if nodes[r].kind == "symbol"
    }


def substitute_term(t: Term, bindings: Mapping[str, Term]) -> Term:
    """Replace symbol leaves by terms; shared subterms are rebuilt once."""
    store = t.store
    repl: dict[str, int] = {}
    for name, s in bindings.items():
        repl[name] = s.ref if s.store is store else copy_into(store, s).ref
    new: dict[int, int] = {}
    nodes = store.nodes
    for ref in reachable(store, t.ref):
        n = nodes[ref]
        if n.kind == "symbol":
            r = repl.get(n.label)
            if r is None:
                new[ref] = ref
            else:
                target = nodes[r]
                if (target.dom, target.cod) != (n.dom, n.cod):
                    raise InterfaceMismatch(f"binding for {n.label!r} has the wrong type")
                new[ref] = r
        elif n.args:
            a, b = (new[x] for x in n.args)
            if (a, b) == n.args:
                new[ref] = ref
            else:
                new[ref] = store.seq(a, b) if n.kind == "seq" else store.par(a, b)
        else:
            new[ref] = ref
    return Term(store, new[t.ref])


def copy_into(store: TermStore, t: Term) -> Term:
    if t.store is store:
        return t
    mapping: dict[int, int] = {}
    src = t.store.nodes
    for ref in reachable(t.store, t.ref):
        n = src[ref]
        if n.kind == "symbol":
            mapping[ref] = store.symbol(n.label, n.dom, n.cod)
        elif n.kind == "seq":
            mapping[ref] = store.seq(mapping[n.args[0]], mapping[n.args[1]])
        elif n.kind == "par":
            mapping[ref] = store.par(mapping[n.args[0]], mapping[n.args[1]])
        else:
            mapping[ref] = store.generator(n.kind, n.label)
    return Term(store, mapping[t.ref])


def generator_diagram(kind: str, label) -> DotDiagram:
    """The pure wiring denoted by a structural generator."""
    if kind == "swap":
        s, t = label
        a = tuple(range(len(s)))
        b = tuple(range(len(s), len(s) + len(t)))
        return DotDiagram(s + t, (), a + b, b + a)
    s = tuple(label)
    xs = tuple(range(len(s)))
    if kind == "id":
        return identity_wiring(s)
    if kind == "copy":
        return DotDiagram(s, (), xs, xs + xs)
    if kind == "del":
        return DotDiagram(s, (), xs, ())
    if kind == "equate":
        return DotDiagram(s, (), xs + xs, xs)
    if kind == "new":
        return DotDiagram(s, (), (), xs)
    raise InvalidInput(f"unknown generator {kind!r}")


def to_dot(t: Term) -> DotDiagram:
    nodes = t.store.nodes
    done: dict[int, DotDiagram] = {}
    for ref in reachable(t.store, t.ref):
        n = nodes[ref]
        if n.kind == "symbol":
            done[ref] = symbol_diagram(n.label, n.dom, n.cod)
        elif n.kind == "seq":
            done[ref] = compose(done[n.args[0]], done[n.args[1]])
        elif n.kind == "par":
            done[ref] = tensor(done[n.args[0]], done[n.args[1]])
        else:
            done[ref] = generator_diagram(n.kind, n.label)
    return done[t.ref]


def _sorts_text(s: Sorts) -> str:
    return ",".join(s)


def pretty(t: Term) -> str:
    """Text form with explicit parentheses; shared subterms are printed in full."""
    nodes = t.store.nodes
    text: dict[int, str] = {}
    for ref in reachable(t.store, t.ref):
        n = nodes[ref]
        if n.kind == "symbol":
            text[ref] = n.label
        elif n.kind == "seq":
            text[ref] = f"({text[n.args[0]]} ∘ {text[n.args[1]]})"
        elif n.kind == "par":
            text[ref] = f"({text[n.args[0]]} ⊗ {text[n.args[1]]})"
        elif n.kind == "swap":
            text[ref] = f"swap[{_sorts_text(n.label[0])}|{_sorts_text(n.label[1])}]"
        else:
            text[ref] = f"{n.kind}[{_sorts_text(n.label)}]"
    return text[t.ref]


def term_to_json(t: Term) -> dict:
    order = reachable(t.store, t.ref)
    index = {ref: i for i, ref in enumerate(order)}
    rows = []
    for ref in order:
        n = t.store.nodes[ref]
        row: dict[str, Any] = {"kind": n.kind}
        if n.kind == "symbol":
            row.update(name=n.label, dom=list(n.dom), cod=list(n.cod))
        elif n.kind == "swap":
            row["sorts"] = [list(n.label[0]), list(n.label[1])]
        elif n.kind in ("seq", "par"):
            row["args"] = [index[a] for a in n.args]
        else:
            row["sorts"] = list(n.label)
        rows.append(row)
    return {"nodes": rows, "root": index[t.ref]}


def term_from_json(data: Mapping, store: TermStore | None = None) -> Term:
    store = TermStore() if store is None else store
    refs: list[int] = []
    for row in data["nodes"]:
        kind = row["kind"]
        if kind == "symbol":
            refs.append(store.symbol(row["name"], row["dom"], row["cod"]))
        elif kind in ("seq", "par"):
            a, b = (refs[i] for i in row["args"])
            refs.append(store.seq(a, b) if kind == "seq" else store.par(a, b))
        elif kind == "swap":
            refs.append(store.swap(*row["sorts"]))
        elif kind in GENERATOR_KINDS:
            refs.append(store.generator(kind, tuple(row["sorts"])))
        else:
            raise InvalidInput(f"unknown term node kind {kind!r}")
    return Term(store, refs[data["root"]])
