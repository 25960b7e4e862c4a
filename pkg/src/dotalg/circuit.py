"""Arithmetic circuits compiled from terms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from .errors import InvalidInput
from .evaluate import ElementOps, Evaluator
from .semiring import Interpretation, Matrix, Semiring, semiring_by_name
from .terms import Term

CONST, PLUS, TIMES = "const", "+", "*"


@dataclass(frozen=True)
class ArithmeticCircuit:
    """Nodes are listed children first.  ``nodes[i]`` is ``("const", value)``
    or ``(op, a, b)`` with ``op`` in ``+``/``*``; ``roots[i * cols + j]`` is the
    node computing entry ``(i, j)`` of the matrix."""

    semiring: Semiring
    nodes: tuple
    rows: int
    cols: int
    roots: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.nodes)

    def root(self, i: int, j: int) -> int:
        return self.roots[i * self.cols + j]

    def to_json(self) -> dict:
        sr = self.semiring
        table = []
        for n in self.nodes:
            if n[0] == CONST:
                table.append({"op": CONST, "value": sr.to_json(n[1])})
            else:
                table.append({"op": n[0], "args": [n[1], n[2]]})
        return {"semiring": sr.name, "rows": self.rows, "cols": self.cols,
                "nodes": table, "roots": list(self.roots)}

    @classmethod
    def from_json(cls, data) -> ArithmeticCircuit:
        sr = semiring_by_name(data["semiring"])
        nodes = []
        for i, n in enumerate(data["nodes"]):
            if n["op"] == CONST:
                nodes.append((CONST, sr.from_json(n["value"])))
            elif n["op"] in (PLUS, TIMES):
                a, b = n["args"]
                if not (0 <= a < i and 0 <= b < i):
                    raise InvalidInput(f"circuit node {i} refers forward")
                nodes.append((n["op"], a, b))
            else:
                raise InvalidInput(f"unknown circuit op {n['op']!r}")
        return cls(sr, tuple(nodes), data["rows"], data["cols"], tuple(data["roots"]))


class CircuitBuilder(ElementOps):
    """Hash-consed node table; folds only ``x*0``, ``x*1`` and ``x+0``."""

    def __init__(self, interp: Interpretation):
        self.semiring = interp.semiring
        self.nodes: list[tuple] = []
        self._index: dict[tuple, int] = {}
        self._consts: dict[Any, int] = {}
        zero = self.const(self.semiring.zero)
        one = self.const(self.semiring.one)
        self._symbols: dict[str, list] = {}

        def symbol(name, dom, cod):
            nodes = self._symbols.get(name)
            if nodes is None:
                m = interp.check_type(name, dom, cod)
                nodes = self._symbols[name] = [self.const(x) for x in m.data]
            return nodes

        super().__init__(zero, one, self.plus, self.times, symbol)

    def const(self, value) -> int:
        key = self.semiring.to_json(value)
        ref = self._consts.get(key)
        if ref is None:
            ref = self._consts[key] = len(self.nodes)
            self.nodes.append((CONST, value))
        return ref

    def _node(self, op: str, a: int, b: int) -> int:
        key = (op, a, b) if a <= b else (op, b, a)
        ref = self._index.get(key)
        if ref is None:
            ref = self._index[key] = len(self.nodes)
            self.nodes.append(key)
        return ref

    def plus(self, a: int, b: int) -> int:
        if a == self.zero:
            return b
        if b == self.zero:
            return a
        return self._node(PLUS, a, b)

    def times(self, a: int, b: int) -> int:
        if a == self.zero or b == self.zero:
            return self.zero
        if a == self.one:
            return b
        if b == self.one:
            return a
        return self._node(TIMES, a, b)

    def finish(self, roots: list[int], rows: int, cols: int) -> ArithmeticCircuit:
        """Drop nodes no root depends on and renumber the rest in order."""
        live = set(roots)
        for i in range(len(self.nodes) - 1, -1, -1):
            n = self.nodes[i]
            if i in live and n[0] != CONST:
                live.update(n[1:])
        number: dict[int, int] = {}
        kept = []
        for i, n in enumerate(self.nodes):
            if i in live:
                number[i] = len(kept)
                kept.append(n if n[0] == CONST else (n[0], number[n[1]], number[n[2]]))
        return ArithmeticCircuit(self.semiring, tuple(kept), rows, cols, tuple(number[r] for r in roots))


def compile_circuit(t: Term, interp: Interpretation) -> ArithmeticCircuit:
    """A circuit whose roots compute the entries of ``interpret_term(t, interp)``."""
    builder = CircuitBuilder(interp)
    roots = Evaluator(interp, builder).run(t)
    node = t.node
    return builder.finish(roots, interp.dim(node.cod), interp.dim(node.dom))


def eval_nodes(C: ArithmeticCircuit, semiring: Semiring | None = None) -> list:
    sr = semiring or C.semiring
    add, mul = sr.add, sr.mul
    values: list = []
    for n in C.nodes:
        if n[0] == CONST:
            values.append(sr.coerce(n[1]) if sr != C.semiring else n[1])
        elif n[0] == PLUS:
            values.append(add(values[n[1]], values[n[2]]))
        else:
            values.append(mul(values[n[1]], values[n[2]]))
    return values


def eval_circuit(C: ArithmeticCircuit, semiring: Semiring | None = None) -> dict[int, Any]:
    """Value of every root node, keyed by node id."""
    values = eval_nodes(C, semiring)
    return {r: values[r] for r in C.roots}


def circuit_matrix(C: ArithmeticCircuit, semiring: Semiring | None = None) -> Matrix:
    values = eval_nodes(C, semiring)
    return Matrix(C.rows, C.cols, [values[r] for r in C.roots], semiring or C.semiring)
