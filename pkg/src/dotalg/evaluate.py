"""Matrix semantics of terms.

A term is evaluated by *applying* it to the matrix that flows into it, kept
sparse as ``{(row, column): value}`` where a row is a tuple with one value per
wire.  A tensor factor works on its own slice of the row, a symbol-free
subterm moves entries along a relation computed once per input slice, and a
symbol is a sparse-times-dense product on its slice.  Copies put the same value
on several wires, so the number of live entries follows the number of distinct
variable assignments rather than the nominal dimension of the wires.

Subterms that occur more than once and have a small interface are evaluated
once to a matrix and reused, which keeps shared calls in hierarchical programs
from being re-expanded.

The element operations are pluggable, so the same evaluator produces either
semiring values or arithmetic-circuit nodes.
"""

from __future__ import annotations

import itertools
from collections import Counter
from typing import Any, Callable

from .errors import InvalidInput, ResourceLimit
from .semiring import Interpretation, Matrix
from .terms import Term, TermNode, reachable

SMALL_ENTRIES = 1 << 12
ENTRY_CAP = 1 << 22


class ElementOps:
    """How to add and multiply the entries being pushed through a term."""

    def __init__(self, zero, one, add: Callable, mul: Callable, symbol: Callable[[str, Any, Any], list]):
        self.zero, self.one, self.add, self.mul = zero, one, add, mul
        self.symbol = symbol


class SemiringOps(ElementOps):
    def __init__(self, interp: Interpretation):
        sr = interp.semiring
        self.semiring = sr
        super().__init__(sr.zero, sr.one, sr.add, sr.mul, lambda s, d, c: list(interp.check_type(s, d, c).data))


class Evaluator:
    """Rows of the flowing matrix are tuples holding one value per wire; a
    subterm applied at ``offset`` reads and rewrites only its own slice."""

    def __init__(self, interp: Interpretation, ops: ElementOps, small: int = SMALL_ENTRIES,
                 entry_cap: int = ENTRY_CAP, check: Callable[[dict], None] | None = None):
        self.interp = interp
        self.ops = ops
        self.small = small
        self.entry_cap = entry_cap
        self.check = check
        self.memo: dict[int, dict] = {}
        self._symbols: dict[str, dict] = {}
        self._pure: dict[int, bool] = {}
        self._relations: dict[tuple, dict] = {}
        self._tuples: dict[tuple, list] = {}

    def tuples(self, sorts) -> list[tuple]:
        """All value tuples over ``sorts`` in row-major order."""
        out = self._tuples.get(sorts)
        if out is None:
            dims = [range(self.interp.dim((s,))) for s in sorts]
            out = self._tuples[sorts] = list(itertools.product(*dims))
        return out

    def run(self, t: Term) -> list:
        """Entries of the matrix of ``t`` in row-major order."""
        self.nodes = t.store.nodes
        node = self.nodes[t.ref]
        rows, cols = self.interp.dim(node.cod), self.interp.dim(node.dom)
        if rows > self.interp.cap or cols > self.interp.cap:
            raise ResourceLimit(f"term interface {rows}x{cols} exceeds the cap {self.interp.cap}")
        uses: Counter = Counter()
        for ref in reachable(t.store, t.ref):
            uses.update(self.nodes[ref].args)
        self.shared = {ref for ref, n in uses.items() if n > 1}
        one = self.ops.one
        start = {(x, j): one for j, x in enumerate(self.tuples(node.dom))}
        stack = [self._apply(t.ref, start, 0)]
        result = None
        while stack:
            try:
                request = stack[-1].send(result)
            except StopIteration as stop:
                stack.pop()
                result = stop.value
                continue
            result = None
            stack.append(self._apply(*request))
        index = {x: i for i, x in enumerate(self.tuples(node.cod))}
        out = [self.ops.zero] * (rows * cols)
        for (x, c), v in result.items():
            out[index[x] * cols + c] = v
        return out

    def _guard(self, m: dict):
        if len(m) > self.entry_cap:
            raise ResourceLimit(f"intermediate matrix with {len(m)} entries exceeds {self.entry_cap}")

    def _apply(self, ref: int, m: dict, offset: int, reuse: bool = True):
        """Generator computing ``[[ref]] * m`` on the wires from ``offset`` on.

        Sub-applications are yielded as ``(ref, m, offset)`` requests and
        their results are sent back in.
        """
        node: TermNode = self.nodes[ref]
        kind = node.kind
        if kind in ("seq", "par") and self._is_pure(ref):
            out = self._spread(m, offset, len(node.dom), lambda x: self._relation(ref, x))
        elif reuse and kind in ("seq", "par") and ref in self.shared and \
                self.interp.dim(node.dom) * self.interp.dim(node.cod) <= self.small:
            table = self.memo.get(ref)
            if table is None:
                one = self.ops.one
                value = yield (ref, {(x, x): one for x in self.tuples(node.dom)}, 0, False)
                table = {}
                for (y, x), v in value.items():
                    table.setdefault(x, []).append((y, v))
                self.memo[ref] = table
            out = self._weighted(m, offset, len(node.dom), table)
        elif kind == "seq":
            s, t = node.args
            inner = yield (t, m, offset)
            out = yield (s, inner, offset)
        elif kind == "par":
            a, b = node.args
            inner = yield (b, m, offset + len(self.nodes[a].dom))
            out = yield (a, inner, offset)
        elif kind == "symbol":
            out = self._weighted(m, offset, len(node.dom), self._symbol_table(node))
        else:
            out = self._spread(m, offset, len(node.dom), lambda x: self._relation(ref, x))
        self._guard(out)
        if self.check is not None:
            self.check(out)
        return out

    def _weighted(self, m: dict, offset: int, width: int, table: dict) -> dict:
        """Replace each slice ``x`` by every ``y`` with ``table[x]`` holding
        ``(y, w)``, scaling by ``w``."""
        zero, add, mul = self.ops.zero, self.ops.add, self.ops.mul
        end = offset + width
        out: dict = {}
        get = out.get
        for (row, c), v in m.items():
            head, tail = row[:offset], row[end:]
            for y, w in table.get(row[offset:end], ()):
                x = mul(w, v)
                if x == zero:
                    continue
                key = (head + y + tail, c)
                prev = get(key, zero)
                out[key] = x if prev == zero else add(prev, x)
        return out

    def _spread(self, m: dict, offset: int, width: int, relation) -> dict:
        """Move each entry to every slice the symbol-free relation allows."""
        zero, add = self.ops.zero, self.ops.add
        end = offset + width
        out: dict = {}
        get = out.get
        for (row, c), v in m.items():
            head, tail = row[:offset], row[end:]
            for y, k in relation(row[offset:end]).items():
                x = v if k == 1 else self._scale(v, k)
                key = (head + y + tail, c)
                prev = get(key, zero)
                out[key] = x if prev == zero else add(prev, x)
        return out

    def _scale(self, v, k: int):
        """``v`` added to itself ``k`` times, by doubling."""
        add = self.ops.add
        acc = None
        while k:
            if k & 1:
                acc = v if acc is None else add(acc, v)
            k >>= 1
            if k:
                v = add(v, v)
        return acc

    def _symbol_table(self, node: TermNode) -> dict:
        table = self._symbols.get(node.label)
        if table is None:
            zero = self.ops.zero
            data = self.ops.symbol(node.label, node.dom, node.cod)
            ins, outs = self.tuples(node.dom), self.tuples(node.cod)
            d = len(ins)
            table = {x: [(y, data[k * d + j]) for k, y in enumerate(outs) if data[k * d + j] != zero]
                     for j, x in enumerate(ins)}
            self._symbols[node.label] = table
        return table

    def _is_pure(self, ref: int) -> bool:
        """True when no symbol occurs below ``ref``."""
        known = self._pure.get(ref)
        if known is None:
            node = self.nodes[ref]
            if node.kind == "symbol":
                known = False
            else:
                known = all(self._is_pure(a) for a in node.args)
            self._pure[ref] = known
        return known

    def _relation(self, ref: int, x: tuple) -> dict[tuple, int]:
        """Slices reached from ``x`` by a symbol-free subterm, with the number
        of ways each is reached."""
        key = (ref, x)
        out = self._relations.get(key)
        if out is not None:
            return out
        node = self.nodes[ref]
        kind, label = node.kind, node.label
        if kind == "seq":
            s, t = node.args
            out = {}
            for y, a in self._relation(t, x).items():
                for z, b in self._relation(s, y).items():
                    out[z] = out.get(z, 0) + a * b
        elif kind == "par":
            a, b = node.args
            k = len(self.nodes[a].dom)
            right = self._relation(b, x[k:])
            out = {ya + yb: i * j for ya, i in self._relation(a, x[:k]).items() for yb, j in right.items()}
        elif kind == "id":
            out = {x: 1}
        elif kind == "swap":
            k = len(label[0])
            out = {x[k:] + x[:k]: 1}
        elif kind == "copy":
            out = {x + x: 1}
        elif kind == "equate":
            k = len(label)
            out = {x[:k]: 1} if x[:k] == x[k:] else {}
        elif kind == "del":
            out = {(): 1}
        elif kind == "new":
            out = dict.fromkeys(self.tuples(label), 1)
        else:
            raise InvalidInput(f"unknown term node kind {kind!r}")
        self._relations[key] = out
        return out


def _substochastic_check(m: dict) -> None:
    sums: dict = {}
    for (_, c), v in m.items():
        if v < 0:
            raise InvalidInput("negative entry in a substochastic evaluation")
        sums[c] = sums.get(c, 0) + v
    if any(s > 1 for s in sums.values()):
        raise InvalidInput("column sum above one in a substochastic evaluation")


def interpret_term(t: Term, interp: Interpretation, check_substochastic: bool = False) -> Matrix:
    """The matrix of ``t`` under ``interp``.

    With ``check_substochastic`` every intermediate result is checked to have
    nonnegative entries and column sums at most one.
    """
    ev = Evaluator(interp, SemiringOps(interp), check=_substochastic_check if check_substochastic else None)
    data = ev.run(t)
    node = t.node
    return Matrix(interp.dim(node.cod), interp.dim(node.dom), data, interp.semiring)
