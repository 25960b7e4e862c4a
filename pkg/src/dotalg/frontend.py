"""Surface language for Boolean probabilistic programs.

A program is a list of functions::

    test(z) :=
      let tp = z && flip(0.99);
      let fp = !z && flip(0.02);
      tp || fp

``desugar`` turns every function into one node of a hierarchical diagram, with
one assignment per operator, flip, call or observation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .diagrams import (AND, BOOL, NOT, OBSERVE, OR, Assignment, CallNode, DotDiagram,
                       HierarchicalDotDiagram, bool_stoch_signature, flip_probability, flip_symbol)
from .errors import ParseError, PreconditionError

Pos = tuple[int, int]

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>(?:\#|//)[^\n]*)
  | (?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>:=|&&|\|\||[∧∨¬!(),;=/])
""", re.VERBOSE)

_SPELLING = {"&&": "∧", "||": "∨", "!": "¬"}
KEYWORDS = {"let", "observe", "flip", "true", "false"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: Pos


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, start, i = 1, 0, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        pos = (line, i - start + 1)
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind == "ident":
            word = m.group()
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, pos))
        elif kind == "number":
            tokens.append(Token("number", m.group(), pos))
        elif kind == "op":
            tokens.append(Token("op", _SPELLING.get(m.group(), m.group()), pos))
        i = m.end()
    tokens.append(Token("eof", "", (line, i - start + 1)))
    return tokens


# Abstract syntax.

@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Flip:
    p: Fraction
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Not:
    arg: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    pos: Pos = field(default=(0, 0), compare=False)


Expr = Union[Var, Flip, Not, BinOp, Call]


@dataclass(frozen=True)
class Let:
    targets: tuple[str, ...]
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Observe:
    expr: Expr
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class CallStmt:
    call: Call
    pos: Pos = field(default=(0, 0), compare=False)


Stmt = Union[Let, Observe, CallStmt]


@dataclass(frozen=True)
class Function:
    name: str
    params: tuple[str, ...]
    body: tuple[Stmt, ...]
    returns: tuple[Expr, ...]
    pos: Pos = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Program:
    functions: tuple[Function, ...]

    def function(self, name: str) -> Function:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def entry(self) -> str:
        return self.functions[-1].name


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return ParseError(f"{message}, found {found!r}", *tok.pos)

    def at(self, kind: str, text: str | None = None, offset: int = 0) -> bool:
        t = self.tokens[min(self.i + offset, len(self.tokens) - 1)]
        return t.kind == kind and (text is None or t.text == text)

    def expect(self, kind: str, text: str | None = None) -> Token:
        if not self.at(kind, text):
            raise self.error(f"expected {text or kind}")
        tok = self.tok
        self.i += 1
        return tok

    def accept(self, kind: str, text: str) -> bool:
        if self.at(kind, text):
            self.i += 1
            return True
        return False

    def at_header(self) -> bool:
        """Lookahead for ``IDENT ( idents ) :=``, the start of a function."""
        if not self.at("ident") or not self.at("op", "(", 1):
            return False
        j = 2
        while self.at("ident", None, j) or self.at("op", ",", j):
            j += 1
        return self.at("op", ")", j) and self.at("op", ":=", j + 1)

    def program(self) -> Program:
        functions = []
        while not self.at("eof"):
            functions.append(self.function())
        if not functions:
            raise self.error("expected a function definition")
        return Program(tuple(functions))

    def function(self) -> Function:
        if not self.at_header():
            raise self.error("expected a function definition")
        name = self.expect("ident")
        self.expect("op", "(")
        params = []
        if not self.at("op", ")"):
            params.append(self.expect("ident").text)
            while self.accept("op", ","):
                params.append(self.expect("ident").text)
        self.expect("op", ")")
        self.expect("op", ":=")
        body: list[Stmt] = []
        while True:
            tok = self.tok
            if self.accept("kw", "let"):
                targets = [self.expect("ident").text]
                while self.accept("op", ","):
                    targets.append(self.expect("ident").text)
                self.expect("op", "=")
                body.append(Let(tuple(targets), self.expr(), tok.pos))
                self.expect("op", ";")
            elif self.accept("kw", "observe"):
                self.expect("op", "(")
                body.append(Observe(self.expr(), tok.pos))
                self.expect("op", ")")
                self.expect("op", ";")
            elif self.at("ident") and self.at("op", "(", 1) and not self.at_header() and self._call_statement():
                call = self.primary()
                self.expect("op", ";")
                body.append(CallStmt(call, tok.pos))
            else:
                break
        returns = []
        if not self.at("eof") and not self.at_header():
            returns.append(self.expr())
            while self.accept("op", ","):
                returns.append(self.expr())
        return Function(name.text, tuple(params), tuple(body), tuple(returns), name.pos)

    def _call_statement(self) -> bool:
        """True when the call starting here is followed by ``;``."""
        depth, j = 0, 1
        while True:
            t = self.tokens[min(self.i + j, len(self.tokens) - 1)]
            if t.kind == "eof":
                return False
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
                if depth == 0:
                    return self.at("op", ";", j + 1)
            j += 1

    def expr(self) -> Expr:
        left = self.conj()
        while self.at("op", "∨"):
            tok = self.expect("op")
            left = BinOp(OR, left, self.conj(), tok.pos)
        return left

    def conj(self) -> Expr:
        left = self.unary()
        while self.at("op", "∧"):
            tok = self.expect("op")
            left = BinOp(AND, left, self.unary(), tok.pos)
        return left

    def unary(self) -> Expr:
        if self.at("op", "¬"):
            tok = self.expect("op")
            return Not(self.unary(), tok.pos)
        return self.primary()

    def primary(self) -> Expr:
        tok = self.tok
        if self.accept("op", "("):
            e = self.expr()
            self.expect("op", ")")
            return e
        if self.accept("kw", "true"):
            return Flip(Fraction(1), tok.pos)
        if self.accept("kw", "false"):
            return Flip(Fraction(0), tok.pos)
        if self.accept("kw", "flip"):
            self.expect("op", "(")
            p = self.rational()
            self.expect("op", ")")
            if not 0 <= p <= 1:
                raise ParseError(f"flip probability {p} is outside [0, 1]", *tok.pos)
            return Flip(p, tok.pos)
        if self.at("ident"):
            self.i += 1
            if not self.accept("op", "("):
                return Var(tok.text, tok.pos)
            args = []
            if not self.at("op", ")"):
                args.append(self.expr())
                while self.accept("op", ","):
                    args.append(self.expr())
            self.expect("op", ")")
            return Call(tok.text, tuple(args), tok.pos)
        raise self.error("expected an expression")

    def rational(self) -> Fraction:
        num = self.expect("number")
        value = Fraction(num.text)
        if self.accept("op", "/"):
            den = self.expect("number")
            if not den.text.isdigit() or int(den.text) == 0:
                raise ParseError("denominator must be a positive integer", *den.pos)
            value /= int(den.text)
        return value


def _check(program: Program) -> None:
    """Names resolve, arities match, and calls do not recurse."""
    table: dict[str, Function] = {}
    for f in program.functions:
        if f.name in table:
            raise ParseError(f"function {f.name!r} is defined twice", *f.pos)
        if f.name in KEYWORDS:
            raise ParseError(f"{f.name!r} is reserved", *f.pos)
        if len(set(f.params)) != len(f.params):
            raise ParseError(f"{f.name} repeats a parameter", *f.pos)
        table[f.name] = f

    def call_arity(c: Call, scope: set[str]) -> int:
        callee = table.get(c.name)
        if callee is None:
            raise ParseError(f"unresolved function {c.name!r}", *c.pos)
        if len(c.args) != len(callee.params):
            raise ParseError(f"{c.name} takes {len(callee.params)} arguments, got {len(c.args)}", *c.pos)
        for a in c.args:
            single(a, scope)
        return len(callee.returns)

    def single(e: Expr, scope: set[str]) -> None:
        if isinstance(e, Var):
            if e.name not in scope:
                raise ParseError(f"unresolved variable {e.name!r}", *e.pos)
        elif isinstance(e, Not):
            single(e.arg, scope)
        elif isinstance(e, BinOp):
            single(e.left, scope)
            single(e.right, scope)
        elif isinstance(e, Call):
            n = call_arity(e, scope)
            if n != 1:
                raise ParseError(f"{e.name} returns {n} values where one is expected", *e.pos)

    calls: dict[str, set[str]] = {}
    for f in program.functions:
        scope = set(f.params)
        for s in f.body:
            if isinstance(s, Let):
                if len(s.targets) > 1 or isinstance(s.expr, Call):
                    if not isinstance(s.expr, Call):
                        raise ParseError("a multi-target let needs a call on the right", *s.pos)
                    n = call_arity(s.expr, scope)
                    if n != len(s.targets):
                        raise ParseError(f"{s.expr.name} returns {n} values, {len(s.targets)} targets given",
                                         *s.pos)
                else:
                    single(s.expr, scope)
                scope.update(s.targets)
            elif isinstance(s, Observe):
                single(s.expr, scope)
            else:
                call_arity(s.call, scope)
        for r in f.returns:
            single(r, scope)
        calls[f.name] = set(_called(f))

    state: dict[str, int] = {}
    for root in table:
        if root in state:
            continue
        stack = [(root, iter(sorted(calls[root])))]
        state[root] = 1
        while stack:
            v, it = stack[-1]
            w = next(it, None)
            if w is None:
                state[v] = 2
                stack.pop()
            elif state.get(w) == 1:
                raise ParseError(f"recursive call cycle through {w!r}", *table[w].pos)
            elif w not in state:
                state[w] = 1
                stack.append((w, iter(sorted(calls[w]))))


def _called(f: Function):
    def walk(e):
        if isinstance(e, Call):
            yield e.name
            for a in e.args:
                yield from walk(a)
        elif isinstance(e, Not):
            yield from walk(e.arg)
        elif isinstance(e, BinOp):
            yield from walk(e.left)
            yield from walk(e.right)

    for s in f.body:
        yield from walk(s.call if isinstance(s, CallStmt) else s.expr)
    for r in f.returns:
        yield from walk(r)


def parse(text: str) -> Program:
    program = _Parser(text).program()
    _check(program)
    return program


# Desugaring.

class _Body:
    def __init__(self, fn: Function, table: dict[str, Function]):
        self.table = table
        self.names: list[str] = []
        self.assignments: list[Assignment] = []
        self.scope: dict[str, int] = {}
        self.temps = 0
        self.calls: dict[str, tuple] = {}
        self.inputs = [self.scope.setdefault(p, self.fresh(p)) for p in fn.params]

    def fresh(self, name: str | None = None) -> int:
        if name is None:
            name = f"%tmp{self.temps}"
            self.temps += 1
        self.names.append(name)
        return len(self.names) - 1

    def emit(self, outs, sym: str, ins) -> None:
        self.assignments.append(Assignment(tuple(outs), sym, tuple(ins)))

    def call(self, c: Call, targets) -> list[int]:
        args = [self.value(a) for a in c.args]
        outs = [self.fresh(t) for t in targets]
        callee = self.table[c.name]
        self.calls[c.name] = ((BOOL,) * len(callee.params), (BOOL,) * len(callee.returns))
        self.emit(outs, c.name, args)
        return outs

    def value(self, e: Expr, name: str | None = None) -> int:
        if isinstance(e, Var):
            return self.scope[e.name]
        if isinstance(e, Call):
            return self.call(e, [name])[0]
        if isinstance(e, Flip):
            ins, sym = (), flip_symbol(e.p)
        elif isinstance(e, Not):
            ins, sym = (self.value(e.arg),), NOT
        else:
            ins, sym = (self.value(e.left), self.value(e.right)), e.op
        out = self.fresh(name)
        self.emit((out,), sym, ins)
        return out

    def statement(self, s: Stmt) -> None:
        if isinstance(s, Let):
            if isinstance(s.expr, Call):
                outs = self.call(s.expr, s.targets)
            else:
                outs = [self.value(s.expr, s.targets[0])]
            self.scope.update(zip(s.targets, outs))
        elif isinstance(s, Observe):
            self.emit((), OBSERVE, (self.value(s.expr),))
        else:
            self.call(s.call, [])


def _flips(program: Program) -> set[Fraction]:
    found: set[Fraction] = set()

    def walk(e):
        if isinstance(e, Flip):
            found.add(e.p)
        elif isinstance(e, Not):
            walk(e.arg)
        elif isinstance(e, BinOp):
            walk(e.left)
            walk(e.right)
        elif isinstance(e, Call):
            for a in e.args:
                walk(a)

    for f in program.functions:
        for s in f.body:
            walk(s.call if isinstance(s, CallStmt) else s.expr)
        for r in f.returns:
            walk(r)
    return found


def desugar(program: Program, entry: str | None = None) -> HierarchicalDotDiagram:
    """One call node per function reachable from ``entry`` (default: the last
    function); a function called from several places is a single node."""
    table = {f.name: f for f in program.functions}
    entry = program.entry if entry is None else entry
    if entry not in table:
        raise ParseError(f"no function named {entry!r}")
    nodes: dict[str, CallNode] = {}
    pending = [entry]
    while pending:
        name = pending.pop()
        if name in nodes:
            continue
        fn = table[name]
        b = _Body(fn, table)
        for s in fn.body:
            b.statement(s)
        outputs = [b.value(r) for r in fn.returns]
        body = DotDiagram((BOOL,) * len(b.names), tuple(b.assignments), tuple(b.inputs),
                          tuple(outputs), tuple(b.names))
        nodes[name] = CallNode(body, dict(b.calls), {c: c for c in b.calls})
        pending.extend(b.calls)
    base = bool_stoch_signature(sorted(_flips(program)))
    return HierarchicalDotDiagram(entry, nodes, base)


def load_program(text: str, entry: str | None = None) -> HierarchicalDotDiagram:
    return desugar(parse(text), entry)


# Printing.

def _format_rational(p: Fraction) -> str:
    return str(p.numerator) if p.denominator == 1 else f"{p.numerator}/{p.denominator}"


def _format_expr(e: Expr, level: int = 0) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Flip):
        return f"flip({_format_rational(e.p)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(_format_expr(a) for a in e.args)})"
    if isinstance(e, Not):
        return "!" + _format_expr(e.arg, 2)
    mine = 1 if e.op == AND else 0
    text = f"{_format_expr(e.left, mine)} {'&&' if e.op == AND else '||'} {_format_expr(e.right, mine + 1)}"
    return f"({text})" if level > mine else text


def format_program(program: Program) -> str:
    """Source text that parses back to ``program``."""
    out = []
    for f in program.functions:
        out.append(f"{f.name}({', '.join(f.params)}) :=")
        for s in f.body:
            if isinstance(s, Let):
                out.append(f"  let {', '.join(s.targets)} = {_format_expr(s.expr)};")
            elif isinstance(s, Observe):
                out.append(f"  observe({_format_expr(s.expr)});")
            else:
                out.append(f"  {_format_expr(s.call)};")
        if f.returns:
            out.append("  " + ", ".join(_format_expr(r) for r in f.returns))
        out.append("")
    return "\n".join(out)


_OPS = {AND: 2, OR: 2, NOT: 1}


def _node_function(name: str, node: CallNode) -> Function:
    f = node.body
    if len(set(f.inputs)) != len(f.inputs):
        raise PreconditionError(f"{name}: repeated inputs have no surface syntax")
    used: set[str] = set()
    label: dict[int, str] = {}

    def ident(v: int) -> str:
        if v not in label:
            base = re.sub(r"[^A-Za-z0-9_]", "", f.var_name(v)) or "v"
            if not re.match(r"[A-Za-z_]", base) or base in KEYWORDS:
                base = "v" + base
            text, k = base, 1
            while text in used:
                k += 1
                text = f"{base}_{k}"
            used.add(text)
            label[v] = text
        return label[v]

    defined = set(f.inputs)
    params = tuple(ident(v) for v in f.inputs)
    body: list[Stmt] = []
    for a in f.assignments:
        for v in a.ins:
            if v not in defined:
                raise PreconditionError(f"{name}: variable {f.var_name(v)} is read before it is set")
        if any(v in defined for v in a.outs) or len(set(a.outs)) != len(a.outs):
            raise PreconditionError(f"{name}: variable set twice in {a.sym}")
        args = tuple(Var(ident(v)) for v in a.ins)
        p = flip_probability(a.sym)
        if a.sym == OBSERVE:
            body.append(Observe(args[0]))
            continue
        if p is not None:
            expr: Expr = Flip(p)
        elif a.sym in _OPS and len(a.ins) == _OPS[a.sym] and len(a.outs) == 1:
            expr = Not(args[0]) if a.sym == NOT else BinOp(a.sym, args[0], args[1])
        elif a.sym in node.defn:
            expr = Call(a.sym, args)
        else:
            raise PreconditionError(f"{name}: symbol {a.sym!r} has no surface syntax")
        defined.update(a.outs)
        if a.outs:
            body.append(Let(tuple(ident(v) for v in a.outs), expr))
        elif isinstance(expr, Call):
            body.append(CallStmt(expr))
        else:
            raise PreconditionError(f"{name}: {a.sym} without outputs")
    for v in f.outputs:
        if v not in defined:
            raise PreconditionError(f"{name}: output {f.var_name(v)} is never set")
    returns = tuple(Var(ident(v)) for v in f.outputs)
    return Function(name, params, tuple(body), returns)


def hierarchy_to_program(h: HierarchicalDotDiagram) -> Program:
    """Inverse of :func:`desugar` for diagrams that came from a program; the
    entry function is printed last."""
    order = h.topological()
    for v in order:
        node = h.nodes[v]
        if any(c != sym for sym, c in node.defn.items()):
            raise PreconditionError("call symbols must be named after the nodes they call")
    return Program(tuple(_node_function(v, h.nodes[v]) for v in order))


def pretty(h: HierarchicalDotDiagram) -> str:
    return format_program(hierarchy_to_program(h))
