"""Brute-force references that share no code with the pipeline.

Programs are run directly on their syntax tree, enumerating every flip
outcome with exact rationals.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from dotalg.frontend import BinOp, Call, CallStmt, Flip, Let, Not, Observe, Program, Var

Dist = dict  # value tuple -> probability mass


def _product(dists: list[Dist]) -> Dist:
    out: Dist = {(): Fraction(1)}
    for d in dists:
        nxt: Dist = {}
        for a, p in out.items():
            for b, q in d.items():
                nxt[a + b] = nxt.get(a + b, 0) + p * q
        out = nxt
    return out


class ProgramRunner:
    def __init__(self, program: Program):
        self.program = program
        self.cache: dict = {}

    def call(self, name: str, args: tuple[bool, ...]) -> Dist:
        """Sub-distribution of the return tuple; lost mass is rejected runs."""
        key = (name, args)
        if key not in self.cache:
            f = self.program.function(name)
            worlds = [(dict(zip(f.params, args)), Fraction(1))]
            for stmt in f.body:
                worlds = self._step(stmt, worlds)
            out: Dist = {}
            for env, p in worlds:
                for vals, q in _product([self.expr(e, env) for e in f.returns]).items():
                    out[vals] = out.get(vals, 0) + p * q
            self.cache[key] = out
        return self.cache[key]

    def _step(self, stmt, worlds):
        out = []
        for env, p in worlds:
            if isinstance(stmt, Let):
                for vals, q in self.expr(stmt.expr, env).items():
                    out.append(({**env, **dict(zip(stmt.targets, vals))}, p * q))
            elif isinstance(stmt, Observe):
                for (v,), q in self.expr(stmt.expr, env).items():
                    if v:
                        out.append((env, p * q))
            elif isinstance(stmt, CallStmt):
                mass = sum(self.expr(stmt.call, env).values())
                out.append((env, p * mass))
            else:
                raise TypeError(stmt)
        return out

    def expr(self, e, env) -> Dist:
        if isinstance(e, Var):
            return {(env[e.name],): Fraction(1)}
        if isinstance(e, Flip):
            return {(True,): e.p, (False,): 1 - e.p}
        if isinstance(e, Not):
            return {(not v,): p for (v,), p in self.expr(e.arg, env).items()}
        if isinstance(e, BinOp):
            out: Dist = {}
            for ((a,), p), ((b,), q) in itertools.product(self.expr(e.left, env).items(),
                                                          self.expr(e.right, env).items()):
                v = (a and b) if e.op == "and" else (a or b)
                out[(v,)] = out.get((v,), 0) + p * q
            return out
        if isinstance(e, Call):
            out = {}
            for args, p in _product([self.expr(a, env) for a in e.args]).items():
                for vals, q in self.call(e.name, args).items():
                    out[vals] = out.get(vals, 0) + p * q
            return out
        raise TypeError(e)


def program_pq(program: Program, entry: str | None = None) -> tuple[Fraction, Fraction]:
    """``(P(return true), P(return false))`` of a closed one-output function."""
    dist = ProgramRunner(program).call(entry or program.entry, ())
    return Fraction(dist.get((True,), 0)), Fraction(dist.get((False,), 0))


def matmul(a, b, add, mul, zero):
    """Plain triple loop over lists of rows."""
    return [[_sum((mul(a[i][k], b[k][j]) for k in range(len(b))), add, zero) for j in range(len(b[0]))]
            for i in range(len(a))]


def _sum(xs, add, zero):
    acc = zero
    for x in xs:
        acc = add(acc, x)
    return acc


def query_answers(q, instance) -> set[tuple[int, ...]]:
    """Try every valuation of every variable of the query."""
    n = len(instance.domain)
    names = q.variables
    out = set()
    for values in itertools.product(range(n), repeat=len(names)):
        env = dict(zip(names, values))
        if all(tuple(env[x] for x in a.args) in instance.relations.get(a.relation, ()) for a in q.atoms):
            out.add(tuple(env[v] for v in q.free))
    return out


def attack_cost(tree) -> float:
    """Cheapest subset of basic events that makes the root true, by recursion
    on the root for every subset."""
    events = sorted(tree.costs)

    def holds(v, chosen):
        if v not in tree.gates:
            return v in chosen
        kind, children = tree.gates[v]
        test = all if kind == "AND" else any
        return test(holds(c, chosen) for c in children)

    best = float("inf")
    for k in range(len(events) + 1):
        for chosen in itertools.combinations(events, k):
            if holds(tree.root, set(chosen)):
                best = min(best, sum(tree.costs[e] for e in chosen))
    return best
