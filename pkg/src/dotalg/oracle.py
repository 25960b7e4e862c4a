"""Brute-force semantics of a dot diagram.

Sums, over every valuation of every variable, the product of the symbol matrix
entries selected by the assignments, and adds it to the matrix entry indexed by
the output and input valuations.  Shares nothing with the term or circuit
evaluators beyond the interpretation tables, so it can serve as their oracle.
"""

from __future__ import annotations

from math import prod

from .diagrams import DotDiagram
from .errors import ResourceLimit
from .semiring import Interpretation, Matrix

ORACLE_LIMIT = 10**7


def _strides(dims_of_list: list[int]) -> list[int]:
    out = [1] * len(dims_of_list)
    for i in range(len(dims_of_list) - 2, -1, -1):
        out[i] = out[i + 1] * dims_of_list[i + 1]
    return out


def oracle_semantics(f: DotDiagram, interp: Interpretation, limit: int = ORACLE_LIMIT) -> Matrix:
    sr = interp.semiring
    zero, one, add, mul = sr.zero, sr.one, sr.add, sr.mul
    n = f.num_vars
    dims = [interp.dim((s,)) for s in f.sorts]
    if prod(dims) > limit:
        raise ResourceLimit(f"oracle would enumerate {prod(dims)} valuations (limit {limit})")

    # Each factor is checked as soon as its last variable has a value.
    due: list[list[tuple]] = [[] for _ in range(n + 1)]
    for a in f.assignments:
        m = interp.check_type(a.sym, f.sorts_of(a.ins), f.sorts_of(a.outs))
        ins, outs = list(a.ins), list(a.outs)
        factor = (m.data, m.cols, outs, _strides([dims[v] for v in outs]),
                  ins, _strides([dims[v] for v in ins]))
        last = max(ins + outs, default=-1)
        due[last + 1].append(factor)

    in_dims = [dims[v] for v in f.inputs]
    out_dims = [dims[v] for v in f.outputs]
    rows, cols = prod(out_dims), prod(in_dims)
    in_str, out_str = _strides(in_dims), _strides(out_dims)
    result = [zero] * (rows * cols)
    val = [0] * n

    def weight(factors, acc):
        for data, ncols, outs, ostr, ins, istr in factors:
            r = sum(val[v] * s for v, s in zip(outs, ostr))
            c = sum(val[v] * s for v, s in zip(ins, istr))
            acc = mul(acc, data[r * ncols + c])
            if acc == zero:
                return zero
        return acc

    def visit(i: int, acc):
        if i == n:
            r = sum(val[v] * s for v, s in zip(f.outputs, out_str))
            c = sum(val[v] * s for v, s in zip(f.inputs, in_str))
            result[r * cols + c] = add(result[r * cols + c], acc)
            return
        for x in range(dims[i]):
            val[i] = x
            w = weight(due[i + 1], acc)
            if w != zero:
                visit(i + 1, w)

    start = weight(due[0], one)
    if start != zero:
        visit(0, start)
    return Matrix(rows, cols, result, sr)
