"""Semirings, dense matrices over them, and symbol interpretations."""

from __future__ import annotations

import math
import operator
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Mapping

from . import kernels
from .diagrams import AND, BOOL, NOT, OBSERVE, OR, Signature, SymbolType, flip_probability
from .errors import InterfaceMismatch, InvalidInput, ResourceLimit

INF = math.inf
MERSENNE61 = (1 << 61) - 1
DEFAULT_DIM_CAP = 1 << 16


@dataclass(frozen=True, eq=False)
class Semiring:
    name: str
    zero: Any
    one: Any
    add: Callable[[Any, Any], Any]
    mul: Callable[[Any, Any], Any]
    exact: bool = True
    kernel: str | None = None
    modulus: int | None = None

    def __eq__(self, other):
        return isinstance(other, Semiring) and self.name == other.name

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return f"Semiring({self.name})"

    def coerce(self, x):
        """Convert a plain Python value into an element."""
        if self.name == "rational":
            return Fraction(x)
        if self.name == "bool":
            return bool(x)
        if self.name == "tropical":
            return INF if x in (INF, "inf") else int(x)
        return int(x) % self.modulus

    def to_json(self, x):
        if self.name == "rational":
            return str(x)
        if self.name == "tropical" and x == INF:
            return "inf"
        return x

    def from_json(self, x):
        if self.name == "rational":
            return Fraction(x)
        return self.coerce(x)

    def sample(self, rng: random.Random):
        """A random element biased towards zero and one, for tests."""
        r = rng.random()
        if r < 0.2:
            return self.zero
        if r < 0.3:
            return self.one
        if self.name == "rational":
            return Fraction(rng.randint(0, 6), rng.randint(1, 4))
        if self.name == "bool":
            return rng.random() < 0.5
        if self.name == "tropical":
            return rng.randint(0, 9)
        return rng.randrange(self.modulus)


def _mod_ops(p: int):
    return (lambda a, b: (a + b) % p), (lambda a, b: a * b % p)


RATIONAL = Semiring("rational", Fraction(0), Fraction(1), operator.add, operator.mul)
BOOLEAN = Semiring("bool", False, True, operator.or_, operator.and_, kernel="bool")
TROPICAL = Semiring("tropical", INF, 0, min, operator.add, kernel="tropical")


def prime_field(p: int = MERSENNE61) -> Semiring:
    add, mul = _mod_ops(p)
    return Semiring(f"mod{p}", 0, 1, add, mul, kernel="mod" if p < (1 << 62) else None, modulus=p)


PRIME61 = prime_field()

SEMIRINGS = {"rational": RATIONAL, "bool": BOOLEAN, "tropical": TROPICAL, "prime": PRIME61}


def semiring_by_name(name: str) -> Semiring:
    if name in SEMIRINGS:
        return SEMIRINGS[name]
    if name.startswith("mod"):
        return prime_field(int(name[3:]))
    raise InvalidInput(f"unknown semiring {name!r}")


@dataclass(frozen=True)
class Matrix:
    rows: int
    cols: int
    data: tuple
    semiring: Semiring = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "data", tuple(self.data))
        if self.rows * self.cols != len(self.data):
            raise InvalidInput(f"{self.rows}x{self.cols} matrix needs {self.rows * self.cols} entries")

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i * self.cols + j]

    def to_rows(self) -> list[list]:
        c = self.cols
        return [list(self.data[i * c : (i + 1) * c]) for i in range(self.rows)]

    @classmethod
    def from_rows(cls, rows, semiring: Semiring) -> Matrix:
        rows = [[semiring.coerce(x) for x in r] for r in rows]
        ncols = len(rows[0]) if rows else 0
        return cls(len(rows), ncols, tuple(x for r in rows for x in r), semiring)

    def is_substochastic(self) -> bool:
        c = self.cols
        return all(x >= 0 for x in self.data) and all(
            sum(self.data[j::c]) <= 1 for j in range(c)
        )


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if a.cols != b.rows:
        raise InterfaceMismatch(f"matmul of {a.rows}x{a.cols} by {b.rows}x{b.cols}")
    sr = a.semiring
    n, k, m = a.rows, a.cols, b.cols
    fast = kernels.matmul_for(sr)
    if fast is not None:
        return Matrix(n, m, fast(a.data, b.data, n, k, m), sr)
    zero, add, mul = sr.zero, sr.add, sr.mul
    ad, bd = a.data, b.data
    out = [zero] * (n * m)
    for i in range(n):
        base = i * m
        for t in range(k):
            x = ad[i * k + t]
            if x == zero:
                continue
            row = t * m
            for j in range(m):
                y = bd[row + j]
                if y != zero:
                    out[base + j] = add(out[base + j], mul(x, y))
    return Matrix(n, m, out, sr)


def kronecker(a: Matrix, b: Matrix) -> Matrix:
    sr = a.semiring
    fast = kernels.kron_for(sr)
    rows, cols = a.rows * b.rows, a.cols * b.cols
    if fast is not None:
        return Matrix(rows, cols, fast(a.data, b.data, a.rows, a.cols, b.rows, b.cols), sr)
    zero, mul = sr.zero, sr.mul
    out = [zero] * (rows * cols)
    bd = b.data
    for i in range(a.rows):
        for j in range(a.cols):
            x = a.data[i * a.cols + j]
            if x == zero:
                continue
            for r in range(b.rows):
                base = (i * b.rows + r) * cols + j * b.cols
                for c in range(b.cols):
                    y = bd[r * b.cols + c]
                    if y != zero:
                        out[base + c] = mul(x, y)
    return Matrix(rows, cols, out, sr)


def identity_matrix(n: int, sr: Semiring) -> Matrix:
    data = [sr.zero] * (n * n)
    for i in range(n):
        data[i * n + i] = sr.one
    return Matrix(n, n, data, sr)


def _check_dims(rows: int, cols: int, cap: int):
    if rows > cap or cols > cap:
        raise ResourceLimit(f"matrix interface {rows}x{cols} exceeds the cap {cap}")


GENERATORS = ("id", "swap", "copy", "del", "equate", "new")


def generator_matrix(kind: str, sorts, interp: Interpretation, sorts2=()) -> Matrix:
    """Matrix of a structural generator on a sort list.

    ``swap`` takes the two sort lists it exchanges; the other kinds use one.
    """
    sr = interp.semiring
    zero, one = sr.zero, sr.one
    d = interp.dim(sorts)
    if kind == "id":
        _check_dims(d, d, interp.cap)
        return identity_matrix(d, sr)
    if kind == "swap":
        e = interp.dim(sorts2)
        n = d * e
        _check_dims(n, n, interp.cap)
        data = [zero] * (n * n)
        for i in range(d):
            for j in range(e):
                data[(j * d + i) * n + (i * e + j)] = one
        return Matrix(n, n, data, sr)
    if kind == "copy":
        _check_dims(d * d, d, interp.cap)
        data = [zero] * (d * d * d)
        for i in range(d):
            data[(i * d + i) * d + i] = one
        return Matrix(d * d, d, data, sr)
    if kind == "equate":
        _check_dims(d, d * d, interp.cap)
        data = [zero] * (d * d * d)
        for i in range(d):
            data[i * d * d + i * d + i] = one
        return Matrix(d, d * d, data, sr)
    if kind == "del":
        _check_dims(1, d, interp.cap)
        return Matrix(1, d, [one] * d, sr)
    if kind == "new":
        _check_dims(d, 1, interp.cap)
        return Matrix(d, 1, [one] * d, sr)
    raise InvalidInput(f"unknown generator {kind!r}")


@dataclass
class Interpretation:
    """Sort dimensions plus a matrix for every symbol.

    ``resolver`` supplies matrices for symbol families that cannot be listed up
    front, such as ``flip(p)`` for every rational ``p``.
    """

    semiring: Semiring
    sort_dim: Mapping[str, int]
    symbols: dict[str, Matrix] = field(default_factory=dict)
    resolver: Callable[[str], Matrix | None] | None = None
    cap: int = DEFAULT_DIM_CAP

    def dim(self, sorts) -> int:
        d = 1
        for s in sorts:
            try:
                d *= self.sort_dim[s]
            except KeyError:
                raise InvalidInput(f"interpretation has no dimension for sort {s!r}") from None
        return d

    def matrix(self, sym: str) -> Matrix:
        m = self.symbols.get(sym)
        if m is None and self.resolver is not None:
            m = self.resolver(sym)
            if m is not None:
                self.symbols[sym] = m
        if m is None:
            raise InvalidInput(f"interpretation has no matrix for symbol {sym!r}")
        return m

    def check_type(self, sym: str, dom, cod) -> Matrix:
        m = self.matrix(sym)
        if (m.rows, m.cols) != (self.dim(cod), self.dim(dom)):
            raise InterfaceMismatch(f"matrix for {sym!r} is {m.rows}x{m.cols}, expected "
                                    f"{self.dim(cod)}x{self.dim(dom)}")
        return m


# Tables of the Boolean core, read with 0 = false and 1 = true.  Columns are
# indexed by the inputs with the first input most significant.
_CORE_TABLES = {
    AND: [[1, 1, 1, 0], [0, 0, 0, 1]],
    OR: [[1, 0, 0, 0], [0, 1, 1, 1]],
    NOT: [[0, 1], [1, 0]],
    OBSERVE: [[0, 1]],
}


def _core_interpretation(sr: Semiring, encode, flip_column) -> Interpretation:
    symbols = {
        sym: Matrix.from_rows([[encode(x) for x in row] for row in rows], sr)
        for sym, rows in _CORE_TABLES.items()
    }

    def resolve(sym: str):
        p = flip_probability(sym)
        if p is None:
            return None
        if not 0 <= p <= 1:
            raise InvalidInput(f"{sym}: probability outside [0, 1]")
        return Matrix(2, 1, flip_column(p), sr)

    return Interpretation(sr, {BOOL: 2}, symbols, resolve)


def substochastic() -> Interpretation:
    return _core_interpretation(RATIONAL, Fraction, lambda p: (1 - p, p))


def boolean() -> Interpretation:
    """Possibility reading: a flip can yield the outcomes of nonzero probability."""
    return _core_interpretation(BOOLEAN, bool, lambda p: (p < 1, p > 0))


def tropical() -> Interpretation:
    """Feasibility reading as costs: 0 for possible, infinity for impossible."""
    enc = lambda x: 0 if x else INF  # noqa: E731
    return _core_interpretation(TROPICAL, enc, lambda p: (enc(p < 1), enc(p > 0)))


def random_interpretation(
    sr: Semiring,
    types: Mapping[str, SymbolType],
    seed: int = 0,
    dims: Mapping[str, int] | None = None,
    uniform: bool = False,
) -> Interpretation:
    """Random matrices for the given symbol types; sorts default to dimension 2.

    ``uniform`` draws prime-field entries uniformly instead of favouring 0 and 1.
    """
    rng = random.Random(seed)
    sample = (lambda r: r.randrange(sr.modulus)) if uniform and sr.modulus else sr.sample
    sort_dim = dict(dims or {})
    for dom, cod in types.values():
        for s in dom + cod:
            sort_dim.setdefault(s, 2)
    interp = Interpretation(sr, sort_dim)
    for sym in sorted(types):
        dom, cod = types[sym]
        r, c = interp.dim(cod), interp.dim(dom)
        interp.symbols[sym] = Matrix(r, c, [sample(rng) for _ in range(r * c)], sr)
    return interp


def random_prime_field_for(types: Mapping[str, SymbolType], seed: int = 0, dims=None) -> Interpretation:
    return random_interpretation(PRIME61, types, seed, dims, uniform=True)


def random_prime_field(seed: int, signature: Signature, dims=None) -> Interpretation:
    return random_prime_field_for(signature.symbols, seed, {**dict.fromkeys(signature.sorts, 2), **(dims or {})})
