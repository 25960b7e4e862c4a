"""Probability that a closed Boolean program returns true, exactly or with a
certified error from fixed-point circuit evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebraise import algebrise_hierarchical
from .circuit import CONST, PLUS, ArithmeticCircuit, compile_circuit, eval_nodes
from .diagrams import BOOL, HierarchicalDotDiagram
from .errors import PreconditionError, UnresolvedAcceptance
from .evaluate import interpret_term
from .semiring import RATIONAL, substochastic
from .terms import Term

DEFAULT_PRECISION_CAP = 4096
EXACT_CIRCUIT_LIMIT = 10**5
SEARCH_STEP = 8


@dataclass(frozen=True)
class DyadicRational:
    """``mantissa * 2**exponent`` with an odd mantissa, or zero as ``(0, 0)``."""

    mantissa: int
    exponent: int = 0

    def __post_init__(self):
        m, e = self.mantissa, self.exponent
        if m == 0:
            e = 0
        else:
            shift = (m & -m).bit_length() - 1
            m >>= shift
            e += shift
        object.__setattr__(self, "mantissa", m)
        object.__setattr__(self, "exponent", e)

    @classmethod
    def from_scaled(cls, n: int, bits: int) -> DyadicRational:
        """The value ``n / 2**bits``."""
        return cls(n, -bits)

    @classmethod
    def truncate(cls, x: Fraction, bits: int) -> DyadicRational:
        """``x`` rounded toward zero to ``bits`` fractional binary digits."""
        n = abs(x.numerator << bits) // x.denominator
        return cls(-n if x < 0 else n, -bits)

    def to_fraction(self) -> Fraction:
        if self.exponent >= 0:
            return Fraction(self.mantissa << self.exponent)
        return Fraction(self.mantissa, 1 << -self.exponent)

    def __float__(self) -> float:
        return float(self.to_fraction())

    def __str__(self) -> str:
        return f"{self.mantissa}*2^{self.exponent}"

    def to_json(self) -> dict:
        return {"mantissa": str(self.mantissa), "exponent": self.exponent}

    @classmethod
    def from_json(cls, data) -> DyadicRational:
        return cls(int(data["mantissa"]), int(data["exponent"]))


def _scaled_constants(C: ArithmeticCircuit, bits: int) -> dict[int, int]:
    if C.semiring != RATIONAL:
        raise PreconditionError(f"truncated evaluation needs a rational circuit, got {C.semiring.name}")
    out = {}
    for i, n in enumerate(C.nodes):
        if n[0] == CONST:
            c = Fraction(n[1])
            if not 0 <= c <= 1:
                raise PreconditionError(f"circuit constant {c} at node {i} is outside [0, 1]")
            out[i] = (c.numerator << bits) // c.denominator
    return out


def truncated_values(C: ArithmeticCircuit, bits: int) -> list[int]:
    """Every node value as an integer ``n`` standing for ``n / 2**bits``.

    Each result is rounded toward zero.  All values are nonnegative, so every
    truncated value is at most the exact one.
    """
    if bits < 0:
        raise PreconditionError("bits must be nonnegative")
    consts = _scaled_constants(C, bits)
    one = 1 << bits
    values: list[int] = []
    for i, n in enumerate(C.nodes):
        op = n[0]
        if op == CONST:
            v = consts[i]
        elif op == PLUS:
            v = values[n[1]] + values[n[2]]
        else:
            v = (values[n[1]] * values[n[2]]) >> bits
        if v > one:
            raise PreconditionError(f"circuit node {i} leaves [0, 1]; the error bound does not apply")
        values.append(v)
    return values


def truncated_eval(C: ArithmeticCircuit, bits: int) -> dict[int, DyadicRational]:
    """Value of every root, with each intermediate truncated to ``bits``
    fractional binary digits.  With ``bits = 2 * len(C) + b`` every root is
    within ``2**-b`` of its exact value."""
    values = truncated_values(C, bits)
    return {r: DyadicRational.from_scaled(values[r], bits) for r in C.roots}


def _check_query(h: HierarchicalDotDiagram):
    body = h.nodes[h.root].body
    if body.inputs or [body.sorts[v] for v in body.outputs] != [BOOL]:
        raise PreconditionError("inference needs a program with no inputs and one Boolean output")


def program_term(h: HierarchicalDotDiagram, mode: str = "heuristic") -> Term:
    _check_query(h)
    return algebrise_hierarchical(h, mode)


def exact_inference(h: HierarchicalDotDiagram, mode: str = "heuristic") -> tuple[Fraction, Fraction]:
    """``(p, q)``: the probabilities of returning true and false with every
    observation holding."""
    m = interpret_term(program_term(h, mode), substochastic())
    return m[1, 0], m[0, 0]


def output_probability(p: Fraction, q: Fraction) -> Fraction:
    return p / (p + q) if p + q else Fraction(0)


def _ceil_log2_inverse(x: Fraction) -> int:
    """Smallest ``k >= 0`` with ``2**k * x >= 1``, for ``0 < x``."""
    n = -((-x.denominator) // x.numerator)
    return max(0, (n - 1).bit_length())


@dataclass(frozen=True)
class InferenceResult:
    p_f_approx: DyadicRational
    error_bound: Fraction
    p_acc_lower_bound: DyadicRational
    digits_used: int
    circuit_size: int
    method: str

    def to_json(self) -> dict:
        return {
            "p_f": self.p_f_approx.to_json(),
            "p_f_decimal": f"{float(self.p_f_approx):.12g}",
            "error_bound": str(self.error_bound),
            "p_acc_lower_bound": self.p_acc_lower_bound.to_json(),
            "digits_used": self.digits_used,
            "circuit_size": self.circuit_size,
            "method": self.method,
        }

    def __str__(self) -> str:
        d = self.error_bound.denominator.bit_length() - 1
        return f"{float(self.p_f_approx):.12g} +- 2^-{d}"


def _roots(C: ArithmeticCircuit) -> tuple[int, int]:
    """Node ids of ``p`` (true) and ``q`` (false)."""
    return C.root(1, 0), C.root(0, 0)


def infer_circuit(C: ArithmeticCircuit, d: int, method: str = "auto",
                  precision_cap: int = DEFAULT_PRECISION_CAP) -> InferenceResult:
    """``p / (p + q)`` to within ``2**-(d+1)`` for a 2x1 rational circuit."""
    if d < 1:
        raise PreconditionError("digits must be positive")
    if (C.rows, C.cols) != (2, 1):
        raise PreconditionError(f"expected a 2x1 circuit, got {C.rows}x{C.cols}")
    if method not in ("auto", "exact", "truncated"):
        raise PreconditionError(f"unknown inference method {method!r}")
    bound = Fraction(1, 1 << (d + 1))
    rp, rq = _roots(C)
    size = len(C)
    if method == "exact" or (method == "auto" and size <= EXACT_CIRCUIT_LIMIT):
        values = eval_nodes(C)
        p, q = values[rp], values[rq]
        pf = DyadicRational.truncate(output_probability(p, q), d + 1)
        return InferenceResult(pf, bound, DyadicRational.truncate(p + q, d + 1), 0, size, "exact")

    # Truncated values never exceed the exact ones, so p~ + q~ is itself a
    # lower bound on the acceptance probability once it is positive.
    b = d + 2
    while True:
        bits = 2 * size + b
        values = truncated_values(C, bits)
        acc = values[rp] + values[rq]
        if acc > 0:
            break
        if b + SEARCH_STEP > precision_cap:
            upper = DyadicRational.from_scaled(acc + 2 * (1 << (bits - b)), bits)
            raise UnresolvedAcceptance(
                f"acceptance probability is below {float(upper):.3g}; precision cap {precision_cap} reached",
                upper)
        b += SEARCH_STEP
    lower = DyadicRational.from_scaled(acc, bits)
    need = d + 3 + _ceil_log2_inverse(lower.to_fraction())
    if need > b:
        b = need
        bits = 2 * size + b
        values = truncated_values(C, bits)
    pf = DyadicRational.truncate(Fraction(values[rp], values[rp] + values[rq]), d + 3)
    return InferenceResult(pf, bound, lower, b, size, "truncated")


def infer(h: HierarchicalDotDiagram, d: int, method: str = "auto",
          precision_cap: int = DEFAULT_PRECISION_CAP, mode: str = "heuristic") -> InferenceResult:
    C = compile_circuit(program_term(h, mode), substochastic())
    return infer_circuit(C, d, method, precision_cap)
