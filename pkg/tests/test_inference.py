from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dotalg.circuit import CONST, PLUS, TIMES, ArithmeticCircuit, compile_circuit, eval_circuit
from dotalg.errors import PreconditionError, UnresolvedAcceptance
from dotalg.frontend import load_program, parse
from dotalg.inference import (DyadicRational, exact_inference, infer, infer_circuit, output_probability,
                              program_term, truncated_eval, truncated_values)
from dotalg.semiring import RATIONAL, TROPICAL, substochastic
from dotalg.testkit import random_circuit, random_program

from oracles import program_pq

seeds = st.integers(min_value=0, max_value=10**6)


def close(result, exact, d):
    return abs(result.p_f_approx.to_fraction() - exact) <= Fraction(1, 2 ** (d + 1))


def test_dyadic_is_canonical():
    assert DyadicRational(12, 0) == DyadicRational(3, 2)
    assert DyadicRational(0, -7) == DyadicRational(0, 0)
    assert DyadicRational.truncate(Fraction(1, 3), 4).to_fraction() == Fraction(5, 16)
    x = DyadicRational(-5, -3)
    assert DyadicRational.from_json(x.to_json()) == x


def test_disease_exact(has_disease_text):
    h = load_program(has_disease_text)
    p, q = exact_inference(h)
    assert (p, q) == (Fraction("0.00000099"), Fraction("0.01959804"))
    assert (p, q) == program_pq(parse(has_disease_text))
    assert abs(float(output_probability(p, q)) - 5.0513e-5) < 1e-8


def test_single_flip():
    h = load_program("f() := flip(0.3)")
    assert exact_inference(h) == (Fraction(3, 10), Fraction(7, 10))
    assert infer(h, 10).p_f_approx.to_fraction() == DyadicRational.truncate(Fraction(3, 10), 11).to_fraction()


def test_observed_flip():
    h = load_program("f() := let x = flip(0.5); observe(x); x")
    p, q = exact_inference(h)
    assert (p, q) == (Fraction(1, 2), 0) and output_probability(p, q) == 1


IMPOSSIBLE = "f() := let x = flip(0); observe(x); x"


def test_zero_acceptance_exact_path():
    r = infer(load_program(IMPOSSIBLE), 10)
    assert r.method == "exact" and r.p_f_approx.to_fraction() == 0


def test_zero_acceptance_truncated_path():
    with pytest.raises(UnresolvedAcceptance) as err:
        infer(load_program(IMPOSSIBLE), 10, method="truncated", precision_cap=64)
    assert err.value.upper_bound.to_fraction() > 0


def test_query_interface_check():
    with pytest.raises(PreconditionError):
        program_term(load_program("f(a) := a"))


@pytest.mark.parametrize("method", ["exact", "truncated"])
def test_disease_to_thirty_digits(has_disease_text, method):
    h = load_program(has_disease_text)
    r = infer(h, 30, method=method)
    assert close(r, output_probability(*exact_inference(h)), 30)
    assert r.error_bound == Fraction(1, 2 ** 31)


@pytest.mark.parametrize("method", ["exact", "truncated"])
def test_f3_to_twenty_digits(f_family_text, method):
    r = infer(load_program(f_family_text, "f_3"), 20, method=method)
    assert close(r, Fraction(1, 4 ** 8), 20)


def test_error_bound_is_monotone(has_disease_text):
    h = load_program(has_disease_text)
    bounds = [infer(h, d, method="truncated").error_bound for d in (5, 10, 20, 40)]
    assert bounds == sorted(bounds, reverse=True)


def test_disease_circuit_at_forty_bits(has_disease_text):
    C = compile_circuit(program_term(load_program(has_disease_text)), substochastic())
    exact = eval_circuit(C)
    got = truncated_eval(C, 2 * len(C) + 40)
    for r in C.roots:
        assert 0 <= exact[r] - got[r].to_fraction() <= Fraction(1, 2 ** 40)


def test_constants_only():
    C = ArithmeticCircuit(RATIONAL, ((CONST, Fraction(3, 8)), (CONST, Fraction(1, 3))), 1, 2, (0, 1))
    got = truncated_eval(C, 3)
    assert got[0].to_fraction() == Fraction(3, 8)
    assert got[1].to_fraction() == Fraction(2, 8)


def test_dyadic_circuit_is_exact_with_enough_bits():
    nodes = ((CONST, Fraction(1, 2)), (CONST, Fraction(3, 4)), (TIMES, 0, 1), (PLUS, 2, 0), (TIMES, 3, 3))
    C = ArithmeticCircuit(RATIONAL, nodes, 1, 1, (4,))
    assert truncated_eval(C, 16)[4].to_fraction() == eval_circuit(C)[4] == Fraction(49, 64)


def test_truncation_rejects_out_of_range():
    C = ArithmeticCircuit(RATIONAL, ((CONST, Fraction(3, 2)),), 1, 1, (0,))
    with pytest.raises(PreconditionError):
        truncated_eval(C, 8)
    with pytest.raises(PreconditionError):
        truncated_eval(ArithmeticCircuit(TROPICAL, ((CONST, 1),), 1, 1, (0,)), 8)


def test_infer_circuit_checks_arguments():
    C = random_circuit(1)
    with pytest.raises(PreconditionError):
        infer_circuit(C, 10)
    with pytest.raises(PreconditionError):
        infer_circuit(ArithmeticCircuit(RATIONAL, ((CONST, Fraction(1)),), 2, 1, (0, 0)), 0)


@given(seeds, st.sampled_from([10, 20, 40]))
def test_truncation_error_on_random_circuits(seed, b):
    C = random_circuit(seed)
    exact = eval_circuit(C)
    got = truncated_eval(C, 2 * len(C) + b)
    for r in C.roots:
        assert 0 <= exact[r] - got[r].to_fraction() <= Fraction(1, 2 ** b)


@given(seeds)
def test_truncated_values_stay_in_unit_interval(seed):
    C = random_circuit(seed)
    bits = 2 * len(C) + 10
    assert all(0 <= v <= 1 << bits for v in truncated_values(C, bits))


@given(seeds, st.integers(1, 40))
def test_random_programs_within_bound(seed, d):
    h = random_program(seed)
    exact = output_probability(*exact_inference(h))
    for method in ("exact", "truncated"):
        try:
            r = infer(h, d, method=method, precision_cap=512)
        except UnresolvedAcceptance:
            assert method == "truncated" and sum(exact_inference(h)) == 0
            continue
        assert close(r, exact, d)
        assert 0 <= r.p_f_approx.to_fraction() <= 1 + r.error_bound
