import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dotalg.diagrams import OBSERVE, equivalent, flip_probability, unfold, validate
from dotalg.errors import ParseError
from dotalg.frontend import Let, Program, desugar, format_program, load_program, parse, pretty, tokenize
from dotalg.oracle import oracle_semantics
from dotalg.semiring import substochastic
from dotalg.testkit import random_program, random_program_ast

from oracles import program_pq


def test_parse_disease_program(has_disease_text):
    p = parse(has_disease_text)
    assert [f.name for f in p.functions] == ["test", "hasDisease"]
    assert sum(isinstance(s, Let) for s in p.function("test").body) == 5


def test_parse_one_line():
    p = parse("f() := let x = flip(0.5); x")
    assert len(p.functions) == 1
    assert p.function("f").body[0].expr.p == Fraction(1, 2)


def test_ascii_and_unicode_spellings_agree():
    a = parse("f(z) := let y = z ∧ ¬z ∨ flip(1/3); y")
    b = parse("f(z) :=\n  let y = z && !z || flip(1/3);\n  y")
    assert desugar(a) == desugar(b)


@pytest.mark.parametrize("source, fragment, pos", [
    ("f() := let x = g(); x", "unresolved function", (1, 16)),
    ("f() := let x = flip(1.5); x", "outside [0, 1]", (1, 16)),
    ("f() := g()\ng() := f()", "recursive", (1, 1)),
    ("f() :=\n  let x = ; x", "expected an expression", (2, 11)),
    ("f() := let x = y; x", "unresolved variable", (1, 16)),
])
def test_parse_errors_carry_position(source, fragment, pos):
    with pytest.raises(ParseError) as err:
        parse(source)
    assert fragment in str(err.value)
    assert (err.value.line, err.value.col) == pos


def test_desugar_disease_shares_test_node(has_disease_text):
    h = load_program(has_disease_text)
    assert set(h.nodes) == {"hasDisease", "test"}
    root = h.nodes["hasDisease"]
    assert root.defn == {"test": "test"}
    assert sum(a.sym == "test" for a in root.body.assignments) == 2


def test_desugar_negation_gets_one_fresh_variable(has_disease_text):
    body = load_program(has_disease_text).nodes["test"].body
    fresh = [v for v in range(body.num_vars) if body.var_name(v).startswith("%tmp")]
    assert [body.var_name(v) for v in fresh] == ["%tmp0"]
    (neg,) = [a for a in body.assignments if a.outs == (fresh[0],)]
    assert neg.sym == "not" and body.var_name(neg.ins[0]) == "z"


def test_desugar_bare_flip():
    h = load_program("f() := flip(0.5)")
    body = h.nodes["f"].body
    assert len(h.nodes) == 1 and len(body.assignments) == 1
    assert body.outputs == body.assignments[0].outs


def test_observe_has_no_outputs(has_disease_text):
    body = load_program(has_disease_text).nodes["hasDisease"].body
    (obs,) = [a for a in body.assignments if a.sym == OBSERVE]
    assert obs.outs == () and len(obs.ins) == 1


def test_one_flip_symbol_per_literal(has_disease_text):
    base = load_program(has_disease_text).base
    flips = sorted(flip_probability(s) for s in base.symbols if flip_probability(s) is not None)
    assert flips == [Fraction(1, 10000), Fraction(1, 50), Fraction(99, 100)]


def test_literals_become_flips():
    body = load_program("f() := let x = true || false; x").nodes["f"].body
    assert {a.sym for a in body.assignments} >= {"flip(1)", "flip(0)"}


def test_disease_semantics(has_disease_text):
    m = oracle_semantics(unfold(load_program(has_disease_text)), substochastic())
    assert (m[1, 0], m[0, 0]) == program_pq(parse(has_disease_text))


def _ast(seed):
    rng = random.Random(seed)
    return random_program_ast(rng, rng.randint(1, 3))


seeds = st.integers(min_value=0, max_value=10**6)


@given(seeds)
def test_desugared_programs_validate(seed):
    assert validate(random_program(seed)) == []


@given(seeds)
def test_pretty_round_trip(seed):
    h = random_program(seed)
    back = load_program(pretty(h))
    assert equivalent(unfold(back), unfold(h))


@given(seeds)
def test_format_round_trip(seed):
    p = _ast(seed)
    assert parse(format_program(p)) == parse(format_program(parse(format_program(p))))


@given(seeds)
def test_desugaring_is_linear(seed):
    p = parse(format_program(_ast(seed)))
    h = desugar(p)
    for name, node in h.nodes.items():
        tokens = tokenize(format_program(Program((p.function(name),))))
        assert len(node.body.assignments) <= len(tokens)


@given(seeds)
def test_desugar_agrees_with_direct_execution(seed):
    p = parse(format_program(_ast(seed)))
    h = desugar(p)
    f = unfold(h, max_assignments=2000)
    if f.num_vars > 14:
        return
    m = oracle_semantics(f, substochastic())
    assert (m[1, 0], m[0, 0]) == program_pq(p)
