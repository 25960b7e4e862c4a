from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dotalg.diagrams import (AND, BOOL, NOT, OR, Assignment, CallNode, DotDiagram, HierarchicalDotDiagram,
                             Signature, bool_stoch_signature, compose, diagram_from_json, diagram_to_json,
                             empty_diagram, equivalent, flip_symbol, hierarchy_from_json, hierarchy_to_json,
                             identity_wiring, single_node, substitute, symbol_diagram, tensor, unfold, validate,
                             wiring)
from dotalg.errors import InterfaceMismatch, InvalidInput, ResourceLimit
from dotalg.frontend import load_program
from dotalg.oracle import oracle_semantics
from dotalg.semiring import substochastic
from dotalg.testkit import random_diagram, random_hierarchy

B = (BOOL,)


def flip(p):
    return symbol_diagram(flip_symbol(Fraction(p)), (), B)


def gate(sym):
    return symbol_diagram(sym, B + B, B)


def gate_network():
    """or ∘ (and ⊗ and) ∘ (flip(1/10) ⊗ copy ⊗ flip(3/10)) ∘ flip(1/5)."""
    copy = wiring(B, (0,), (0, 0))
    layer = tensor(tensor(flip("1/10"), copy), flip("3/10"))
    return compose(gate(OR), compose(tensor(gate(AND), gate(AND)), compose(layer, flip("1/5"))))


def count_symbols(f, pred):
    return sum(1 for a in f.assignments if pred(a.sym))


def is_flip(sym):
    return sym.startswith("flip(")


def test_compose_with_identity_is_equivalent():
    f = gate(AND)
    assert equivalent(compose(identity_wiring(B), f), f)
    assert equivalent(compose(f, identity_wiring(B + B)), f)


def test_double_negation_is_identity_matrix():
    m = oracle_semantics(compose(symbol_diagram(NOT, B, B), symbol_diagram(NOT, B, B)), substochastic())
    assert m.to_rows() == [[1, 0], [0, 1]]


def test_gate_network_probability_of_true():
    m = oracle_semantics(gate_network(), substochastic())
    # 0.2 * (1 - 0.9 * 0.7), by enumerating the three flips
    assert (m[0, 0], m[1, 0]) == (Fraction(926, 1000), Fraction(74, 1000))


def test_gate_network_structure():
    f = gate_network()
    assert (len(f.inputs), len(f.outputs), len(f.assignments)) == (0, 1, 6)
    assert count_symbols(f, is_flip) == 3


def test_compose_rejects_mismatch():
    with pytest.raises(InterfaceMismatch):
        compose(gate(AND), flip("1/2"))


def test_tensor_unit_and_counts():
    f = gate(OR)
    assert tensor(empty_diagram(), f) == f
    t = tensor(flip("1/10"), flip("3/10"))
    assert (len(t.assignments), len(t.inputs), len(t.outputs)) == (2, 0, 2)


def test_gate_network_middle_layer_interface():
    layer = tensor(tensor(flip("1/10"), wiring(B, (0,), (0, 0))), flip("3/10"))
    assert (len(layer.inputs), len(layer.outputs)) == (1, 4)


def test_substitute_empty_bindings_is_identity():
    f = random_diagram(3)
    assert substitute(f, {}) is f


def test_substitute_rejects_wrong_interface():
    f = DotDiagram(B + B, (Assignment((1,), "g", (0,)),), (0,), (1,))
    with pytest.raises(InterfaceMismatch):
        substitute(f, {"g": gate(AND)})


def test_substitute_ignores_unused_binding():
    f = gate(AND)
    assert substitute(f, {"unused": gate(OR)}) == f


def test_has_disease_substitution_counts(has_disease_text):
    h = load_program(has_disease_text)
    flat = substitute(h.nodes["hasDisease"].body, {"test": h.nodes["test"].body})
    assert count_symbols(flat, is_flip) == 5
    assert count_symbols(flat, lambda s: s == "observe") == 1
    assert unfold(h) == flat


def test_f1_substitution_counts(f_family_text):
    h = load_program(f_family_text, "f_1")
    flat = substitute(h.nodes["f_1"].body, {"f_0": h.nodes["f_0"].body})
    assert count_symbols(flat, is_flip) == 4
    assert count_symbols(flat, lambda s: s == AND) == 3


@pytest.mark.parametrize("n", range(5))
def test_unfold_f_family_doubles(f_family_text, n):
    f = unfold(load_program(f_family_text, f"f_{n}"))
    assert count_symbols(f, is_flip) == 2 ** (n + 1)
    assert count_symbols(f, lambda s: s == AND) == 2 ** (n + 1) - 1


def test_unfold_single_node_is_body():
    f = random_diagram(5)
    h = single_node(f, Signature(frozenset({"B", "C"}), f.symbol_types()))
    assert unfold(h) == f


def test_unfold_cap(f_family_text):
    with pytest.raises(ResourceLimit):
        unfold(load_program(f_family_text, "f_8"), max_assignments=1000)


def test_validate_accepts_program(has_disease_text):
    assert validate(load_program(has_disease_text)) == []


def test_validate_condition_four():
    body = DotDiagram(B * 3, (Assignment((1,), "g", (0,)), Assignment((2,), "h", (1,))), (0,), (2,))
    local = {"g": (B, B), "h": (B, B), "k": (B, B)}
    base = bool_stoch_signature()
    nodes = {"root": CallNode(body, local, {"g": "c1", "h": "c2", "k": "c3"})}
    for c in ("c1", "c2", "c3"):
        nodes[c] = CallNode(symbol_diagram(NOT, B, B))
    diags = validate(HierarchicalDotDiagram("root", nodes, base))
    assert any(d.condition == 4 and d.node == "root" for d in diags)


def test_validate_bijectivity():
    body = DotDiagram(B * 3, (Assignment((1,), "g", (0,)), Assignment((2,), "h", (1,))), (0,), (2,))
    local = {"g": (B, B), "h": (B, B)}
    h = HierarchicalDotDiagram("root", {"root": CallNode(body, local, {"g": "c", "h": "c"}),
                                        "c": CallNode(symbol_diagram(NOT, B, B))}, bool_stoch_signature())
    assert any(d.condition == 3 and "injective" in d.message for d in validate(h))


def test_diagram_rejects_out_of_range_variable():
    with pytest.raises(InvalidInput):
        DotDiagram(B, (), (0,), (1,))


def test_equivalent_detects_and_versus_or():
    assert not equivalent(gate(AND), gate(OR))


def test_equivalent_renaming():
    f = DotDiagram(B * 3, (Assignment((2,), AND, (0, 1)),), (0, 1), (2,))
    g = DotDiagram(B * 3, (Assignment((0,), AND, (2, 1)),), (2, 1), (0,))
    assert equivalent(f, g)


seeds = st.integers(min_value=0, max_value=10**6)


@given(seeds)
def test_compose_associative(seed):
    f = random_diagram(seed, sorts=("B",), max_interface=2)
    k = len(f.outputs)
    g = DotDiagram(B * (k + 1), (Assignment((k,), f"mid{k}", tuple(range(k))),), tuple(range(k)), (k, k))
    h = gate(AND)
    assert equivalent(compose(h, compose(g, f)), compose(compose(h, g), f))


@given(seeds)
def test_equivalent_is_reflexive(seed):
    f = random_diagram(seed)
    assert equivalent(f, f, trials=2)


@given(seeds)
def test_constructions_preserve_invariants(seed):
    f, g = random_diagram(seed), random_diagram(seed + 7)
    t = tensor(f, g)
    assert t.num_vars == f.num_vars + g.num_vars
    assert not t.isolated()
    assert t.dom == f.dom + g.dom and t.cod == f.cod + g.cod


@given(seeds)
def test_diagram_json_round_trip(seed):
    f = random_diagram(seed)
    assert diagram_from_json(diagram_to_json(f)) == f


@given(seeds)
def test_hierarchy_json_round_trip_and_validity(seed):
    h = random_hierarchy(seed)
    assert validate(h) == []
    back = hierarchy_from_json(hierarchy_to_json(h))
    assert unfold(back) == unfold(h)
