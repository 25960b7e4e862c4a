import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dotalg.algebraise import (algebrise, algebrise_hierarchical, algebrise_hierarchical_report,
                               algebrise_permutation, algebrise_pure_wiring, algebrise_report, algebrise_small,
                               decompose, decompose_pure_wiring, frobenius_decompose, pipeline_stats,
                               refactor_by_branch_decomposition)
from dotalg.decomposition import dependency_hypergraph, edge_order
from dotalg.diagrams import (BOOL, Assignment, DotDiagram, Signature, diagram_width, equivalent, identity_wiring,
                             single_node, symbol_diagram, unfold, flip_symbol)
from dotalg.errors import InvalidInput, PreconditionError
from dotalg.evaluate import interpret_term
from dotalg.frontend import load_program
from dotalg.oracle import oracle_semantics
from dotalg.semiring import substochastic
from dotalg.terms import TermStore, dag_size, to_dot, width
from dotalg.testkit import SEMIRINGS, SORT_DIMS, random_diagram, random_hierarchy, random_interpretation

seeds = st.integers(min_value=0, max_value=10**6)
B1 = (BOOL,)


def permutation(k, perm):
    return DotDiagram(B1 * k, (), tuple(range(k)), tuple(perm))


def random_wiring(seed, k=5):
    rng = random.Random(seed)
    n = rng.randint(1, k)
    ins = tuple(rng.randrange(n) for _ in range(rng.randint(0, k)))
    outs = tuple(rng.randrange(n) for _ in range(rng.randint(0, k)))
    return DotDiagram(tuple(rng.choice("BC") for _ in range(n)), (), ins, outs)


def test_identity_permutation_is_one_layer():
    t = algebrise_permutation(identity_wiring(B1 * 3))
    assert t.node.kind == "id" and width(t) == 6


def test_transposition_is_one_swap():
    t = algebrise_permutation(permutation(2, (1, 0)))
    assert t.node.kind == "swap" and width(t) == 4


def test_reversal_on_four_wires():
    f = permutation(4, (3, 2, 1, 0))
    t = algebrise_permutation(f)
    assert width(t) <= 8 and equivalent(to_dot(t), f)
    layers, ref = 0, t.ref
    while t.store.nodes[ref].kind == "seq":
        layers += 1
        ref = t.store.nodes[ref].args[1]
    assert layers + 1 <= 8


def test_permutation_precondition():
    with pytest.raises(PreconditionError):
        algebrise_permutation(DotDiagram(B1, (), (0,), (0, 0)))


@given(st.permutations(range(6)))
def test_permutation_layers(perm):
    f = permutation(6, perm)
    t = algebrise_permutation(f)
    assert width(t) <= 12 and equivalent(to_dot(t), f)


def test_identity_wiring_factors():
    fac = decompose_pure_wiring(identity_wiring(B1 * 2))
    for part in fac:
        assert part.inputs == part.outputs and not part.assignments


def test_copy_wiring_factors():
    fac = decompose_pure_wiring(DotDiagram(B1, (), (0,), (0, 0)))
    assert (len(fac.copy.inputs), len(fac.copy.outputs)) == (1, 2)
    assert fac.equate.inputs == fac.equate.outputs


def test_mixed_wiring_round_trip():
    w = DotDiagram(B1 * 2, (), (0, 1), (1, 0, 0))
    assert equivalent(decompose_pure_wiring(w).composite(), w)
    assert equivalent(to_dot(algebrise_pure_wiring(w)), w)


def test_pure_wiring_precondition():
    with pytest.raises(PreconditionError):
        decompose_pure_wiring(symbol_diagram("g", B1, B1))


def test_empty_wiring_is_unit():
    t = algebrise_pure_wiring(DotDiagram((), (), (), ()))
    assert t.node.kind == "id" and t.dom == ()


def test_swap_wiring_width():
    assert width(algebrise_pure_wiring(permutation(2, (1, 0)))) == 4


@given(seeds)
def test_pure_wiring_width_bound(seed):
    w = random_wiring(seed)
    k = max(len(w.inputs), len(w.outputs), 1)
    t = algebrise_pure_wiring(w)
    assert equivalent(decompose_pure_wiring(w).composite(), w)
    assert equivalent(to_dot(t), w)
    assert width(t) <= 2 * k + 2 * len(w.isolated())


def test_frobenius_of_zero_assignments():
    w = DotDiagram(B1 * 2, (), (0, 1), (1,))
    fd = frobenius_decompose(w)
    assert fd.assignments == () and equivalent(fd.composite(), w)


def test_frobenius_of_single_and():
    f = symbol_diagram("and", B1 + B1, B1)
    fd = frobenius_decompose(f)
    assert len(fd.middle_diagram().assignments) == 1
    assert equivalent(fd.composite(), f)


@given(seeds)
def test_frobenius_round_trip(seed):
    f = random_diagram(seed, num_vars=4)
    assert equivalent(frobenius_decompose(f).composite(), f)


def test_small_flip():
    f = symbol_diagram(flip_symbol("1/2"), (), B1)
    t = algebrise_small(f)
    assert width(t) <= 6
    m = interpret_term(t, substochastic())
    assert m.to_rows() == [[Fraction(1, 2)], [Fraction(1, 2)]]


def test_small_test_diagram(has_disease_text):
    f = load_program(has_disease_text).nodes["test"].body
    t = algebrise_small(f)
    assert width(t) <= 6 * len(f.assignments) * diagram_width(f)
    assert equivalent(to_dot(t), f)


@given(seeds)
def test_small_width_bound_and_round_trip(seed):
    f = random_diagram(seed)
    t = algebrise_small(f)
    n, w = max(len(f.assignments), 1), max(diagram_width(f), 1)
    assert width(t) <= 6 * n * w
    assert equivalent(to_dot(t), f)


def test_refactor_base_case():
    f = DotDiagram(B1 * 3, (Assignment((1,), "g", (0,)), Assignment((2,), "h", (1,))), (0,), (2,))
    _, B, _ = decompose(f)
    h = refactor_by_branch_decomposition(f, B)
    assert len(h.nodes) == 1 and h.nodes[h.root].body == f


def test_refactor_rejects_foreign_decomposition():
    f = random_diagram(4, num_assignments=4)
    g = random_diagram(5, num_assignments=5)
    _, B, _ = decompose(g)
    with pytest.raises(InvalidInput):
        refactor_by_branch_decomposition(f, B)


@given(seeds)
def test_refactor_properties(seed):
    f = random_diagram(seed, num_assignments=random.Random(seed).randint(3, 7))
    _, B, bw = decompose(f)
    H = dependency_hypergraph(f)
    out_leaf = next(leaf for leaf, e in B.leaf_map.items() if e == len(H.edges) - 1)
    out_order = edge_order(B, H, next(e for e in B.edges if out_leaf in e))
    h = refactor_by_branch_decomposition(f, B)
    assert len(h.nodes) <= len(f.assignments)
    for name, node in h.nodes.items():
        assert len(node.body.assignments) <= 2
        if name != h.root:
            assert len(node.body.inputs) <= bw
            assert len(node.body.outputs) <= bw + out_order <= 2 * bw
    assert equivalent(unfold(h), f)


def test_f2_probability(f_family_text):
    f = unfold(load_program(f_family_text, "f_2"))
    m = interpret_term(algebrise(f), substochastic())
    assert m[1, 0] == Fraction(1, 4 ** 4)


def test_single_assignment_bypasses_decomposition():
    rep = algebrise_report(symbol_diagram("g", B1, B1))
    assert rep.tree is None and rep.branch is None


def test_disease_width_bound(has_disease_text):
    f = load_program(has_disease_text).nodes["test"].body
    rep = algebrise_report(f)
    assert rep.branch_width <= 3
    assert width(rep.term) <= 12 * 3


@given(seeds, st.sampled_from(SEMIRINGS))
def test_soundness(seed, semiring):
    f = random_diagram(seed)
    interp = random_interpretation(semiring, f.symbol_types(), seed=seed, dims=SORT_DIMS)
    assert interpret_term(algebrise(f), interp) == oracle_semantics(f, interp)


@given(seeds, st.sampled_from(SEMIRINGS))
def test_hierarchical_soundness(seed, semiring):
    h = random_hierarchy(seed)
    interp = random_interpretation(semiring, h.base.symbols, seed=seed, dims=SORT_DIMS)
    expected = oracle_semantics(unfold(h), interp)
    assert interpret_term(algebrise_hierarchical(h), interp) == expected
    assert interpret_term(algebrise_hierarchical_report(h).term, interp) == expected


def test_single_node_hierarchy_matches_flat():
    f = random_diagram(11)
    h = single_node(f, Signature(frozenset(SORT_DIMS), f.symbol_types()))
    store = TermStore()
    assert algebrise_hierarchical(h, store=store) == algebrise(f, store=store)


def test_disease_hierarchy_matches_oracle(has_disease_text):
    h = load_program(has_disease_text)
    expected = oracle_semantics(unfold(h), substochastic())
    assert interpret_term(algebrise_hierarchical(h), substochastic()) == expected


def test_f_family_grows_linearly(f_family_text):
    sizes = [dag_size(algebrise_hierarchical(load_program(f_family_text, f"f_{n}"))) for n in range(1, 9)]
    steps = {b - a for a, b in zip(sizes, sizes[1:])}
    assert len(steps) == 1


def test_disease_stats(has_disease_text):
    s = pipeline_stats(load_program(has_disease_text))
    assert (s.M, s.N, s.L) == (2, 7, 2)


def test_empty_function_stats():
    s = pipeline_stats(load_program("f() := let x = flip(1/2); x"))
    assert (s.M, s.L) == (1, 1)
    s = pipeline_stats(single_node(DotDiagram((), (), (), ()), Signature(frozenset(), {})))
    assert (s.M, s.N, s.L) == (1, 1, 1)
