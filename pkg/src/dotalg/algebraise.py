"""Turn dot diagrams into low-width hypergraph terms.

Pure wirings are factored into sorting permutations, equate chains and copy
chains.  Diagrams with assignments go through a Frobenius decomposition; large
ones are first cut into a hierarchy of two-assignment pieces along a branch
decomposition of their dependency hypergraph, then reassembled by substitution.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

from .decomposition import (
    BranchDecomposition,
    TreeDecomposition,
    branch_width,
    dependency_hypergraph,
    primal_graph,
    tree_decomposition,
    tree_to_branch,
    validate_decomposition,
)
from .diagrams import (
    Assignment,
    CallNode,
    DotDiagram,
    HierarchicalDotDiagram,
    Signature,
    compose,
    identity_wiring,
    single_node,
)
from .errors import InvalidInput, PreconditionError
from .terms import Term, TermStore, dag_size, substitute_term, width


def _restrict(sorts, assignments: Sequence[Assignment], inputs, outputs, extra=()) -> DotDiagram:
    """The diagram on exactly the variables mentioned, numbered by first mention."""
    number: dict[int, int] = {}

    def num(v):
        if v not in number:
            number[v] = len(number)
        return number[v]

    ins = tuple(num(v) for v in inputs)
    ass = []
    for a in assignments:
        a_ins = tuple(num(v) for v in a.ins)
        ass.append(Assignment(tuple(num(v) for v in a.outs), a.sym, a_ins))
    outs = tuple(num(v) for v in outputs)
    for v in extra:
        num(v)
    new_sorts = [""] * len(number)
    for v, k in number.items():
        new_sorts[k] = sorts[v]
    return DotDiagram(tuple(new_sorts), tuple(ass), ins, outs)


def _wire(sorts, inputs, outputs, extra=()) -> DotDiagram:
    return _restrict(sorts, (), inputs, outputs, extra)


def _tensor_merging_ids(store: TermStore, parts: Sequence[int]) -> int:
    """Tensor product in which runs of identities become one identity."""
    merged: list[int] = []
    run: list[str] = []
    for p in parts:
        node = store.nodes[p]
        if node.kind == "id":
            run.extend(node.label)
            continue
        if run:
            merged.append(store.id(run))
            run = []
        merged.append(p)
    if run:
        merged.append(store.id(run))
    return store.tensor_all(merged)


def _chain_skipping_ids(store: TermStore, layers: Sequence[int], dom) -> int:
    real = [t for t in layers if store.nodes[t].kind != "id"]
    return store.chain(real) if real else store.id(dom)


def algebrise_permutation(sigma: DotDiagram, store: TermStore | None = None) -> Term:
    """Odd-even transposition sort of the input wires into output order."""
    store = TermStore() if store is None else store
    ins, outs = sigma.inputs, sigma.outputs
    if (
        sigma.assignments
        or len(set(ins)) != len(ins)
        or len(set(outs)) != len(outs)
        or set(ins) != set(outs)
        or sigma.isolated()
    ):
        raise PreconditionError("not a permutation wiring")
    target = {v: j for j, v in enumerate(outs)}
    cur = list(ins)
    k = len(cur)
    layers = []
    for r in range(k):
        before = [sigma.sorts[v] for v in cur]
        swaps = []
        for i in range(r % 2, k - 1, 2):
            if target[cur[i]] > target[cur[i + 1]]:
                swaps.append(i)
                cur[i], cur[i + 1] = cur[i + 1], cur[i]
        if swaps:
            parts = []
            i = 0
            pending = set(swaps)
            while i < k:
                if i in pending:
                    parts.append(store.swap((before[i],), (before[i + 1],)))
                    i += 2
                else:
                    parts.append(store.id((before[i],)))
                    i += 1
            layers.append(_tensor_merging_ids(store, parts))
        if all(target[cur[i]] == i for i in range(k)):
            break
    return Term(store, _chain_skipping_ids(store, layers, sigma.dom))


class WiringFactors(NamedTuple):
    """``sigma3 ∘ copy ∘ sigma2 ∘ equate ∘ sigma1``.

    ``sigma1`` sorts the input wires by variable, ``equate`` merges wires that
    carry the same variable, ``copy`` deletes, copies and creates variables
    (and holds isolated ones), ``sigma3`` moves copies to the output positions.
    """

    sigma1: DotDiagram
    equate: DotDiagram
    sigma2: DotDiagram
    copy: DotDiagram
    sigma3: DotDiagram

    def composite(self) -> DotDiagram:
        acc = self.sigma1
        for g in (self.equate, self.sigma2, self.copy, self.sigma3):
            acc = compose(g, acc)
        return acc


def decompose_pure_wiring(w: DotDiagram) -> WiringFactors:
    if w.assignments:
        raise PreconditionError("decompose_pure_wiring needs a diagram without assignments")
    ins, outs = w.inputs, w.outputs
    in_sorts = w.sorts_of(ins)
    order_in = sorted(range(len(ins)), key=lambda i: (ins[i], i))
    sorted_vars = [ins[i] for i in order_in]
    distinct = list(dict.fromkeys(sorted_vars))
    sigma1 = DotDiagram(in_sorts, (), tuple(range(len(ins))), tuple(order_in))
    equate = _wire(w.sorts, sorted_vars, distinct)
    sigma2 = identity_wiring(w.sorts_of(distinct))

    need = Counter(outs)
    copied = [v for v in sorted(set(distinct) | set(outs)) for _ in range(need[v])]
    copy = _wire(w.sorts, distinct, copied, extra=w.isolated())

    slots: dict[int, list[int]] = {}
    for pos, v in enumerate(copied):
        slots.setdefault(v, []).append(pos)
    taken = Counter()
    placement = []
    for v in outs:
        placement.append(slots[v][taken[v]])
        taken[v] += 1
    sigma3 = DotDiagram(w.sorts_of(copied), (), tuple(range(len(copied))), tuple(placement))
    return WiringFactors(sigma1, equate, sigma2, copy, sigma3)


def _equate_chain(store: TermStore, s: str, m: int) -> int:
    one = (s,)
    acc = store.id(one) if m == 1 else store.equate(one)
    for _ in range(m - 2):
        acc = store.seq(store.equate(one), _tensor_merging_ids(store, [store.id(one), acc]))
    return acc


def _copy_chain(store: TermStore, s: str, m: int) -> int:
    one = (s,)
    if m == 0:
        return store.delete(one)
    acc = store.id(one) if m == 1 else store.copy(one)
    for _ in range(m - 2):
        acc = store.seq(_tensor_merging_ids(store, [store.id(one), acc]), store.copy(one))
    return acc


def algebrise_pure_wiring(w: DotDiagram, store: TermStore | None = None) -> Term:
    store = TermStore() if store is None else store
    fac = decompose_pure_wiring(w)
    s1 = algebrise_permutation(fac.sigma1, store).ref
    s3 = algebrise_permutation(fac.sigma3, store).ref

    sorted_inputs = Counter(w.inputs)
    eq_parts = [_equate_chain(store, w.sorts[v], n) for v, n in sorted(sorted_inputs.items())]
    eq_layer = _tensor_merging_ids(store, eq_parts)

    need = Counter(w.outputs)
    cp_parts = []
    for v in sorted(set(sorted_inputs) | set(need)):
        chain = _copy_chain(store, w.sorts[v], need[v])
        if v not in sorted_inputs:
            chain = store.seq(chain, store.new((w.sorts[v],)))
        cp_parts.append(chain)
    for v in w.isolated():
        one = (w.sorts[v],)
        cp_parts.append(store.seq(store.delete(one), store.new(one)))
    cp_layer = _tensor_merging_ids(store, cp_parts)

    return Term(store, _chain_skipping_ids(store, [s1, eq_layer, cp_layer, s3], w.dom))


class FrobeniusDecomposition(NamedTuple):
    """``w2 ∘ middle ∘ w1`` where ``middle`` tensors ``sym ⊗ id(dom) ⊗ id(cod)``
    over ``assignments`` and finishes with an identity on the ``bypass`` variables."""

    w1: DotDiagram
    assignments: tuple[Assignment, ...]
    bypass: tuple[int, ...]
    w2: DotDiagram
    source: DotDiagram

    def middle_diagram(self) -> DotDiagram:
        f = self.source
        # Each wire of the middle layer is its own variable.
        sorts, assignments, win, wout = [], [], [], []
        for a in self.assignments:
            x = [len(sorts) + i for i in range(len(a.ins))]
            sorts += f.sorts_of(a.ins)
            y = [len(sorts) + i for i in range(len(a.outs))]
            sorts += f.sorts_of(a.outs)
            xs = [len(sorts) + i for i in range(len(a.ins))]
            sorts += f.sorts_of(a.ins)
            ys = [len(sorts) + i for i in range(len(a.outs))]
            sorts += f.sorts_of(a.outs)
            assignments.append(Assignment(tuple(y), a.sym, tuple(x)))
            win += x + xs + ys
            wout += y + xs + ys
        for v in self.bypass:
            win.append(len(sorts))
            wout.append(len(sorts))
            sorts.append(f.sorts[v])
        return DotDiagram(tuple(sorts), tuple(assignments), tuple(win), tuple(wout))

    def composite(self) -> DotDiagram:
        return compose(self.w2, compose(self.middle_diagram(), self.w1))


def frobenius_decompose(f: DotDiagram) -> FrobeniusDecomposition:
    used = {v for a in f.assignments for v in a.ins + a.outs}
    out_set = set(f.outputs)
    bypass = tuple(v for v in dict.fromkeys(f.inputs) if v in out_set and v not in used)
    w1_out: list[int] = []
    w2_in: list[int] = []
    for a in f.assignments:
        w1_out += list(a.ins) + list(a.ins) + list(a.outs)
        w2_in += list(a.outs) + list(a.ins) + list(a.outs)
    w1 = _wire(f.sorts, f.inputs, w1_out + list(bypass), extra=f.isolated())
    w2 = _wire(f.sorts, w2_in + list(bypass), f.outputs)
    return FrobeniusDecomposition(w1, f.assignments, bypass, w2, f)


def _dataflow_order(f: DotDiagram) -> list[Assignment]:
    """Assignments ordered so that each one, where possible, reads only
    variables that are inputs or were produced earlier."""
    known = set(f.inputs)
    remaining = list(f.assignments)
    order = []
    while remaining:
        best = min(range(len(remaining)), key=lambda i: (len(set(remaining[i].ins) - known), i))
        a = remaining.pop(best)
        order.append(a)
        known |= set(a.ins) | set(a.outs)
    return order


def algebrise_small(f: DotDiagram, store: TermStore | None = None) -> Term:
    """Apply the symbols one after another with pure wirings in between.

    Before each symbol a wiring lays out its inputs followed by the variables
    still needed later; a variable is created from nothing only when a symbol
    reads it before anything produced it, and a repeated production becomes an
    equate in the next wiring.  Only live variables cross each layer, so the
    values flowing through stay tied to actual assignments of them.
    """
    store = TermStore() if store is None else store
    if not f.assignments:
        return algebrise_pure_wiring(f, store)
    order = _dataflow_order(f)
    needed_after: list[set] = [set(f.outputs)] * len(order)
    acc = set(f.outputs)
    for i in range(len(order) - 1, 0, -1):
        acc = acc | set(order[i].ins) | set(order[i].outs)
        needed_after[i - 1] = acc
    layers = []
    live = set(f.inputs)
    wires = list(f.inputs)
    for i, a in enumerate(order):
        outs = set(a.outs)
        keep = sorted(v for v in live | set(a.ins) if v in needed_after[i] or v in outs)
        w = _wire(f.sorts, wires, list(a.ins) + keep, extra=f.isolated() if i == 0 else ())
        layers.append(algebrise_pure_wiring(w, store).ref)
        dom, cod = f.sorts_of(a.ins), f.sorts_of(a.outs)
        layers.append(_tensor_merging_ids(store, [store.symbol(a.sym, dom, cod), store.id(f.sorts_of(keep))]))
        wires = list(a.outs) + keep
        live = set(keep) | outs
    layers.append(algebrise_pure_wiring(_wire(f.sorts, wires, f.outputs), store).ref)
    return Term(store, _chain_skipping_ids(store, layers, f.dom))


def _fresh_prefix(f: DotDiagram, prefix: str) -> str:
    syms = {a.sym for a in f.assignments}
    while any(s.startswith(prefix) for s in syms):
        prefix += "%"
    return prefix


def refactor_by_branch_decomposition(
    f: DotDiagram, B: BranchDecomposition, prefix: str = "%c"
) -> HierarchicalDotDiagram:
    """Cut ``f`` into a hierarchy whose bodies have at most two assignments.

    ``B`` is rooted at the leaf of the input interface.  Every tree node whose
    subtree holds assignments on both sides becomes a call node; its body calls
    (or directly contains, for single assignments) the two sides.  A cluster's
    interface is the set of its variables that are also used outside it, or
    that belong to the corresponding interface of ``f``, in order of first
    appearance in the assignment list.
    """
    H = dependency_hypergraph(f)
    problems = validate_decomposition(B, H)
    if problems:
        raise InvalidInput(f"branch decomposition does not match the diagram: {problems[0]}")
    n = len(f.assignments)
    base = Signature(frozenset(f.sorts), f.symbol_types())
    prefix = _fresh_prefix(f, prefix)
    if n <= 2:
        return single_node(f, base, name=prefix + "root")

    adj = B.adjacency()
    leaf_of = {h: leaf for leaf, h in B.leaf_map.items()}
    root = leaf_of[n]
    parent = {root: None}
    order = [root]
    for v in order:
        for u in sorted(adj[v]):
            if u not in parent:
                parent[u] = v
                order.append(u)
    children = {v: [u for u in sorted(adj[v]) if parent.get(u) == v] for v in order}
    size: dict[int, int] = {}
    for v in reversed(order):
        if v in B.leaf_map:
            size[v] = 1 if B.leaf_map[v] < n else 0
        else:
            size[v] = sum(size[c] for c in children[v])

    def settle(v: int) -> int:
        """Walk down past nodes whose assignments all sit in one child."""
        while v not in B.leaf_map:
            busy = [c for c in children[v] if size[c]]
            if len(busy) != 1:
                return v
            v = busy[0]
        return v

    occ: Counter = Counter()
    first: dict[int, int] = {}
    for a in f.assignments:
        vs = dict.fromkeys(a.ins + a.outs)
        occ.update(list(vs))
        for v in vs:
            first.setdefault(v, len(first))
    in_set, out_set = set(f.inputs), set(f.outputs)

    def cluster(v: int) -> list[int]:
        found, stack = [], [v]
        while stack:
            u = stack.pop()
            if u in B.leaf_map:
                if B.leaf_map[u] < n:
                    found.append(B.leaf_map[u])
            else:
                stack.extend(children[u])
        return sorted(found)

    def interface(v: int):
        count: Counter = Counter()
        for i in cluster(v):
            a = f.assignments[i]
            count.update(set(a.ins + a.outs))
        vs = sorted(count, key=first.__getitem__)
        shared = {x for x in vs if count[x] < occ[x]}
        return (tuple(x for x in vs if x in in_set or x in shared),
                tuple(x for x in vs if x in out_set or x in shared))

    top = settle(children[root][0])
    names: dict[int, str] = {}
    faces: dict[int, tuple] = {}
    bodies: dict[int, list[Assignment]] = {}
    stack = [top]
    while stack:
        v = stack.pop()
        names[v] = prefix + ("root" if v == top else str(len(names)))
        parts = []
        for c in children[v]:
            if not size[c]:
                continue
            c = settle(c)
            if c in B.leaf_map:
                parts.append(f.assignments[B.leaf_map[c]])
            else:
                faces[c] = interface(c)
                parts.append(c)
                stack.append(c)
        bodies[v] = parts

    nodes: dict[str, CallNode] = {}
    for v, parts in bodies.items():
        local, defn, assignments = {}, {}, []
        for p in parts:
            if isinstance(p, Assignment):
                assignments.append(p)
                continue
            ins, outs = faces[p]
            name = names[p]
            local[name] = (f.sorts_of(ins), f.sorts_of(outs))
            defn[name] = name
            assignments.append(Assignment(outs, name, ins))
        if v == top:
            body = _restrict(f.sorts, assignments, f.inputs, f.outputs, extra=f.isolated())
        else:
            ins, outs = faces[v]
            body = _restrict(f.sorts, assignments, ins, outs)
        nodes[names[v]] = CallNode(body, local, defn)
    return HierarchicalDotDiagram(names[top], nodes, base)


@dataclass
class Algebraisation:
    """A term together with the decompositions that produced it."""

    term: Term
    tree: TreeDecomposition | None = None
    branch: BranchDecomposition | None = None
    hierarchy: HierarchicalDotDiagram | None = None
    branch_width: int | None = None


def decompose(f: DotDiagram, mode: str = "heuristic"):
    """Tree decomposition of the primal graph and the branch decomposition
    of the dependency hypergraph derived from it."""
    H = dependency_hypergraph(f)
    T = tree_decomposition(primal_graph(f), mode)
    if not T.bags:
        T = TreeDecomposition((frozenset(),), ())
    B = tree_to_branch(T, H)
    return T, B, branch_width(B, H)


def algebrise_report(f: DotDiagram, mode: str = "heuristic", store: TermStore | None = None,
                     always_decompose: bool = False) -> Algebraisation:
    store = TermStore() if store is None else store
    n = len(f.assignments)
    if n <= 2 and not always_decompose:
        return Algebraisation(algebrise_small(f, store))
    T, B, bw = decompose(f, mode)
    if n <= 2:
        return Algebraisation(algebrise_small(f, store), T, B, None, bw)
    h = refactor_by_branch_decomposition(f, B)
    terms: dict[str, Term] = {}
    for v in h.topological():
        node = h.nodes[v]
        t = algebrise_small(node.body, store)
        terms[v] = substitute_term(t, {sym: terms[c] for sym, c in node.defn.items()})
    return Algebraisation(terms[h.root], T, B, h, bw)


def algebrise(f: DotDiagram, mode: str = "heuristic", store: TermStore | None = None) -> Term:
    return algebrise_report(f, mode, store).term


@dataclass
class NodeReport:
    assignments: int
    treewidth: int
    branch_width: int
    term_width: int
    term_dag_size: int


@dataclass
class HierarchicalAlgebraisation:
    term: Term
    nodes: dict[str, NodeReport] = field(default_factory=dict)


def algebrise_hierarchical_report(
    h: HierarchicalDotDiagram, mode: str = "heuristic", store: TermStore | None = None
) -> HierarchicalAlgebraisation:
    """Algebraise every call node once, children first, and substitute.

    Local symbols are opaque while a body is algebraised, so the unfolded
    diagram is never built.
    """
    store = TermStore() if store is None else store
    terms: dict[str, Term] = {}
    reports: dict[str, NodeReport] = {}
    for v in h.topological():
        node = h.nodes[v]
        alg = algebrise_report(node.body, mode, store, always_decompose=True)
        reports[v] = NodeReport(
            len(node.body.assignments),
            alg.tree.width if alg.tree else -1,
            alg.branch_width,
            width(alg.term),
            dag_size(alg.term),
        )
        terms[v] = substitute_term(alg.term, {sym: terms[c] for sym, c in node.defn.items()})
    return HierarchicalAlgebraisation(terms[h.root], reports)


def algebrise_hierarchical(h: HierarchicalDotDiagram, mode: str = "heuristic",
                           store: TermStore | None = None) -> Term:
    store = TermStore() if store is None else store
    terms: dict[str, Term] = {}
    for v in h.topological():
        node = h.nodes[v]
        t = algebrise(node.body, mode, store)
        terms[v] = substitute_term(t, {sym: terms[c] for sym, c in node.defn.items()})
    return terms[h.root]


@dataclass
class PipelineStats:
    k: int
    L: int
    M: int
    N: int
    nodes: dict[str, NodeReport]
    term_width: int
    term_dag_size: int

    def to_json(self) -> dict:
        return {
            "k": self.k, "L": self.L, "M": self.M, "N": self.N,
            "term_width": self.term_width, "term_dag_size": self.term_dag_size,
            "nodes": {v: vars(r) for v, r in self.nodes.items()},
        }


def pipeline_stats(h: HierarchicalDotDiagram, mode: str = "heuristic") -> PipelineStats:
    """Hierarchy parameters (treewidth bound, fan-out, node and assignment
    counts) alongside the widths the pipeline actually achieved."""
    rep = algebrise_hierarchical_report(h, mode)
    reachable = h.topological()
    k = max((max(r.treewidth, 0) for r in rep.nodes.values()), default=0)
    L = 1 + max(len(h.nodes[v].children) for v in reachable)
    N = 1 + max(len(h.nodes[v].body.assignments) for v in reachable)
    return PipelineStats(k, L, len(reachable), N, rep.nodes, width(rep.term), dag_size(rep.term))
