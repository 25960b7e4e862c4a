"""Primal graphs, dependency hypergraphs, tree and branch decompositions."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable

import networkx as nx
from networkx.algorithms.approximation.treewidth import treewidth_decomp, treewidth_min_fill_in

from . import kernels
from .diagrams import DotDiagram
from .errors import InvalidInput, ResourceLimit

EXACT_LIMIT = 20


@dataclass(frozen=True)
class SimpleGraph:
    vertices: tuple
    edges: frozenset

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(tuple(e) for e in self.edges)
        return g


def _clique(vs: Iterable) -> set[frozenset]:
    return {frozenset(p) for p in combinations(sorted(set(vs)), 2)}


def primal_graph(f: DotDiagram) -> SimpleGraph:
    """Vertices are variables; two distinct variables are adjacent when they
    share an assignment or are both inputs or both outputs."""
    edges: set[frozenset] = set()
    for a in f.assignments:
        edges |= _clique(a.ins + a.outs)
    edges |= _clique(f.inputs)
    edges |= _clique(f.outputs)
    return SimpleGraph(tuple(range(f.num_vars)), frozenset(edges))


@dataclass(frozen=True)
class Hypergraph:
    """Hyperedge ``i`` is ``edges[i]``; ``labels`` names them for output."""

    vertices: tuple
    edges: tuple[frozenset, ...]
    labels: tuple[str, ...]


def dependency_hypergraph(f: DotDiagram) -> Hypergraph:
    """One hyperedge per assignment, then the input and the output interface."""
    edges = [frozenset(a.ins + a.outs) for a in f.assignments]
    edges += [frozenset(f.inputs), frozenset(f.outputs)]
    labels = [f"a{i}:{a.sym}" for i, a in enumerate(f.assignments)] + ["in", "out"]
    return Hypergraph(tuple(range(f.num_vars)), tuple(edges), tuple(labels))


@dataclass(frozen=True)
class TreeDecomposition:
    bags: tuple[frozenset, ...]
    edges: tuple[tuple[int, int], ...]

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1


def _normalise(decomp: nx.Graph) -> TreeDecomposition:
    """Contract bags contained in a neighbour, so there are at most |V| bags."""
    g = nx.Graph()
    ids = {bag: i for i, bag in enumerate(decomp.nodes)}
    bags = {i: bag for bag, i in ids.items()}
    g.add_nodes_from(bags)
    g.add_edges_from((ids[a], ids[b]) for a, b in decomp.edges)
    changed = True
    while changed and len(g) > 1:
        changed = False
        for v in sorted(g.nodes):
            for u in sorted(g.neighbors(v)):
                if bags[v] <= bags[u]:
                    for w in list(g.neighbors(v)):
                        if w != u:
                            g.add_edge(u, w)
                    g.remove_node(v)
                    changed = True
                    break
            if changed:
                break
    order = sorted(g.nodes)
    index = {v: i for i, v in enumerate(order)}
    edges = tuple(sorted(tuple(sorted((index[a], index[b]))) for a, b in g.edges))
    return TreeDecomposition(tuple(bags[v] for v in order), edges)


def exact_elimination_order(g: SimpleGraph) -> tuple[int, list]:
    n = len(g.vertices)
    if n > EXACT_LIMIT:
        raise ResourceLimit(f"exact treewidth is limited to {EXACT_LIMIT} vertices, got {n}")
    index = {v: i for i, v in enumerate(g.vertices)}
    adj = [0] * n
    for e in g.edges:
        a, b = (index[v] for v in e)
        adj[a] |= 1 << b
        adj[b] |= 1 << a
    width, order = kernels.treewidth_dp(n, adj)
    return width, [g.vertices[i] for i in order]


def tree_decomposition(g: SimpleGraph, mode: str = "heuristic") -> TreeDecomposition:
    """Min-fill elimination (``heuristic``) or exact search over subsets (``exact``)."""
    nxg = g.to_networkx()
    if mode == "heuristic":
        _, decomp = treewidth_min_fill_in(nxg)
    elif mode == "exact":
        _, order = exact_elimination_order(g)
        pending = list(order[:-1])

        def follow_order(graph):
            return pending.pop(0) if pending else None

        _, decomp = treewidth_decomp(nxg, follow_order)
    else:
        raise InvalidInput(f"unknown decomposition mode {mode!r}")
    return _normalise(decomp)


@dataclass(frozen=True)
class BranchDecomposition:
    """Unrooted tree on nodes ``0 .. num_nodes-1``; ``leaf_map`` sends leaves to hyperedges."""

    num_nodes: int
    edges: tuple[tuple[int, int], ...]
    leaf_map: dict

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in range(self.num_nodes)}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return adj


def _side(adj: dict[int, list[int]], start: int, blocked: int) -> set[int]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for u in adj[v]:
            if u != blocked and u not in seen:
                seen.add(u)
                stack.append(u)
    return seen


def edge_order(B: BranchDecomposition, H: Hypergraph, e: tuple[int, int]) -> int:
    """Number of vertices incident to hyperedges on both sides of ``e``."""
    a, b = e
    side = _side(B.adjacency(), a, b)
    left: set = set()
    right: set = set()
    for leaf, h in B.leaf_map.items():
        (left if leaf in side else right).update(H.edges[h])
    return len(left & right)


def edge_orders(B: BranchDecomposition, H: Hypergraph) -> dict[tuple[int, int], int]:
    """Orders of all tree edges in one pass over a rooted copy of the tree."""
    if not B.edges:
        return {}
    adj = B.adjacency()
    total = Counter(x for h in B.leaf_map.values() for x in H.edges[h])
    root = 0
    parent = {root: None}
    order = [root]
    for v in order:
        for u in adj[v]:
            if u not in parent:
                parent[u] = v
                order.append(u)
    below: dict[int, Counter] = {}
    out = {}
    for v in reversed(order):
        c = Counter(H.edges[B.leaf_map[v]]) if v in B.leaf_map else Counter()
        for u in adj[v]:
            if parent.get(u) == v:
                c.update(below.pop(u))
        below[v] = c
        p = parent[v]
        if p is not None:
            k = sum(1 for x, n in c.items() if n < total[x])
            out[(p, v) if (p, v) in _edge_set(B) else (v, p)] = k
    return out


def _edge_set(B: BranchDecomposition) -> frozenset:
    cached = B.__dict__.get("_edge_set")
    if cached is None:
        cached = frozenset(B.edges)
        object.__setattr__(B, "_edge_set", cached)
    return cached


def branch_width(B: BranchDecomposition, H: Hypergraph) -> int:
    return max(edge_orders(B, H).values(), default=0)


def tree_to_branch(T: TreeDecomposition, H: Hypergraph) -> BranchDecomposition:
    """Hang every hyperedge below a bag that contains it, prune, binarise.

    The order of every edge is bounded by the size of some bag, so the result
    has width at most ``T.width + 1``.
    """
    ne = len(H.edges)
    if ne < 2:
        raise InvalidInput("a branch decomposition needs at least two hyperedges")
    nb = len(T.bags)
    adj: dict[int, list[int]] = {v: [] for v in range(nb + ne)}
    for a, b in T.edges:
        adj[a].append(b)
        adj[b].append(a)
    for h, inc in enumerate(H.edges):
        home = next((i for i, bag in enumerate(T.bags) if inc <= bag), None)
        if home is None:
            raise InvalidInput(f"hyperedge {H.labels[h]} is not covered by any bag")
        adj[home].append(nb + h)
        adj[nb + h].append(home)

    def drop(v):
        for u in adj.pop(v):
            adj[u].remove(v)

    # Prune bag nodes that carry no hyperedge in their direction.
    stack = [v for v in range(nb) if len(adj[v]) <= 1]
    while stack:
        v = stack.pop()
        if v in adj and v < nb and len(adj[v]) <= 1:
            nbrs = list(adj[v])
            drop(v)
            stack.extend(u for u in nbrs if u < nb)

    # Suppress degree-two nodes.
    for v in sorted(adj):
        if v < nb and v in adj and len(adj[v]) == 2:
            a, b = adj[v]
            drop(v)
            adj[a].append(b)
            adj[b].append(a)

    # Split high-degree nodes into caterpillars, neighbours in id order.
    next_id = nb + ne
    for v in sorted(adj):
        if len(adj[v]) <= 3:
            continue
        nbrs = sorted(adj[v])
        for u in nbrs:
            adj[u].remove(v)
        adj[v] = []
        spine = [v] + list(range(next_id, next_id + len(nbrs) - 3))
        next_id += len(nbrs) - 3
        for s in spine[1:]:
            adj[s] = []

        def link(a, b):
            adj[a].append(b)
            adj[b].append(a)

        link(spine[0], nbrs[0])
        link(spine[0], nbrs[1])
        for i, s in enumerate(spine):
            if i + 1 < len(spine):
                link(s, spine[i + 1])
            if i >= 1:
                link(s, nbrs[i + 1])
        link(spine[-1], nbrs[-1])

    # Renumber: leaves first in hyperedge order, then inner nodes.
    inner = sorted(v for v in adj if not (nb <= v < nb + ne))
    number = {nb + h: h for h in range(ne)}
    for i, v in enumerate(inner):
        number[v] = ne + i
    edges = sorted({tuple(sorted((number[a], number[b]))) for a in adj for b in adj[a]})
    return BranchDecomposition(ne + len(inner), tuple(edges), {h: h for h in range(ne)})


@dataclass(frozen=True)
class DecompositionDiagnostic:
    condition: int
    message: str

    def __str__(self):
        return f"condition {self.condition}: {self.message}"


def _tree_problems(n: int, edges) -> list[DecompositionDiagnostic]:
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    if n and not nx.is_tree(g):
        return [DecompositionDiagnostic(0, "the decomposition graph is not a tree")]
    return []


def validate_decomposition(D, G) -> list[DecompositionDiagnostic]:
    """Diagnostics for a tree decomposition of a graph or a branch
    decomposition of a hypergraph; [] when valid."""
    if isinstance(D, TreeDecomposition):
        out = _tree_problems(len(D.bags), D.edges)
        covered = set().union(*D.bags) if D.bags else set()
        missing = set(G.vertices) - covered
        if missing:
            out.append(DecompositionDiagnostic(1, f"vertices {sorted(missing)} are in no bag"))
        for e in sorted(G.edges, key=sorted):
            if not any(e <= bag for bag in D.bags):
                out.append(DecompositionDiagnostic(2, f"edge {sorted(e)} is in no bag"))
        g = nx.Graph()
        g.add_edges_from(D.edges)
        for v in G.vertices:
            holding = [i for i, bag in enumerate(D.bags) if v in bag]
            if len(holding) > 1 and not nx.is_connected(g.subgraph(holding)):
                out.append(DecompositionDiagnostic(3, f"bags containing {v} are not connected"))
        return out
    if isinstance(D, BranchDecomposition):
        out = _tree_problems(D.num_nodes, D.edges)
        adj = D.adjacency()
        leaves = {v for v, ns in adj.items() if len(ns) == 1}
        for v, ns in adj.items():
            if len(ns) not in (1, 3):
                out.append(DecompositionDiagnostic(1, f"node {v} has degree {len(ns)}"))
        if set(D.leaf_map) != leaves:
            out.append(DecompositionDiagnostic(2, "leaf_map keys are not exactly the leaves"))
        if sorted(D.leaf_map.values()) != list(range(len(G.edges))):
            out.append(DecompositionDiagnostic(2, "leaf_map is not a bijection onto the hyperedges"))
        return out
    raise InvalidInput(f"cannot validate {type(D).__name__}")


def graph_to_dot(g: SimpleGraph, name: str = "primal") -> str:
    lines = [f"graph {name} {{"]
    lines += [f"  v{v};" for v in g.vertices]
    lines += [f"  v{a} -- v{b};" for a, b in sorted(tuple(sorted(e)) for e in g.edges)]
    return "\n".join(lines + ["}"])


def hypergraph_to_dot(h: Hypergraph, name: str = "dependency") -> str:
    lines = [f"graph {name} {{", "  node [shape=circle];"]
    lines += [f"  v{v};" for v in h.vertices]
    for i, (inc, label) in enumerate(zip(h.edges, h.labels)):
        lines.append(f'  e{i} [shape=box, label="{label}"];')
        lines += [f"  e{i} -- v{v};" for v in sorted(inc)]
    return "\n".join(lines + ["}"])


def tree_decomposition_to_dot(T: TreeDecomposition, name: str = "tree_decomposition") -> str:
    lines = [f"graph {name} {{", "  node [shape=box];"]
    for i, bag in enumerate(T.bags):
        lines.append(f'  b{i} [label="{{{", ".join(f"v{v}" for v in sorted(bag))}}}"];')
    lines += [f"  b{a} -- b{b};" for a, b in T.edges]
    return "\n".join(lines + ["}"])


def branch_decomposition_to_dot(B: BranchDecomposition, H: Hypergraph, name: str = "branch_decomposition") -> str:
    orders = edge_orders(B, H)
    lines = [f"graph {name} {{"]
    for v in range(B.num_nodes):
        if v in B.leaf_map:
            lines.append(f'  n{v} [shape=box, label="{H.labels[B.leaf_map[v]]}"];')
        else:
            lines.append(f'  n{v} [shape=point];')
    lines += [f'  n{a} -- n{b} [label="{orders[(a, b)]}"];' for a, b in B.edges]
    return "\n".join(lines + ["}"])


def tree_decomposition_to_json(T: TreeDecomposition) -> dict:
    return {"bags": [sorted(b) for b in T.bags], "edges": [list(e) for e in T.edges], "width": T.width}


def tree_decomposition_from_json(data) -> TreeDecomposition:
    return TreeDecomposition(tuple(frozenset(b) for b in data["bags"]), tuple(tuple(e) for e in data["edges"]))


def branch_decomposition_to_json(B: BranchDecomposition, H: Hypergraph | None = None) -> dict:
    out = {
        "num_nodes": B.num_nodes,
        "edges": [list(e) for e in B.edges],
        "leaf_map": {str(k): v for k, v in sorted(B.leaf_map.items())},
    }
    if H is not None:
        orders = edge_orders(B, H)
        out["edge_orders"] = [orders[e] for e in B.edges]
        out["width"] = max(orders.values(), default=0)
        out["leaf_labels"] = {str(k): H.labels[v] for k, v in sorted(B.leaf_map.items())}
    return out


def branch_decomposition_from_json(data) -> BranchDecomposition:
    return BranchDecomposition(
        data["num_nodes"],
        tuple(tuple(e) for e in data["edges"]),
        {int(k): v for k, v in data["leaf_map"].items()},
    )
