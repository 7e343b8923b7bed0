"""Separation forests and the decompositions they induce.

A separation forest of a graph G is a rooted forest on V(G) whose
ancestor-descendant closure contains every edge.  Its induced tree
decomposition has one node per vertex: the bag of u is u plus every
ancestor of u with a neighbor among u's descendants, so margins are the
singletons {u} and the component of u is its descendant set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .core import (
    Graph,
    ROOT,
    RootedForest,
    TreeDecomposition,
    is_connected_subset,
    is_valid_decomposition,
)


@dataclass(frozen=True)
class SeparationForest:
    graph: Graph
    forest: RootedForest  # node i is vertex i of the graph

    def __post_init__(self):
        if self.forest.node_count != self.graph.vertex_count:
            raise ValueError("forest must be on the graph's vertex set")
        for u, v in self.graph.edges:
            if not (self.forest.is_ancestor(u, v) or self.forest.is_ancestor(v, u)):
                raise ValueError(f"edge ({u},{v}) not along an ancestor chain")

    def parent_map(self) -> dict[int, int]:
        return {v: self.forest.parent[v - 1] for v in self.forest.nodes}


def induced_decomposition(f: SeparationForest) -> TreeDecomposition:
    g, forest = f.graph, f.forest
    bags = []
    for u in forest.nodes:
        desc = forest.descendants(u)
        bag = {u}
        for w in forest.strict_ancestors(u):
            if g.neighbors[w] & desc:
                bag.add(w)
        bags.append(frozenset(bag))
    return TreeDecomposition(g, forest, tuple(bags))


def sepforest_width(f: SeparationForest) -> int:
    return induced_decomposition(f).width()


def sepforest_from_decomposition(t: TreeDecomposition,
                                 order: Optional[Sequence[int]] = None) -> SeparationForest:
    """Turn a valid decomposition into a separation forest of no larger width.

    Vertices of each margin form a chain in the given tie-breaking order
    (ascending vertex id by default); each chain hangs below the chain of
    the nearest strict ancestor node with a nonempty margin.  This realizes
    exactly the ancestor relation "margin node strictly above, or same
    margin node and earlier in the order".
    """
    if not is_valid_decomposition(t):
        raise ValueError("input decomposition is invalid")
    n = t.graph.vertex_count
    if order is None:
        rank = {v: v for v in t.graph.vertices}
    else:
        if sorted(order) != list(t.graph.vertices):
            raise ValueError("order must be a permutation of the vertex set")
        rank = {v: i for i, v in enumerate(order)}

    chains = {x: sorted(t.margin(x), key=lambda v: rank[v]) for x in t.nodes}
    parent = [ROOT] * n
    for x in t.nodes:
        chain = chains[x]
        if not chain:
            continue
        for prev, cur in zip(chain, chain[1:]):
            parent[cur - 1] = prev
        anchor = None
        y = t.forest.parent_of(x)
        while y is not None:
            if chains[y]:
                anchor = chains[y][-1]
                break
            y = t.forest.parent_of(y)
        if anchor is not None:
            parent[chain[0] - 1] = anchor
    return SeparationForest(t.graph, RootedForest(tuple(parent)))


def is_reduced(f: SeparationForest) -> bool:
    return not reduction_violations(f)


def reduction_violations(f: SeparationForest) -> tuple[tuple[int, int], ...]:
    """Parent-child pairs (u, v) where u has no neighbor among v's descendants."""
    out = []
    for u in f.forest.nodes:
        for v in f.forest.children_of(u):
            if not (f.graph.neighbors[u] & f.forest.descendants(v)):
                out.append((u, v))
    return tuple(out)


def reduce_forest(f: SeparationForest) -> SeparationForest:
    """Re-attach useless children upward until the forest is reduced.

    A child v of u with no neighbor of u among v's descendants is made a
    child of u's parent (a root when u is a root).  Each re-attachment
    strictly decreases the sum of depths, so this terminates; the width of
    the induced decomposition never increases.
    """
    g = f.graph
    parent = list(f.forest.parent)
    while True:
        forest = RootedForest(tuple(parent))
        moved = False
        for u in forest.nodes:
            for v in forest.children_of(u):
                if not (g.neighbors[u] & forest.descendants(v)):
                    parent[v - 1] = parent[u - 1]
                    moved = True
                    break
            if moved:
                break
        if not moved:
            return SeparationForest(g, forest)


@dataclass(frozen=True)
class ConnectivityReport:
    violations: tuple[int, ...]  # vertices u with G[descendants(u)] disconnected

    @property
    def ok(self) -> bool:
        return not self.violations


def check_connected_tree_factors(f: SeparationForest) -> ConnectivityReport:
    """In a reduced forest every subtree induces a connected subgraph;
    violations signal non-reduced input."""
    bad = [u for u in f.forest.nodes
           if not is_connected_subset(f.graph, f.forest.descendants(u))]
    return ConnectivityReport(tuple(bad))
