"""Instance generators for the exhaustive desk-scale test corpus.

Small graphs come from the networkx graph atlas (every graph on up to 7
vertices, one per isomorphism class).  Rooted forests are enumerated up to
isomorphism by the usual multiset-of-subtrees recursion.  Decomposition
shape variants produce several distinct valid decompositions per graph so
the dealternation driver sees genuinely suboptimal inputs.
"""

from __future__ import annotations

import random
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Optional

from .core import Graph, ROOT, RootedForest, TreeDecomposition, is_valid_decomposition
from .oracle import exact_treewidth, optimum_decomposition


def atlas_graphs(max_vertices: int = 7, min_vertices: int = 0) -> Iterator[Graph]:
    """Every graph with min_vertices..max_vertices vertices, one per
    isomorphism class, relabeled to 1-based vertices."""
    if max_vertices > 7:
        raise ValueError("the graph atlas stops at 7 vertices")
    from networkx.generators.atlas import graph_atlas_g

    for g in graph_atlas_g():
        n = g.number_of_nodes()
        if n < min_vertices or n > max_vertices:
            continue
        relabel = {v: i for i, v in enumerate(sorted(g.nodes()), start=1)}
        yield Graph.from_edges(n, [(relabel[u], relabel[v]) for u, v in g.edges()])


@lru_cache(maxsize=None)
def _rooted_trees(n: int) -> tuple[tuple, ...]:
    """Canonical rooted trees on n unlabeled nodes, as sorted tuples of
    canonical subtrees."""
    if n == 1:
        return ((),)
    out: set[tuple] = set()
    for forest in _rooted_forests_canon(n - 1):
        out.add(forest)
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _rooted_forests_canon(n: int) -> tuple[tuple, ...]:
    """Canonical rooted forests (sorted tuples of canonical trees) on n
    unlabeled nodes."""
    if n == 0:
        return ((),)
    out: set[tuple] = set()

    def extend(remaining: int, max_tree: Optional[tuple], acc: tuple):
        if remaining == 0:
            out.add(acc)
            return
        for size in range(1, remaining + 1):
            for tree in _rooted_trees(size):
                if max_tree is not None and (size, tree) > (len_tree(max_tree), max_tree):
                    continue
                extend(remaining - size, tree, acc + (tree,))

    def len_tree(tree: tuple) -> int:
        return 1 + sum(len_tree(c) for c in tree)

    extend(n, None, ())
    return tuple(sorted(out))


def _forest_to_parents(forest_canon: tuple) -> tuple[int, ...]:
    """Assign 1-based ids in preorder (parents before children)."""
    parent: list[int] = []

    def place(tree: tuple, parent_id: int) -> None:
        parent.append(parent_id)
        my_id = len(parent)
        for child in tree:
            place(child, my_id)

    for tree in forest_canon:
        place(tree, ROOT)
    return tuple(parent)


def all_rooted_forests(n: int) -> list[RootedForest]:
    """All rooted forests on n nodes, one representative per isomorphism
    class, nodes numbered in preorder."""
    return [RootedForest(_forest_to_parents(fc)) for fc in _rooted_forests_canon(n)]


def random_rooted_forest(rng: random.Random, n: int) -> RootedForest:
    """Uniform-ish random forest: each node picks a lower-numbered parent
    or becomes a root."""
    parent = [ROOT] * n
    for v in range(2, n + 1):
        parent[v - 1] = rng.randint(0, v - 1)
    return RootedForest(tuple(parent))


def random_graph(rng: random.Random, n: int, p: float = 0.4) -> Graph:
    edges = [(u, v) for u, v in combinations(range(1, n + 1), 2) if rng.random() < p]
    return Graph.from_edges(n, edges)


def _signature(t: TreeDecomposition) -> tuple:
    return (t.forest.parent, t.bags)


def _duplicate_node(t: TreeDecomposition, x: int) -> TreeDecomposition:
    """Insert a copy of node x as a new child of x with the same bag."""
    parent = list(t.forest.parent) + [x]
    bags = list(t.bags) + [t.bag(x)]
    return TreeDecomposition(t.graph, RootedForest(tuple(parent)), tuple(bags))


def _merge_into_parent(t: TreeDecomposition, x: int) -> TreeDecomposition:
    """Contract node x into its parent (bags united); children re-hang."""
    p = t.forest.parent_of(x)
    assert p is not None
    keep = [y for y in t.nodes if y != x]
    renumber = {y: i for i, y in enumerate(keep, start=1)}
    parent = []
    bags = []
    for y in keep:
        q = t.forest.parent_of(y)
        if q == x:
            q = p
        parent.append(ROOT if q is None else renumber[q])
        bags.append(t.bag(y) | (t.bag(x) if y == p else frozenset()))
    return TreeDecomposition(t.graph, RootedForest(tuple(parent)), tuple(bags))


def _pad_from_parent(t: TreeDecomposition, x: int, cap: int) -> Optional[TreeDecomposition]:
    """Grow the bag of x by one vertex from the parent bag, respecting cap."""
    p = t.forest.parent_of(x)
    if p is None:
        return None
    extra = sorted(t.bag(p) - t.bag(x))
    if not extra or len(t.bag(x)) + 1 > cap + 1:
        return None
    bags = list(t.bags)
    bags[x - 1] = t.bag(x) | {extra[0]}
    return TreeDecomposition(t.graph, t.forest, tuple(bags))


def decomposition_shapes(g: Graph, width_cap: Optional[int] = None,
                         count: int = 3) -> list[TreeDecomposition]:
    """At least `count` structurally distinct valid decompositions of g,
    all of width <= width_cap (when the cap is at least the treewidth).

    Starts from the oracle optimum and derives variants by duplicating
    bags, merging a bag into its parent, and padding bags from parents.
    """
    t0 = optimum_decomposition(g)
    if width_cap is not None and t0.width() > width_cap:
        raise ValueError(f"treewidth {t0.width()} exceeds the cap {width_cap}")
    cap = width_cap if width_cap is not None else max(t0.width(), 0)

    variants: list[TreeDecomposition] = []
    seen: set[tuple] = set()

    def push(t: Optional[TreeDecomposition]) -> None:
        if t is None or t.width() > cap or not is_valid_decomposition(t):
            return
        sig = _signature(t)
        if sig not in seen:
            seen.add(sig)
            variants.append(t)

    push(t0)
    if t0.forest.node_count == 0:
        return variants  # the empty graph has exactly one decomposition
    for x in t0.nodes:
        push(_merge_into_parent(t0, x) if t0.forest.parent_of(x) is not None else None)
        push(_pad_from_parent(t0, x, cap))
    cur = t0
    while len(variants) < count:
        cur = _duplicate_node(cur, 1)
        push(cur)
    return variants
