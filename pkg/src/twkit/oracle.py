"""Exact ground truth at desk scale.

Treewidth by dynamic programming over vertex subsets (elimination-order
formulation), optimum decompositions via the clique-tree construction from
an optimal elimination order, optimum reduced separation forests, and the
definition-level brute-force enumerators that back the fast paths in tests.
Everything is guarded: these routines are oracles, not solvers.
"""

from __future__ import annotations

from itertools import combinations, permutations
from typing import Iterable, Optional

from .core import Graph, ROOT, RootedForest, TreeDecomposition
from .errors import GuardError
from .factorization import CONTEXT, FOREST, Factor
from .sepforest import SeparationForest, reduce_forest, sepforest_from_decomposition

TREEWIDTH_GUARD = 16
FACTOR_GUARD = 12
PERMUTATION_GUARD = 8
CLIQUE_GUARD = 10


def _adjacency_masks(g: Graph) -> list[int]:
    adj = [0] * g.vertex_count
    for u, v in g.edges:
        adj[u - 1] |= 1 << (v - 1)
        adj[v - 1] |= 1 << (u - 1)
    return adj


def _back_degree(adj: list[int], placed: int, v: int) -> int:
    """Number of vertices outside placed|{v} reachable from v through placed."""
    reach = 1 << v
    frontier = 1 << v
    boundary = 0
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        boundary |= nxt
        frontier = nxt & placed & ~reach
        reach |= frontier
    return (boundary & ~placed & ~(1 << v)).bit_count()


def _opt_table(g: Graph) -> list[int]:
    """opt[mask] = best possible maximum back-degree when eliminating
    exactly the vertices of mask first (in some order); opt[0] = -1."""
    n = g.vertex_count
    adj = _adjacency_masks(g)
    full = (1 << n) - 1
    opt = [0] * (full + 1)
    opt[0] = -1
    for mask in range(1, full + 1):
        best = n
        rest = mask
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            prev = mask ^ low
            cand = max(opt[prev], _back_degree(adj, prev, v))
            if cand < best:
                best = cand
        opt[mask] = best
    return opt


def exact_treewidth(g: Graph) -> int:
    """Treewidth by subset DP; -1 for the empty graph."""
    n = g.vertex_count
    if n > TREEWIDTH_GUARD:
        raise GuardError(f"treewidth oracle guarded at {TREEWIDTH_GUARD} vertices, got {n}")
    if n == 0:
        return -1
    return _opt_table(g)[-1]


def optimal_elimination_order(g: Graph) -> tuple[int, ...]:
    """An elimination order achieving the exact treewidth (smallest-vertex
    tie-breaking, reconstructed last-to-first)."""
    n = g.vertex_count
    if n > TREEWIDTH_GUARD:
        raise GuardError(f"treewidth oracle guarded at {TREEWIDTH_GUARD} vertices, got {n}")
    if n == 0:
        return ()
    adj = _adjacency_masks(g)
    opt = _opt_table(g)
    target = opt[-1]
    order_rev = []
    mask = (1 << n) - 1
    while mask:
        rest = mask
        chosen = None
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            prev = mask ^ low
            if max(opt[prev], _back_degree(adj, prev, v)) <= target:
                chosen = v
                break
        assert chosen is not None
        order_rev.append(chosen + 1)
        mask ^= 1 << chosen
    return tuple(reversed(order_rev))


def brute_force_treewidth(g: Graph) -> int:
    """Minimum over all elimination orders of the maximum fill back-degree."""
    n = g.vertex_count
    if n > PERMUTATION_GUARD:
        raise GuardError(f"factorial oracle guarded at {PERMUTATION_GUARD} vertices, got {n}")
    if n == 0:
        return -1
    base = _adjacency_masks(g)
    best = n - 1
    for perm in permutations(range(n)):
        adj = list(base)
        width = 0
        alive = (1 << n) - 1
        for v in perm:
            nbrs = adj[v] & alive & ~(1 << v)
            width = max(width, nbrs.bit_count())
            if width >= best:
                break
            rest = nbrs
            while rest:
                low = rest & -rest
                rest ^= low
                adj[low.bit_length() - 1] |= nbrs & ~low
            alive ^= 1 << v
        else:
            best = min(best, width)
    return best


def decomposition_from_order(g: Graph, order: Iterable[int]) -> TreeDecomposition:
    """Clique-tree construction: bag i holds order[i] and its not-yet-
    eliminated fill neighbors; each bag hangs below the bag of the first
    eliminated such neighbor, so roots are the last-eliminated vertices."""
    order = list(order)
    n = g.vertex_count
    if sorted(order) != list(g.vertices):
        raise ValueError("order must be a permutation of the vertex set")
    position = {v: i for i, v in enumerate(order)}
    adj: dict[int, set[int]] = {v: set(g.neighbors[v]) for v in g.vertices}
    bags: list[frozenset[int]] = []
    parent = [ROOT] * n
    for i, v in enumerate(order):
        higher = {w for w in adj[v] if position[w] > i}
        bags.append(frozenset({v} | higher))
        for a, b in combinations(sorted(higher), 2):
            adj[a].add(b)
            adj[b].add(a)
        if higher:
            parent[i] = min(position[w] for w in higher) + 1
    return TreeDecomposition(g, RootedForest(tuple(parent)), tuple(bags))


def optimum_decomposition(g: Graph) -> TreeDecomposition:
    return decomposition_from_order(g, optimal_elimination_order(g))


def optimum_reduced_sepforest(g: Graph) -> SeparationForest:
    return reduce_forest(sepforest_from_decomposition(optimum_decomposition(g)))


def enumerate_factors(forest: RootedForest, subject: Optional[Iterable[int]] = None) -> list[Factor]:
    """All factors contained in the subject set, straight from the definitions.

    Forest factors are nonempty sibling-rooted subtree unions; context
    factors are subtree-minus-forest-factor differences.  Exponential in
    sibling-group sizes, hence the node guard.
    """
    n = forest.node_count
    if n > FACTOR_GUARD:
        raise GuardError(f"factor enumeration guarded at {FACTOR_GUARD} nodes, got {n}")
    subject = frozenset(forest.nodes) if subject is None else frozenset(subject)

    sibling_groups = [forest.roots] + [forest.children_of(x) for x in forest.nodes]
    by_nodes: dict[frozenset[int], Factor] = {}

    forest_factors: list[tuple[frozenset[int], tuple[int, ...]]] = []
    for group in sibling_groups:
        for size in range(1, len(group) + 1):
            for roots in combinations(group, size):
                nodes = forest.descendant_closure(roots)
                forest_factors.append((nodes, roots))
                if nodes <= subject:
                    by_nodes.setdefault(nodes, Factor(FOREST, nodes, roots))

    for r in forest.nodes:
        tree = forest.descendants(r)
        for y_nodes, y_roots in forest_factors:
            if not (y_nodes <= tree):
                continue
            if any(not (forest.is_ancestor(r, a) and r != a) for a in y_roots):
                continue
            nodes = tree - y_nodes
            if nodes and nodes <= subject:
                by_nodes.setdefault(nodes, Factor(CONTEXT, nodes, (r,), tuple(sorted(y_roots))))
    return sorted(by_nodes.values(), key=lambda f: (min(f.nodes), len(f.nodes), f.kind))


def minimum_factorization_size(forest: RootedForest, subject: Iterable[int]) -> int:
    """Exact minimum number of factors in any factorization of the subject,
    by subset DP over the definition-level factor list."""
    subject = frozenset(subject)
    if not subject:
        return 0
    order = sorted(subject)
    index = {v: i for i, v in enumerate(order)}
    factors = [sum(1 << index[x] for x in f.nodes) for f in enumerate_factors(forest, subject)]
    full = (1 << len(order)) - 1
    inf = len(order) + 1
    best = [inf] * (full + 1)
    best[0] = 0
    for mask in range(1, full + 1):
        lowest = (mask & -mask).bit_length() - 1
        b = inf
        for fm in factors:
            if fm & (1 << lowest) and fm & mask == fm:
                cand = best[mask ^ fm] + 1
                if cand < b:
                    b = cand
        best[mask] = b
    return best[full]


def max_clique(g: Graph) -> int:
    if g.vertex_count > CLIQUE_GUARD:
        raise GuardError(f"clique oracle guarded at {CLIQUE_GUARD} vertices")
    adj = _adjacency_masks(g)

    best = 0

    def extend(clique_size: int, candidates: int):
        nonlocal best
        if clique_size + candidates.bit_count() <= best:
            return
        if not candidates:
            best = max(best, clique_size)
            return
        rest = candidates
        while rest:
            low = rest & -rest
            rest ^= low
            v = low.bit_length() - 1
            extend(clique_size + 1, rest & adj[v])

    extend(0, (1 << g.vertex_count) - 1)
    return best


def chromatic_number(g: Graph) -> int:
    """Smallest proper coloring size, by backtracking."""
    n = g.vertex_count
    if n > CLIQUE_GUARD:
        raise GuardError(f"coloring oracle guarded at {CLIQUE_GUARD} vertices")
    if n == 0:
        return 0
    verts = sorted(g.vertices, key=lambda v: -len(g.neighbors[v]))

    def feasible(k: int) -> bool:
        colors: dict[int, int] = {}

        def assign(i: int) -> bool:
            if i == n:
                return True
            v = verts[i]
            used = {colors[w] for w in g.neighbors[v] if w in colors}
            for c in range(k):
                if c not in used:
                    colors[v] = c
                    if assign(i + 1):
                        return True
                    del colors[v]
            return False

        return assign(0)

    for k in range(1, n + 1):
        if feasible(k):
            return k
    return n
