"""Graphs, rooted forests, and tree decompositions.

Vertices and decomposition nodes are 1-based integers.  All types are
immutable after construction and safe to share across threads.  Structural
well-formedness (index ranges, acyclic parent maps) is enforced at
construction time; the semantic decomposition properties (edge coverage,
connected occurrence sets) are *reported* by :func:`validate_decomposition`
rather than raised, so that broken decompositions can be inspected.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Optional


ROOT = 0  # parent marker for root nodes


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices 1..vertex_count."""

    vertex_count: int
    edges: frozenset[tuple[int, int]]  # normalized pairs (u, v) with u < v

    @staticmethod
    def from_edges(vertex_count: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        norm = set()
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= vertex_count and 1 <= v <= vertex_count):
                raise ValueError(f"edge ({u},{v}) out of range 1..{vertex_count}")
            norm.add((min(u, v), max(u, v)))
        return Graph(vertex_count, frozenset(norm))

    def __post_init__(self):
        if self.vertex_count < 0:
            raise ValueError("negative vertex count")
        for u, v in self.edges:
            if not (1 <= u < v <= self.vertex_count):
                raise ValueError(f"bad edge ({u},{v})")

    @property
    def vertices(self) -> range:
        return range(1, self.vertex_count + 1)

    @cached_property
    def neighbors(self) -> dict[int, frozenset[int]]:
        nbr: dict[int, set[int]] = {v: set() for v in self.vertices}
        for u, v in self.edges:
            nbr[u].add(v)
            nbr[v].add(u)
        return {v: frozenset(s) for v, s in nbr.items()}

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edges

    def edge_count(self) -> int:
        return len(self.edges)


def is_connected_subset(g: Graph, vs: frozenset[int] | set[int]) -> bool:
    """True iff the induced subgraph g[vs] is connected (empty set counts)."""
    if not vs:
        return True
    vs = set(vs)
    start = next(iter(vs))
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for w in g.neighbors[u]:
            if w in vs and w not in seen:
                seen.add(w)
                stack.append(w)
    return seen == vs


@dataclass(frozen=True)
class RootedForest:
    """Rooted forest on nodes 1..n stored parent-up; parent 0 marks a root.

    Descendant/ancestor relations are reflexive, matching the convention
    that every node is its own descendant.
    """

    parent: tuple[int, ...]

    @staticmethod
    def from_parent_map(parent: dict[int, int] | Iterable[int]) -> "RootedForest":
        if isinstance(parent, dict):
            n = len(parent)
            if set(parent) != set(range(1, n + 1)):
                raise ValueError("parent map keys must be 1..n")
            return RootedForest(tuple(parent[i] for i in range(1, n + 1)))
        return RootedForest(tuple(parent))

    def __post_init__(self):
        n = len(self.parent)
        state = [0] * (n + 1)  # 0 unvisited, 1 on stack, 2 done
        for start in range(1, n + 1):
            path = []
            v = start
            while state[v] == 0:
                state[v] = 1
                path.append(v)
                p = self.parent[v - 1]
                if not (0 <= p <= n):
                    raise ValueError(f"parent of {v} out of range: {p}")
                if p == ROOT:
                    break
                if state[p] == 1:
                    raise ValueError(f"parent cycle through node {p}")
                v = p
            for w in path:
                state[w] = 2

    @property
    def node_count(self) -> int:
        return len(self.parent)

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    def parent_of(self, x: int) -> Optional[int]:
        p = self.parent[x - 1]
        return None if p == ROOT else p

    def is_root(self, x: int) -> bool:
        return self.parent[x - 1] == ROOT

    @cached_property
    def roots(self) -> tuple[int, ...]:
        return tuple(x for x in self.nodes if self.is_root(x))

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        ch: list[list[int]] = [[] for _ in range(self.node_count + 1)]
        for x in self.nodes:
            p = self.parent[x - 1]
            if p != ROOT:
                ch[p].append(x)
        return tuple(tuple(sorted(c)) for c in ch)

    def children_of(self, x: int) -> tuple[int, ...]:
        return self.children[x]

    @cached_property
    def depth(self) -> tuple[int, ...]:
        d = [0] * (self.node_count + 1)
        for x in self.top_down():
            p = self.parent[x - 1]
            d[x] = 0 if p == ROOT else d[p] + 1
        return tuple(d)

    def depth_of(self, x: int) -> int:
        return self.depth[x]

    def top_down(self) -> Iterator[int]:
        """Nodes in an order where parents precede children (roots ascending)."""
        stack = list(reversed(self.roots))
        while stack:
            x = stack.pop()
            yield x
            stack.extend(reversed(self.children[x]))

    def post_order(self) -> tuple[int, ...]:
        """Strict descendants before ancestors; ascending-id tie-breaks."""
        order: list[int] = []

        def visit(x: int):
            for c in self.children[x]:
                visit(c)
            order.append(x)

        for r in self.roots:
            visit(r)
        return tuple(order)

    @cached_property
    def _descendants(self) -> tuple[frozenset[int], ...]:
        desc: list[set[int]] = [set() for _ in range(self.node_count + 1)]
        for x in self.post_order():
            s = {x}
            for c in self.children[x]:
                s |= desc[c]
            desc[x] = s
        return tuple(frozenset(s) for s in desc)

    def descendants(self, x: int) -> frozenset[int]:
        return self._descendants[x]

    def strict_ancestors(self, x: int) -> tuple[int, ...]:
        out = []
        p = self.parent[x - 1]
        while p != ROOT:
            out.append(p)
            p = self.parent[p - 1]
        return tuple(out)

    def ancestors(self, x: int) -> tuple[int, ...]:
        return (x,) + self.strict_ancestors(x)

    def is_ancestor(self, a: int, d: int) -> bool:
        """Reflexive ancestor test: a is an ancestor of d."""
        return d in self._descendants[a]

    def are_siblings(self, a: int, b: int) -> bool:
        """Common parent, or both roots."""
        return self.parent[a - 1] == self.parent[b - 1]

    def root_of(self, x: int) -> int:
        anc = self.ancestors(x)
        return anc[-1]

    def path_between(self, a: int, b: int) -> tuple[int, ...]:
        """Node sequence of the unique path from a to b, endpoints included."""
        if self.root_of(a) != self.root_of(b):
            raise ValueError(f"nodes {a} and {b} lie in different trees")
        up_a, up_b = [a], [b]
        x, y = a, b
        while self.depth[x] > self.depth[y]:
            x = self.parent[x - 1]
            up_a.append(x)
        while self.depth[y] > self.depth[x]:
            y = self.parent[y - 1]
            up_b.append(y)
        while x != y:
            x = self.parent[x - 1]
            y = self.parent[y - 1]
            up_a.append(x)
            up_b.append(y)
        return tuple(up_a[:-1] + up_b[::-1])

    def descendant_closure(self, xs: Iterable[int]) -> frozenset[int]:
        out: set[int] = set()
        for x in xs:
            out |= self._descendants[x]
        return frozenset(out)


@dataclass(frozen=True)
class Violation:
    """A single failed decomposition property; violations are data, not errors."""

    kind: str  # "uncovered-edge" | "vertex-missing" | "vertex-disconnected" | "empty-bag"
    subject: tuple

    def __str__(self) -> str:
        if self.kind == "uncovered-edge":
            u, v = self.subject
            return f"edge {{{u},{v}}} not covered by any bag"
        if self.kind == "vertex-missing":
            return f"vertex {self.subject[0]} appears in no bag"
        if self.kind == "vertex-disconnected":
            return f"occurrence set of vertex {self.subject[0]} is disconnected"
        if self.kind == "empty-bag":
            return f"bag of node {self.subject[0]} is empty"
        return f"{self.kind}: {self.subject}"


@dataclass(frozen=True)
class TreeDecomposition:
    """Rooted forest plus a bag per node.

    The empty decomposition (no nodes) is legal only for the empty graph;
    otherwise every graph vertex must occur in some nonempty bag for the
    decomposition to validate.
    """

    graph: Graph
    forest: RootedForest
    bags: tuple[frozenset[int], ...]  # bags[i] is the bag of node i+1

    @staticmethod
    def build(graph: Graph, parent: Iterable[int] | dict[int, int],
              bags: dict[int, Iterable[int]] | Iterable[Iterable[int]]) -> "TreeDecomposition":
        forest = RootedForest.from_parent_map(parent)
        if isinstance(bags, dict):
            if set(bags) != set(forest.nodes):
                raise ValueError("bag keys must match forest nodes")
            seq = [bags[x] for x in forest.nodes]
        else:
            seq = list(bags)
        return TreeDecomposition(graph, forest, tuple(frozenset(b) for b in seq))

    def __post_init__(self):
        if len(self.bags) != self.forest.node_count:
            raise ValueError("one bag per forest node required")
        for x, bag in enumerate(self.bags, start=1):
            for v in bag:
                if not (1 <= v <= self.graph.vertex_count):
                    raise ValueError(f"bag of node {x} mentions unknown vertex {v}")

    @property
    def nodes(self) -> range:
        return self.forest.nodes

    def bag(self, x: int) -> frozenset[int]:
        if not (1 <= x <= self.forest.node_count):
            raise ValueError(f"unknown node {x}")
        return self.bags[x - 1]

    def adhesion(self, x: int) -> frozenset[int]:
        """Bag intersected with the parent bag; empty at roots."""
        p = self.forest.parent_of(x)
        if p is None:
            self.bag(x)  # range check
            return frozenset()
        return self.bag(x) & self.bag(p)

    def margin(self, x: int) -> frozenset[int]:
        return self.bag(x) - self.adhesion(x)

    def component(self, x: int) -> frozenset[int]:
        out: set[int] = set()
        for d in self.forest.descendants(x):
            out |= self.margin(d)
        return frozenset(out)

    def width(self) -> int:
        """Maximum bag size minus 1; -1 for the empty decomposition."""
        return max((len(b) for b in self.bags), default=0) - 1


def validate_decomposition(t: TreeDecomposition) -> tuple[Violation, ...]:
    """Report every violation of edge coverage, occurrence connectivity,
    and bag nonemptiness; an empty report means the decomposition is valid."""
    out: list[Violation] = []
    for x in t.nodes:
        if not t.bag(x):
            out.append(Violation("empty-bag", (x,)))
    occurrence: dict[int, set[int]] = {v: set() for v in t.graph.vertices}
    for x in t.nodes:
        for v in t.bag(x):
            occurrence[v].add(x)
    for u, v in sorted(t.graph.edges):
        if not any(u in t.bag(x) and v in t.bag(x) for x in t.nodes):
            out.append(Violation("uncovered-edge", (u, v)))
    for v in t.graph.vertices:
        occ = occurrence[v]
        if not occ:
            out.append(Violation("vertex-missing", (v,)))
        elif not _nodes_connected(t.forest, occ):
            out.append(Violation("vertex-disconnected", (v,)))
    return tuple(out)


def _nodes_connected(forest: RootedForest, nodes: set[int]) -> bool:
    start = next(iter(nodes))
    seen = {start}
    stack = [start]
    while stack:
        x = stack.pop()
        p = forest.parent_of(x)
        for y in (forest.children_of(x) + ((p,) if p is not None else ())):
            if y in nodes and y not in seen:
                seen.add(y)
                stack.append(y)
    return seen == nodes


def is_valid_decomposition(t: TreeDecomposition) -> bool:
    return not validate_decomposition(t)


def margin_map(t: TreeDecomposition) -> dict[int, int]:
    """Map each vertex to the unique node containing it in its margin.

    Raises ValueError when the margins do not partition the vertex set,
    which happens exactly when the decomposition is invalid in a way that
    touches occurrence sets.
    """
    out: dict[int, int] = {}
    for x in t.nodes:
        for v in t.margin(x):
            if v in out:
                raise ValueError(f"vertex {v} lies in the margins of nodes {out[v]} and {x}")
            out[v] = x
    missing = [v for v in t.graph.vertices if v not in out]
    if missing:
        raise ValueError(f"vertices {missing} lie in no margin")
    return out
