"""Stains, the conflict graph, its coloring, and forest witnesses.

The stain of a vertex u is the subtree of t spanned by the margin node of
u and the margin nodes of u's children in a separation forest F.  Two
vertices conflict when their stains share a t-node; the conflict graph is
an intersection graph of subtrees of a forest, hence chordal, and
pairwise-intersecting stain families share a node (Helly), so its clique
number equals the maximum stain load of a t-node.

A proper coloring of the conflict graph yields a compact witness for F
over t: per-vertex color, root flag and parent color, plus one t-edge set
per color whose connected components are exactly the color's stains.
Decoding recovers the parent of v as the unique vertex of the recorded
color whose margin node shares a component with v's margin node.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Graph, ROOT, RootedForest, TreeDecomposition, margin_map
from .errors import DecodeError, ParseError
from .sepforest import SeparationForest


@dataclass(frozen=True)
class Stain:
    owner: int
    nodes: frozenset[int]
    edges: frozenset[tuple[int, int]]  # t-edges as (child, parent)

    def top(self, t: TreeDecomposition) -> int:
        return min(self.nodes, key=lambda x: (t.forest.depth_of(x), x))


def stain(t: TreeDecomposition, f: SeparationForest, u: int,
          phi: Optional[dict[int, int]] = None) -> Stain:
    if phi is None:
        phi = margin_map(t)
    nodes = {phi[u]}
    edges: set[tuple[int, int]] = set()
    for v in f.forest.children_of(u):
        path = t.forest.path_between(phi[u], phi[v])
        nodes.update(path)
        for a, b in zip(path, path[1:]):
            child = a if t.forest.parent_of(a) == b else b
            parent = b if child == a else a
            edges.add((child, parent))
    return Stain(u, frozenset(nodes), frozenset(edges))


def all_stains(t: TreeDecomposition, f: SeparationForest) -> dict[int, Stain]:
    phi = margin_map(t)
    return {u: stain(t, f, u, phi) for u in f.graph.vertices}


def conflict_graph(t: TreeDecomposition, f: SeparationForest) -> Graph:
    stains = all_stains(t, f)
    vs = sorted(stains)
    edges = [
        (u, v)
        for i, u in enumerate(vs)
        for v in vs[i + 1:]
        if stains[u].nodes & stains[v].nodes
    ]
    return Graph.from_edges(f.graph.vertex_count, edges)


def max_stain_load(t: TreeDecomposition, f: SeparationForest) -> int:
    """Maximum number of stains through one t-node; equals the clique
    number of the conflict graph by the Helly property."""
    stains = all_stains(t, f)
    load: dict[int, int] = {}
    for s in stains.values():
        for x in s.nodes:
            load[x] = load.get(x, 0) + 1
    return max(load.values(), default=0)


def color_conflict_graph(t: TreeDecomposition, f: SeparationForest) -> dict[int, int]:
    """Greedy proper coloring in order of increasing stain-top depth.

    Two intersecting subtrees of a forest have comparable tops and the
    deeper top lies in both, so every earlier-colored neighbor's stain
    covers the current stain's top; hence the palette never exceeds the
    maximum stain load.
    """
    stains = all_stains(t, f)
    h = conflict_graph(t, f)
    order = sorted(stains, key=lambda u: (t.forest.depth_of(stains[u].top(t)),
                                          stains[u].top(t), u))
    coloring: dict[int, int] = {}
    for u in order:
        used = {coloring[v] for v in h.neighbors[u] if v in coloring}
        c = 0
        while c in used:
            c += 1
        coloring[u] = c
    return coloring


def is_proper_coloring(h: Graph, coloring: dict[int, int]) -> bool:
    return all(coloring[u] != coloring[v] for u, v in h.edges)


def perfect_elimination_ordering(g: Graph) -> Optional[tuple[int, ...]]:
    """A simplicial elimination ordering, or None when the graph is not
    chordal."""
    alive = set(g.vertices)
    nbrs = {v: set(g.neighbors[v]) for v in g.vertices}
    order = []
    while alive:
        pick = None
        for v in sorted(alive):
            nv = nbrs[v] & alive
            if all(b in nbrs[a] for a in nv for b in nv if a < b):
                pick = v
                break
        if pick is None:
            return None
        order.append(pick)
        alive.remove(pick)
    return tuple(order)


def stain_family_common_node(stains: Iterable[Stain]) -> Optional[int]:
    """A node common to all given stains, if any."""
    stains = list(stains)
    if not stains:
        return None
    common = frozenset.intersection(*(s.nodes for s in stains))
    return min(common) if common else None


@dataclass(frozen=True)
class ConflictWitness:
    vertex_count: int
    coloring: dict[int, int]
    is_root: dict[int, bool]
    parent_color: dict[int, int]                      # only for non-roots
    color_edge_sets: dict[int, frozenset[int]]        # color -> child t-nodes of M_c edges

    def colors_used(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.coloring.values())))


def encode_witness(t: TreeDecomposition, f: SeparationForest,
                   coloring: dict[int, int]) -> ConflictWitness:
    """Bundle a proper conflict-graph coloring into a decodable witness.

    The per-color edge set M_c stores only the child endpoints of the
    t-edges covered by color-c stains; the nodes of singleton stains are
    recovered from the coloring and the margin map during decode.
    """
    h = conflict_graph(t, f)
    if not is_proper_coloring(h, coloring):
        raise ValueError("coloring is not proper on the conflict graph")
    stains = all_stains(t, f)
    edge_sets: dict[int, set[int]] = {}
    for u, s in stains.items():
        c = coloring[u]
        edge_sets.setdefault(c, set())
        for child, _parent in s.edges:
            edge_sets[c].add(child)
    is_root = {v: f.forest.is_root(v) for v in f.graph.vertices}
    parent_color = {}
    for v in f.graph.vertices:
        p = f.forest.parent_of(v)
        if p is not None:
            parent_color[v] = coloring[p]
    return ConflictWitness(
        vertex_count=f.graph.vertex_count,
        coloring=dict(coloring),
        is_root=is_root,
        parent_color=parent_color,
        color_edge_sets={c: frozenset(s) for c, s in edge_sets.items()},
    )


def decode_witness(t: TreeDecomposition, w: ConflictWitness) -> SeparationForest:
    """Reconstruct the separation forest from a witness over t.

    For every color c, the recorded t-edges together with the margin nodes
    of color-c vertices split into connected components, one per stain.
    The parent of a non-root v is the unique color-matching vertex whose
    margin node lies in the same component as v's margin node; any
    ambiguity or absence signals a corrupted witness.
    """
    g = t.graph
    if w.vertex_count != g.vertex_count:
        raise DecodeError("witness is over a different vertex count")
    phi = margin_map(t)

    comp: dict[int, dict[int, int]] = {}
    for c in set(w.coloring.values()) | set(w.color_edge_sets):
        nodes = {phi[v] for v, col in w.coloring.items() if col == c}
        edges = []
        for child in w.color_edge_sets.get(c, frozenset()):
            parent = t.forest.parent_of(child)
            if parent is None:
                raise DecodeError(f"color {c} records an edge above root node {child}")
            nodes.add(child)
            nodes.add(parent)
            edges.append((child, parent))
        comp_id = {x: x for x in nodes}

        def find(x: int) -> int:
            while comp_id[x] != x:
                comp_id[x] = comp_id[comp_id[x]]
                x = comp_id[x]
            return x

        for a, b in edges:
            comp_id[find(a)] = find(b)
        comp[c] = {x: find(x) for x in nodes}

    by_color: dict[int, list[int]] = {}
    for v, c in w.coloring.items():
        by_color.setdefault(c, []).append(v)

    parent = [ROOT] * g.vertex_count
    for v in g.vertices:
        if v not in w.coloring:
            raise DecodeError(f"vertex {v} has no color")
        if w.is_root.get(v, False):
            continue
        c = w.parent_color.get(v)
        if c is None:
            raise DecodeError(f"non-root vertex {v} has no parent color")
        members = by_color.get(c, [])
        target = comp.get(c, {}).get(phi[v])
        candidates = [u for u in members if comp[c].get(phi[u]) == target and target is not None]
        if len(candidates) != 1:
            raise DecodeError(
                f"vertex {v}: expected exactly one color-{c} vertex sharing its "
                f"component, found {len(candidates)}"
            )
        parent[v - 1] = candidates[0]
    try:
        return SeparationForest(g, RootedForest(tuple(parent)))
    except ValueError as exc:
        raise DecodeError(f"decoded child relation is not a separation forest: {exc}")


def write_witness(w: ConflictWitness) -> str:
    lines = [f"w {w.vertex_count}"]
    for v in range(1, w.vertex_count + 1):
        root = 1 if w.is_root.get(v, False) else 0
        pc = "-" if root else str(w.parent_color[v])
        lines.append(f"{v} {w.coloring[v]} {root} {pc}")
    for c in sorted(w.color_edge_sets):
        for child in sorted(w.color_edge_sets[c]):
            lines.append(f"e {c} {child}")
    return "\n".join(lines) + "\n"


def parse_witness(text: str) -> ConflictWitness:
    n = None
    coloring: dict[int, int] = {}
    is_root: dict[int, bool] = {}
    parent_color: dict[int, int] = {}
    edge_sets: dict[int, set[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if n is None:
            if parts[0] != "w" or len(parts) != 2:
                raise ParseError("expected 'w <n>' header", lineno)
            n = int(parts[1])
        elif parts[0] == "e":
            if len(parts) != 3:
                raise ParseError("expected 'e <color> <tnode_child>'", lineno)
            edge_sets.setdefault(int(parts[1]), set()).add(int(parts[2]))
        else:
            if len(parts) != 4:
                raise ParseError("expected '<v> <color> <root> <parent_color|->'", lineno)
            v, col, root = int(parts[0]), int(parts[1]), int(parts[2])
            coloring[v] = col
            is_root[v] = bool(root)
            if parts[3] != "-":
                parent_color[v] = int(parts[3])
            elif not root:
                raise ParseError(f"non-root vertex {v} needs a parent color", lineno)
    if n is None:
        raise ParseError("missing 'w <n>' header")
    return ConflictWitness(n, coloring, is_root, parent_color,
                           {c: frozenset(s) for c, s in edge_sets.items()})
