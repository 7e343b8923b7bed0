"""PACE 2017 interchange formats plus the separation-forest text format.

Graph (.gr): comment lines start with "c"; header "p tw <n> <m>"; then m
lines "<u> <v>".  Decomposition (.td): header "s td <bag_count>
<max_bag_size> <n>"; bag lines "b <bag_id> <v1> ... <vj>"; then bag-tree
edge lines "<x> <y>".  The .td shape is an unrooted tree, so we impose a
rooting convention on read: within each connected component of the bag
tree, the lowest-numbered bag is the root.  Writers emit an informational
"c root <bag_id>" line per component.

Separation forest (.sf): line "sf <n>", then n lines "<v> <parent-or-0>"
(0 = root), sorted by v.
"""

from __future__ import annotations

from .core import Graph, RootedForest, TreeDecomposition, ROOT
from .errors import ParseError
from .sepforest import SeparationForest


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        yield lineno, line.split()


def parse_gr(text: str) -> Graph:
    n = m = None
    edges = []
    for lineno, parts in _tokens(text):
        if parts[0] == "p":
            if n is not None:
                raise ParseError("duplicate problem line", lineno)
            if len(parts) != 4 or parts[1] != "tw":
                raise ParseError("expected 'p tw <n> <m>'", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("non-integer counts in problem line", lineno)
        else:
            if n is None:
                raise ParseError("edge line before problem line", lineno)
            if len(parts) != 2:
                raise ParseError("expected '<u> <v>'", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("non-integer edge endpoints", lineno)
            edges.append((u, v, lineno))
    if n is None:
        raise ParseError("missing 'p tw <n> <m>' header")
    if m != len(edges):
        raise ParseError(f"header announces {m} edges, found {len(edges)}")
    try:
        return Graph.from_edges(n, [(u, v) for u, v, _ in edges])
    except ValueError as exc:
        raise ParseError(str(exc))


def write_gr(g: Graph) -> str:
    lines = [f"p tw {g.vertex_count} {len(g.edges)}"]
    lines += [f"{u} {v}" for u, v in sorted(g.edges)]
    return "\n".join(lines) + "\n"


def parse_td(text: str, graph: Graph) -> TreeDecomposition:
    header = None
    bags: dict[int, frozenset[int]] = {}
    tree_edges: list[tuple[int, int]] = []
    for lineno, parts in _tokens(text):
        if parts[0] == "s":
            if header is not None:
                raise ParseError("duplicate solution line", lineno)
            if len(parts) != 5 or parts[1] != "td":
                raise ParseError("expected 's td <bags> <max_bag_size> <n>'", lineno)
            try:
                header = (int(parts[2]), int(parts[3]), int(parts[4]))
            except ValueError:
                raise ParseError("non-integer counts in solution line", lineno)
        elif parts[0] == "b":
            if header is None:
                raise ParseError("bag line before solution line", lineno)
            try:
                bag_id = int(parts[1])
                vs = frozenset(int(p) for p in parts[2:])
            except (ValueError, IndexError):
                raise ParseError("malformed bag line", lineno)
            if bag_id in bags:
                raise ParseError(f"duplicate bag {bag_id}", lineno)
            bags[bag_id] = vs
        else:
            if header is None:
                raise ParseError("edge line before solution line", lineno)
            if len(parts) != 2:
                raise ParseError("expected bag-tree edge '<x> <y>'", lineno)
            try:
                tree_edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ParseError("non-integer bag ids", lineno)
    if header is None:
        raise ParseError("missing 's td' header")
    bag_count, max_size, n = header
    if n != graph.vertex_count:
        raise ParseError(f"decomposition is over {n} vertices, graph has {graph.vertex_count}")
    if set(bags) != set(range(1, bag_count + 1)):
        raise ParseError(f"expected bags 1..{bag_count}, found {sorted(bags)}")
    if bags and max(len(b) for b in bags.values()) > max_size:
        raise ParseError("a bag exceeds the declared maximum size")

    adjacency: dict[int, set[int]] = {x: set() for x in bags}
    for x, y in tree_edges:
        if x not in bags or y not in bags:
            raise ParseError(f"bag-tree edge ({x},{y}) mentions unknown bag")
        if x == y:
            raise ParseError(f"self-loop at bag {x}")
        adjacency[x].add(y)
        adjacency[y].add(x)
    if sum(len(s) for s in adjacency.values()) != 2 * len(tree_edges):
        raise ParseError("duplicate bag-tree edge")

    # Root each component at its lowest-numbered bag; reject cycles.
    parent = {x: ROOT for x in bags}
    seen: set[int] = set()
    roots = 0
    for start in sorted(bags):
        if start in seen:
            continue
        roots += 1
        seen.add(start)
        stack = [start]
        while stack:
            x = stack.pop()
            for y in sorted(adjacency[x]):
                if y in seen:
                    continue
                seen.add(y)
                parent[y] = x
                stack.append(y)
    if len(tree_edges) != len(bags) - roots:
        raise ParseError("bag tree contains a cycle")
    return TreeDecomposition.build(graph, parent, bags)


def write_td(t: TreeDecomposition) -> str:
    n_nodes = t.forest.node_count
    max_size = max((len(b) for b in t.bags), default=0)
    lines = [f"s td {n_nodes} {max_size} {t.graph.vertex_count}"]
    for r in t.forest.roots:
        lines.append(f"c root {r}")
    for x in t.nodes:
        body = " ".join(str(v) for v in sorted(t.bag(x)))
        lines.append(f"b {x} {body}".rstrip())
    for x in t.nodes:
        p = t.forest.parent_of(x)
        if p is not None:
            lines.append(f"{p} {x}")
    return "\n".join(lines) + "\n"


def parse_sf(text: str, graph: Graph) -> SeparationForest:
    header = None
    parent: dict[int, int] = {}
    for lineno, parts in _tokens(text):
        if header is None:
            if len(parts) != 2 or parts[0] != "sf":
                raise ParseError("expected 'sf <n>' header", lineno)
            try:
                header = int(parts[1])
            except ValueError:
                raise ParseError("non-integer vertex count", lineno)
        else:
            if len(parts) != 2:
                raise ParseError("expected '<v> <parent-or-0>'", lineno)
            try:
                v, p = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError("non-integer entries", lineno)
            if v in parent:
                raise ParseError(f"duplicate vertex {v}", lineno)
            parent[v] = p
    if header is None:
        raise ParseError("missing 'sf <n>' header")
    if header != graph.vertex_count:
        raise ParseError(f"forest is over {header} vertices, graph has {graph.vertex_count}")
    if set(parent) != set(range(1, header + 1)):
        raise ParseError("vertex lines must cover 1..n exactly once")
    return SeparationForest(graph, RootedForest.from_parent_map(parent))


def write_sf(f: SeparationForest) -> str:
    lines = [f"sf {f.forest.node_count}"]
    for v in f.forest.nodes:
        p = f.forest.parent_of(v)
        lines.append(f"{v} {p if p is not None else 0}")
    return "\n".join(lines) + "\n"
