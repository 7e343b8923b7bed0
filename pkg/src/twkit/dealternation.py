"""Dealternation surgery on reduced separation forests.

Given a tree decomposition t of width k and a reduced optimum-width
separation forest F, processing the nodes of t bottom-up and locally
reorganizing the context factors of fact(U+W) keeps F reduced and of
optimum width while forcing, for every node x of t, at most f(k) maximal
factors on the component set of x and at most g(k) children of x whose
component sets own a context factor.

The local step colors U red and W blue, reads off one word segment
x_i = +(-)^{|Q_i|} per spine vertex of each context factor, dealternates
the resulting bichromatic word, and rebuilds the spine in the permuted
order; the last spine vertex stays in place.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Optional

from .core import Graph, ROOT, RootedForest, TreeDecomposition
from .factorization import CONTEXT, Factor, Factorization, maximal_factorization
from .sepforest import (
    SeparationForest,
    induced_decomposition,
    is_reduced,
    sepforest_width,
)
from .words import ColoredWord, MINUS, PLUS, _dealternate_item_order, word_stats

RED = "red"
BLUE = "blue"


def blocks_per_color_bound(k: int) -> Fraction:
    """Per-color block bound (5k+5)/2 for one reorganized context factor."""
    return Fraction(5 * k + 5, 2)


def f_bound_exact(k: int) -> Fraction:
    return (k + 2) + (2 * k + 1) * blocks_per_color_bound(k)


def f_bound(k: int) -> int:
    """Factor-count bound per component set; ceiling integerization of the
    half-integer (5k+5)/2 term, the safe direction for an upper bound."""
    return (k + 2) + (2 * k + 1) * ceil(blocks_per_color_bound(k))


def g_bound(k: int) -> int:
    """Bound on children owning a context factor."""
    return (9 * f_bound(k) + 3 * (k + 1)) * (k + 1)


def h_bound(k: int) -> int:
    """Stain-load bound used by the conflict machinery."""
    return g_bound(k) * f_bound(k) + 2 * f_bound(k) + 2 * k + 1


def describe_bounds(k: int) -> str:
    return (
        f"k={k} f={f_bound(k)} (exact {f_bound_exact(k)}) "
        f"g={g_bound(k)} h={h_bound(k)}"
    )


@dataclass(frozen=True)
class Tripartition:
    """(U, X, W): U and W carry no edge between them; X is the small cut."""

    u: frozenset[int]
    x: frozenset[int]
    w: frozenset[int]

    def validate(self, g: Graph, k: Optional[int] = None) -> None:
        parts = (self.u, self.x, self.w)
        if sum(len(p) for p in parts) != g.vertex_count or \
                frozenset().union(*parts) != frozenset(g.vertices):
            raise ValueError("U, X, W must partition the vertex set")
        for a, b in g.edges:
            if (a in self.u and b in self.w) or (a in self.w and b in self.u):
                raise ValueError(f"edge ({a},{b}) runs between U and W")
        if k is not None and len(self.x) > k + 1:
            raise ValueError(f"|X| = {len(self.x)} exceeds k+1 = {k + 1}")

    def color_of(self, v: int) -> Optional[str]:
        if v in self.u:
            return RED
        if v in self.w:
            return BLUE
        return None


@dataclass(frozen=True)
class SpineAnalysis:
    """Per-context-factor data feeding one reorganization."""

    context: Factor
    spine: tuple[int, ...]                  # v_1 .. v_{m+1}
    hang_sets: tuple[frozenset[int], ...]   # R_i, one per spine vertex
    contexts: tuple[frozenset[int], ...]    # C_i = {v_i} | R_i
    escape_sets: tuple[frozenset[int], ...] # Q_i for i <= m
    word: ColoredWord                       # h = x_1 .. x_m
    segment_of: tuple[int, ...]             # word position -> spine index (1-based)
    permutation: tuple[int, ...]            # pi over 1..m

    @property
    def spine_length(self) -> int:
        return len(self.spine)


def analyze_context(f: SeparationForest, part: Tripartition, factor: Factor) -> SpineAnalysis:
    """Spine, hang sets, escape sets, the word h, and the reordering
    permutation for one maximal context factor of fact(U+W)."""
    if factor.kind != CONTEXT:
        raise ValueError("spine analysis applies to context factors only")
    if not is_reduced(f):
        raise ValueError("separation forest must be reduced")
    part.validate(f.graph)
    fact_uw = maximal_factorization(f.forest, part.u | part.w)
    if factor not in fact_uw.factors:
        raise ValueError("factor is not a maximal factor of U+W")

    forest = f.forest
    s = induced_decomposition(f)
    width = s.width()

    apex = forest.parent_of(factor.appendices[0])
    assert apex is not None and apex in factor.nodes
    spine_rev = [apex]
    while spine_rev[-1] != factor.root:
        spine_rev.append(forest.parent_of(spine_rev[-1]))
    spine = tuple(reversed(spine_rev))
    # m = 0 (root already the appendices' parent) degenerates to a no-op.
    m = len(spine) - 1

    on_spine = set(spine)
    hang_sets = []
    for i, v in enumerate(spine):
        skip = set(factor.appendices) if i == m else set()
        hang = set()
        for c in forest.children_of(v):
            if c in on_spine or c in skip:
                continue
            hang |= forest.descendants(c)
        assert hang <= factor.nodes
        hang_sets.append(frozenset(hang))
    contexts = tuple(frozenset({v}) | r for v, r in zip(spine, hang_sets))

    # Every vertex hanging off a spine vertex shares its color.
    for v, r in zip(spine, hang_sets):
        color = part.color_of(v)
        assert color is not None
        assert all(part.color_of(w) == color for w in r), "hang set not monochromatic"

    escape_sets = []
    letters: list[str] = []
    colors: list[str] = []
    segment_of: list[int] = []
    for i in range(m):
        q = frozenset((s.bag(spine[i]) - s.bag(spine[i + 1])) - {spine[i]})
        assert spine[i] in s.bag(spine[i + 1]), "reducedness keeps v_i in the next bag"
        escape_sets.append(q)
        seg = PLUS + MINUS * len(q)
        letters.extend(seg)
        color = part.color_of(spine[i])
        colors.extend([color] * len(seg))
        segment_of.extend([i + 1] * len(seg))

        sum_expected = len(s.adhesion(spine[i + 1])) - len(s.adhesion(spine[i]))
        assert 1 - len(q) == sum_expected, "adhesion telescope identity"

    word = ColoredWord(tuple(letters), tuple(colors))
    stats = word_stats(word)
    assert stats.pmax <= width + 1 - len(s.adhesion(spine[0]))
    for color in (RED, BLUE):
        restricted = word.restrict(color)
        assert word_stats(restricted).pmin >= -width

    seg_colors = [part.color_of(v) for v in spine[:m]]
    seg_sums = [1 - len(q) for q in escape_sets]
    order0 = _dealternate_item_order(seg_colors, seg_sums)
    permutation = tuple(i + 1 for i in order0)

    return SpineAnalysis(
        context=factor,
        spine=spine,
        hang_sets=tuple(hang_sets),
        contexts=contexts,
        escape_sets=tuple(escape_sets),
        word=word,
        segment_of=tuple(segment_of),
        permutation=permutation,
    )


def local_dealternate(f: SeparationForest, part: Tripartition,
                      k: Optional[int] = None) -> SeparationForest:
    """One local fixing step: reorganize every maximal context factor of
    fact(U+W) so U splits into few factors, leaving forest factors intact.

    The result is again a reduced separation forest of no larger width;
    factors contained in U or in W survive the reorganization.
    """
    if not is_reduced(f):
        raise ValueError("separation forest must be reduced")
    part.validate(f.graph, k)
    if k is not None and sepforest_width(f) > k:
        raise ValueError("forest width exceeds the declared k")

    fact_uw = maximal_factorization(f.forest, part.u | part.w)
    parent = list(f.forest.parent)
    for factor in fact_uw.context_factors():
        ana = analyze_context(f, part, factor)
        spine, pi, m = ana.spine, ana.permutation, len(ana.spine) - 1
        if m == 0:
            continue
        old_parent_of_root = f.forest.parent[spine[0] - 1]
        chain = [spine[pi[i] - 1] for i in range(m)]
        parent[chain[0] - 1] = old_parent_of_root  # ROOT stays ROOT
        for a, b in zip(chain, chain[1:]):
            parent[b - 1] = a
        parent[spine[m] - 1] = chain[-1]

    result = SeparationForest(f.graph, RootedForest(tuple(parent)))
    if not is_reduced(result):
        raise AssertionError("reorganized forest lost reducedness")
    if sepforest_width(result) > sepforest_width(f):
        raise AssertionError("reorganized forest got wider")
    return result


def t_alternation(t: TreeDecomposition, f: SeparationForest) -> int:
    """Maximum over t-nodes of the factor count of the node's component set."""
    return max(
        (len(maximal_factorization(f.forest, t.component(x))) for x in t.nodes),
        default=0,
    )


@dataclass(frozen=True)
class StepTrace:
    node: int
    tripartition: Tripartition
    factors_after: int
    width_after: int
    reduced_after: bool
    invariant_ok: bool  # all previously processed nodes still within f(k)


def global_dealternate(t: TreeDecomposition, f0: SeparationForest,
                       k: Optional[int] = None,
                       require_optimum: bool = True,
                       trace: Optional[list[StepTrace]] = None) -> SeparationForest:
    """Bottom-up driver: apply the local step at every node of t.

    Processes nodes in post-order (ascending-id tie-breaks) with
    (U, X, W) = (component, adhesion, rest) of the current node, so earlier
    nodes' component sets sit inside U or W of later steps and their factor
    counts never grow.
    """
    if t.graph != f0.graph:
        raise ValueError("decomposition and forest must be over the same graph")
    if not is_reduced(f0):
        raise ValueError("initial separation forest must be reduced")
    width_t = t.width()
    if k is None:
        k = max(width_t, 0)
    if width_t > k:
        raise ValueError(f"decomposition width {width_t} exceeds k = {k}")
    if sepforest_width(f0) > k and f0.graph.vertex_count > 0:
        raise ValueError("initial forest is wider than k")
    if require_optimum:
        from .oracle import exact_treewidth

        if sepforest_width(f0) != exact_treewidth(f0.graph):
            raise ValueError("initial separation forest is not of optimum width")

    vertices = frozenset(t.graph.vertices)
    f = f0
    processed: list[int] = []
    for x in t.forest.post_order():
        u = t.component(x)
        if not u:
            processed.append(x)
            continue
        xs = t.adhesion(x)
        part = Tripartition(u, xs, vertices - u - xs)
        f = local_dealternate(f, part, k)
        processed.append(x)
        if trace is not None:
            counts = [
                len(maximal_factorization(f.forest, t.component(y)))
                for y in processed
            ]
            trace.append(StepTrace(
                node=x,
                tripartition=part,
                factors_after=counts[-1],
                width_after=sepforest_width(f),
                reduced_after=is_reduced(f),
                invariant_ok=all(c <= f_bound(k) for c in counts),
            ))
    return f


def context_children(t: TreeDecomposition, f: SeparationForest, x: int) -> tuple[int, ...]:
    """Children of x whose component set owns at least one context factor."""
    out = []
    for y in t.forest.children_of(x):
        fact = maximal_factorization(f.forest, t.component(y))
        if fact.context_factors():
            out.append(y)
    return tuple(out)


@dataclass(frozen=True)
class NodeReport:
    node: int
    factors: int
    context_children: int
    bound_f: int
    bound_g: int

    @property
    def ok(self) -> bool:
        return self.factors <= self.bound_f and self.context_children <= self.bound_g

    def __str__(self) -> str:
        return (
            f"node {self.node} factors={self.factors} "
            f"context_children={self.context_children} "
            f"bound_f={self.bound_f} bound_g={self.bound_g} ok={self.ok}"
        )


def dealternation_report(t: TreeDecomposition, f: SeparationForest, k: int) -> list[NodeReport]:
    """Per-node factor and context-children counts against f(k) and g(k)."""
    return [
        NodeReport(
            node=x,
            factors=len(maximal_factorization(f.forest, t.component(x))),
            context_children=len(context_children(t, f, x)),
            bound_f=f_bound(k),
            bound_g=g_bound(k),
        )
        for x in t.nodes
    ]
