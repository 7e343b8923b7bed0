"""Forest and context factors, and maximal factorizations of node subsets.

A forest factor is a nonempty union of subtrees whose roots are siblings
(nodes sharing a parent, or all forest roots); a tree factor is the
one-root special case and is represented as a forest factor.  A context
factor is a subtree minus a forest factor strictly below its root; the
removed subtrees' roots are the appendices, and they always share a parent
that stays inside the factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .core import RootedForest

FOREST = "forest"
CONTEXT = "context"


@dataclass(frozen=True)
class Factor:
    kind: str
    nodes: frozenset[int]
    roots: tuple[int, ...]             # context factors have exactly one root
    appendices: tuple[int, ...] = ()   # empty for forest factors

    @property
    def root(self) -> int:
        if self.kind != CONTEXT:
            raise ValueError("only context factors have a single distinguished root")
        return self.roots[0]

    def describe(self) -> str:
        rts = ",".join(str(r) for r in self.roots)
        nds = ",".join(str(x) for x in sorted(self.nodes))
        if self.kind == CONTEXT:
            apps = ",".join(str(a) for a in self.appendices)
            return f"context roots=[{rts}] appendices=[{apps}] nodes=[{nds}]"
        return f"forest roots=[{rts}] appendices=[] nodes=[{nds}]"

    def __str__(self) -> str:
        return self.describe()


@dataclass(frozen=True)
class Factorization:
    subject: frozenset[int]
    factors: tuple[Factor, ...]

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def forest_factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind == FOREST)

    def context_factors(self) -> tuple[Factor, ...]:
        return tuple(f for f in self.factors if f.kind == CONTEXT)

    def factor_of(self, node: int) -> Factor:
        for f in self.factors:
            if node in f.nodes:
                return f
        raise ValueError(f"node {node} is not in the subject set")


def is_factor(forest: RootedForest, nodes: Iterable[int]) -> Optional[Factor]:
    """Classify a node set as a factor, or return None.

    Tree factors are reported as forest factors with one root.
    """
    ns = frozenset(nodes)
    if not ns:
        return None
    for x in ns:
        if not (1 <= x <= forest.node_count):
            raise ValueError(f"node {x} not in forest")
    tops = sorted(x for x in ns if forest.parent[x - 1] not in ns)

    # Forest factor: tops pairwise siblings and the set is descendant-closed.
    first_parent = forest.parent[tops[0] - 1]
    descendant_closed = all(c in ns for x in ns for c in forest.children_of(x))
    if descendant_closed and all(forest.parent[x - 1] == first_parent for x in tops):
        return Factor(FOREST, ns, tuple(tops))

    if len(tops) != 1:
        return None
    r = tops[0]
    missing = forest.descendants(r) - ns
    if not missing:
        return None  # descendant-closed single-top sets were handled above
    # Context factor: the missing part must be a forest factor whose roots
    # share one parent inside the candidate set.
    mtops = sorted(x for x in missing if forest.parent[x - 1] not in missing)
    app_parent = forest.parent[mtops[0] - 1]
    if app_parent not in ns:
        return None
    if any(forest.parent[x - 1] != app_parent for x in mtops):
        return None
    if any(c not in missing for x in missing for c in forest.children_of(x)):
        return None
    return Factor(CONTEXT, ns, (r,), tuple(mtops))


def union_factors(forest: RootedForest, f1: Factor, f2: Factor) -> Factor:
    """Union of two intersecting factors, classified as a factor."""
    if not (f1.nodes & f2.nodes):
        raise ValueError("factors are disjoint")
    merged = is_factor(forest, f1.nodes | f2.nodes)
    if merged is None:
        raise AssertionError("union of intersecting factors must be a factor")
    return merged


def _sort_key(f: Factor) -> tuple:
    return (min(f.nodes), len(f.nodes))


def maximal_factorization(forest: RootedForest, subject: Iterable[int]) -> Factorization:
    """Partition a node set into its maximal factors.

    Seeds every node as a singleton factor, then merges any two cells whose
    union is again a factor, to a fixpoint.  The fixpoint is the coarsest
    factorization; the brute-force enumerator in twkit.oracle backs this up
    in the tests.
    """
    subject = frozenset(subject)
    cells: list[frozenset[int]] = [frozenset([x]) for x in sorted(subject)]
    changed = True
    while changed:
        changed = False
        n_cells = len(cells)
        for i in range(n_cells):
            if changed:
                break
            for j in range(i + 1, n_cells):
                union = cells[i] | cells[j]
                if is_factor(forest, union) is not None:
                    cells[i] = union
                    del cells[j]
                    changed = True
                    break
    factors = []
    for cell in cells:
        f = is_factor(forest, cell)
        assert f is not None
        factors.append(f)
    factors.sort(key=_sort_key)
    return Factorization(subject, tuple(factors))


@dataclass(frozen=True)
class ComplementBoundReport:
    """Counts of fact(U) against the bounds driven by the complement side."""

    forest_factor_count: int
    context_factor_count: int
    complement_factor_count: int   # k = |fact(W)| for W the complement of U
    complement_size: int           # |W|
    bounds_hold: bool

    @staticmethod
    def forest_bound(k: int) -> int:
        return k + 1

    @staticmethod
    def context_bound(k: int) -> int:
        return max(2 * k - 1, 0)


def complement_bounds_check(forest: RootedForest, subject: Iterable[int]) -> ComplementBoundReport:
    """Check fact(U) against both complement-driven bounds.

    With k the number of maximal factors of the complement W: at most k+1
    forest factors and at most 2k-1 context factors.  With the raw size
    |W|: at most |W|+1 forest factors and at most 2|W|-1 context factors.
    The context bounds are floored at zero, which is the only consistent
    reading when the complement is empty.
    """
    subject = frozenset(subject)
    complement = frozenset(forest.nodes) - subject
    fact_u = maximal_factorization(forest, subject)
    k = len(maximal_factorization(forest, complement))
    nf = len(fact_u.forest_factors())
    nc = len(fact_u.context_factors())
    holds = (
        nf <= ComplementBoundReport.forest_bound(k)
        and nc <= ComplementBoundReport.context_bound(k)
        and nf <= ComplementBoundReport.forest_bound(len(complement))
        and nc <= ComplementBoundReport.context_bound(len(complement))
    )
    return ComplementBoundReport(nf, nc, k, len(complement), holds)


@dataclass(frozen=True)
class RemovalBoundReport:
    factors_before: int   # |fact(U)|
    factors_after: int    # |fact(U')|
    removed: int          # |U - U'|
    bounds_hold: bool


def removal_bound_check(forest: RootedForest, subject: Iterable[int],
                        sub_subject: Iterable[int]) -> RemovalBoundReport:
    """Check |fact(U')| <= 9*|fact(U)| + 3*|U - U'| for U' a subset of U."""
    u = frozenset(subject)
    u2 = frozenset(sub_subject)
    if not u2 <= u:
        raise ValueError("second set must be a subset of the first")
    before = len(maximal_factorization(forest, u))
    after = len(maximal_factorization(forest, u2))
    removed = len(u - u2)
    return RemovalBoundReport(before, after, removed, after <= 9 * before + 3 * removed)
