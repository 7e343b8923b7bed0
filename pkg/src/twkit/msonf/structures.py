"""Finite relational structures with small-universe isomorphism tools.

Universe elements are ints or nested (element, layer) tuples produced by
copying steps.  Structures are immutable and hashable; equality is exact
(same element names), and isomorphism checking is brute-force permutation
search gated to 5 elements.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import permutations, product
from typing import Iterable, Mapping

from ..errors import GuardError

ISO_GUARD = 5

RESERVED_PREFIX = "layer_"
COPY_NAME = "copy"


def is_reserved_name(name: str) -> bool:
    if name == COPY_NAME:
        return True
    return name.startswith(RESERVED_PREFIX) and name[len(RESERVED_PREFIX):].isdigit()


def element_key(e) -> tuple:
    if isinstance(e, tuple):
        return (1, tuple(element_key(part) for part in e))
    return (0, repr(e))


def check_vocabulary(vocab: Mapping[str, int]) -> None:
    for name, arity in vocab.items():
        if not isinstance(name, str) or not name:
            raise ValueError(f"bad relation name {name!r}")
        if not isinstance(arity, int) or arity < 0:
            raise ValueError(f"relation {name!r} has bad arity {arity!r}")


@dataclass(frozen=True)
class RelationalStructure:
    vocabulary: tuple[tuple[str, int], ...]         # sorted (name, arity)
    universe: tuple                                  # sorted by element_key
    relations: tuple[tuple[str, frozenset], ...]     # sorted by name

    @staticmethod
    def make(vocab: Mapping[str, int], universe: Iterable,
             relations: Mapping[str, Iterable[tuple]]) -> "RelationalStructure":
        check_vocabulary(vocab)
        uni = tuple(sorted(universe, key=element_key))
        if len(set(uni)) != len(uni):
            raise ValueError("duplicate universe elements")
        elems = set(uni)
        rels = {}
        for name, arity in vocab.items():
            tuples = frozenset(tuple(t) for t in relations.get(name, ()))
            for t in tuples:
                if len(t) != arity:
                    raise ValueError(f"tuple {t!r} has wrong arity for {name!r}")
                if not set(t) <= elems:
                    raise ValueError(f"tuple {t!r} leaves the universe")
            rels[name] = tuples
        extra = set(relations) - set(vocab)
        if extra:
            raise ValueError(f"relations not in the vocabulary: {sorted(extra)}")
        return RelationalStructure(
            tuple(sorted(vocab.items())),
            uni,
            tuple(sorted(rels.items())),
        )

    def vocab_map(self) -> dict[str, int]:
        return dict(self.vocabulary)

    def relation_map(self) -> dict[str, frozenset]:
        return dict(self.relations)

    def relation(self, name: str) -> frozenset:
        for n, r in self.relations:
            if n == name:
                return r
        raise KeyError(name)


def structure_size(a: RelationalStructure) -> int:
    """|universe| plus the arity-weighted total of relation tuples."""
    arity = a.vocab_map()
    return len(a.universe) + sum(arity[n] * len(r) for n, r in a.relations)


def _encode(a: RelationalStructure, relabel: Mapping) -> tuple:
    return tuple(
        (name, tuple(sorted(tuple(relabel[e] for e in t) for t in rel)))
        for name, rel in a.relations
    )


def canonical_key(a: RelationalStructure) -> tuple:
    """Isomorphism-invariant key via brute-force permutation search."""
    n = len(a.universe)
    if n > ISO_GUARD:
        raise GuardError(f"isomorphism search guarded at {ISO_GUARD} elements, got {n}")
    best = None
    for perm in permutations(range(n)):
        relabel = {e: perm[i] for i, e in enumerate(a.universe)}
        enc = _encode(a, relabel)
        if best is None or enc < best:
            best = enc
    return (a.vocabulary, n, best)


def isomorphic(a: RelationalStructure, b: RelationalStructure) -> bool:
    if a.vocabulary != b.vocabulary or len(a.universe) != len(b.universe):
        return False
    if a == b:
        return True
    return canonical_key(a) == canonical_key(b)


def relabeled(a: RelationalStructure, mapping: Mapping) -> RelationalStructure:
    """Apply an explicit element bijection (a test oracle for isomorphism)."""
    vocab = a.vocab_map()
    return RelationalStructure.make(
        vocab,
        [mapping[e] for e in a.universe],
        {name: [tuple(mapping[e] for e in t) for t in rel] for name, rel in a.relations},
    )


def random_structure(rng: random.Random, vocab: Mapping[str, int], size: int,
                     density: float = 0.5) -> RelationalStructure:
    universe = list(range(1, size + 1))
    relations = {}
    for name, arity in sorted(vocab.items()):
        tuples = [t for t in product(universe, repeat=arity) if rng.random() < density]
        relations[name] = tuples
    return RelationalStructure.make(vocab, universe, relations)
