"""Semantic comparison of two pipelines on random small structures."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from ..errors import GuardError
from .pipeline import TransductionPipeline, evaluate_pipeline
from .structures import (
    ISO_GUARD,
    RelationalStructure,
    canonical_key,
    random_structure,
)


@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    trials_run: int
    counterexample: Optional[RelationalStructure] = None
    detail: str = ""

    def __str__(self) -> str:
        if self.equivalent:
            return f"equivalent on {self.trials_run} trials"
        return f"counterexample after {self.trials_run} trials: {self.detail}"


def _output_keys(outs: list[RelationalStructure]) -> frozenset:
    keys = []
    for s in outs:
        if len(s.universe) <= ISO_GUARD:
            keys.append(("canon", canonical_key(s)))
        else:
            # Above the isomorphism guard we fall back to exact identity;
            # the rewrite rules preserve element names except across merged
            # copy steps, which the callers keep below the guard.
            keys.append(("exact", s))
    return frozenset(keys)


def check_equivalence(p1: TransductionPipeline, p2: TransductionPipeline,
                      trials: int = 100, universe_max: int = 4,
                      seed: int = 0,
                      max_intermediate: int = 4096) -> EquivalenceReport:
    """Compare output sets (up to isomorphism, gated) on seeded random
    structures over the shared input vocabulary."""
    if p1.vocab_map() != p2.vocab_map():
        raise ValueError("pipelines have different input vocabularies")
    rng = random.Random(seed)
    vocab = p1.vocab_map()
    for trial in range(1, trials + 1):
        size = rng.randint(0, universe_max)
        a = random_structure(rng, vocab, size)
        out1 = evaluate_pipeline(p1, a, max_intermediate=max_intermediate)
        out2 = evaluate_pipeline(p2, a, max_intermediate=max_intermediate)
        if _output_keys(out1) != _output_keys(out2):
            return EquivalenceReport(
                equivalent=False,
                trials_run=trial,
                counterexample=a,
                detail=f"input {a!r} yields {len(out1)} vs {len(out2)} outputs "
                       f"(or differing structures)",
            )
    return EquivalenceReport(equivalent=True, trials_run=trials)
