"""Atomic transduction steps and their evaluation on small structures.

Six step kinds: filtering (partial identity on structures satisfying a
sentence), universe restriction (drop elements failing a one-variable
formula, and tuples touching them), interpretation (recompute relations
by formulas, same universe), copying (k disjoint layers plus `copy` and
`layer_i` bookkeeping; pre-existing bookkeeping names are shadowed),
coloring (one new unary predicate, one output per interpretation), and
renaming (injective relabeling of the vocabulary, dropping the rest).

Pipeline files (.msot) are line-oriented: a `vocab` header then one step
per line; interpretation formulas use the implicit parameters x1..xr.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Union

from ..errors import GuardError, ParseError
from .formulas import (
    Formula,
    check_formula,
    formula_size,
    free_variables,
    all_names,
    parse_formula,
    satisfies,
    write_formula,
)
from .structures import (
    COPY_NAME,
    RelationalStructure,
    check_vocabulary,
    is_reserved_name,
)

COLOR_GUARD = 6
INTERPRET_GUARD = 100_000


@dataclass(frozen=True)
class FilterStep:
    sentence: Formula


@dataclass(frozen=True)
class RestrictStep:
    var: str
    formula: Formula


@dataclass(frozen=True)
class InterpretStep:
    defs: tuple[tuple[str, tuple[str, ...], Formula], ...]  # (name, params, body), sorted

    @staticmethod
    def from_defs(defs: Mapping[str, tuple[tuple[str, ...], Formula]]) -> "InterpretStep":
        return InterpretStep(tuple(sorted(
            (name, tuple(params), body) for name, (params, body) in defs.items()
        )))

    def def_map(self) -> dict[str, tuple[tuple[str, ...], Formula]]:
        return {name: (params, body) for name, params, body in self.defs}


@dataclass(frozen=True)
class CopyStep:
    copies: int


@dataclass(frozen=True)
class ColorStep:
    name: str


@dataclass(frozen=True)
class RenameStep:
    mapping: tuple[tuple[str, str], ...]  # (new, old), sorted by new

    @staticmethod
    def from_map(mapping: Mapping[str, str]) -> "RenameStep":
        return RenameStep(tuple(sorted(mapping.items())))

    def map(self) -> dict[str, str]:
        return dict(self.mapping)


Step = Union[FilterStep, RestrictStep, InterpretStep, CopyStep, ColorStep, RenameStep]

_KINDS = {
    FilterStep: "filter",
    RestrictStep: "restrict",
    InterpretStep: "interpret",
    CopyStep: "copy",
    ColorStep: "color",
    RenameStep: "rename",
}


def step_kind(step: Step) -> str:
    return _KINDS[type(step)]


def step_size(step: Step) -> int:
    """Copying counts its copy number, coloring counts 1, renaming its map
    size, everything else the total size of its formulas."""
    if isinstance(step, FilterStep):
        return formula_size(step.sentence)
    if isinstance(step, RestrictStep):
        return formula_size(step.formula)
    if isinstance(step, InterpretStep):
        return sum(formula_size(body) for _, _, body in step.defs)
    if isinstance(step, CopyStep):
        return step.copies
    if isinstance(step, ColorStep):
        return 1
    if isinstance(step, RenameStep):
        return len(step.mapping)
    raise TypeError(f"not a step: {step!r}")


def step_output_vocab(step: Step, vocab: Mapping[str, int]) -> dict[str, int]:
    if isinstance(step, (FilterStep, RestrictStep)):
        return dict(vocab)
    if isinstance(step, InterpretStep):
        return {name: len(params) for name, params, _ in step.defs}
    if isinstance(step, CopyStep):
        out = dict(vocab)
        out[COPY_NAME] = 2
        for i in range(1, step.copies + 1):
            out[f"layer_{i}"] = 1
        return out
    if isinstance(step, ColorStep):
        out = dict(vocab)
        out[step.name] = 1
        return out
    if isinstance(step, RenameStep):
        return {new: vocab[old] for new, old in step.mapping}
    raise TypeError(f"not a step: {step!r}")


def validate_step(step: Step, vocab: Mapping[str, int]) -> None:
    if isinstance(step, FilterStep):
        check_formula(step.sentence, vocab)
    elif isinstance(step, RestrictStep):
        if not step.var or step.var[0].isupper():
            raise ValueError("restriction variable must be first-order")
        check_formula(step.formula, vocab, free_fo=(step.var,))
    elif isinstance(step, InterpretStep):
        names = [name for name, _, _ in step.defs]
        if len(set(names)) != len(names):
            raise ValueError("duplicate relation in interpretation")
        for name, params, body in step.defs:
            if len(set(params)) != len(params):
                raise ValueError(f"duplicate parameters for {name!r}")
            check_formula(body, vocab, free_fo=params)
    elif isinstance(step, CopyStep):
        if step.copies < 1:
            raise ValueError("copying needs at least one copy")
    elif isinstance(step, ColorStep):
        if step.name in vocab:
            raise ValueError(f"color name {step.name!r} already in the vocabulary")
        if is_reserved_name(step.name):
            raise ValueError(f"color name {step.name!r} is reserved for copying")
    elif isinstance(step, RenameStep):
        olds = [old for _, old in step.mapping]
        if len(set(olds)) != len(olds):
            raise ValueError("renaming must be injective")
        for new, old in step.mapping:
            if old not in vocab:
                raise ValueError(f"renaming of unknown relation {old!r}")
    else:
        raise TypeError(f"not a step: {step!r}")


@dataclass(frozen=True)
class TransductionPipeline:
    input_vocab: tuple[tuple[str, int], ...]  # sorted (name, arity)
    steps: tuple[Step, ...]

    @staticmethod
    def make(vocab: Mapping[str, int], steps: Iterable[Step]) -> "TransductionPipeline":
        check_vocabulary(vocab)
        p = TransductionPipeline(tuple(sorted(vocab.items())), tuple(steps))
        p.validate()
        return p

    def vocab_map(self) -> dict[str, int]:
        return dict(self.input_vocab)

    def vocab_chain(self) -> list[dict[str, int]]:
        """Vocabulary before each step, plus the final output vocabulary."""
        chain = [self.vocab_map()]
        for step in self.steps:
            chain.append(step_output_vocab(step, chain[-1]))
        return chain

    def output_vocab(self) -> dict[str, int]:
        return self.vocab_chain()[-1]

    def validate(self) -> None:
        for name in self.vocab_map():
            if is_reserved_name(name):
                raise ValueError(f"input vocabulary may not use reserved name {name!r}")
        vocab = self.vocab_map()
        for step in self.steps:
            validate_step(step, vocab)
            vocab = step_output_vocab(step, vocab)


def pipeline_size(p: TransductionPipeline) -> int:
    return sum(step_size(s) for s in p.steps)


def evaluate_step(step: Step, a: RelationalStructure) -> list[RelationalStructure]:
    vocab = a.vocab_map()
    validate_step(step, vocab)
    universe = a.universe
    if isinstance(step, FilterStep):
        return [a] if satisfies(a, step.sentence) else []
    if isinstance(step, RestrictStep):
        keep = [e for e in universe if satisfies(a, step.formula, {step.var: e})]
        keep_set = set(keep)
        rels = {name: [t for t in rel if set(t) <= keep_set]
                for name, rel in a.relations}
        return [RelationalStructure.make(vocab, keep, rels)]
    if isinstance(step, InterpretStep):
        out_vocab = step_output_vocab(step, vocab)
        rels = {}
        for name, params, body in step.defs:
            if len(universe) ** len(params) > INTERPRET_GUARD:
                raise GuardError(f"interpreting {name!r} enumerates too many tuples")
            rels[name] = [
                t for t in product(universe, repeat=len(params))
                if satisfies(a, body, dict(zip(params, t)))
            ]
        return [RelationalStructure.make(out_vocab, universe, rels)]
    if isinstance(step, CopyStep):
        k = step.copies
        out_vocab = step_output_vocab(step, vocab)
        new_universe = [(e, i) for e in universe for i in range(1, k + 1)]
        shadowed = {COPY_NAME} | {f"layer_{i}" for i in range(1, k + 1)}
        rels: dict[str, list[tuple]] = {}
        for name, rel in a.relations:
            if name in shadowed:
                continue  # bookkeeping redefined by this copy
            arity = vocab[name]
            rels[name] = [
                tuple((e, i) for e, i in zip(t, layers))
                for t in rel
                for layers in product(range(1, k + 1), repeat=arity)
            ]
        rels[COPY_NAME] = [((e, i), (e, j)) for e in universe
                           for i in range(1, k + 1) for j in range(1, k + 1)]
        for i in range(1, k + 1):
            rels[f"layer_{i}"] = [((e, i),) for e in universe]
        for name in out_vocab:
            rels.setdefault(name, [])
        return [RelationalStructure.make(out_vocab, new_universe, rels)]
    if isinstance(step, ColorStep):
        if len(universe) > COLOR_GUARD:
            raise GuardError(
                f"coloring branches over 2^{len(universe)} subsets; guard is {COLOR_GUARD}")
        out_vocab = step_output_vocab(step, vocab)
        outs = []
        base = {name: rel for name, rel in a.relations}
        for mask in range(1 << len(universe)):
            chosen = [(universe[i],) for i in range(len(universe)) if mask >> i & 1]
            rels = dict(base)
            rels[step.name] = chosen
            outs.append(RelationalStructure.make(out_vocab, universe, rels))
        return outs
    if isinstance(step, RenameStep):
        out_vocab = step_output_vocab(step, vocab)
        rel_map = a.relation_map()
        rels = {new: rel_map[old] for new, old in step.mapping}
        return [RelationalStructure.make(out_vocab, universe, rels)]
    raise TypeError(f"not a step: {step!r}")


def evaluate_pipeline(p: TransductionPipeline, a: RelationalStructure,
                      max_intermediate: int = 4096) -> list[RelationalStructure]:
    """All outputs of the pipeline on a structure, deduplicated exactly and
    deterministically ordered."""
    if a.vocab_map() != p.vocab_map():
        raise ValueError("structure does not match the pipeline's input vocabulary")
    current = [a]
    for step in p.steps:
        nxt: list[RelationalStructure] = []
        seen = set()
        for s in current:
            for out in evaluate_step(step, s):
                if out not in seen:
                    seen.add(out)
                    nxt.append(out)
            if len(nxt) > max_intermediate:
                raise GuardError(
                    f"pipeline evaluation exceeded {max_intermediate} intermediate outputs")
        current = nxt
    return sorted(current, key=lambda s: (len(s.universe), repr(s)))


# -- .msot text format -------------------------------------------------------

def _fmt_vocab(vocab: Mapping[str, int]) -> str:
    return " ".join(f"{name}/{arity}" for name, arity in sorted(vocab.items()))


def _parse_vocab_tokens(tokens: list[str], lineno: int) -> dict[str, int]:
    vocab = {}
    for tok in tokens:
        name, sep, arity = tok.partition("/")
        if not sep or not arity.isdigit() or not name:
            raise ParseError(f"bad vocabulary entry {tok!r}", lineno)
        if name in vocab:
            raise ParseError(f"duplicate relation {name!r}", lineno)
        vocab[name] = int(arity)
    return vocab


def write_pipeline(p: TransductionPipeline) -> str:
    lines = [f"vocab {_fmt_vocab(p.vocab_map())}".rstrip()]
    for step in p.steps:
        if isinstance(step, FilterStep):
            lines.append(f"filter {write_formula(step.sentence)}")
        elif isinstance(step, RestrictStep):
            lines.append(f"restrict {step.var} {write_formula(step.formula)}")
        elif isinstance(step, InterpretStep):
            parts = []
            for name, params, body in step.defs:
                parts.append(f"{name}/{len(params)}={write_formula(body)}")
            lines.append("interpret " + " ".join(parts))
        elif isinstance(step, CopyStep):
            lines.append(f"copy {step.copies}")
        elif isinstance(step, ColorStep):
            lines.append(f"color {step.name}")
        elif isinstance(step, RenameStep):
            pairs = " ".join(f"{new}={old}" for new, old in step.mapping)
            lines.append(f"rename {pairs}")
        else:
            raise TypeError(f"not a step: {step!r}")
    return "\n".join(lines) + "\n"


def _split_balanced(text: str, lineno: int) -> list[str]:
    """Split 'name/arity=<sexpr>' groups on whitespace outside parentheses."""
    groups = []
    depth = 0
    cur: list[str] = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced parentheses", lineno)
        if ch.isspace() and depth == 0:
            if cur:
                groups.append("".join(cur))
                cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise ParseError("unbalanced parentheses", lineno)
    if cur:
        groups.append("".join(cur))
    return groups


def parse_pipeline(text: str) -> TransductionPipeline:
    vocab = None
    steps: list[Step] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if vocab is None:
            if head != "vocab":
                raise ParseError("expected a 'vocab <name/arity ...>' header", lineno)
            vocab = _parse_vocab_tokens(rest.split(), lineno)
            continue
        try:
            if head == "filter":
                steps.append(FilterStep(parse_formula(rest)))
            elif head == "restrict":
                var, _, body = rest.partition(" ")
                if not var or not body.strip():
                    raise ParseError("expected 'restrict <var> <formula>'", lineno)
                steps.append(RestrictStep(var, parse_formula(body)))
            elif head == "interpret":
                defs = {}
                for group in _split_balanced(rest, lineno):
                    sig, sep, body = group.partition("=")
                    name, slash, arity = sig.partition("/")
                    if not sep or not slash or not arity.isdigit():
                        raise ParseError(f"bad interpretation entry {group[:30]!r}", lineno)
                    params = tuple(f"x{i}" for i in range(1, int(arity) + 1))
                    defs[name] = (params, parse_formula(body))
                steps.append(InterpretStep.from_defs(defs))
            elif head == "copy":
                steps.append(CopyStep(int(rest)))
            elif head == "color":
                if not rest or " " in rest:
                    raise ParseError("expected 'color <name>'", lineno)
                steps.append(ColorStep(rest))
            elif head == "rename":
                mapping = {}
                for pair in rest.split():
                    new, sep, old = pair.partition("=")
                    if not sep or not new or not old:
                        raise ParseError(f"bad rename pair {pair!r}", lineno)
                    if new in mapping:
                        raise ParseError(f"duplicate rename target {new!r}", lineno)
                    mapping[new] = old
                steps.append(RenameStep.from_map(mapping))
            else:
                raise ParseError(f"unknown step kind {head!r}", lineno)
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno)
    if vocab is None:
        raise ParseError("missing 'vocab' header")
    try:
        return TransductionPipeline.make(vocab, steps)
    except ValueError as exc:
        raise ParseError(f"inconsistent pipeline: {exc}")


def collect_pipeline_names(p: TransductionPipeline) -> frozenset[str]:
    """Every relation and variable name in the pipeline, for freshness."""
    names = {name for name, _ in p.input_vocab}
    for step in p.steps:
        if isinstance(step, FilterStep):
            names |= all_names(step.sentence)
        elif isinstance(step, RestrictStep):
            names |= all_names(step.formula) | {step.var}
        elif isinstance(step, InterpretStep):
            for name, params, body in step.defs:
                names |= all_names(body) | set(params) | {name}
        elif isinstance(step, ColorStep):
            names.add(step.name)
        elif isinstance(step, RenameStep):
            for new, old in step.mapping:
                names |= {new, old}
    return frozenset(names)
