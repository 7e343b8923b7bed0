"""Rewriting transduction pipelines into the six-stage normal form.

Execution order of the normal shape: colorings first, then at most one
filtering, one copying, one interpretation, one universe restriction, and
one renaming.  The driver runs the classic phases: renamings bubble to
the tail, then restrictions, then interpretations, then copyings, and
finally filters sort against colorings; same-kind neighbors merge along
the way.  Each phase strictly shrinks a counting measure, so the driver
terminates.

Two constructions deviate from the obvious one-liners because those would
not preserve semantics:

* pushing a filter left over a copying step needs a genuine backwards
  translation (first-order quantifiers case-split over layers, set
  quantifiers split into one set per layer, bookkeeping atoms resolve to
  equalities and layer constants);
* merging two copying steps multiplies the copy counts but must repair
  the bookkeeping with a follow-up interpretation, since the composed
  pipeline's `copy` relation links copies of the same intermediate
  element, not of the same base element.

A few corners where an earlier copy's bookkeeping is read across a later
copy are not expressible by local swaps at all; those raise GuardError.
"""

from __future__ import annotations

from typing import Mapping

from ..errors import GuardError
from .formulas import (
    And,
    Const,
    Eq,
    Exists,
    FALSE,
    Forall,
    Formula,
    Implies,
    Mem,
    NameSource,
    Not,
    Or,
    Rel,
    TRUE,
    conj,
    disj,
    free_variables,
    instantiate,
    is_set_var,
    refresh_bound,
    relativize,
    rename_free,
    substitute_atoms,
)
from .pipeline import (
    ColorStep,
    CopyStep,
    FilterStep,
    InterpretStep,
    RenameStep,
    RestrictStep,
    Step,
    TransductionPipeline,
    collect_pipeline_names,
    step_kind,
    step_output_vocab,
)
from .structures import COPY_NAME

ZONE = {"color": 0, "filter": 1, "copy": 2, "interpret": 3, "restrict": 4, "rename": 5}

_MAX_ITERATIONS = 100_000


def is_normal_shape(p: TransductionPipeline) -> bool:
    kinds = [step_kind(s) for s in p.steps]
    zones = [ZONE[k] for k in kinds]
    if any(a > b for a, b in zip(zones, zones[1:])):
        return False
    return all(kinds.count(k) <= 1 for k in ("filter", "copy", "interpret", "restrict", "rename"))


def _atoms_read(f: Formula) -> set[str]:
    out: set[str] = set()

    def walk(g: Formula):
        if isinstance(g, Rel):
            out.add(g.name)
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for part in g.parts:
                walk(part)
        elif isinstance(g, Implies):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body)

    walk(f)
    return out


def _step_formulas(step: Step) -> list[Formula]:
    if isinstance(step, FilterStep):
        return [step.sentence]
    if isinstance(step, RestrictStep):
        return [step.formula]
    if isinstance(step, InterpretStep):
        return [body for _, _, body in step.defs]
    return []


def _shadowed_names(k: int) -> set[str]:
    return {COPY_NAME} | {f"layer_{i}" for i in range(1, k + 1)}


def _identity_defs(vocab: Mapping[str, int]) -> dict[str, tuple[tuple[str, ...], Formula]]:
    defs = {}
    for name, arity in sorted(vocab.items()):
        params = tuple(f"x{i}" for i in range(1, arity + 1))
        defs[name] = (params, Rel(name, params))
    return defs


def _guard_from(formula: Formula, var: str, names: NameSource):
    """Guard factory phi(.) for relativization, capture-avoiding."""

    def guard(v: str) -> Formula:
        return instantiate(formula, (var,), (v,), names)

    return guard


# -- merging -----------------------------------------------------------------

def merge_steps(s1: Step, s2: Step, vocab: Mapping[str, int],
                names: NameSource) -> list[Step] | None:
    """Merge two adjacent same-kind steps (s1 executed first); colorings
    never merge.  Copy merging emits a bookkeeping-repair interpretation."""
    k1, k2 = step_kind(s1), step_kind(s2)
    if k1 != k2 or k1 == "color":
        return None
    if isinstance(s1, RenameStep) and isinstance(s2, RenameStep):
        m1 = s1.map()
        return [RenameStep.from_map({new: m1[old] for new, old in s2.mapping})]
    if isinstance(s1, FilterStep) and isinstance(s2, FilterStep):
        return [FilterStep(And((s1.sentence, s2.sentence)))]
    if isinstance(s1, RestrictStep) and isinstance(s2, RestrictStep):
        guard = _guard_from(s1.formula, s1.var, names)
        inner = instantiate(s2.formula, (s2.var,), (s1.var,), names)
        merged = And((s1.formula, relativize(inner, guard, names)))
        return [RestrictStep(s1.var, merged)]
    if isinstance(s1, InterpretStep) and isinstance(s2, InterpretStep):
        d1 = s1.def_map()
        new_defs = {}
        for name, params, body in s2.defs:
            new_defs[name] = (params, substitute_atoms(body, d1, names))
        return [InterpretStep.from_defs(new_defs)]
    if isinstance(s1, CopyStep) and isinstance(s2, CopyStep):
        return _merge_copies(s1, s2, vocab)
    raise AssertionError(f"unhandled merge of kind {k1}")


def _merge_copies(s1: CopyStep, s2: CopyStep, vocab: Mapping[str, int]) -> list[Step]:
    ka, kb = s1.copies, s2.copies
    merged = CopyStep(ka * kb)
    deep = {f"layer_{j}" for j in range(max(ka, kb) + 1, ka * kb + 1)}
    if deep & set(vocab):
        raise GuardError(
            "merging copy steps would erase pre-existing deep layer relations")

    def band(z: str, a: int) -> Formula:
        return disj(Rel(f"layer_{(a - 1) * kb + i}", (z,)) for i in range(1, kb + 1))

    target = step_output_vocab(s2, step_output_vocab(s1, vocab))
    defs: dict[str, tuple[tuple[str, ...], Formula]] = {}
    for name, arity in sorted(target.items()):
        params = tuple(f"x{i}" for i in range(1, arity + 1))
        if name == COPY_NAME:
            same_band = disj(And((band("x1", a), band("x2", a))) for a in range(1, ka + 1))
            defs[name] = (params, And((Rel(COPY_NAME, params), same_band)))
        elif name.startswith("layer_") and name[6:].isdigit():
            j = int(name[6:])
            if j <= kb:
                defs[name] = (params, disj(
                    Rel(f"layer_{(a - 1) * kb + j}", params) for a in range(1, ka + 1)))
            else:  # kb < j <= ka: the first copy's layer, copied through
                defs[name] = (params, band("x1", j))
        else:
            defs[name] = (params, Rel(name, params))
    return [merged, InterpretStep.from_defs(defs)]


# -- swapping ----------------------------------------------------------------

def swap_rename(s1: RenameStep, s2: Step, vocab: Mapping[str, int],
                names: NameSource) -> list[Step]:
    """[rename, other] -> [other', rename'] (or a single interpretation)."""
    m = s1.map()
    if isinstance(s2, InterpretStep):
        defs = {}
        for name, params, body in s2.defs:
            defs[name] = (params, _rename_atoms(body, m))
        return [InterpretStep.from_defs(defs)]
    if isinstance(s2, FilterStep):
        return [FilterStep(_rename_atoms(s2.sentence, m)), s1]
    if isinstance(s2, RestrictStep):
        return [RestrictStep(s2.var, _rename_atoms(s2.formula, m)), s1]
    if isinstance(s2, ColorStep):
        if s2.name in vocab:
            fresh = names.fresh_rel(s2.name)
            m2 = dict(m)
            m2[s2.name] = fresh
            return [ColorStep(fresh), RenameStep.from_map(m2)]
        m2 = dict(m)
        m2[s2.name] = s2.name
        return [ColorStep(s2.name), RenameStep.from_map(m2)]
    if isinstance(s2, CopyStep):
        shadowed = _shadowed_names(s2.copies)
        if shadowed & set(m.values()):
            raise GuardError(
                "renaming reads copy bookkeeping that a later copy step shadows")
        m2 = {new: old for new, old in m.items() if new not in shadowed}
        for name in sorted(shadowed):
            m2[name] = name
        return [s2, RenameStep.from_map(m2)]
    raise AssertionError(f"cannot swap rename with {step_kind(s2)}")


def _rename_atoms(f: Formula, mapping: Mapping[str, str]) -> Formula:
    if isinstance(f, Rel):
        return Rel(mapping.get(f.name, f.name), f.args)
    if isinstance(f, (Const, Eq, Mem)):
        return f
    if isinstance(f, Not):
        return Not(_rename_atoms(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(_rename_atoms(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_rename_atoms(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_rename_atoms(f.left, mapping), _rename_atoms(f.right, mapping))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.var, _rename_atoms(f.body, mapping))
    raise TypeError(f"not a formula: {f!r}")


def swap_restrict(s1: RestrictStep, s2: Step, vocab: Mapping[str, int],
                  names: NameSource) -> list[Step]:
    """[restrict, other] -> [other', restrict', (rename)] moving the
    restriction toward the tail."""
    phi, u = s1.formula, s1.var
    guard = _guard_from(phi, u, names)
    if isinstance(s2, ColorStep):
        return [s2, s1]
    if isinstance(s2, FilterStep):
        return [FilterStep(relativize(s2.sentence, guard, names)), s1]
    if isinstance(s2, CopyStep):
        if _atoms_read(phi) & _shadowed_names(s2.copies):
            raise GuardError(
                "restriction reads copy bookkeeping that a later copy step shadows")
        z = names.fresh_var()
        layer_guard = _guard_from(Rel("layer_1", ("x1",)), "x1", names)
        inner = relativize(instantiate(phi, (u,), (z,), names), layer_guard, names)
        phi2 = Exists(z, conj((
            Rel(COPY_NAME, (u, z)),
            Rel("layer_1", (z,)),
            inner,
        )))
        return [s2, RestrictStep(u, phi2)]
    if isinstance(s2, InterpretStep):
        defs = _identity_defs(vocab)
        rename_map = {}
        for name, params, body in s2.defs:
            fresh = names.fresh_rel(name)
            guarded = conj(tuple(guard(p) for p in params)
                           + (relativize(body, guard, names),))
            defs[fresh] = (params, guarded)
            rename_map[name] = fresh
        return [InterpretStep.from_defs(defs), s1, RenameStep.from_map(rename_map)]
    raise AssertionError(f"cannot swap restrict with {step_kind(s2)}")


def swap_interpret(s1: InterpretStep, s2: Step, vocab: Mapping[str, int],
                   names: NameSource) -> list[Step]:
    """[interpret, other] -> [other', interpret'] for coloring, filtering,
    and copying."""
    d1 = s1.def_map()
    if isinstance(s2, ColorStep):
        color_name = s2.name if s2.name not in vocab else names.fresh_rel(s2.name)
        defs = {name: (params, body) for name, params, body in s1.defs}
        defs[s2.name] = (("x1",), Rel(color_name, ("x1",)))
        return [ColorStep(color_name), InterpretStep.from_defs(defs)]
    if isinstance(s2, FilterStep):
        return [FilterStep(substitute_atoms(s2.sentence, d1, names)), s1]
    if isinstance(s2, CopyStep):
        shadowed = _shadowed_names(s2.copies)
        reads: set[str] = set()
        for body in _step_formulas(s1):
            reads |= _atoms_read(body)
        if reads & shadowed & set(vocab):
            raise GuardError(
                "interpretation reads copy bookkeeping that a later copy step shadows")
        defs: dict[str, tuple[tuple[str, ...], Formula]] = {}
        layer_guard = _guard_from(Rel("layer_1", ("x1",)), "x1", names)
        for name, params, body in s1.defs:
            primes = tuple(names.fresh_var() for _ in params)
            lifted = relativize(
                rename_free(refresh_bound(body, names), dict(zip(params, primes))),
                layer_guard, names)
            links = [
                And((Rel(COPY_NAME, (p, pr)), Rel("layer_1", (pr,))))
                for p, pr in zip(params, primes)
            ]
            inner: Formula = conj(tuple(links) + (lifted,))
            for pr in reversed(primes):
                inner = Exists(pr, inner)
            defs[name] = (params, inner)
        defs[COPY_NAME] = (("x1", "x2"), Rel(COPY_NAME, ("x1", "x2")))
        for i in range(1, s2.copies + 1):
            defs[f"layer_{i}"] = (("x1",), Rel(f"layer_{i}", ("x1",)))
        return [s2, InterpretStep.from_defs(defs)]
    raise AssertionError(f"cannot swap interpret with {step_kind(s2)}")


def swap_copy(s1: CopyStep, s2: Step, vocab: Mapping[str, int],
              names: NameSource) -> list[Step]:
    """[copy, filter] -> [filter', copy]; [copy, color] -> [colors..., copy,
    interpret]."""
    k = s1.copies
    if isinstance(s2, FilterStep):
        return [FilterStep(translate_after_copy(s2.sentence, k, vocab, names)), s1]
    if isinstance(s2, ColorStep):
        color_names = []
        for i in range(1, k + 1):
            color_names.append(names.fresh_rel(f"{s2.name}_{i}"))
        out_vocab = step_output_vocab(s2, step_output_vocab(s1, vocab))
        defs: dict[str, tuple[tuple[str, ...], Formula]] = {}
        for name, arity in sorted(out_vocab.items()):
            params = tuple(f"x{i}" for i in range(1, arity + 1))
            if name == s2.name:
                defs[name] = (params, disj(
                    And((Rel(f"layer_{i}", params), Rel(cn, params)))
                    for i, cn in enumerate(color_names, start=1)))
            else:
                defs[name] = (params, Rel(name, params))
        return [*(ColorStep(cn) for cn in color_names), s1, InterpretStep.from_defs(defs)]
    raise AssertionError(f"cannot swap copy with {step_kind(s2)}")


def translate_after_copy(sentence: Formula, k: int, vocab: Mapping[str, int],
                         names: NameSource) -> Formula:
    """Backwards translation of a sentence along k-copying.

    A first-order element of the copied structure is a base element plus a
    layer index, so each first-order quantifier case-splits over the k
    layers; a set variable splits into k per-layer sets.  Copied relations
    ignore layers, equality requires equal layers, `copy` requires equal
    bases, and `layer_i` resolves to the layer constant.
    """
    sentence = refresh_bound(sentence, names)
    shadowed = _shadowed_names(k)
    original = {n for n in vocab if n not in shadowed}

    def walk(g: Formula, layer_of: dict[str, int], sets_of: dict[str, tuple[str, ...]]) -> Formula:
        if isinstance(g, Const):
            return g
        if isinstance(g, Rel):
            if g.name == COPY_NAME:
                a, b = g.args
                return Eq(a, b)
            if g.name.startswith("layer_") and g.name[6:].isdigit() and g.name not in original:
                (a,) = g.args
                return TRUE if layer_of[a] == int(g.name[6:]) else FALSE
            return Rel(g.name, g.args)
        if isinstance(g, Eq):
            return g if layer_of[g.left] == layer_of[g.right] else FALSE
        if isinstance(g, Mem):
            return Mem(g.element, sets_of[g.subset][layer_of[g.element] - 1])
        if isinstance(g, Not):
            return Not(walk(g.body, layer_of, sets_of))
        if isinstance(g, And):
            return conj(tuple(walk(p, layer_of, sets_of) for p in g.parts))
        if isinstance(g, Or):
            return disj(tuple(walk(p, layer_of, sets_of) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left, layer_of, sets_of), walk(g.right, layer_of, sets_of))
        if isinstance(g, (Exists, Forall)):
            if is_set_var(g.var):
                layer_sets = tuple(names.fresh_var(set_var=True) for _ in range(k))
                inner = walk(g.body, layer_of, {**sets_of, g.var: layer_sets})
                for sv in reversed(layer_sets):
                    inner = type(g)(sv, inner)
                return inner
            branches = []
            for layer in range(1, k + 1):
                body = walk(g.body, {**layer_of, g.var: layer}, sets_of)
                branches.append(type(g)(g.var, body))
            return disj(branches) if isinstance(g, Exists) else conj(branches)
        raise TypeError(f"not a formula: {g!r}")

    return walk(sentence, {}, {})


def swap_filter_color(s1: FilterStep, s2: ColorStep) -> list[Step]:
    """The filtering just ignores the new predicate."""
    return [s2, s1]


# -- the driver --------------------------------------------------------------

class _Rewriter:
    def __init__(self, pipeline: TransductionPipeline):
        self.input_vocab = pipeline.vocab_map()
        self.steps: list[Step] = list(pipeline.steps)
        self.names = NameSource(collect_pipeline_names(pipeline))
        self.budget = _MAX_ITERATIONS

    def _vocab_before(self, index: int) -> dict[str, int]:
        vocab = dict(self.input_vocab)
        for step in self.steps[:index]:
            vocab = step_output_vocab(step, vocab)
        return vocab

    def _spend(self):
        self.budget -= 1
        if self.budget <= 0:
            raise AssertionError("rewrite driver exceeded its iteration budget")

    def _replace(self, index: int, count: int, replacement: list[Step]):
        self._spend()
        self.steps[index:index + count] = replacement

    def _apply_merges(self, kinds: set[str]) -> bool:
        for i in range(len(self.steps) - 1):
            a, b = self.steps[i], self.steps[i + 1]
            if step_kind(a) in kinds and step_kind(a) == step_kind(b):
                merged = merge_steps(a, b, self._vocab_before(i), self.names)
                if merged is not None:
                    self._replace(i, 2, merged)
                    return True
        return False

    def _phase_renames(self):
        while True:
            if self._apply_merges({"rename"}):
                continue
            moved = False
            for i in range(len(self.steps) - 1):
                a, b = self.steps[i], self.steps[i + 1]
                if step_kind(a) == "rename" and step_kind(b) != "rename":
                    self._replace(i, 2, swap_rename(a, b, self._vocab_before(i), self.names))
                    moved = True
                    break
            if not moved:
                return

    def _phase_push(self, kind: str, past: set[str], swap) -> None:
        while True:
            self._phase_renames()
            if self._apply_merges({kind}):
                continue
            moved = False
            for i in range(len(self.steps) - 1):
                a, b = self.steps[i], self.steps[i + 1]
                if step_kind(a) == kind and step_kind(b) in past:
                    self._replace(i, 2, swap(a, b, self._vocab_before(i), self.names))
                    moved = True
                    break
            if not moved:
                return

    def _phase_copies(self):
        while True:
            self._phase_push("interpret", {"color", "filter", "copy"}, swap_interpret)
            if self._apply_merges({"copy"}):
                continue
            moved = False
            for i in reversed(range(len(self.steps) - 1)):
                a, b = self.steps[i], self.steps[i + 1]
                if step_kind(a) == "copy" and step_kind(b) in {"color", "filter"}:
                    self._replace(i, 2, swap_copy(a, b, self._vocab_before(i), self.names))
                    moved = True
                    break
            if not moved:
                return

    def _phase_filters(self):
        while True:
            if self._apply_merges({"filter"}):
                continue
            moved = False
            for i in range(len(self.steps) - 1):
                a, b = self.steps[i], self.steps[i + 1]
                if step_kind(a) == "filter" and step_kind(b) == "color":
                    self._replace(i, 2, swap_filter_color(a, b))
                    moved = True
                    break
            if not moved:
                return

    def run(self) -> TransductionPipeline:
        self._phase_renames()
        self._phase_push("restrict", {"color", "filter", "copy", "interpret"}, swap_restrict)
        self._phase_push("interpret", {"color", "filter", "copy"}, swap_interpret)
        self._phase_copies()
        self._phase_filters()
        result = TransductionPipeline.make(self.input_vocab, self.steps)
        if not is_normal_shape(result):
            raise AssertionError("rewrite driver did not reach the normal shape")
        return result


def normalize(pipeline: TransductionPipeline) -> TransductionPipeline:
    """Rewrite a pipeline into the six-stage normal form; semantics are
    preserved (spot-checked by twkit.msonf.equivalence at desk scale)."""
    pipeline.validate()
    return _Rewriter(pipeline).run()
