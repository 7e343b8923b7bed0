"""Formula ASTs with first-order and monadic second-order quantification.

Variables are plain strings; a leading uppercase letter marks a set
variable, anything else is first-order.  The serialization is a
parenthesized prefix term format, e.g.::

    (and (rel R x y) (exists x (mem x X)))

with `true` and `false` as bare atoms and quantifier kind inferred from
the variable's case.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import Callable, Iterable, Iterator, Mapping

from ..errors import GuardError, ParseError

SO_EVAL_GUARD = 12  # set quantifiers enumerate 2^|universe| subsets


def is_set_var(name: str) -> bool:
    return bool(name) and name[0].isupper()


class Formula:
    __slots__ = ()


@dataclass(frozen=True)
class Const(Formula):
    value: bool


@dataclass(frozen=True)
class Rel(Formula):
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq(Formula):
    left: str
    right: str


@dataclass(frozen=True)
class Mem(Formula):
    element: str
    subset: str


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Const(True)
FALSE = Const(False)


def conj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[Formula]) -> Formula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def write_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Rel):
        return "(" + " ".join(("rel", f.name) + f.args) + ")"
    if isinstance(f, Eq):
        return f"(eq {f.left} {f.right})"
    if isinstance(f, Mem):
        return f"(mem {f.element} {f.subset})"
    if isinstance(f, Not):
        return f"(not {write_formula(f.body)})"
    if isinstance(f, And):
        return "(" + " ".join(["and"] + [write_formula(p) for p in f.parts]) + ")"
    if isinstance(f, Or):
        return "(" + " ".join(["or"] + [write_formula(p) for p in f.parts]) + ")"
    if isinstance(f, Implies):
        return f"(implies {write_formula(f.left)} {write_formula(f.right)})"
    if isinstance(f, Exists):
        return f"(exists {f.var} {write_formula(f.body)})"
    if isinstance(f, Forall):
        return f"(forall {f.var} {write_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _tokenize(text: str) -> Iterator[str]:
    token = []
    for ch in text:
        if ch in "()":
            if token:
                yield "".join(token)
                token = []
            yield ch
        elif ch.isspace():
            if token:
                yield "".join(token)
                token = []
        else:
            token.append(ch)
    if token:
        yield "".join(token)


def parse_formula(text: str) -> Formula:
    tokens = list(_tokenize(text))
    formula, rest = _parse_tokens(tokens)
    if rest:
        raise ParseError(f"trailing tokens after formula: {' '.join(rest[:4])}")
    return formula


def _parse_tokens(tokens: list[str]) -> tuple[Formula, list[str]]:
    if not tokens:
        raise ParseError("unexpected end of formula")
    head, tokens = tokens[0], tokens[1:]
    if head == "true":
        return TRUE, tokens
    if head == "false":
        return FALSE, tokens
    if head != "(":
        raise ParseError(f"unexpected token {head!r}")
    if not tokens:
        raise ParseError("unclosed parenthesis")
    op, tokens = tokens[0], tokens[1:]

    def until_close(toks: list[str]) -> tuple[list[Formula], list[str]]:
        parts = []
        while toks and toks[0] != ")":
            part, toks = _parse_tokens(toks)
            parts.append(part)
        if not toks:
            raise ParseError("unclosed parenthesis")
        return parts, toks[1:]

    if op == "rel":
        args = []
        while tokens and tokens[0] != ")":
            args.append(tokens[0])
            tokens = tokens[1:]
        if not tokens:
            raise ParseError("unclosed parenthesis")
        if not args:
            raise ParseError("(rel ...) needs a relation name")
        return Rel(args[0], tuple(args[1:])), tokens[1:]
    if op in ("eq", "mem"):
        if len(tokens) < 3 or tokens[2] != ")":
            raise ParseError(f"({op} ...) takes exactly two variables")
        a, b = tokens[0], tokens[1]
        if op == "eq":
            return Eq(a, b), tokens[3:]
        if not is_set_var(b) or is_set_var(a):
            raise ParseError("(mem x X) needs a first-order then a set variable")
        return Mem(a, b), tokens[3:]
    if op == "not":
        parts, tokens = until_close(tokens)
        if len(parts) != 1:
            raise ParseError("(not ...) takes one formula")
        return Not(parts[0]), tokens
    if op in ("and", "or"):
        parts, tokens = until_close(tokens)
        return (And if op == "and" else Or)(tuple(parts)), tokens
    if op == "implies":
        parts, tokens = until_close(tokens)
        if len(parts) != 2:
            raise ParseError("(implies ...) takes two formulas")
        return Implies(parts[0], parts[1]), tokens
    if op in ("exists", "forall"):
        if not tokens:
            raise ParseError("quantifier needs a variable")
        var, tokens = tokens[0], tokens[1:]
        parts, tokens = until_close(tokens)
        if len(parts) != 1:
            raise ParseError("quantifier takes one body formula")
        return (Exists if op == "exists" else Forall)(var, parts[0]), tokens
    raise ParseError(f"unknown operator {op!r}")


def formula_size(f: Formula) -> int:
    if isinstance(f, (Const, Rel, Eq, Mem)):
        return 1
    if isinstance(f, Not):
        return 1 + formula_size(f.body)
    if isinstance(f, (And, Or)):
        return 1 + sum(formula_size(p) for p in f.parts)
    if isinstance(f, Implies):
        return 1 + formula_size(f.left) + formula_size(f.right)
    if isinstance(f, (Exists, Forall)):
        return 1 + formula_size(f.body)
    raise TypeError(f"not a formula: {f!r}")


def free_variables(f: Formula) -> tuple[frozenset[str], frozenset[str]]:
    """(first-order, set) free variable names."""
    fo: set[str] = set()
    so: set[str] = set()

    def walk(g: Formula, bound: frozenset[str]):
        if isinstance(g, Const):
            return
        if isinstance(g, Rel):
            for a in g.args:
                if a not in bound:
                    (so if is_set_var(a) else fo).add(a)
        elif isinstance(g, Eq):
            for a in (g.left, g.right):
                if a not in bound:
                    (so if is_set_var(a) else fo).add(a)
        elif isinstance(g, Mem):
            if g.element not in bound:
                fo.add(g.element)
            if g.subset not in bound:
                so.add(g.subset)
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, Implies):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound | {g.var})
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f, frozenset())
    return frozenset(fo), frozenset(so)


def all_names(f: Formula) -> frozenset[str]:
    """Every variable and relation name occurring anywhere in the formula."""
    out: set[str] = set()

    def walk(g: Formula):
        if isinstance(g, Rel):
            out.add(g.name)
            out.update(g.args)
        elif isinstance(g, Eq):
            out.update((g.left, g.right))
        elif isinstance(g, Mem):
            out.update((g.element, g.subset))
        elif isinstance(g, Not):
            walk(g.body)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, Implies):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, (Exists, Forall)):
            out.add(g.var)
            walk(g.body)

    walk(f)
    return frozenset(out)


def check_formula(f: Formula, vocab: Mapping[str, int],
                  free_fo: Iterable[str] = (), free_so: Iterable[str] = ()) -> None:
    """Raise on unknown relations, arity mismatches, or stray free variables."""

    def walk(g: Formula, bound: frozenset[str]):
        if isinstance(g, Const):
            return
        if isinstance(g, Rel):
            if g.name not in vocab:
                raise ValueError(f"unknown relation {g.name!r}")
            if len(g.args) != vocab[g.name]:
                raise ValueError(
                    f"relation {g.name!r} has arity {vocab[g.name]}, got {len(g.args)} args")
            for a in g.args:
                if is_set_var(a):
                    raise ValueError(f"set variable {a!r} used as a first-order argument")
                if a not in bound:
                    raise ValueError(f"free variable {a!r} not declared")
        elif isinstance(g, Eq):
            for a in (g.left, g.right):
                if is_set_var(a):
                    raise ValueError(f"set variable {a!r} in equality")
                if a not in bound:
                    raise ValueError(f"free variable {a!r} not declared")
        elif isinstance(g, Mem):
            if g.element not in bound:
                raise ValueError(f"free variable {g.element!r} not declared")
            if g.subset not in bound:
                raise ValueError(f"free set variable {g.subset!r} not declared")
        elif isinstance(g, Not):
            walk(g.body, bound)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p, bound)
        elif isinstance(g, Implies):
            walk(g.left, bound)
            walk(g.right, bound)
        elif isinstance(g, (Exists, Forall)):
            walk(g.body, bound | {g.var})
        else:
            raise TypeError(f"not a formula: {g!r}")

    walk(f, frozenset(free_fo) | frozenset(free_so))


def satisfies(structure, f: Formula, env: Mapping | None = None) -> bool:
    """Naive model checking; set quantifiers enumerate all subsets."""
    env = dict(env or {})
    universe = structure.universe
    relations = structure.relation_map()

    def ev(g: Formula, env: dict) -> bool:
        if isinstance(g, Const):
            return g.value
        if isinstance(g, Rel):
            rel = relations.get(g.name)
            if rel is None:
                raise ValueError(f"structure lacks relation {g.name!r}")
            return tuple(env[a] for a in g.args) in rel
        if isinstance(g, Eq):
            return env[g.left] == env[g.right]
        if isinstance(g, Mem):
            return env[g.element] in env[g.subset]
        if isinstance(g, Not):
            return not ev(g.body, env)
        if isinstance(g, And):
            return all(ev(p, env) for p in g.parts)
        if isinstance(g, Or):
            return any(ev(p, env) for p in g.parts)
        if isinstance(g, Implies):
            return (not ev(g.left, env)) or ev(g.right, env)
        if isinstance(g, (Exists, Forall)):
            want_any = isinstance(g, Exists)
            if is_set_var(g.var):
                if len(universe) > SO_EVAL_GUARD:
                    raise GuardError(
                        f"set quantifier over {len(universe)} elements exceeds "
                        f"the guard of {SO_EVAL_GUARD}")
                domain = _subsets(universe)
            else:
                domain = universe
            saved = env.get(g.var, _MISSING)
            try:
                for value in domain:
                    env[g.var] = value
                    if ev(g.body, env) == want_any:
                        return want_any
                return not want_any
            finally:
                if saved is _MISSING:
                    env.pop(g.var, None)
                else:
                    env[g.var] = saved
        raise TypeError(f"not a formula: {g!r}")

    return ev(f, env)


_MISSING = object()


def _subsets(universe) -> Iterator[frozenset]:
    n = len(universe)
    for mask in range(1 << n):
        yield frozenset(universe[i] for i in range(n) if mask >> i & 1)


class NameSource:
    """Deterministic fresh-name factory avoiding a set of used names."""

    def __init__(self, used: Iterable[str] = ()):
        self._used = set(used)
        self._counter = count(1)

    def reserve(self, names: Iterable[str]) -> None:
        self._used.update(names)

    def fresh_var(self, set_var: bool = False) -> str:
        prefix = "Z_" if set_var else "z_"
        while True:
            name = f"{prefix}{next(self._counter)}"
            if name not in self._used:
                self._used.add(name)
                return name

    def fresh_rel(self, base: str = "rel") -> str:
        while True:
            name = f"{base}_{next(self._counter)}"
            if name not in self._used:
                self._used.add(name)
                return name


def rename_free(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename free variable occurrences; bound occurrences shadow."""

    def walk(g: Formula, active: dict) -> Formula:
        if isinstance(g, Const):
            return g
        if isinstance(g, Rel):
            return Rel(g.name, tuple(active.get(a, a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(active.get(g.left, g.left), active.get(g.right, g.right))
        if isinstance(g, Mem):
            return Mem(active.get(g.element, g.element), active.get(g.subset, g.subset))
        if isinstance(g, Not):
            return Not(walk(g.body, active))
        if isinstance(g, And):
            return And(tuple(walk(p, active) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, active) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left, active), walk(g.right, active))
        if isinstance(g, (Exists, Forall)):
            inner = dict(active)
            inner.pop(g.var, None)
            return type(g)(g.var, walk(g.body, inner))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f, dict(mapping))


def refresh_bound(f: Formula, names: NameSource) -> Formula:
    """Alpha-rename every bound variable to a fresh name."""

    def walk(g: Formula, active: dict) -> Formula:
        if isinstance(g, Const):
            return g
        if isinstance(g, Rel):
            return Rel(g.name, tuple(active.get(a, a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(active.get(g.left, g.left), active.get(g.right, g.right))
        if isinstance(g, Mem):
            return Mem(active.get(g.element, g.element), active.get(g.subset, g.subset))
        if isinstance(g, Not):
            return Not(walk(g.body, active))
        if isinstance(g, And):
            return And(tuple(walk(p, active) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p, active) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left, active), walk(g.right, active))
        if isinstance(g, (Exists, Forall)):
            fresh = names.fresh_var(is_set_var(g.var))
            inner = dict(active)
            inner[g.var] = fresh
            return type(g)(fresh, walk(g.body, inner))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f, {})


def instantiate(template: Formula, params: tuple[str, ...], args: tuple[str, ...],
                names: NameSource) -> Formula:
    """Capture-avoiding substitution of args for the template's parameters."""
    if len(params) != len(args):
        raise ValueError("parameter/argument count mismatch")
    fresh = refresh_bound(template, names)
    return rename_free(fresh, dict(zip(params, args)))


def relativize(f: Formula, guard: Callable[[str], Formula], names: NameSource) -> Formula:
    """Restrict every quantifier to (sets of) elements satisfying the guard.

    guard(v) must produce a formula whose only free variable is v.
    """

    def set_guard(var: str) -> Formula:
        z = names.fresh_var()
        return Forall(z, Implies(Mem(z, var), guard(z)))

    def walk(g: Formula) -> Formula:
        if isinstance(g, (Const, Rel, Eq, Mem)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, Exists):
            cond = set_guard(g.var) if is_set_var(g.var) else guard(g.var)
            return Exists(g.var, And((cond, walk(g.body))))
        if isinstance(g, Forall):
            cond = set_guard(g.var) if is_set_var(g.var) else guard(g.var)
            return Forall(g.var, Implies(cond, walk(g.body)))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)


def substitute_atoms(f: Formula, defs: Mapping[str, tuple[tuple[str, ...], Formula]],
                     names: NameSource) -> Formula:
    """Replace each relation atom R(args) by its defining formula."""

    def walk(g: Formula) -> Formula:
        if isinstance(g, Rel) and g.name in defs:
            params, body = defs[g.name]
            return instantiate(body, params, g.args, names)
        if isinstance(g, (Const, Rel, Eq, Mem)):
            return g
        if isinstance(g, Not):
            return Not(walk(g.body))
        if isinstance(g, And):
            return And(tuple(walk(p) for p in g.parts))
        if isinstance(g, Or):
            return Or(tuple(walk(p) for p in g.parts))
        if isinstance(g, Implies):
            return Implies(walk(g.left), walk(g.right))
        if isinstance(g, (Exists, Forall)):
            return type(g)(g.var, walk(g.body))
        raise TypeError(f"not a formula: {g!r}")

    return walk(f)
