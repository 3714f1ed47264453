"""Many-sorted uninterpreted first-order logic with signature-copy tags.

Terms and formulas are immutable trees.  Every symbol occurrence and every
variable occurrence carries a tag identifying which copy of the signature it
belongs to: the plain copy, the primed (post-state) copy, or the two copies
used when comparing a pair of states.  Immutable symbols are shared between
all copies and therefore always stay plain.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Optional, Union


class Tag(Enum):
    PLAIN = ""
    PRIMED = "'"
    SUB0 = "0"
    SUB1 = "1"

    def marker(self) -> str:
        return {Tag.PLAIN: "", Tag.PRIMED: "′", Tag.SUB0: "₀", Tag.SUB1: "₁"}[self]


class FolError(Exception):
    pass


class UnsortedSymbol(FolError):
    pass


class SortMismatch(FolError):
    pass


class TagMismatch(FolError):
    pass


@dataclass(frozen=True)
class Sort:
    name: str
    finite: bool = False  # declared finite-but-unbounded semantics


class Signature:
    """Symbol table: constants, functions and relations over declared sorts.

    Symbols marked mutable receive tagged copies in two-state formulas;
    immutable symbols are shared between the copies.
    """

    def __init__(self) -> None:
        self.sorts: dict[str, Sort] = {}
        self.constants: dict[str, str] = {}
        self.functions: dict[str, tuple[tuple[str, ...], str]] = {}
        self.relations: dict[str, tuple[str, ...]] = {}
        self.mutable: set[str] = set()

    def declare_sort(self, name: str, finite: bool = False) -> Sort:
        if name in self.sorts:
            raise FolError(f"duplicate sort {name!r}")
        sort = Sort(name, finite)
        self.sorts[name] = sort
        return sort

    def _check_new_symbol(self, name: str, sorts: tuple[str, ...]) -> None:
        if self.has_symbol(name):
            raise FolError(f"duplicate symbol {name!r}")
        for s in sorts:
            if s not in self.sorts:
                raise UnsortedSymbol(f"symbol {name!r} uses undeclared sort {s!r}")

    def declare_constant(self, name: str, sort: str, mutable: bool = False) -> None:
        self._check_new_symbol(name, (sort,))
        self.constants[name] = sort
        if mutable:
            self.mutable.add(name)

    def declare_function(self, name: str, arg_sorts: tuple[str, ...], result: str,
                         mutable: bool = False) -> None:
        self._check_new_symbol(name, arg_sorts + (result,))
        self.functions[name] = (tuple(arg_sorts), result)
        if mutable:
            self.mutable.add(name)

    def declare_relation(self, name: str, arg_sorts: tuple[str, ...],
                         mutable: bool = False) -> None:
        self._check_new_symbol(name, tuple(arg_sorts))
        self.relations[name] = tuple(arg_sorts)
        if mutable:
            self.mutable.add(name)

    def has_symbol(self, name: str) -> bool:
        return name in self.constants or name in self.functions or name in self.relations

    def is_mutable(self, name: str) -> bool:
        return name in self.mutable

    def symbol_names(self) -> list[str]:
        """All symbol names in declaration order (constants, functions, relations)."""
        return list(self.constants) + list(self.functions) + list(self.relations)


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str
    tag: Tag = Tag.PLAIN

    def with_tag(self, tag: Tag) -> "Var":
        return Var(self.name, self.sort, tag)


@dataclass(frozen=True)
class App:
    """Constant (empty args) or function application."""
    name: str
    args: tuple["Term", ...] = ()
    tag: Tag = Tag.PLAIN


@dataclass(frozen=True)
class Ite:
    cond: "Formula"
    then: "Term"
    other: "Term"


Term = Union[Var, App, Ite]


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class BoolConst:
    value: bool


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple[Term, ...] = ()
    tag: Tag = Tag.PLAIN


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class ForAll:
    vars: tuple[Var, ...]
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    vars: tuple[Var, ...]
    body: "Formula"


Formula = Union[BoolConst, Eq, Atom, Not, And, Or, Implies, ForAll, Exists]

TRUE = BoolConst(True)
FALSE = BoolConst(False)


# ---------------------------------------------------------------------------
# Smart constructors.  Only trivial true/false absorption, no other rewriting.


def mk_and(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, BoolConst):
            if not p.value:
                return FALSE
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def mk_or(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, BoolConst):
            if p.value:
                return TRUE
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def mk_not(f: Formula) -> Formula:
    if isinstance(f, BoolConst):
        return BoolConst(not f.value)
    if isinstance(f, Not):
        return f.body
    return Not(f)


def mk_implies(left: Formula, right: Formula) -> Formula:
    if isinstance(left, BoolConst):
        return right if left.value else TRUE
    if isinstance(right, BoolConst):
        return TRUE if right.value else mk_not(left)
    if left == right:
        return TRUE
    return Implies(left, right)


def mk_iff(left: Formula, right: Formula) -> Formula:
    return mk_and(mk_implies(left, right), mk_implies(right, left))


def mk_eq(left: Term, right: Term) -> Formula:
    if left == right:
        return TRUE
    return Eq(left, right)


def mk_forall(vs: tuple[Var, ...], body: Formula) -> Formula:
    if not vs or isinstance(body, BoolConst):
        return body
    return ForAll(tuple(vs), body)


def mk_exists(vs: tuple[Var, ...], body: Formula) -> Formula:
    if not vs or isinstance(body, BoolConst):
        return body
    return Exists(tuple(vs), body)


def tuple_eq(left: tuple[Term, ...], right: tuple[Term, ...]) -> Formula:
    if len(left) != len(right):
        raise SortMismatch("tuple equality over tuples of different length")
    return mk_and(*[mk_eq(l, r) for l, r in zip(left, right)])


def tuple_neq(left: tuple[Term, ...], right: tuple[Term, ...]) -> Formula:
    return mk_not(tuple_eq(left, right))


# ---------------------------------------------------------------------------
# Fresh variables.  A process-wide counter keeps generated names deterministic
# for a fixed sequence of operations; parsing a problem resets it.

_fresh_counter = itertools.count(1)


def fresh_var(base: str, sort: str, tag: Tag = Tag.PLAIN) -> Var:
    return Var(f"{base}!{next(_fresh_counter)}", sort, tag)


def reset_fresh_counter() -> None:
    global _fresh_counter
    _fresh_counter = itertools.count(1)


# ---------------------------------------------------------------------------
# Structural queries


def free_vars(x: Union[Term, Formula]) -> frozenset[Var]:
    if isinstance(x, Var):
        return frozenset((x,))
    if isinstance(x, App):
        out: frozenset[Var] = frozenset()
        for a in x.args:
            out |= free_vars(a)
        return out
    if isinstance(x, Ite):
        return free_vars(x.cond) | free_vars(x.then) | free_vars(x.other)
    if isinstance(x, BoolConst):
        return frozenset()
    if isinstance(x, Eq):
        return free_vars(x.left) | free_vars(x.right)
    if isinstance(x, Atom):
        out = frozenset()
        for a in x.args:
            out |= free_vars(a)
        return out
    if isinstance(x, Not):
        return free_vars(x.body)
    if isinstance(x, (And, Or)):
        out = frozenset()
        for p in x.parts:
            out |= free_vars(p)
        return out
    if isinstance(x, Implies):
        return free_vars(x.left) | free_vars(x.right)
    if isinstance(x, (ForAll, Exists)):
        return free_vars(x.body) - frozenset(x.vars)
    raise TypeError(f"not a term or formula: {x!r}")


def sorted_vars(vs: frozenset[Var]) -> list[Var]:
    return sorted(vs, key=lambda v: (v.name, v.tag.value))


def symbol_occurrences(x: Union[Term, Formula]) -> Iterator[tuple[str, Tag]]:
    """Yield (name, tag) for every constant/function/relation occurrence."""
    if isinstance(x, (Var, BoolConst)):
        return
    if isinstance(x, App):
        yield (x.name, x.tag)
        for a in x.args:
            yield from symbol_occurrences(a)
    elif isinstance(x, Ite):
        yield from symbol_occurrences(x.cond)
        yield from symbol_occurrences(x.then)
        yield from symbol_occurrences(x.other)
    elif isinstance(x, Eq):
        yield from symbol_occurrences(x.left)
        yield from symbol_occurrences(x.right)
    elif isinstance(x, Atom):
        yield (x.name, x.tag)
        for a in x.args:
            yield from symbol_occurrences(a)
    elif isinstance(x, Not):
        yield from symbol_occurrences(x.body)
    elif isinstance(x, (And, Or)):
        for p in x.parts:
            yield from symbol_occurrences(p)
    elif isinstance(x, Implies):
        yield from symbol_occurrences(x.left)
        yield from symbol_occurrences(x.right)
    elif isinstance(x, (ForAll, Exists)):
        yield from symbol_occurrences(x.body)
    else:
        raise TypeError(f"not a term or formula: {x!r}")


def tags_of(x: Union[Term, Formula]) -> frozenset[Tag]:
    """The set of tags carried by symbol occurrences in x."""
    return frozenset(tag for _, tag in symbol_occurrences(x))


# ---------------------------------------------------------------------------
# Substitution (capture-avoiding, simultaneous)


def substitute_term(t: Term, mapping: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t, t)
    if isinstance(t, App):
        return App(t.name, tuple(substitute_term(a, mapping) for a in t.args), t.tag)
    if isinstance(t, Ite):
        return Ite(substitute(t.cond, mapping),
                   substitute_term(t.then, mapping),
                   substitute_term(t.other, mapping))
    raise TypeError(f"not a term: {t!r}")


def substitute(f: Formula, mapping: Mapping[Var, Term]) -> Formula:
    """Simultaneous substitution; bound variables are renamed on capture."""
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Eq):
        return Eq(substitute_term(f.left, mapping), substitute_term(f.right, mapping))
    if isinstance(f, Atom):
        return Atom(f.name, tuple(substitute_term(a, mapping) for a in f.args), f.tag)
    if isinstance(f, Not):
        return Not(substitute(f.body, mapping))
    if isinstance(f, And):
        return And(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, mapping), substitute(f.right, mapping))
    if isinstance(f, (ForAll, Exists)):
        bound = set(f.vars)
        live = {v: t for v, t in mapping.items()
                if v not in bound and v in free_vars(f.body)}
        if not live:
            return f
        incoming: set[Var] = set()
        for t in live.values():
            incoming |= free_vars(t)
        renames: dict[Var, Term] = {}
        new_vars: list[Var] = []
        for bv in f.vars:
            if bv in incoming:
                nv = fresh_var(bv.name.split("!")[0], bv.sort, bv.tag)
                renames[bv] = nv
                new_vars.append(nv)
            else:
                new_vars.append(bv)
        body = substitute(f.body, renames) if renames else f.body
        body = substitute(body, live)
        cls = ForAll if isinstance(f, ForAll) else Exists
        return cls(tuple(new_vars), body)
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Retagging between signature copies


def _retag_collision_check(f: Union[Term, Formula], frm: Tag, to: Tag,
                           sig: Signature) -> None:
    touched = {name for name, tag in symbol_occurrences(f)
               if tag == frm and sig.is_mutable(name)}
    clashing = {name for name, tag in symbol_occurrences(f)
                if tag == to and name in touched}
    if clashing:
        raise TagMismatch(
            f"retag {frm.name}->{to.name} would merge copies of: {sorted(clashing)}")


def retag_term(t: Term, frm: Tag, to: Tag, sig: Signature) -> Term:
    if isinstance(t, Var):
        return t
    if isinstance(t, App):
        tag = to if (t.tag == frm and sig.is_mutable(t.name)) else t.tag
        return App(t.name, tuple(retag_term(a, frm, to, sig) for a in t.args), tag)
    if isinstance(t, Ite):
        return Ite(_retag(t.cond, frm, to, sig),
                   retag_term(t.then, frm, to, sig),
                   retag_term(t.other, frm, to, sig))
    raise TypeError(f"not a term: {t!r}")


def _retag(f: Formula, frm: Tag, to: Tag, sig: Signature) -> Formula:
    if isinstance(f, BoolConst):
        return f
    if isinstance(f, Eq):
        return Eq(retag_term(f.left, frm, to, sig), retag_term(f.right, frm, to, sig))
    if isinstance(f, Atom):
        tag = to if (f.tag == frm and sig.is_mutable(f.name)) else f.tag
        return Atom(f.name, tuple(retag_term(a, frm, to, sig) for a in f.args), tag)
    if isinstance(f, Not):
        return Not(_retag(f.body, frm, to, sig))
    if isinstance(f, And):
        return And(tuple(_retag(p, frm, to, sig) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_retag(p, frm, to, sig) for p in f.parts))
    if isinstance(f, Implies):
        return Implies(_retag(f.left, frm, to, sig), _retag(f.right, frm, to, sig))
    if isinstance(f, (ForAll, Exists)):
        cls = ForAll if isinstance(f, ForAll) else Exists
        return cls(f.vars, _retag(f.body, frm, to, sig))
    raise TypeError(f"not a formula: {f!r}")


def retag(f: Formula, frm: Tag, to: Tag, sig: Signature,
          include_vars: bool = False) -> Formula:
    """Move mutable-symbol occurrences tagged `frm` to tag `to`.

    Immutable symbols are never tagged and never touched.  With include_vars,
    free variable occurrences tagged `frm` move to `to` as well.  Raises
    TagMismatch when the move would merge two previously distinct copies.
    """
    if frm == to:
        return f
    _retag_collision_check(f, frm, to, sig)
    out = _retag(f, frm, to, sig)
    if include_vars:
        mapping = {v: v.with_tag(to) for v in free_vars(out) if v.tag == frm}
        if mapping:
            out = substitute(out, mapping)
    return out


# ---------------------------------------------------------------------------
# Well-sortedness


def _symbol_signature(name: str, nargs: int, sig: Signature) -> tuple[tuple[str, ...], Optional[str]]:
    """(argument sorts, result sort); result None for relations."""
    if name in sig.constants:
        if nargs != 0:
            raise SortMismatch(f"constant {name!r} applied to {nargs} arguments")
        return (), sig.constants[name]
    if name in sig.functions:
        args, res = sig.functions[name]
        if nargs != len(args):
            raise SortMismatch(f"function {name!r} expects {len(args)} arguments, got {nargs}")
        return args, res
    if name in sig.relations:
        args = sig.relations[name]
        if nargs != len(args):
            raise SortMismatch(f"relation {name!r} expects {len(args)} arguments, got {nargs}")
        return args, None
    raise UnsortedSymbol(f"undeclared symbol {name!r}")


def _check_tag(name: str, tag: Tag, sig: Signature) -> None:
    if tag != Tag.PLAIN and not sig.is_mutable(name):
        raise TagMismatch(f"immutable symbol {name!r} carries tag {tag.name}")


def term_sort(t: Term, sig: Signature, ctx: Optional[Mapping[str, str]] = None) -> str:
    if isinstance(t, Var):
        if ctx is not None:
            if t.name not in ctx:
                raise UnsortedSymbol(f"variable {t.name!r} not in scope")
            if ctx[t.name] != t.sort:
                raise SortMismatch(
                    f"variable {t.name!r} declared {ctx[t.name]!r} but used as {t.sort!r}")
        return t.sort
    if isinstance(t, App):
        _check_tag(t.name, t.tag, sig)
        args, res = _symbol_signature(t.name, len(t.args), sig)
        if res is None:
            raise SortMismatch(f"relation {t.name!r} used as a term")
        for expected, a in zip(args, t.args):
            actual = term_sort(a, sig, ctx)
            if actual != expected:
                raise SortMismatch(
                    f"argument of {t.name!r}: expected {expected!r}, got {actual!r}")
        return res
    if isinstance(t, Ite):
        well_sorted(t.cond, sig, ctx)
        s1 = term_sort(t.then, sig, ctx)
        s2 = term_sort(t.other, sig, ctx)
        if s1 != s2:
            raise SortMismatch(f"ite branches have sorts {s1!r} and {s2!r}")
        return s1
    raise TypeError(f"not a term: {t!r}")


def well_sorted(x: Union[Term, Formula], sig: Signature,
                ctx: Optional[Mapping[str, str]] = None) -> Union[str, bool]:
    """Sort of a term, or True for a well-sorted formula.  Raises on failure."""
    if isinstance(x, (Var, App, Ite)):
        return term_sort(x, sig, ctx)
    if isinstance(x, BoolConst):
        return True
    if isinstance(x, Eq):
        s1 = term_sort(x.left, sig, ctx)
        s2 = term_sort(x.right, sig, ctx)
        if s1 != s2:
            raise SortMismatch(f"equality between sorts {s1!r} and {s2!r}")
        return True
    if isinstance(x, Atom):
        _check_tag(x.name, x.tag, sig)
        args, res = _symbol_signature(x.name, len(x.args), sig)
        if res is not None:
            raise SortMismatch(f"non-relation {x.name!r} used as an atom")
        for expected, a in zip(args, x.args):
            actual = term_sort(a, sig, ctx)
            if actual != expected:
                raise SortMismatch(
                    f"argument of {x.name!r}: expected {expected!r}, got {actual!r}")
        return True
    if isinstance(x, Not):
        return well_sorted(x.body, sig, ctx)
    if isinstance(x, (And, Or)):
        for p in x.parts:
            well_sorted(p, sig, ctx)
        return True
    if isinstance(x, Implies):
        well_sorted(x.left, sig, ctx)
        well_sorted(x.right, sig, ctx)
        return True
    if isinstance(x, (ForAll, Exists)):
        inner = dict(ctx) if ctx is not None else None
        for v in x.vars:
            if v.sort not in sig.sorts:
                raise UnsortedSymbol(f"bound variable {v.name!r} of undeclared sort {v.sort!r}")
            if inner is not None:
                inner[v.name] = v.sort
        return well_sorted(x.body, sig, inner)
    raise TypeError(f"not a term or formula: {x!r}")


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


# ---------------------------------------------------------------------------
# Debug pretty-printer (tag markers as suffixes)


def pretty(x: Union[Term, Formula]) -> str:
    if isinstance(x, Var):
        return x.name + x.tag.marker()
    if isinstance(x, App):
        head = x.name + x.tag.marker()
        if not x.args:
            return head
        return f"({head} {' '.join(pretty(a) for a in x.args)})"
    if isinstance(x, Ite):
        return f"(ite {pretty(x.cond)} {pretty(x.then)} {pretty(x.other)})"
    if isinstance(x, BoolConst):
        return "true" if x.value else "false"
    if isinstance(x, Eq):
        return f"(= {pretty(x.left)} {pretty(x.right)})"
    if isinstance(x, Atom):
        head = x.name + x.tag.marker()
        if not x.args:
            return head
        return f"({head} {' '.join(pretty(a) for a in x.args)})"
    if isinstance(x, Not):
        return f"(not {pretty(x.body)})"
    if isinstance(x, And):
        return f"(and {' '.join(pretty(p) for p in x.parts)})"
    if isinstance(x, Or):
        return f"(or {' '.join(pretty(p) for p in x.parts)})"
    if isinstance(x, Implies):
        return f"(=> {pretty(x.left)} {pretty(x.right)})"
    if isinstance(x, (ForAll, Exists)):
        kw = "forall" if isinstance(x, ForAll) else "exists"
        binds = " ".join(f"({v.name + v.tag.marker()} {v.sort})" for v in x.vars)
        return f"({kw} ({binds}) {pretty(x.body)})"
    raise TypeError(f"not a term or formula: {x!r}")
