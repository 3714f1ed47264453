"""Verification problem files: data model, s-expression parser, validation.

A problem file declares sorts and symbols, the transition system, a liveness
property with parameterized fairness assumptions, auxiliary proof formulas,
and a ranking declaration with optional hint terms.  See the package README
for the grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .fol import (
    App, Atom, BoolConst, Eq, Exists, FolError, ForAll, Formula, Ite, Not,
    And, Or, Implies, Signature, Sort, SortMismatch, Tag, Term, TRUE, FALSE,
    UnsortedSymbol, Var, free_vars, is_closed, mk_and, mk_eq, mk_exists,
    mk_forall, mk_iff, mk_implies, mk_not, mk_or, reset_fresh_counter,
    sorted_vars, symbol_occurrences, well_sorted,
)
from .ranking import (
    BadHintPath, BinNode, DomLexNode, DomLinNode, DomPermNode, DomPwNode,
    HintInstantiation, LexNode, LinNode, OrderFormula, PosNode, PwNode,
    RankingError, RankingNode, elaborate, node_at_path, node_params,
)


class ParseError(FolError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


class SortError(ParseError):
    pass


class UnknownConstructor(ParseError):
    pass


# ---------------------------------------------------------------------------
# S-expression reader


@dataclass
class SAtom:
    text: str
    line: int
    col: int


@dataclass
class SList:
    items: list
    line: int
    col: int


SExpr = Union[SAtom, SList]

_ATOM_RE = re.compile(r"[^\s();]+")
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.-]*'*\Z")


def tokenize(text: str):
    line, col = 1, 1
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c.isspace():
            col += 1
            i += 1
        elif c == ";":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif c in "()":
            yield (c, c, line, col)
            col += 1
            i += 1
        else:
            m = _ATOM_RE.match(text, i)
            token = m.group(0)
            yield ("atom", token, line, col)
            i = m.end()
            col += len(token)


def read_sexprs(text: str) -> list[SExpr]:
    stack: list[SList] = []
    top: list[SExpr] = []
    for kind, value, line, col in tokenize(text):
        if kind == "(":
            stack.append(SList([], line, col))
        elif kind == ")":
            if not stack:
                raise ParseError("unbalanced ')'", line, col)
            done = stack.pop()
            (stack[-1].items if stack else top).append(done)
        else:
            (stack[-1].items if stack else top).append(SAtom(value, line, col))
    if stack:
        raise ParseError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


def _expect_list(e: SExpr, what: str) -> SList:
    if not isinstance(e, SList):
        raise ParseError(f"expected {what}", e.line, e.col)
    return e


def _expect_atom(e: SExpr, what: str) -> SAtom:
    if not isinstance(e, SAtom):
        raise ParseError(f"expected {what}", e.line, e.col)
    return e


def _head(e: SList) -> str:
    if not e.items or not isinstance(e.items[0], SAtom):
        raise ParseError("expected a form starting with a keyword", e.line, e.col)
    return e.items[0].text


# ---------------------------------------------------------------------------
# Data model


@dataclass(frozen=True)
class TransitionSystem:
    sig: Signature
    init: Formula
    trans: Formula
    axioms: tuple[Formula, ...]


@dataclass(frozen=True)
class FairnessConstraint:
    name: str
    params: tuple[Var, ...]
    formula: Formula


@dataclass(frozen=True)
class LivenessProperty:
    fairness: tuple[FairnessConstraint, ...]
    p: Formula
    q: Formula


@dataclass(frozen=True)
class RankingDecl:
    root: RankingNode
    hints: dict[tuple[int, ...], list[HintInstantiation]]


@dataclass(frozen=True)
class ProofSkeleton:
    rho: Formula
    trigger: Formula
    helpful: dict[str, Formula]  # fairness name -> psi, same parameters
    ranking: RankingDecl


@dataclass(frozen=True)
class Problem:
    system: TransitionSystem
    liveness: LivenessProperty
    proof: ProofSkeleton
    slow: bool = False

    @property
    def sig(self) -> Signature:
        return self.system.sig


DEFAULT_FAIRNESS_NAME = "fair"


# ---------------------------------------------------------------------------
# Formula parsing

_CONNECTIVES = {"and", "or", "not", "=>", "=", "forall", "exists", "ite", "iff"}


class _FormulaParser:
    def __init__(self, sig: Signature, allow_primed: bool):
        self.sig = sig
        self.allow_primed = allow_primed

    def _resolve_symbol(self, name: str, e: SExpr) -> tuple[str, Tag]:
        tag = Tag.PLAIN
        if name.endswith("'"):
            base = name.rstrip("'")
            if len(name) - len(base) > 1:
                raise ParseError(f"multiple primes on {name!r}", e.line, e.col)
            if not self.allow_primed:
                raise ParseError(
                    f"primed symbol {name!r} outside the transition formula", e.line, e.col)
            name, tag = base, Tag.PRIMED
        if not self.sig.has_symbol(name):
            raise SortError(f"undeclared symbol {name!r}", e.line, e.col)
        if tag == Tag.PRIMED and not self.sig.is_mutable(name):
            raise ParseError(f"immutable symbol {name!r} cannot be primed", e.line, e.col)
        return name, tag

    def parse_binders(self, e: SExpr, ctx: dict[str, Var]) -> tuple[tuple[Var, ...], dict[str, Var]]:
        lst = _expect_list(e, "a binder list ((x sort) ...)")
        out: list[Var] = []
        inner = dict(ctx)
        for b in lst.items:
            pair = _expect_list(b, "a binder (x sort)")
            if len(pair.items) != 2:
                raise ParseError("binder must be (name sort)", pair.line, pair.col)
            name = _expect_atom(pair.items[0], "a variable name").text
            sort = _expect_atom(pair.items[1], "a sort name").text
            if not _IDENT_RE.match(name) or name.endswith("'"):
                raise ParseError(f"bad variable name {name!r}", pair.line, pair.col)
            if sort not in self.sig.sorts:
                raise SortError(f"undeclared sort {sort!r}", pair.line, pair.col)
            if name in inner or self.sig.has_symbol(name):
                raise ParseError(f"binder {name!r} shadows an existing name", pair.line, pair.col)
            v = Var(name, sort)
            inner[name] = v
            out.append(v)
        return tuple(out), inner

    def term(self, e: SExpr, ctx: dict[str, Var]) -> Term:
        if isinstance(e, SAtom):
            if e.text in ctx:
                return ctx[e.text]
            name, tag = self._resolve_symbol(e.text, e)
            if name in self.sig.constants:
                return App(name, (), tag)
            raise ParseError(f"{e.text!r} is not a constant or variable", e.line, e.col)
        head = _head(e)
        if head == "ite":
            if len(e.items) != 4:
                raise ParseError("ite takes (ite cond then else)", e.line, e.col)
            return Ite(self.formula(e.items[1], ctx),
                       self.term(e.items[2], ctx),
                       self.term(e.items[3], ctx))
        name, tag = self._resolve_symbol(head, e.items[0])
        if name not in self.sig.functions:
            raise ParseError(f"{head!r} is not a function", e.line, e.col)
        args = tuple(self.term(a, ctx) for a in e.items[1:])
        return App(name, args, tag)

    def _is_formula_expr(self, e: SExpr, ctx: dict[str, Var]) -> bool:
        if isinstance(e, SAtom):
            return e.text in ("true", "false")
        head = _head(e)
        if head in _CONNECTIVES:
            return head != "ite" or self._is_formula_expr(e.items[2], ctx)
        name = head.rstrip("'")
        return name in self.sig.relations

    def formula(self, e: SExpr, ctx: dict[str, Var]) -> Formula:
        if isinstance(e, SAtom):
            if e.text == "true":
                return TRUE
            if e.text == "false":
                return FALSE
            name = e.text.rstrip("'")
            if name in self.sig.relations and not self.sig.relations[name]:
                rname, tag = self._resolve_symbol(e.text, e)
                return Atom(rname, (), tag)
            raise ParseError(f"expected a formula, got {e.text!r}", e.line, e.col)
        head = _head(e)
        args = e.items[1:]
        if head == "and":
            return mk_and(*[self.formula(a, ctx) for a in args])
        if head == "or":
            return mk_or(*[self.formula(a, ctx) for a in args])
        if head == "not":
            if len(args) != 1:
                raise ParseError("not takes one argument", e.line, e.col)
            return mk_not(self.formula(args[0], ctx))
        if head == "=>":
            if len(args) < 2:
                raise ParseError("=> takes at least two arguments", e.line, e.col)
            out = self.formula(args[-1], ctx)
            for a in reversed(args[:-1]):
                out = mk_implies(self.formula(a, ctx), out)
            return out
        if head == "iff":
            if len(args) != 2:
                raise ParseError("iff takes two arguments", e.line, e.col)
            return mk_iff(self.formula(args[0], ctx), self.formula(args[1], ctx))
        if head == "=":
            if len(args) != 2:
                raise ParseError("= takes two arguments", e.line, e.col)
            return mk_eq(self.term(args[0], ctx), self.term(args[1], ctx))
        if head in ("forall", "exists"):
            if len(args) != 2:
                raise ParseError(f"{head} takes a binder list and a body", e.line, e.col)
            vs, inner = self.parse_binders(args[0], ctx)
            body = self.formula(args[1], inner)
            return mk_forall(vs, body) if head == "forall" else mk_exists(vs, body)
        if head == "ite":
            if len(args) != 3:
                raise ParseError("ite takes (ite cond then else)", e.line, e.col)
            cond = self.formula(args[0], ctx)
            # formula-level conditional: desugar to a disjunction of guarded branches
            if self._is_formula_expr(args[1], ctx):
                t = self.formula(args[1], ctx)
                o = self.formula(args[2], ctx)
                return mk_or(mk_and(cond, t), mk_and(mk_not(cond), o))
            raise ParseError("term-valued ite used as a formula", e.line, e.col)
        name, tag = self._resolve_symbol(head, e.items[0])
        if name not in self.sig.relations:
            raise ParseError(f"{head!r} is not a relation", e.line, e.col)
        return Atom(name, tuple(self.term(a, ctx) for a in args), tag)


# ---------------------------------------------------------------------------
# Ranking parsing

_FINITE_DOMAIN_HEADS = {"pos", "dom-pw", "dom-perm", "dom-lex", "dom-lin"}


class _RankingParser:
    def __init__(self, fp: _FormulaParser):
        self.fp = fp

    def order(self, e: SExpr) -> OrderFormula:
        lst = _expect_list(e, "an order (order ((y0 s)...) ((y1 s)...) F)")
        if _head(lst) != "order" or len(lst.items) != 4:
            raise ParseError("expected (order ((y0 s)...) ((y1 s)...) F)", lst.line, lst.col)
        lo, ctx = self.fp.parse_binders(lst.items[1], {})
        hi, ctx = self.fp.parse_binders(lst.items[2], ctx)
        body = self.fp.formula(lst.items[3], ctx)
        return OrderFormula(lo, hi, body)

    def ranking(self, e: SExpr) -> RankingNode:
        lst = _expect_list(e, "a ranking expression")
        head = _head(lst)
        items = lst.items
        if head == "bin":
            if len(items) != 3:
                raise ParseError("expected (bin F ((x s)...))", lst.line, lst.col)
            params, ctx = self.fp.parse_binders(items[2], {})
            return BinNode(self.fp.formula(items[1], ctx), params)
        if head == "pos":
            if len(items) != 4:
                raise ParseError("expected (pos (t ...) L ((y s)...))", lst.line, lst.col)
            params, ctx = self.fp.parse_binders(items[3], {})
            terms_list = _expect_list(items[1], "a term tuple")
            terms = tuple(self.fp.term(t, ctx) for t in terms_list.items)
            return PosNode(terms, self.order(items[2]), params)
        if head in ("pw", "lex"):
            children = tuple(self.ranking(c) for c in items[1:])
            if not children:
                raise ParseError(f"{head} needs at least one ranking", lst.line, lst.col)
            return PwNode(children) if head == "pw" else LexNode(children)
        if head == "lin":
            branches = []
            for b in items[1:]:
                bl = _expect_list(b, "(branch F R)")
                if _head(bl) != "branch" or len(bl.items) != 3:
                    raise ParseError("expected (branch F R)", bl.line, bl.col)
                child = self.ranking(bl.items[2])
                ctx = {v.name: v for v in node_params(child)}
                guard = self.fp.formula(bl.items[1], ctx)
                branches.append((guard, child))
            if not branches:
                raise ParseError("lin needs at least one branch", lst.line, lst.col)
            return LinNode(tuple(branches))
        if head == "dom-pw":
            if len(items) != 3:
                raise ParseError("expected (dom-pw ((y s)...) R)", lst.line, lst.col)
            ys, _ = self.fp.parse_binders(items[1], {})
            return DomPwNode(ys, self.ranking(items[2]))
        if head == "dom-perm":
            if len(items) != 4:
                raise ParseError("expected (dom-perm k ((y s)...) R)", lst.line, lst.col)
            k_atom = _expect_atom(items[1], "a transposition count")
            try:
                k = int(k_atom.text)
            except ValueError:
                raise ParseError(f"bad transposition count {k_atom.text!r}",
                                 k_atom.line, k_atom.col) from None
            ys, _ = self.fp.parse_binders(items[2], {})
            return DomPermNode(k, ys, self.ranking(items[3]))
        if head == "dom-lex":
            if len(items) != 4:
                raise ParseError("expected (dom-lex L ((y s)...) R)", lst.line, lst.col)
            ys, _ = self.fp.parse_binders(items[2], {})
            return DomLexNode(self.order(items[1]), ys, self.ranking(items[3]))
        if head == "dom-lin":
            if len(items) != 5:
                raise ParseError("expected (dom-lin L F ((y s)...) R)", lst.line, lst.col)
            order = self.order(items[1])
            ys, _ = self.fp.parse_binders(items[3], {})
            child = self.ranking(items[4])
            ctx = {v.name: v for v in node_params(child)}
            alpha = self.fp.formula(items[2], ctx)
            return DomLinNode(order, alpha, ys, child)
        raise UnknownConstructor(f"unknown ranking constructor {head!r}", lst.line, lst.col)


# ---------------------------------------------------------------------------
# Problem parsing


def parse_problem(text: str) -> Problem:
    """Parse and sort-check a problem file."""
    reset_fresh_counter()
    forms = read_sexprs(text)
    sig = Signature()

    def flags(rest: list[SExpr], where: SExpr) -> tuple[bool, list[SExpr]]:
        mutable = False
        plain: list[SExpr] = []
        for item in rest:
            if isinstance(item, SAtom) and item.text.startswith(":"):
                if item.text == ":mutable":
                    mutable = True
                elif item.text == ":immutable":
                    mutable = False
                else:
                    raise ParseError(f"unknown flag {item.text!r}", item.line, item.col)
            else:
                plain.append(item)
        return mutable, plain

    # first pass: declarations
    for form in forms:
        lst = _expect_list(form, "a top-level form")
        head = _head(lst)
        try:
            if head == "sort":
                finite = any(isinstance(i, SAtom) and i.text == ":finite" for i in lst.items[1:])
                name = _expect_atom(lst.items[1], "a sort name").text
                if not _IDENT_RE.match(name) or name.endswith("'"):
                    raise ParseError(f"bad sort name {name!r}", lst.line, lst.col)
                sig.declare_sort(name, finite)
            elif head == "constant":
                mutable, plain = flags(lst.items[1:], lst)
                if len(plain) != 2:
                    raise ParseError("expected (constant name sort [flag])", lst.line, lst.col)
                sig.declare_constant(_expect_atom(plain[0], "a name").text,
                                     _expect_atom(plain[1], "a sort").text, mutable)
            elif head == "function":
                mutable, plain = flags(lst.items[1:], lst)
                if len(plain) != 3:
                    raise ParseError("expected (function name (sorts) sort [flag])",
                                     lst.line, lst.col)
                arg_list = _expect_list(plain[1], "argument sorts")
                args = tuple(_expect_atom(a, "a sort").text for a in arg_list.items)
                sig.declare_function(_expect_atom(plain[0], "a name").text, args,
                                     _expect_atom(plain[2], "a sort").text, mutable)
            elif head == "relation":
                mutable, plain = flags(lst.items[1:], lst)
                if len(plain) != 2:
                    raise ParseError("expected (relation name (sorts) [flag])", lst.line, lst.col)
                arg_list = _expect_list(plain[1], "argument sorts")
                args = tuple(_expect_atom(a, "a sort").text for a in arg_list.items)
                sig.declare_relation(_expect_atom(plain[0], "a name").text, args, mutable)
        except UnsortedSymbol as exc:
            raise SortError(str(exc), lst.line, lst.col) from None
        except FolError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), lst.line, lst.col) from None

    plain_fp = _FormulaParser(sig, allow_primed=False)
    trans_fp = _FormulaParser(sig, allow_primed=True)
    rp = _RankingParser(plain_fp)

    init: Optional[Formula] = None
    trans: Optional[Formula] = None
    axioms: list[Formula] = []
    fairness: list[FairnessConstraint] = []
    helpful: dict[str, Formula] = {}
    helpful_params: dict[str, tuple[Var, ...]] = {}
    p: Formula = TRUE
    q: Optional[Formula] = None
    rho: Formula = TRUE
    trigger: Formula = TRUE
    ranking_root: Optional[RankingNode] = None
    raw_hints: list[tuple[tuple[int, ...], list[list[SExpr]], SExpr]] = []
    slow = False

    def once(current, what: str, where: SList):
        if current is not None:
            raise ParseError(f"duplicate {what} form", where.line, where.col)

    for form in forms:
        lst = form  # checked above
        head = _head(lst)
        items = lst.items
        if head in ("sort", "constant", "function", "relation"):
            continue
        if head == "init":
            once(init, "init", lst)
            init = plain_fp.formula(items[1], {})
        elif head == "transition":
            once(trans, "transition", lst)
            trans = trans_fp.formula(items[1], {})
        elif head == "axiom":
            axioms.append(plain_fp.formula(items[1], {}))
        elif head == "fairness":
            if len(items) != 4:
                raise ParseError("expected (fairness name ((x s)...) F)", lst.line, lst.col)
            name = _expect_atom(items[1], "a fairness name").text
            if any(f.name == name for f in fairness):
                raise ParseError(f"duplicate fairness {name!r}", lst.line, lst.col)
            params, ctx = plain_fp.parse_binders(items[2], {})
            fairness.append(FairnessConstraint(name, params, plain_fp.formula(items[3], ctx)))
        elif head == "helpful":
            if len(items) != 4:
                raise ParseError("expected (helpful name ((x s)...) F)", lst.line, lst.col)
            name = _expect_atom(items[1], "a fairness name").text
            params, ctx = plain_fp.parse_binders(items[2], {})
            helpful[name] = plain_fp.formula(items[3], ctx)
            helpful_params[name] = params
        elif head == "property":
            idx = 1
            while idx < len(items):
                key = _expect_atom(items[idx], ":p or :q").text
                if key == ":p":
                    p = plain_fp.formula(items[idx + 1], {})
                elif key == ":q":
                    once(q, "property :q", lst)
                    q = plain_fp.formula(items[idx + 1], {})
                else:
                    raise ParseError(f"unknown property key {key!r}", lst.line, lst.col)
                idx += 2
        elif head == "rho":
            rho = plain_fp.formula(items[1], {})
        elif head == "trigger":
            trigger = plain_fp.formula(items[1], {})
        elif head == "ranking":
            once(ranking_root, "ranking", lst)
            ranking_root = rp.ranking(items[1])
        elif head == "hint":
            if len(items) != 3:
                raise ParseError("expected (hint (path i...) (tuple ...))", lst.line, lst.col)
            path_list = _expect_list(items[1], "(path i...)")
            if _head(path_list) != "path":
                raise ParseError("expected (path i...)", path_list.line, path_list.col)
            try:
                path = tuple(int(_expect_atom(a, "an index").text)
                             for a in path_list.items[1:])
            except ValueError:
                raise ParseError("path indices must be integers",
                                 path_list.line, path_list.col) from None
            tuples_list = _expect_list(items[2], "a list of term tuples")
            tuples = [_expect_list(t, "a term tuple").items for t in tuples_list.items]
            raw_hints.append((path, tuples, lst))
        elif head == "slow":
            slow = True
        else:
            raise ParseError(f"unknown top-level form {head!r}", lst.line, lst.col)

    if init is None:
        init = TRUE
    if trans is None:
        raise ParseError("problem has no (transition ...) form")
    if q is None:
        raise ParseError("problem has no (property :q ...) form")
    if ranking_root is None:
        raise ParseError("problem has no (ranking ...) form")
    if not fairness:
        fairness.append(FairnessConstraint(DEFAULT_FAIRNESS_NAME, (), TRUE))

    # helpful formulas default to true, with the fairness parameters
    fairness_by_name = {f.name: f for f in fairness}
    for name, params in helpful_params.items():
        if name not in fairness_by_name:
            raise ParseError(f"helpful for unknown fairness {name!r}")
        expected = fairness_by_name[name].params
        if tuple((v.name, v.sort) for v in params) != tuple((v.name, v.sort) for v in expected):
            raise ParseError(
                f"helpful {name!r} parameters differ from the fairness parameters")
    for f in fairness:
        helpful.setdefault(f.name, TRUE)

    # hint terms: resolved against the node the path addresses; for blocks
    # binding a single variable, a parenthesized entry is one compound term
    hints: dict[tuple[int, ...], list[HintInstantiation]] = {}
    for path, tuples, where in raw_hints:
        try:
            target = node_at_path(ranking_root, path)
        except RankingError as exc:
            raise BadHintPath(f"{where.line}:{where.col}: {exc}") from None
        ctx = {}
        arity = 1
        if isinstance(target, (DomPwNode, DomPermNode, DomLexNode, DomLinNode)):
            arity = len(target.ys)
        if isinstance(target, DomLexNode):
            ctx = {v.name: v for v in target.ys}
        inst = []
        for terms in tuples:
            if arity == 1 and len(terms) != 1:
                sl = SList(terms, where.line, where.col)
                inst.append((plain_fp.term(sl, ctx),))
            else:
                inst.append(tuple(plain_fp.term(t, ctx) for t in terms))
        hints.setdefault(path, []).append(tuple(inst))

    system = TransitionSystem(sig, init, trans, tuple(axioms))
    liveness = LivenessProperty(tuple(fairness), p, q)
    proof = ProofSkeleton(rho, trigger, helpful, RankingDecl(ranking_root, hints))
    return Problem(system, liveness, proof, slow)


def parse_problem_file(path: str) -> Problem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read())


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" or "warning"
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.message}"


def _finite_domain_sorts(node: RankingNode) -> set[str]:
    out: set[str] = set()
    if isinstance(node, PosNode):
        out |= {v.sort for v in node.order.lo}
    elif isinstance(node, (DomPwNode, DomPermNode, DomLexNode, DomLinNode)):
        out |= {v.sort for v in node.ys}
        for c in node.children:
            out |= _finite_domain_sorts(c)
    elif isinstance(node, (PwNode, LexNode)):
        for c in node.children:
            out |= _finite_domain_sorts(c)
    elif isinstance(node, LinNode):
        for _, c in node.branches:
            out |= _finite_domain_sorts(c)
    return out


def validate_problem(problem: Problem, strict_finite: bool = False) -> list[Diagnostic]:
    """Consistency diagnostics; errors make the problem unusable."""
    out: list[Diagnostic] = []
    sig = problem.sig

    def closed(f: Formula, what: str) -> None:
        fv = free_vars(f)
        if fv:
            names = ", ".join(v.name for v in sorted_vars(fv))
            out.append(Diagnostic("error", f"{what} must be closed; free: {names}"))

    def plain_only(f: Formula, what: str) -> None:
        for name, tag in set(symbol_occurrences(f)):
            if tag != Tag.PLAIN:
                out.append(Diagnostic("error", f"{what} must not mention primed symbols"))
                return

    sys_ = problem.system
    closed(sys_.init, "init")
    plain_only(sys_.init, "init")
    closed(sys_.trans, "transition")
    for i, ax in enumerate(sys_.axioms):
        closed(ax, f"axiom {i}")
        plain_only(ax, f"axiom {i}")
    for f, what in ((problem.liveness.p, "property :p"), (problem.liveness.q, "property :q"),
                    (problem.proof.rho, "rho"), (problem.proof.trigger, "trigger")):
        closed(f, what)
        plain_only(f, what)

    for fc in problem.liveness.fairness:
        extra = free_vars(fc.formula) - set(fc.params)
        if extra:
            names = ", ".join(v.name for v in sorted_vars(extra))
            out.append(Diagnostic(
                "error", f"fairness {fc.name!r} has free variables beyond its parameters: {names}"))
        psi = problem.proof.helpful.get(fc.name, TRUE)
        extra = free_vars(psi) - set(fc.params)
        if extra:
            names = ", ".join(v.name for v in sorted_vars(extra))
            out.append(Diagnostic(
                "error", f"helpful {fc.name!r} has free variables beyond the fairness "
                f"parameters: {names}"))

    root = problem.proof.ranking.root
    params = node_params(root)
    if params:
        names = ", ".join(v.name for v in params)
        out.append(Diagnostic("error", f"ranking must be closed; parameters left open: {names}"))

    level = "error" if strict_finite else "warning"
    for sort in sorted(_finite_domain_sorts(root)):
        if not sig.sorts[sort].finite:
            out.append(Diagnostic(
                level, f"finite-domain constructor over sort {sort!r} not declared :finite"))

    if not params:
        try:
            elaborate(root, sig, hints=problem.proof.ranking.hints, require_closed=True)
        except (RankingError, FolError) as exc:
            out.append(Diagnostic("error", f"ranking does not elaborate: {exc}"))
    return out


# ---------------------------------------------------------------------------
# Unparsing (canonical text; parse(unparse(p)) is AST-identical)


def _un_term(t: Term) -> str:
    if isinstance(t, Var):
        if t.tag != Tag.PLAIN:
            raise FolError("cannot unparse a tagged variable into problem syntax")
        return t.name
    if isinstance(t, App):
        if t.tag not in (Tag.PLAIN, Tag.PRIMED):
            raise FolError("cannot unparse a copy-tagged symbol into problem syntax")
        name = t.name + ("'" if t.tag == Tag.PRIMED else "")
        if not t.args:
            return name
        return f"({name} {' '.join(_un_term(a) for a in t.args)})"
    if isinstance(t, Ite):
        return f"(ite {un_formula(t.cond)} {_un_term(t.then)} {_un_term(t.other)})"
    raise TypeError(f"not a term: {t!r}")


def un_formula(f: Formula) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Eq):
        return f"(= {_un_term(f.left)} {_un_term(f.right)})"
    if isinstance(f, Atom):
        if f.tag not in (Tag.PLAIN, Tag.PRIMED):
            raise FolError("cannot unparse a copy-tagged symbol into problem syntax")
        name = f.name + ("'" if f.tag == Tag.PRIMED else "")
        if not f.args:
            return name
        return f"({name} {' '.join(_un_term(a) for a in f.args)})"
    if isinstance(f, Not):
        return f"(not {un_formula(f.body)})"
    if isinstance(f, And):
        return f"(and {' '.join(un_formula(p) for p in f.parts)})"
    if isinstance(f, Or):
        return f"(or {' '.join(un_formula(p) for p in f.parts)})"
    if isinstance(f, Implies):
        return f"(=> {un_formula(f.left)} {un_formula(f.right)})"
    if isinstance(f, (ForAll, Exists)):
        kw = "forall" if isinstance(f, ForAll) else "exists"
        binds = " ".join(f"({v.name} {v.sort})" for v in f.vars)
        return f"({kw} ({binds}) {un_formula(f.body)})"
    raise TypeError(f"not a formula: {f!r}")


def _un_binders(vs: Sequence[Var]) -> str:
    return "(" + " ".join(f"({v.name} {v.sort})" for v in vs) + ")"


def _un_order(o: OrderFormula) -> str:
    return f"(order {_un_binders(o.lo)} {_un_binders(o.hi)} {un_formula(o.body)})"


def un_ranking(node: RankingNode) -> str:
    if isinstance(node, BinNode):
        return f"(bin {un_formula(node.alpha)} {_un_binders(node.params)})"
    if isinstance(node, PosNode):
        terms = "(" + " ".join(_un_term(t) for t in node.terms) + ")"
        return f"(pos {terms} {_un_order(node.order)} {_un_binders(node.params)})"
    if isinstance(node, PwNode):
        return "(pw " + " ".join(un_ranking(c) for c in node.children) + ")"
    if isinstance(node, LexNode):
        return "(lex " + " ".join(un_ranking(c) for c in node.children) + ")"
    if isinstance(node, LinNode):
        inner = " ".join(f"(branch {un_formula(g)} {un_ranking(c)})"
                         for g, c in node.branches)
        return f"(lin {inner})"
    if isinstance(node, DomPwNode):
        return f"(dom-pw {_un_binders(node.ys)} {un_ranking(node.child)})"
    if isinstance(node, DomPermNode):
        return f"(dom-perm {node.k} {_un_binders(node.ys)} {un_ranking(node.child)})"
    if isinstance(node, DomLexNode):
        return f"(dom-lex {_un_order(node.order)} {_un_binders(node.ys)} {un_ranking(node.child)})"
    if isinstance(node, DomLinNode):
        return (f"(dom-lin {_un_order(node.order)} {un_formula(node.alpha)} "
                f"{_un_binders(node.ys)} {un_ranking(node.child)})")
    raise TypeError(f"not a ranking node: {node!r}")


def unparse(problem: Problem) -> str:
    sig = problem.sig
    lines: list[str] = []
    for name, sort in sig.sorts.items():
        lines.append(f"(sort {name}{' :finite' if sort.finite else ''})")
    for name, sort in sig.constants.items():
        flag = ":mutable" if sig.is_mutable(name) else ":immutable"
        lines.append(f"(constant {name} {sort} {flag})")
    for name, (args, res) in sig.functions.items():
        flag = ":mutable" if sig.is_mutable(name) else ":immutable"
        lines.append(f"(function {name} ({' '.join(args)}) {res} {flag})")
    for name, args in sig.relations.items():
        flag = ":mutable" if sig.is_mutable(name) else ":immutable"
        lines.append(f"(relation {name} ({' '.join(args)}) {flag})")
    lines.append(f"(init {un_formula(problem.system.init)})")
    lines.append(f"(transition {un_formula(problem.system.trans)})")
    for ax in problem.system.axioms:
        lines.append(f"(axiom {un_formula(ax)})")
    for fc in problem.liveness.fairness:
        lines.append(f"(fairness {fc.name} {_un_binders(fc.params)} {un_formula(fc.formula)})")
    lines.append(f"(property :p {un_formula(problem.liveness.p)} "
                 f":q {un_formula(problem.liveness.q)})")
    lines.append(f"(rho {un_formula(problem.proof.rho)})")
    lines.append(f"(trigger {un_formula(problem.proof.trigger)})")
    for fc in problem.liveness.fairness:
        psi = problem.proof.helpful[fc.name]
        lines.append(f"(helpful {fc.name} {_un_binders(fc.params)} {un_formula(psi)})")
    lines.append(f"(ranking {un_ranking(problem.proof.ranking.root)})")
    for path, insts in problem.proof.ranking.hints.items():
        for inst in insts:
            tuples = " ".join("(" + " ".join(_un_term(t) for t in terms) + ")"
                              for terms in inst)
            lines.append(f"(hint (path {' '.join(str(i) for i in path)}) ({tuples}))")
    if problem.slow:
        lines.append("(slow)")
    return "\n".join(lines) + "\n"
