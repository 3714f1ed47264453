"""Constructors for implicit rankings.

An implicit ranking is a pair of two-copy formulas (conserved, reduced) with
a list of parameters.  Tag SUB0 marks the lower-ranked copy, tag SUB1 the
higher-ranked copy.  Constructors compose rankings bottom-up; the finite
domain flag records whether soundness relies on domain finiteness.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence, Union

from .fol import (
    App, Atom, BoolConst, Eq, Exists, FolError, ForAll, Formula, Ite, Not,
    Signature, SortMismatch, Tag, Term, Var, free_vars, fresh_var, mk_and,
    mk_eq, mk_exists, mk_forall, mk_iff, mk_implies, mk_not, mk_or, retag,
    retag_term, sorted_vars, substitute, substitute_term, term_sort, tuple_eq,
    tuple_neq, well_sorted,
)


class RankingError(FolError):
    pass


class FreeVarEscape(RankingError):
    pass


class ArityMismatch(RankingError):
    pass


class ParamMismatch(RankingError):
    pass


class EmptyList(RankingError):
    pass


class NotAParam(RankingError):
    pass


class BadK(RankingError):
    pass


class NotClosed(RankingError):
    pass


class BadHintPath(RankingError):
    pass


# ---------------------------------------------------------------------------
# Constructor tree (syntactic declarations, also used by the finite oracle)


@dataclass(frozen=True)
class OrderFormula:
    """A single-copy formula comparing two variable tuples of equal shape."""
    lo: tuple[Var, ...]
    hi: tuple[Var, ...]
    body: Formula

    def __post_init__(self) -> None:
        if len(self.lo) != len(self.hi):
            raise ArityMismatch("order slots differ in length")
        for a, b in zip(self.lo, self.hi):
            if a.sort != b.sort:
                raise SortMismatch(f"order slots {a.name}/{b.name} differ in sort")

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(v.sort for v in self.lo)

    def instantiate(self, lo_terms: Sequence[Term], hi_terms: Sequence[Term],
                    tag: Tag, sig: Signature) -> Formula:
        """The formula l_tag(lo_terms, hi_terms)."""
        if len(lo_terms) != len(self.lo) or len(hi_terms) != len(self.hi):
            raise ArityMismatch("order applied to tuples of wrong length")
        body = retag(self.body, Tag.PLAIN, tag, sig) if tag != Tag.PLAIN else self.body
        mapping: dict[Var, Term] = {}
        mapping.update(dict(zip(self.lo, lo_terms)))
        mapping.update(dict(zip(self.hi, hi_terms)))
        return substitute(body, mapping)


@dataclass(frozen=True)
class BinNode:
    alpha: Formula
    params: tuple[Var, ...]


@dataclass(frozen=True)
class PosNode:
    terms: tuple[Term, ...]
    order: OrderFormula
    params: tuple[Var, ...]


@dataclass(frozen=True)
class PwNode:
    children: tuple["RankingNode", ...]


@dataclass(frozen=True)
class LexNode:
    children: tuple["RankingNode", ...]


@dataclass(frozen=True)
class LinNode:
    branches: tuple[tuple[Formula, "RankingNode"], ...]

    @property
    def children(self) -> tuple["RankingNode", ...]:
        return tuple(child for _, child in self.branches)


@dataclass(frozen=True)
class DomPwNode:
    ys: tuple[Var, ...]
    child: "RankingNode"

    @property
    def children(self) -> tuple["RankingNode", ...]:
        return (self.child,)


@dataclass(frozen=True)
class DomPermNode:
    k: int
    ys: tuple[Var, ...]
    child: "RankingNode"

    @property
    def children(self) -> tuple["RankingNode", ...]:
        return (self.child,)


@dataclass(frozen=True)
class DomLexNode:
    order: OrderFormula
    ys: tuple[Var, ...]
    child: "RankingNode"

    @property
    def children(self) -> tuple["RankingNode", ...]:
        return (self.child,)


@dataclass(frozen=True)
class DomLinNode:
    order: OrderFormula
    alpha: Formula
    ys: tuple[Var, ...]
    child: "RankingNode"

    @property
    def children(self) -> tuple["RankingNode", ...]:
        return (self.child,)


RankingNode = Union[BinNode, PosNode, PwNode, LexNode, LinNode,
                    DomPwNode, DomPermNode, DomLexNode, DomLinNode]

LEAF_NODES = (BinNode, PosNode)


def node_children(node: RankingNode) -> tuple[RankingNode, ...]:
    if isinstance(node, LEAF_NODES):
        return ()
    return node.children


def node_params(node: RankingNode) -> tuple[Var, ...]:
    """Parameters of the ranking a node elaborates to."""
    if isinstance(node, LEAF_NODES):
        return node.params
    if isinstance(node, (PwNode, LexNode, LinNode)):
        return node_params(node_children(node)[0])
    inner = node_params(node.child)
    ys = set(node.ys)
    return tuple(v for v in inner if v not in ys)


# ---------------------------------------------------------------------------
# The elaborated object


@dataclass(frozen=True)
class ImplicitRanking:
    params: tuple[Var, ...]
    conserved: Formula
    reduced: Formula
    finite_domain: bool
    node: Optional[RankingNode] = None


def _check_param_bookkeeping(r: ImplicitRanking) -> None:
    allowed = {v.with_tag(Tag.SUB0) for v in r.params} | \
              {v.with_tag(Tag.SUB1) for v in r.params}
    for f in (r.conserved, r.reduced):
        escaped = free_vars(f) - allowed
        if escaped:
            raise FreeVarEscape(
                f"ranking formula has stray free variables: {sorted_vars(escaped)}")


def _params_ok(params: Sequence[Var]) -> tuple[Var, ...]:
    seen: set[str] = set()
    for v in params:
        if v.tag != Tag.PLAIN:
            raise RankingError(f"parameter {v.name!r} must be untagged")
        if v.name in seen:
            raise RankingError(f"duplicate parameter {v.name!r}")
        seen.add(v.name)
    return tuple(params)


def _copy_formula(f: Formula, tag: Tag, sig: Signature,
                  var_map: Optional[Mapping[Var, Term]] = None) -> Formula:
    """Tag mutable symbols with `tag`; map free vars per var_map, rest to copies."""
    out = retag(f, Tag.PLAIN, tag, sig)
    mapping: dict[Var, Term] = {}
    for v in free_vars(out):
        if var_map is not None and v in var_map:
            mapping[v] = var_map[v]
        else:
            mapping[v] = v.with_tag(tag)
    return substitute(out, mapping) if mapping else out


def _copy_term(t: Term, tag: Tag, sig: Signature,
               var_map: Optional[Mapping[Var, Term]] = None) -> Term:
    out = retag_term(t, Tag.PLAIN, tag, sig)
    mapping: dict[Var, Term] = {}
    for v in free_vars(out):
        if var_map is not None and v in var_map:
            mapping[v] = var_map[v]
        else:
            mapping[v] = v.with_tag(tag)
    return substitute_term(out, mapping) if mapping else out


def hint_term(t: Term, sig: Signature) -> Term:
    """Tag a user hint term for use inside ranking formulas.

    Mutable symbols are read from the higher-ranked copy, which the proof
    rule substitutes with the pre-state signature.
    """
    return retag_term(t, Tag.PLAIN, Tag.SUB1, sig)


# ---------------------------------------------------------------------------
# order(l): immutability, asymmetry, transitivity


def mk_immut_order(l: OrderFormula, sig: Signature) -> Formula:
    y1 = tuple(Var(f"{v.name}.1", v.sort) for v in l.lo)
    y2 = tuple(Var(f"{v.name}.2", v.sort) for v in l.lo)
    y3 = tuple(Var(f"{v.name}.3", v.sort) for v in l.lo)
    agreement = mk_forall(y1 + y2, mk_iff(
        l.instantiate(y1, y2, Tag.SUB0, sig),
        l.instantiate(y1, y2, Tag.SUB1, sig)))
    asymmetry = mk_forall(y1 + y2, mk_implies(
        l.instantiate(y1, y2, Tag.SUB0, sig),
        mk_not(l.instantiate(y2, y1, Tag.SUB0, sig))))
    transitivity = mk_forall(y1 + y2 + y3, mk_implies(
        mk_and(l.instantiate(y1, y2, Tag.SUB0, sig),
               l.instantiate(y2, y3, Tag.SUB0, sig)),
        l.instantiate(y1, y3, Tag.SUB0, sig)))
    return mk_and(agreement, asymmetry, transitivity)


# ---------------------------------------------------------------------------
# Base constructors


def bin_rank(alpha: Formula, params: Sequence[Var], sig: Signature,
             node: Optional[RankingNode] = None) -> ImplicitRanking:
    params = _params_ok(params)
    extra = free_vars(alpha) - set(params)
    if extra:
        raise FreeVarEscape(f"guard has free variables outside parameters: {sorted_vars(extra)}")
    well_sorted(alpha, sig, {v.name: v.sort for v in params})
    lo = _copy_formula(alpha, Tag.SUB0, sig)
    hi = _copy_formula(alpha, Tag.SUB1, sig)
    r = ImplicitRanking(
        params=params,
        conserved=mk_implies(lo, hi),
        reduced=mk_and(hi, mk_not(lo)),
        finite_domain=False,
        node=node if node is not None else BinNode(alpha, params))
    _check_param_bookkeeping(r)
    return r


def pos_rank(terms: Sequence[Term], l: OrderFormula, params: Sequence[Var],
             sig: Signature, node: Optional[RankingNode] = None) -> ImplicitRanking:
    params = _params_ok(params)
    terms = tuple(terms)
    if len(terms) != len(l.lo):
        raise ArityMismatch(f"{len(terms)} terms against an order of arity {len(l.lo)}")
    ctx = {v.name: v.sort for v in params}
    for t, s in zip(terms, l.sorts):
        actual = term_sort(t, sig, ctx)
        if actual != s:
            raise SortMismatch(f"term sort {actual!r} does not match order slot {s!r}")
        extra = free_vars(t) - set(params)
        if extra:
            raise FreeVarEscape(f"term has free variables outside parameters: {sorted_vars(extra)}")
    t0 = tuple(_copy_term(t, Tag.SUB0, sig) for t in terms)
    t1 = tuple(_copy_term(t, Tag.SUB1, sig) for t in terms)
    order_ax = mk_immut_order(l, sig)
    strictly_before = l.instantiate(t0, t1, Tag.SUB0, sig)
    r = ImplicitRanking(
        params=params,
        conserved=mk_and(order_ax, mk_or(strictly_before, tuple_eq(t0, t1))),
        reduced=mk_and(order_ax, strictly_before),
        finite_domain=True,
        node=node if node is not None else PosNode(terms, l, params))
    _check_param_bookkeeping(r)
    return r


# ---------------------------------------------------------------------------
# Aggregation of finitely many rankings


def _shared_params(rs: Sequence[ImplicitRanking]) -> tuple[Var, ...]:
    if not rs:
        raise EmptyList("aggregation over an empty list of rankings")
    params = rs[0].params
    for r in rs[1:]:
        if r.params != params:
            raise ParamMismatch(
                f"aggregated rankings disagree on parameters: {params} vs {r.params}")
    return params


def pw_rank(rs: Sequence[ImplicitRanking], sig: Signature,
            node: Optional[RankingNode] = None) -> ImplicitRanking:
    params = _shared_params(rs)
    conserved = mk_and(*[r.conserved for r in rs])
    reduced = mk_and(conserved, mk_or(*[r.reduced for r in rs]))
    out = ImplicitRanking(
        params=params, conserved=conserved, reduced=reduced,
        finite_domain=any(r.finite_domain for r in rs),
        node=node if node is not None else PwNode(tuple(r.node for r in rs)))
    _check_param_bookkeeping(out)
    return out


def lex_rank(rs: Sequence[ImplicitRanking], sig: Signature,
             node: Optional[RankingNode] = None) -> ImplicitRanking:
    params = _shared_params(rs)
    cases = []
    for i, r in enumerate(rs):
        cases.append(mk_and(r.reduced, *[rs[j].conserved for j in range(i)]))
    reduced = mk_or(*cases)
    conserved = mk_or(reduced, mk_and(*[r.conserved for r in rs]))
    out = ImplicitRanking(
        params=params, conserved=conserved, reduced=reduced,
        finite_domain=any(r.finite_domain for r in rs),
        node=node if node is not None else LexNode(tuple(r.node for r in rs)))
    _check_param_bookkeeping(out)
    return out


def lin_rank(branches: Sequence[tuple[Formula, ImplicitRanking]], sig: Signature,
             node: Optional[RankingNode] = None) -> ImplicitRanking:
    if not branches:
        raise EmptyList("linear sum over an empty list of branches")
    params = _shared_params([r for _, r in branches])
    ctx = {v.name: v.sort for v in params}
    betas: list[Formula] = []
    for i, (guard, _) in enumerate(branches):
        extra = free_vars(guard) - set(params)
        if extra:
            raise FreeVarEscape(
                f"branch guard has free variables outside parameters: {sorted_vars(extra)}")
        well_sorted(guard, sig, ctx)
        betas.append(mk_and(guard, *[mk_not(branches[j][0]) for j in range(i)]))
    beta0 = [_copy_formula(b, Tag.SUB0, sig) for b in betas]
    beta1 = [_copy_formula(b, Tag.SUB1, sig) for b in betas]
    m = len(branches)
    cross = [mk_and(beta0[i], beta1[j]) for i in range(m) for j in range(m) if i < j]
    conserved = mk_or(
        *[mk_and(r.conserved, beta0[i], beta1[i]) for i, (_, r) in enumerate(branches)],
        *cross)
    reduced = mk_or(
        *[mk_and(r.reduced, beta0[i], beta1[i]) for i, (_, r) in enumerate(branches)],
        *cross)
    out = ImplicitRanking(
        params=params, conserved=conserved, reduced=reduced,
        finite_domain=any(r.finite_domain for _, r in branches),
        node=node if node is not None else LinNode(
            tuple((g, r.node) for g, r in branches)))
    _check_param_bookkeeping(out)
    return out


# ---------------------------------------------------------------------------
# Domain-based aggregations

HintInstantiation = tuple[tuple[Term, ...], ...]  # one term tuple per bound tuple


def _split_params(r: ImplicitRanking, ys: Sequence[Var]) -> tuple[Var, ...]:
    ys_set = set(ys)
    for y in ys:
        if y not in r.params:
            raise NotAParam(f"aggregation variable {y.name!r} is not a parameter")
    if len(ys_set) != len(ys):
        raise NotAParam("duplicate aggregation variable")
    return tuple(v for v in r.params if v not in ys_set)


def _shared_map(ys: Sequence[Var], lo_terms: Sequence[Term],
                hi_terms: Sequence[Term]) -> dict[Var, Term]:
    out: dict[Var, Term] = {}
    for y, t in zip(ys, lo_terms):
        out[y.with_tag(Tag.SUB0)] = t
    for y, t in zip(ys, hi_terms):
        out[y.with_tag(Tag.SUB1)] = t
    return out


def _check_hint_sorts(inst: HintInstantiation, shapes: Sequence[tuple[Var, ...]],
                      sig: Signature, ctx: Mapping[str, str]) -> None:
    if len(inst) != len(shapes):
        raise BadHintPath(
            f"hint gives {len(inst)} term tuples, block binds {len(shapes)}")
    for terms, shape in zip(inst, shapes):
        if len(terms) != len(shape):
            raise BadHintPath(
                f"hint tuple arity {len(terms)} does not match bound tuple arity {len(shape)}")
        for t, v in zip(terms, shape):
            actual = term_sort(t, sig, ctx)
            if actual != v.sort:
                raise SortMismatch(
                    f"hint term sort {actual!r} does not match bound variable sort {v.sort!r}")


def dom_pw(r: ImplicitRanking, ys: Sequence[Var], sig: Signature,
           hints: Optional[Sequence[HintInstantiation]] = None,
           node: Optional[RankingNode] = None) -> ImplicitRanking:
    ys = tuple(ys)
    zs = _split_params(r, ys)
    shared = _shared_map(ys, ys, ys)
    cons_body = substitute(r.conserved, shared)
    red_body = substitute(r.reduced, shared)
    conserved = mk_forall(ys, cons_body)
    if hints:
        ctx = {v.name: v.sort for v in zs}
        witnesses = []
        for inst in hints:
            _check_hint_sorts(inst, (ys,), sig, ctx)
            terms = tuple(hint_term(t, sig) for t in inst[0])
            witnesses.append(substitute(r.reduced, _shared_map(ys, terms, terms)))
        witness = mk_or(*witnesses)
    else:
        witness = mk_exists(ys, red_body)
    out = ImplicitRanking(
        params=zs, conserved=conserved, reduced=mk_and(conserved, witness),
        finite_domain=True,
        node=node if node is not None else DomPwNode(ys, r.node))
    _check_param_bookkeeping(out)
    return out


def _perm_image(ys: tuple[Var, ...], swaps: Sequence[tuple[tuple[Term, ...], tuple[Term, ...]]]) -> tuple[Term, ...]:
    """The tuple of terms mapping ys through the transpositions, as nested ite."""
    image: list[Term] = list(ys)
    for pos in range(len(ys)):
        acc: Term = ys[pos]
        for fwd, bwd in reversed(swaps):
            acc = Ite(tuple_eq(tuple(ys), bwd), fwd[pos], acc)
            acc = Ite(tuple_eq(tuple(ys), fwd), bwd[pos], acc)
        image[pos] = acc
    return tuple(image)


def dom_perm(r: ImplicitRanking, ys: Sequence[Var], k: int, sig: Signature,
             strict_distinct: bool = False,
             hints: Optional[Sequence[HintInstantiation]] = None,
             node: Optional[RankingNode] = None) -> ImplicitRanking:
    ys = tuple(ys)
    zs = _split_params(r, ys)
    if k < 0:
        raise BadK(f"number of transpositions must be non-negative, got {k}")

    fwd_vars = [tuple(Var(f"{y.name}.a{i + 1}", y.sort) for y in ys) for i in range(k)]
    bwd_vars = [tuple(Var(f"{y.name}.b{i + 1}", y.sort) for y in ys) for i in range(k)]

    def build(swaps: Sequence[tuple[tuple[Term, ...], tuple[Term, ...]]]) -> tuple[Formula, Formula]:
        distinct: list[Formula] = []
        for i in range(len(swaps)):
            for j in range(i + 1, len(swaps)):
                distinct.append(tuple_neq(swaps[i][0], swaps[j][0]))
                distinct.append(tuple_neq(swaps[i][1], swaps[j][1]))
                distinct.append(tuple_neq(swaps[i][0], swaps[j][1]))
                if strict_distinct:
                    distinct.append(tuple_neq(swaps[i][1], swaps[j][0]))
        image = _perm_image(ys, swaps)
        shared = _shared_map(ys, ys, image)
        cons_all = mk_forall(ys, substitute(r.conserved, shared))
        red_some = mk_exists(ys, substitute(r.reduced, shared))
        return mk_and(*distinct, cons_all), mk_and(*distinct, cons_all, red_some)

    if hints:
        ctx = {v.name: v.sort for v in zs}
        shapes = tuple(fwd_vars[i // 2] if i % 2 == 0 else bwd_vars[i // 2]
                       for i in range(2 * k))
        cons_cases, red_cases = [], []
        for inst in hints:
            _check_hint_sorts(inst, shapes, sig, ctx)
            tagged = [tuple(hint_term(t, sig) for t in terms) for terms in inst]
            swaps = [(tagged[2 * i], tagged[2 * i + 1]) for i in range(k)]
            c, d = build(swaps)
            cons_cases.append(c)
            red_cases.append(d)
        conserved, reduced = mk_or(*cons_cases), mk_or(*red_cases)
    else:
        swaps = list(zip(fwd_vars, bwd_vars))
        sigma_vars = tuple(v for pair in zip(fwd_vars, bwd_vars) for tup in pair for v in tup)
        c, d = build(swaps)
        conserved, reduced = mk_exists(sigma_vars, c), mk_exists(sigma_vars, d)

    out = ImplicitRanking(
        params=zs, conserved=conserved, reduced=reduced, finite_domain=True,
        node=node if node is not None else DomPermNode(k, ys, r.node))
    _check_param_bookkeeping(out)
    return out


def dom_lex(r: ImplicitRanking, ys: Sequence[Var], l: OrderFormula, sig: Signature,
            hints: Optional[Sequence[HintInstantiation]] = None,
            node: Optional[RankingNode] = None) -> ImplicitRanking:
    ys = tuple(ys)
    zs = _split_params(r, ys)
    if len(l.lo) != len(ys):
        raise ArityMismatch(
            f"order arity {len(l.lo)} does not match {len(ys)} aggregation variables")
    for y, s in zip(ys, l.sorts):
        if y.sort != s:
            raise SortMismatch(f"aggregation variable {y.name!r} does not match order sort {s!r}")
    ystar = tuple(Var(f"{y.name}*", y.sort) for y in ys)
    order_ax = mk_immut_order(l, sig)
    cons_at_y = substitute(r.conserved, _shared_map(ys, ys, ys))
    red_at_star = substitute(r.reduced, _shared_map(ys, ystar, ystar))
    if hints:
        ctx = {v.name: v.sort for v in zs}
        ctx.update({v.name: v.sort for v in ys})
        cases = []
        for inst in hints:
            _check_hint_sorts(inst, (ystar,), sig, ctx)
            terms = tuple(hint_term(t, sig) for t in inst[0])
            cases.append(mk_and(
                l.instantiate(terms, ys, Tag.SUB0, sig),
                substitute(r.reduced, _shared_map(ys, terms, terms))))
        excuse = mk_or(*cases)
    else:
        excuse = mk_exists(ystar, mk_and(
            l.instantiate(ystar, ys, Tag.SUB0, sig), red_at_star))
    conserved = mk_and(order_ax, mk_forall(ys, mk_or(cons_at_y, excuse)))
    red_at_y = substitute(r.reduced, _shared_map(ys, ys, ys))
    reduced = mk_and(conserved, mk_exists(ys, red_at_y))
    out = ImplicitRanking(
        params=zs, conserved=conserved, reduced=reduced, finite_domain=True,
        node=node if node is not None else DomLexNode(l, ys, r.node))
    _check_param_bookkeeping(out)
    return out


def dom_lin(r: ImplicitRanking, ys: Sequence[Var], l: OrderFormula, alpha: Formula,
            sig: Signature, hints: Optional[Sequence[HintInstantiation]] = None,
            node: Optional[RankingNode] = None) -> ImplicitRanking:
    ys = tuple(ys)
    zs = _split_params(r, ys)
    if len(l.lo) != len(ys):
        raise ArityMismatch(
            f"order arity {len(l.lo)} does not match {len(ys)} aggregation variables")
    allowed = set(ys) | set(zs)
    extra = free_vars(alpha) - allowed
    if extra:
        raise FreeVarEscape(
            f"partition guard has free variables outside y,z: {sorted_vars(extra)}")
    ctx = {v.name: v.sort for v in allowed}
    well_sorted(alpha, sig, ctx)

    # beta: alpha holds at y and at no strictly smaller tuple
    ypp = tuple(Var(f"{y.name}.m", y.sort) for y in ys)
    alpha_at_ypp = substitute(alpha, dict(zip(ys, ypp)))
    beta = mk_and(alpha, mk_forall(ypp, mk_or(
        l.instantiate(ys, ypp, Tag.PLAIN, sig),
        tuple_eq(tuple(ys), tuple(ypp)),
        mk_not(alpha_at_ypp))))

    def beta_at(tag: Tag, terms: Sequence[Term]) -> Formula:
        return _copy_formula(beta, tag, sig, dict(zip(ys, terms)))

    order_ax = mk_immut_order(l, sig)
    yprime = tuple(Var(f"{y.name}.2", y.sort) for y in ys)

    def cases(inner: Formula, terms_same: Sequence[Term],
              terms_lo: Sequence[Term], terms_hi: Sequence[Term]) -> tuple[Formula, Formula]:
        same = mk_and(inner, beta_at(Tag.SUB0, terms_same), beta_at(Tag.SUB1, terms_same))
        moved = mk_and(beta_at(Tag.SUB0, terms_lo), beta_at(Tag.SUB1, terms_hi),
                       l.instantiate(terms_lo, terms_hi, Tag.SUB0, sig))
        return same, moved

    if hints:
        cons_cases, red_cases = [], []
        hctx = {v.name: v.sort for v in zs}
        for inst in hints:
            _check_hint_sorts(inst, (ys, yprime), sig, hctx)
            t_y = tuple(hint_term(t, sig) for t in inst[0])
            t_y2 = tuple(hint_term(t, sig) for t in inst[1])
            c_same, c_moved = cases(
                substitute(r.conserved, _shared_map(ys, t_y, t_y)), t_y, t_y, t_y2)
            r_same, r_moved = cases(
                substitute(r.reduced, _shared_map(ys, t_y, t_y)), t_y, t_y, t_y2)
            cons_cases.append(mk_or(c_same, c_moved))
            red_cases.append(mk_or(r_same, r_moved))
        conserved = mk_and(order_ax, mk_or(*cons_cases))
        reduced = mk_and(order_ax, mk_or(*red_cases))
    else:
        c_same, c_moved = cases(
            substitute(r.conserved, _shared_map(ys, ys, ys)), ys, ys, yprime)
        r_same, r_moved = cases(
            substitute(r.reduced, _shared_map(ys, ys, ys)), ys, ys, yprime)
        conserved = mk_and(order_ax, mk_or(
            mk_exists(ys, c_same), mk_exists(ys + yprime, c_moved)))
        reduced = mk_and(order_ax, mk_or(
            mk_exists(ys, r_same), mk_exists(ys + yprime, r_moved)))

    out = ImplicitRanking(
        params=zs, conserved=conserved, reduced=reduced, finite_domain=True,
        node=node if node is not None else DomLinNode(l, alpha, ys, r.node))
    _check_param_bookkeeping(out)
    return out


# ---------------------------------------------------------------------------
# Elaboration of a constructor tree, with hint application

HintMap = Mapping[tuple[int, ...], Sequence[HintInstantiation]]


def node_at_path(root: RankingNode, path: tuple[int, ...]) -> RankingNode:
    node = root
    for idx in path:
        kids = node_children(node)
        if idx < 0 or idx >= len(kids):
            raise BadHintPath(f"path {path} leaves the constructor tree at index {idx}")
        node = kids[idx]
    return node


def elaborate(node: RankingNode, sig: Signature,
              hints: Optional[HintMap] = None,
              strict_distinct: bool = False,
              require_closed: bool = False,
              _path: tuple[int, ...] = ()) -> ImplicitRanking:
    """Bottom-up construction of the ranking a constructor tree denotes."""
    hints = hints or {}
    if not _path:
        for path, insts in hints.items():
            target = node_at_path(node, path)
            if not isinstance(target, (DomPwNode, DomPermNode, DomLexNode, DomLinNode)):
                raise BadHintPath(
                    f"hint path {path} addresses a {type(target).__name__}, "
                    "which introduces no existential quantifiers")
            if not insts:
                raise BadHintPath(f"hint path {path} carries no instantiations")
    own_hints = hints.get(_path)

    def child(i: int, c: RankingNode) -> ImplicitRanking:
        return elaborate(c, sig, hints, strict_distinct, False, _path + (i,))

    if isinstance(node, BinNode):
        out = bin_rank(node.alpha, node.params, sig, node=node)
    elif isinstance(node, PosNode):
        out = pos_rank(node.terms, node.order, node.params, sig, node=node)
    elif isinstance(node, PwNode):
        out = pw_rank([child(i, c) for i, c in enumerate(node.children)], sig, node=node)
    elif isinstance(node, LexNode):
        out = lex_rank([child(i, c) for i, c in enumerate(node.children)], sig, node=node)
    elif isinstance(node, LinNode):
        out = lin_rank([(g, child(i, c)) for i, (g, c) in enumerate(node.branches)],
                       sig, node=node)
    elif isinstance(node, DomPwNode):
        out = dom_pw(child(0, node.child), node.ys, sig, hints=own_hints, node=node)
    elif isinstance(node, DomPermNode):
        out = dom_perm(child(0, node.child), node.ys, node.k, sig,
                       strict_distinct=strict_distinct, hints=own_hints, node=node)
    elif isinstance(node, DomLexNode):
        out = dom_lex(child(0, node.child), node.ys, node.order, sig,
                      hints=own_hints, node=node)
    elif isinstance(node, DomLinNode):
        out = dom_lin(child(0, node.child), node.ys, node.order, node.alpha, sig,
                      hints=own_hints, node=node)
    else:
        raise TypeError(f"not a ranking node: {node!r}")

    if require_closed and not _path and out.params:
        raise NotClosed(
            f"proofs need a closed ranking; parameters left open: "
            f"{[v.name for v in out.params]}")
    return out


def apply_hints(r: ImplicitRanking, hints: HintMap, sig: Signature,
                strict_distinct: bool = False) -> ImplicitRanking:
    """Replace hinted existential blocks by disjunctions over the hint terms."""
    if not hints:
        return r
    if r.node is None:
        raise BadHintPath("ranking carries no constructor tree to address")
    return elaborate(r.node, sig, hints=hints, strict_distinct=strict_distinct)
