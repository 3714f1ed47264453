"""Brute-force laboratory over explicit finite structures.

Provides Tarskian evaluation by quantifier expansion, structure enumeration
with a budget/sampling switch, arithmetic height interpretations of ranking
trees, empirical soundness checking of implicit rankings, bounded premise
falsification, and an explicit-state fair-lasso model checker.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence, Union

from .fol import (
    And, App, Atom, BoolConst, Eq, Exists, FolError, ForAll, Formula, Implies,
    Ite, Not, Or, Signature, Tag, Term, Var, symbol_occurrences,
)
from .ranking import (
    BinNode, DomLexNode, DomLinNode, DomPermNode, DomPwNode, ImplicitRanking,
    LexNode, LinNode, OrderFormula, PosNode, PwNode, RankingNode, node_params,
)


class OracleError(FolError):
    pass


class MissingAssignment(OracleError):
    pass


class BudgetExceeded(OracleError):
    pass


class OracleUnsupported(OracleError):
    pass


class OrderNotTotal(OracleError):
    """The structure's order interpretation is not a strict total order."""


# ---------------------------------------------------------------------------
# Structures and evaluation


@dataclass
class FiniteStructure:
    """Explicit domains (0..n-1 per sort) plus total interpretations.

    Constants map to elements, functions to total dicts over their argument
    grid, relations to frozensets of tuples.
    """
    sizes: dict[str, int]
    interp: dict[str, object]

    def merged(self, other: Mapping[str, object]) -> "FiniteStructure":
        out = dict(self.interp)
        out.update(other)
        return FiniteStructure(self.sizes, out)


States = Mapping[Tag, FiniteStructure]


def _as_states(s: Union[FiniteStructure, States]) -> States:
    if isinstance(s, FiniteStructure):
        return {Tag.PLAIN: s}
    return s


def _any_structure(states: States) -> FiniteStructure:
    return next(iter(states.values()))


def _lookup(states: States, tag: Tag, name: str) -> object:
    st = states.get(tag)
    if st is None:
        raise MissingAssignment(f"no structure provided for signature copy {tag.name}")
    try:
        return st.interp[name]
    except KeyError:
        raise MissingAssignment(f"symbol {name!r} has no interpretation") from None


def eval_term(t: Term, states: States, v: Mapping[Var, int]) -> int:
    if isinstance(t, Var):
        if t not in v:
            raise MissingAssignment(f"variable {t.name}{t.tag.marker()} unassigned")
        return v[t]
    if isinstance(t, App):
        val = _lookup(states, t.tag, t.name)
        if not t.args:
            return val  # constant
        args = tuple(eval_term(a, states, v) for a in t.args)
        return val[args]
    if isinstance(t, Ite):
        if eval_formula(t.cond, states, v):
            return eval_term(t.then, states, v)
        return eval_term(t.other, states, v)
    raise TypeError(f"not a term: {t!r}")


def eval_formula(f: Formula, s: Union[FiniteStructure, States],
                 v: Optional[Mapping[Var, int]] = None) -> bool:
    states = _as_states(s)
    v = v or {}
    return _eval(f, states, dict(v))


def _eval(f: Formula, states: States, v: dict[Var, int]) -> bool:
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Eq):
        return eval_term(f.left, states, v) == eval_term(f.right, states, v)
    if isinstance(f, Atom):
        rel = _lookup(states, f.tag, f.name)
        args = tuple(eval_term(a, states, v) for a in f.args)
        return args in rel
    if isinstance(f, Not):
        return not _eval(f.body, states, v)
    if isinstance(f, And):
        return all(_eval(p, states, v) for p in f.parts)
    if isinstance(f, Or):
        return any(_eval(p, states, v) for p in f.parts)
    if isinstance(f, Implies):
        return (not _eval(f.left, states, v)) or _eval(f.right, states, v)
    if isinstance(f, (ForAll, Exists)):
        sizes = _any_structure(states).sizes
        domains = []
        for bv in f.vars:
            if bv.sort not in sizes:
                raise MissingAssignment(f"no domain for sort {bv.sort!r}")
            domains.append(range(sizes[bv.sort]))
        want_all = isinstance(f, ForAll)
        for combo in itertools.product(*domains):
            for bv, val in zip(f.vars, combo):
                v[bv] = val
            res = _eval(f.body, states, v)
            if res != want_all:
                for bv in f.vars:
                    del v[bv]
                return not want_all
        for bv in f.vars:
            if bv in v:
                del v[bv]
        return want_all
    raise TypeError(f"not a formula: {f!r}")


def pair_states(lower: FiniteStructure, higher: FiniteStructure) -> States:
    """States mapping for ranking formulas: SUB0=lower, SUB1=higher."""
    return {Tag.SUB0: lower, Tag.SUB1: higher, Tag.PLAIN: lower}


def step_states(pre: FiniteStructure, post: FiniteStructure) -> States:
    """States mapping for transition formulas: plain=pre, primed=post."""
    return {Tag.PLAIN: pre, Tag.PRIMED: post}


def format_structure(s: FiniteStructure, sig: Signature) -> str:
    parts = []
    for name in sig.symbol_names():
        val = s.interp.get(name)
        if val is None:
            continue
        if name in sig.constants:
            parts.append(f"{name}={val}")
        elif name in sig.functions:
            img = ",".join(f"{k}->{v}" for k, v in sorted(val.items()))
            parts.append(f"{name}[{img}]")
        else:
            img = ",".join(str(t) for t in sorted(val))
            parts.append(f"{name}={{{img}}}")
    return "; ".join(parts)


# ---------------------------------------------------------------------------
# Enumeration of interpretations


def _grid(sig: Signature, arg_sorts: Sequence[str], sizes: Mapping[str, int]) -> list[tuple[int, ...]]:
    return list(itertools.product(*[range(sizes[s]) for s in arg_sorts]))


def count_symbol_interps(sig: Signature, name: str, sizes: Mapping[str, int]) -> int:
    if name in sig.constants:
        return sizes[sig.constants[name]]
    if name in sig.functions:
        args, res = sig.functions[name]
        cells = 1
        for s in args:
            cells *= sizes[s]
        return sizes[res] ** cells
    args = sig.relations[name]
    cells = 1
    for s in args:
        cells *= sizes[s]
    return 2 ** cells


def iter_symbol_interps(sig: Signature, name: str, sizes: Mapping[str, int]) -> Iterator[object]:
    if name in sig.constants:
        yield from range(sizes[sig.constants[name]])
        return
    if name in sig.functions:
        args, res = sig.functions[name]
        grid = _grid(sig, args, sizes)
        for image in itertools.product(range(sizes[res]), repeat=len(grid)):
            yield dict(zip(grid, image))
        return
    grid = _grid(sig, sig.relations[name], sizes)
    for mask in itertools.product((False, True), repeat=len(grid)):
        yield frozenset(cell for cell, bit in zip(grid, mask) if bit)


def random_symbol_interp(rng: random.Random, sig: Signature, name: str,
                         sizes: Mapping[str, int]) -> object:
    if name in sig.constants:
        return rng.randrange(sizes[sig.constants[name]])
    if name in sig.functions:
        args, res = sig.functions[name]
        grid = _grid(sig, args, sizes)
        return {cell: rng.randrange(sizes[res]) for cell in grid}
    grid = _grid(sig, sig.relations[name], sizes)
    return frozenset(cell for cell in grid if rng.random() < 0.5)


def count_structures(sig: Signature, sizes: Mapping[str, int],
                     symbols: Optional[Sequence[str]] = None) -> int:
    symbols = list(symbols) if symbols is not None else sig.symbol_names()
    total = 1
    for name in symbols:
        total *= count_symbol_interps(sig, name, sizes)
    return total


def enumerate_structures(sig: Signature, sizes: Mapping[str, int],
                         symbols: Optional[Sequence[str]] = None,
                         fixed: Optional[Mapping[str, object]] = None,
                         budget: int = 10 ** 6, samples: int = 10 ** 4,
                         seed: int = 0,
                         exhaustive: Optional[bool] = None) -> Iterator[FiniteStructure]:
    """All structures over explicit domains, or a seeded sample when the
    grid exceeds the budget.  Deterministic order either way."""
    fixed = dict(fixed) if fixed else {}
    if symbols is None:
        symbols = [n for n in sig.symbol_names() if n not in fixed]
    total = count_structures(sig, sizes, symbols)
    sizes = dict(sizes)
    if total <= budget or exhaustive:
        if exhaustive and total > budget:
            raise BudgetExceeded(
                f"{total} structures exceed the exhaustive budget of {budget}")
        for combo in itertools.product(*[list(iter_symbol_interps(sig, n, sizes))
                                         for n in symbols]):
            interp = dict(fixed)
            interp.update(dict(zip(symbols, combo)))
            yield FiniteStructure(sizes, interp)
    else:
        rng = random.Random(seed)
        for _ in range(samples):
            interp = dict(fixed)
            for n in symbols:
                interp[n] = random_symbol_interp(rng, sig, n, sizes)
            yield FiniteStructure(sizes, interp)


# ---------------------------------------------------------------------------
# Heights (arithmetic interpretation of ranking trees)


def check_oracle_support(node: RankingNode) -> None:
    """Heights assume single-variable aggregation orders used totally."""
    if isinstance(node, BinNode):
        return
    if isinstance(node, PosNode):
        if len(node.terms) != 1:
            raise OracleUnsupported("position heights need a single tracked term")
        return
    if isinstance(node, (PwNode, LexNode)):
        for c in node.children:
            check_oracle_support(c)
        return
    if isinstance(node, LinNode):
        for _, c in node.branches:
            check_oracle_support(c)
        return
    if isinstance(node, (DomPwNode, DomPermNode)):
        check_oracle_support(node.child)
        return
    if isinstance(node, (DomLexNode, DomLinNode)):
        if len(node.ys) != 1:
            raise OracleUnsupported(
                "lexicographic domain heights need a single aggregation variable")
        check_oracle_support(node.child)
        return
    raise TypeError(f"not a ranking node: {node!r}")


def _order_relation(order: OrderFormula, s: FiniteStructure) -> set[tuple[int, int]]:
    if len(order.lo) != 1:
        raise OracleUnsupported("heights support single-variable orders only")
    n = s.sizes[order.lo[0].sort]
    rel = set()
    for a in range(n):
        for b in range(n):
            if eval_formula(order.body, s, {order.lo[0]: a, order.hi[0]: b}):
                rel.add((a, b))
    return rel


def _require_strict_total(order: OrderFormula, s: FiniteStructure) -> set[tuple[int, int]]:
    rel = _order_relation(order, s)
    n = s.sizes[order.lo[0].sort]
    for a in range(n):
        if (a, a) in rel:
            raise OrderNotTotal("order is not irreflexive")
        for b in range(n):
            if a != b and ((a, b) in rel) == ((b, a) in rel):
                raise OrderNotTotal("order is not total or not asymmetric")
            for c in range(n):
                if (a, b) in rel and (b, c) in rel and (a, c) not in rel:
                    raise OrderNotTotal("order is not transitive")
    return rel


def _order_position(rel: set[tuple[int, int]], n: int, val: int) -> int:
    return sum(1 for e in range(n) if (e, val) in rel)


def height_bound(node: RankingNode, sizes: Mapping[str, int]) -> int:
    if isinstance(node, BinNode):
        return 1
    if isinstance(node, PosNode):
        return sizes[node.order.lo[0].sort] - 1
    if isinstance(node, PwNode):
        return sum(height_bound(c, sizes) for c in node.children)
    if isinstance(node, LexNode):
        prod = 1
        for c in node.children:
            prod *= height_bound(c, sizes) + 1
        return prod - 1
    if isinstance(node, LinNode):
        return sum(height_bound(c, sizes) + 1 for _, c in node.branches) - 1
    if isinstance(node, (DomPwNode, DomPermNode)):
        cells = 1
        for y in node.ys:
            cells *= sizes[y.sort]
        return cells * height_bound(node.child, sizes)
    if isinstance(node, DomLexNode):
        n = sizes[node.ys[0].sort]
        return (height_bound(node.child, sizes) + 1) ** n - 1
    if isinstance(node, DomLinNode):
        n = sizes[node.ys[0].sort]
        return n * (height_bound(node.child, sizes) + 1) - 1
    raise TypeError(f"not a ranking node: {node!r}")


def height(node: RankingNode, s: FiniteStructure, v: Mapping[Var, int]) -> int:
    """Appendix-style numeric rank of an a-structure under a ranking tree."""
    if isinstance(node, BinNode):
        return 1 if eval_formula(node.alpha, s, v) else 0
    if isinstance(node, PosNode):
        rel = _require_strict_total(node.order, s)
        n = s.sizes[node.order.lo[0].sort]
        val = eval_term(node.terms[0], _as_states(s), dict(v))
        return _order_position(rel, n, val)
    if isinstance(node, PwNode):
        return sum(height(c, s, v) for c in node.children)
    if isinstance(node, LexNode):
        bounds = [height_bound(c, s.sizes) for c in node.children]
        total = 0
        for i, c in enumerate(node.children):
            weight = 1
            for hb in bounds[i + 1:]:
                weight *= hb + 1
            total += weight * height(c, s, v)
        return total
    if isinstance(node, LinNode):
        offset = 0
        for guard, c in node.branches:
            if eval_formula(guard, s, v):
                return offset + height(c, s, v)
            offset += height_bound(c, s.sizes) + 1
        return 0  # no branch matched: bottom element
    if isinstance(node, (DomPwNode, DomPermNode)):
        total = 0
        domains = [range(s.sizes[y.sort]) for y in node.ys]
        for combo in itertools.product(*domains):
            inner = dict(v)
            inner.update(dict(zip(node.ys, combo)))
            total += height(node.child, s, inner)
        return total
    if isinstance(node, DomLexNode):
        rel = _require_strict_total(node.order, s)
        y = node.ys[0]
        n = s.sizes[y.sort]
        hb = height_bound(node.child, s.sizes)
        total = 0
        for e in range(n):
            rank = _order_position(rel, n, e)
            inner = dict(v)
            inner[y] = e
            total += (hb + 1) ** (n - 1 - rank) * height(node.child, s, inner)
        return total
    if isinstance(node, DomLinNode):
        rel = _require_strict_total(node.order, s)
        y = node.ys[0]
        n = s.sizes[y.sort]
        hb = height_bound(node.child, s.sizes)
        candidates = []
        for e in range(n):
            inner = dict(v)
            inner[y] = e
            if eval_formula(node.alpha, s, inner):
                candidates.append(e)
        if not candidates:
            return 0  # bottom element of the linear sum
        witness = min(candidates, key=lambda e: _order_position(rel, n, e))
        inner = dict(v)
        inner[y] = witness
        return _order_position(rel, n, witness) * (hb + 1) + height(node.child, s, inner)
    raise TypeError(f"not a ranking node: {node!r}")


# ---------------------------------------------------------------------------
# Ranking soundness (reduction implies height decrease)


@dataclass
class Violation:
    kind: str  # "reduced" or "conserved" or "bound"
    lower: str
    higher: str
    assignment: str
    heights: tuple[int, int]


@dataclass
class SoundnessReport:
    cases: int
    skipped: int
    violations: list[Violation]
    exhaustive: bool
    seed: int

    @property
    def ok(self) -> bool:
        return not self.violations


def _param_assignments(params: Sequence[Var], sizes: Mapping[str, int]) -> list[dict[Var, int]]:
    domains = [range(sizes[p.sort]) for p in params]
    return [dict(zip(params, combo)) for combo in itertools.product(*domains)]


def check_ranking_soundness(ranking: ImplicitRanking, sig: Signature,
                            sizes: Mapping[str, int], budget: int = 10 ** 6,
                            samples: int = 10 ** 4, seed: int = 0,
                            max_violations: int = 5) -> SoundnessReport:
    """Check eval(reduced) => height decrease and eval(conserved) => no
    increase on pairs of structures sharing immutable interpretations."""
    if ranking.node is None:
        raise OracleUnsupported("ranking carries no constructor tree")
    check_oracle_support(ranking.node)
    sizes = dict(sizes)
    imm = [n for n in sig.symbol_names() if not sig.is_mutable(n)]
    mut = [n for n in sig.symbol_names() if sig.is_mutable(n)]
    n_imm = count_structures(sig, sizes, imm)
    n_mut = count_structures(sig, sizes, mut)
    assignments = _param_assignments(ranking.params, sizes)
    total = n_imm * n_mut * n_mut * len(assignments) * len(assignments)
    exhaustive = total <= budget

    def cases() -> Iterator[tuple[FiniteStructure, FiniteStructure, dict, dict]]:
        if exhaustive:
            for scaffold in enumerate_structures(sig, sizes, symbols=imm, budget=budget):
                muts = list(enumerate_structures(sig, sizes, symbols=mut,
                                                 fixed=scaffold.interp, budget=budget))
                for s0 in muts:
                    for s1 in muts:
                        for v0 in assignments:
                            for v1 in assignments:
                                yield s0, s1, v0, v1
        else:
            rng = random.Random(seed)
            for _ in range(samples):
                interp = {n: random_symbol_interp(rng, sig, n, sizes) for n in imm}
                m0 = {n: random_symbol_interp(rng, sig, n, sizes) for n in mut}
                m1 = {n: random_symbol_interp(rng, sig, n, sizes) for n in mut}
                s0 = FiniteStructure(sizes, {**interp, **m0})
                s1 = FiniteStructure(sizes, {**interp, **m1})
                v0 = {p: rng.randrange(sizes[p.sort]) for p in ranking.params}
                v1 = {p: rng.randrange(sizes[p.sort]) for p in ranking.params}
                yield s0, s1, v0, v1

    report = SoundnessReport(0, 0, [], exhaustive, seed)
    bound = height_bound(ranking.node, sizes)
    for s0, s1, v0, v1 in cases():
        try:
            h0 = height(ranking.node, s0, v0)
            h1 = height(ranking.node, s1, v1)
        except OrderNotTotal:
            report.skipped += 1
            continue
        report.cases += 1
        v = {p.with_tag(Tag.SUB0): val for p, val in v0.items()}
        v.update({p.with_tag(Tag.SUB1): val for p, val in v1.items()})
        states = pair_states(s0, s1)

        def witness(kind: str) -> Violation:
            return Violation(kind, format_structure(s0, sig), format_structure(s1, sig),
                             str({p.name: x for p, x in {**v0, **v1}.items()}), (h0, h1))

        if h0 > bound or h1 > bound:
            report.violations.append(witness("bound"))
        if eval_formula(ranking.reduced, states, v) and not h0 < h1:
            report.violations.append(witness("reduced"))
        if eval_formula(ranking.conserved, states, v) and not h0 <= h1:
            report.violations.append(witness("conserved"))
        if len(report.violations) >= max_violations:
            break
    return report


# ---------------------------------------------------------------------------
# Bounded premise checking


@dataclass
class Falsifier:
    pre: str
    post: str


@dataclass
class PremiseCheckReport:
    name: str
    cases: int
    falsifiers: list[Falsifier]
    exhaustive: bool
    seed: int

    @property
    def ok(self) -> bool:
        return not self.falsifiers


def bounded_premise_check(name: str, formula: Formula, sig: Signature,
                          sizes: Mapping[str, int], budget: int = 10 ** 6,
                          samples: int = 10 ** 4, seed: int = 0,
                          max_falsifiers: int = 3) -> PremiseCheckReport:
    """Evaluate a closed two-state premise on explicit structure pairs."""
    sizes = dict(sizes)
    imm = [n for n in sig.symbol_names() if not sig.is_mutable(n)]
    mut = [n for n in sig.symbol_names() if sig.is_mutable(n)]
    n_imm = count_structures(sig, sizes, imm)
    n_mut = count_structures(sig, sizes, mut)
    total = n_imm * n_mut * n_mut
    exhaustive = total <= budget

    def cases() -> Iterator[tuple[FiniteStructure, FiniteStructure]]:
        if exhaustive:
            for scaffold in enumerate_structures(sig, sizes, symbols=imm, budget=budget):
                muts = list(enumerate_structures(sig, sizes, symbols=mut,
                                                 fixed=scaffold.interp, budget=budget))
                for pre in muts:
                    for post in muts:
                        yield pre, post
        else:
            rng = random.Random(seed)
            for _ in range(samples):
                interp = {n: random_symbol_interp(rng, sig, n, sizes) for n in imm}
                m0 = {n: random_symbol_interp(rng, sig, n, sizes) for n in mut}
                m1 = {n: random_symbol_interp(rng, sig, n, sizes) for n in mut}
                yield (FiniteStructure(sizes, {**interp, **m0}),
                       FiniteStructure(sizes, {**interp, **m1}))

    report = PremiseCheckReport(name, 0, [], exhaustive, seed)
    for pre, post in cases():
        report.cases += 1
        if not eval_formula(formula, step_states(pre, post)):
            report.falsifiers.append(
                Falsifier(format_structure(pre, sig), format_structure(post, sig)))
            if len(report.falsifiers) >= max_falsifiers:
                break
    return report


# ---------------------------------------------------------------------------
# Explicit-state fair model checking


@dataclass
class LassoTrace:
    scaffold: str
    stem: list[str]
    cycle: list[str]


@dataclass
class McResult:
    holds: bool
    lasso: Optional[LassoTrace]
    max_steps: Optional[int]  # longest eventually-free path; None when unbounded
    scaffolds: int
    states: int


def _sccs(n: int, adj: list[list[int]]) -> list[list[int]]:
    """Kosaraju strongly connected components, iterative."""
    visited = [False] * n
    order: list[int] = []
    for start in range(n):
        if visited[start]:
            continue
        stack = [(start, 0)]
        visited[start] = True
        while stack:
            node, idx = stack.pop()
            if idx < len(adj[node]):
                stack.append((node, idx + 1))
                nxt = adj[node][idx]
                if not visited[nxt]:
                    visited[nxt] = True
                    stack.append((nxt, 0))
            else:
                order.append(node)
    radj: list[list[int]] = [[] for _ in range(n)]
    for u in range(n):
        for w in adj[u]:
            radj[w].append(u)
    comp = [-1] * n
    comps: list[list[int]] = []
    for start in reversed(order):
        if comp[start] != -1:
            continue
        cid = len(comps)
        comps.append([])
        stack2 = [start]
        comp[start] = cid
        while stack2:
            node = stack2.pop()
            comps[cid].append(node)
            for w in radj[node]:
                if comp[w] == -1:
                    comp[w] = cid
                    stack2.append(w)
    return comps


def _bfs_path(adj: list[list[int]], sources: Sequence[int],
              targets: set[int], allowed: Optional[set[int]] = None) -> Optional[list[int]]:
    """Shortest path from any source to any target; nodes restricted to allowed."""
    prev: dict[int, Optional[int]] = {}
    queue: list[int] = []
    for s in sources:
        if allowed is not None and s not in allowed:
            continue
        if s not in prev:
            prev[s] = None
            queue.append(s)
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        if u in targets:
            path = [u]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            return list(reversed(path))
        for w in adj[u]:
            if allowed is not None and w not in allowed:
                continue
            if w not in prev:
                prev[w] = u
                queue.append(w)
    return None


def find_fair_lasso(n: int, adj: list[list[int]], init: set[int],
                    p_set: set[int], q_set: set[int],
                    fairness_sets: Sequence[set[int]]) -> Optional[tuple[list[int], list[int]]]:
    """A fair lasso violating always(p -> eventually q), or None.

    The lasso's cycle avoids q and meets every fairness set; the stem starts
    in an initial state and passes through a p-state after which q never
    holds.  Returns (stem including the cycle entry, cycle as a closed walk).
    """
    reach = _bfs_reachable(adj, init)
    not_q = {u for u in range(n) if u not in q_set}
    sub = [[w for w in adj[u] if w in not_q] if u in not_q else [] for u in range(n)]
    comps = [set(c) for c in _sccs(n, sub)]
    fair_states: set[int] = set()
    for comp in comps:
        if not comp <= not_q:
            continue
        cycle_supporting = len(comp) > 1 or any(u in sub[u] for u in comp)
        if cycle_supporting and all(comp & f for f in fairness_sets):
            fair_states |= comp
    candidates = sorted(u for u in reach if u in p_set and u in not_q)
    for u in candidates:
        path = _bfs_path(sub, [u], fair_states, allowed=not_q)
        if path is None:
            continue
        stem_prefix = _bfs_path(adj, sorted(init), {u})
        assert stem_prefix is not None  # u is reachable
        entry = path[-1]
        comp = next(c for c in comps if entry in c)
        cycle = _fair_cycle(sub, entry, comp, fairness_sets)
        return stem_prefix[:-1] + path, cycle
    return None


def _bfs_reachable(adj: list[list[int]], init: set[int]) -> set[int]:
    seen = set(init)
    queue = sorted(init)
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return seen


def _fair_cycle(adj: list[list[int]], entry: int, comp: set[int],
                fairness_sets: Sequence[set[int]]) -> list[int]:
    """A closed walk entry -> ... -> entry through every fairness set."""
    walk = [entry]
    for f in fairness_sets:
        if set(walk) & f:
            continue
        leg = _bfs_path(adj, [walk[-1]], f & comp, allowed=comp)
        assert leg is not None  # the SCC intersects every fairness set
        walk.extend(leg[1:])
    if walk[-1] == entry and len(walk) > 1:
        return walk
    if len(walk) == 1:
        # force one real step before closing the cycle
        for w in sorted(adj[entry]):
            if w not in comp:
                continue
            ret = _bfs_path(adj, [w], {entry}, allowed=comp)
            if ret is not None:
                return [entry] + ret
        raise AssertionError("no cycle through a cycle-supporting SCC")
    back = _bfs_path(adj, [walk[-1]], {entry}, allowed=comp)
    assert back is not None
    return walk + back[1:]


def longest_qfree_path(adj: list[list[int]], starts: Sequence[int],
                       q_set: set[int]) -> Optional[int]:
    """Longest number of steps before first q along any path from starts.

    None when a q-free cycle is reachable (unbounded without fairness).
    """
    memo: dict[int, Optional[int]] = {}
    onstack: set[int] = set()

    def visit(u: int) -> Optional[int]:
        if u in q_set:
            return 0
        if u in memo:
            return memo[u]
        if u in onstack:
            return None
        onstack.add(u)
        best = 0
        for w in adj[u]:
            if w in q_set:
                sub = 1
            else:
                rec = visit(w)
                if rec is None:
                    onstack.discard(u)
                    return None
                sub = 1 + rec
            best = max(best, sub)
        onstack.discard(u)
        memo[u] = best
        return best

    worst = 0
    for s in starts:
        if s in q_set:
            continue
        res = visit(s)
        if res is None:
            return None
        worst = max(worst, res)
    return worst


def model_check_liveness(problem, sizes: Mapping[str, int], budget: int = 10 ** 6,
                         fixed: Optional[Mapping[str, object]] = None) -> McResult:
    """Explicit fair-lasso check of the liveness property at fixed sizes.

    Builds, per interpretation of the immutable symbols, the transition
    graph over mutable-symbol valuations that satisfy the axioms, and
    searches for a fair lasso violating the property.  When the property
    holds, also reports the longest path to the goal from any trigger
    state (None when such paths are unbounded without fairness).
    """
    sig = problem.sig
    sizes = dict(sizes)
    fixed = dict(fixed) if fixed else {}
    imm = [n for n in sig.symbol_names() if not sig.is_mutable(n) and n not in fixed]
    mut = [n for n in sig.symbol_names() if sig.is_mutable(n)]
    n_imm = count_structures(sig, sizes, imm)
    n_mut = count_structures(sig, sizes, mut)
    if n_mut * n_mut > budget or n_imm > budget:
        raise BudgetExceeded(
            f"{n_imm} scaffolds with {n_mut}^2 transitions each exceed the "
            f"budget of {budget}")

    imm_names = {n for n in sig.symbol_names() if not sig.is_mutable(n)}
    scaffold_axioms = [ax for ax in problem.system.axioms
                       if all(name in imm_names for name, _ in symbol_occurrences(ax))]
    state_axioms = [ax for ax in problem.system.axioms if ax not in scaffold_axioms]
    prop = problem.liveness
    scaffolds = 0
    states_total = 0
    max_steps: Optional[int] = 0
    for scaffold in enumerate_structures(sig, sizes, symbols=imm, fixed=fixed,
                                         budget=budget, exhaustive=True):
        if not all(eval_formula(ax, scaffold) for ax in scaffold_axioms):
            continue
        states = [s for s in enumerate_structures(sig, sizes, symbols=mut,
                                                  fixed=scaffold.interp,
                                                  budget=budget, exhaustive=True)
                  if all(eval_formula(ax, s) for ax in state_axioms)]
        if not states:
            continue
        scaffolds += 1
        states_total += len(states)
        n = len(states)
        adj: list[list[int]] = []
        for s_pre in states:
            row = [j for j, s_post in enumerate(states)
                   if eval_formula(problem.system.trans, step_states(s_pre, s_post))]
            adj.append(row)
        init = {i for i, s in enumerate(states)
                if eval_formula(problem.system.init, s)}
        p_set = {i for i, s in enumerate(states) if eval_formula(prop.p, s)}
        q_set = {i for i, s in enumerate(states) if eval_formula(prop.q, s)}
        fairness_sets: list[set[int]] = []
        for fc in prop.fairness:
            domains = [range(sizes[v.sort]) for v in fc.params]
            for combo in itertools.product(*domains):
                asg = dict(zip(fc.params, combo))
                fairness_sets.append(
                    {i for i, s in enumerate(states)
                     if eval_formula(fc.formula, s, asg)})
        found = find_fair_lasso(n, adj, init, p_set, q_set, fairness_sets)
        if found is not None:
            stem, cycle = found
            trace = LassoTrace(
                scaffold=format_structure(scaffold, sig),
                stem=[format_structure(states[i], sig) for i in stem],
                cycle=[format_structure(states[i], sig) for i in cycle])
            return McResult(False, trace, None, scaffolds, states_total)
        if max_steps is not None:
            reach = _bfs_reachable(adj, init)
            starts = sorted(u for u in reach if u in p_set)
            steps = longest_qfree_path(adj, starts, q_set)
            max_steps = None if steps is None else max(max_steps, steps)
    return McResult(True, None, max_steps, scaffolds, states_total)
