import itertools
import random

import pytest

from liverank.fol import (
    App, Atom, Signature, Tag, TRUE, Var, mk_and, mk_eq, mk_exists, mk_forall,
    mk_implies, mk_not, mk_or, retag,
)
from liverank.oracle import (
    BudgetExceeded, FiniteStructure, LassoTrace, OracleUnsupported,
    bounded_premise_check, check_oracle_support, check_ranking_soundness,
    count_structures, enumerate_structures, eval_formula, find_fair_lasso,
    height, height_bound, longest_qfree_path, model_check_liveness,
    pair_states, step_states,
)
from liverank.problem import parse_problem, parse_problem_file
from liverank.ranking import ImplicitRanking, elaborate
from liverank.vcgen import generate_premises, rule_formulas
from conftest import bench_path, EASY_BENCHMARKS

M = lambda n: Var(n, "machine")

CANONICAL_RING_3 = {
    "lt": frozenset({(0, 1), (0, 2), (1, 2)}),
    "bot": 0,
    "next": {(0,): 1, (1,): 2, (2,): 0},
}
CANONICAL_RING_2 = {
    "lt": frozenset({(0, 1)}),
    "bot": 0,
    "next": {(0,): 1, (1,): 0},
}


def toy():
    return parse_problem_file(bench_path("toy_stab"))


def toy_state(priv, skd, n=3):
    ring = CANONICAL_RING_3 if n == 3 else CANONICAL_RING_2
    return FiniteStructure({"machine": n}, dict(
        ring, priv=frozenset((i,) for i in priv), skd=skd))


# ---------------------------------------------------------------------------
# Evaluation


def test_eval_exists():
    p = toy()
    f = mk_exists((M("m"),), Atom("priv", (M("m"),)))
    assert eval_formula(f, toy_state({0}, 1))
    assert not eval_formula(f, toy_state(set(), 1))


def test_eval_order_axioms_hold_on_ring():
    p = toy()
    s = toy_state({1}, 1)
    for ax in p.system.axioms:
        assert eval_formula(ax, s)


def test_eval_hinted_reduction_on_transition_pair():
    # apply the transition at skd=1 by hand and check the two-state
    # reduction formula used by the proof rule
    p = toy()
    ranking = elaborate(p.proof.ranking.root, p.sig,
                        hints=p.proof.ranking.hints)
    _, tilde_lt = rule_formulas(ranking, p.sig)
    pre = toy_state({1, 2}, 1)
    post = toy_state({2}, 2)  # 1 fires: loses the privilege, 2 gains it
    assert eval_formula(tilde_lt, step_states(post, pre) | {Tag.PLAIN: pre,
                                                            Tag.PRIMED: post})
    assert eval_formula(p.system.trans, step_states(pre, post))
    assert eval_formula(tilde_lt, step_states(pre, post))


def test_eval_missing_assignment():
    from liverank.oracle import MissingAssignment
    with pytest.raises(MissingAssignment):
        eval_formula(Atom("priv", (M("i"),)), toy_state(set(), 0))


# ---------------------------------------------------------------------------
# Enumeration


def test_enumerate_single_unary_relation():
    sig = Signature()
    sig.declare_sort("s")
    sig.declare_relation("r", ("s",))
    out = list(enumerate_structures(sig, {"s": 2}))
    assert len(out) == 4
    assert count_structures(sig, {"s": 2}) == 4


def test_enumerate_toy_with_fixed_ring():
    p = toy()
    out = list(enumerate_structures(p.sig, {"machine": 2},
                                    fixed=CANONICAL_RING_2))
    assert len(out) == 8  # priv choices x skd choices


def test_enumerate_sampling_mode():
    sig = Signature()
    sig.declare_sort("s")
    sig.declare_relation("r", ("s", "s"))
    sig.declare_relation("t", ("s", "s"))
    run1 = list(enumerate_structures(sig, {"s": 3}, budget=10, samples=7, seed=3))
    run2 = list(enumerate_structures(sig, {"s": 3}, budget=10, samples=7, seed=3))
    assert len(run1) == 7
    assert [s.interp for s in run1] == [s.interp for s in run2]
    with pytest.raises(BudgetExceeded):
        list(enumerate_structures(sig, {"s": 3}, budget=10, exhaustive=True))


# ---------------------------------------------------------------------------
# Heights


def test_toy_height_is_weighted_privilege_sum():
    p = toy()
    node = p.proof.ranking.root
    assert height_bound(node, {"machine": 3}) == 9
    # machine i contributes |{j : j >= i}| when privileged and not bot
    assert height(node, toy_state({1, 2}, 1), {}) == 2 + 1
    assert height(node, toy_state({1}, 1), {}) == 2
    assert height(node, toy_state({0}, 0), {}) == 0


def test_counter_height_bound():
    p = parse_problem_file(bench_path("binary_counter"))
    assert height_bound(p.proof.ranking.root, {"index": 3}) == 3 * 2 ** 3 - 1
    assert height_bound(p.proof.ranking.root, {"index": 2}) == 2 * 2 ** 2 - 1


def test_multi_variable_dom_lex_unsupported():
    p = parse_problem_file(bench_path("leader_ring"))
    with pytest.raises(OracleUnsupported):
        check_oracle_support(p.proof.ranking.root)


# ---------------------------------------------------------------------------
# Ranking soundness


def swap_bin_tags(r: ImplicitRanking, sig) -> ImplicitRanking:
    """Swap the two copies in the ranking formulas, keeping the heights."""
    def swap(f):
        f = retag(f, Tag.SUB0, Tag.PRIMED, sig)
        f = retag(f, Tag.SUB1, Tag.SUB0, sig)
        return retag(f, Tag.PRIMED, Tag.SUB1, sig)
    return ImplicitRanking(r.params, swap(r.conserved), swap(r.reduced),
                           r.finite_domain, r.node)


def test_soundness_toy_exhaustive_size_2():
    p = toy()
    r = elaborate(p.proof.ranking.root, p.sig, hints=p.proof.ranking.hints)
    report = check_ranking_soundness(r, p.sig, {"machine": 2})
    assert report.exhaustive
    assert report.cases > 0
    assert report.ok


def test_soundness_sampled_benchmarks_size_3():
    for name in EASY_BENCHMARKS:
        p = parse_problem_file(bench_path(name))
        try:
            r = elaborate(p.proof.ranking.root, p.sig,
                          hints=p.proof.ranking.hints)
            report = check_ranking_soundness(
                r, p.sig, {s: 3 for s in p.sig.sorts}, samples=400, seed=1)
        except OracleUnsupported:
            continue
        assert report.ok, (name, report.violations[:1])


def test_inverted_bin_violates_at_size_1():
    sig = Signature()
    sig.declare_sort("s", finite=True)
    sig.declare_relation("flag", (), mutable=True)
    from liverank.ranking import bin_rank
    good = bin_rank(Atom("flag", ()), (), sig)
    bad = swap_bin_tags(good, sig)
    report = check_ranking_soundness(bad, sig, {"s": 1})
    assert report.exhaustive
    assert any(v.kind == "reduced" for v in report.violations)
    clean = check_ranking_soundness(good, sig, {"s": 1})
    assert clean.ok


def test_dom_perm_k0_matches_dom_pw_in_soundness():
    sig = Signature()
    sig.declare_sort("s", finite=True)
    sig.declare_relation("r", ("s",), mutable=True)
    from liverank.ranking import bin_rank, dom_perm, dom_pw
    x = Var("x", "s")
    base = bin_rank(Atom("r", (x,)), (x,), sig)
    a = dom_pw(base, (x,), sig)
    b = dom_perm(base, (x,), 0, sig)
    for s0, s1 in itertools.product(
            enumerate_structures(sig, {"s": 2}), repeat=2):
        states = pair_states(s0, s1)
        assert (eval_formula(a.reduced, states)
                == eval_formula(b.reduced, states))
        assert (eval_formula(a.conserved, states)
                == eval_formula(b.conserved, states))


# ---------------------------------------------------------------------------
# Bounded premise checking


def test_bounded_check_valid_premise():
    p = toy()
    r = elaborate(p.proof.ranking.root, p.sig, hints=p.proof.ranking.hints)
    obs = {ob.name: ob for ob in generate_premises(p, r)}
    report = bounded_premise_check("conserved", obs["conserved"].formula,
                                   p.sig, {"machine": 2})
    assert report.exhaustive and report.ok and report.cases > 0


def test_bounded_check_finds_falsifier_for_mutation():
    p = parse_problem_file(bench_path("broken_toy_stab"))
    r = elaborate(p.proof.ranking.root, p.sig, hints=p.proof.ranking.hints)
    obs = {ob.name: ob for ob in generate_premises(p, r)}
    report = bounded_premise_check("reduced@fair", obs["reduced@fair"].formula,
                                   p.sig, {"machine": 2})
    assert not report.ok
    assert report.falsifiers[0].pre and report.falsifiers[0].post


def test_bounded_check_works_without_finite_flag():
    text = """
(sort node)
(constant c node :mutable)
(relation r (node) :mutable)
(transition (and (forall ((x node)) (iff (r' x) (r x)))))
(property :q (r c))
(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))
"""
    p = parse_problem(text)
    from liverank.problem import validate_problem
    assert any(d.severity == "warning" for d in validate_problem(p))
    r = elaborate(p.proof.ranking.root, p.sig)
    obs = generate_premises(p, r)
    report = bounded_premise_check(obs[0].name, obs[0].formula, p.sig, {"node": 2})
    assert report.cases > 0


# ---------------------------------------------------------------------------
# Fair-lasso search on explicit graphs


def brute_force_violation(n, adj, init, p_set, q_set, fairness_sets):
    """Product-automaton reference: a counter tracks the next awaited
    fairness set; a lasso exists iff some counter-wrap edge lies on a cycle
    reachable from a trigger state through eventually-free territory."""
    m = len(fairness_sets)
    not_q = set(range(n)) - q_set

    def advance(i, w):
        wrapped = False
        while w in fairness_sets[i]:
            i += 1
            if i == m:
                i = 0
                wrapped = True
                break
        return i, wrapped

    # product reachability from (u, 0) for every candidate u
    reach_full = set(init)
    frontier = list(init)
    while frontier:
        v = frontier.pop()
        for w in adj[v]:
            if w not in reach_full:
                reach_full.add(w)
                frontier.append(w)
    candidates = [u for u in sorted(reach_full) if u in p_set and u in not_q]

    for u in candidates:
        seen = {(u, 0)}
        frontier = [(u, 0)]
        edges = []
        while frontier:
            v, i = frontier.pop()
            for w in adj[v]:
                if w not in not_q:
                    continue
                j, wrapped = advance(i, w)
                edges.append(((v, i), (w, j), wrapped))
                if (w, j) not in seen:
                    seen.add((w, j))
                    frontier.append((w, j))
        # wrap edge on a cycle: target reaches source again
        for (src, dst, wrapped) in edges:
            if not wrapped:
                continue
            stack, visited = [dst], {dst}
            while stack:
                x = stack.pop()
                if x == src:
                    return True
                v, i = x
                for w in adj[v]:
                    if w not in not_q:
                        continue
                    j, _ = advance(i, w)
                    if (w, j) not in visited:
                        visited.add((w, j))
                        stack.append((w, j))
    return False


def check_lasso_witness(n, adj, init, p_set, q_set, fairness_sets, stem, cycle):
    assert stem[0] in init
    assert cycle[0] == stem[-1] and cycle[-1] == cycle[0] and len(cycle) > 1
    walk = stem + cycle[1:]
    for a, b in zip(walk, walk[1:]):
        assert b in adj[a], (a, b)
    assert not set(cycle) & q_set
    for f in fairness_sets:
        assert set(cycle) & f
    # some p-state on the stem sees no q afterwards
    ok = False
    for k, v in enumerate(stem):
        if v in p_set and not any(w in q_set for w in stem[k:]):
            ok = True
    assert ok


def test_fair_lasso_cross_validation_random_graphs():
    rng = random.Random(2024)
    for trial in range(20):
        n = rng.choice([3, 3, 4, 5])
        adj = [[w for w in range(n) if rng.random() < 0.45] for _ in range(n)]
        init = {rng.randrange(n)}
        p_set = {v for v in range(n) if rng.random() < 0.6}
        q_set = {v for v in range(n) if rng.random() < 0.3}
        fairness_sets = [{v for v in range(n) if rng.random() < 0.5}
                         for _ in range(rng.choice([1, 2]))]
        found = find_fair_lasso(n, adj, init, p_set, q_set, fairness_sets)
        expected = brute_force_violation(n, adj, init, p_set, q_set, fairness_sets)
        assert (found is not None) == expected, (trial, adj, init, p_set, q_set,
                                                 fairness_sets)
        if found is not None:
            stem, cycle = found
            check_lasso_witness(n, adj, init, p_set, q_set, fairness_sets,
                                stem, cycle)


def test_longest_qfree_path():
    adj = [[1], [2], [3], []]
    assert longest_qfree_path(adj, [0], {3}) == 3
    assert longest_qfree_path(adj, [0], {1}) == 1
    loop = [[1], [0]]
    assert longest_qfree_path(loop, [0], set()) is None


# ---------------------------------------------------------------------------
# Model checking liveness


def test_mc_toy_holds_with_bounded_steps():
    p = toy()
    res = model_check_liveness(p, {"machine": 3})
    assert res.holds and res.lasso is None
    assert res.max_steps is not None and res.max_steps <= 9
    res2 = model_check_liveness(p, {"machine": 2})
    assert res2.holds and res2.max_steps <= 4


def test_mc_counter_holds_with_bounded_steps():
    p = parse_problem_file(bench_path("binary_counter"))
    res = model_check_liveness(p, {"index": 3})
    assert res.holds and res.max_steps <= 3 * 2 ** 3 - 1
    res2 = model_check_liveness(p, {"index": 2})
    assert res2.holds and res2.max_steps <= 2 * 2 ** 2 - 1


def test_mc_finds_lasso_for_stutterer():
    text = """
(sort node :finite)
(constant c node :immutable)
(relation r (node) :mutable)
(init (not (r c)))
(transition (forall ((x node)) (iff (r' x) (r x))))
(property :q (r c))
(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))
"""
    p = parse_problem(text)
    res = model_check_liveness(p, {"node": 1})
    assert not res.holds
    assert isinstance(res.lasso, LassoTrace)
    assert res.lasso.cycle[0] == res.lasso.cycle[-1]


def test_mc_budget_exceeded():
    p = parse_problem_file(bench_path("leader_ring"))
    with pytest.raises(BudgetExceeded):
        model_check_liveness(p, {"node": 3, "id": 3}, budget=10 ** 4)


def test_mc_height_monotone_along_trigger_region():
    # premises 5 and 8 mirrored on the explicit graph: within the trigger
    # region the rank never grows, and every fair step shrinks it
    p = toy()
    node = p.proof.ranking.root
    states = [toy_state(set(priv), skd)
              for priv in _powerset(range(3)) for skd in range(3)]
    trans, trigger, q = p.system.trans, p.proof.trigger, p.liveness.q
    checked = 0
    for pre in states:
        if not eval_formula(trigger, pre):
            continue
        for post in states:
            if not eval_formula(trans, step_states(pre, post)):
                continue
            if eval_formula(q, post):
                continue
            h_pre, h_post = height(node, pre, {}), height(node, post, {})
            assert h_post < h_pre  # the single fairness fires on every step
            assert h_post <= height_bound(node, {"machine": 3})
            checked += 1
    assert checked > 10


def _powerset(xs):
    xs = list(xs)
    for mask in range(2 ** len(xs)):
        yield {x for i, x in enumerate(xs) if mask >> i & 1}
