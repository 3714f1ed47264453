import pytest

from liverank.fol import FALSE, TRUE, Var, free_vars, mk_and
from liverank.problem import (
    DEFAULT_FAIRNESS_NAME, Diagnostic, ParseError, Problem, SortError,
    parse_problem, parse_problem_file, unparse, validate_problem,
)
from liverank.ranking import BadHintPath, DomPermNode, DomPwNode
from conftest import ALL_BENCHMARKS, bench_path

MINIMAL = """
(sort node :finite)
(constant c node :mutable)
(relation r (node) :mutable)
(transition (forall ((x node)) (iff (r' x) (r x))))
(property :q (r c))
(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))
"""


def test_parse_toy_counts():
    p = parse_problem_file(bench_path("toy_stab"))
    sig = p.sig
    assert list(sig.sorts) == ["machine"]
    assert sig.symbol_names() == ["bot", "skd", "next", "priv", "lt"]
    assert sig.is_mutable("skd") and sig.is_mutable("priv")
    assert not sig.is_mutable("lt")
    assert [f.name for f in p.liveness.fairness] == ["fair"]
    assert len(p.system.axioms) == 6
    assert isinstance(p.proof.ranking.root, DomPermNode)
    assert isinstance(p.proof.ranking.root.child, DomPwNode)


def test_fairness_defaults_to_always_eventually_true():
    p = parse_problem(MINIMAL)
    assert len(p.liveness.fairness) == 1
    fc = p.liveness.fairness[0]
    assert fc.name == DEFAULT_FAIRNESS_NAME
    assert fc.params == ()
    assert fc.formula == TRUE
    assert p.proof.helpful[fc.name] == TRUE
    assert p.liveness.p == TRUE
    assert p.proof.rho == TRUE


def test_undeclared_sort_is_error():
    bad = MINIMAL.replace("(constant c node :mutable)",
                          "(constant c machine :mutable)")
    with pytest.raises(SortError):
        parse_problem(bad)


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse_problem("(sort node)\n(bogus form)\n")
    assert exc.value.line == 2


def test_primed_outside_transition_rejected():
    bad = MINIMAL + "(axiom (r' c))\n"
    with pytest.raises(ParseError):
        parse_problem(bad)


def test_primed_immutable_rejected():
    bad = MINIMAL.replace("(relation r (node) :mutable)",
                          "(relation r (node) :immutable)")
    with pytest.raises(ParseError):
        parse_problem(bad)


def test_missing_q_rejected():
    bad = MINIMAL.replace("(property :q (r c))", "")
    with pytest.raises(ParseError):
        parse_problem(bad)


def test_duplicate_transition_rejected():
    bad = MINIMAL + "(transition true)\n"
    with pytest.raises(ParseError):
        parse_problem(bad)


@pytest.mark.parametrize("name", ALL_BENCHMARKS + ["broken_toy_stab"])
def test_roundtrip_all_benchmarks(name):
    p1 = parse_problem_file(bench_path(name))
    text = unparse(p1)
    p2 = parse_problem(text)
    assert p2.system.init == p1.system.init
    assert p2.system.trans == p1.system.trans
    assert p2.system.axioms == p1.system.axioms
    assert p2.liveness == p1.liveness
    assert p2.proof.rho == p1.proof.rho
    assert p2.proof.trigger == p1.proof.trigger
    assert p2.proof.helpful == p1.proof.helpful
    assert p2.proof.ranking.root == p1.proof.ranking.root
    assert p2.proof.ranking.hints == p1.proof.ranking.hints
    assert p2.slow == p1.slow
    assert unparse(p2) == text


@pytest.mark.parametrize("name", ALL_BENCHMARKS)
def test_all_benchmarks_validate_cleanly(name):
    p = parse_problem_file(bench_path(name))
    diags = validate_problem(p)
    assert [d for d in diags if d.severity == "error"] == []
    assert [d for d in diags if d.severity == "warning"] == []


def test_finite_domain_over_unflagged_sort_warns():
    text = MINIMAL.replace("(sort node :finite)", "(sort node)")
    p = parse_problem(text)
    diags = validate_problem(p)
    assert any(d.severity == "warning" and "finite" in d.message for d in diags)
    strict = validate_problem(p, strict_finite=True)
    assert any(d.severity == "error" and "finite" in d.message for d in strict)


def test_helpful_with_stray_free_variable_diagnosed():
    p = parse_problem(MINIMAL)
    from liverank.fol import Atom
    bad_psi = Atom("r", (Var("z", "node"),))
    proof = p.proof
    hacked = Problem(
        p.system, p.liveness,
        type(proof)(proof.rho, proof.trigger,
                    {DEFAULT_FAIRNESS_NAME: bad_psi}, proof.ranking),
        p.slow)
    diags = validate_problem(hacked)
    assert any("helpful" in d.message and d.severity == "error" for d in diags)


def test_helpful_params_must_match_fairness():
    text = MINIMAL + "(fairness go ((x node)) (r x))\n(helpful go ((y node)) (r y))\n"
    with pytest.raises(ParseError):
        parse_problem(text)


def test_hint_path_must_address_existential_node():
    text = MINIMAL.replace(
        "(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))",
        "(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))\n"
        "(hint (path 0) ((c)))")
    p = parse_problem(text)
    diags = validate_problem(p)
    assert any("hint" in d.message or "existential" in d.message
               for d in diags if d.severity == "error")


def test_hint_path_outside_tree():
    text = MINIMAL + "(hint (path 3 1) ((c)))\n"
    with pytest.raises(BadHintPath):
        parse_problem(text)


def test_open_ranking_root_diagnosed():
    text = MINIMAL.replace(
        "(ranking (dom-pw ((x node)) (bin (r x) ((x node)))))",
        "(ranking (bin (r x) ((x node))))")
    p = parse_problem(text)
    diags = validate_problem(p)
    assert any("closed" in d.message for d in diags if d.severity == "error")


def test_unknown_constructor():
    text = MINIMAL.replace("dom-pw ((x node))", "dom-everything ((x node))")
    with pytest.raises(ParseError):
        parse_problem(text)


def test_formula_ite_desugars():
    text = MINIMAL.replace("(property :q (r c))",
                           "(property :q (ite (r c) (r c) (not (r c))))")
    p = parse_problem(text)
    # (ite f g h) with formula branches becomes (f and g) or (not f and h)
    from liverank.fol import Or
    assert isinstance(p.liveness.q, Or)
