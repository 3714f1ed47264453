"""Proof obligations of the generalized ranking proof rule.

Eight premise families: invariant initiation and consecution, trigger
establishment and stability, rank conservation, existence of a helpful
fairness constraint, helpful stability, and rank reduction on helpful
fairness visits.  Background axioms are conjoined into every antecedent,
on both state copies for two-state premises.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fol import (
    Formula, Signature, Tag, free_vars, is_closed, mk_and, mk_exists,
    mk_forall, mk_implies, mk_not, retag, sorted_vars,
)
from .problem import Problem
from .ranking import ImplicitRanking, NotClosed


@dataclass(frozen=True)
class ProofObligation:
    name: str
    formula: Formula  # closed, over the plain and primed signature copies
    provenance: int   # premise family 1..8


def rule_formulas(ranking: ImplicitRanking, sig: Signature) -> tuple[Formula, Formula]:
    """The ranking pair rephrased for transitions: lower copy becomes the
    post-state (primed) and higher copy the pre-state (plain)."""
    out = []
    for f in (ranking.conserved, ranking.reduced):
        f = retag(f, Tag.SUB0, Tag.PRIMED, sig)
        f = retag(f, Tag.SUB1, Tag.PLAIN, sig)
        out.append(f)
    return out[0], out[1]


def generate_premises(problem: Problem, ranking: ImplicitRanking) -> list[ProofObligation]:
    if ranking.params:
        raise NotClosed(
            "proofs need a closed ranking; parameters left open: "
            f"{[v.name for v in ranking.params]}")
    sig = problem.sig
    sys_ = problem.system
    prop = problem.liveness
    proof = problem.proof

    def primed(f: Formula) -> Formula:
        return retag(f, Tag.PLAIN, Tag.PRIMED, sig)

    ax_pre = mk_and(*sys_.axioms)
    ax_post = primed(ax_pre)
    ax_both = ax_pre if ax_post == ax_pre else mk_and(ax_pre, ax_post)
    rho, phi = proof.rho, proof.trigger
    p, q, tau = prop.p, prop.q, sys_.trans
    not_q_post = mk_not(primed(q))
    tilde_leq, tilde_lt = rule_formulas(ranking, sig)

    obs = [
        ProofObligation("init", mk_implies(mk_and(ax_pre, sys_.init), rho), 1),
        ProofObligation("consec", mk_implies(mk_and(ax_both, rho, tau), primed(rho)), 2),
        ProofObligation("trigger", mk_implies(mk_and(ax_pre, rho, p, mk_not(q)), phi), 3),
        ProofObligation("stability",
                        mk_implies(mk_and(ax_both, phi, tau, not_q_post), primed(phi)), 4),
        ProofObligation("conserved",
                        mk_implies(mk_and(ax_both, phi, tau, not_q_post), tilde_leq), 5),
        ProofObligation("helpful-exists",
                        mk_implies(mk_and(ax_pre, phi),
                                   mk_exists_any(problem)), 6),
    ]
    for fc in prop.fairness:
        psi = proof.helpful[fc.name]
        body = mk_implies(
            mk_and(ax_both, phi, tau, not_q_post, psi, mk_not(fc.formula)),
            primed(psi))
        obs.append(ProofObligation(f"psi-stability@{fc.name}",
                                   mk_forall(fc.params, body), 7))
    for fc in prop.fairness:
        psi = proof.helpful[fc.name]
        body = mk_implies(
            mk_and(ax_both, phi, tau, not_q_post, psi, fc.formula),
            tilde_lt)
        obs.append(ProofObligation(f"reduced@{fc.name}",
                                   mk_forall(fc.params, body), 8))

    for ob in obs:
        if not is_closed(ob.formula):
            stray = ", ".join(v.name for v in sorted_vars(free_vars(ob.formula)))
            raise NotClosed(f"obligation {ob.name} is not closed; free: {stray}")
    return obs


def mk_exists_any(problem: Problem) -> Formula:
    """Some helpful formula holds for some parameter assignment."""
    from .fol import mk_or
    disjuncts = []
    for fc in problem.liveness.fairness:
        psi = problem.proof.helpful[fc.name]
        disjuncts.append(mk_exists(fc.params, psi))
    return mk_or(*disjuncts)


def premise_negation(ob: ProofObligation) -> Formula:
    """The formula whose unsatisfiability establishes the obligation."""
    return mk_not(ob.formula)
