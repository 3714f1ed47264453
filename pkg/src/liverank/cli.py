"""Command-line front end.

Modes: verify (generate premises and discharge through the solver), oracle
(finite-domain soundness and premise checks), mc (explicit-state liveness
check), emit (write solver scripts only).  Exit codes: 0 verified/holds,
1 refuted, 2 unknown or timeout, 3 input error.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from .fol import FolError
from .oracle import (
    BudgetExceeded, OracleUnsupported, bounded_premise_check,
    check_ranking_soundness, model_check_liveness,
)
from .problem import Problem, parse_problem, validate_problem
from .ranking import elaborate
from .report import RunReport, content_hash
from .smt import SolverConfig, discharge_all, emit_query, solver_identity
from .vcgen import generate_premises

EXIT_OK = 0
EXIT_REFUTED = 1
EXIT_UNKNOWN = 2
EXIT_INPUT = 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="liverank",
        description="Deductive liveness verification via implicit rankings")
    ap.add_argument("mode", choices=["verify", "oracle", "mc", "emit"])
    ap.add_argument("file", help="problem file")
    ap.add_argument("--solver", help="solver executable path")
    ap.add_argument("--timeout", type=float, default=60.0,
                    help="per-obligation solver timeout in seconds")
    ap.add_argument("--jobs", type=int, default=1, help="parallel solver processes")
    ap.add_argument("--premise", action="append", default=None,
                    help="restrict to the named obligation(s)")
    ap.add_argument("--emit-smt", metavar="DIR", help="write solver scripts to DIR")
    ap.add_argument("--size", action="append", default=[], metavar="SORT=N",
                    help="domain size for oracle/mc modes (repeatable)")
    ap.add_argument("--samples", type=int, default=10 ** 4,
                    help="sample count when enumeration exceeds the budget")
    ap.add_argument("--seed", type=int, default=0, help="sampling seed")
    ap.add_argument("--budget", type=int, default=10 ** 6,
                    help="exhaustive enumeration budget")
    ap.add_argument("--strict-finite", action="store_true",
                    help="treat missing :finite declarations as errors")
    ap.add_argument("--strict-perm", action="store_true",
                    help="add the fourth distinctness constraint family to "
                         "permuted-pointwise rankings")
    ap.add_argument("--report", metavar="PATH", help="write a JSON run report")
    return ap


def _parse_sizes(problem: Problem, args) -> dict[str, int]:
    sizes = {name: 2 for name in problem.sig.sorts}
    for spec in args.size:
        if "=" not in spec:
            raise FolError(f"bad --size {spec!r}, expected SORT=N")
        name, _, num = spec.partition("=")
        if name not in problem.sig.sorts:
            raise FolError(f"--size names undeclared sort {name!r}")
        sizes[name] = int(num)
    return sizes


def _load(args) -> tuple[Problem, str]:
    with open(args.file, "r", encoding="utf-8") as fh:
        text = fh.read()
    problem = parse_problem(text)
    diagnostics = validate_problem(problem, strict_finite=args.strict_finite)
    for d in diagnostics:
        print(str(d), file=sys.stderr)
    if any(d.severity == "error" for d in diagnostics):
        raise FolError("problem has validation errors")
    return problem, text


def _write_scripts(directory: str, obligations, sig, cfg: SolverConfig) -> None:
    os.makedirs(directory, exist_ok=True)
    for i, ob in enumerate(obligations):
        path = os.path.join(directory, f"{i:02d}-{ob.name.replace('@', '-')}.smt2")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(emit_query(ob, sig, cfg))


def _finish(report: RunReport, args) -> int:
    print(report.to_text(), end="")
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    return report.exit_code


def run(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem, text = _load(args)
    except (FolError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    report = RunReport(problem=os.path.basename(args.file),
                       sha256=content_hash(text), mode=args.mode)
    try:
        ranking = elaborate(problem.proof.ranking.root, problem.sig,
                            hints=problem.proof.ranking.hints,
                            strict_distinct=args.strict_perm,
                            require_closed=True)
        obligations = generate_premises(problem, ranking)
        if args.premise:
            chosen = set(args.premise)
            obligations = [ob for ob in obligations if ob.name in chosen]
            missing = chosen - {ob.name for ob in obligations}
            if missing:
                raise FolError(f"no such premise: {sorted(missing)}")
    except FolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    cfg_kwargs = {"timeout": args.timeout}
    if args.solver:
        cfg_kwargs["solver_path"] = args.solver
    cfg = SolverConfig(**cfg_kwargs)

    if args.mode == "emit":
        directory = args.emit_smt or "smt-scripts"
        _write_scripts(directory, obligations, problem.sig, cfg)
        report.status = f"emitted {len(obligations)} scripts to {directory}"
        report.exit_code = EXIT_OK
        return _finish(report, args)

    if args.mode == "verify":
        if args.emit_smt:
            _write_scripts(args.emit_smt, obligations, problem.sig, cfg)
        report.solver = solver_identity(cfg)
        discharge = discharge_all(obligations, problem.sig, cfg, jobs=args.jobs)
        report.discharge = discharge
        report.status = discharge.status
        report.exit_code = {"verified": EXIT_OK, "refuted": EXIT_REFUTED,
                            "unknown": EXIT_UNKNOWN}[discharge.status]
        return _finish(report, args)

    try:
        sizes = _parse_sizes(problem, args)
    except (FolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report.sizes = sizes
    report.seed = args.seed

    if args.mode == "oracle":
        try:
            soundness = check_ranking_soundness(
                ranking, problem.sig, sizes, budget=args.budget,
                samples=args.samples, seed=args.seed)
            report.soundness = soundness
        except OracleUnsupported as exc:
            print(f"note: ranking outside oracle support: {exc}", file=sys.stderr)
            soundness = None
        checks = [bounded_premise_check(ob.name, ob.formula, problem.sig, sizes,
                                        budget=args.budget, samples=args.samples,
                                        seed=args.seed)
                  for ob in obligations]
        report.premise_checks = checks
        clean = (soundness is None or soundness.ok) and all(c.ok for c in checks)
        report.status = "clean" if clean else "violations found"
        report.exit_code = EXIT_OK if clean else EXIT_REFUTED
        return _finish(report, args)

    # mc
    try:
        result = model_check_liveness(problem, sizes, budget=args.budget)
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    report.mc = result
    report.status = "holds" if result.holds else "violated"
    report.exit_code = EXIT_OK if result.holds else EXIT_REFUTED
    return _finish(report, args)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
