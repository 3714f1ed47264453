"""SMT-LIB 2 serialization and external solver processes.

Each obligation is discharged by one solver process running a self-contained
script that asserts the obligation's negation: unsat means the obligation is
valid.  Wall-clock timeouts are enforced by the driver, so any SMT-LIB 2
conforming solver executable works.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .fol import (
    And, App, Atom, BoolConst, Eq, Exists, FolError, ForAll, Formula, Implies,
    Ite, Not, Or, Signature, Tag, Term, Var,
)
from .vcgen import ProofObligation, premise_negation

SOLVER_ENV_VAR = "LIVERANK_SOLVER"


class SolverLaunchFailure(FolError):
    pass


class SolverProtocolError(FolError):
    pass


def default_solver_path() -> str:
    env = os.environ.get(SOLVER_ENV_VAR)
    if env:
        return env
    if shutil.which("z3"):
        return "z3"
    # fall back to the bundled WebAssembly shim when present
    here = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
    shim = os.path.join(here, "solver", "z3wasm")
    if os.path.exists(shim):
        return shim
    return "z3"


@dataclass(frozen=True)
class SolverConfig:
    solver_path: str = field(default_factory=default_solver_path)
    timeout: float = 60.0
    logic: str = "UF"
    options: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("solver timeout must be positive")


@dataclass(frozen=True)
class SolverVerdict:
    status: str  # "valid" | "countermodel" | "unknown" | "error"
    reason: str = ""
    model: str = ""  # solver model text, verbatim, when status == countermodel
    wall_time: float = 0.0

    @property
    def is_valid(self) -> bool:
        return self.status == "valid"


# ---------------------------------------------------------------------------
# Serialization

_TAG_SUFFIX = {Tag.PLAIN: "", Tag.PRIMED: "!p", Tag.SUB0: "!0", Tag.SUB1: "!1"}


def smt_name(name: str, tag: Tag) -> str:
    return name + _TAG_SUFFIX[tag]


def _smt_var(v: Var) -> str:
    return smt_name(v.name, v.tag)


def to_smt(x) -> str:
    if isinstance(x, Var):
        return _smt_var(x)
    if isinstance(x, App):
        head = smt_name(x.name, x.tag)
        if not x.args:
            return head
        return f"({head} {' '.join(to_smt(a) for a in x.args)})"
    if isinstance(x, Ite):
        return f"(ite {to_smt(x.cond)} {to_smt(x.then)} {to_smt(x.other)})"
    if isinstance(x, BoolConst):
        return "true" if x.value else "false"
    if isinstance(x, Eq):
        return f"(= {to_smt(x.left)} {to_smt(x.right)})"
    if isinstance(x, Atom):
        head = smt_name(x.name, x.tag)
        if not x.args:
            return head
        return f"({head} {' '.join(to_smt(a) for a in x.args)})"
    if isinstance(x, Not):
        return f"(not {to_smt(x.body)})"
    if isinstance(x, And):
        return f"(and {' '.join(to_smt(p) for p in x.parts)})"
    if isinstance(x, Or):
        return f"(or {' '.join(to_smt(p) for p in x.parts)})"
    if isinstance(x, Implies):
        return f"(=> {to_smt(x.left)} {to_smt(x.right)})"
    if isinstance(x, (ForAll, Exists)):
        kw = "forall" if isinstance(x, ForAll) else "exists"
        binds = " ".join(f"({_smt_var(v)} {v.sort})" for v in x.vars)
        return f"({kw} ({binds}) {to_smt(x.body)})"
    raise TypeError(f"not a term or formula: {x!r}")


def _declarations(sig: Signature) -> list[str]:
    lines = []
    for sort in sig.sorts:
        lines.append(f"(declare-sort {sort} 0)")
    for name, sort in sig.constants.items():
        lines.append(f"(declare-const {name} {sort})")
        if sig.is_mutable(name):
            lines.append(f"(declare-const {smt_name(name, Tag.PRIMED)} {sort})")
    for name, (args, res) in sig.functions.items():
        sig_txt = f"({' '.join(args)}) {res}"
        lines.append(f"(declare-fun {name} {sig_txt})")
        if sig.is_mutable(name):
            lines.append(f"(declare-fun {smt_name(name, Tag.PRIMED)} {sig_txt})")
    for name, args in sig.relations.items():
        sig_txt = f"({' '.join(args)}) Bool"
        lines.append(f"(declare-fun {name} {sig_txt})")
        if sig.is_mutable(name):
            lines.append(f"(declare-fun {smt_name(name, Tag.PRIMED)} {sig_txt})")
    return lines


def emit_query(ob: ProofObligation, sig: Signature, cfg: SolverConfig) -> str:
    """A self-contained solver script asserting the obligation's negation."""
    lines = [f"; obligation {ob.name} (premise {ob.provenance})"]
    lines.append(f"(set-logic {cfg.logic})")
    for opt in cfg.options:
        lines.append(opt)
    lines.extend(_declarations(sig))
    lines.append(f"(assert {to_smt(premise_negation(ob))})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Driving the solver


def run_solver(script: str, cfg: SolverConfig) -> tuple[str, float]:
    """Run one solver process on a script; returns (stdout, wall_time)."""
    with tempfile.NamedTemporaryFile("w", suffix=".smt2", delete=False) as fh:
        fh.write(script)
        path = fh.name
    start = time.monotonic()
    try:
        proc = subprocess.run([cfg.solver_path, path], capture_output=True,
                              text=True, timeout=cfg.timeout)
        return proc.stdout, time.monotonic() - start
    except FileNotFoundError:
        raise SolverLaunchFailure(
            f"solver executable not found: {cfg.solver_path!r} "
            f"(set ${SOLVER_ENV_VAR} or pass --solver)") from None
    except subprocess.TimeoutExpired:
        return "", time.monotonic() - start
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass


def _parse_output(out: str, elapsed: float, timed_out: bool) -> SolverVerdict:
    lines = [ln.strip() for ln in out.splitlines() if ln.strip()]
    if timed_out or not lines:
        return SolverVerdict("unknown", reason="timeout", wall_time=elapsed)
    status = lines[0]
    if status == "unsat":
        return SolverVerdict("valid", wall_time=elapsed)
    if status == "sat":
        model = "\n".join(lines[1:])
        return SolverVerdict("countermodel", model=model, wall_time=elapsed)
    if status == "unknown":
        return SolverVerdict("unknown", reason="incomplete", wall_time=elapsed)
    raise SolverProtocolError(f"unrecognized solver status line: {status!r}")


def check(ob: ProofObligation, sig: Signature, cfg: SolverConfig) -> SolverVerdict:
    """Valid iff the solver reports the negation unsatisfiable."""
    script = emit_query(ob, sig, cfg)
    out, elapsed = run_solver(script, cfg)
    return _parse_output(out, elapsed, timed_out=(out == "" and elapsed >= cfg.timeout))


@dataclass
class DischargeReport:
    entries: list[tuple[ProofObligation, SolverVerdict]]

    @property
    def status(self) -> str:
        statuses = [v.status for _, v in self.entries]
        if any(s == "countermodel" for s in statuses):
            return "refuted"
        if all(s == "valid" for s in statuses):
            return "verified"
        return "unknown"

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def discharge_all(obs: Sequence[ProofObligation], sig: Signature,
                  cfg: SolverConfig, jobs: int = 1) -> DischargeReport:
    """Discharge obligations, one solver process each, report in input order."""
    if jobs < 1:
        raise ValueError("parallelism must be at least 1")

    def work(ob: ProofObligation) -> SolverVerdict:
        try:
            return check(ob, sig, cfg)
        except (SolverLaunchFailure, SolverProtocolError) as exc:
            return SolverVerdict("error", reason=str(exc))

    if jobs == 1:
        verdicts = [work(ob) for ob in obs]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            verdicts = list(pool.map(work, obs))
    return DischargeReport(list(zip(list(obs), verdicts)))


def solver_identity(cfg: SolverConfig) -> str:
    """First line of the solver's version banner, for report embedding."""
    try:
        proc = subprocess.run([cfg.solver_path, "-version"], capture_output=True,
                              text=True, timeout=30)
        line = proc.stdout.splitlines()[0].strip() if proc.stdout else "unknown"
        return line
    except (FileNotFoundError, subprocess.TimeoutExpired, IndexError):
        return "unknown"
