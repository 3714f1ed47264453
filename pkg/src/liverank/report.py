"""Stable run reports.

The serialized report is byte-identical across runs with the same inputs,
seed, and solver version: wall-clock durations appear only in the human
console rendering, never in the report file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Optional

from .oracle import McResult, PremiseCheckReport, SoundnessReport
from .smt import DischargeReport


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunReport:
    problem: str
    sha256: str
    mode: str
    status: str = ""
    exit_code: int = 0
    solver: Optional[str] = None
    seed: Optional[int] = None
    sizes: Optional[dict[str, int]] = None
    discharge: Optional[DischargeReport] = None
    soundness: Optional[SoundnessReport] = None
    premise_checks: list[PremiseCheckReport] = field(default_factory=list)
    mc: Optional[McResult] = None

    def to_dict(self) -> dict:
        out: dict = {
            "problem": self.problem,
            "sha256": self.sha256,
            "mode": self.mode,
            "status": self.status,
            "exit_code": self.exit_code,
        }
        if self.solver is not None:
            out["solver"] = self.solver
        if self.seed is not None:
            out["seed"] = self.seed
        if self.sizes is not None:
            out["sizes"] = dict(sorted(self.sizes.items()))
        if self.discharge is not None:
            out["obligations"] = [
                {"name": ob.name, "premise": ob.provenance, "status": v.status,
                 **({"reason": v.reason} if v.reason else {})}
                for ob, v in self.discharge.entries]
        if self.soundness is not None:
            s = self.soundness
            out["ranking_soundness"] = {
                "cases": s.cases, "skipped": s.skipped, "exhaustive": s.exhaustive,
                "seed": s.seed,
                "violations": [
                    {"kind": v.kind, "lower": v.lower, "higher": v.higher,
                     "assignment": v.assignment, "heights": list(v.heights)}
                    for v in s.violations]}
        if self.premise_checks:
            out["premise_checks"] = [
                {"name": r.name, "cases": r.cases, "exhaustive": r.exhaustive,
                 "seed": r.seed,
                 "falsifiers": [{"pre": f.pre, "post": f.post} for f in r.falsifiers]}
                for r in self.premise_checks]
        if self.mc is not None:
            m = self.mc
            out["model_check"] = {
                "holds": m.holds, "max_steps": m.max_steps,
                "scaffolds": m.scaffolds, "states": m.states,
                **({"lasso": {"scaffold": m.lasso.scaffold, "stem": m.lasso.stem,
                              "cycle": m.lasso.cycle}} if m.lasso else {})}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self, with_times: bool = True) -> str:
        lines = [f"problem: {self.problem} [{self.mode}]"]
        if self.solver:
            lines.append(f"solver:  {self.solver}")
        if self.discharge is not None:
            for ob, v in self.discharge.entries:
                t = f"  {v.wall_time:6.2f}s" if with_times else ""
                extra = f" ({v.reason})" if v.reason else ""
                lines.append(f"  {ob.name:26s} {v.status}{extra}{t}")
        if self.soundness is not None:
            s = self.soundness
            mode = "exhaustive" if s.exhaustive else f"sampled (seed {s.seed})"
            lines.append(f"  ranking soundness: {s.cases} cases, {s.skipped} skipped, "
                         f"{len(s.violations)} violations [{mode}]")
            for v in s.violations:
                lines.append(f"    {v.kind}: heights {v.heights[0]} vs {v.heights[1]}")
                lines.append(f"      lower:  {v.lower}")
                lines.append(f"      higher: {v.higher}")
                lines.append(f"      params: {v.assignment}")
        for r in self.premise_checks:
            verdict = "ok" if r.ok else f"{len(r.falsifiers)} falsifier(s)"
            lines.append(f"  premise {r.name:24s} {r.cases} cases, {verdict}")
            for f in r.falsifiers:
                lines.append(f"    pre:  {f.pre}")
                lines.append(f"    post: {f.post}")
        if self.mc is not None:
            m = self.mc
            if m.holds:
                steps = "unbounded" if m.max_steps is None else str(m.max_steps)
                lines.append(f"  holds over {m.scaffolds} scaffolds, {m.states} states; "
                             f"max steps to goal: {steps}")
            else:
                lines.append(f"  violated; fair lasso found")
                lines.append(f"    scaffold: {m.lasso.scaffold}")
                for s in m.lasso.stem:
                    lines.append(f"    stem:  {s}")
                for s in m.lasso.cycle:
                    lines.append(f"    cycle: {s}")
        lines.append(f"status: {self.status}")
        return "\n".join(lines) + "\n"
