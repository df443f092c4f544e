"""Run every reduction stage on one instance and compare normalised optima."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .combine import combine_language, instance_to_combined
from .core import INF, Instance, eval_instance, format_value
from .digraph import build_d_gamma
from .dual import dual_instance, dual_language, eliminate_feas, undual_instance
from .errors import BudgetExceeded, MismatchError
from .extdual import (DualVerdict, Infeasible, SolvedDirectly, extdual_instance,
                      reverse_reduce, solve_ext)
from .solve import Solution, branch_and_bound, brute_force

ALL_STAGES = ("combine", "dual", "extdual", "reverse")


@dataclass
class StageRecord:
    name: str
    variables: int
    constraints: int
    raw: object                 # optimum of the stage's own instance
    normalized: object          # mapped back to the source's scale
    oracle: str
    extra: dict = field(default_factory=dict)


@dataclass
class PipelineReport:
    source_optimum: object
    stages: list = field(default_factory=list)
    seed: Optional[int] = None

    @property
    def agree(self) -> bool:
        return all(s.normalized == self.source_optimum for s in self.stages)

    def first_mismatch(self):
        for s in self.stages:
            if s.normalized != self.source_optimum:
                return s
        return None

    def lines(self) -> list:
        out = []
        if self.seed is not None:
            out.append(f"seed {self.seed}")
        out.append(f"stage source optimum {format_value(self.source_optimum)}")
        for s in self.stages:
            extra = "".join(f" {k} {format_value(v) if isinstance(v, Fraction) else v}"
                            for k, v in s.extra.items())
            out.append(f"stage {s.name} vars {s.variables} constraints {s.constraints} "
                       f"optimum {format_value(s.raw)} normalized {format_value(s.normalized)} "
                       f"oracle {s.oracle}{extra}")
        out.append("agree yes" if self.agree else "agree no")
        return out


def oracle_solve(inst: Instance, budget: int = 10 ** 6) -> Solution:
    """Brute force when the search space is small enough, exact branch-and-bound otherwise."""
    if inst.domain.size ** len(inst.variables) <= budget:
        return brute_force(inst)
    return branch_and_bound(inst, budget=10 ** 7)


def _shift(v, off):
    return INF if v is INF else v + off


def _check_assignment(inst, sol: Solution, stage: str):
    if sol.assignment is not None and eval_instance(inst, sol.assignment) != sol.optimum:
        raise MismatchError(stage, sol.optimum, eval_instance(inst, sol.assignment),
                            "returned assignment does not evaluate to the optimum")


def run_pipeline(inst: Instance, stages=ALL_STAGES, seed=None) -> PipelineReport:
    src = oracle_solve(inst)
    _check_assignment(inst, src, "source")
    report = PipelineReport(src.optimum, seed=seed)
    comb = combine_language(inst.language)
    ic, off_c = instance_to_combined(inst, comb)
    sc = oracle_solve(ic)
    _check_assignment(ic, sc, "combine")
    base = _shift(sc.optimum, -off_c)
    if "combine" in stages:
        report.stages.append(StageRecord("combine", len(ic.variables), len(ic.constraints),
                                         sc.optimum, base, sc.method, {"offset": off_c}))
    need_dual = any(s in stages for s in ("dual", "reverse"))
    dual = dual_language(comb) if need_dual else None
    if "dual" in stages:
        di = dual_instance(ic, dual)
        sd = oracle_solve(di.instance)
        _check_assignment(di.instance, sd, "dual")
        if sd.assignment is not None:
            back = di.decode(sd.assignment, dual)
            got = eval_instance(ic, back)
            if got != sd.optimum:
                raise MismatchError("dual-decode", sd.optimum, got)
        report.stages.append(StageRecord("dual", len(di.instance.variables),
                                         len(di.instance.constraints), sd.optimum,
                                         _shift(sd.optimum, -off_c), sd.method))
    if "extdual" in stages or "reverse" in stages:
        ext = build_d_gamma(comb)
        ei = extdual_instance(ic, ext)
        if "extdual" in stages:
            se = solve_ext(ei.instance, ext, budget=10 ** 7)
            _check_assignment(ei.instance, se, "extdual")
            report.stages.append(StageRecord("extdual", len(ei.instance.variables),
                                             len(ei.instance.constraints), se.optimum,
                                             _shift(se.optimum, -off_c), se.method))
        if "reverse" in stages:
            report.stages.extend(_reverse_stages(ei.instance, ext, dual, off_c))
    return report


def _reverse_stages(ie: Instance, ext, dual, off_c) -> list:
    verdict = reverse_reduce(ie, ext, dual)
    n_v, n_c = len(ie.variables), len(ie.constraints)
    if isinstance(verdict, Infeasible):
        return [StageRecord("reverse", n_v, n_c, INF, INF, "verdict",
                            {"verdict": "infeasible"})]
    if isinstance(verdict, SolvedDirectly):
        got = eval_instance(ie, verdict.assignment)
        if got != verdict.optimum:
            raise MismatchError("reverse", verdict.optimum, got)
        return [StageRecord("reverse", n_v, n_c, verdict.optimum,
                            _shift(verdict.optimum, -off_c), "verdict",
                            {"verdict": "solved"})]
    out = []
    jd = verdict.instance
    sj = oracle_solve(jd)
    _check_assignment(jd, sj, "reverse")
    if sj.assignment is not None:
        back = verdict.decode(sj.assignment, ext)
        got = eval_instance(ie, back)
        if got != _shift(sj.optimum, verdict.offset):
            raise MismatchError("reverse-decode", _shift(sj.optimum, verdict.offset), got)
    off = verdict.offset
    out.append(StageRecord("reverse", len(jd.variables), len(jd.constraints), sj.optimum,
                           _shift(_shift(sj.optimum, off), -off_c), sj.method,
                           {"offset": off, "fallback": "yes" if verdict.fallback else "no"}))
    un = undual_instance(jd, dual)
    su = oracle_solve(un.instance)
    _check_assignment(un.instance, su, "undual")
    out.append(StageRecord("undual", len(un.instance.variables), len(un.instance.constraints),
                           su.optimum, _shift(_shift(su.optimum, off), -off_c), su.method))
    el = eliminate_feas(un.instance, dual.combined)
    sf = oracle_solve(el.instance)
    _check_assignment(el.instance, sf, "eliminate-feas")
    rec = el.recover(sf.optimum)
    out.append(StageRecord("eliminate-feas", len(el.instance.variables),
                           len(el.instance.constraints), sf.optimum,
                           _shift(_shift(rec, off), -off_c), sf.method,
                           {"scale": el.scale}))
    return out


def verify(inst: Instance, stages=ALL_STAGES, seed=None) -> PipelineReport:
    """Like run_pipeline, but raises MismatchError on the first disagreeing stage."""
    report = run_pipeline(inst, stages, seed)
    bad = report.first_mismatch()
    if bad is not None:
        raise MismatchError(bad.name, report.source_optimum, bad.normalized,
                            "\n".join(report.lines()))
    return report
