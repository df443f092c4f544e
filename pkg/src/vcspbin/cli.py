"""Command-line front end: `vcspbin <subcommand> ...`."""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from . import io
from .combine import combine_language, instance_to_combined
from .core import INF, format_value
from .digraph import build_d_gamma, components, levels
from .dual import dual_instance, dual_language, eliminate_feas, undual_instance
from .errors import BudgetExceeded, MismatchError, VcspError

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_BUDGET, EXIT_MISMATCH = 0, 2, 3, 4, 5


class _Out:
    """Collects the main document and optional sidecar for one command."""

    def __init__(self, args):
        self.path = getattr(args, "output", None)
        self.sidecar = getattr(args, "map", None)

    def write(self, text: str):
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)

    def write_sidecar(self, text: str):
        if self.sidecar:
            Path(self.sidecar).write_text(text)


def _read(path):
    return Path(path).read_text()


def _language(args):
    return io.parse_language(_read(args.language))


def _combined(args):
    return combine_language(_language(args))


def _source_instance(args, lang):
    return io.parse_instance(_read(args.instance), lang)


def _to_combined(args):
    comb = _combined(args)
    inst = _source_instance(args, comb.source)
    ic, offset = instance_to_combined(inst, comb)
    return comb, ic, offset


def _solution_exit(optimum):
    return EXIT_INFEASIBLE if optimum is INF else EXIT_OK


# ------------------------------------------------------------------- commands

def cmd_combine(args):
    comb = _combined(args)
    out = _Out(args)
    layout = io.serialize_layout(comb)
    text = io.serialize_language(comb.language())
    if args.map:
        out.write_sidecar(layout)
    else:
        text += "".join("# " + line + "\n" for line in layout.splitlines())
    out.write(text)
    return EXIT_OK


def cmd_dual(args):
    dual = dual_language(_combined(args))
    _Out(args).write(io.serialize_language(dual.language()))
    return EXIT_OK


def cmd_dual_instance(args):
    comb, ic, offset = _to_combined(args)
    dual = dual_language(comb)
    di = dual_instance(ic, dual)
    out = _Out(args)
    out.write(f"# offset {format_value(offset)}\n" + io.serialize_instance(di.instance))
    out.write_sidecar(io.serialize_dual_map(di))
    return EXIT_OK


def cmd_undual(args):
    comb = _combined(args)
    dual = dual_language(comb)
    inst = io.parse_instance(_read(args.instance), dual.language())
    res = undual_instance(inst, dual)
    out = _Out(args)
    out.write(io.serialize_instance(res.instance))
    if args.emit_language:
        Path(args.emit_language).write_text(io.serialize_language(comb.feas_language()))
    return EXIT_OK


def cmd_eliminate_feas(args):
    comb = _combined(args)
    inst = io.parse_instance(_read(args.instance), comb.feas_language())
    el = eliminate_feas(inst, comb)
    header = (f"# scale {el.scale} gap {format_value(el.gap)} "
              f"base {format_value(el.base)}\n")
    _Out(args).write(header + io.serialize_instance(el.instance))
    return EXIT_OK


def cmd_extdual(args):
    ext = build_d_gamma(_combined(args))
    costs = {v: ext.mu.value((i,)) for i, v in enumerate(ext.vertex_domain.labels)
             if ext.mu.value((i,)) != 0}
    _Out(args).write(io.serialize_digraph(ext.d_gamma, costs))
    return EXIT_OK


def cmd_extdual_instance(args):
    from .extdual import extdual_instance

    comb, ic, offset = _to_combined(args)
    ext = build_d_gamma(comb)
    ei = extdual_instance(ic, ext)
    out = _Out(args)
    out.write(f"# offset {format_value(offset)}\n" + io.serialize_instance(ei.instance))
    out.write_sidecar(io.serialize_ext_map(ei))
    return EXIT_OK


def cmd_reverse(args):
    from .extdual import Infeasible, SolvedDirectly, reverse_reduce

    comb = _combined(args)
    ext = build_d_gamma(comb)
    dual = dual_language(comb)
    inst = io.parse_instance(_read(args.instance), ext.language())
    verdict = reverse_reduce(inst, ext, dual)
    out = _Out(args)
    if isinstance(verdict, Infeasible):
        out.write("infeasible\n")
        return EXIT_INFEASIBLE
    if isinstance(verdict, SolvedDirectly):
        out.write(io.serialize_solution(verdict.optimum, verdict.assignment, inst.variables))
        return EXIT_OK
    header = f"# offset {format_value(verdict.offset)}\n"
    if verdict.fallback:
        header += "# fallback yes\n"
    out.write(header + io.serialize_instance(verdict.instance))
    out.write_sidecar("".join(f"dualvar {t} = top {t}\n" for t in verdict.plan.tops)
                      + "".join(f"dualvar {p} = phantom\n" for p in verdict.plan.phantoms))
    return EXIT_OK


def cmd_solve(args):
    from .solve import solve

    lang = _language(args)
    if args.ext:
        from .extdual import solve_ext

        comb = combine_language(lang)
        ext = build_d_gamma(comb)
        inst = io.parse_instance(_read(args.instance), ext.language())
        sol = solve_ext(inst, ext)
    else:
        inst = io.parse_instance(_read(args.instance), lang)
        order = args.order.split(",") if args.order else None
        sol = solve(inst, args.method, order=order)
    _Out(args).write(io.serialize_solution(sol.optimum, sol.assignment, inst.variables))
    return _solution_exit(sol.optimum)


def cmd_mincosthom(args):
    from .solve import min_cost_hom

    src, _ = io.parse_digraph(_read(args.source))
    tgt, tcost = io.parse_digraph(_read(args.target))
    costs = {}
    if args.costs:
        for no, toks in io._lines(_read(args.costs)):
            if len(toks) != 4 or toks[0] != "cost":
                raise VcspError(f"line {no}: expected 'cost <source> <target> <value>'")
            costs.setdefault(toks[1], {})[toks[2]] = io._value(toks[3], no)
    elif tcost:
        # the target's vertex costs apply to every source vertex
        costs = {v: dict(tcost) for v in src.vertices}
    sol = min_cost_hom(src, tgt, costs)
    _Out(args).write(io.serialize_solution(sol.optimum, sol.assignment, list(src.vertices)))
    return _solution_exit(sol.optimum)


def cmd_pol(args):
    from .algebra import enumerate_polymorphisms

    lang = _language(args)
    ops = enumerate_polymorphisms(lang, args.arity)
    text = f"# {len(ops)} polymorphisms of arity {args.arity}\n"
    text += "".join(io.serialize_operation(op) for op in ops)
    _Out(args).write(text)
    return EXIT_OK


def cmd_fpol_check(args):
    from .algebra import check_fractional_polymorphism

    lang = _language(args)
    omega = io.parse_fpol(_read(args.fpol), lang.domain)
    res = check_fractional_polymorphism(omega, lang)
    _Out(args).write("fpol: yes\n" if res.ok else f"fpol: no ({res.reason})\n")
    return EXIT_OK


def cmd_identity_check(args):
    from .algebra import check_identity, family_identities

    lang = _language(args)
    ops = io.parse_operations(_read(args.operations), lang.domain)
    lines = []
    if args.family:
        for name, op in ops.items():
            ids = family_identities(args.family, op.arity, name)
            ok = all(check_identity(i, ops) for i in ids)
            lines.append(f"{name} {args.family}: {'yes' if ok else 'no'}")
    else:
        for idt in io.parse_identities(_read(args.identity)):
            ok = check_identity(idt, ops)
            lines.append(f"{idt}: {'yes' if ok else 'no'} linear {'yes' if idt.linear else 'no'} "
                         f"balanced {'yes' if idt.balanced else 'no'}")
    _Out(args).write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_rigid_core(args):
    from .algebra import is_rigid_core

    lang = _language(args)
    target = build_d_gamma(combine_language(lang)).language() if args.ext else lang
    _Out(args).write(f"rigid core: {'yes' if is_rigid_core(target) else 'no'}\n")
    return EXIT_OK


def cmd_endomorphisms(args):
    from .algebra import enumerate_endomorphisms

    if args.digraph:
        g, _ = io.parse_digraph(_read(args.digraph))
    else:
        g = build_d_gamma(_combined(args)).d_gamma
    maps = enumerate_endomorphisms(g)
    lines = [f"endomorphisms {len(maps)}"]
    if args.list:
        for i, h in enumerate(maps, start=1):
            lines.append(f"map {i} " + " ".join(f"{k}->{v}" for k, v in h.items()))
    _Out(args).write("\n".join(lines) + "\n")
    return EXIT_OK


def info_lines(lang) -> list:
    from .algebra import is_rigid_core

    comb = combine_language(lang)
    lines = [f"language {lang.name}", f"domain size {lang.domain.size}"]
    for f in lang.functions:
        kind = "crisp" if f.is_crisp else ("finite-valued" if f.is_finite_valued else "general")
        lines.append(f"function {f.name} arity {f.arity} {kind}")
    lines.append(f"combined arity {comb.m}")
    try:
        dual = dual_language(comb)
        ext = build_d_gamma(comb)
    except VcspError as e:
        lines.append(f"dual unavailable: {e}")
    else:
        lines.append(f"dual domain size {dual.d_prime.size}")
        ev, ee = ext.expected_counts()
        g = ext.d_gamma
        lines.append(f"D_Gamma vertices {len(g.vertices)} formula {ev}")
        lines.append(f"D_Gamma edges {len(g.edges)} formula {ee}")
        lv = levels(g)
        lines.append(f"D_Gamma balanced {'yes' if lv is not None else 'no'} "
                     f"height {max(lv.values()) if lv else '-'} "
                     f"components {len(components(g))}")
    try:
        lines.append(f"rigid core: {'yes' if is_rigid_core(lang) else 'no'}")
    except BudgetExceeded:
        lines.append("rigid core: unknown (budget)")
    return lines


def cmd_info(args):
    _Out(args).write("\n".join(info_lines(_language(args))) + "\n")
    return EXIT_OK


def cmd_verify(args):
    from .fuzz import random_instance, random_language
    from .pipeline import ALL_STAGES, verify

    stages = tuple(s for s in args.stages.split(",") if s) if args.stages else ALL_STAGES
    bad = [s for s in stages if s not in ALL_STAGES]
    if bad:
        raise VcspError(f"unknown stage(s) {','.join(bad)}")
    out = []
    if args.fuzz:
        rng = random.Random(args.seed)
        out.append(f"seed {args.seed}")
        for i in range(args.fuzz):
            inst = random_instance(rng, random_language(rng))
            report = verify(inst, stages)
            out.append(f"case {i} optimum {format_value(report.source_optimum)} agree yes")
    else:
        lang = _language(args)
        inst = _source_instance(args, lang)
        report = verify(inst, stages)
        out.extend(report.lines())
    _Out(args).write("\n".join(out) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vcspbin", description="VCSP binarisation toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, *, language=True, instance=False, sidecar=False, help=""):
        sp = sub.add_parser(name, help=help)
        if language:
            sp.add_argument("--language", "-l", required=True)
        if instance:
            sp.add_argument("--instance", "-i", required=True)
        if sidecar:
            sp.add_argument("--map", help="write the sidecar map here")
        sp.add_argument("--output", "-o", help="write the main output here instead of stdout")
        sp.set_defaults(func=fn)
        return sp

    add("combine", cmd_combine, sidecar=True, help="fold a language into one function")
    add("dual", cmd_dual, help="dual language")
    add("dual-instance", cmd_dual_instance, instance=True, sidecar=True,
        help="dual instance of an instance")
    sp = add("undual", cmd_undual, instance=True, help="dual instance back to the combined language")
    sp.add_argument("--emit-language", help="also write the {phi, Feas(phi)} language")
    add("eliminate-feas", cmd_eliminate_feas, instance=True, help="remove Feas constraints")
    add("extdual", cmd_extdual, help="D_Gamma digraph with mu costs")
    add("extdual-instance", cmd_extdual_instance, instance=True, sidecar=True,
        help="extended dual instance")
    add("reverse", cmd_reverse, instance=True, sidecar=True,
        help="reduce an extended dual instance back to the dual")
    sp = add("solve", cmd_solve, instance=True, help="solve an instance exactly")
    sp.add_argument("--method", choices=("brute", "mincut", "bnb", "auto"), default="auto")
    sp.add_argument("--order", help="comma-separated label order for mincut")
    sp.add_argument("--ext", action="store_true",
                    help="the instance is over the extended dual of the language")
    sp = add("mincosthom", cmd_mincosthom, language=False, help="minimum-cost homomorphism")
    sp.add_argument("--source", required=True)
    sp.add_argument("--target", required=True)
    sp.add_argument("--costs", help="lines 'cost <source> <target> <value>'")
    sp = add("pol", cmd_pol, help="enumerate polymorphisms")
    sp.add_argument("--arity", "-k", type=int, required=True)
    sp = add("fpol-check", cmd_fpol_check, help="check a fractional polymorphism")
    sp.add_argument("--fpol", required=True)
    sp = add("identity-check", cmd_identity_check, help="check identities")
    sp.add_argument("--operations", required=True, help="file of operation blocks")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--family", choices=("wnu", "cyclic", "symmetric", "edge", "idempotent"))
    g.add_argument("--identity", help="file with one identity per line")
    sp = add("rigid-core", cmd_rigid_core, help="rigid core test")
    sp.add_argument("--ext", action="store_true", help="test the extended dual language instead")
    sp = add("endomorphisms", cmd_endomorphisms, language=False, help="count endomorphisms")
    sp.add_argument("--language", "-l")
    sp.add_argument("--digraph")
    sp.add_argument("--list", action="store_true")
    add("info", cmd_info, help="summary of a language")
    sp = add("verify", cmd_verify, language=False, help="check every stage against the oracle")
    sp.add_argument("--language", "-l")
    sp.add_argument("--instance", "-i")
    sp.add_argument("--stages", help="comma-separated subset of combine,dual,extdual,reverse")
    sp.add_argument("--oracle", choices=("brute",), default="brute")
    sp.add_argument("--fuzz", type=int, default=0, help="number of random instances")
    sp.add_argument("--seed", type=int, default=0)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "endomorphisms" and not (args.digraph or args.language):
        parser.error("endomorphisms needs --digraph or --language")
    if args.command == "verify" and not args.fuzz and not (args.language and args.instance):
        parser.error("verify needs --language and --instance, or --fuzz N")
    try:
        return args.func(args)
    except MismatchError as e:
        sys.stderr.write(f"mismatch: {e}\n")
        return EXIT_MISMATCH
    except BudgetExceeded as e:
        sys.stderr.write(f"budget exceeded: {e}\n")
        return EXIT_BUDGET
    except (VcspError, OSError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
