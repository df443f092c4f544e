"""Line-oriented text formats: languages, instances, digraphs, operations,
fractional polymorphisms, solutions and the sidecar maps."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional

from .core import INF, CostFunction, Domain, Instance, Language, format_value, parse_value
from .digraph import ROLES, LeveledDigraph, Vertex
from .errors import ParseError, SemanticError, VcspError


def _lines(text: str):
    """(line number, tokens) for every non-blank line, comments removed."""
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _value(tok, no):
    try:
        return parse_value(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(no, f"bad value {tok!r}") from None


def _int(tok, no, what):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(no, f"bad {what} {tok!r}") from None


def _semantic(no, fn, *args):
    try:
        return fn(*args)
    except ParseError as e:
        if e.line is None:
            raise SemanticError(no, e.message) from None
        raise
    except VcspError as e:
        raise SemanticError(no, str(e)) from None


# ------------------------------------------------------------------- languages

def parse_language(text: str, strict: bool = True) -> Language:
    name, domain, fns = None, None, []
    block = None                     # [name, arity, entries, default, start line]
    for no, toks in _lines(text):
        head = toks[0]
        if block is not None:
            if head == "end":
                if len(toks) != 1:
                    raise ParseError(no, "'end' takes no arguments")
                fns.append(_finish_function(block, domain, no))
                block = None
                continue
            if head == "default":
                if len(toks) != 3 or toks[1] != ":":
                    raise ParseError(no, "expected 'default : <value>'")
                if block[3] is not None:
                    raise ParseError(no, "duplicate default")
                block[3] = _value(toks[2], no)
                continue
            m = block[1]
            if len(toks) != m + 2 or toks[m] != ":":
                raise ParseError(no, f"expected {m} labels, ':' and a value")
            labels = tuple(toks[:m])
            for lab in labels:
                if lab not in domain:
                    raise SemanticError(no, f"label {lab!r} not in the domain")
            if labels in block[2]:
                raise SemanticError(no, f"duplicate entry for {labels}")
            block[2][labels] = _value(toks[m + 1], no)
            continue
        if head == "language":
            if len(toks) != 2 or name is not None:
                raise ParseError(no, "expected a single 'language <name>' header")
            name = toks[1]
        elif head == "domain":
            if domain is not None:
                raise ParseError(no, "duplicate domain line")
            domain = _semantic(no, Domain, tuple(toks[1:]))
        elif head == "function":
            if domain is None:
                raise ParseError(no, "function before domain")
            if len(toks) != 4 or toks[2] != "arity":
                raise ParseError(no, "expected 'function <name> arity <m>'")
            m = _int(toks[3], no, "arity")
            if m < 1:
                raise SemanticError(no, "arity must be >= 1")
            block = [toks[1], m, {}, None, no]
        else:
            raise ParseError(no, f"unexpected {head!r}")
    if block is not None:
        raise ParseError(block[4], f"function {block[0]} is missing 'end'")
    if name is None:
        raise ParseError(1, "missing 'language <name>' header")
    if domain is None:
        raise ParseError(1, "missing domain line")
    return _semantic(None, Language, domain, tuple(fns), name, strict)


def _finish_function(block, domain, no):
    fname, m, entries, default, start = block
    if default is None and len(entries) != domain.size ** m:
        raise SemanticError(start, f"function {fname}: table is not total and has no default")
    return _semantic(start, CostFunction.from_entries, fname, domain, m, entries, default)


def serialize_function(phi: CostFunction) -> str:
    labels = phi.domain.labels
    out = [f"function {phi.name} arity {phi.arity}"]
    has_inf = any(v is INF for v in phi.table)
    for t, v in zip(phi.domain.tuples(phi.arity), phi.table):
        if has_inf and v is INF:
            continue
        out.append("  " + " ".join(labels[i] for i in t) + f" : {format_value(v)}")
    if has_inf:
        out.append("  default : inf")
    out.append("end")
    return "\n".join(out)


def serialize_language(lang: Language) -> str:
    out = [f"language {lang.name}", "domain " + " ".join(lang.domain.labels)]
    out.extend(serialize_function(f) for f in lang.functions)
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- instances

def parse_instance(text: str, language: Language) -> Instance:
    name, variables, cons = None, None, []
    for no, toks in _lines(text):
        head = toks[0]
        if head == "instance":
            if len(toks) != 2 or name is not None:
                raise ParseError(no, "expected a single 'instance <name>' header")
            name = toks[1]
        elif head == "vars":
            if variables is not None:
                raise ParseError(no, "duplicate vars line")
            variables = toks[1:]
            if len(set(variables)) != len(variables):
                raise SemanticError(no, "duplicate variable")
        elif head == "constraint":
            if variables is None:
                raise ParseError(no, "constraint before vars")
            if len(toks) < 2:
                raise ParseError(no, "constraint needs a function name")
            fname, scope = toks[1], tuple(toks[2:])
            if fname not in language:
                raise SemanticError(no, f"unknown function {fname!r}")
            if len(scope) != language[fname].arity:
                raise SemanticError(no, f"{fname} has arity {language[fname].arity}, "
                                        f"scope has {len(scope)} variables")
            known = set(variables)
            for v in scope:
                if v not in known:
                    raise SemanticError(no, f"undeclared variable {v!r}")
            cons.append((fname, scope))
        else:
            raise ParseError(no, f"unexpected {head!r}")
    if name is None:
        raise ParseError(1, "missing 'instance <name>' header")
    return _semantic(None, Instance, language, tuple(variables or ()), tuple(cons), name)


def serialize_instance(inst: Instance) -> str:
    out = [f"instance {inst.name}", "vars " + " ".join(inst.variables)]
    out.extend(f"constraint {c.fname} " + " ".join(c.scope) for c in inst.constraints)
    return "\n".join(out) + "\n"


# -------------------------------------------------------------------- digraphs

def parse_digraph(text: str):
    """Returns (LeveledDigraph, {vertex id: cost}) ."""
    name, g, costs = None, None, {}
    for no, toks in _lines(text):
        head = toks[0]
        if head == "digraph":
            if len(toks) != 2 or name is not None:
                raise ParseError(no, "expected a single 'digraph <name>' header")
            name = toks[1]
            g = LeveledDigraph(name=name)
        elif head == "vertex":
            if g is None:
                raise ParseError(no, "vertex before header")
            if len(toks) < 6 or toks[2] != "level" or toks[4] != "role":
                raise ParseError(no, "expected 'vertex <id> level <n> role <role> ...'")
            vid, level, role = toks[1], _int(toks[3], no, "level"), toks[5]
            if role not in ROLES:
                raise SemanticError(no, f"unknown role {role!r}")
            label, cost = None, None
            rest = toks[6:]
            while rest:
                if len(rest) < 2 or rest[0] not in ("label", "cost"):
                    raise ParseError(no, f"unexpected {' '.join(rest)!r}")
                if rest[0] == "label":
                    label = rest[1]
                else:
                    cost = _value(rest[1], no)
                rest = rest[2:]
            _semantic(no, g.add_vertex, Vertex(vid, role, level, label))
            if cost is not None:
                costs[vid] = cost
        elif head == "edge":
            if g is None:
                raise ParseError(no, "edge before header")
            if len(toks) != 3:
                raise ParseError(no, "expected 'edge <from> <to>'")
            if toks[1] == toks[2]:
                raise SemanticError(no, "self edges are not allowed")
            if g.has_edge(toks[1], toks[2]):
                raise SemanticError(no, "parallel edge")
            _semantic(no, g.add_edge, toks[1], toks[2])
        else:
            raise ParseError(no, f"unexpected {head!r}")
    if g is None:
        raise ParseError(1, "missing 'digraph <name>' header")
    return g, costs


def serialize_digraph(g: LeveledDigraph, costs: Optional[dict] = None) -> str:
    costs = costs or {}
    out = [f"digraph {g.name}"]
    for v in g.vertices.values():
        line = f"vertex {v.id} level {v.level} role {v.role}"
        if v.label is not None:
            line += f" label {v.label}"
        if v.id in costs:
            line += f" cost {format_value(costs[v.id])}"
        out.append(line)
    out.extend(f"edge {a} {b}" for a, b in g.edges)
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ operations

def parse_operations(text: str, domain: Domain) -> dict:
    """All `operation` blocks of a document, by name, in file order."""
    from .algebra import Operation

    ops, block = {}, None
    for no, toks in _lines(text):
        head = toks[0]
        if block is not None:
            if head == "end":
                oname, k, entries, start = block
                if len(entries) != domain.size ** k:
                    raise SemanticError(start, f"operation {oname}: table is not total")
                ops[oname] = _semantic(start, Operation.from_labels, domain, k, entries, oname)
                block = None
                continue
            k = block[1]
            if len(toks) != k + 2 or toks[k] != ":":
                raise ParseError(no, f"expected {k} labels, ':' and a label")
            args = tuple(toks[:k])
            for lab in args + (toks[k + 1],):
                if lab not in domain:
                    raise SemanticError(no, f"label {lab!r} not in the domain")
            if args in block[2]:
                raise SemanticError(no, f"duplicate entry for {args}")
            block[2][args] = toks[k + 1]
            continue
        if head == "operation":
            if len(toks) != 4 or toks[2] != "arity":
                raise ParseError(no, "expected 'operation <name> arity <k>'")
            k = _int(toks[3], no, "arity")
            if k < 1:
                raise SemanticError(no, "arity must be >= 1")
            if toks[1] in ops:
                raise SemanticError(no, f"duplicate operation {toks[1]!r}")
            block = [toks[1], k, {}, no]
        elif head in ("fpol", "weight"):
            continue
        else:
            raise ParseError(no, f"unexpected {head!r}")
    if block is not None:
        raise ParseError(block[3], f"operation {block[0]} is missing 'end'")
    return ops


def serialize_operation(op) -> str:
    labels = op.domain.labels
    out = [f"operation {op.name} arity {op.arity}"]
    for t, v in zip(op.domain.tuples(op.arity), op.table):
        out.append("  " + " ".join(labels[i] for i in t) + f" : {labels[v]}")
    out.append("end")
    return "\n".join(out) + "\n"


def parse_fpol(text: str, domain: Domain, operations: Optional[dict] = None):
    """An fpol block; operations come from the same document unless given."""
    from .algebra import FractionalPolymorphism

    ops = dict(operations or {})
    ops.update(parse_operations(text, domain))
    seen_header, weights = False, []
    in_op = False
    for no, toks in _lines(text):
        if toks[0] == "operation":
            in_op = True
            continue
        if in_op:
            in_op = toks[0] != "end"
            continue
        if toks[0] == "fpol":
            if len(toks) != 1 or seen_header:
                raise ParseError(no, "expected a single 'fpol' line")
            seen_header = True
        elif toks[0] == "weight":
            if not seen_header:
                raise ParseError(no, "weight before 'fpol'")
            if len(toks) != 4 or toks[2] != "operation":
                raise ParseError(no, "expected 'weight <value> operation <name>'")
            w = _value(toks[1], no)
            if w is INF:
                raise SemanticError(no, "weight must be finite")
            if toks[3] not in ops:
                raise SemanticError(no, f"unknown operation {toks[3]!r}")
            weights.append((ops[toks[3]], w))
        else:
            raise ParseError(no, f"unexpected {toks[0]!r}")
    if not seen_header:
        raise ParseError(1, "missing 'fpol' line")
    if sum((w for _, w in weights), Fraction(0)) != 1:
        raise SemanticError(None, "weights do not sum to 1")
    return _semantic(None, FractionalPolymorphism, tuple(weights))


def serialize_fpol(omega, with_operations: bool = True) -> str:
    out = []
    if with_operations:
        out.extend(serialize_operation(op).rstrip("\n") for op, _ in omega.weights)
    out.append("fpol")
    out.extend(f"weight {format_value(w)} operation {op.name}" for op, w in omega.weights)
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------- solutions

def serialize_solution(optimum, assignment: Optional[dict] = None, order=None) -> str:
    if optimum is INF:
        return "infeasible\n"
    out = [f"optimum {format_value(optimum)}"]
    keys = order if order is not None else list(assignment or {})
    out.extend(f"assign {v} {assignment[v]}" for v in keys)
    return "\n".join(out) + "\n"


def parse_solution(text: str):
    """Returns (optimum, assignment); infeasible gives (INF, None)."""
    optimum, assignment = None, {}
    for no, toks in _lines(text):
        if toks == ["infeasible"]:
            if optimum is not None or assignment:
                raise ParseError(no, "'infeasible' must be the only line")
            return INF, None
        if toks[0] == "optimum" and len(toks) == 2:
            if optimum is not None:
                raise ParseError(no, "duplicate optimum")
            optimum = _value(toks[1], no)
        elif toks[0] == "assign" and len(toks) == 3:
            if toks[1] in assignment:
                raise SemanticError(no, f"variable {toks[1]!r} assigned twice")
            assignment[toks[1]] = toks[2]
        else:
            raise ParseError(no, f"unexpected {' '.join(toks)!r}")
    if optimum is None:
        raise ParseError(1, "missing optimum line")
    return optimum, assignment


# --------------------------------------------------------------------- sidecars

def serialize_layout(comb) -> str:
    return "".join(f"block {b.fname} {b.offset} {b.arity}\n" for b in comb.layout)


def parse_layout(text: str) -> list:
    out = []
    for no, toks in _lines(text):
        if len(toks) != 4 or toks[0] != "block":
            raise ParseError(no, "expected 'block <fname> <offset> <arity>'")
        out.append((toks[1], _int(toks[2], no, "offset"), _int(toks[3], no, "arity")))
    return out


def serialize_dual_map(di) -> str:
    return "".join(f"dualvar {dv} = constraint {i}\n"
                   for i, dv in enumerate(di.dual_vars, start=1))


def parse_dual_map(text: str) -> dict:
    out = {}
    for no, toks in _lines(text):
        if len(toks) != 5 or toks[0] != "dualvar" or toks[2] != "=" or toks[3] != "constraint":
            raise ParseError(no, "expected 'dualvar <var> = constraint <i>'")
        out[toks[1]] = _int(toks[4], no, "constraint index")
    return out


def serialize_ext_map(ei) -> str:
    out = [f"top {t} = constraint {i}" for i, t in enumerate(ei.tops, start=1)]
    for (i, j), names in sorted(ei.paths.items()):
        out.append(f"path {i} {j} = " + " ".join(names))
    return "\n".join(out) + "\n"


def parse_ext_map(text: str):
    tops, paths = {}, {}
    for no, toks in _lines(text):
        if toks[0] == "top" and len(toks) == 5 and toks[2] == "=" and toks[3] == "constraint":
            tops[toks[1]] = _int(toks[4], no, "constraint index")
        elif toks[0] == "path" and len(toks) >= 5 and toks[3] == "=":
            paths[(_int(toks[1], no, "index"), _int(toks[2], no, "index"))] = tuple(toks[4:])
        else:
            raise ParseError(no, f"unexpected {' '.join(toks)!r}")
    return tops, paths


def parse_identities(text: str) -> list:
    from .algebra import parse_identity

    out = []
    for no, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        try:
            out.append(parse_identity(body))
        except ParseError as e:
            raise ParseError(no, e.message) from None
    return out
