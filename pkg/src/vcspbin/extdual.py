"""Extended dual instances over {D_Gamma, mu} and the reduction back to the dual."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import INF, Instance
from .digraph import (DGAMMA, MU, ExtDualLanguage, LeveledDigraph, OrientedPathSpec,
                      Vertex, build_QS, components, homomorphisms, level_candidates,
                      levels)
from .dual import PHI_D, DualLanguage, match_name
from .errors import NotApplicable, WrongLanguage
from .solve import (Declined, Solution, branch_and_bound, infeasible, mincut_solve)
from .errors import PreconditionFailed


def path_var(i: int, j: int, p: int) -> str:
    return f"y[{i},{j},{p}]"


def top_var(i: int) -> str:
    return f"x'{i}"


@dataclass(frozen=True)
class ExtDualInstance:
    instance: Instance
    source: Instance
    tops: tuple                 # top variable per source constraint
    paths: dict                 # (i, j) -> variable names from x_{i_j} up to x'_i

    def decode(self, assignment: dict) -> dict:
        """Level-0 vertices are base labels, which are the original labels."""
        return {v: assignment[v] for v in self.source.variables}

    def encode(self, assignment: dict, ext: ExtDualLanguage) -> dict:
        """Lift a feasible source assignment to I_e along the chosen paths."""
        out = dict(assignment)
        for i, c in enumerate(self.source.constraints, start=1):
            x = "(" + ",".join(assignment[v] for v in c.scope) + ")"
            out[self.tops[i - 1]] = x
            for j in range(1, len(c.scope) + 1):
                d = assignment[c.scope[j - 1]]
                path = ext.paths[(d, x)]
                q = _path_spec(ext, d, x)
                hom = _map_path(build_QS(ext.m, {j}), q, ext, path)
                for p, var in enumerate(self.paths[(i, j)]):
                    out[var] = hom[p]
        return out


def _path_spec(ext, d, x) -> OrientedPathSpec:
    return build_QS(ext.m, ext.path_set(d, x))


def _map_path(src: OrientedPathSpec, dst: OrientedPathSpec, ext, path_ids) -> list:
    g = src.as_digraph("s")
    h = dst.as_digraph("t")
    lv = src.vertex_levels
    hl = dst.vertex_levels
    cand = {f"s{i}": [f"t{k}" for k in range(dst.vertex_count) if hl[k] == lv[i]]
            for i in range(src.vertex_count)}
    cand["s0"] = ["t0"]
    cand[f"s{src.vertex_count - 1}"] = [f"t{dst.vertex_count - 1}"]
    hom = next(homomorphisms(g, h, cand, limit=1), None)
    if hom is None:
        raise PreconditionFailed("Q_{j} does not map into the chosen path")
    return [path_ids[int(hom[f"s{i}"][1:])] for i in range(src.vertex_count)]


def extdual_instance(inst: Instance, ext: ExtDualLanguage) -> ExtDualInstance:
    comb = ext.combined
    if inst.language != comb.language():
        raise WrongLanguage("instance must use only the combined function")
    m = comb.m
    q = len(inst.constraints)
    tops = tuple(top_var(i) for i in range(1, q + 1))
    taken = set(inst.variables) | set(tops)
    if len(taken) != len(inst.variables) + q:
        raise WrongLanguage("variable names clash with the x'i top variables")
    variables = list(inst.variables) + list(tops)
    constraints = []
    paths = {}
    for i, c in enumerate(inst.constraints, start=1):
        for j in range(1, m + 1):
            spec = build_QS(m, {j})
            names = [c.scope[j - 1]]
            for p in range(1, spec.vertex_count - 1):
                v = path_var(i, j, p)
                if v in taken:
                    raise WrongLanguage(f"variable name {v} is reserved")
                taken.add(v)
                variables.append(v)
                names.append(v)
            names.append(tops[i - 1])
            for a, b in spec.edges():
                constraints.append((DGAMMA, (names[a], names[b])))
            paths[(i, j)] = tuple(names)
        constraints.append((MU, (tops[i - 1],)))
    out = Instance(ext.language(), variables, constraints, name=f"{inst.name}_e")
    return ExtDualInstance(out, inst, tops, paths)


def scope_digraph(inst: Instance) -> LeveledDigraph:
    """Variables as vertices, one edge per D_Gamma constraint."""
    g = LeveledDigraph([Vertex(v) for v in inst.variables], name="scope")
    for c in inst.constraints:
        if c.fname == DGAMMA:
            g.add_edge(*c.scope)
    return g


def level_domains(inst: Instance, ext: ExtDualLanguage) -> Optional[dict]:
    """Candidate vertices per variable from level arithmetic; None if no hom can exist."""
    g = scope_digraph(inst)
    cand = level_candidates(g, ext.d_gamma)
    return cand


def solve_ext(inst: Instance, ext: ExtDualLanguage, budget: Optional[int] = None) -> Solution:
    """Exact optimum of an instance over {D_Gamma, mu} by branch-and-bound."""
    if inst.language != ext.language():
        raise WrongLanguage("instance is not over this extended dual language")
    doms = level_domains(inst, ext)
    if doms is None:
        return infeasible("bnb")
    kw = {} if budget is None else {"budget": budget}
    return branch_and_bound(inst, domains=doms, **kw)


# ------------------------------------------------------------------ S0 and homs

def _lv(g: LeveledDigraph, lv: Optional[dict]) -> dict:
    return lv if lv is not None else {v.id: v.level for v in g.vertices.values()}


def level_hom_exists(C: LeveledDigraph, Q: OrientedPathSpec, lv: Optional[dict] = None) -> bool:
    """Is there an edge-preserving map C -> Q sending each vertex to Q's vertex of the same level?"""
    lv = _lv(C, lv)
    target = Q.as_digraph("q")
    qlv = Q.vertex_levels
    by_level = {}
    for i, l in enumerate(qlv):
        by_level.setdefault(l, []).append(f"q{i}")
    cand = {v: by_level.get(lv[v], []) for v in C.vertices}
    if any(not c for c in cand.values()):
        return False
    return next(homomorphisms(C, target, cand, limit=1), None) is not None


def compute_S0(C: LeveledDigraph, m: int, lv: Optional[dict] = None) -> frozenset:
    """Smallest S such that C maps level-respectingly into Q_S.

    C should include its neighbours at levels 0 and m+2, which pin it to the
    ends of the path.
    """
    lv = _lv(C, lv)
    if C.vertices and (min(lv[v] for v in C.vertices) < 0
                       or max(lv[v] for v in C.vertices) > m + 2):
        raise NotApplicable("component levels fall outside 0..m+2")
    full = frozenset(range(1, m + 1))
    if not level_hom_exists(C, build_QS(m, full), lv):
        raise NotApplicable("component does not map into any Q_S")
    return frozenset(i for i in full if not level_hom_exists(C, build_QS(m, full - {i}), lv))


@dataclass(frozen=True)
class ComponentAnalysis:
    vertices: tuple
    S0: frozenset
    top_neighbors: tuple
    bottom_neighbors: tuple


# ------------------------------------------------------------------- verdicts

@dataclass(frozen=True)
class Infeasible:
    reason: str

    @property
    def optimum(self):
        return INF


@dataclass(frozen=True)
class SolvedDirectly:
    optimum: Fraction
    assignment: dict
    fallback: bool = False


@dataclass(frozen=True)
class _FullPlan:
    """Everything needed to turn a dual solution back into vertex labels."""
    tops: tuple
    phantoms: dict              # phantom dual var -> middle component index
    middles: tuple              # ComponentAnalysis per middle component
    middle_graphs: tuple        # anchored LeveledDigraph per middle component
    middle_dual: tuple          # dual variable carrying each middle component's tuple, or None
    bottom_classes: tuple       # tuples of bottom vars that must share a base label
    class_source: tuple         # per class: (dual var, coordinate) fixing its label, or None


@dataclass(frozen=True)
class DualVerdict:
    instance: Instance          # over the dual language
    offset: Fraction            # summed optima of the directly solved components
    partial: dict               # assignment of the directly solved components
    plan: _FullPlan
    fallback: bool = False

    def decode(self, dual_assignment: dict, ext: ExtDualLanguage) -> dict:
        """Assignment of the Gamma_e instance from one of the dual instance."""
        plan = self.plan
        out = dict(self.partial)
        for t in plan.tops:
            out[t] = dual_assignment[t]
        base = ext.base_ids
        first_tuple = ext.tuple_ids[0]

        def coord(dv, k):
            labels = dual_assignment[dv][1:-1].split(",")
            return labels[k - 1]

        class_label = {}
        for members, src in zip(plan.bottom_classes, plan.class_source):
            lab = coord(*src) if src is not None else base[0]
            for b in members:
                out[b] = lab
                class_label[b] = lab
        for ca, g, dv in zip(plan.middles, plan.middle_graphs, plan.middle_dual):
            if ca.bottom_neighbors:
                d = class_label[ca.bottom_neighbors[0]]
            else:
                d = coord(dv, min(ca.S0)) if ca.S0 else base[0]
            x = dual_assignment[dv] if dv is not None else first_tuple
            path = ext.paths[(d, x)]
            lv = {v.id: v.level for v in g.vertices.values()}
            cand = {v: [p for p in path if ext.levels[p] == lv[v]] for v in g.vertices}
            for b in ca.bottom_neighbors:
                cand[b] = [d]
            for t in ca.top_neighbors:
                cand[t] = [x]
            hom = next(homomorphisms(g, ext.d_gamma.subgraph(path), cand, limit=1), None)
            if hom is None:
                raise PreconditionFailed("middle component does not fit its chosen path")
            for v in ca.vertices:
                out[v] = hom[v]
        return out


def _component_instance(inst: Instance, comp_vars) -> Instance:
    keep = set(comp_vars)
    return Instance(inst.language, [v for v in inst.variables if v in keep],
                    [c for c in inst.constraints if c.scope[0] in keep], name=inst.name)


def _star_regions(ext: ExtDualLanguage):
    """Each base vertex's spider and each tuple vertex's spider of paths.

    Yields an ordered list of (vertex, path index, position) per region.
    """
    for d in ext.base_ids:
        out = [(d, -1, 0)]
        for pi, x in enumerate(ext.tuple_ids):
            ids = ext.paths[(d, x)]
            out.extend((v, pi, pos) for pos, v in enumerate(ids) if pos > 0)
        yield out
    for x in ext.tuple_ids:
        out = [(x, -1, 0)]
        for pi, d in enumerate(ext.base_ids):
            ids = ext.paths[(d, x)]
            out.extend((v, pi, pos) for pos, v in enumerate(ids) if pos < len(ids) - 1)
        yield out


def _solve_short(sub: Instance, lv: dict, h: int, ext: ExtDualLanguage):
    """Components of height below m+2: best over star regions and level shifts."""
    if not any(c.fname == DGAMMA for c in sub.constraints):
        # lone vertices: pick the cheapest vertex for each
        mu = ext.mu
        total, assignment = Fraction(0), {}
        counts = {v: 0 for v in sub.variables}
        for c in sub.constraints:
            counts[c.scope[0]] += 1
        for v in sub.variables:
            best = min(range(mu.domain.size), key=lambda i: (counts[v] * mu.value((i,)), i))
            assignment[v] = mu.domain.labels[best]
            total += counts[v] * mu.value((best,))
        return SolvedDirectly(total, assignment)
    best, best_assign, fallback = INF, None, False
    top = ext.height
    for region in _star_regions(ext):
        ranked = sorted(region, key=lambda r: (ext.levels[r[0]], r[1], r[2]))
        by_level = {}
        for vid, _, _ in ranked:
            by_level.setdefault(ext.levels[vid], []).append(vid)
        for shift in range(0, top - h + 1):
            domains = {v: by_level.get(shift + lv[v], []) for v in sub.variables}
            if any(not d for d in domains.values()):
                continue
            try:
                res = mincut_solve(sub, domains=domains)
            except PreconditionFailed:
                res = Declined("restriction is not chain-submodular")
            if isinstance(res, Declined):
                fallback = True
                res = branch_and_bound(sub, domains=domains)
            if res.optimum is not INF and res.optimum < best:
                best, best_assign = res.optimum, res.assignment
    if best_assign is None:
        return Infeasible("no short component image exists")
    return SolvedDirectly(best, best_assign, fallback)


def reverse_reduce(inst: Instance, ext: ExtDualLanguage, dual: DualLanguage):
    """Case analysis on the scope digraph, per connected component.

    Returns Infeasible, SolvedDirectly, or a DualVerdict whose instance is
    over `dual` and whose optimum plus `offset` equals opt(inst).
    """
    if inst.language != ext.language():
        raise WrongLanguage("instance is not over this extended dual language")
    if dual.combined is not ext.combined and dual.combined != ext.combined:
        raise WrongLanguage("dual and extended dual come from different languages")
    m = ext.m
    H = ext.height
    g = scope_digraph(inst)
    offset = Fraction(0)
    partial = {}
    fallback = False
    full = []
    for comp in components(g):
        lv = levels(comp)
        if lv is None:
            return Infeasible("scope digraph is unbalanced")
        h = max(lv.values(), default=0)
        if h > H:
            return Infeasible(f"component height {h} exceeds {H}")
        if h < H:
            res = _solve_short(_component_instance(inst, comp.vertices), lv, h, ext)
            if isinstance(res, Infeasible):
                return res
            offset += res.optimum
            partial.update(res.assignment)
            fallback = fallback or res.fallback
        else:
            full.append((comp, lv))
    if not full:
        return SolvedDirectly(offset, partial, fallback)

    mu_count = {}
    for c in inst.constraints:
        if c.fname == MU:
            mu_count[c.scope[0]] = mu_count.get(c.scope[0], 0) + 1
    # mu is zero away from tuple vertices, so only tops carry cost
    dual_vars = []
    cons = []
    tops_all = []
    middles, graphs, middle_dual = [], [], []
    classes_all, sources_all = [], []
    phantoms = {}
    for comp, lv in full:
        tops = [v for v in comp.vertices if lv[v] == H]
        bottoms = [v for v in comp.vertices if lv[v] == 0]
        tops_all.extend(tops)
        dual_vars.extend(tops)
        for t in tops:
            cons.extend([(PHI_D, (t,))] * mu_count.get(t, 0))
        inner = comp.subgraph([v for v in comp.vertices if 0 < lv[v] < H])
        comp_middles = []
        for C in components(inner):
            ids = set(C.vertices)
            nb_top, nb_bot = [], []
            for v in C.vertices:
                for w in comp.neighbors(v):
                    if lv[w] == H and w not in nb_top:
                        nb_top.append(w)
                    elif lv[w] == 0 and w not in nb_bot:
                        nb_bot.append(w)
            anchored_ids = ids | set(nb_top) | set(nb_bot)
            anchored = LeveledDigraph(
                [Vertex(v, "internal", lv[v]) for v in comp.vertices if v in anchored_ids],
                [(a, b) for a, b in comp.edges if (a in ids or b in ids)])
            S0 = compute_S0(anchored, m)
            ca = ComponentAnalysis(tuple(C.vertices), S0, tuple(sorted(nb_top, key=comp.ids.index)),
                                   tuple(sorted(nb_bot, key=comp.ids.index)))
            carrier = ca.top_neighbors[0] if ca.top_neighbors else None
            if carrier is None and S0:
                # a bottom-only component still needs some tuple x with x[i] = d on S0
                carrier = f"_phantom{len(phantoms) + 1}"
                phantoms[carrier] = len(middles)
                dual_vars.append(carrier)
            for t in ca.top_neighbors[1:]:
                for k in range(1, m + 1):
                    cons.append((match_name(k, k), (ca.top_neighbors[0], t)))
            if carrier is not None and len(S0) >= 2:
                s = sorted(S0)
                for k in s:
                    for l in s:
                        if k < l:
                            cons.append((match_name(k, l), (carrier, carrier)))
            comp_middles.append((ca, carrier))
            middles.append(ca)
            graphs.append(anchored)
            middle_dual.append(carrier)
        # bottoms adjacent to one middle component share a base label
        parent = {b: b for b in bottoms}

        def find(b):
            while parent[b] != b:
                parent[b] = parent[parent[b]]
                b = parent[b]
            return b

        for ca, _ in comp_middles:
            for b in ca.bottom_neighbors[1:]:
                ra, rb = find(ca.bottom_neighbors[0]), find(b)
                if ra != rb:
                    if bottoms.index(ra) > bottoms.index(rb):
                        ra, rb = rb, ra
                    parent[rb] = ra
        groups = {}
        for b in bottoms:
            groups.setdefault(find(b), []).append(b)
        for root, members in groups.items():
            linked = [(ca, carrier) for ca, carrier in comp_middles
                      if ca.bottom_neighbors and find(ca.bottom_neighbors[0]) == root
                      and ca.S0 and carrier is not None]
            src = None
            if linked:
                ca0, car0 = linked[0]
                src = (car0, min(ca0.S0))
                for ca, car in linked[1:]:
                    cons.append((match_name(min(ca0.S0), min(ca.S0)), (car0, car)))
            classes_all.append(tuple(members))
            sources_all.append(src)
    dual_inst = Instance(dual.language(), dual_vars, cons, name=f"{inst.name}_r")
    plan = _FullPlan(tuple(tops_all), phantoms, tuple(middles), tuple(graphs),
                     tuple(middle_dual), tuple(classes_all), tuple(sources_all))
    return DualVerdict(dual_inst, offset, partial, plan, fallback)
