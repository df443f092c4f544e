"""Exact solvers: exhaustive oracle, chain-submodular min-cut, branch-and-bound."""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import INF, CostFunction, Domain, Instance, Language, ext_sum
from .errors import BudgetExceeded, PreconditionFailed
from .flow import FlowNetwork

BRUTE_BUDGET = 10 ** 7
BNB_BUDGET = 2 * 10 ** 6


@dataclass(frozen=True)
class Solution:
    optimum: object                 # Fraction, or INF when infeasible
    assignment: Optional[dict] = None
    method: str = ""
    stats: dict = field(default_factory=dict, compare=False)

    @property
    def infeasible(self) -> bool:
        return self.optimum is INF


def infeasible(method="", **stats) -> Solution:
    return Solution(INF, None, method, stats)


@dataclass(frozen=True)
class Declined:
    reason: str


class _Problem:
    """Index-level view of an instance: positions, index domains, scopes."""

    def __init__(self, inst: Instance, domains: Optional[dict] = None):
        self.inst = inst
        self.vars = list(inst.variables)
        self.pos = {v: i for i, v in enumerate(self.vars)}
        dom = inst.domain
        self.labels = dom.labels
        self.cons = [(inst.function(c), tuple(self.pos[v] for v in c.scope))
                     for c in inst.constraints]
        full = list(range(dom.size))
        self.doms = []
        for v in self.vars:
            if domains is not None and v in domains:
                self.doms.append(sorted(dom.index(l) for l in domains[v]))
            else:
                self.doms.append(list(full))

    def assignment(self, idx) -> dict:
        return {v: self.labels[i] for v, i in zip(self.vars, idx)}


def _eval_idx(cons, idx):
    return ext_sum(fn.value(tuple(idx[p] for p in scope)) for fn, scope in cons)


def brute_force(inst: Instance, budget: int = BRUTE_BUDGET) -> Solution:
    """Exhaustive search in lexicographic order; keeps the first strict improvement."""
    p = _Problem(inst)
    n = len(p.vars)
    k = inst.domain.size
    if k ** n > budget:
        raise BudgetExceeded(f"{k}^{n} assignments exceed the budget {budget}")
    # constraints are evaluated as soon as their last variable is set
    due = [[] for _ in range(n)]
    const = Fraction(0)
    for fn, scope in p.cons:
        if scope:
            due[max(scope)].append((fn, scope))
    best = [INF, None]
    idx = [0] * n

    def dfs(i, acc):
        if i == n:
            if acc < best[0]:
                best[0], best[1] = acc, list(idx)
            return
        for a in range(k):
            idx[i] = a
            total = acc
            for fn, scope in due[i]:
                v = fn.value(tuple(idx[q] for q in scope))
                if v is INF:
                    total = INF
                    break
                total += v
            if total is INF:
                continue
            dfs(i + 1, total)

    dfs(0, const)
    if best[1] is None:
        return infeasible("brute")
    return Solution(best[0], p.assignment(best[1]), "brute")


# ---------------------------------------------------------------- submodularity

def _meet_join(x, y, rank):
    lo = tuple(a if rank[a] <= rank[b] else b for a, b in zip(x, y))
    hi = tuple(b if rank[a] <= rank[b] else a for a, b in zip(x, y))
    return lo, hi


def check_chain_submodular(phi, order=None, witness=False):
    """Feas closed under min/max for the order, and phi(x^y)+phi(xvy) <= phi(x)+phi(y).

    `order` lists domain labels (or indices) from least to greatest.
    With witness=True returns (bool, offending pair or None).
    """
    size = phi.domain.size
    if order is None:
        rank = list(range(size))
    else:
        order = [phi.domain.index(o) if isinstance(o, str) else o for o in order]
        if sorted(order) != list(range(size)):
            raise PreconditionFailed("order must be a permutation of the domain")
        rank = [0] * size
        for r, a in enumerate(order):
            rank[a] = r
    finite = [(t, phi.value(t)) for t in phi.feas_tuples]
    for i, (x, fx) in enumerate(finite):
        for y, fy in finite[i + 1:]:
            lo, hi = _meet_join(x, y, rank)
            if lo == x or lo == y:
                continue
            flo, fhi = phi.value(lo), phi.value(hi)
            if flo is INF or fhi is INF or flo + fhi > fx + fy:
                return (False, (x, y)) if witness else False
    return (True, None) if witness else True


# --------------------------------------------------------------------- min-cut

def _arc_consistency(doms, cons):
    """Shrink index domains (lists, order kept) to arc-consistent values.

    Handles constraints of any arity by support scanning. Returns None
    on a wipe-out.
    """
    doms = [list(d) for d in doms]
    sets = [set(d) for d in doms]
    by_var = {}
    for ci, (fn, scope) in enumerate(cons):
        for p in set(scope):
            by_var.setdefault(p, []).append(ci)
    queue = deque(range(len(cons)))
    queued = set(queue)
    while queue:
        ci = queue.popleft()
        queued.discard(ci)
        fn, scope = cons[ci]
        supported = [set() for _ in scope]
        for t in fn.feas_tuples:
            ok = True
            seen = {}
            for j, p in enumerate(scope):
                if t[j] not in sets[p] or seen.setdefault(p, t[j]) != t[j]:
                    ok = False
                    break
            if ok:
                for j in range(len(scope)):
                    supported[j].add(t[j])
        changed = set()
        for j, p in enumerate(scope):
            keep = sets[p] & supported[j]
            if len(keep) != len(sets[p]):
                sets[p] = keep
                changed.add(p)
        for p in changed:
            if not sets[p]:
                return None
            doms[p] = [a for a in doms[p] if a in sets[p]]
            for cj in by_var.get(p, ()):
                if cj not in queued:
                    queue.append(cj)
                    queued.add(cj)
    return doms


def _restricted_table(fn, scope, doms):
    """Matrix of fn over the ordered domains of its (distinct) scope variables."""
    if len(scope) == 1:
        return [fn.value((a,)) for a in doms[scope[0]]]
    x, y = scope
    return [[fn.value((a, b)) for b in doms[y]] for a in doms[x]]


def _submodular_matrix(mat) -> bool:
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    finite = [(i, j, mat[i][j]) for i in range(rows) for j in range(cols)
              if mat[i][j] is not INF]
    for n, (i, j, f) in enumerate(finite):
        for i2, j2, f2 in finite[n + 1:]:
            if (i <= i2) == (j <= j2):
                continue
            lo, hi = mat[min(i, i2)][min(j, j2)], mat[max(i, i2)][max(j, j2)]
            if lo is INF or hi is INF or lo + hi > f + f2:
                return False
    return True


def _extend(mat, big):
    """Replace infinite entries by finite ones that keep submodularity when possible.

    Each infeasible entry gets the value at its nearest feasible entry in
    its row plus `big` times the distance to that row's feasible band.
    """
    rows, cols = len(mat), len(mat[0])
    out = []
    for i in range(rows):
        fin = [j for j in range(cols) if mat[i][j] is not INF]
        lo, hi = fin[0], fin[-1]
        row = []
        for j in range(cols):
            if mat[i][j] is not INF:
                row.append(mat[i][j])
            else:
                near = lo if j < lo else hi
                row.append(mat[i][near] + big * abs(j - near))
        out.append(row)
    return out


def _pairwise_caps(mat):
    """First differences of the border and negated second differences inside."""
    theta = {}
    for a in range(1, len(mat)):
        for b in range(1, len(mat[0])):
            theta[(a, b)] = mat[a][b - 1] + mat[a - 1][b] - mat[a][b] - mat[a - 1][b - 1]
    return theta


def _mincut_core(doms, cons, big):
    """Threshold network over ordered index domains. Returns (positions, cut+const) or Declined."""
    n = len(doms)
    unary = [[Fraction(0)] * len(d) for d in doms]
    const = Fraction(0)
    pairs = []
    for fn, scope in cons:
        if len(scope) == 1 or len(set(scope)) == 1:
            p = scope[0]
            for r, a in enumerate(doms[p]):
                v = fn.value(tuple(a for _ in scope))
                unary[p][r] += big if v is INF else v
            continue
        x, y = scope
        mat = _restricted_table(fn, scope, doms)
        if any(all(v is INF for v in row) for row in mat):
            return Declined("row without a feasible entry after filtering")
        mat = _extend(mat, big)
        pairs.append((x, y, mat))
    net = FlowNetwork()
    arcs = []

    def unary_arcs(p, vals):
        nonlocal const
        const += vals[0]
        for a in range(1, len(vals)):
            d = vals[a] - vals[a - 1]
            if d >= 0:
                arcs.append(((p, a), "t", d))
            else:
                # d*[x>=a] = d + |d|*[x<a]
                const += d
                arcs.append(("s", (p, a), -d))

    for x, y, mat in pairs:
        kx, ky = len(mat), len(mat[0])
        const += mat[0][0]
        ux = [mat[a][0] - mat[0][0] for a in range(kx)]
        uy = [mat[0][b] - mat[0][0] for b in range(ky)]
        theta = _pairwise_caps(mat)
        for (a, b), th in theta.items():
            if th < 0:
                return Declined(f"negative pairwise capacity {th}")
            if th == 0:
                continue
            # -th*[x>=a][y>=b] = -th*[x>=a] + th*[x>=a][y<b]
            for a2 in range(a, kx):
                ux[a2] -= th
            arcs.append(((x, a), (y, b), th))
        for a in range(kx):
            unary[x][a] += ux[a]
        for b in range(ky):
            unary[y][b] += uy[b]
    for p in range(n):
        unary_arcs(p, unary[p])
    hard = sum((c for _, _, c in arcs), Fraction(0)) + 1
    for p in range(n):
        for a in range(1, len(doms[p]) - 1):
            net.add_arc(_node(p, a + 1), _node(p, a), hard)
    for u, v, c in arcs:
        net.add_arc(_node(*u) if isinstance(u, tuple) else u,
                    _node(*v) if isinstance(v, tuple) else v, c)
    value, _, source_side = net.max_flow()
    pos = []
    for p in range(n):
        r = 0
        while r + 1 < len(doms[p]) and _node(p, r + 1) in source_side:
            r += 1
        pos.append(r)
    return pos, value + const


def _node(p, a):
    return ("n", p, a)


def mincut_solve(inst: Instance, order=None, domains: Optional[dict] = None):
    """Minimise a chain-submodular instance with unary and binary constraints.

    `order` is a list of domain labels (least first) applied to every
    variable; `domains` optionally gives each variable its own ordered list
    of allowed labels instead. Returns a Solution or Declined.
    """
    p = _Problem(inst)
    dom = inst.domain
    if domains is not None:
        doms = [[dom.index(l) for l in domains[v]] if v in domains else list(range(dom.size))
                for v in p.vars]
    elif order is not None:
        ordered = [dom.index(l) for l in order]
        if sorted(ordered) != list(range(dom.size)):
            raise PreconditionFailed("order must be a permutation of the domain")
        doms = [list(ordered) for _ in p.vars]
    else:
        doms = [list(range(dom.size)) for _ in p.vars]
    for fn, scope in p.cons:
        if len(scope) > 2:
            raise PreconditionFailed(f"{fn.name} has arity {len(scope)} > 2")
        if len(scope) == 2 and scope[0] != scope[1]:
            if not _submodular_matrix(_restricted_table(fn, scope, doms)):
                raise PreconditionFailed(f"{fn.name} is not submodular for the given order")
    # infinite unary entries and unsupported values are removed up front so
    # that the big-M extension only has to cover pairwise gaps
    filtered = _arc_consistency(doms, p.cons)
    if filtered is None:
        return infeasible("mincut")
    total_abs = sum((abs(v) for fn, _ in p.cons for v in fn.finite_values), Fraction(0))
    big = 1 + 2 * total_abs
    res = _mincut_core(filtered, p.cons, big)
    if isinstance(res, Declined):
        return res
    pos, cut_value = res
    idx = [filtered[q][r] for q, r in enumerate(pos)]
    value = _eval_idx(p.cons, idx)
    if value is INF:
        return infeasible("mincut")
    return Solution(value, p.assignment(idx), "mincut", {"cut": cut_value})


# ------------------------------------------------------------ branch and bound

def branch_and_bound(inst: Instance, domains: Optional[dict] = None,
                     budget: int = BNB_BUDGET) -> Solution:
    """Depth-first search in variable order with arc consistency and a
    sum-of-independent-minima lower bound. Returns the lexicographically
    least optimum over the allowed domains.

    Connected components of the constraint graph are searched separately;
    the combination of their lexicographically least optima is the
    lexicographically least optimum of the whole.
    """
    p = _Problem(inst, domains)
    n = len(p.vars)
    doms0 = _arc_consistency(p.doms, p.cons)
    if doms0 is None:
        return infeasible("bnb", nodes=0)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for _, scope in p.cons:
        for q in scope[1:]:
            ra, rb = find(scope[0]), find(q)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    by_group = {}
    for ci, (fn, scope) in enumerate(p.cons):
        by_group.setdefault(find(scope[0]), []).append(ci)
    idx = [0] * n
    total = Fraction(0)
    nodes = [0]
    for root, members in groups.items():
        cis = by_group.get(root, [])
        if not cis:
            idx[members[0]] = min(doms0[members[0]])
            continue
        res = _bnb_component(p, members, [p.cons[c] for c in cis], doms0, budget, nodes)
        if res is None:
            return infeasible("bnb", nodes=nodes[0])
        value, local = res
        total += value
        for q, a in zip(members, local):
            idx[q] = a
    return Solution(total, p.assignment(idx), "bnb", {"nodes": nodes[0]})


def _bnb_component(p, members, cons_global, doms0, budget, nodes):
    """Search one connected component; returns (optimum, index values) or None."""
    local = {q: i for i, q in enumerate(members)}
    n = len(members)
    cons = [(fn, tuple(local[q] for q in scope)) for fn, scope in cons_global]
    binary_arcs = [[] for _ in range(n)]
    other = [[] for _ in range(n)]
    for ci, (fn, scope) in enumerate(cons):
        if len(scope) == 2 and scope[0] != scope[1]:
            binary_arcs[scope[0]].append((scope[1], fn, True))
            binary_arcs[scope[1]].append((scope[0], fn, False))
        elif len(scope) > 1:
            for q in set(scope):
                other[q].append(ci)
    soft = [(fn, scope) for fn, scope in cons if not _is_zero_crisp(fn)]
    due = [[] for _ in range(n)]
    for fn, scope in soft:
        due[max(scope)].append((fn, scope))
    pending = [[] for _ in range(n)]   # soft constraints still open once var i is set
    for fn, scope in soft:
        for i in range(max(scope)):
            pending[i].append((fn, scope))

    def propagate(sets, start):
        queue = deque(start)
        queued = set(start)
        while queue:
            y = queue.popleft()
            queued.discard(y)
            dy = sets[y]
            for x, fn, y_first in binary_arcs[y]:
                if y_first:
                    keep = {a for a in sets[x] if not fn.in_support(a).isdisjoint(dy)}
                else:
                    keep = {a for a in sets[x] if not fn.out_support(a).isdisjoint(dy)}
                if len(keep) != len(sets[x]):
                    if not keep:
                        return False
                    sets[x] = keep
                    if x not in queued:
                        queue.append(x)
                        queued.add(x)
            for ci in other[y]:
                fn, scope = cons[ci]
                supported = [set() for _ in scope]
                for t in fn.feas_tuples:
                    if all(t[j] in sets[q] for j, q in enumerate(scope)) and \
                            all(t[j] == t[scope.index(q)] for j, q in enumerate(scope)):
                        for j in range(len(scope)):
                            supported[j].add(t[j])
                for j, q in enumerate(scope):
                    keep = sets[q] & supported[j]
                    if len(keep) != len(sets[q]):
                        if not keep:
                            return False
                        sets[q] = keep
                        if q not in queued:
                            queue.append(q)
                            queued.add(q)
        return True

    def bound(sets, i):
        lb = Fraction(0)
        for fn, scope in pending[i]:
            space = 1
            for q in set(scope):
                space *= len(sets[q])
            if space <= 256:
                vars_ = sorted(set(scope))
                best = INF
                for combo in itertools.product(*(sorted(sets[q]) for q in vars_)):
                    val = dict(zip(vars_, combo))
                    v = fn.value(tuple(val[q] for q in scope))
                    if v is not INF and (best is INF or v < best):
                        best = v
                if best is INF:
                    return INF
                lb += best
            elif fn.min_finite is None:
                return INF
            else:
                lb += fn.min_finite
        return lb

    best = [INF, None]
    idx = [0] * n

    def dfs(i, sets, acc):
        if i == n:
            if acc < best[0]:
                best[0], best[1] = acc, list(idx)
            return
        for a in sorted(sets[i]):
            nodes[0] += 1
            if nodes[0] > budget:
                raise BudgetExceeded(f"branch-and-bound exceeded {budget} nodes")
            ns = list(sets)
            ns[i] = {a}
            if not propagate(ns, [i]):
                continue
            idx[i] = a
            total = acc
            for fn, scope in due[i]:
                v = fn.value(tuple(idx[q] for q in scope))
                if v is INF:
                    total = INF
                    break
                total += v
            if total is INF:
                continue
            if best[0] is not INF:
                lb = bound(ns, i)
                if lb is INF or total + lb >= best[0]:
                    continue
            dfs(i + 1, ns, total)

    dfs(0, [set(doms0[q]) for q in members], Fraction(0))
    if best[1] is None:
        return None
    return best[0], best[1]


def _is_zero_crisp(fn) -> bool:
    return fn.is_crisp


# -------------------------------------------------------------- min-cost hom

def min_cost_hom(source, target, costs: Optional[dict] = None,
                 budget: int = BNB_BUDGET, use_levels: bool = True) -> Solution:
    """Cheapest homomorphism source -> target under per-source-vertex unary costs.

    `costs` maps a source vertex id to {target id: value}; missing target
    ids cost 0 and missing source vertices are free.
    """
    from .digraph import DigraphRelation, level_candidates

    dom = Domain(tuple(target.vertices))
    rel = DigraphRelation("edge", target, dom)
    fns = [rel]
    cons = [("edge", (a, b)) for a, b in source.edges]
    tables = {}
    for v, table in (costs or {}).items():
        key = tuple(Fraction(0) if table.get(t, 0) is None else table.get(t, 0)
                    for t in dom.labels)
        if key not in tables:
            name = f"cost{len(tables)}"
            tables[key] = CostFunction(name, dom, 1, key)
            fns.append(tables[key])
        cons.append((tables[key].name, (v,)))
    inst = Instance(Language(dom, fns, name="hom"), tuple(source.vertices), cons)
    domains = None
    if use_levels:
        cand = level_candidates(source, target)
        if cand is None:
            return infeasible("bnb")
        domains = cand or None
    sol = branch_and_bound(inst, domains=domains, budget=budget)
    return sol


def solve(inst: Instance, method: str = "auto", order=None,
          budget: Optional[int] = None) -> Solution:
    """Dispatch on `method`: brute, mincut, bnb or auto."""
    if method == "brute":
        return brute_force(inst, budget or BRUTE_BUDGET)
    if method == "bnb":
        return branch_and_bound(inst, budget=budget or BNB_BUDGET)
    if method == "mincut":
        res = mincut_solve(inst, order)
        if isinstance(res, Declined):
            raise PreconditionFailed(f"min-cut declined: {res.reason}")
        return res
    if method != "auto":
        raise PreconditionFailed(f"unknown method {method!r}")
    k, n = inst.domain.size, len(inst.variables)
    if k ** n <= 10 ** 5:
        return brute_force(inst)
    if all(len(c.scope) <= 2 for c in inst.constraints):
        try:
            res = mincut_solve(inst, order)
        except PreconditionFailed:
            res = None
        if isinstance(res, Solution):
            return res
    return branch_and_bound(inst, budget=budget or BNB_BUDGET)
