"""Seeded random languages and instances for property checks and `verify --fuzz`."""

from __future__ import annotations

import random
from fractions import Fraction

from .core import INF, CostFunction, Domain, Instance, Language
from .solve import check_chain_submodular

VALUES = (0, 1, 2, 3, 4, 5, INF)


def random_domain(rng: random.Random, max_size=3, min_size=2) -> Domain:
    return Domain(tuple(str(i) for i in range(rng.randint(min_size, max_size))))


def random_function(rng, name, domain, arity, values=VALUES, p_inf=0.3) -> CostFunction:
    while True:
        table = tuple(INF if rng.random() < p_inf else rng.choice([v for v in values if v is not INF])
                      for _ in range(domain.size ** arity))
        if any(v is not INF for v in table):
            return CostFunction(name, domain, arity, table)


def random_language(rng, max_domain=3, max_total_arity=3, max_functions=2,
                    p_inf=0.3, domain=None) -> Language:
    """Functions whose arities sum to at most max_total_arity."""
    domain = domain or random_domain(rng, max_domain)
    total = rng.randint(1, max_total_arity)
    arities = []
    while total > 0 and len(arities) < max_functions:
        a = rng.randint(1, total) if len(arities) + 1 < max_functions else total
        arities.append(a)
        total -= a
    fns = [random_function(rng, f"f{i}", domain, a, p_inf=p_inf) for i, a in enumerate(arities)]
    return Language(domain, fns, name="rand")


def random_instance(rng, lang: Language, max_vars=4, max_constraints=4) -> Instance:
    n = rng.randint(1, max_vars)
    vs = [f"v{i}" for i in range(n)]
    cons = []
    for _ in range(rng.randint(1, max_constraints)):
        f = rng.choice(lang.functions)
        cons.append((f.name, tuple(rng.choice(vs) for _ in range(f.arity))))
    return Instance(lang, vs, cons, name="rand")


def random_chain_submodular(rng, name, domain, p_inf=0.4) -> CostFunction:
    """Binary function, submodular for the natural order, possibly with infinite entries.

    Built from a convex function of x - y plus boundary-separable terms; the
    feasible set, when restricted, is a band lo <= y - x <= hi, which is a lattice.
    """
    k = domain.size
    while True:
        weights = [rng.randint(0, 2) for _ in range(2 * k)]
        ux = [rng.randint(0, 3) for _ in range(k)]
        uy = [rng.randint(0, 3) for _ in range(k)]
        lo, hi = rng.randint(-(k - 1), 0), rng.randint(0, k - 1)
        band = rng.random() < p_inf
        table = []
        for a in range(k):
            for b in range(k):
                d = b - a
                if band and not lo <= d <= hi:
                    table.append(INF)
                    continue
                conv = sum(w * max(0, abs(d) - i) for i, w in enumerate(weights[:k]))
                table.append(Fraction(conv + ux[a] + uy[b]))
        phi = CostFunction(name, domain, 2, tuple(table))
        if phi.min_finite is not None and check_chain_submodular(phi):
            return phi


def random_submodular_instance(rng, max_domain=4, max_vars=6, max_constraints=8) -> Instance:
    domain = random_domain(rng, max_domain)
    fns = [random_chain_submodular(rng, f"b{i}", domain) for i in range(2)]
    fns.append(random_function(rng, "u", domain, 1, p_inf=0.2))
    lang = Language(domain, fns, name="sub")
    n = rng.randint(2, max_vars)
    vs = [f"v{i}" for i in range(n)]
    cons = []
    for _ in range(rng.randint(1, max_constraints)):
        if rng.random() < 0.3:
            cons.append(("u", (rng.choice(vs),)))
        else:
            cons.append((rng.choice(fns[:2]).name, (rng.choice(vs), rng.choice(vs))))
    return Instance(lang, vs, cons, name="sub")


def random_boolean_submodular(rng, name, arity) -> CostFunction:
    """Rejection-sample a finite-valued submodular function on {0,1}^arity."""
    domain = Domain(("0", "1"))
    while True:
        table = tuple(Fraction(rng.randint(0, 5)) for _ in range(2 ** arity))
        phi = CostFunction(name, domain, arity, table)
        if check_chain_submodular(phi):
            return phi


def random_ext_instance(rng, ext, max_paths=4, p_cut=0.3, p_merge=0.3) -> Instance:
    """Random instance over {D_Gamma, mu} glued from (possibly truncated) Q_S copies.

    Paths run from a shared pool of bottom variables to a pool of top
    variables; some lose their lower or upper end, and some same-level
    vertices are merged, which produces branching middle components.
    """
    from .digraph import DGAMMA, MU, build_QS

    m = ext.m
    bottoms = [f"b{i}" for i in range(rng.randint(1, 3))]
    tops = [f"t{i}" for i in range(rng.randint(1, 3))]
    variables, cons, levels = [], [], {}
    used = set()
    for pi in range(rng.randint(1, max_paths)):
        S = {i for i in range(1, m + 1) if rng.random() < 0.5}
        q = build_QS(m, S)
        lv = q.vertex_levels
        names = [rng.choice(bottoms)] + [f"p{pi}_{k}" for k in range(1, q.vertex_count - 1)] \
            + [rng.choice(tops)]
        lo, hi = 0, q.vertex_count - 1
        if rng.random() < p_cut:
            lo = rng.randint(0, q.vertex_count - 2)
        if rng.random() < p_cut:
            hi = rng.randint(lo + 1, q.vertex_count - 1)
        for k in range(lo, hi + 1):
            levels[names[k]] = lv[k]
            used.add(names[k])
        for a, b in q.edges():
            if lo <= a <= hi and lo <= b <= hi:
                cons.append((DGAMMA, (names[a], names[b])))
    # merge some same-level internal vertices
    rename = {}
    internal = sorted(v for v in used if v.startswith("p"))
    for v in internal:
        if rng.random() < p_merge:
            peers = [w for w in internal if w != v and levels[w] == levels[v] and w not in rename]
            if peers:
                rename[v] = rng.choice(peers)

    def r(v):
        while v in rename:
            v = rename[v]
        return v

    cons = list(dict.fromkeys((f, tuple(r(x) for x in s)) for f, s in cons))
    keep = [v for v in bottoms + tops + internal if v in used and v not in rename]
    for v in keep:
        if rng.random() < (0.7 if v.startswith("t") else 0.1):
            cons.extend([(MU, (v,))] * rng.randint(1, 2))
    extra = rng.randint(0, 1)
    for i in range(extra):
        keep.append(f"z{i}")
        if rng.random() < 0.5:
            cons.append((MU, (f"z{i}",)))
    return Instance(ext.language(), keep, cons, name="rande")
