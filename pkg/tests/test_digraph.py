import random

import networkx as nx
import pytest
from networkx.algorithms.isomorphism import DiGraphMatcher

from vcspbin.combine import combine_language
from vcspbin.core import CostFunction, Domain, Language
from vcspbin.digraph import (LeveledDigraph, Vertex, build_d_gamma, build_QS, components,
                             homomorphisms, is_balanced, level_candidates, levels)
from vcspbin.errors import EmptyFeas, IndexOutOfRange
from vcspbin.extdual import compute_S0, level_hom_exists
from vcspbin.fuzz import random_language

# D_Gamma of rho written out path by path: (base, tuple, steps), with + forward
# and - backward edges, for rho on {0,1} (m = 2).
RHO_PATHS = [
    ("0", "(0,1)", "+++-++"),   # S = {1}
    ("1", "(0,1)", "++-+++"),   # S = {2}
    ("0", "(1,0)", "++-+++"),   # S = {2}
    ("1", "(1,0)", "+++-++"),   # S = {1}
]


def rho_digraph_nx():
    g = nx.DiGraph()
    for b in "01":
        g.add_node(b, role="base", level=0, key=b)
    for t in ("(0,1)", "(1,0)"):
        g.add_node(t, role="tuple", level=4, key=t)
    for k, (b, t, steps) in enumerate(RHO_PATHS):
        prev, lvl = b, 0
        for i, s in enumerate(steps):
            lvl += 1 if s == "+" else -1
            cur = t if i == len(steps) - 1 else f"p{k}_{i}"
            if cur != t:
                g.add_node(cur, role="internal", level=lvl, key=None)
            if s == "+":
                g.add_edge(prev, cur)
            else:
                g.add_edge(cur, prev)
            prev = cur
    return g


def to_nx(g: LeveledDigraph):
    out = nx.DiGraph()
    for v in g.vertices.values():
        out.add_node(v.id, role=v.role, level=v.level,
                     key=None if v.role == "internal" else v.id)
    out.add_edges_from(g.edges)
    return out


def test_rho_digraph_isomorphic(rho_lang):
    ext = build_d_gamma(combine_language(rho_lang))
    ours, ref = to_nx(ext.d_gamma), rho_digraph_nx()
    assert ours.number_of_nodes() == ref.number_of_nodes() == 24
    assert ours.number_of_edges() == ref.number_of_edges() == 24
    # base and tuple vertices must map to themselves
    same = lambda a, b: (a["role"], a["level"], a["key"]) == (b["role"], b["level"], b["key"])  # noqa: E731
    assert DiGraphMatcher(ours, ref, node_match=same).is_isomorphic()


def test_rho_digraph_mu_and_height(rho_lang):
    ext = build_d_gamma(combine_language(rho_lang))
    mu = {v: ext.mu.value((i,)) for i, v in enumerate(ext.vertex_domain.labels)}
    assert {v: c for v, c in mu.items() if c} == {"(0,1)": 2, "(1,0)": 1}
    assert ext.height == 4 and is_balanced(ext.d_gamma)
    assert len(components(ext.d_gamma)) == 1


def test_qs_shapes():
    q = build_QS(2, {1, 2})
    assert q.edge_count == 4 and q.vertex_count == 5 and set(q.steps) == {1}
    q = build_QS(2, set())
    assert q.edge_count == 8 and q.steps == (1, 1, -1, 1, 1, -1, 1, 1)
    q = build_QS(3, {2})
    assert q.edge_count == 9 and q.height == 5
    with pytest.raises(IndexOutOfRange):
        build_QS(2, {3})


def test_qs_levels_end_at_height():
    for m in (1, 2, 3):
        for S in ({}, {1}, set(range(1, m + 1))):
            q = build_QS(m, S)
            assert q.vertex_levels[0] == 0 and q.vertex_levels[-1] == m + 2 == q.height


def test_levels_and_balance():
    g = LeveledDigraph([Vertex("a"), Vertex("b")], [("a", "b")])
    assert levels(g) == {"a": 0, "b": 1}
    tri = LeveledDigraph([Vertex(x) for x in "abc"], [("a", "b"), ("b", "c"), ("c", "a")])
    assert levels(tri) is None and not is_balanced(tri)


def test_components():
    g = LeveledDigraph([Vertex(x) for x in "abcd"], [("a", "b"), ("c", "d")])
    assert len(components(g)) == 2
    assert components(LeveledDigraph()) == []


def test_count_formula_random():
    rng = random.Random(3)
    checked = 0
    while checked < 25:
        lang = random_language(rng)
        ext = build_d_gamma(combine_language(lang))
        assert (len(ext.d_gamma.vertices), len(ext.d_gamma.edges)) == ext.expected_counts()
        checked += 1


def test_empty_feas_rejected():
    d = Domain(("0", "1"))
    f = CostFunction("f", d, 1, (1, 2))
    g = CostFunction("g", d, 2, (0, 0, 0, 0))
    lang = Language(d, (f, g))
    build_d_gamma(combine_language(lang))
    from vcspbin.combine import CombinedLanguage
    comb = combine_language(lang)
    assert comb.m == 3
    with pytest.raises(EmptyFeas):
        from vcspbin.core import INF
        bad = CostFunction("z", d, 1, (INF, INF))
        build_d_gamma(CombinedLanguage(Language(d, (bad,), strict=False), bad, (), (None,)))


def test_homomorphisms_basic():
    e = LeveledDigraph([Vertex("a"), Vertex("b")], [("a", "b")])
    assert list(homomorphisms(e, e)) == [{"a": "a", "b": "b"}]
    tri = LeveledDigraph([Vertex(x) for x in "abc"], [("a", "b"), ("b", "c"), ("c", "a")])
    assert level_candidates(tri, e) is None


def test_zigzag_folds_onto_edge():
    zig = build_QS(1, set()).as_digraph("z")
    e = LeveledDigraph([Vertex("a"), Vertex("b")], [("a", "b")])
    assert next(homomorphisms(zig, e), None) is None     # heights differ, but a fold exists
    fold = LeveledDigraph([Vertex(x) for x in "uvwx"], [("u", "v"), ("w", "v"), ("w", "x")])
    assert next(homomorphisms(fold, e), None) == {"u": "a", "v": "b", "w": "a", "x": "b"}


def _anchored(q, prefix):
    g = q.as_digraph(prefix)
    return g, {v.id: v.level for v in g.vertices.values()}


def test_S0_examples():
    g, lv = _anchored(build_QS(2, {1}), "c")
    assert compute_S0(g, 2, lv) == frozenset({1})
    g, lv = _anchored(build_QS(2, set()), "c")
    assert compute_S0(g, 2, lv) == frozenset()
    single = LeveledDigraph([Vertex("v", level=2)])
    assert compute_S0(single, 2, {"v": 2}) == frozenset()


def test_level_hom_examples():
    for k in (1, 2, 3):
        c, lv = _anchored(build_QS(3, {k}), "c")
        for S in ({1}, {2}, {3}, {1, 2}, {2, 3}, {1, 3}, {1, 2, 3}, set()):
            assert level_hom_exists(c, build_QS(3, S), lv) == (k in S)
    edge = LeveledDigraph([Vertex("a"), Vertex("b")], [("a", "b")])
    assert level_hom_exists(edge, build_QS(2, set()), {"a": 1, "b": 2})
    zig = LeveledDigraph([Vertex(x) for x in "uvwx"], [("u", "v"), ("w", "v"), ("w", "x")])
    assert level_hom_exists(zig, build_QS(2, {1, 2}), {"u": 1, "v": 2, "w": 1, "x": 2})


def test_S0_monotone_under_subgraphs():
    rng = random.Random(9)
    for _ in range(20):
        m = rng.randint(1, 3)
        S = {i for i in range(1, m + 1) if rng.random() < 0.5}
        g, lv = _anchored(build_QS(m, S), "c")
        s0 = compute_S0(g, m, lv)
        assert s0 == frozenset(S)
        keep = [v for v in g.vertices if rng.random() < 0.6]
        sub = g.subgraph(keep)
        assert compute_S0(sub, m, {v: lv[v] for v in keep}) <= s0
