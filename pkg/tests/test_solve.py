import random
from fractions import Fraction

import pytest

from conftest import B, inst, rho_fn
from vcspbin.core import INF, CostFunction, Domain, Language, eval_instance
from vcspbin.digraph import LeveledDigraph, Vertex, build_d_gamma
from vcspbin.combine import combine_language
from vcspbin.errors import BudgetExceeded, PreconditionFailed
from vcspbin.flow import FlowNetwork
from vcspbin.fuzz import random_instance, random_language, random_submodular_instance
from vcspbin.solve import (Declined, branch_and_bound, brute_force, check_chain_submodular,
                           min_cost_hom, mincut_solve, solve)

T = Domain(("0", "1", "2"))


def absdiff():
    return CostFunction.from_callable("d", T, 2, lambda t: abs(t[0] - t[1]))


def test_brute_examples(rho_lang, sum_lang):
    sol = brute_force(inst(rho_lang, "xy", ("rho", "x", "y")))
    assert sol.optimum == 1 and sol.assignment == {"x": "1", "y": "0"}
    two = inst(sum_lang, "xyzw", ("phi_sum", "x", "y", "z"), ("phi_sum", "z", "y", "w"))
    assert brute_force(two).optimum == 4
    assert brute_force(inst(rho_lang, "x", ("rho", "x", "x"))).infeasible


def test_brute_budget(rho_lang):
    with pytest.raises(BudgetExceeded):
        brute_force(inst(rho_lang, [f"v{i}" for i in range(12)], ("rho", "v0", "v1")), budget=100)


def test_chain_submodularity():
    assert check_chain_submodular(absdiff())
    and_cost = CostFunction.from_callable("and", B, 2, lambda t: t[0] * t[1])
    ok, wit = check_chain_submodular(and_cost, witness=True)
    assert not ok and set(wit) == {(0, 1), (1, 0)}
    u = CostFunction("u", T, 1, (3, 0, 7))
    assert check_chain_submodular(u) and check_chain_submodular(u, order=["2", "0", "1"])


def test_mincut_worked_example():
    u1 = CostFunction("u1", T, 1, (0, 3, 1))
    u2 = CostFunction("u2", T, 1, (2, 1, 0))
    lang = Language(T, (u1, u2, absdiff()))
    i = inst(lang, "xy", ("u1", "x"), ("u2", "y"), ("d", "x", "y"))
    sol = mincut_solve(i)
    assert sol.optimum == 1 and sol.assignment == {"x": "2", "y": "2"}
    assert sol.stats["cut"] == 1
    assert brute_force(i).optimum == 1


def test_mincut_xor_and_equality():
    xor = CostFunction.from_callable("xor", B, 2, lambda t: t[0] ^ t[1])
    sol = mincut_solve(inst(Language(B, (xor,)), "xy", ("xor", "x", "y")))
    assert sol.optimum == 0 and sol.assignment == {"x": "0", "y": "0"}
    # the complementary cost (paid when equal) is not submodular for one shared order
    nxor = CostFunction.from_callable("nxor", B, 2, lambda t: 1 - (t[0] ^ t[1]))
    with pytest.raises(PreconditionFailed):
        mincut_solve(inst(Language(B, (nxor,)), "xy", ("nxor", "x", "y")))
    eq = CostFunction.from_entries("eq", B, 2, {("0", "0"): 0, ("1", "1"): 0}, default=INF)
    sol = mincut_solve(inst(Language(B, (eq,)), "xy", ("eq", "x", "y")))
    assert sol.optimum == 0 and sol.assignment["x"] == sol.assignment["y"]


def test_mincut_rejects_wide_constraints(sum_lang):
    with pytest.raises(PreconditionFailed):
        mincut_solve(inst(sum_lang, "xyz", ("phi_sum", "x", "y", "z")))


def test_mincut_agrees_with_brute():
    rng = random.Random(2)
    declined = 0
    for _ in range(60):
        i = random_submodular_instance(rng)
        want = brute_force(i)
        got = mincut_solve(i)
        if isinstance(got, Declined):
            declined += 1
            continue
        assert got.optimum == want.optimum
        if not want.infeasible:
            assert eval_instance(i, got.assignment) == want.optimum
            assert got.stats["cut"] == want.optimum
    assert declined == 0


def test_bnb_agrees_with_brute():
    rng = random.Random(4)
    for _ in range(80):
        lang = random_language(rng)
        i = random_instance(rng, lang, max_vars=5)
        want, got = brute_force(i), branch_and_bound(i)
        assert got.optimum == want.optimum
        if not want.infeasible:
            assert eval_instance(i, got.assignment) == want.optimum


def test_lexicographic_tie_break(eq_lang):
    sol = solve(inst(eq_lang, "xy", ("phi_eq", "x", "y")), "auto")
    assert sol.assignment == {"x": "0", "y": "0"}
    assert branch_and_bound(inst(eq_lang, "xy", ("phi_eq", "x", "y"))).assignment == sol.assignment


def test_solve_dispatch(rho_lang):
    i = inst(rho_lang, "xy", ("rho", "x", "y"))
    for method in ("brute", "bnb", "auto"):
        assert solve(i, method).optimum == 1
    with pytest.raises(PreconditionFailed):
        solve(i, "magic")


def test_min_cost_hom_trivial_and_unbalanced(rho_lang):
    e = LeveledDigraph([Vertex("a"), Vertex("b")], [("a", "b")])
    sol = min_cost_hom(e, e)
    assert sol.optimum == 0 and sol.assignment == {"a": "a", "b": "b"}
    tri = LeveledDigraph([Vertex(x) for x in "abc"], [("a", "b"), ("b", "c"), ("c", "a")])
    d = build_d_gamma(combine_language(rho_lang)).d_gamma
    assert min_cost_hom(tri, d).infeasible


def test_flow_network_small():
    net = FlowNetwork()
    net.add_arc("s", "a", Fraction(3))
    net.add_arc("s", "b", Fraction(2))
    net.add_arc("a", "b", Fraction(1, 2))
    net.add_arc("a", "t", Fraction(2))
    net.add_arc("b", "t", Fraction(3))
    value, _, side = net.max_flow()
    assert value == Fraction(9, 2) and "s" in side and "t" not in side


def test_unary_infinite_entries_filtered():
    u = CostFunction("u", T, 1, (INF, 0, 5))
    v = CostFunction("v", T, 1, (0, 4, 4))
    lang = Language(T, (u, v, absdiff()))
    i = inst(lang, "xy", ("u", "x"), ("v", "y"), ("d", "x", "y"))
    sol = mincut_solve(i)
    assert sol.optimum == 1 and sol.assignment == {"x": "1", "y": "0"}
    assert not check_chain_submodular(rho_fn())


def test_maxcut_capture():
    from conftest import maxcut_setup
    G, H, costs, mu = maxcut_setup()
    assert {v for v, c in mu.items() if c == 1} == {"(0,0)", "(1,1)"}
    assert min_cost_hom(G, H, costs).optimum == 0
    got = {}
    for x in "01":
        for y in "01":
            pinned = dict(costs)
            pinned["x"] = {t: (c if t == x else INF) for t, c in costs["x"].items()}
            pinned["y"] = {t: (c if t == y else INF) for t, c in costs["y"].items()}
            got[(x, y)] = min_cost_hom(G, H, pinned).optimum
    assert got == {("0", "0"): 2, ("0", "1"): 0, ("1", "0"): 0, ("1", "1"): 2}
