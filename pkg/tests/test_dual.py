import random

import pytest

from conftest import inst
from vcspbin import io
from vcspbin.combine import combine_language, instance_to_combined
from vcspbin.core import INF, Language
from vcspbin.dual import (PHI_D, dual_instance, dual_language, eliminate_feas, match_name,
                          parse_match_name, undual_instance)
from vcspbin.errors import WrongLanguage
from vcspbin.fuzz import random_instance, random_language
from vcspbin.solve import brute_force

A, Bv, C = "(1,0,0)", "(0,1,0)", "(0,0,1)"


def zero_set(fn):
    labels = fn.domain.labels
    return {tuple(labels[i] for i in t) for t in fn.feas_tuples if fn.value(t) == 0}


def test_sum_dual_domain_and_unary(sum_lang):
    d = dual_language(combine_language(sum_lang))
    assert set(d.d_prime.labels) == {A, Bv, C} and d.d_prime.size == 3
    phi = d.language()[PHI_D]
    lab = d.d_prime.labels
    vals = {lab[i]: phi.value((i,)) for i in range(3)}
    assert vals == {A: 1, Bv: 2, C: 3}
    assert len(d.matches) == 9


def test_sum_match_1_2(sum_lang):
    d = dual_language(combine_language(sum_lang))
    assert zero_set(d.match(1, 2)) == {(A, Bv), (Bv, A), (Bv, C), (C, A), (C, C)}


def test_eq_matches_are_equality(eq_lang):
    d = dual_language(combine_language(eq_lang))
    diag = {(x, x) for x in d.d_prime.labels}
    for k in (1, 2):
        for l in (1, 2):
            assert zero_set(d.match(k, l)) == diag
            assert len(d.match(k, l).feas_tuples) == 2
    phi = d.language()[PHI_D]
    assert all(phi.value((i,)) == 0 for i in range(d.d_prime.size))


def test_match_names_round_trip():
    assert parse_match_name(match_name(3, 1)) == (3, 1)


def test_two_constraint_sum_instance(sum_lang):
    comb = combine_language(sum_lang)
    d = dual_language(comb)
    src = inst(sum_lang, "xyzw", ("phi_sum", "x", "y", "z"), ("phi_sum", "z", "y", "w"))
    di = dual_instance(instance_to_combined(src, comb)[0], d)
    assert di.instance.variables == ("x'1", "x'2")
    matches = sorted((c.fname, c.scope) for c in di.instance.constraints if c.fname != PHI_D)
    assert matches == [("match_2_2", ("x'1", "x'2")), ("match_3_1", ("x'1", "x'2"))]
    sol = brute_force(di.instance)
    assert sol.optimum == brute_force(src).optimum == 4
    decoded = di.decode(sol.assignment, d)
    from vcspbin.core import eval_instance
    assert eval_instance(src, decoded) == 4


def test_single_sum_constraint(sum_lang):
    comb = combine_language(sum_lang)
    d = dual_language(comb)
    di = dual_instance(instance_to_combined(inst(sum_lang, "xyz", ("phi_sum", "x", "y", "z")), comb)[0], d)
    assert len(di.instance.variables) == 1 and len(di.instance.constraints) == 1
    assert brute_force(di.instance).optimum == 1


def test_repeated_variable_gives_self_match(rho_lang):
    comb = combine_language(rho_lang)
    d = dual_language(comb)
    di = dual_instance(instance_to_combined(inst(rho_lang, "x", ("rho", "x", "x")), comb)[0], d)
    assert ("match_1_2", ("x'1", "x'1")) in [(c.fname, c.scope) for c in di.instance.constraints]
    assert brute_force(di.instance).optimum is INF


def test_undual_single_and_merged(rho_lang):
    d = dual_language(combine_language(rho_lang))
    one = inst(d.language(), ["p"], (PHI_D, "p"))
    res = undual_instance(one, d)
    assert [(c.fname, len(c.scope)) for c in res.instance.constraints] == [("rho", 2)]
    assert len(res.instance.variables) == 2
    two = inst(d.language(), ["p", "q"], (PHI_D, "p"), (PHI_D, "q"), ("match_1_1", "p", "q"))
    res = undual_instance(two, d)
    assert len(res.instance.variables) == 3
    assert res.blocks["p"][0] == res.blocks["q"][0]


def test_undual_emits_feas_for_bare_dual_variable(rho_lang):
    comb = combine_language(rho_lang)
    d = dual_language(comb)
    bare = inst(d.language(), ["p", "q"], (PHI_D, "p"), ("match_2_1", "p", "q"))
    res = undual_instance(bare, d)
    assert sorted(c.fname for c in res.instance.constraints) == sorted(["rho", comb.feas_name])
    assert brute_force(res.instance).optimum == brute_force(bare).optimum


def test_round_trip_through_undual():
    rng = random.Random(5)
    for _ in range(40):
        lang = random_language(rng)
        comb = combine_language(lang)
        src = random_instance(rng, lang)
        ic, off = instance_to_combined(src, comb)
        d = dual_language(comb)
        di = dual_instance(ic, d)
        u = undual_instance(di.instance, d)
        opt = brute_force(src).optimum
        assert brute_force(di.instance).optimum == opt + off
        assert brute_force(u.instance).optimum == opt + off


def test_eliminate_feas_example(rho_lang):
    comb = combine_language(rho_lang)
    j = inst(comb.feas_language(), "xyz", ("rho", "x", "y"), (comb.feas_name, "y", "z"))
    el = eliminate_feas(j, comb)
    assert (el.gap, el.scale) == (1, 3)
    sol = brute_force(el.instance)
    assert sol.optimum == 5
    assert sol.assignment == {"x": "1", "y": "0", "z": "1"}
    assert el.recover(sol.optimum) == brute_force(j).optimum == 1


def test_eliminate_feas_degenerate_and_infeasible(rho_lang):
    comb = combine_language(rho_lang)
    j = inst(comb.feas_language(), "xy", ("rho", "x", "y"))
    el = eliminate_feas(j, comb)
    assert el.scale == 1 and el.instance.constraints == j.constraints
    bad = inst(comb.feas_language(), "x", (comb.feas_name, "x", "x"))
    assert brute_force(eliminate_feas(bad, comb).instance).optimum is INF


def test_eliminate_feas_negative_values():
    lang = io.parse_language("language neg\ndomain 0 1\nfunction f arity 2\n"
                             "0 0 : -2\n0 1 : 3\n1 0 : 1/2\ndefault : inf\nend\n")
    comb = combine_language(lang)
    j = inst(comb.feas_language(), "xyz", ("f", "x", "y"), (comb.feas_name, "y", "z"),
             (comb.feas_name, "z", "x"))
    el = eliminate_feas(j, comb)
    assert el.recover(brute_force(el.instance).optimum) == brute_force(j).optimum


def test_wrong_language(rho_lang, eq_lang):
    d = dual_language(combine_language(rho_lang))
    with pytest.raises(WrongLanguage):
        dual_instance(inst(eq_lang, "xy", ("phi_eq", "x", "y")), d)
