from fractions import Fraction
from pathlib import Path

import pytest

from vcspbin.core import INF, CostFunction, Domain, Instance, Language

DATA = Path(__file__).parent / "data"
B = Domain(("0", "1"))


def rho_fn():
    return CostFunction.from_entries("rho", B, 2, {("0", "1"): 2, ("1", "0"): 1}, default=INF)


def phi_sum_fn():
    return CostFunction.from_entries(
        "phi_sum", B, 3, {("1", "0", "0"): 1, ("0", "1", "0"): 2, ("0", "0", "1"): 3}, default=INF)


def phi_eq_fn():
    return CostFunction.from_entries("phi_eq", B, 2, {("0", "0"): 0, ("1", "1"): 0}, default=INF)


def inst(lang, variables, *cons, name="t"):
    return Instance(lang, tuple(variables), [(f, tuple(s)) for f, *s in cons], name=name)


@pytest.fixture
def rho_lang():
    return Language(B, (rho_fn(),), name="rho")


@pytest.fixture
def sum_lang():
    return Language(B, (phi_sum_fn(),), name="onesum")


@pytest.fixture
def eq_lang():
    return Language(B, (phi_eq_fn(),), name="eq")


@pytest.fixture
def u_rho_lang():
    u = CostFunction("u", B, 1, (Fraction(0), Fraction(5)))
    return Language(B, (u, rho_fn()), name="urho")


def maxcut_setup():
    """Target H, source G and per-vertex costs for the Max-Cut capture example.

    H is D_Gamma of phi(x,x)=1, phi(x,y!=x)=0 without the two all-zigzag
    paths 0->(1,1) and 1->(0,0); G is the scope digraph of the extended
    instance of {phi(x,y), phi(y,x)}; mu is applied to every vertex of G.
    """
    from vcspbin.combine import combine_language, instance_to_combined
    from vcspbin.digraph import build_d_gamma
    from vcspbin.extdual import extdual_instance, scope_digraph

    phi = CostFunction.from_callable("phi", B, 2, lambda t: 1 if t[0] == t[1] else 0)
    lang = Language(B, (phi,), name="maxcut")
    comb = combine_language(lang)
    ext = build_d_gamma(comb)
    drop = set(ext.paths[("0", "(1,1)")][1:-1]) | set(ext.paths[("1", "(0,0)")][1:-1])
    H = ext.d_gamma.subgraph([v for v in ext.d_gamma.vertices if v not in drop])
    src = inst(lang, "xy", ("phi", "x", "y"), ("phi", "y", "x"))
    G = scope_digraph(extdual_instance(instance_to_combined(src, comb)[0], ext).instance)
    mu = {v: ext.mu.value((i,)) for i, v in enumerate(ext.vertex_domain.labels)}
    costs = {v: {t: mu[t] for t in H.vertices} for v in G.vertices}
    return G, H, costs, mu


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
