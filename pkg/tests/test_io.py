from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import DATA, rho_fn
from vcspbin import io
from vcspbin.algebra import FractionalPolymorphism, Operation
from vcspbin.combine import combine_language
from vcspbin.core import INF, CostFunction, Domain, Instance, Language
from vcspbin.digraph import LeveledDigraph, Vertex
from vcspbin.dual import dual_instance, dual_language
from vcspbin.errors import ArityMismatch, ParseError, SemanticError, UnknownLabel

values = st.one_of(
    st.just(INF),
    st.fractions(min_value=-20, max_value=20, max_denominator=6),
)
labels = st.sampled_from(["0", "1", "2", "a", "b", "(0,1)", "x_y"])


@st.composite
def domains(draw):
    labs = draw(st.lists(labels, min_size=1, max_size=3, unique=True))
    return Domain(tuple(labs))


@st.composite
def functions(draw, domain, name):
    arity = draw(st.integers(1, 3))
    table = draw(st.lists(values, min_size=domain.size ** arity, max_size=domain.size ** arity))
    if all(v is INF for v in table):
        table[0] = Fraction(0)
    return CostFunction(name, domain, arity, tuple(table))


@st.composite
def languages(draw):
    d = draw(domains())
    n = draw(st.integers(1, 3))
    return Language(d, tuple(draw(functions(d, f"f{i}")) for i in range(n)), name="L")


@st.composite
def instances(draw):
    lang = draw(languages())
    vs = [f"v{i}" for i in range(draw(st.integers(1, 4)))]
    cons = []
    for _ in range(draw(st.integers(0, 4))):
        f = draw(st.sampled_from(lang.functions))
        cons.append((f.name, tuple(draw(st.sampled_from(vs)) for _ in range(f.arity))))
    return Instance(lang, vs, cons, name="I")


@given(languages())
@settings(max_examples=80, deadline=None)
def test_language_round_trip(lang):
    text = io.serialize_language(lang)
    back = io.parse_language(text)
    assert back == lang
    assert io.serialize_language(back) == text


@given(instances())
@settings(max_examples=60, deadline=None)
def test_instance_round_trip(inst):
    text = io.serialize_instance(inst)
    assert io.parse_instance(text, inst.language) == inst


@st.composite
def digraphs(draw):
    n = draw(st.integers(0, 6))
    vs = [Vertex(f"v{i}", draw(st.sampled_from(["base", "tuple", "internal"])),
                 draw(st.integers(0, 5)), draw(st.one_of(st.none(), labels)))
          for i in range(n)]
    pairs = [(a.id, b.id) for a in vs for b in vs if a.id != b.id]
    edges = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=8)) if pairs else []
    costs = {v.id: draw(values) for v in vs if draw(st.booleans())}
    return LeveledDigraph(vs, edges, name="G"), costs


@given(digraphs())
@settings(max_examples=60, deadline=None)
def test_digraph_round_trip(gc):
    g, costs = gc
    g2, c2 = io.parse_digraph(io.serialize_digraph(g, costs))
    assert g2 == g and c2 == costs


@st.composite
def fpols(draw):
    d = draw(domains())
    k = draw(st.integers(1, 2))
    size = d.size ** k
    tables = draw(st.lists(st.tuples(*[st.integers(0, d.size - 1)] * size),
                           min_size=1, max_size=3, unique=True))
    raw = [draw(st.integers(1, 5)) for _ in tables]
    ws = [Fraction(r, sum(raw)) for r in raw]
    return FractionalPolymorphism(tuple((Operation(d, k, t, f"o{i}"), w)
                                        for i, (t, w) in enumerate(zip(tables, ws))))


@given(fpols())
@settings(max_examples=60, deadline=None)
def test_operation_and_fpol_round_trip(omega):
    d = omega.domain
    text = io.serialize_fpol(omega)
    back = io.parse_fpol(text, d)
    assert back == omega
    for op, _ in omega.weights:
        assert io.parse_operations(io.serialize_operation(op), d)[op.name] == op


@given(st.one_of(st.just(None), st.dictionaries(st.sampled_from(["x", "y", "z"]), labels,
                                                 min_size=0, max_size=3)), values)
def test_solution_round_trip(assignment, opt):
    if assignment is None or opt is INF:
        assert io.parse_solution(io.serialize_solution(INF)) == (INF, None)
    else:
        assert io.parse_solution(io.serialize_solution(opt, assignment)) == (opt, assignment)


def test_rho_block_and_values():
    lang = io.parse_language((DATA / "rho.lang").read_text())
    assert lang["rho"] == rho_fn()
    assert io.parse_language("language l\ndomain 0\nfunction u arity 1\n0 : 3/2\nend\n")["u"] \
        .value((0,)) == Fraction(3, 2)


def test_parser_rejections():
    with pytest.raises(ParseError):
        io.parse_language("language l\ndomain 0 1\nfunction u arity 1\n0 : x\nend\n")
    with pytest.raises(SemanticError):
        io.parse_language("language l\ndomain 0 1\nfunction u arity 1\ndefault : inf\nend\n")
    with pytest.raises((SemanticError, UnknownLabel)):
        io.parse_language("language l\ndomain 0 1\nfunction u arity 1\n7 : 1\nend\n")
    lang = io.parse_language((DATA / "rho.lang").read_text())
    with pytest.raises((ArityMismatch, ParseError)):
        io.parse_instance("instance i\nvars x\nconstraint rho x\n", lang)
    with pytest.raises(SemanticError):
        io.parse_fpol("operation a arity 1\n0 : 0\n1 : 1\nend\nfpol\nweight 1/2 operation a\n",
                      lang.domain)


def test_parse_error_has_line_number():
    try:
        io.parse_language("language l\ndomain 0 1\nbogus\n")
    except ParseError as e:
        assert e.line == 3
    else:
        pytest.fail("no error")


def test_sidecars(sum_lang):
    from vcspbin.combine import instance_to_combined
    from conftest import inst
    comb = combine_language(sum_lang)
    assert io.parse_layout(io.serialize_layout(comb)) == [("phi_sum", 0, 3)]
    src = inst(sum_lang, "xyzw", ("phi_sum", "x", "y", "z"), ("phi_sum", "z", "y", "w"))
    di = dual_instance(instance_to_combined(src, comb)[0], dual_language(comb))
    assert io.parse_dual_map(io.serialize_dual_map(di)) == {"x'1": 1, "x'2": 2}


def test_dual_serialization_is_canonical(sum_lang):
    text = io.serialize_language(dual_language(combine_language(sum_lang)).language())
    back = io.parse_language(text, strict=False)
    assert io.serialize_language(back) == text
