from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edramsey.relcore import (
    And, CapExceeded, Eq, Exists, Formula, FormulaError, Not, Rel, Signature, Structure,
    StructureError, compile_formula, evaluate, format_formula, free_vars, induced, parse,
    parse_formula, parse_node, quantifier_depth, serialize,
)

from helpers import naive_eval, random_formula, random_structure

SYMBOLS = [("R", 2), ("P", 1), ("T", 3)]


def test_evaluator_matches_naive_oracle_on_1000_instances():
    rng = random.Random(1000)
    for _ in range(1000):
        s = random_structure(rng, rng.randint(1, 4), SYMBOLS, density=rng.random())
        variables = ["x", "y"]
        node = random_formula(rng, SYMBOLS, variables, depth=4)
        env = {v: rng.randrange(s.n) for v in variables}
        assert evaluate(s, node, env) == naive_eval(s, node, env), format_formula(node)


@st.composite
def structures(draw, max_n=5):
    n = draw(st.integers(1, max_n))
    pairs = list(itertools.product(range(n), repeat=2))
    r = draw(st.sets(st.sampled_from(pairs)))
    p = draw(st.sets(st.sampled_from([(i,) for i in range(n)])))
    return Structure.build([("R", 2), ("P", 1)], n, {"R": r, "P": p})


@settings(max_examples=60, deadline=None)
@given(structures(), st.data())
def test_induced_composes(s, data):
    outer = data.draw(st.lists(st.integers(0, s.n - 1), unique=True, min_size=1))
    inner = data.draw(st.lists(st.integers(0, len(outer) - 1), unique=True, min_size=1))
    via = induced(induced(s, outer), inner)
    direct = induced(s, [outer[i] for i in inner])
    assert via == direct


@settings(max_examples=60, deadline=None)
@given(structures(), st.data())
def test_induced_preserves_atomic_truth(s, data):
    subset = data.draw(st.lists(st.integers(0, s.n - 1), unique=True, min_size=1))
    sub = induced(s, subset)
    for a, b in itertools.product(range(sub.n), repeat=2):
        assert sub.holds("R", (a, b)) == s.holds("R", (subset[a], subset[b]))


@settings(max_examples=60, deadline=None)
@given(structures())
def test_serialize_roundtrip(s):
    assert parse(serialize(s)) == s


def test_serialize_keeps_flags():
    s = Structure.build([("E", 2)], 3, {"E": {(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)}},
                        {"E": {"equivalence"}})
    back = parse(serialize(s))
    assert back.flags == s.flags


def test_formula_text_roundtrip():
    rng = random.Random(5)
    for _ in range(200):
        node = random_formula(rng, SYMBOLS, ["x", "y"], depth=4)
        again = parse_node(format_formula(node))
        s = random_structure(rng, 3, SYMBOLS)
        for env in itertools.product(range(3), repeat=2):
            assign = dict(zip(["x", "y"], env))
            assert naive_eval(s, again, assign) == naive_eval(s, node, assign)


def test_parse_formula_splits_parameters_and_objects():
    f = parse_formula("R(x1,y) & E z. R(z,x0)")
    assert f.params == ("x0", "x1")
    assert f.objects == ("y",)
    assert f.depth == 1 and not f.quantifier_free


def test_compile_formula_matches_evaluate():
    s = Structure.build([("R", 2)], 3, {"R": {(0, 1), (1, 2)}})
    f = parse_formula("E z. R(x,z) & R(z,y)", params=(), objects=("x", "y"))
    pred = compile_formula(s, f, f.variables)
    assert [v for v in itertools.product(range(3), repeat=2) if pred(v)] == [(0, 2)]


def test_quantifier_depth_and_free_vars():
    node = Exists("z", And((Rel("R", ("x", "z")), Not(Eq("z", "y")))))
    assert quantifier_depth(node) == 1
    assert free_vars(node) == {"x", "y"}


def test_signature_conflicting_arity_rejected():
    with pytest.raises(StructureError):
        Signature.of(("R", 2)).union(Signature.of(("R", 3)))


@pytest.mark.parametrize("rows, flag", [
    ({(0, 0)}, "irreflexive"),
    ({(0, 1)}, "symmetric"),
    ({(0, 1), (1, 0)}, "asymmetric"),
    ({(0, 1)}, "tournament"),
    ({(0, 1), (1, 2)}, "transitive"),
    ({(0, 0), (1, 1)}, "equivalence"),
])
def test_flag_violations_raise(rows, flag):
    with pytest.raises(StructureError):
        Structure.build([("R", 2)], 3, {"R": rows}, {"R": {flag}})


def test_bad_tables_raise():
    with pytest.raises(StructureError):
        Structure.build([("R", 2)], 2, {"R": {(0, 5)}})
    with pytest.raises(StructureError):
        Structure.build([("R", 2)], 2, {"R": {(0,)}})
    with pytest.raises(StructureError):
        Structure.build([("R", 2)], 2, {"Q": set()})
    with pytest.raises(StructureError):
        Structure.build([("P", 1)], 2, {}, {"P": {"symmetric"}})


def test_induced_rejects_bad_subsets():
    s = Structure.build([("R", 2)], 3)
    with pytest.raises(StructureError):
        induced(s, [0, 0])
    with pytest.raises(StructureError):
        induced(s, [3])


def test_formula_errors():
    with pytest.raises(FormulaError):
        Formula(Rel("R", ("x", "y")), ("x",), ())
    with pytest.raises(FormulaError):
        Formula(Exists("x", Rel("R", ("x", "x"))), ("x",), ())
    with pytest.raises(FormulaError):
        parse_node("R(x,")
    s = Structure.build([("R", 2)], 2)
    with pytest.raises(FormulaError):
        evaluate(s, parse_node("Q(x)"), {"x": 0})
    with pytest.raises(FormulaError):
        evaluate(s, parse_node("R(x,x,x)"), {"x": 0})
    with pytest.raises(FormulaError):
        evaluate(s, parse_node("R(x,y)"), {"x": 0})
    with pytest.raises(FormulaError):
        evaluate(s, parse_node("R(x,x)"), {"x": 7})


def test_structure_parse_errors():
    for text in ["n 2\n", "sig R/2\nn x\n", "sig R/2\nn 2\nrel Q: (0,1)\n",
                 "sig R/2\nn 2\nrel R: (0)\n", "sig R/2\nn 2\nrel R: (0,1)\nrel R: (1,0)\n"]:
        with pytest.raises(StructureError):
            parse(text)


def test_cap_exceeded_is_a_structure_error():
    assert issubclass(CapExceeded, StructureError)
