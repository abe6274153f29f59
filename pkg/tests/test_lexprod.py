from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edramsey import genzoo, lexprod
from edramsey.embed import automorphisms, is_automorphism, is_isomorphic
from edramsey.relcore import (
    CapExceeded, Formula, FormulaError, Structure, StructureError, parse_formula,
)

from helpers import naive_eval, random_qf, random_structure

EDGE = Structure.build([("R", 2)], 2, {"R": {(0, 1), (1, 0)}})


def pure(n):
    return Structure.build([], n)


def naive_product(m: Structure, n: Structure) -> dict[str, set]:
    """Clause by clause: a tuple over pairs is in R iff its base coordinates
    are not all equal and the base tuple is in R, or they are all equal and
    the fibre tuple is in R."""
    size = n.n
    out = {}
    for name, arity in m.sig.symbols:
        rows = set()
        for t in itertools.product(range(m.n * size), repeat=arity):
            base = tuple(x // size for x in t)
            fibre = tuple(x % size for x in t)
            if len(set(base)) > 1:
                ok = base in m.tables[name]
            else:
                ok = fibre in n.tables[name]
            if ok:
                rows.add(t)
        out[name] = rows
    return out


def test_product_matches_clause_oracle():
    rng = random.Random(17)
    for _ in range(40):
        symbols = [("R", 2), ("P", 1)]
        m = random_structure(rng, rng.randint(1, 3), symbols)
        n = random_structure(rng, rng.randint(1, 3), symbols)
        p = lexprod.lex_product(m, n)
        assert {k: set(v) for k, v in p.structure.tables.items()} == naive_product(m, n)


def test_edge_over_pure_pair_is_k22():
    p = lexprod.lex_product(EDGE, pure(2))
    k22 = Structure.build([("R", 2)], 4, {"R": {(a, b) for a in (0, 1) for b in (2, 3)}
                                            | {(b, a) for a in (0, 1) for b in (2, 3)}})
    assert is_isomorphic(p.structure, k22)[0]


def test_chain_product_is_lexicographic_order():
    chain = Structure.build([("L", 2)], 3, {"L": {(a, b) for a in range(3) for b in range(3) if a < b}})
    p = lexprod.lex_product(chain, chain)
    assert p.structure.tables["L"] == {(x, y) for x in range(9) for y in range(9)
                                       if divmod(x, 3) < divmod(y, 3)}


def test_s_expansion_commutes():
    """M[N]^s equals M[N^s] once N^s carries the all-pairs relation."""
    m, n = genzoo.equiv(2, 1), EDGE
    left = lexprod.lex_product(m, n, with_s=True).structure
    right = lexprod.lex_product(m, lexprod.fibre_allrel_expansion(n)).structure
    assert left.tables == right.tables


def test_s_clash_is_rejected():
    has_s = Structure.build([("s", 2)], 2)
    with pytest.raises(StructureError):
        lexprod.lex_product(has_s, pure(2), with_s=True)
    with pytest.raises(StructureError):
        lexprod.fibre_allrel_expansion(has_s)


def test_product_encoding():
    p = lexprod.lex_product(pure(3), pure(4))
    assert all(p.encode(*p.decode(x)) == x for x in range(12))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_wreath_maps_are_automorphisms(seed):
    rng = random.Random(seed)
    base = rng.choice([genzoo.equiv(2, 2), EDGE, genzoo.s2(3)])
    fibre = rng.choice([EDGE, pure(3), genzoo.equiv(1, 2)])
    p = lexprod.lex_product(base, fibre, with_s=rng.random() < 0.5)
    f = rng.choice(automorphisms(p.base))
    fibre_auts = automorphisms(p.fibre)
    g = [rng.choice(fibre_auts) for _ in range(p.base.n)]
    fmap = lexprod.wreath_automorphism(p, f, g)
    assert is_automorphism(p.structure, fmap)


def test_wreath_rejects_non_automorphisms():
    p = lexprod.lex_product(genzoo.s2(3), EDGE)
    with pytest.raises(ValueError):
        lexprod.wreath_automorphism(p, (1, 0, 2), [(0, 1)] * 3)
    with pytest.raises(ValueError):
        lexprod.wreath_automorphism(p, (0, 1, 2), [(0, 1)] * 2)


def _nested_build(depth: int, branching: int) -> Structure:
    seqs = list(itertools.product(range(branching), repeat=depth))
    tables = {f"s{i}": {(x, y) for x, a in enumerate(seqs) for y, b in enumerate(seqs)
                        if a[:i + 1] == b[:i + 1]} for i in range(depth)}
    return Structure.build([(f"s{i}", 2) for i in range(depth)], len(seqs), tables,
                           {f"s{i}": {"equivalence"} for i in range(depth)})


@pytest.mark.parametrize("depth, branching", [(1, 3), (2, 2), (2, 3), (3, 2)])
def test_truncated_product_equals_nested_build(depth, branching):
    t = lexprod.truncated_product([pure(branching)] * depth, depth, branching)
    assert t.structure.tables == _nested_build(depth, branching).tables
    names = [f"s{i}" for i in range(depth)]
    assert lexprod.s_nesting_violations(t.structure, names) == []


def test_truncated_product_with_edge_factors():
    t = lexprod.truncated_product([EDGE, EDGE], 2, 2)
    r = t.structure.tables["R"]
    for x, y in itertools.product(range(4), repeat=2):
        a, b = t.decode(x), t.decode(y)
        level = next((i for i in range(2) if a[i] != b[i]), None)
        expected = level is not None
        assert ((x, y) in r) == expected
    # agrees with the two-step product on the R part
    two = lexprod.lex_product(EDGE, EDGE).structure
    assert two.tables["R"] == r


def test_truncated_product_helpers_and_errors():
    t = lexprod.truncated_product([pure(3)] * 2, 2, 3)
    assert t.encode(t.decode(7)) == 7
    assert list(t.above((1,))) == [3, 4, 5]
    with pytest.raises(ValueError):
        lexprod.truncated_product([pure(3)], 2, 3)
    with pytest.raises(ValueError):
        lexprod.truncated_product([pure(2), pure(3)], 2, 3)
    with pytest.raises(CapExceeded):
        lexprod.truncated_product([pure(5)] * 6, 6, 5)


def test_dense_sample_covers_every_prefix():
    t = lexprod.truncated_product([pure(4)] * 3, 3, 4)
    sample, elements = lexprod.dense_sample(t, 2, seed=3)
    assert sample.n == len(elements)
    for length in range(3):
        for prefix in itertools.product(range(4), repeat=length):
            block = set(t.above(prefix))
            assert len(block & set(elements)) >= 2
    assert lexprod.dense_sample(t, 2, seed=3)[1] == elements


def test_set_partitions_are_bell_numbers():
    assert [sum(1 for _ in lexprod.set_partitions(range(n))) for n in range(6)] == [1, 1, 2, 5, 15, 52]


def test_decomposition_on_random_formulas():
    rng = random.Random(2)
    base = genzoo.s2(3)
    fibre = Structure.build([("R", 2), ("P", 1)], 3, {"R": {(0, 1)}, "P": {(2,)}})
    p = lexprod.lex_product(base, fibre, with_s=True)
    for trial in range(20):
        body = random_qf(rng, [("R", 2), ("P", 1), ("s", 2)], ["x", "y"], depth=3)
        phi = Formula(body, (), ("x", "y"))
        assert lexprod.product_decomposition_check(p, phi, 500, seed=trial)
        # and exhaustively against the naive evaluator
        parts = lexprod.decompose(phi)
        b_, f_ = p.base.expand(p.fibre.sig), p.fibre.expand(p.base.sig)
        for x, y in itertools.product(range(9), repeat=2):
            env = {"x": x, "y": y}
            benv = {"x": x // 3, "y": y // 3}
            fenv = {"x": x % 3, "y": y % 3}
            direct = naive_eval(p.structure, body, env)
            split = any(naive_eval(b_, bf, benv) and naive_eval(f_, ff, fenv) for bf, ff in parts)
            assert direct == split


def test_decomposition_rejects_quantifiers_and_missing_s():
    p = lexprod.lex_product(EDGE, EDGE)
    with pytest.raises(FormulaError):
        lexprod.decompose(parse_formula("E z. R(x,z)"))
    with pytest.raises(FormulaError):
        lexprod.product_decomposition_check(p, parse_formula("s(x,y)"), 10)
