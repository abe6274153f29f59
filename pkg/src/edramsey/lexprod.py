"""Lexicographic products, the same-block relation ``s``, wreath automorphisms,
and finite truncations of the infinite lexicographic product."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Sequence

from .embed import is_automorphism
from .relcore import (
    BOTTOM, TOP, CapExceeded, Eq, Formula, FormulaError, Not, Rel, Signature, Structure,
    StructureError, Truth, atoms, compile_formula, conj, induced, substitute,
)

MAX_TRUNCATED = 4096


class WreathError(RuntimeError):
    """A wreath map failed to be an automorphism (a bug, never a data condition)."""


@dataclass(frozen=True)
class ProductStructure:
    base: Structure
    fibre: Structure
    structure: Structure
    with_s: bool

    def encode(self, a: int, b: int) -> int:
        return a * self.fibre.n + b

    def decode(self, x: int) -> tuple[int, int]:
        return divmod(x, self.fibre.n)


def _unify(m: Structure, n: Structure) -> tuple[Structure, Structure, Signature]:
    sig = m.sig.union(n.sig)
    return m.expand(sig), n.expand(sig), sig


def lex_product(m: Structure, n: Structure, with_s: bool = False) -> ProductStructure:
    """``m[n]``: tuples with some two base coordinates different follow ``m``;
    tuples inside one fibre follow ``n``."""
    m, n, sig = _unify(m, n)
    size = n.n
    tables: dict[str, set] = {}
    for name, arity in sig.symbols:
        rows = set()
        for t in m.tables[name]:
            if len(set(t)) > 1:
                for bs in itertools.product(range(size), repeat=arity):
                    rows.add(tuple(a * size + b for a, b in zip(t, bs)))
        for t in n.tables[name]:
            for a in range(m.n):
                rows.add(tuple(a * size + b for b in t))
        tables[name] = rows
    flags = {}
    if with_s:
        if "s" in sig:
            raise StructureError("symbol 's' already present")
        sig = sig.union(Signature.of(("s", 2)))
        tables["s"] = {(x, y) for x in range(m.n * size) for y in range(m.n * size)
                       if x // size == y // size}
        flags["s"] = {"equivalence"}
    prod = Structure.build(sig, m.n * size, tables, flags)
    return ProductStructure(m, n, prod, with_s)


def fibre_allrel_expansion(n: Structure, name: str = "s") -> Structure:
    if name in n.sig:
        raise StructureError(f"symbol {name!r} already present")
    sig = n.sig.union(Signature.of((name, 2)))
    tables = dict(n.tables)
    tables[name] = set(itertools.product(range(n.n), repeat=2))
    flags = dict(n.flags)
    flags[name] = {"equivalence"}
    return Structure.build(sig, n.n, tables, flags)


def wreath_automorphism(p: ProductStructure, f: Sequence[int],
                        g: Sequence[Sequence[int]]) -> tuple[int, ...]:
    """The map ``(x, y) -> (f(x), g_x(y))`` on ``p``, verified."""
    if not is_automorphism(p.base, f):
        raise ValueError(f"{tuple(f)} is not an automorphism of the base")
    if len(g) != p.base.n:
        raise ValueError("need one fibre automorphism per base element")
    for a, ga in enumerate(g):
        if not is_automorphism(p.fibre, ga):
            raise ValueError(f"g[{a}] = {tuple(ga)} is not an automorphism of the fibre")
    size = p.fibre.n
    fmap = tuple(f[x // size] * size + g[x // size][x % size] for x in range(p.structure.n))
    if not is_automorphism(p.structure, fmap):
        raise WreathError(f"wreath map {fmap} is not an automorphism")
    return fmap


# -- truncated infinite product ----------------------------------------------------

@dataclass(frozen=True)
class TruncatedInfiniteProduct:
    factors: tuple[Structure, ...]
    depth: int
    branching: int
    structure: Structure

    def decode(self, x: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.depth):
            x, r = divmod(x, self.branching)
            digits.append(r)
        return tuple(reversed(digits))

    def encode(self, seq: Sequence[int]) -> int:
        x = 0
        for d in seq:
            x = x * self.branching + d
        return x

    def above(self, prefix: Sequence[int]) -> range:
        """Elements extending ``prefix`` (a contiguous block in this encoding)."""
        rest = self.depth - len(prefix)
        lo = self.encode(prefix) * self.branching ** rest
        return range(lo, lo + self.branching ** rest)


def truncated_product(factors: Sequence[Structure], depth: int, branching: int,
                      s_prefix: str = "s") -> TruncatedInfiniteProduct:
    """Sequences of length ``depth`` over ``branching`` digits. A relation
    tuple is decided by the factor at the first index where the sequences
    disagree; all-equal tuples are decided by the last factor."""
    if len(factors) != depth:
        raise ValueError(f"need {depth} factors, got {len(factors)}")
    if branching ** depth > MAX_TRUNCATED:
        raise CapExceeded(f"{branching}^{depth} exceeds cap {MAX_TRUNCATED}")
    for f in factors:
        if f.n != branching:
            raise ValueError(f"factor has {f.n} elements, expected {branching}")
    sig = Signature()
    for f in factors:
        sig = sig.union(f.sig)
    factors = tuple(f.expand(sig) for f in factors)
    size = branching ** depth
    for s_n in range(depth):
        if f"{s_prefix}{s_n}" in sig:
            raise StructureError(f"symbol {s_prefix}{s_n} already present")

    def encode(seq):
        x = 0
        for d in seq:
            x = x * branching + d
        return x

    tables: dict[str, set] = {}
    for name, arity in sig.symbols:
        rows = set()
        for level, factor in enumerate(factors):
            last = level == depth - 1
            tail = depth - level - 1
            for digits in factor.tables[name]:
                if len(set(digits)) == 1 and not last:
                    continue
                for prefix in itertools.product(range(branching), repeat=level):
                    for suffixes in itertools.product(
                            itertools.product(range(branching), repeat=tail), repeat=arity):
                        rows.add(tuple(encode(prefix + (d,) + suf)
                                       for d, suf in zip(digits, suffixes)))
        tables[name] = rows
    flags = {}
    for s_n in range(depth):
        name = f"{s_prefix}{s_n}"
        sig = sig.union(Signature.of((name, 2)))
        block = branching ** (depth - s_n - 1)
        tables[name] = {(lo + i, lo + j) for lo in range(0, size, block)
                        for i in range(block) for j in range(block)}
        flags[name] = {"equivalence"}
    st = Structure.build(sig, size, tables, flags)
    return TruncatedInfiniteProduct(factors, depth, branching, st)


def pure_set(n: int) -> Structure:
    return Structure.build([], n)


def s_nesting_violations(s: Structure, names: Sequence[str]) -> list[str]:
    """Check ``names[0] ⊇ names[1] ⊇ ...``."""
    out = []
    for outer, inner in zip(names, names[1:]):
        extra = s.tables[inner] - s.tables[outer]
        if extra:
            out.append(f"{inner} not contained in {outer}: {sorted(extra)[:3]}")
    return out


def dense_sample(t: TruncatedInfiniteProduct, per_prefix: int, seed: int) -> tuple[Structure, list[int]]:
    """Induced substructure with at least ``per_prefix`` elements (or all, if
    fewer exist) above every proper prefix."""
    rng = random.Random(seed)
    chosen: set[int] = set()
    for length in range(t.depth - 1, -1, -1):
        for prefix in itertools.product(range(t.branching), repeat=length):
            block = t.above(prefix)
            want = min(per_prefix, len(block))
            have = sum(1 for x in block if x in chosen)
            if have < want:
                pool = [x for x in block if x not in chosen]
                chosen.update(rng.sample(pool, want - have))
    elements = sorted(chosen)
    return induced(t.structure, elements), elements


# -- decomposition of quantifier-free formulas over M[N]^s ---------------------------

def set_partitions(items: Sequence):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _block_of(pattern) -> dict[str, int]:
    return {v: i for i, block in enumerate(pattern) for v in block}


def pattern_formula(pattern, variables: Sequence[str]):
    """Equality pattern of base coordinates as a formula over the base."""
    block = _block_of(pattern)
    lits = []
    for u, v in itertools.combinations(variables, 2):
        lits.append(Eq(u, v) if block[u] == block[v] else Not(Eq(u, v)))
    return conj(*lits) if lits else TOP


def reduce_under_pattern(node, pattern, s_name: str = "s"):
    """Split ``node`` into base atoms ``('M', atom)`` and fibre atoms
    ``('N', atom)`` given the base-equality pattern. Returns a tree whose
    leaves are ``Truth`` or tagged atoms ``Rel('M:R', ...)``/``Rel('N:R', ...)``."""
    block = _block_of(pattern)

    def fn(atom):
        if isinstance(atom, Eq):
            if block[atom.left] != block[atom.right]:
                return BOTTOM
            return Eq("N:" + atom.left, "N:" + atom.right)
        same = len({block[v] for v in atom.args}) == 1
        if atom.name == s_name:
            return TOP if same else BOTTOM
        side = "N:" if same else "M:"
        return Rel(side + atom.name, atom.args)

    return substitute(node, fn)


def _tag(atom) -> str:
    if isinstance(atom, Eq):
        return "N"
    return atom.name.split(":", 1)[0]


def _untag(node):
    def fn(atom):
        if isinstance(atom, Eq):
            return Eq(atom.left.split(":", 1)[1], atom.right.split(":", 1)[1])
        return Rel(atom.name.split(":", 1)[1], atom.args)
    return substitute(node, fn)


def _literal(atom, value):
    return atom if value else Not(atom)


def decompose(formula: Formula, s_name: str = "s") -> list[tuple[object, object]]:
    """Pairs ``(base_formula, fibre_formula)`` whose disjunction is equivalent
    on the product to ``formula`` (quantifier-free only)."""
    if not formula.quantifier_free:
        raise FormulaError("decomposition is implemented for quantifier-free formulas only")
    variables = formula.variables
    out = []
    for pattern in set_partitions(variables):
        reduced = reduce_under_pattern(formula.body, pattern, s_name)
        fibre_atoms = sorted({a for a in atoms(reduced) if _tag(a) == "N"}, key=repr)
        base_pattern = pattern_formula(pattern, variables)
        for values in itertools.product((False, True), repeat=len(fibre_atoms)):
            truth = dict(zip(fibre_atoms, values))
            base_part = substitute(reduced, lambda a: Truth(truth[a]) if a in truth else a)
            fibre_part = conj(*[_literal(a, v) for a, v in truth.items()]) if truth else TOP
            out.append((conj(base_pattern, _untag(base_part)), _untag(fibre_part)))
    return out


def product_decomposition_check(p: ProductStructure, formula: Formula, trials: int,
                                seed: int = 0) -> bool:
    """Compare direct evaluation on the product against the decomposition on
    ``trials`` random assignments."""
    s_name = "s"
    if not p.with_s and any(isinstance(a, Rel) and a.name == s_name for a in atoms(formula.body)):
        raise FormulaError("formula mentions s but the product has no s")
    variables = formula.variables
    direct = compile_formula(p.structure, formula.body, variables)
    base = p.base.expand(p.fibre.sig)
    fibre = p.fibre.expand(p.base.sig)
    parts = [(compile_formula(base, bf, variables), compile_formula(fibre, ff, variables))
             for bf, ff in decompose(formula, s_name)]
    rng = random.Random(seed)
    for _ in range(trials):
        point = [rng.randrange(p.structure.n) for _ in variables]
        a = [x // p.fibre.n for x in point]
        b = [x % p.fibre.n for x in point]
        if direct(point) != any(bm(a) and fm(b) for bm, fm in parts):
            return False
    return True

