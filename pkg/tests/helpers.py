"""Random instances and naive reference implementations used as test oracles.

Nothing here calls into the package's search code: the oracles enumerate
assignments, injections and colourings directly.
"""

from __future__ import annotations

import itertools
import random

from edramsey.relcore import And, Eq, Exists, ForAll, Not, Or, Rel, Structure, Truth


def random_structure(rng: random.Random, n: int, symbols=(("R", 2),), density: float = 0.4) -> Structure:
    tables = {}
    for name, arity in symbols:
        tables[name] = {t for t in itertools.product(range(n), repeat=arity) if rng.random() < density}
    return Structure.build(list(symbols), n, tables)


def random_graph(rng: random.Random, n: int, density: float = 0.5) -> Structure:
    rows = set()
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < density:
            rows |= {(a, b), (b, a)}
    return Structure.build([("R", 2)], n, {"R": rows}, {"R": {"symmetric", "irreflexive"}})


def random_qf(rng: random.Random, symbols, variables, depth: int = 3):
    """A random quantifier-free formula tree."""
    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.2:
            return Eq(rng.choice(variables), rng.choice(variables))
        if roll < 0.25:
            return Truth(rng.random() < 0.5)
        name, arity = rng.choice(list(symbols))
        return Rel(name, tuple(rng.choice(variables) for _ in range(arity)))
    roll = rng.random()
    if roll < 0.3:
        return Not(random_qf(rng, symbols, variables, depth - 1))
    parts = tuple(random_qf(rng, symbols, variables, depth - 1) for _ in range(rng.randint(2, 3)))
    return And(parts) if roll < 0.65 else Or(parts)


def random_formula(rng: random.Random, symbols, variables, depth: int = 3, fresh=None):
    """A random formula that may contain quantifiers over fresh variable names."""
    fresh = fresh if fresh is not None else iter(f"z{i}" for i in itertools.count())
    if depth == 0 or rng.random() < 0.25:
        return random_qf(rng, symbols, variables, 0)
    roll = rng.random()
    if roll < 0.3:
        var = next(fresh)
        body = random_formula(rng, symbols, list(variables) + [var], depth - 1, fresh)
        return (Exists if rng.random() < 0.5 else ForAll)(var, body)
    if roll < 0.5:
        return Not(random_formula(rng, symbols, variables, depth - 1, fresh))
    parts = tuple(random_formula(rng, symbols, variables, depth - 1, fresh) for _ in range(2))
    return And(parts) if roll < 0.75 else Or(parts)


def naive_eval(s: Structure, node, env: dict) -> bool:
    """Direct recursive Tarskian evaluation."""
    if isinstance(node, Truth):
        return node.value
    if isinstance(node, Rel):
        return tuple(env[v] for v in node.args) in s.tables[node.name]
    if isinstance(node, Eq):
        return env[node.left] == env[node.right]
    if isinstance(node, Not):
        return not naive_eval(s, node.arg, env)
    if isinstance(node, And):
        return all(naive_eval(s, a, env) for a in node.args)
    if isinstance(node, Or):
        return any(naive_eval(s, a, env) for a in node.args)
    if isinstance(node, Exists):
        return any(naive_eval(s, node.body, {**env, node.var: v}) for v in range(s.n))
    if isinstance(node, ForAll):
        return all(naive_eval(s, node.body, {**env, node.var: v}) for v in range(s.n))
    raise TypeError(node)


def naive_embeddings(a: Structure, b: Structure) -> list[tuple[int, ...]]:
    """All injections checked against every tuple of ``a`` over its signature."""
    out = []
    for m in itertools.permutations(range(b.n), a.n):
        ok = True
        for name, arity in a.sig.symbols:
            for t in itertools.product(range(a.n), repeat=arity):
                if (t in a.tables[name]) != (tuple(m[v] for v in t) in b.tables[name]):
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(m)
    return out


def naive_arrow(c: Structure, b: Structure, shape: Structure, k: int, ordered: bool = True) -> bool:
    """Try every k-colouring of the shape copies of ``c``."""
    maps = naive_embeddings(shape, c)
    if ordered:
        cps = maps
        key = tuple
    else:
        cps = sorted({frozenset(m) for m in maps}, key=sorted)
        key = frozenset
    index = {key(x): i for i, x in enumerate(cps)}
    groups = []
    for image in {frozenset(m) for m in naive_embeddings(b, c)}:
        inner = {index[key(m)] for m in maps if set(m) <= image}
        groups.append(sorted(inner))
    for colours in itertools.product(range(k), repeat=len(cps)):
        if not any(len({colours[i] for i in g}) <= 1 for g in groups):
            return False
    return True


def is_mono(chi, copies) -> bool:
    return len({chi.colour(c) for c in copies}) <= 1
