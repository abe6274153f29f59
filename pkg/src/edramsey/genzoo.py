"""Seeded generators for finite approximations of the example structures,
amalgamation operators, and bounded checks of HP / JEP / AP."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from .embed import canonical_form, iter_embeddings, is_embedding
from .lexprod import pure_set, s_nesting_violations, set_partitions, truncated_product
from .relcore import (
    CapExceeded, Signature, Structure, StructureError, flag_violations, induced, serialize,
)

DEFAULT_CAP = 512
PRNG = "numpy.PCG64"  # seeded via numpy.random.SeedSequence; split with .spawn()


class GeneratorCapError(CapExceeded):
    """Witness closure grew past the configured domain cap."""


class AmalgamationError(ValueError):
    pass


def make_rng(seed: int, stream: int | None = None) -> np.random.Generator:
    seq = np.random.SeedSequence(seed)
    if stream is not None:
        seq = seq.spawn(stream + 1)[stream]
    return np.random.Generator(np.random.PCG64(seq))


# -- generator specs ------------------------------------------------------------

KINDS = {
    "random_graph": dict(base=5, depth=2, rounds=2, p=0.5),
    "kn_free_graph": dict(n=3, base=5, depth=2, rounds=2, p=0.5),
    "tournament": dict(base=5, depth=2, rounds=2),
    "s2": dict(q=7),
    "s3": dict(q=9),
    "equiv": dict(i=3, j=2),
    "rainbow": dict(colours=2, complete=False, base=4, depth=2, rounds=2),
    "refining": dict(depth=2, branching=3, saturated=False),
    "disjoint_random_graphs": dict(base=5, depth=2, rounds=2, with_s=False, p=0.5),
}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        unknown = set(self.params) - set(KINDS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        merged = {**KINDS[self.kind], **self.params}
        object.__setattr__(self, "params", merged)
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")

    @property
    def witness_depth(self) -> int:
        return int(self.params.get("depth", 0))

    def replace(self, **params) -> GeneratorSpec:
        return GeneratorSpec(self.kind, {**self.params, **params}, self.seed, self.cap)

    def __str__(self) -> str:
        items = " ".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        return f"kind={self.kind} {items} seed={self.seed}"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _value(text: str):
    low = text.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_spec(text: str) -> GeneratorSpec:
    """Accepts ``kind=s2 q=7 seed=1`` or the short form ``s2:q=7,seed=1``."""
    text = text.strip()
    m = re.fullmatch(r"([a-z_0-9]+):(.*)", text)
    if m:
        kind, rest = m.group(1), m.group(2)
        items = [x for x in re.split(r"[,\s]+", rest) if x]
    else:
        items = text.split()
        kind = None
    params = {}
    seed = 0
    cap = DEFAULT_CAP
    for item in items:
        if "=" not in item:
            if kind is None and item in KINDS:
                kind = item
                continue
            raise ValueError(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        if key == "kind":
            kind = val
        elif key == "seed":
            seed = int(val)
        elif key == "cap":
            cap = int(val)
        else:
            params[key] = _value(val)
    if kind is None:
        raise ValueError(f"no kind in generator spec {text!r}")
    return GeneratorSpec(kind, params, seed, cap)


# -- witness closure on binary "edge type" structures ------------------------------

@dataclass
class _EdgeTypes:
    """Every ordered pair of distinct vertices carries one type; ``rev`` gives
    the type seen from the other endpoint. ``masks[t][w]`` holds the vertices
    ``m`` with ``type(m, w) == t`` as a bitset."""

    types: tuple
    rev: dict
    n: int = 0
    masks: dict = field(default_factory=dict)

    def __post_init__(self):
        self.masks = {t: [] for t in self.types}

    def add_vertex(self, types_to: Sequence) -> int:
        m = self.n
        for t in self.types:
            self.masks[t].append(0)
        for w, t in enumerate(types_to):
            self.masks[t][w] |= 1 << m
            self.masks[self.rev[t]][m] |= 1 << w
        self.n += 1
        return m

    def type_of(self, m: int, w: int):
        for t in self.types:
            if self.masks[t][w] >> m & 1:
                return t
        raise KeyError((m, w))

    def witnesses(self, demand: dict) -> int:
        cand = (1 << self.n) - 1
        for w, t in demand.items():
            cand &= self.masks[t][w]
            cand &= ~(1 << w)
        return cand


@dataclass
class _Closure:
    """Witness-closure driver for one generator kind."""

    types: tuple
    rev: dict
    demand_types: tuple
    random_type: Callable
    demand_ok: Callable = lambda g, demand: True
    fix_types: Callable | None = None

    def new(self) -> _EdgeTypes:
        return _EdgeTypes(self.types, self.rev)

    def demands(self, g: _EdgeTypes, depth: int, vertices: Sequence[int]) -> Iterator[dict]:
        for size in range(depth + 1):
            for ws in itertools.combinations(vertices, size):
                for ts in itertools.product(self.demand_types, repeat=size):
                    yield dict(zip(ws, ts))

    def deficits(self, g: _EdgeTypes, depth: int) -> list[dict]:
        return [d for d in self.demands(g, depth, range(g.n))
                if self.demand_ok(g, d) and not g.witnesses(d)]

    def add_witness(self, g: _EdgeTypes, demand: dict, rng) -> int:
        types = [demand[w] if w in demand else self.random_type(rng) for w in range(g.n)]
        if self.fix_types is not None:
            types = self.fix_types(g, types, set(demand), rng)
        return g.add_vertex(types)

    def round(self, g: _EdgeTypes, depth: int, rng, cap: int) -> int:
        added = 0
        for d in self.demands(g, depth, range(g.n)):
            if self.demand_ok(g, d) and not g.witnesses(d):
                self.add_witness(g, d, rng)
                added += 1
                if g.n > cap:
                    raise GeneratorCapError(f"witness closure exceeded cap {cap}")
        return added

    def run(self, base: int, depth: int, rounds: int, rng, cap: int) -> _EdgeTypes:
        g = self.new()
        for _ in range(base):
            self.add_witness(g, {}, rng)
        if g.n > cap:
            raise GeneratorCapError(f"base size {base} exceeds cap {cap}")
        for _ in range(rounds):
            if not self.round(g, depth, rng, cap):
                break
        return g


def _coin(p: float):
    return lambda rng: "adj" if rng.random() < p else "non"


def _graph_closure(p: float) -> _Closure:
    return _Closure(("adj", "non"), {"adj": "adj", "non": "non"}, ("adj", "non"), _coin(p))


def _has_clique(g: _EdgeTypes, vertices: Iterable[int], size: int) -> bool:
    vs = list(vertices)
    if size <= 0:
        return True
    for combo in itertools.combinations(vs, size):
        if all(g.type_of(a, b) == "adj" for a, b in itertools.combinations(combo, 2)):
            return True
    return False


def _kn_free_closure(n: int, p: float) -> _Closure:
    def demand_ok(g, demand):
        return not _has_clique(g, [w for w, t in demand.items() if t == "adj"], n - 1)

    def fix_types(g, types, fixed, rng):
        nbrs = [w for w in fixed if types[w] == "adj"]
        out = ["non" if w not in fixed else t for w, t in enumerate(types)]
        for w in range(g.n):
            if w in fixed or types[w] != "adj":
                continue
            common = [v for v in nbrs if g.type_of(v, w) == "adj"]
            if not _has_clique(g, common, n - 2):
                out[w] = "adj"
                nbrs.append(w)
        return out

    return _Closure(("adj", "non"), {"adj": "adj", "non": "non"}, ("adj", "non"),
                    _coin(p), demand_ok, fix_types)


def _tournament_closure() -> _Closure:
    # "out": the new vertex points at w; "in": w points at the new vertex
    return _Closure(("out", "in"), {"out": "in", "in": "out"}, ("out", "in"),
                    lambda rng: "out" if rng.random() < 0.5 else "in")


def _rainbow_closure(colours: int, complete: bool) -> _Closure:
    cols = tuple(f"c{i}" for i in range(colours))
    types = cols if complete else cols + ("none",)
    rev = {t: t for t in types}
    return _Closure(types, rev, types, lambda rng: types[int(rng.integers(len(types)))])


def _to_structure(g: _EdgeTypes, relations: dict[str, Sequence], flags: dict) -> Structure:
    tables = {name: set() for name in relations}
    for m in range(g.n):
        for w in range(g.n):
            if m == w:
                continue
            t = g.type_of(m, w)
            for name, wanted in relations.items():
                if t in wanted:
                    tables[name].add((m, w))
    sig = [(name, 2) for name in relations]
    return Structure.build(sig, g.n, tables, flags)


def _closure_for(kind: str, params: dict) -> _Closure:
    if kind in ("random_graph", "disjoint_random_graphs"):
        return _graph_closure(params["p"])
    if kind == "kn_free_graph":
        if params["n"] < 3:
            raise ValueError("K_n-free graphs need n >= 3")
        return _kn_free_closure(params["n"], params["p"])
    if kind == "tournament":
        return _tournament_closure()
    if kind == "rainbow":
        if params["colours"] < 1:
            raise ValueError("rainbow needs at least one colour")
        return _rainbow_closure(params["colours"], params["complete"])
    raise ValueError(f"{kind} is not a witness-closure kind")


def _relations_for(kind: str, params: dict):
    if kind in ("random_graph", "kn_free_graph", "disjoint_random_graphs"):
        return {"R": ("adj",)}, {"R": {"symmetric", "irreflexive"}}
    if kind == "tournament":
        return {"R": ("out",)}, {"R": {"tournament"}}
    if kind == "rainbow":
        rels = {f"R{i}": (f"c{i}",) for i in range(params["colours"])}
        return rels, {name: {"symmetric", "irreflexive"} for name in rels}
    raise ValueError(kind)


def _edge_types_from(structure: Structure, kind: str, params: dict) -> _EdgeTypes:
    closure = _closure_for(kind, params)
    g = closure.new()
    rels, _ = _relations_for(kind, params)
    for m in range(structure.n):
        types = []
        for w in range(m):
            t = None
            for name, wanted in rels.items():
                if (w, m) in structure.tables[name]:
                    t = closure.rev[wanted[0]]
            if t is None:
                t = {"random_graph": "non", "kn_free_graph": "non",
                     "disjoint_random_graphs": "non", "tournament": "out",
                     "rainbow": "none"}[kind]
            types.append(t)
        g.add_vertex(types)
    return g


def witness_deficits(structure: Structure, kind: str, depth: int, **params) -> list[dict]:
    """Demands ``{vertex: type}`` of size <= depth that have no witness."""
    params = {**KINDS[kind], **params}
    closure = _closure_for(kind, params)
    return closure.deficits(_edge_types_from(structure, kind, params), depth)


def is_witness_closed(structure: Structure, kind: str, depth: int, **params) -> bool:
    return not witness_deficits(structure, kind, depth, **params)


def closure_round(structure: Structure, kind: str, depth: int, seed: int = 0, cap: int = DEFAULT_CAP,
                  **params) -> Structure:
    """One more witness-closure round on an existing structure."""
    params = {**KINDS[kind], **params}
    closure = _closure_for(kind, params)
    g = _edge_types_from(structure, kind, params)
    closure.round(g, depth, make_rng(seed), cap)
    rels, flags = _relations_for(kind, params)
    return _to_structure(g, rels, flags)


# -- concrete generators --------------------------------------------------------------

def _closure_gen(kind: str, params: dict, seed: int, cap: int, stream: int | None = None) -> Structure:
    closure = _closure_for(kind, params)
    g = closure.run(params["base"], params["depth"], params["rounds"], make_rng(seed, stream), cap)
    rels, flags = _relations_for(kind, params)
    return _to_structure(g, rels, flags)


def circle_digraph(q: int, fraction: Fraction) -> Structure:
    """Vertices at ``k/q`` of a turn; ``a -> b`` iff the counter-clockwise arc
    from ``a`` to ``b`` is a nonzero fraction of a turn below ``fraction``."""
    if q < 1:
        raise ValueError("q must be positive")
    rows = {(a, b) for a in range(q) for b in range(q)
            if (b - a) % q and Fraction((b - a) % q, q) < fraction}
    return Structure.build([("R", 2)], q, {"R": rows})


def s2(q: int) -> Structure:
    if q % 2 == 0:
        raise ValueError("S(2) samples need odd q (no antipodal pairs)")
    return circle_digraph(q, Fraction(1, 2)).with_flags(R={"tournament"})


def s3(q: int) -> Structure:
    return circle_digraph(q, Fraction(1, 3)).with_flags(R={"asymmetric", "irreflexive"})


def equiv(i: int, j: int) -> Structure:
    """``i`` classes of size ``j``; element ``c*j + t`` lies in class ``c``."""
    if i < 1 or j < 1:
        raise ValueError("equiv needs i, j >= 1")
    rows = {(a, b) for a in range(i * j) for b in range(i * j) if a // j == b // j}
    return Structure.build([("R", 2)], i * j, {"R": rows}, {"R": {"equivalence"}})


def refining(depth: int, branching: int, saturated: bool = False) -> Structure:
    """Nested equivalences ``s0 ⊇ s1 ⊇ ...`` on the depth-truncated product of
    pure sets. The unsaturated version ends in singleton classes; the saturated
    one keeps a pure fibre of size ``branching`` below the last relation."""
    if depth < 1 or branching < 1:
        raise ValueError("refining needs depth, branching >= 1")
    if not saturated:
        return truncated_product([pure_set(branching)] * depth, depth, branching).structure
    full = truncated_product([pure_set(branching)] * (depth + 1), depth + 1, branching).structure
    keep = [(f"s{i}", 2) for i in range(depth)]
    return Structure.build(keep, full.n, {k: full.tables[k] for k, _ in keep},
                           {k: full.flags[k] for k, _ in keep})


def disjoint_random_graphs(params: dict, seed: int, cap: int) -> Structure:
    parts = [_closure_gen("random_graph", params, seed, cap, stream=i) for i in range(2)]
    return disjoint_union(parts[0], parts[1], with_s=params["with_s"])


def disjoint_union(a: Structure, b: Structure, with_s: bool = False) -> Structure:
    off = a.n
    tables = {name: set(a.tables[name]) | {tuple(v + off for v in t) for t in b.tables[name]}
              for name in a.sig.names}
    sig = a.sig
    flags = dict(a.flags)
    if with_s:
        sig = sig.union(Signature.of(("s", 2)))
        n = a.n + b.n
        tables["s"] = {(x, y) for x in range(n) for y in range(n) if (x < off) == (y < off)}
        flags["s"] = {"equivalence"}
    return Structure.build(sig, a.n + b.n, tables, flags)


def gen(spec: GeneratorSpec | str) -> Structure:
    if isinstance(spec, str):
        spec = parse_spec(spec)
    p = spec.params
    kind = spec.kind
    if kind in ("random_graph", "kn_free_graph", "tournament", "rainbow"):
        out = _closure_gen(kind, p, spec.seed, spec.cap)
        if kind == "rainbow":
            _check_disjoint_colours(out)
        return out
    if kind == "s2":
        return s2(p["q"])
    if kind == "s3":
        return s3(p["q"])
    if kind == "equiv":
        return _capped(equiv(p["i"], p["j"]), spec.cap)
    if kind == "refining":
        return _capped(refining(p["depth"], p["branching"], p["saturated"]), spec.cap)
    if kind == "disjoint_random_graphs":
        return disjoint_random_graphs(p, spec.seed, spec.cap)
    raise ValueError(kind)


def _capped(s: Structure, cap: int) -> Structure:
    if s.n > cap:
        raise GeneratorCapError(f"{s.n} elements exceeds cap {cap}")
    return s


def _check_disjoint_colours(s: Structure) -> None:
    for a, b in itertools.combinations(s.sig.names, 2):
        if s.tables[a] & s.tables[b]:
            raise StructureError(f"colours {a} and {b} overlap")


def ambient(spec: GeneratorSpec, grow: int = 1) -> tuple[Structure, Structure, tuple[int, ...]]:
    """A larger structure from the same generator and seed, with the canonical
    inclusion of ``gen(spec)`` into it. Returns ``(window, ambient, inclusion)``."""
    if grow < 1:
        raise ValueError("grow must be positive")
    window = gen(spec)
    p = spec.params
    kind = spec.kind
    if kind in ("random_graph", "kn_free_graph", "tournament", "rainbow"):
        big = gen(spec.replace(rounds=p["rounds"] + grow))
        inclusion = tuple(range(window.n))
    elif kind in ("s2", "s3"):
        factor = 2 * grow + 1
        big = gen(spec.replace(q=p["q"] * factor))
        inclusion = tuple(k * factor for k in range(window.n))
    elif kind == "equiv":
        big = gen(spec.replace(i=p["i"] + grow))
        inclusion = tuple(range(window.n))
    elif kind == "refining":
        b, d = p["branching"], p["depth"]
        big = gen(spec.replace(branching=b + grow))
        levels = d + 1 if p["saturated"] else d

        def lift(x):
            digits = []
            for _ in range(levels):
                x, r = divmod(x, b)
                digits.append(r)
            y = 0
            for r in reversed(digits):
                y = y * (b + grow) + r
            return y
        inclusion = tuple(lift(x) for x in range(window.n))
    elif kind == "disjoint_random_graphs":
        bigp = {**p, "rounds": p["rounds"] + grow}
        small = [_closure_gen("random_graph", p, spec.seed, spec.cap, i).n for i in range(2)]
        big = disjoint_random_graphs(bigp, spec.seed, spec.cap)
        large0 = _closure_gen("random_graph", bigp, spec.seed, spec.cap, 0).n
        inclusion = tuple(list(range(small[0])) + [large0 + k for k in range(small[1])])
    else:
        raise ValueError(kind)
    if not is_embedding(window, big, inclusion):
        raise StructureError(f"canonical inclusion for {kind} is not an embedding")
    return window, big, inclusion


# -- amalgamation -------------------------------------------------------------------------

@dataclass(frozen=True)
class AmalgamProblem:
    a: Structure
    b: Structure
    c: Structure
    e_b: tuple[int, ...]
    e_c: tuple[int, ...]

    def __post_init__(self):
        if not is_embedding(self.a, self.b, self.e_b):
            raise AmalgamationError("e_b is not an embedding")
        if not is_embedding(self.a, self.c, self.e_c):
            raise AmalgamationError("e_c is not an embedding")


def free_amalgam(p: AmalgamProblem) -> tuple[Structure, tuple[int, ...], tuple[int, ...]]:
    """Glue ``b`` and ``c`` along ``a`` adding no tuple across the two sides."""
    a_of_c = {cv: av for av, cv in enumerate(p.e_c)}
    c_map = []
    nxt = p.b.n
    for cv in range(p.c.n):
        if cv in a_of_c:
            c_map.append(p.e_b[a_of_c[cv]])
        else:
            c_map.append(nxt)
            nxt += 1
    sig = p.b.sig.union(p.c.sig)
    tables = {name: set(p.b.tables.get(name, ())) for name in sig.names}
    for name, rows in p.c.tables.items():
        tables[name] |= {tuple(c_map[v] for v in t) for t in rows}
    d = Structure(sig, nxt, tables, {k: v for k, v in {**p.c.flags, **p.b.flags}.items()})
    return d, tuple(range(p.b.n)), tuple(c_map)


def _equivalence_closure(pairs: set, n: int) -> set:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        parent[find(a)] = find(b)
    classes: dict[int, list[int]] = {}
    for x in range(n):
        classes.setdefault(find(x), []).append(x)
    return {(x, y) for cls in classes.values() for x in cls for y in cls}


def _transitive_closure(pairs: set) -> set:
    closed = set(pairs)
    while True:
        extra = {(a, d) for a, b in closed for c, d in closed if b == c} - closed
        if not extra:
            return closed
        closed |= extra


def closure_amalgam(p: AmalgamProblem, nesting: Sequence[str] | None = None) -> Structure:
    """Free amalgam followed by closing each flagged relation (equivalence
    relations get their equivalence closure, transitive ones their transitive
    closure). Checks the nesting ``nesting[0] ⊇ nesting[1] ⊇ ...`` and that
    both sides still embed."""
    d, eb, ec = free_amalgam(p)
    tables = dict(d.tables)
    for name, fl in d.flags.items():
        if "equivalence" in fl:
            tables[name] = _equivalence_closure(set(tables[name]), d.n)
        elif "transitive" in fl:
            tables[name] = _transitive_closure(set(tables[name]))
    out = Structure(d.sig, d.n, tables, dict(d.flags))
    if nesting is None:
        nesting = [k for k in out.sig.names if "equivalence" in out.flags.get(k, ())]
    bad = s_nesting_violations(out, nesting)
    if bad:
        raise AmalgamationError("; ".join(bad))
    if not is_embedding(p.b, out, eb) or not is_embedding(p.c, out, ec):
        raise AmalgamationError("closure changed the relations inside one side")
    return out


# -- bounded class-property checks ----------------------------------------------------

@dataclass(frozen=True)
class ClassSpec:
    """A hereditary class given by a membership predicate and an enumerator of
    all its members on ``n`` points."""

    name: str
    sig: Signature
    member: Callable[[Structure], bool]
    enumerate: Callable[[int], Iterator[Structure]]
    amalgam: str = "free"


def _pairs(n):
    return list(itertools.combinations(range(n), 2))


def _graphs(n: int) -> Iterator[Structure]:
    pairs = _pairs(n)
    for mask in range(1 << len(pairs)):
        rows = set()
        for i, (a, b) in enumerate(pairs):
            if mask >> i & 1:
                rows |= {(a, b), (b, a)}
        yield Structure(Signature.of(("R", 2)), n, {"R": rows}, {"R": {"symmetric", "irreflexive"}})


def _is_graph(s: Structure) -> bool:
    r = s.tables["R"]
    return all((b, a) in r and a != b for a, b in r)


def _kn_free(k: int) -> Callable[[Structure], bool]:
    def member(s):
        if not _is_graph(s):
            return False
        r = s.tables["R"]
        return not any(all((a, b) in r for a, b in itertools.combinations(c, 2))
                       for c in itertools.combinations(range(s.n), k))
    return member


def _partition_rows(partition) -> set:
    return {(x, y) for block in partition for x in block for y in block}


def _refines(fine, coarse) -> bool:
    where = {x: i for i, block in enumerate(coarse) for x in block}
    return all(len({where[x] for x in block}) == 1 for block in fine)


def _refining_structures(levels: int, unsaturated: bool):
    sig = Signature.of(*[(f"s{i}", 2) for i in range(levels)])
    flags = {f"s{i}": {"equivalence"} for i in range(levels)}

    def chains(n):
        parts = list(set_partitions(range(n)))

        def extend(prefix):
            if len(prefix) == levels:
                yield prefix
                return
            for q in parts:
                if not prefix or _refines(q, prefix[-1]):
                    yield from extend(prefix + [q])
        for chain in extend([]):
            if unsaturated and len(chain[-1]) != n:
                continue
            yield Structure(sig, n, {f"s{i}": _partition_rows(c) for i, c in enumerate(chain)}, flags)

    def member(s):
        names = [f"s{i}" for i in range(levels)]
        probe = Structure(s.sig, s.n, s.tables, flags)
        if flag_violations(probe) or s_nesting_violations(s, names):
            return False
        if unsaturated and s.n and s.tables[names[-1]] != {(x, x) for x in range(s.n)}:
            return False
        return True

    return sig, member, chains


def _red_points(limit: int):
    sig = Signature.of(("red", 1))

    def enum(n):
        for mask in range(1 << n):
            rows = {(x,) for x in range(n) if mask >> x & 1}
            if len(rows) <= limit:
                yield Structure(sig, n, {"red": rows})

    return sig, (lambda s: len(s.tables["red"]) <= limit), enum


def class_spec(text: str) -> ClassSpec:
    """``graphs``, ``kn_free:n=3``, ``refining:levels=2[,unsaturated=true]``,
    ``equivalence``, ``red_points:limit=2``."""
    name, _, rest = text.partition(":")
    opts = {k: _value(v) for k, v in (kv.split("=") for kv in rest.split(",") if kv)}
    if name == "graphs":
        return ClassSpec(text, Signature.of(("R", 2)), _is_graph, _graphs)
    if name == "kn_free":
        k = opts.get("n", 3)
        member = _kn_free(k)
        return ClassSpec(text, Signature.of(("R", 2)), member,
                         lambda n: (g for g in _graphs(n) if member(g)))
    if name == "refining":
        sig, member, enum = _refining_structures(opts.get("levels", 2), opts.get("unsaturated", False))
        return ClassSpec(text, sig, member, enum, amalgam="closure")
    if name == "equivalence":
        sig, member, enum = _refining_structures(1, False)
        return ClassSpec(text, sig, member, enum, amalgam="closure")
    if name == "red_points":
        sig, member, enum = _red_points(opts.get("limit", 2))
        return ClassSpec(text, sig, member, enum)
    raise ValueError(f"unknown class {text!r}")


@dataclass
class ClassReport:
    spec: str
    maxsize: int
    hp: bool = True
    jep: bool = True
    strong_jep: bool = True
    ap: bool = True
    checked: dict = field(default_factory=lambda: {"hp": 0, "jep": 0, "ap": 0})
    failures: dict = field(default_factory=dict)

    def _fail(self, prop: str, instance) -> None:
        setattr(self, prop, False)
        self.failures.setdefault(prop, instance)


def _representatives(spec: ClassSpec, maxsize: int) -> list[Structure]:
    seen = {}
    for n in range(0, maxsize + 1):
        for s in spec.enumerate(n):
            rep = canonical_form(s)
            seen.setdefault(serialize(rep), rep)
    return [seen[k] for k in sorted(seen, key=lambda t: (seen[t].n, t))]


def _amalgamate(spec: ClassSpec, p: AmalgamProblem):
    try:
        if spec.amalgam == "closure":
            return closure_amalgam(p)
        return free_amalgam(p)[0]
    except AmalgamationError:
        return None


def check_class(spec: ClassSpec | str, maxsize: int) -> ClassReport:
    """HP, JEP, strong JEP and AP for members of size <= maxsize. JEP/AP are
    witnessed by the class's amalgamation operator; the first failing instance
    is kept in ``failures``."""
    if isinstance(spec, str):
        spec = class_spec(spec)
    report = ClassReport(spec.name, maxsize)
    reps = _representatives(spec, maxsize)

    for s in reps:
        for size in range(s.n):
            for subset in itertools.combinations(range(s.n), size):
                report.checked["hp"] += 1
                if not spec.member(induced(s, subset)):
                    report._fail("hp", (serialize(s), subset))

    empty = Structure(spec.sig, 0)
    nonempty = [r for r in reps if r.n]
    for b, c in itertools.combinations_with_replacement(nonempty, 2):
        report.checked["jep"] += 1
        strong = _amalgamate(spec, AmalgamProblem(empty, b, c, (), ()))
        if strong is None or not spec.member(strong):
            report._fail("strong_jep", (serialize(b), serialize(c)))
            if not _some_joint_embedding(spec, reps, b, c):
                report._fail("jep", (serialize(b), serialize(c)))

    for a in nonempty:
        bigger = [r for r in nonempty if r.n >= a.n]
        for b, c in itertools.combinations_with_replacement(bigger, 2):
            eb_all = list(iter_embeddings(a, b))
            ec_all = list(iter_embeddings(a, c))
            for eb in eb_all:
                for ec in ec_all:
                    report.checked["ap"] += 1
                    d = _amalgamate(spec, AmalgamProblem(a, b, c, eb, ec))
                    if d is None or not spec.member(d):
                        report._fail("ap", (serialize(a), serialize(b), serialize(c), eb, ec))
    return report


def _some_joint_embedding(spec, reps, b, c) -> bool:
    for a in reps:
        if not a.n or a.n > min(b.n, c.n):
            continue
        eb = next(iter_embeddings(a, b), None)
        if eb is None:
            continue
        for ec in iter_embeddings(a, c):
            d = _amalgamate(spec, AmalgamProblem(a, b, c, eb, ec))
            if d is not None and spec.member(d):
                return True
    return False


__all__ = [
    "GeneratorSpec", "GeneratorCapError", "AmalgamProblem", "AmalgamationError", "ClassReport",
    "ClassSpec", "KINDS", "PRNG", "ambient", "check_class", "class_spec", "closure_amalgam",
    "closure_round", "circle_digraph", "disjoint_union", "equiv", "free_amalgam", "gen",
    "is_witness_closed", "make_rng", "parse_spec", "refining", "s2", "s3", "witness_deficits",
]
