"""Colourings of copies, formula-induced colourings, arrow relations,
indivisibility checks and the colour-sequence tree search."""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .embed import is_automorphism, is_embedding, iter_embeddings
from .relcore import (
    TOP, CapExceeded, Eq, Formula, FormulaError, Not, Rel, Structure, compile_formula, conj, disj,
    substitute,
)

DEFAULT_BUDGET = 10_000_000
INDIVISIBILITY_CAP = 22
BOOLEAN_CLOSURE_CAP = 4096


class ColouringError(ValueError):
    """The supplied formulas do not cut the copies into a partition."""


# -- copies --------------------------------------------------------------------------

def shape_copies(window: Structure, shape: Structure, ordered: bool = True,
                 within: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Copies of ``shape`` in ``window``, sorted. Ordered copies are embedding
    images; an unordered copy is represented by the least embedding onto its
    image set."""
    maps = iter_embeddings(shape, window, within)
    if ordered:
        return list(maps)
    least: dict[frozenset, tuple[int, ...]] = {}
    for m in maps:
        least.setdefault(frozenset(m), m)
    return sorted(least.values())


def copy_key(copy: Sequence[int], ordered: bool):
    return tuple(copy) if ordered else frozenset(copy)


def structure_copies(window: Structure, b: Structure,
                     within: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """One embedding of ``b`` per image set, the least one, sorted."""
    return shape_copies(window, b, ordered=False, within=within)


# -- colourings -----------------------------------------------------------------------

@dataclass(frozen=True)
class Definition:
    formulas: tuple[Formula, ...]
    params: tuple[int, ...]
    ambient: Structure
    inclusion: tuple[int, ...]

    @property
    def heuristic(self) -> bool:
        """Quantified formulas are evaluated over a finite ambient only."""
        return any(not f.quantifier_free for f in self.formulas)


@dataclass(frozen=True)
class Colouring:
    shape: Structure
    window: Structure
    k: int
    copies: tuple[tuple[int, ...], ...]
    values: tuple[int, ...]
    ordered: bool = True
    provenance: Definition | None = None
    _index: dict = field(default=None, compare=False, repr=False, hash=False)

    def __post_init__(self):
        if len(self.copies) != len(self.values):
            raise ColouringError("one colour per copy required")
        if any(not 0 <= v < self.k for v in self.values):
            raise ColouringError(f"colours must lie in 0..{self.k - 1}")
        index = {copy_key(c, self.ordered): i for i, c in enumerate(self.copies)}
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_function(cls, window, shape, k, fn, ordered=True, provenance=None) -> Colouring:
        cps = tuple(shape_copies(window, shape, ordered))
        return cls(shape, window, k, cps, tuple(int(fn(c)) for c in cps), ordered, provenance)

    @classmethod
    def constant(cls, window, shape, colour=0, k=None, ordered=True) -> Colouring:
        k = colour + 1 if k is None else k
        return cls.from_function(window, shape, k, lambda c: colour, ordered)

    def colour(self, copy: Sequence[int]) -> int:
        return self.values[self._index[copy_key(copy, self.ordered)]]

    def __call__(self, copy: Sequence[int]) -> int:
        return self.colour(copy)

    def as_dict(self) -> dict:
        return dict(zip(self.copies, self.values))

    def colour_class(self, colour: int) -> list[tuple[int, ...]]:
        return [c for c, v in zip(self.copies, self.values) if v == colour]

    @property
    def heuristic(self) -> bool:
        return self.provenance is not None and self.provenance.heuristic


def _check_definable(formulas: Sequence[Formula], n_params: int, arity: int) -> None:
    if not formulas:
        raise ColouringError("need at least one formula")
    for f in formulas:
        if len(f.params) != n_params:
            raise FormulaError(f"{f}: expected {n_params} parameter variables, got {len(f.params)}")
        if len(f.objects) != arity:
            raise FormulaError(f"{f}: expected {arity} object variables, got {len(f.objects)}")


def _definable_values(ambient, inclusion, copies, formulas, params):
    preds = [compile_formula(ambient, f.body, f.params + f.objects) for f in formulas]
    values = []
    for c in copies:
        point = tuple(params) + tuple(inclusion[v] for v in c)
        hits = [i for i, p in enumerate(preds) if p(point)]
        if len(hits) != 1:
            kind = "no formula" if not hits else f"formulas {hits}"
            raise ColouringError(f"copy {c}: {kind} hold; the classes do not partition the copies")
        values.append(hits[0])
    return values


def induce_colouring(ambient: Structure, inclusion: Sequence[int], window: Structure,
                     shape: Structure, formulas: Sequence[Formula], params: Sequence[int],
                     ordered: bool = True) -> Colouring:
    """Colour each copy ``a'`` of ``shape`` in ``window`` by the unique ``i`` with
    ``ambient |= formulas[i](params, inclusion(a'))``."""
    inclusion = tuple(inclusion)
    params = tuple(params)
    if not is_embedding(window, ambient, inclusion):
        raise ColouringError("inclusion is not an embedding of the window into the ambient")
    if any(not 0 <= p < ambient.n for p in params):
        raise ColouringError(f"parameters {params} outside the ambient")
    formulas = tuple(formulas)
    _check_definable(formulas, len(params), shape.n)
    cps = tuple(shape_copies(window, shape, ordered))
    values = _definable_values(ambient, inclusion, cps, formulas, params)
    prov = Definition(formulas, params, ambient, inclusion)
    return Colouring(shape, window, len(formulas), cps, tuple(values), ordered, prov)


def two_colouring(ambient, inclusion, window, shape, phi: Formula, params, ordered=True) -> Colouring:
    """Colour 0 where ``phi`` holds, 1 elsewhere."""
    neg = Formula(Not(phi.body), phi.params, phi.objects)
    return induce_colouring(ambient, inclusion, window, shape, [phi, neg], params, ordered)


def verify_provenance(chi: Colouring) -> bool:
    d = chi.provenance
    if d is None:
        return True
    try:
        values = _definable_values(d.ambient, d.inclusion, chi.copies, d.formulas, d.params)
    except ColouringError:
        return False
    return tuple(values) == chi.values and is_embedding(chi.window, d.ambient, d.inclusion)


def definable_family(ambient, inclusion, window, shape, formulas: Sequence[Formula],
                     pool: Iterable[Sequence[int]] | None = None, ordered=True) -> list[Colouring]:
    """The finite family of colourings obtained from ``formulas`` as the
    parameters run over ``pool`` (default: every tuple of ambient elements of
    the right length). Tuples whose classes do not partition are skipped;
    colourings with equal values are kept once."""
    n_params = len(formulas[0].params)
    if pool is None:
        pool = itertools.product(range(ambient.n), repeat=n_params)
    out, seen = [], set()
    for params in pool:
        try:
            chi = induce_colouring(ambient, inclusion, window, shape, formulas, params, ordered)
        except ColouringError:
            continue
        if chi.values not in seen:
            seen.add(chi.values)
            out.append(chi)
    return out


def translate(chi: Colouring, g: Sequence[int], ambient_g: Sequence[int] | None = None) -> Colouring:
    """``(g . chi)(a') = chi(g^-1 a')`` for an automorphism ``g`` of the window.

    The definition is carried along when ``g`` is known on the ambient: either
    the ambient is the window itself, or ``ambient_g`` is an ambient
    automorphism extending ``g`` through the inclusion."""
    g = tuple(g)
    if not is_automorphism(chi.window, g):
        raise ValueError(f"{g} is not an automorphism of the window")
    inv = [0] * len(g)
    for x, y in enumerate(g):
        inv[y] = x
    values = tuple(chi.colour(tuple(inv[v] for v in c)) for c in chi.copies)
    prov = None
    d = chi.provenance
    if d is not None:
        lift = None
        if ambient_g is not None:
            ambient_g = tuple(ambient_g)
            if not is_automorphism(d.ambient, ambient_g):
                raise ValueError("ambient_g is not an automorphism of the ambient")
            if any(ambient_g[d.inclusion[x]] != d.inclusion[g[x]] for x in range(len(g))):
                raise ValueError("ambient_g does not extend g through the inclusion")
            lift = ambient_g
        elif d.ambient == chi.window and d.inclusion == tuple(range(chi.window.n)):
            lift = g
        if lift is not None:
            prov = Definition(d.formulas, tuple(lift[p] for p in d.params), d.ambient, d.inclusion)
    return Colouring(chi.shape, chi.window, chi.k, chi.copies, values, chi.ordered, prov)


# -- monochromatic copies and arrows ----------------------------------------------------

def inner_copies(chi_or_window, shape: Structure, b_copy: Sequence[int], ordered: bool = True):
    window = chi_or_window.window if isinstance(chi_or_window, Colouring) else chi_or_window
    return shape_copies(window, shape, ordered, within=b_copy)


def iter_structure_copies(window: Structure, b: Structure, within: Sequence[int] | None = None):
    """Like ``structure_copies`` but lazy, in order of first embedding."""
    seen = set()
    for m in iter_embeddings(b, window, within):
        key = frozenset(m)
        if key not in seen:
            seen.add(key)
            yield m


def find_mono_copy(chi: Colouring, b: Structure,
                   within: Sequence[int] | None = None) -> tuple[int, ...] | None:
    """First copy of ``b`` (inside ``within`` if given) whose copies of the
    shape all get one colour under ``chi``; copies are met in lexicographic
    order of their least embedding."""
    for bc in iter_structure_copies(chi.window, b, within):
        colours = {chi.colour(c) for c in inner_copies(chi, chi.shape, bc, chi.ordered)}
        if len(colours) <= 1:
            return bc
    return None


@dataclass(frozen=True)
class ArrowVerdict:
    status: str  # "holds", "fails" or "unknown"
    copies: int
    scanned: int
    certificate: Colouring | None = None
    budget: int | None = None

    @property
    def holds(self) -> bool:
        return self.status == "holds"

    def report_line(self, certificate_file: str = "-") -> str:
        cert = certificate_file if self.certificate is not None else "-"
        return f"verdict={self.status} copies={self.copies} colourings_scanned={self.scanned} certificate={cert}"


def _b_copy_index(c: Structure, b: Structure, shape: Structure, ordered: bool):
    cps = shape_copies(c, shape, ordered)
    index = {copy_key(x, ordered): i for i, x in enumerate(cps)}
    groups = []
    for bc in structure_copies(c, b):
        inner = sorted({index[copy_key(x, ordered)] for x in shape_copies(c, shape, ordered, within=bc)})
        groups.append(tuple(inner))
    return cps, groups


def arrow_full(c: Structure, b: Structure, shape: Structure, k: int,
               budget: int = DEFAULT_BUDGET, ordered: bool = True) -> ArrowVerdict:
    """Decide ``c -> (b)^shape_k`` by depth-first search over colourings of the
    copies in lexicographic order. A new colour may only be the next unused
    one, so each colouring is met once up to renaming colours; a branch is cut
    as soon as some copy of ``b`` is complete and monochromatic. The first
    complete colouring found is the lexicographically least certificate.
    ``scanned`` counts search nodes; hitting ``budget`` gives ``unknown``."""
    if k < 1:
        raise ValueError("k must be positive")
    cps, groups = _b_copy_index(c, b, shape, ordered)
    total = len(cps)

    def certificate(values):
        return Colouring(shape, c, k, tuple(cps), tuple(values), ordered)

    if not groups:
        return ArrowVerdict("fails", total, 0, certificate([0] * total), budget)
    if any(len(g) <= 1 for g in groups):
        return ArrowVerdict("holds", total, 0, None, budget)

    closing: list[list[tuple[int, ...]]] = [[] for _ in range(total)]
    for g in groups:
        closing[g[-1]].append(g)
    colours = [0] * total
    scanned = 0

    def search(pos: int, used: int):
        nonlocal scanned
        if pos == total:
            return True
        for col in range(min(used + 1, k)):
            scanned += 1
            if scanned > budget:
                raise _Budget
            colours[pos] = col
            if all(any(colours[i] != col for i in g) for g in closing[pos]):
                if search(pos + 1, max(used, col + 1)):
                    return True
        return False

    try:
        found = search(0, 0)
    except _Budget:
        return ArrowVerdict("unknown", total, budget, None, budget)
    if found:
        return ArrowVerdict("fails", total, scanned, certificate(colours), budget)
    return ArrowVerdict("holds", total, scanned, None, budget)


class _Budget(Exception):
    pass


def verify_certificate(c: Structure, b: Structure, chi: Colouring) -> bool:
    """True iff ``chi`` is total on the copies of its shape in ``c`` and no copy
    of ``b`` is monochromatic."""
    if chi.window != c:
        return False
    expected = shape_copies(c, chi.shape, chi.ordered)
    if sorted(chi.copies) != sorted(expected):
        return False
    return find_mono_copy(chi, b) is None


@dataclass(frozen=True)
class GammaResult:
    holds: bool
    witnesses: tuple  # per colouring: a monochromatic copy or None

    def __bool__(self) -> bool:
        return self.holds


def arrow_gamma(c_in_window: Sequence[int], b: Structure, gamma: Sequence[Colouring]) -> GammaResult:
    """For the copy of ``C`` given by its image in the window: does every
    colouring in ``gamma`` leave a monochromatic copy of ``b`` inside it?"""
    witnesses = tuple(find_mono_copy(chi, b, within=c_in_window) for chi in gamma)
    return GammaResult(all(w is not None for w in witnesses), witnesses)


# -- reductions -------------------------------------------------------------------------

def _merge(fs: Sequence[Formula]) -> Formula:
    return Formula(disj(*[f.body for f in fs]), fs[0].params, fs[0].objects)


def k_to_2_reduction(chi: Colouring) -> tuple[Colouring, Colouring]:
    """Split a definable k-colouring into a (k-1)-colouring merging the last
    two colours and a 2-colouring separating the last colour from the rest."""
    d = chi.provenance
    if d is None:
        raise ColouringError("reduction needs a defined colouring")
    if chi.k < 2:
        raise ColouringError("need at least two colours")
    fs = d.formulas
    first = list(fs[:-2]) + [_merge(fs[-2:])]
    second = [_merge(fs[:-1]), fs[-1]]
    args = (d.ambient, d.inclusion, chi.window, chi.shape)
    chi1 = induce_colouring(*args, first, d.params, chi.ordered)
    chi2 = induce_colouring(*args, second, d.params, chi.ordered)
    return chi1, chi2


def recombine(chi1: Colouring, chi2: Colouring) -> tuple[int, ...]:
    last = chi1.k
    return tuple(last if b == 1 else a for a, b in zip(chi1.values, chi2.values))


def boolean_closure_colourings(formulas: Sequence[Formula], params: Sequence[int],
                               ambient: Structure, inclusion: Sequence[int], window: Structure,
                               shape: Structure, depth: int, ordered: bool = True) -> list[Colouring]:
    """2-colourings ``(psi, ~psi)`` for every combination ``psi`` of the given
    formulas built with ``~`` and ``&`` in at most ``depth`` steps, one per
    distinct value vector."""
    if not formulas:
        return []
    params = tuple(params)
    _check_definable(formulas, len(params), shape.n)
    pv, ov = formulas[0].params, formulas[0].objects
    norm = []
    for f in formulas:
        mapping = dict(zip(f.params + f.objects, pv + ov))
        if mapping != {v: v for v in mapping}:
            body = substitute(f.body, lambda a: Rel(a.name, tuple(mapping.get(v, v) for v in a.args))
                              if isinstance(a, Rel) else
                              Eq(mapping.get(a.left, a.left), mapping.get(a.right, a.right)))
            f = Formula(body, pv, ov)
        norm.append(f)
    cps = tuple(shape_copies(window, shape, ordered))
    inclusion = tuple(inclusion)
    variables = pv + ov

    def vector(body):
        pred = compile_formula(ambient, body, variables)
        return tuple(pred(params + tuple(inclusion[v] for v in c)) for c in cps)

    found: dict[tuple, object] = {}
    level = []
    for f in norm:
        vec = vector(f.body)
        if vec not in found:
            found[vec] = f.body
            level.append(f.body)
    for _ in range(depth):
        current = list(found.values())
        fresh = []
        candidates = [Not(a) for a in current]
        candidates += [conj(a, b) for a, b in itertools.combinations(current, 2)]
        for body in candidates:
            vec = vector(body)
            if vec not in found:
                if len(found) >= BOOLEAN_CLOSURE_CAP:
                    raise ColouringError(f"boolean closure exceeded {BOOLEAN_CLOSURE_CAP} colourings")
                found[vec] = body
                fresh.append(body)
        if not fresh:
            break
    out = []
    for body in found.values():
        phi = Formula(body, pv, ov)
        out.append(two_colouring(ambient, inclusion, window, shape, phi, params, ordered))
    return out


def constant_formulas(params: Sequence[str], objects: Sequence[str]) -> list[Formula]:
    return [Formula(TOP, tuple(params), tuple(objects))]


# -- indivisibility ----------------------------------------------------------------------

@dataclass(frozen=True)
class IndivisibilityReport:
    holds: bool
    mode: str
    partitions: int
    passed: int
    worst: tuple[tuple[int, ...], tuple[int, ...]]
    worst_score: int  # targets handled by the worst partition
    targets: int


def _copy_masks(c: Structure, target: Structure) -> list[int]:
    return [sum(1 << v for v in bc) for bc in structure_copies(c, target)]


def indivisibility_check(c: Structure, targets: Sequence[Structure], mode: str = "age",
                         cap: int = INDIVISIBILITY_CAP) -> IndivisibilityReport:
    """Every 2-partition of ``c`` up to swapping sides (element 0 stays on the
    first side). ``age``: one side embeds all targets. ``copy``: each target
    embeds into some side. The worst partition is the first one with the
    fewest targets handled."""
    if mode not in ("age", "copy"):
        raise ValueError("mode must be 'age' or 'copy'")
    if c.n > cap:
        raise CapExceeded(f"{c.n} elements exceeds indivisibility cap {cap}")
    masks = [_copy_masks(c, t) for t in targets]
    need = len(masks)
    full = (1 << c.n) - 1
    total = 1 << max(c.n - 1, 0)
    passed = 0
    worst, worst_score = 0, None

    def inside(side: int) -> list[bool]:
        return [any(m & side == m for m in ms) for ms in masks]

    for half in range(total):
        left = 1 | half << 1 if c.n else 0
        right = full & ~left
        lhits, rhits = inside(left), inside(right)
        if mode == "age":
            score = max(sum(lhits), sum(rhits))
        else:
            score = sum(a or b for a, b in zip(lhits, rhits))
        passed += score == need
        if worst_score is None or score < worst_score:
            worst, worst_score = left, score

    def members(mask):
        return tuple(x for x in range(c.n) if mask >> x & 1)

    pair = (members(worst), members(full & ~worst))
    return IndivisibilityReport(passed == total, mode, total, passed, pair, worst_score, need)


# -- colour-sequence tree search ------------------------------------------------------------

@dataclass(frozen=True)
class KonigResult:
    colours: tuple[int, ...]
    witnesses: tuple[tuple[int, ...], ...]  # one copy of each chain member
    alive: tuple[frozenset, ...]  # colour prefixes alive at every chain level, per length


def _mono_colour(chi: Colouring, bc) -> int | None:
    colours = {chi.colour(c) for c in inner_copies(chi, chi.shape, bc, chi.ordered)}
    return colours.pop() if len(colours) == 1 else None


def konig_colour_sequence(window: Structure, chain: Sequence[Structure],
                          gamma: Sequence[Colouring]) -> KonigResult | None:
    """Breadth-first over colour prefixes ``rho``: ``rho`` survives at level
    ``t`` if some copy of ``chain[t]`` is monochromatic of colour ``rho[i]``
    under ``gamma[i]`` for every ``i < len(rho)``. Returns the lexicographically
    least longest prefix surviving at every level, with a witness copy per
    level, or ``None`` if some chain member does not embed at all."""
    for chi in gamma:
        if chi.window != window:
            raise ValueError("every colouring must live on the window")
    per_level = []
    for b in chain:
        vectors = {}
        for bc in structure_copies(window, b):
            vec = []
            for chi in gamma:
                col = _mono_colour(chi, bc)
                if col is None:
                    break
                vec.append(col)
            for r in range(len(vec) + 1):
                vectors.setdefault(tuple(vec[:r]), bc)
        per_level.append(vectors)
    if not per_level:
        return KonigResult((), (), (frozenset({()}),))
    alive = []
    frontier = {()}
    for r in range(len(gamma) + 1):
        level = {rho for rho in frontier if all(rho in v for v in per_level)}
        if not level:
            break
        alive.append(frozenset(level))
        if r == len(gamma):
            break
        frontier = {rho + (col,) for rho in level for col in range(gamma[r].k)}
    if not alive:
        return None
    best = min(alive[-1])
    return KonigResult(best, tuple(v[best] for v in per_level), tuple(alive))


def verify_konig(window: Structure, chain: Sequence[Structure], gamma: Sequence[Colouring],
                 result: KonigResult) -> bool:
    """Independent re-check: each witness is a copy of its chain member and is
    monochromatic of colour ``result.colours[i]`` under ``gamma[i]``."""
    if len(result.witnesses) != len(chain):
        return False
    for b, w in zip(chain, result.witnesses):
        if not is_embedding(b, window, w):
            return False
        for chi, col in zip(gamma, result.colours):
            for c in itertools.permutations(w, chi.shape.n):
                key = copy_key(c, chi.ordered)
                if key in chi._index and chi.values[chi._index[key]] != col:
                    return False
    return True


# -- colouring files -------------------------------------------------------------------------

def format_colouring(chi: Colouring) -> str:
    lines = [f"colouring k={chi.k} shape={chi.shape.n}"]
    for c, v in zip(chi.copies, chi.values):
        lines.append(f"({','.join(map(str, c))}) -> {v}")
    return "\n".join(lines) + "\n"


def parse_colouring(text: str) -> tuple[int, int, dict[tuple[int, ...], int]]:
    """Returns ``(k, arity, values)``. Lines starting with ``#`` are comments."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if not lines:
        raise ColouringError("empty colouring file")
    m = re.fullmatch(r"colouring\s+k=(\d+)\s+shape=(\d+)", lines[0])
    if not m:
        raise ColouringError(f"bad header {lines[0]!r}")
    k, arity = int(m.group(1)), int(m.group(2))
    values = {}
    for ln in lines[1:]:
        m = re.fullmatch(r"\(([\d,\s]*)\)\s*->\s*(\d+)", ln)
        if not m:
            raise ColouringError(f"bad colouring line {ln!r}")
        tup = tuple(int(x) for x in m.group(1).split(",") if x.strip())
        if len(tup) != arity:
            raise ColouringError(f"copy {tup} does not have {arity} entries")
        col = int(m.group(2))
        if col >= k:
            raise ColouringError(f"colour {col} out of range for k={k}")
        values[tup] = col
    return k, arity, values


def load_colouring(text: str, window: Structure, shape: Structure, ordered: bool = True) -> Colouring:
    k, arity, values = parse_colouring(text)
    if arity != shape.n:
        raise ColouringError("shape arity mismatch")
    cps = shape_copies(window, shape, ordered)
    lookup = {copy_key(c, ordered): v for c, v in values.items()}
    missing = [c for c in cps if copy_key(c, ordered) not in lookup]
    if missing:
        raise ColouringError(f"colouring is not total: {missing[:3]} missing")
    if len(lookup) != len(cps):
        raise ColouringError("colouring lists tuples that are not copies of the shape")
    return Colouring(shape, window, k, tuple(cps), tuple(lookup[copy_key(c, ordered)] for c in cps), ordered)
