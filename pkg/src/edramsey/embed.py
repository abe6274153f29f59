"""Embeddings, copies, isomorphism and bounded ages of finite structures."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

from .relcore import CapExceeded, Structure, StructureError, induced, serialize

MAX_CANONICAL = 8


@dataclass(frozen=True)
class Embedding:
    src: Structure
    dst: Structure
    map: tuple[int, ...]

    def __call__(self, x: int) -> int:
        return self.map[x]

    def compose(self, other: Embedding) -> Embedding:
        """``other`` after ``self``."""
        return Embedding(self.src, other.dst, tuple(other.map[v] for v in self.map))


def _check_plan(src: Structure, dst: Structure):
    """For each source position, the relation checks that become decidable."""
    if src.sig != dst.sig:
        if set(src.sig.symbols) - set(dst.sig.symbols):
            raise StructureError("source signature not contained in target signature")
    plan = []
    for pos in range(src.n):
        checks = []
        for name, arity in src.sig.symbols:
            for tup in itertools.product(range(pos + 1), repeat=arity):
                if pos in tup:
                    checks.append((name, tup, tup in src.tables[name]))
        plan.append(checks)
    return plan


def is_embedding(src: Structure, dst: Structure, mapping: Sequence[int]) -> bool:
    if len(mapping) != src.n or len(set(mapping)) != src.n:
        return False
    if any(not 0 <= v < dst.n for v in mapping):
        return False
    for name, arity in src.sig.symbols:
        rows = dst.tables[name]
        for tup in itertools.product(range(src.n), repeat=arity):
            if (tup in src.tables[name]) != (tuple(mapping[v] for v in tup) in rows):
                return False
    return True


def iter_embeddings(src: Structure, dst: Structure,
                    restrict: Sequence[int] | None = None) -> Iterator[tuple[int, ...]]:
    """Yield embedding maps ``src -> dst`` in lexicographic order.

    ``restrict`` limits the targets to the given elements of ``dst``.
    """
    plan = _check_plan(src, dst)
    targets = sorted(set(restrict)) if restrict is not None else list(range(dst.n))
    if src.n > len(targets):
        return
    tables = dst.tables
    image = [0] * src.n
    used = set()

    def extend(pos):
        if pos == src.n:
            yield tuple(image)
            return
        checks = plan[pos]
        for t in targets:
            if t in used:
                continue
            image[pos] = t
            ok = True
            for name, tup, want in checks:
                if (tuple(image[v] for v in tup) in tables[name]) != want:
                    ok = False
                    break
            if ok:
                used.add(t)
                yield from extend(pos + 1)
                used.discard(t)

    yield from extend(0)


def embeddings(src: Structure, dst: Structure) -> list[Embedding]:
    return [Embedding(src, dst, m) for m in iter_embeddings(src, dst)]


def embeds(src: Structure, dst: Structure, restrict: Sequence[int] | None = None) -> bool:
    return next(iter_embeddings(src, dst, restrict), None) is not None


def copies(host: Structure, shape: Structure, ordered: bool = True,
           restrict: Sequence[int] | None = None) -> list[tuple[int, ...]]:
    """Copies of ``shape`` in ``host``.

    Ordered copies are the image tuples of embeddings, i.e. the enumerated
    tuple ``a`` carried along. Unordered copies are the sorted image sets,
    i.e. the substructures isomorphic to ``shape``.
    """
    maps = iter_embeddings(shape, host, restrict)
    if ordered:
        return list(maps)
    return sorted({tuple(sorted(m)) for m in maps})


def automorphisms(s: Structure) -> list[tuple[int, ...]]:
    return list(iter_embeddings(s, s))


def is_automorphism(s: Structure, perm: Sequence[int]) -> bool:
    return len(perm) == s.n and is_embedding(s, s, perm)


def is_isomorphic(a: Structure, b: Structure) -> tuple[bool, tuple[int, ...] | None]:
    if a.n != b.n or a.sig != b.sig:
        return False, None
    if any(len(a.tables[k]) != len(b.tables[k]) for k in a.sig.names):
        return False, None
    witness = next(iter_embeddings(a, b), None)
    return witness is not None, witness


def canonical_key(s: Structure) -> tuple:
    """Least relabelled table listing over all permutations of the domain."""
    if s.n > MAX_CANONICAL:
        raise CapExceeded(f"canonical form limited to {MAX_CANONICAL} elements, got {s.n}")
    best = None
    names = s.sig.names
    for perm in itertools.permutations(range(s.n)):
        key = tuple(tuple(sorted(tuple(perm[v] for v in t) for t in s.tables[k])) for k in names)
        if best is None or key < best:
            best = key
    return best


def canonical_form(s: Structure) -> Structure:
    key = canonical_key(s)
    return Structure(s.sig, s.n, dict(zip(s.sig.names, key)), dict(s.flags))


def age(m: Structure, maxsize: int,
        canonicalize: Callable[[Structure], Structure] = canonical_form) -> list[Structure]:
    """One canonical representative per iso class of induced substructures of
    size ``1..maxsize``, ordered by size then canonical text."""
    if maxsize > MAX_CANONICAL:
        raise CapExceeded(f"age is limited to maxsize <= {MAX_CANONICAL}")
    seen: dict[str, Structure] = {}
    for size in range(1, min(maxsize, m.n) + 1):
        for subset in itertools.combinations(range(m.n), size):
            rep = canonicalize(induced(m, subset))
            seen.setdefault(serialize(rep), rep)
    return [seen[k] for k in sorted(seen, key=lambda t: (seen[t].n, t))]
