"""Finite relational structures, first-order formulas over them, and text I/O.

Domains are always ``0..n-1``. Equality is logical and never stored in a
relation table. Quantifiers range over the structure's own finite domain.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

KNOWN_FLAGS = frozenset(
    {"symmetric", "irreflexive", "reflexive", "transitive", "equivalence",
     "tournament", "asymmetric"}
)


class StructureError(ValueError):
    pass


class CapExceeded(StructureError):
    """A configured size limit was hit; raised instead of truncating."""


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    symbols: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        names = [name for name, _ in self.symbols]
        if len(set(names)) != len(names):
            raise StructureError(f"duplicate symbol names in {names}")
        for name, arity in self.symbols:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
                raise StructureError(f"bad symbol name {name!r}")
            if arity < 1:
                raise StructureError(f"symbol {name} has arity {arity} < 1")

    @classmethod
    def of(cls, *symbols: tuple[str, int]) -> Signature:
        return cls(tuple((str(n), int(a)) for n, a in symbols))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.symbols)

    def arity(self, name: str) -> int:
        for n, a in self.symbols:
            if n == name:
                return a
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return any(n == name for n, _ in self.symbols)

    def union(self, other: Signature) -> Signature:
        """Symbols of ``self`` followed by the new symbols of ``other``."""
        merged = list(self.symbols)
        for name, arity in other.symbols:
            if name in self:
                if self.arity(name) != arity:
                    raise StructureError(f"arity clash for {name}")
            else:
                merged.append((name, arity))
        return Signature(tuple(merged))


@dataclass(frozen=True, eq=True)
class Structure:
    sig: Signature
    n: int
    tables: Mapping[str, frozenset] = field(default_factory=dict)
    flags: Mapping[str, frozenset] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise StructureError("negative domain size")
        tables = {}
        for name, arity in self.sig.symbols:
            rows = frozenset(tuple(int(v) for v in t) for t in self.tables.get(name, ()))
            for t in rows:
                if len(t) != arity:
                    raise StructureError(f"{name}: tuple {t} has length {len(t)}, arity {arity}")
                if any(v < 0 or v >= self.n for v in t):
                    raise StructureError(f"{name}: tuple {t} out of range for n={self.n}")
            tables[name] = rows
        extra = set(self.tables) - set(self.sig.names)
        if extra:
            raise StructureError(f"tables for undeclared symbols {sorted(extra)}")
        flags = {}
        for name, fl in self.flags.items():
            if name not in self.sig:
                raise StructureError(f"flags for undeclared symbol {name}")
            fl = frozenset(fl)
            bad = fl - KNOWN_FLAGS
            if bad:
                raise StructureError(f"unknown flags {sorted(bad)}")
            if fl and self.sig.arity(name) != 2:
                raise StructureError(f"flags only apply to binary symbols, not {name}")
            if fl:
                flags[name] = fl
        object.__setattr__(self, "tables", tables)
        object.__setattr__(self, "flags", flags)

    def __hash__(self):
        return hash((self.sig, self.n, tuple(self.tables[k] for k in self.sig.names)))

    @classmethod
    def build(cls, symbols: Iterable[tuple[str, int]], n: int,
              tables: Mapping[str, Iterable[Sequence[int]]] | None = None,
              flags: Mapping[str, Iterable[str]] | None = None) -> Structure:
        sig = symbols if isinstance(symbols, Signature) else Signature.of(*symbols)
        tables = {k: frozenset(tuple(t) for t in v) for k, v in (tables or {}).items()}
        flags = {k: frozenset(v) for k, v in (flags or {}).items()}
        s = cls(sig, n, tables, flags)
        check_flags(s)
        return s

    @property
    def domain(self) -> range:
        return range(self.n)

    def holds(self, name: str, tup: Sequence[int]) -> bool:
        return tuple(tup) in self.tables[name]

    def with_flags(self, **flags: Iterable[str]) -> Structure:
        merged = dict(self.flags)
        merged.update({k: frozenset(v) for k, v in flags.items()})
        s = Structure(self.sig, self.n, self.tables, merged)
        check_flags(s)
        return s

    def expand(self, sig: Signature) -> Structure:
        """Same structure in a larger signature; new symbols are empty."""
        full = self.sig.union(sig)
        return Structure(full, self.n, dict(self.tables), dict(self.flags))

    def relabel(self, perm: Sequence[int]) -> Structure:
        """Image of the structure under the bijection ``i -> perm[i]``."""
        if sorted(perm) != list(range(self.n)):
            raise StructureError("relabel needs a permutation of the domain")
        tables = {k: {tuple(perm[v] for v in t) for t in rows} for k, rows in self.tables.items()}
        return Structure(self.sig, self.n, tables, dict(self.flags))

    def __repr__(self) -> str:
        sizes = ", ".join(f"{k}:{len(v)}" for k, v in self.tables.items())
        return f"Structure(n={self.n}, {sizes})"


def flag_violations(s: Structure) -> list[str]:
    """Return human-readable violations of the declared table flags."""
    out = []
    for name, fl in s.flags.items():
        rel = s.tables[name]
        want = set(fl)
        if "equivalence" in want:
            want |= {"reflexive", "symmetric", "transitive"}
        if "tournament" in want:
            want |= {"irreflexive"}
        if "reflexive" in want:
            out += [f"{name} not reflexive at {x}" for x in s.domain if (x, x) not in rel]
        if "irreflexive" in want:
            out += [f"{name} has loop at {x}" for x in s.domain if (x, x) in rel]
        if "symmetric" in want:
            out += [f"{name} not symmetric at {t}" for t in sorted(rel) if (t[1], t[0]) not in rel]
        if "asymmetric" in want or "tournament" in want:
            out += [f"{name} has both directions at {t}" for t in sorted(rel)
                    if t[0] < t[1] and (t[1], t[0]) in rel]
        if "tournament" in want:
            out += [f"{name} leaves pair {(x, y)} unoriented"
                    for x, y in itertools.combinations(s.domain, 2)
                    if (x, y) not in rel and (y, x) not in rel]
        if "transitive" in want:
            succ: dict[int, set[int]] = {}
            for a, b in rel:
                succ.setdefault(a, set()).add(b)
            for a, b in sorted(rel):
                for c in succ.get(b, ()):
                    if (a, c) not in rel:
                        out.append(f"{name} not transitive at {(a, b, c)}")
    return out


def check_flags(s: Structure) -> Structure:
    bad = flag_violations(s)
    if bad:
        raise StructureError("; ".join(bad[:5]))
    return s


def induced(s: Structure, subset: Sequence[int]) -> Structure:
    """Substructure on ``subset``, renumbered in the given order."""
    subset = list(subset)
    if len(set(subset)) != len(subset):
        raise StructureError(f"duplicate elements in {subset}")
    if any(v < 0 or v >= s.n for v in subset):
        raise StructureError(f"element out of range in {subset}")
    pos = {v: i for i, v in enumerate(subset)}
    tables = {}
    for name, rows in s.tables.items():
        arity = s.sig.arity(name)
        if len(subset) ** arity < len(rows):
            tables[name] = {tuple(pos[v] for v in t)
                            for t in itertools.product(subset, repeat=arity) if t in rows}
        else:
            tables[name] = {tuple(pos[v] for v in t) for t in rows if all(v in pos for v in t)}
    return Structure(s.sig, len(subset), tables, dict(s.flags))


# -- formulas -----------------------------------------------------------------

@dataclass(frozen=True)
class Rel:
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: object


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Exists:
    var: str
    body: object


@dataclass(frozen=True)
class ForAll:
    var: str
    body: object


TOP = Truth(True)
BOTTOM = Truth(False)

Node = Rel | Eq | Truth | Not | And | Or | Exists | ForAll


def conj(*args) -> Node:
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*args) -> Node:
    return args[0] if len(args) == 1 else Or(tuple(args))


def free_vars(node) -> set[str]:
    if isinstance(node, Rel):
        return set(node.args)
    if isinstance(node, Eq):
        return {node.left, node.right}
    if isinstance(node, Truth):
        return set()
    if isinstance(node, Not):
        return free_vars(node.arg)
    if isinstance(node, (And, Or)):
        return set().union(*(free_vars(a) for a in node.args))
    if isinstance(node, (Exists, ForAll)):
        return free_vars(node.body) - {node.var}
    raise FormulaError(f"not a formula node: {node!r}")


def bound_vars(node) -> list[str]:
    if isinstance(node, Not):
        return bound_vars(node.arg)
    if isinstance(node, (And, Or)):
        return [v for a in node.args for v in bound_vars(a)]
    if isinstance(node, (Exists, ForAll)):
        return [node.var] + bound_vars(node.body)
    return []


def quantifier_depth(node) -> int:
    if isinstance(node, Not):
        return quantifier_depth(node.arg)
    if isinstance(node, (And, Or)):
        return max((quantifier_depth(a) for a in node.args), default=0)
    if isinstance(node, (Exists, ForAll)):
        return 1 + quantifier_depth(node.body)
    return 0


def atoms(node) -> list:
    if isinstance(node, (Rel, Eq)):
        return [node]
    if isinstance(node, Not):
        return atoms(node.arg)
    if isinstance(node, (And, Or)):
        return [x for a in node.args for x in atoms(a)]
    if isinstance(node, (Exists, ForAll)):
        return atoms(node.body)
    return []


def substitute(node, fn: Callable[[object], object]):
    """Rebuild ``node`` bottom-up, replacing each atom ``a`` with ``fn(a)``."""
    if isinstance(node, (Rel, Eq)):
        return fn(node)
    if isinstance(node, Truth):
        return node
    if isinstance(node, Not):
        return Not(substitute(node.arg, fn))
    if isinstance(node, And):
        return And(tuple(substitute(a, fn) for a in node.args))
    if isinstance(node, Or):
        return Or(tuple(substitute(a, fn) for a in node.args))
    if isinstance(node, Exists):
        return Exists(node.var, substitute(node.body, fn))
    if isinstance(node, ForAll):
        return ForAll(node.var, substitute(node.body, fn))
    raise FormulaError(f"not a formula node: {node!r}")


@dataclass(frozen=True)
class Formula:
    """A formula body with its free variables split into parameters and objects.

    ``params`` play the role of the external tuple, ``objects`` range over the
    copies being coloured.
    """

    body: object
    params: tuple[str, ...] = ()
    objects: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        object.__setattr__(self, "objects", tuple(self.objects))
        listed = self.params + self.objects
        if len(set(listed)) != len(listed):
            raise FormulaError(f"free variable listed twice in {listed}")
        loose = free_vars(self.body) - set(listed)
        if loose:
            raise FormulaError(f"unlisted free variables {sorted(loose)}")
        bound = bound_vars(self.body)
        if len(set(bound)) != len(bound):
            raise FormulaError("a variable is bound more than once")
        if set(bound) & set(listed):
            raise FormulaError(f"bound variables clash with free ones: {sorted(set(bound) & set(listed))}")

    @property
    def variables(self) -> tuple[str, ...]:
        return self.params + self.objects

    @property
    def depth(self) -> int:
        return quantifier_depth(self.body)

    @property
    def quantifier_free(self) -> bool:
        return self.depth == 0

    @property
    def atomic(self) -> bool:
        return isinstance(self.body, (Rel, Eq, Truth))

    def __str__(self) -> str:
        return format_formula(self.body)


def _compile(sig: Signature, tables: Mapping[str, frozenset], n: int, node, slots: dict[str, int]):
    if isinstance(node, Truth):
        value = node.value
        return lambda env: value
    if isinstance(node, Rel):
        if node.name not in sig:
            raise FormulaError(f"undeclared symbol {node.name}")
        if sig.arity(node.name) != len(node.args):
            raise FormulaError(f"{node.name} has arity {sig.arity(node.name)}, used with {len(node.args)}")
        rows = tables[node.name]
        try:
            idx = tuple(slots[v] for v in node.args)
        except KeyError as exc:
            raise FormulaError(f"unbound variable {exc.args[0]}") from None
        if len(idx) == 1:
            i0 = idx[0]
            return lambda env: (env[i0],) in rows
        if len(idx) == 2:
            i0, i1 = idx
            return lambda env: (env[i0], env[i1]) in rows
        return lambda env: tuple(env[i] for i in idx) in rows
    if isinstance(node, Eq):
        try:
            i, j = slots[node.left], slots[node.right]
        except KeyError as exc:
            raise FormulaError(f"unbound variable {exc.args[0]}") from None
        return lambda env: env[i] == env[j]
    if isinstance(node, Not):
        inner = _compile(sig, tables, n, node.arg, slots)
        return lambda env: not inner(env)
    if isinstance(node, And):
        parts = [_compile(sig, tables, n, a, slots) for a in node.args]
        return lambda env: all(p(env) for p in parts)
    if isinstance(node, Or):
        parts = [_compile(sig, tables, n, a, slots) for a in node.args]
        return lambda env: any(p(env) for p in parts)
    if isinstance(node, (Exists, ForAll)):
        slot = len(slots)
        inner = _compile(sig, tables, n, node.body, {**slots, node.var: slot})
        want = isinstance(node, Exists)

        def quant(env):
            for v in range(n):
                env[slot] = v
                if inner(env) == want:
                    return want
            return not want
        return quant
    raise FormulaError(f"not a formula node: {node!r}")


def compile_formula(s: Structure, node, variables: Sequence[str]) -> Callable[[Sequence[int]], bool]:
    """Compile ``node`` over ``s`` into a predicate on value tuples for ``variables``."""
    if isinstance(node, Formula):
        node = node.body
    slots = {v: i for i, v in enumerate(variables)}
    fn = _compile(s.sig, s.tables, s.n, node, slots)
    pad = [0] * quantifier_depth(node)
    return lambda values: fn(list(values) + pad)


def evaluate(s: Structure, f, assignment: Mapping[str, int]) -> bool:
    """Tarskian truth of ``f`` in ``s`` under ``assignment``."""
    node = f.body if isinstance(f, Formula) else f
    needed = f.variables if isinstance(f, Formula) else tuple(sorted(free_vars(node)))
    missing = [v for v in needed if v not in assignment]
    if missing:
        raise FormulaError(f"unbound variables {missing}")
    for v, x in assignment.items():
        if not 0 <= x < s.n:
            raise FormulaError(f"{v} -> {x} outside domain of size {s.n}")
    names = list(assignment)
    return compile_formula(s, node, names)([assignment[v] for v in names])


# -- formula text ---------------------------------------------------------------
#
#   expr  := quant | disj
#   quant := ('E' | 'A') var '.' expr
#   disj  := conj ('|' conj)*
#   conj  := unary ('&' unary)*
#   unary := '~' unary | '(' expr ')' | 'T' | 'F' | name '(' vars ')' | var '=' var

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_]*)|(.))")


def _tokens(text: str) -> list[str]:
    out = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        out.append(m.group(1) or m.group(2))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0):
        j = self.i + k
        return self.toks[j] if j < len(self.toks) else None

    def take(self, want: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (want is not None and tok != want):
            raise FormulaError(f"expected {want or 'token'}, got {tok!r}")
        self.i += 1
        return tok

    def expr(self):
        if self.peek() in ("E", "A") and self.peek(1) not in ("(", None) and self.peek(2) == ".":
            q = self.take()
            var = self.take()
            self.take(".")
            body = self.expr()
            return Exists(var, body) if q == "E" else ForAll(var, body)
        parts = [self.conj()]
        while self.peek() == "|":
            self.take()
            parts.append(self.conj())
        return disj(*parts)

    def conj(self):
        parts = [self.unary()]
        while self.peek() == "&":
            self.take()
            parts.append(self.unary())
        return conj(*parts)

    def unary(self):
        tok = self.peek()
        if tok == "~":
            self.take()
            return Not(self.unary())
        if tok == "(":
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        if tok in ("E", "A") and self.peek(2) == ".":
            return self.expr()
        if tok in ("T", "F") and self.peek(1) != "(":
            self.take()
            return TOP if tok == "T" else BOTTOM
        if tok is None or not re.fullmatch(r"[A-Za-z_]\w*", tok):
            raise FormulaError(f"unexpected token {tok!r}")
        name = self.take()
        if self.peek() == "(":
            self.take()
            args = [self.take()]
            while self.peek() == ",":
                self.take()
                args.append(self.take())
            self.take(")")
            return Rel(name, tuple(args))
        if self.peek() == "=":
            self.take()
            return Eq(name, self.take())
        raise FormulaError(f"dangling variable {name!r}")


def parse_node(text: str):
    p = _Parser(text)
    node = p.expr()
    if p.peek() is not None:
        raise FormulaError(f"trailing input at {p.peek()!r}")
    return node


def parse_formula(text: str, params: Sequence[str] | None = None,
                  objects: Sequence[str] | None = None) -> Formula:
    """Parse formula text. Without explicit lists, free variables starting
    with ``x`` are parameters and the rest are objects, each sorted by name."""
    node = parse_node(text)
    fv = sorted(free_vars(node))
    if params is None:
        params = [v for v in fv if v.startswith("x") and v not in (objects or ())]
    if objects is None:
        objects = [v for v in fv if v not in params]
    return Formula(node, tuple(params), tuple(objects))


def format_formula(node) -> str:
    if isinstance(node, Truth):
        return "T" if node.value else "F"
    if isinstance(node, Rel):
        return f"{node.name}({','.join(node.args)})"
    if isinstance(node, Eq):
        return f"{node.left}={node.right}"
    if isinstance(node, Not):
        return "~" + format_formula(node.arg) if isinstance(node.arg, (Rel, Truth, Not)) \
            else f"~({format_formula(node.arg)})"
    if isinstance(node, And):
        return " & ".join(_wrap(a, (Or, Exists, ForAll)) for a in node.args)
    if isinstance(node, Or):
        return " | ".join(_wrap(a, (Exists, ForAll)) for a in node.args)
    if isinstance(node, Exists):
        return f"E {node.var}. {format_formula(node.body)}"
    if isinstance(node, ForAll):
        return f"A {node.var}. {format_formula(node.body)}"
    raise FormulaError(f"not a formula node: {node!r}")


def _wrap(node, loose) -> str:
    text = format_formula(node)
    return f"({text})" if isinstance(node, loose) else text


# -- structure text -------------------------------------------------------------

def serialize(s: Structure) -> str:
    lines = ["sig" + "".join(f" {n}/{a}" for n, a in s.sig.symbols), f"n {s.n}"]
    for name in s.sig.names:
        rows = sorted(s.tables[name])
        body = ";".join("(" + ",".join(map(str, t)) + ")" for t in rows)
        lines.append(f"rel {name}: {body}".rstrip())
    for name in s.sig.names:
        if name in s.flags:
            lines.append(f"flags {name}: " + ",".join(sorted(s.flags[name])))
    return "\n".join(lines) + "\n"


def parse(text: str) -> Structure:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
    if len(lines) < 2 or not (lines[0] == "sig" or lines[0].startswith("sig ")):
        raise StructureError("structure text must start with a 'sig' line")
    symbols = []
    for item in lines[0].split()[1:]:
        m = re.fullmatch(r"([A-Za-z_]\w*)/(\d+)", item)
        if not m:
            raise StructureError(f"bad signature item {item!r}")
        symbols.append((m.group(1), int(m.group(2))))
    sig = Signature(tuple(symbols))
    m = re.fullmatch(r"n\s+(\d+)", lines[1])
    if not m:
        raise StructureError(f"bad size line {lines[1]!r}")
    n = int(m.group(1))
    tables: dict[str, set] = {}
    flags: dict[str, set] = {}
    for ln in lines[2:]:
        m = re.fullmatch(r"(rel|flags)\s+([A-Za-z_]\w*)\s*:\s*(.*)", ln)
        if not m:
            raise StructureError(f"malformed line {ln!r}")
        kind, name, rest = m.groups()
        if name not in sig:
            raise StructureError(f"undeclared symbol {name!r}")
        if kind == "flags":
            flags[name] = {f.strip() for f in rest.split(",") if f.strip()}
            continue
        if name in tables:
            raise StructureError(f"relation {name} given twice")
        rows = set()
        for chunk in filter(None, (c.strip() for c in rest.split(";"))):
            tm = re.fullmatch(r"\(\s*(\d+(?:\s*,\s*\d+)*)\s*\)", chunk)
            if not tm:
                raise StructureError(f"malformed tuple {chunk!r}")
            tup = tuple(int(v) for v in tm.group(1).split(","))
            if len(tup) != sig.arity(name):
                raise StructureError(f"arity violation for {name}: {tup}")
            rows.add(tup)
        tables[name] = rows
    return Structure.build(sig, n, tables, flags)
