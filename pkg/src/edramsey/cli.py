"""Command-line driver.

Exit codes: 0 success / holds, 2 a ``fails`` verdict, 3 ``unknown`` (budget
exhausted), 64 bad flags or inputs, 65 a size cap was hit.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from dataclasses import dataclass

from . import genzoo, lexprod, ramsey
from .embed import age, iter_embeddings
from .relcore import CapExceeded, FormulaError, Formula, Not, Structure, StructureError, parse, \
    parse_formula, serialize

EXIT_OK, EXIT_FAILS, EXIT_UNKNOWN, EXIT_USAGE, EXIT_CAP = 0, 2, 3, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    budget: int
    cap: int
    out: str | None

    def __post_init__(self):
        if self.budget <= 0 or self.cap <= 0:
            raise UsageError("budgets and caps must be positive")

    def header(self) -> str:
        return f"# command={self.command} seed={self.seed} budget={self.budget}"


# -- named structures ----------------------------------------------------------------

def _digraph(n, arcs):
    return Structure.build([("R", 2)], n, {"R": set(arcs)})


def _complete(n):
    rows = {(a, b) for a in range(n) for b in range(n) if a != b}
    return Structure.build([("R", 2)], n, {"R": rows}, {"R": {"symmetric", "irreflexive"}})


def named_structure(name: str) -> Structure | None:
    if name == "point":
        return Structure.build([], 1)
    if name == "pair":
        return Structure.build([], 2)
    if name == "edge":
        return _complete(2)
    if name == "c3":
        return _digraph(3, [(0, 1), (1, 2), (2, 0)])
    if name == "c4":
        return _digraph(4, [(0, 1), (1, 2), (2, 3), (3, 0)])
    m = re.fullmatch(r"pure(\d+)", name)
    if m:
        return Structure.build([], int(m.group(1)))
    m = re.fullmatch(r"K(\d+)", name)
    if m:
        return _complete(int(m.group(1)))
    m = re.fullmatch(r"chain(\d+)", name)
    if m:
        n = int(m.group(1))
        return _digraph(n, [(a, b) for a in range(n) for b in range(n) if a < b])
    return None


def load_structure(text: str, seed: int | None = None, cap: int | None = None) -> Structure:
    """A file path, a named structure or a generator spec."""
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return parse(fh.read())
    named = named_structure(text)
    if named is not None:
        return named
    return genzoo.gen(load_spec(text, seed, cap))


def load_spec(text: str, seed: int | None = None, cap: int | None = None) -> genzoo.GeneratorSpec:
    """Seed and cap written into the generator string win over the command-line ones."""
    spec = genzoo.parse_spec(text)

    def given(key):
        return re.search(rf"(^|[\s,:]){key}=", text) is not None

    return genzoo.GeneratorSpec(spec.kind, spec.params,
                                spec.seed if given("seed") or seed is None else seed,
                                spec.cap if given("cap") or cap is None else cap)


def parse_tuples(text: str) -> list[tuple[int, ...]]:
    """``0,1;2,3`` -> ``[(0, 1), (2, 3)]``."""
    out = []
    for part in text.split(";"):
        part = part.strip().strip("()")
        out.append(tuple(int(x) for x in part.split(",") if x.strip()) if part else ())
    return out


def _emit(cfg: RunConfig, name: str, text: str) -> str:
    if cfg.out is None:
        sys.stdout.write(text)
        return "-"
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _formulas(text: str) -> list[Formula]:
    """One formula gives the 2-colouring (phi, ~phi); several separated by
    ``;`` give one colour each."""
    parts = [p for p in text.split(";") if p.strip()]
    if not parts:
        raise UsageError("empty --phi")
    first = parse_formula(parts[0])
    fs = [parse_formula(p, first.params, first.objects) for p in parts]
    if len(fs) == 1:
        fs.append(Formula(Not(first.body), first.params, first.objects))
    return fs


# -- commands -------------------------------------------------------------------------

def cmd_gen(args, cfg: RunConfig) -> int:
    s = load_structure(args.gen, cfg.seed, cfg.cap)
    _emit(cfg, "structure.txt", serialize(s))
    return EXIT_OK


def cmd_embed(args, cfg: RunConfig) -> int:
    a = load_structure(args.A, cfg.seed, cfg.cap)
    b = load_structure(args.B, cfg.seed, cfg.cap)
    maps = list(iter_embeddings(a, b))
    lines = [cfg.header(), f"embeddings={len(maps)}"]
    if not args.count:
        lines += [",".join(map(str, m)) for m in maps]
    _emit(cfg, "embeddings.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def _shape(args, cfg):
    shape = load_structure(args.shape, cfg.seed, cfg.cap)
    ordered = not (args.unordered or args.shape == "pair")
    return shape, ordered


def cmd_arrow(args, cfg: RunConfig) -> int:
    c = load_structure(args.C, cfg.seed, cfg.cap)
    b = load_structure(args.B, cfg.seed, cfg.cap)
    shape, ordered = _shape(args, cfg)
    v = ramsey.arrow_full(c, b, shape, args.k, cfg.budget, ordered)
    cert = "-"
    if v.certificate is not None:
        text = cfg.header() + "\n" + ramsey.format_colouring(v.certificate)
        cert = _emit(cfg, "certificate.col", text) if cfg.out else "certificate.col"
    print(v.report_line(cert))
    return {"holds": EXIT_OK, "fails": EXIT_FAILS, "unknown": EXIT_UNKNOWN}[v.status]


def cmd_defarrow(args, cfg: RunConfig) -> int:
    spec = load_spec(args.gen, cfg.seed, cfg.cap)
    window, big, inc = genzoo.ambient(spec, args.grow) if args.grow else (None, None, None)
    if window is None:
        window = genzoo.gen(spec)
        big, inc = window, tuple(range(window.n))
    b = load_structure(args.B, cfg.seed, cfg.cap)
    shape, ordered = _shape(args, cfg)
    formulas = _formulas(args.phi)
    pool = parse_tuples(args.params) if args.params else None
    family = ramsey.definable_family(big, inc, window, shape, formulas, pool, ordered)
    if not family:
        raise UsageError("no parameter tuple defines a colouring (classes never partition the copies)")
    heuristic = any(not f.quantifier_free for f in formulas)
    for chi in family:
        if ramsey.find_mono_copy(chi, b) is None:
            text = f"{cfg.header()} params={chi.provenance.params}\n" + ramsey.format_colouring(chi)
            cert = _emit(cfg, "certificate.col", text) if cfg.out else "certificate.col"
            print(f"verdict=fails colourings={len(family)} params={','.join(map(str, chi.provenance.params))} "
                  f"certificate={cert}" + (" heuristic" if heuristic else ""))
            return EXIT_FAILS
    print(f"verdict=holds colourings={len(family)} evidence=finite-Gamma" + (" heuristic" if heuristic else ""))
    return EXIT_OK


def cmd_lexprod(args, cfg: RunConfig) -> int:
    if args.depth is not None:
        factors = [load_structure(f, cfg.seed, cfg.cap) for f in args.factors.split(",")] \
            if args.factors else [lexprod.pure_set(args.branching)] * args.depth
        t = lexprod.truncated_product(factors, args.depth, args.branching)
        _emit(cfg, "product.txt", serialize(t.structure))
        return EXIT_OK
    if not (args.M and args.N):
        raise UsageError("lexprod needs --M and --N (or --depth/--branching)")
    m = load_structure(args.M, cfg.seed, cfg.cap)
    n = load_structure(args.N, cfg.seed, cfg.cap)
    p = lexprod.lex_product(m, n, args.s)
    _emit(cfg, "product.txt", serialize(p.structure))
    return EXIT_OK


def _targets(text: str, c: Structure, cfg) -> list[Structure]:
    m = re.fullmatch(r"age:(\d+)", text)
    if m:
        return age(c, int(m.group(1)))
    return [load_structure(t, cfg.seed, cfg.cap) for t in text.split(",")]


def cmd_indiv(args, cfg: RunConfig) -> int:
    c = load_structure(args.C, cfg.seed, cfg.cap)
    rep = ramsey.indivisibility_check(c, _targets(args.targets, c, cfg), args.mode, args.indiv_cap)
    text = (f"{cfg.header()}\nholds={rep.holds} mode={rep.mode} partitions={rep.partitions} "
            f"passed={rep.passed} worst={rep.worst} worst_score={rep.worst_score}/{rep.targets}\n")
    _emit(cfg, "indivisibility.txt", text)
    return EXIT_OK if rep.holds else EXIT_FAILS


def cmd_konig(args, cfg: RunConfig) -> int:
    spec = load_spec(args.gen, cfg.seed, cfg.cap)
    window = genzoo.gen(spec)
    chain = [load_structure(x, cfg.seed, cfg.cap) for x in args.chain.split(",")]
    shape, ordered = _shape(args, cfg)
    formulas = _formulas(args.phi)
    inc = tuple(range(window.n))
    gamma = [ramsey.induce_colouring(window, inc, window, shape, formulas, p, ordered)
             for p in parse_tuples(args.params)]
    res = ramsey.konig_colour_sequence(window, chain, gamma)
    if res is None:
        print("lambda=none")
        return EXIT_FAILS
    lines = [cfg.header(), f"lambda={','.join(map(str, res.colours))}"]
    lines += [f"level={t} witness={','.join(map(str, w))}" for t, w in enumerate(res.witnesses)]
    _emit(cfg, "konig.txt", "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_report(args, cfg: RunConfig) -> int:
    from .report import run_report
    if args.suite != "paper6":
        raise UsageError(f"unknown suite {args.suite!r}")
    out = cfg.out or "report-out"
    reports = run_report(out, cfg.seed, cfg.budget)
    with open(os.path.join(out, "report.txt"), encoding="utf-8") as fh:
        sys.stdout.write(fh.read())
    return EXIT_OK if all(r.matches for r in reports) else EXIT_FAILS


# -- argument parsing -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--budget", type=int, default=ramsey.DEFAULT_BUDGET)
    common.add_argument("--cap", type=int, default=genzoo.DEFAULT_CAP, help="generator domain cap")
    common.add_argument("--out", default=None, help="output directory (default: stdout)")

    p = _Parser(prog="edramsey", description="Finite structural Ramsey workbench")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", parents=[common], help="generate a structure")
    g.add_argument("--gen", required=True)
    g.set_defaults(fn=cmd_gen)

    e = sub.add_parser("embed", parents=[common], help="list embeddings A -> B")
    e.add_argument("--A", required=True)
    e.add_argument("--B", required=True)
    e.add_argument("--count", action="store_true")
    e.set_defaults(fn=cmd_embed)

    def shape_flags(q, default="point"):
        q.add_argument("--shape", default=default)
        q.add_argument("--unordered", action="store_true", help="colour image sets, not tuples")

    a = sub.add_parser("arrow", parents=[common], help="decide C -> (B)^shape_k")
    a.add_argument("--C", required=True)
    a.add_argument("--B", required=True)
    a.add_argument("--k", type=int, default=2)
    shape_flags(a)
    a.set_defaults(fn=cmd_arrow)

    d = sub.add_parser("defarrow", parents=[common], help="arrow for formula-defined colourings")
    d.add_argument("--gen", required=True)
    d.add_argument("--phi", required=True)
    d.add_argument("--B", required=True)
    d.add_argument("--params", default=None, help="parameter tuples, e.g. '0;3' (default: all)")
    d.add_argument("--grow", type=int, default=0, help="take parameters from a larger ambient")
    shape_flags(d)
    d.set_defaults(fn=cmd_defarrow)

    lp = sub.add_parser("lexprod", parents=[common], help="lexicographic products")
    lp.add_argument("--M")
    lp.add_argument("--N")
    lp.add_argument("--s", action="store_true", help="add the same-block relation s")
    lp.add_argument("--depth", type=int, default=None, help="truncated infinite product depth")
    lp.add_argument("--branching", type=int, default=2)
    lp.add_argument("--factors", default=None, help="comma-separated factors (default: pure sets)")
    lp.set_defaults(fn=cmd_lexprod)

    i = sub.add_parser("indiv", parents=[common], help="indivisibility over 2-partitions")
    i.add_argument("--C", required=True)
    i.add_argument("--targets", required=True, help="'age:<n>' or comma-separated structures")
    i.add_argument("--mode", choices=("age", "copy"), default="age")
    i.add_argument("--indiv-cap", type=int, default=ramsey.INDIVISIBILITY_CAP)
    i.set_defaults(fn=cmd_indiv)

    k = sub.add_parser("konig", parents=[common], help="colour-sequence tree search")
    k.add_argument("--gen", required=True)
    k.add_argument("--chain", required=True)
    k.add_argument("--phi", required=True)
    k.add_argument("--params", required=True, help="one parameter tuple per colouring, ';'-separated")
    shape_flags(k)
    k.set_defaults(fn=cmd_konig)

    r = sub.add_parser("report", parents=[common], help="regenerate the example table")
    r.add_argument("--suite", default="paper6")
    r.set_defaults(fn=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(args.command, args.seed, args.budget, args.cap, args.out)
        return args.fn(args, cfg)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, StructureError, FormulaError, ramsey.ColouringError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
