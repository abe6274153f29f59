from __future__ import annotations

import subprocess
import sys

import pytest

from edramsey import ramsey
from edramsey.cli import (
    EXIT_CAP, EXIT_FAILS, EXIT_OK, EXIT_UNKNOWN, EXIT_USAGE, RunConfig, UsageError, load_spec, main,
    named_structure, parse_tuples,
)
from edramsey.relcore import Structure, parse


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_writes_structure(capsys, tmp_path):
    code, out, _ = run(capsys, "gen", "--gen", "s2:q=5")
    assert code == EXIT_OK
    assert parse(out).n == 5
    code, _, _ = run(capsys, "gen", "--gen", "equiv:i=2,j=2", "--out", str(tmp_path))
    assert code == EXIT_OK and parse((tmp_path / "structure.txt").read_text()).n == 4


def test_arrow_exit_codes_and_certificate(capsys, tmp_path):
    code, out, _ = run(capsys, "arrow", "--C", "pure6", "--B", "pure3", "--shape", "pair")
    assert code == EXIT_OK and out.startswith("verdict=holds")
    code, out, _ = run(capsys, "arrow", "--C", "pure5", "--B", "pure3", "--shape", "pair",
                       "--out", str(tmp_path))
    assert code == EXIT_FAILS and "certificate=" in out
    text = (tmp_path / "certificate.col").read_text()
    assert text.startswith("# command=arrow seed=42 ")
    chi = ramsey.load_colouring(text, Structure.build([], 5), Structure.build([], 2), ordered=False)
    assert ramsey.verify_certificate(Structure.build([], 5), Structure.build([], 3), chi)


def test_arrow_budget_gives_unknown(capsys):
    code, out, _ = run(capsys, "arrow", "--C", "pure8", "--B", "pure4", "--shape", "pair",
                       "--budget", "1000")
    assert code == EXIT_UNKNOWN and out.startswith("verdict=unknown")


def test_defarrow_finds_certificate_in_s2(capsys, tmp_path):
    code, out, _ = run(capsys, "defarrow", "--gen", "s2:q=7", "--phi", "R(x,y)", "--B", "c3",
                       "--out", str(tmp_path))
    assert code == EXIT_FAILS and (tmp_path / "certificate.col").exists()


def test_defarrow_holds_with_finite_gamma_evidence(capsys):
    code, out, _ = run(capsys, "defarrow", "--gen", "equiv:i=6,j=2", "--phi", "R(x,y)", "--B", "pure2",
                       "--grow", "1")
    assert code == EXIT_OK and "evidence=finite-Gamma" in out


def test_embed_counts(capsys):
    code, out, _ = run(capsys, "embed", "--A", "edge", "--B", "K3", "--count")
    assert code == EXIT_OK and "embeddings=6" in out


def test_lexprod_and_truncation(capsys):
    code, out, _ = run(capsys, "lexprod", "--M", "edge", "--N", "pure2", "--s")
    assert code == EXIT_OK and parse(out).n == 4
    code, out, _ = run(capsys, "lexprod", "--depth", "2", "--branching", "3")
    assert code == EXIT_OK and parse(out).n == 9


def test_indiv_and_konig(capsys):
    code, out, _ = run(capsys, "indiv", "--C", "refining:depth=2,branching=3", "--targets", "age:2")
    assert code == EXIT_OK
    code, out, _ = run(capsys, "indiv", "--C", "refining:depth=2,branching=3", "--targets", "age:3")
    assert code == EXIT_FAILS
    code, out, _ = run(capsys, "konig", "--gen", "equiv:i=8,j=2", "--chain", "pure1,pure2",
                       "--phi", "R(x,y)", "--params", "0;2")
    assert code == EXIT_OK


@pytest.mark.parametrize("argv", [
    ["arrow", "--C", "pure3", "--B", "pure2", "--k", "0"],
    ["arrow", "--C", "pure3"],
    ["gen", "--gen", "nosuch:q=1"],
    ["gen", "--gen", "s2:q=8"],
    ["defarrow", "--gen", "s2:q=5", "--phi", "R(x,", "--B", "c3"],
    ["gen", "--gen", "s2:q=5", "--budget", "0"],
    ["frobnicate"],
])
def test_usage_errors_exit_64(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_caps_exit_65(capsys):
    code, _, err = run(capsys, "gen", "--gen", "random_graph:base=5,depth=3,rounds=4,cap=20")
    assert code == EXIT_CAP and "cap" in err
    code, _, _ = run(capsys, "gen", "--gen", "random_graph:base=5,depth=3,rounds=4", "--cap", "20")
    assert code == EXIT_CAP
    code, _, _ = run(capsys, "indiv", "--C", "pure9", "--targets", "age:2", "--indiv-cap", "8")
    assert code == EXIT_CAP


def test_generator_string_seed_and_cap_win_over_flags():
    spec = load_spec("random_graph:seed=4,cap=30", seed=9, cap=100)
    assert (spec.seed, spec.cap) == (4, 30)
    spec = load_spec("random_graph", seed=9, cap=100)
    assert (spec.seed, spec.cap) == (9, 100)


def test_helpers():
    assert parse_tuples("0,1;2") == [(0, 1), (2,)]
    assert named_structure("K3").n == 3 and named_structure("nothing") is None
    with pytest.raises(UsageError):
        RunConfig("gen", 0, 0, 1, None)


def test_report_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["report", "--out", str(a)]) == EXIT_OK
    assert main(["report", "--out", str(b)]) == EXIT_OK
    for path in sorted(a.rglob("*")):
        if path.is_file():
            assert path.read_bytes() == (b / path.relative_to(a)).read_bytes(), path


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "edramsey", "embed", "--A", "point", "--B", "pure3",
                          "--count"], capture_output=True, text=True)
    assert res.returncode == 0 and "embeddings=3" in res.stdout
