import json
from importlib import resources
from pathlib import Path

import pytest

from ninfer.cli import main
from ninfer.fixtures import load_corpus
from ninfer.security import Outcome

CORPUS_DIR = Path(str(resources.files("ninfer") / "corpus"))
GOLDEN = Path(__file__).parent / "golden"
EXIT = {Outcome.HOLDS: 0, Outcome.FAILS: 1, Outcome.UNKNOWN: 2}


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def corpus(name):
    return CORPUS_DIR / name


def test_check_branching_auth_fails(capsys):
    code, out, _ = run(capsys, "check", corpus("auth.ni"), "--process", "Auth",
                       "--property", "snni", "--relation", "branching")
    assert code == 1 and "Fails" in out


def test_check_nil_holds(capsys):
    code, out, _ = run(capsys, "check", corpus("nil.ni"), "--process", "P",
                       "--property", "s-ndc", "--relation", "weak")
    assert code == 0 and "Holds" in out


def test_check_ndc_witness_in_text(capsys):
    code, out, _ = run(capsys, "check", corpus("bndc-refutation.ni"), "--process", "P",
                       "--property", "ndc", "--relation", "weak")
    assert code == 1
    assert "Q = h1 . 0" in out and "L = {h1, h2}" in out


def test_check_unknown_exit_code(capsys):
    code, out, _ = run(capsys, "check", corpus("strict-sbrsnni.ni"), "--property", "ndc",
                       "--relation", "branching", "--depth", "2")
    assert code == 2 and "Unknown" in out


def test_check_json_golden(capsys):
    code, out, _ = run(capsys, "check", corpus("bndc-refutation.ni"), "--process", "P",
                       "--property", "ndc", "--relation", "weak", "--json")
    assert code == 1
    got = json.loads(out)
    assert isinstance(got["stats"].pop("ms"), (int, float))
    assert list(got) == ["process", "property", "relation", "outcome", "witness", "stats"]
    assert got == json.loads((GOLDEN / "check_ndc_weak.json").read_text())


def test_check_json_without_witness(capsys):
    code, out, _ = run(capsys, "check", corpus("nil.ni"), "--property", "snni", "--json")
    got = json.loads(out)
    assert code == 0 and "witness" not in got
    assert set(got["stats"]) == {"states", "transitions", "ms"}


@pytest.mark.parametrize("relation, code", [
    ("weak", 0), ("branching", 1), ("strong", 1), ("weak-bf", 1), ("strong-bf", 1),
])
def test_equiv_weak_branching_pair(capsys, relation, code):
    assert run(capsys, "equiv", corpus("weak-branching-pair.ni"), "S1", "S2", "--relation", relation)[0] == code


def test_equiv_json(capsys):
    code, out, _ = run(capsys, "equiv", corpus("weak-branching-pair.ni"), "S1", "S2", "-r", "weak", "--json")
    got = json.loads(out)
    assert code == 0 and got["equivalent"] is True and got["stats"]["states"] == [5, 4]


def test_equiv_cyclic_input(capsys, tmp_path):
    f = tmp_path / "loop.ni"
    f.write_text("P := a . P;")
    code, _, err = run(capsys, "equiv", f, "P", "P", "--relation", "weak-bf")
    assert code == 5 and "acyclic" in err


def test_lts_aut_and_transforms(capsys):
    code, out, _ = run(capsys, "lts", corpus("auth.ni"), "--process", "Auth", "--format", "aut")
    assert code == 0 and out.splitlines()[0] == "des (0,10,6)"
    _, out, _ = run(capsys, "lts", corpus("auth.ni"), "--process", "Auth", "--transform", "restrict")
    assert out.splitlines()[0] == "des (0,8,6)" and '"h"' not in out
    _, out, _ = run(capsys, "lts", corpus("auth.ni"), "--process", "Auth", "--transform", "hide")
    assert out.splitlines()[0] == "des (0,10,6)" and '"h"' not in out


def test_lts_dot(capsys):
    code, out, _ = run(capsys, "lts", corpus("nil.ni"), "--process", "P", "--format", "dot")
    assert code == 0 and out.count("[label=") == 1
    code, out, _ = run(capsys, "lts", corpus("weak-branching-pair.ni"), "-p", "S1", "--format", "dot",
                       "--partition", "branching")
    assert code == 0 and "fillcolor" in out


def test_taxonomy(capsys):
    code, out, _ = run(capsys, "taxonomy", corpus("tau-law-prefix.ni"), "--process", "P")
    assert code == 0
    rows = {line.split()[0]: line.split() for line in out.splitlines()[2:]}
    assert rows["s-snni"][1:] == ["SBSNNI", "holds", "SBrSNNI", "fails"]
    code, out, _ = run(capsys, "taxonomy", corpus("nil.ni"), "--json")
    got = json.loads(out)
    assert code == 0 and got["consistent"]
    assert {v["outcome"] for v in got["verdicts"].values()} == {"holds"}


def test_taxonomy_soundness_exit(capsys, monkeypatch):
    from ninfer import cli
    real = cli.taxonomy_report

    def broken(*a, **k):
        report = real(*a, **k)
        report.violations.append("forged violation")
        return report

    monkeypatch.setattr(cli, "taxonomy_report", broken)
    code, _, err = run(capsys, "taxonomy", corpus("nil.ni"))
    assert code == 6 and "forged violation" in err


@pytest.mark.parametrize("argv", [
    ["check"],
    ["check", "nil.ni", "--property", "bogus"],
    ["check", "nil.ni", "--property", "snni", "--relation", "strong"],
    ["check", "nil.ni", "--property", "snni", "--process", "Nope"],
    ["check", "missing-file.ni", "--property", "snni"],
    ["frobnicate"],
])
def test_usage_errors(capsys, argv):
    argv = [str(corpus(a)) if a == "nil.ni" else a for a in argv]
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 3


@pytest.mark.parametrize("text", ["P := a . ;", "P := P + a . 0;", "P := Q;", "P := 0; P := 0;"])
def test_parse_and_guardedness_errors(capsys, tmp_path, text):
    f = tmp_path / "bad.ni"
    f.write_text(text)
    code, _, err = run(capsys, "check", f, "--property", "snni")
    assert code == 3 and err.startswith("ninfer: error")


def test_state_limit_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NINFER_MAX_STATES", "3")
    code, _, err = run(capsys, "lts", corpus("auth.ni"))
    assert code == 4 and "exceeds" in err
    assert run(capsys, "lts", corpus("auth.ni"), "--max-states", "6")[0] == 0
    monkeypatch.setenv("NINFER_MAX_STATES", "many")
    assert run(capsys, "lts", corpus("auth.ni"))[0] == 3


def test_parse_and_random_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "random", "--seed", "7", "--count", "3")
    assert code == 0
    f = tmp_path / "r.ni"
    f.write_text(out)
    code, again, _ = run(capsys, "parse", f)
    assert code == 0 and again.count(":=") == 3


def test_corpus_command(capsys):
    code, out, _ = run(capsys, "corpus")
    assert code == 0 and "FAIL" not in out


def _cases():
    for f in load_corpus():
        for x in f.expectations:
            yield pytest.param(f, x, id=f"{f.name}-{x.property}-{x.process}")


@pytest.mark.parametrize("fixture, exp", list(_cases()))
def test_exit_codes_for_every_corpus_expectation(capsys, fixture, exp):
    code, _, _ = run(capsys, "check", corpus(fixture.file), "--process", exp.process,
                     "--property", exp.property.base.value, "--relation", exp.property.relation.value)
    assert code == EXIT[exp.expected]


def _equiv_cases():
    for f in load_corpus():
        for q in f.equivalences:
            yield pytest.param(f, q, id=f"{f.name}-{q.left}-{q.right}-{q.relation}")


@pytest.mark.parametrize("fixture, q", list(_equiv_cases()))
def test_exit_codes_for_every_corpus_equivalence(capsys, fixture, q):
    code, _, _ = run(capsys, "equiv", corpus(fixture.file), q.left, q.right, "--relation", q.relation)
    assert code == (0 if q.expected else 1)
