"""Corpus of reference processes with their expected verdicts.

The corpus is data: ``.ni`` files plus ``manifest.json`` in the ``corpus``
package directory.  :func:`run_fixture` replays one fixture and returns the
expectations it does not reproduce.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

from .equiv import BfMode, Relation, bf_bisimilar_oracle, equivalent
from .lts import build_lts
from .security import AttackerBounds, Base, Outcome, PropertyId, Verdict, check, prepare
from .syntax import SpecError, SpecModel, parse_spec


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class Expectation:
    process: str
    property: PropertyId
    expected: Outcome
    provenance: str
    witness: dict | None = None
    # verdict claimed in the literature when it differs from what is decidable here
    stated: Outcome | None = None


@dataclass(frozen=True)
class EquivQuery:
    left: str
    right: str
    relation: str
    expected: bool
    provenance: str


@dataclass
class Fixture:
    name: str
    file: str
    source: str
    provenance: str
    expectations: list = field(default_factory=list)
    equivalences: list = field(default_factory=list)

    @property
    def model(self) -> SpecModel:
        return parse_spec(self.source)


_RELATIONS = {r.value for r in Relation} | {m.value for m in BfMode}


def _expectation(rec: dict) -> Expectation:
    prop = PropertyId(Base(rec["property"]), Relation(rec["relation"]))
    stated = rec.get("stated_verdict")
    return Expectation(rec["process"], prop, Outcome(rec["expected"]), rec["provenance"],
                       rec.get("witness"), Outcome(stated) if stated else None)


def _query(rec: dict) -> EquivQuery:
    if rec["relation"] not in _RELATIONS:
        raise ValueError(f"unknown relation {rec['relation']!r}")
    if not isinstance(rec["expected"], bool):
        raise ValueError("equivalence expectations are booleans")
    return EquivQuery(rec["left"], rec["right"], rec["relation"], rec["expected"], rec["provenance"])


def load_corpus() -> list:
    """Load every fixture listed in the manifest, in manifest order."""
    root = resources.files("ninfer") / "corpus"
    try:
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"cannot read corpus manifest: {exc}") from exc
    out = []
    for rec in manifest.get("fixtures", []):
        name = rec.get("name", "?")
        try:
            source = (root / rec["file"]).read_text(encoding="utf-8")
            fixture = Fixture(
                name, rec["file"], source, rec["provenance"],
                [_expectation(x) for x in rec.get("expectations", [])],
                [_query(x) for x in rec.get("equivalences", [])],
            )
            model = fixture.model
        except (OSError, KeyError, ValueError, SpecError) as exc:
            raise CorpusError(f"fixture {name}: {exc}") from exc
        for x in fixture.expectations:
            if x.process not in model.defs:
                raise CorpusError(f"fixture {name}: undefined process {x.process}")
        for x in fixture.equivalences:
            if x.left not in model.defs or x.right not in model.defs:
                raise CorpusError(f"fixture {name}: undefined process in {x.left} / {x.right}")
        out.append(fixture)
    return out


def get_fixture(name: str) -> Fixture:
    for fixture in load_corpus():
        if fixture.name == name:
            return fixture
    raise KeyError(name)


def witness_matches(expected: dict | None, verdict: Verdict) -> bool:
    """Every key given in the expected witness must match the reported one."""
    if not expected:
        return True
    got = verdict.witness or {}
    return all(got.get(k) == v for k, v in expected.items())


def decide(model: SpecModel, left: str, right: str, relation: str) -> bool:
    a = build_lts(model, left)
    b = build_lts(model, right)
    if relation in {m.value for m in BfMode}:
        return bf_bisimilar_oracle(a, a.initial, b, b.initial, relation)
    return equivalent(a, a.initial, b, b.initial, relation)


def run_fixture(fixture: Fixture, bounds: AttackerBounds | None = None) -> list:
    """Return a description of every expectation the checker does not reproduce."""
    model = fixture.model
    subjects: dict = {}
    problems = []
    for x in fixture.expectations:
        if x.process not in subjects:
            subjects[x.process] = prepare(model, x.process)
        v = check(model, x.process, x.property, bounds, subject=subjects[x.process])
        if v.outcome is not x.expected:
            problems.append(f"{fixture.name}: {x.property}({x.process}) = {v.outcome.value}, "
                            f"expected {x.expected.value}")
        elif not witness_matches(x.witness, v):
            problems.append(f"{fixture.name}: {x.property}({x.process}) witness {v.witness}, "
                            f"expected {x.witness}")
    for x in fixture.equivalences:
        got = decide(model, x.left, x.right, x.relation)
        if got != x.expected:
            problems.append(f"{fixture.name}: {x.left} ~{x.relation} {x.right} = {got}, "
                            f"expected {x.expected}")
    return problems
