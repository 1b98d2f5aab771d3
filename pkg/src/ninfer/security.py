"""Noninterference properties over weak and branching bisimilarity."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Iterator

from .equiv import Relation, equivalent, partition
from .lts import BuildLimits, Lts, build_lts, disjoint_union, hide_high, resolve_root, restrict_high
from .syntax import Choice, Hide, Nil, Parallel, Prefix, Restrict, SpecModel, Term, to_text


class Base(str, enum.Enum):
    SNNI = "snni"
    NDC = "ndc"
    S_SNNI = "s-snni"
    P_NDC = "p-ndc"
    S_NDC = "s-ndc"


class Outcome(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


_NAMES = {
    Base.SNNI: ("BSNNI", "BrSNNI"),
    Base.NDC: ("BNDC", "BrNDC"),
    Base.S_SNNI: ("SBSNNI", "SBrSNNI"),
    Base.P_NDC: ("P_BNDC", "P_BrNDC"),
    Base.S_NDC: ("SBNDC", "SBrNDC"),
}


@dataclass(frozen=True)
class PropertyId:
    base: Base
    relation: Relation

    def __post_init__(self):
        object.__setattr__(self, "base", Base(self.base))
        object.__setattr__(self, "relation", Relation(self.relation))
        if self.relation is Relation.STRONG:
            raise ValueError("security properties use weak or branching bisimilarity")

    @property
    def name(self) -> str:
        weak, branching = _NAMES[self.base]
        return weak if self.relation is Relation.WEAK else branching

    @classmethod
    def from_name(cls, name: str) -> "PropertyId":
        for base, pair in _NAMES.items():
            if name in pair:
                return cls(base, Relation.WEAK if name == pair[0] else Relation.BRANCHING)
        raise ValueError(f"unknown property {name!r}")

    def __str__(self):
        return self.name


ALL_PROPERTIES = tuple(PropertyId(b, r) for r in (Relation.WEAK, Relation.BRANCHING) for b in Base)


@dataclass
class Verdict:
    outcome: Outcome
    property: PropertyId
    witness: dict | None = None
    reason: str = ""

    def __post_init__(self):
        if self.outcome is Outcome.FAILS and not self.witness:
            raise ValueError("a failing verdict needs a witness")
        if self.outcome is Outcome.UNKNOWN and self.property.base is not Base.NDC:
            raise ValueError("only NDC checks may be inconclusive")

    @property
    def holds(self) -> bool:
        return self.outcome is Outcome.HOLDS

    @property
    def fails(self) -> bool:
        return self.outcome is Outcome.FAILS

    def to_json(self) -> dict:
        out = {"outcome": self.outcome.value, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _set_text(actions) -> str:
    return "{" + ", ".join(sorted(actions)) + "}"


@dataclass
class _Subject:
    """A process prepared for checking: its term, LTS and two low-level views."""

    model: SpecModel
    term: Term
    lts: Lts
    restricted: Lts = field(init=False)
    hidden: Lts = field(init=False)

    def __post_init__(self):
        self.restricted = restrict_high(self.lts, self.model.high)
        self.hidden = hide_high(self.lts, self.model.high)


def prepare(model: SpecModel, root, limits: BuildLimits | None = None) -> _Subject:
    term = resolve_root(model, root)
    return _Subject(model, term, build_lts(model, term, limits))


def _subject(model, root, limits, subject):
    return subject if subject is not None else prepare(model, root, limits)


def check_snni(model: SpecModel, root, relation, limits=None, subject=None) -> Verdict:
    """BSNNI / BrSNNI: restricted and hidden views of the root are equivalent."""
    prop = PropertyId(Base.SNNI, relation)
    sub = _subject(model, root, limits, subject)
    init = sub.lts.initial
    if equivalent(sub.restricted, init, sub.hidden, init, prop.relation):
        return Verdict(Outcome.HOLDS, prop)
    high = _set_text(sub.model.high)
    text = to_text(sub.term)
    return Verdict(Outcome.FAILS, prop, {
        "kind": "views",
        "restricted": f"({text}) \\ {high}",
        "hidden": f"({text}) / {high}",
    }, "the two low-level views of the process are not equivalent")


def check_strong_snni(model: SpecModel, root, relation, limits=None, subject=None) -> Verdict:
    """SBSNNI / SBrSNNI: every reachable state passes the SNNI check."""
    prop = PropertyId(Base.S_SNNI, relation)
    sub = _subject(model, root, limits, subject)
    union, left, right = disjoint_union(sub.restricted, sub.hidden)
    part = partition(union, prop.relation)
    for s in range(sub.lts.num_states):
        if not part.same_block(left[s], right[s]):
            return Verdict(Outcome.FAILS, prop, {
                "kind": "state", "state": s, "term": sub.lts.states[s],
            }, f"reachable process {sub.lts.states[s]} does not satisfy {PropertyId(Base.SNNI, relation)}")
    return Verdict(Outcome.HOLDS, prop)


def check_persistent_ndc(model: SpecModel, root, relation, limits=None, subject=None) -> Verdict:
    """P_BNDC / P_BrNDC, which coincide with SBSNNI / SBrSNNI."""
    prop = PropertyId(Base.P_NDC, relation)
    v = check_strong_snni(model, root, relation, limits, subject)
    reason = f"coincides with {v.property}"
    if v.reason:
        reason += f": {v.reason}"
    return Verdict(v.outcome, prop, v.witness, reason)


def check_sndc(model: SpecModel, root, relation, limits=None, subject=None) -> Verdict:
    """SBNDC / SBrNDC: every high step leaves the restricted view unchanged."""
    prop = PropertyId(Base.S_NDC, relation)
    sub = _subject(model, root, limits, subject)
    part = partition(sub.restricted, prop.relation)
    high = sub.model.high
    for s, a, t in sorted(sub.lts.transitions):
        if a in high and not part.same_block(s, t):
            return Verdict(Outcome.FAILS, prop, {
                "kind": "high-transition",
                "source": sub.lts.states[s], "action": a, "target": sub.lts.states[t],
                "source_state": s, "target_state": t,
            }, "a high action changes the low-level view")
    return Verdict(Outcome.HOLDS, prop)


# --- attackers ---------------------------------------------------------------
#
# An attacker is a finite term over high actions built from 0, prefix and
# choice.  Choice is treated as a set of summands, which removes duplicates
# up to commutativity, associativity, idempotence and "+ 0".


@lru_cache(maxsize=None)
def _tree_size(tree) -> int:
    return sum(1 + _tree_size(sub) for _, sub in tree)


@lru_cache(maxsize=None)
def _trees(actions: tuple, depth: int, size: int) -> tuple:
    """All attacker trees with the given depth bound and exact size, ordered."""
    if size == 0:
        return ((),)
    if depth == 0:
        return ()
    summands = [(s + 1, a, sub)
                for s in range(size)
                for a in actions
                for sub in _trees(actions, depth - 1, s)]
    summands.sort(key=lambda x: (x[0], x[1], _tree_key(x[2])))
    out = []

    def pick(start, remaining, chosen):
        if remaining == 0:
            out.append(tuple((a, sub) for _, a, sub in chosen))
            return
        for i in range(start, len(summands)):
            w = summands[i][0]
            if w > remaining:
                break
            chosen.append(summands[i])
            pick(i + 1, remaining - w, chosen)
            chosen.pop()

    pick(0, size, [])
    out.sort(key=_tree_key)
    return tuple(out)


@lru_cache(maxsize=None)
def _tree_key(tree):
    return tuple((1 + _tree_size(sub), a, _tree_key(sub)) for a, sub in tree)


def _tree_term(tree) -> Term:
    if not tree:
        return Nil()
    terms = [Prefix(a, _tree_term(sub)) for a, sub in tree]
    out = terms[0]
    for t in terms[1:]:
        out = Choice(out, t)
    return out


def _max_size(n: int, depth: int) -> int | None:
    """Size of the largest attacker tree, or None when astronomically large."""
    count, total, largest = 1, 0, 0  # number of trees, their summed size, max size
    for _ in range(depth):
        universe = n * count  # distinct summands available one level up
        if universe > 4096:
            return None
        largest = n * (count + total)
        count, total = 2 ** universe, 2 ** (universe - 1) * largest
    return largest


def enumerate_attackers(high: Iterable[str], depth: int) -> Iterator[Term]:
    """Yield attacker terms over ``high`` with prefix depth at most ``depth``.

    Terms come smallest first, lexicographically within a size, and no two
    are equal up to reordering or repeating summands.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    actions = tuple(sorted(set(high)))
    if not actions:
        yield Nil()
        return
    largest = _max_size(len(actions), depth)
    sizes = itertools.count() if largest is None else range(largest + 1)
    for size in sizes:
        for tree in _trees(actions, depth, size):
            yield _tree_term(tree)


def sync_subsets(actions: Iterable[str]) -> list:
    """All subsets, largest first (the full set is the strongest attacker)."""
    items = sorted(set(actions))
    return [frozenset(c) for k in range(len(items), -1, -1) for c in combinations(items, k)]


@dataclass(frozen=True)
class AttackerBounds:
    depth: int = 3
    max_attackers: int = 200
    max_subsets: int = 64


def check_ndc(model: SpecModel, root, relation, bounds: AttackerBounds | None = None,
              limits=None, subject=None) -> Verdict:
    """BNDC / BrNDC, approximated.

    Holds when the strong SNNI variant holds, fails on a concrete attacker
    found by bounded enumeration, and is unknown otherwise.
    """
    prop = PropertyId(Base.NDC, relation)
    bounds = bounds or AttackerBounds()
    sub = _subject(model, root, limits, subject)
    persistent = check_strong_snni(model, root, relation, limits, sub)
    if persistent.holds:
        return Verdict(Outcome.HOLDS, prop, None, f"implied by {persistent.property}")

    high = sub.model.high
    active = sorted(set(sub.lts.actions) & high)
    subsets = sync_subsets(active)[:bounds.max_subsets]
    init = sub.lts.initial
    tried = 0
    exhausted = True
    for q in enumerate_attackers(active, bounds.depth):
        if tried >= bounds.max_attackers:
            exhausted = False
            break
        tried += 1
        for sync in subsets:
            composed = Restrict(Hide(Parallel(sub.term, q, sync), sync), high)
            lts = build_lts(sub.model, composed, limits)
            if not equivalent(sub.restricted, init, lts, lts.initial, prop.relation):
                return Verdict(Outcome.FAILS, prop, {
                    "kind": "attacker", "attacker": to_text(q), "sync": sorted(sync),
                    "composition": to_text(composed),
                }, "a high-level attacker changes the low-level view")
    return Verdict(Outcome.UNKNOWN, prop, {
        "kind": "bounds", "attackers_tried": tried, "depth": bounds.depth,
        "enumeration_complete": exhausted,
    }, f"{persistent.property} fails and no attacker within bounds refutes {prop}")


_CHECKS = {
    Base.SNNI: check_snni,
    Base.S_SNNI: check_strong_snni,
    Base.P_NDC: check_persistent_ndc,
    Base.S_NDC: check_sndc,
}


def check(model: SpecModel, root, prop: PropertyId, bounds: AttackerBounds | None = None,
          limits=None, subject=None) -> Verdict:
    if prop.base is Base.NDC:
        return check_ndc(model, root, prop.relation, bounds, limits, subject)
    return _CHECKS[prop.base](model, root, prop.relation, limits, subject)


# --- taxonomy ------------------------------------------------------------------

# (stronger, weaker): a process with the first property has the second.
INCLUSIONS = tuple(
    (PropertyId.from_name(a), PropertyId.from_name(b)) for a, b in [
        ("SBNDC", "SBSNNI"), ("SBSNNI", "P_BNDC"), ("P_BNDC", "SBSNNI"),
        ("SBSNNI", "BNDC"), ("P_BNDC", "BNDC"), ("BNDC", "BSNNI"),
        ("SBrNDC", "SBrSNNI"), ("SBrSNNI", "P_BrNDC"), ("P_BrNDC", "SBrSNNI"),
        ("SBrSNNI", "BrNDC"), ("P_BrNDC", "BrNDC"), ("BrNDC", "BrSNNI"),
        ("BrSNNI", "BSNNI"), ("BrNDC", "BNDC"), ("SBrSNNI", "SBSNNI"),
        ("P_BrNDC", "P_BNDC"), ("SBrNDC", "SBNDC"),
    ])


@dataclass
class TaxonomyReport:
    process: str
    verdicts: dict
    violations: list

    @property
    def consistent(self) -> bool:
        return not self.violations

    def render(self) -> str:
        rows = [f"process: {self.process}", f"{'base':<8} {'weak':<22} {'branching':<22}"]
        for base in Base:
            cells = []
            for rel in (Relation.WEAK, Relation.BRANCHING):
                p = PropertyId(base, rel)
                cells.append(f"{p.name:<8} {self.verdicts[p].outcome.value:<13}")
            rows.append(f"{base.value:<8} {cells[0]} {cells[1]}")
        if self.violations:
            rows.append("INTERNAL SOUNDNESS ERROR:")
            rows += [f"  {v}" for v in self.violations]
        return "\n".join(rows) + "\n"

    def to_json(self) -> dict:
        return {
            "process": self.process,
            "verdicts": {p.name: v.to_json() for p, v in self.verdicts.items()},
            "consistent": self.consistent,
            "violations": list(self.violations),
        }


def inclusion_violations(verdicts: dict) -> list:
    out = []
    for strong, weak in INCLUSIONS:
        if verdicts[strong].holds and verdicts[weak].fails:
            out.append(f"{strong} holds but {weak} fails")
    return out


def taxonomy_report(model: SpecModel, root, bounds: AttackerBounds | None = None,
                    limits=None) -> TaxonomyReport:
    """Evaluate all ten properties and cross-check the inclusions between them."""
    sub = prepare(model, root, limits)
    verdicts = {p: check(model, root, p, bounds, limits, sub) for p in ALL_PROPERTIES}
    name = root if isinstance(root, str) else to_text(root)
    return TaxonomyReport(name, verdicts, inclusion_violations(verdicts))
