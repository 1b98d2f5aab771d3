"""Strong, weak and branching bisimilarity by partition refinement.

Also provides a brute-force back-and-forth bisimulation check over runs of
acyclic LTSs, used as an independent cross-check of the refinement engines.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

from .lts import Lts, disjoint_union, reachable
from .syntax import TAU


class Relation(str, enum.Enum):
    STRONG = "strong"
    WEAK = "weak"
    BRANCHING = "branching"


class BfMode(str, enum.Enum):
    STRONG_BF = "strong-bf"
    WEAK_BF = "weak-bf"


class CyclicInput(Exception):
    pass


class OracleBoundExceeded(Exception):
    pass


def _canonical(labels) -> tuple:
    """Renumber arbitrary block labels 0, 1, ... in order of first state."""
    ids: dict = {}
    return tuple(ids.setdefault(x, len(ids)) for x in labels)


@dataclass(frozen=True)
class Partition:
    block_of: tuple
    relation: Relation

    @cached_property
    def blocks(self) -> tuple:
        out: list = [[] for _ in range(self.num_blocks)]
        for s, b in enumerate(self.block_of):
            out[b].append(s)
        return tuple(frozenset(b) for b in out)

    @property
    def num_blocks(self) -> int:
        return max(self.block_of, default=-1) + 1

    def same_block(self, s: int, t: int) -> bool:
        return self.block_of[s] == self.block_of[t]

    def refines(self, other: "Partition") -> bool:
        """True if every block of ``self`` lies inside a block of ``other``."""
        seen: dict = {}
        for mine, theirs in zip(self.block_of, other.block_of):
            if seen.setdefault(mine, theirs) != theirs:
                return False
        return True


# --- strong ------------------------------------------------------------------


def _strong_signatures(lts: Lts, block) -> list:
    succ = lts.succ
    return [(block[s], frozenset((a, block[t]) for a, t in succ[s]))
            for s in range(lts.num_states)]


def _refine_strong(lts: Lts) -> tuple:
    block = (0,) * lts.num_states
    count = 1 if lts.num_states else 0
    while True:
        new = _canonical(_strong_signatures(lts, block))
        new_count = max(new, default=-1) + 1
        if new_count == count:
            return new
        block, count = new, new_count


def partition_strong(lts: Lts) -> Partition:
    return Partition(_refine_strong(lts), Relation.STRONG)


# --- weak --------------------------------------------------------------------


def _tau_closure(lts: Lts) -> list:
    succ = lts.succ
    out = []
    for s in range(lts.num_states):
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for a, v in succ[u]:
                if a == TAU and v not in seen:
                    seen.add(v)
                    stack.append(v)
        out.append(seen)
    return out


def saturate(lts: Lts) -> Lts:
    """Replace transitions by their weak versions (tau self-loops included)."""
    closure = _tau_closure(lts)
    succ = lts.succ
    edges = set()
    for s in range(lts.num_states):
        for t in closure[s]:
            edges.add((s, TAU, t))
            for a, u in succ[t]:
                if a != TAU:
                    for v in closure[u]:
                        edges.add((s, a, v))
    return Lts(lts.states, lts.initial, tuple(sorted(edges)))


def partition_weak(lts: Lts) -> Partition:
    return Partition(_refine_strong(saturate(lts)), Relation.WEAK)


# --- branching ---------------------------------------------------------------


def _inert_pred(lts: Lts, block) -> list:
    """tau-predecessors of each state that lie in the same block."""
    out: list = [[] for _ in range(lts.num_states)]
    for s, a, t in lts.transitions:
        if a == TAU and block[s] == block[t]:
            out[t].append(s)
    return out


def _can_reach_splitter(lts: Lts, block, inert_pred, action, target) -> set:
    """States that, via inert tau steps, reach an ``action`` step into ``target``."""
    marked = set()
    for s, a, t in lts.transitions:
        if a == action and block[t] == target and not (a == TAU and block[s] == target):
            marked.add(s)
    stack = list(marked)
    while stack:
        t = stack.pop()
        for s in inert_pred[t]:
            if s not in marked:
                marked.add(s)
                stack.append(s)
    return marked


def partition_branching(lts: Lts) -> Partition:
    """Coarsest branching-stable partition.

    A block is unstable for a splitter ``(a, B')`` when some but not all of
    its states can reach, through tau steps that stay inside the block, an
    ``a`` step into ``B'`` (tau steps within one block are exempt).  Such a
    block is split in two, and the search restarts until no splitter applies.
    """
    n = lts.num_states
    block = [0] * n
    while True:
        inert_pred = _inert_pred(lts, block)
        splitters = sorted({(a, block[t]) for _, a, t in lts.transitions})
        split = False
        for action, target in splitters:
            marked = _can_reach_splitter(lts, block, inert_pred, action, target)
            if not marked:
                continue
            size: dict = {}
            hit: dict = {}
            for s in range(n):
                size[block[s]] = size.get(block[s], 0) + 1
            for s in marked:
                hit[block[s]] = hit.get(block[s], 0) + 1
            unstable = {b for b, k in hit.items() if k < size[b]}
            if unstable:
                fresh = max(block) + 1
                relabel: dict = {}
                for s in sorted(marked):
                    b = block[s]
                    if b in unstable:
                        block[s] = relabel.setdefault(b, fresh + len(relabel))
                split = True
                break
        if not split:
            return Partition(_canonical(block), Relation.BRANCHING)


def branching_signatures(lts: Lts, block) -> list:
    """Per-state branching signature relative to ``block``.

    A partition is branching-stable exactly when states in the same block
    have equal signatures.
    """
    inert_succ: list = [[] for _ in range(lts.num_states)]
    for s, a, t in lts.transitions:
        if a == TAU and block[s] == block[t]:
            inert_succ[s].append(t)
    succ = lts.succ
    out = []
    for s in range(lts.num_states):
        sig = set()
        seen = {s}
        stack = [s]
        while stack:
            u = stack.pop()
            for a, v in succ[u]:
                if not (a == TAU and block[v] == block[s]):
                    sig.add((a, block[v]))
            for v in inert_succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        out.append((block[s], frozenset(sig)))
    return out


def is_stable(lts: Lts, partition: Partition) -> bool:
    """Whether one more refinement pass would leave ``partition`` unchanged."""
    block = partition.block_of
    if partition.relation is Relation.STRONG:
        sigs = _strong_signatures(lts, block)
    elif partition.relation is Relation.WEAK:
        sigs = _strong_signatures(saturate(lts), block)
    else:
        sigs = branching_signatures(lts, block)
    return max(_canonical(sigs), default=-1) == max(block, default=-1)


_ENGINES = {
    Relation.STRONG: partition_strong,
    Relation.WEAK: partition_weak,
    Relation.BRANCHING: partition_branching,
}


def partition(lts: Lts, relation) -> Partition:
    return _ENGINES[Relation(relation)](lts)


def equivalent(a: Lts, sa: int, b: Lts, sb: int, relation) -> bool:
    union, _, right = disjoint_union(a, b)
    return partition(union, relation).same_block(sa, right[sb])


# --- back-and-forth oracle -----------------------------------------------------


def _check_acyclic(lts: Lts, origin: int) -> None:
    succ = lts.succ
    live = reachable(lts, origin)
    indeg = {s: 0 for s in live}
    for s in live:
        for _, t in succ[s]:
            indeg[t] += 1
    ready = [s for s, d in indeg.items() if d == 0]
    done = 0
    while ready:
        s = ready.pop()
        done += 1
        for _, t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                ready.append(t)
    if done != len(live):
        raise CyclicInput(f"LTS has a cycle reachable from state {origin}")


class _RunTree:
    """All runs from one state: node 0 is the empty run, edges extend by one step."""

    def __init__(self, lts: Lts, origin: int, budget: int):
        self.parent = [-1]
        self.action = [None]
        self.children: list = [[]]
        last = [origin]
        i = 0
        while i < len(last):
            for a, t in lts.succ[last[i]]:
                if len(last) >= budget:
                    raise OracleBoundExceeded(f"more than {budget} runs")
                node = len(last)
                last.append(t)
                self.parent.append(i)
                self.action.append(a)
                self.children.append([])
                self.children[i].append((a, node))
            i += 1
        self.size = len(last)

    @cached_property
    def tau_desc(self) -> list:
        out = [None] * self.size
        for i in reversed(range(self.size)):
            acc = {i}
            for a, c in self.children[i]:
                if a == TAU:
                    acc |= out[c]
            out[i] = acc
        return out

    @cached_property
    def weak_desc(self) -> list:
        # weak_desc[i][a] = runs reachable from i by tau* a tau*
        out = [None] * self.size
        for i in reversed(range(self.size)):
            acc: dict = {}
            for a, c in self.children[i]:
                if a == TAU:
                    for x, runs in out[c].items():
                        acc.setdefault(x, set()).update(runs)
                else:
                    acc.setdefault(a, set()).update(self.tau_desc[c])
            out[i] = acc
        return out

    @cached_property
    def tau_anc(self) -> list:
        out = []
        for i in range(self.size):
            acc = [i]
            j = i
            while self.parent[j] >= 0 and self.action[j] == TAU:
                j = self.parent[j]
                acc.append(j)
            out.append(acc)
        return out

    @cached_property
    def weak_anc(self) -> list:
        # weak_anc[i][a] = runs j such that the steps from j to i spell tau* a tau*
        out = []
        for i in range(self.size):
            acc: dict = {}
            for x in self.tau_anc[i]:
                a = self.action[x]
                if a is not None and a != TAU:
                    acc.setdefault(a, []).extend(self.tau_anc[self.parent[x]])
            out.append(acc)
        return out


def _strong_ok(i, j, t1, t2, rel) -> bool:
    for a, c in t1.children[i]:
        if not any(b == a and (c, d) in rel for b, d in t2.children[j]):
            return False
    for b, d in t2.children[j]:
        if not any(a == b and (c, d) in rel for a, c in t1.children[i]):
            return False
    if (t1.parent[i] < 0) != (t2.parent[j] < 0):
        return False
    if t1.parent[i] >= 0:
        return t1.action[i] == t2.action[j] and (t1.parent[i], t2.parent[j]) in rel
    return True


def _weak_half(i, j, t1, t2, has) -> bool:
    # challenges issued by the run i of t1 against the run j of t2
    for a, c in t1.children[i]:
        answers = t2.tau_desc[j] if a == TAU else t2.weak_desc[j].get(a, ())
        if not any(has(c, d) for d in answers):
            return False
    if t1.parent[i] >= 0:
        a, p = t1.action[i], t1.parent[i]
        answers = t2.tau_anc[j] if a == TAU else t2.weak_anc[j].get(a, ())
        if not any(has(p, d) for d in answers):
            return False
    return True


def _weak_ok(i, j, t1, t2, rel) -> bool:
    return (_weak_half(i, j, t1, t2, lambda c, d: (c, d) in rel)
            and _weak_half(j, i, t2, t1, lambda d, c: (c, d) in rel))


def bf_bisimilar_oracle(a: Lts, sa: int, b: Lts, sb: int, mode=BfMode.WEAK_BF,
                        bound: int = 50_000) -> bool:
    """Decide back-and-forth bisimilarity of ``sa`` and ``sb`` by brute force.

    Computes the greatest relation over pairs of runs satisfying the
    forward and backward clauses, then asks whether the two empty runs are
    related.  Only defined for acyclic inputs (finitely many runs).
    """
    mode = BfMode(mode)
    _check_acyclic(a, sa)
    _check_acyclic(b, sb)
    t1 = _RunTree(a, sa, bound)
    t2 = _RunTree(b, sb, bound - t1.size)
    ok = _strong_ok if mode is BfMode.STRONG_BF else _weak_ok
    rel = {(i, j) for i in range(t1.size) for j in range(t2.size)}
    changed = True
    while changed:
        changed = False
        for pair in sorted(rel):
            if not ok(pair[0], pair[1], t1, t2, rel):
                rel.discard(pair)
                changed = True
    return (0, 0) in rel
