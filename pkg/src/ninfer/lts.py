"""Explicit labeled transition systems derived from process terms."""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Literal

from .syntax import (
    TAU, Choice, Const, Hide, Nil, Parallel, Prefix, Restrict, SpecModel, Term,
    number_occurrences, parse_term, to_text,
)

Transition = tuple  # (src, action, dst)


class StateSpaceExceeded(Exception):
    def __init__(self, states: int, transitions: int, limits: "BuildLimits"):
        self.states = states
        self.transitions = transitions
        self.limits = limits
        super().__init__(
            f"state space exceeds limits ({states} states, {transitions} transitions "
            f"explored; max {limits.max_states} states, {limits.max_transitions} transitions)")


class UnguardedRecursion(Exception):
    pass


@dataclass(frozen=True)
class BuildLimits:
    max_states: int = 100_000
    max_transitions: int = 1_000_000

    def __post_init__(self):
        if self.max_states <= 0 or self.max_transitions <= 0:
            raise ValueError("build limits must be strictly positive")


@dataclass(frozen=True)
class Lts:
    """A finite LTS.  States are indices into ``states`` (their labels)."""

    states: tuple
    initial: int
    transitions: tuple

    def __post_init__(self):
        n = len(self.states)
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for src, _, dst in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise ValueError(f"transition endpoint out of range: {(src, dst)}")
        if len(set(self.transitions)) != len(self.transitions):
            raise ValueError("duplicate transitions")

    @property
    def num_states(self) -> int:
        return len(self.states)

    @property
    def num_transitions(self) -> int:
        return len(self.transitions)

    @cached_property
    def actions(self) -> tuple:
        return tuple(sorted({a for _, a, _ in self.transitions}))

    @cached_property
    def succ(self) -> tuple:
        out = [[] for _ in self.states]
        for src, a, dst in self.transitions:
            out[src].append((a, dst))
        return tuple(tuple(x) for x in out)

    @cached_property
    def pred(self) -> tuple:
        out = [[] for _ in self.states]
        for src, a, dst in self.transitions:
            out[dst].append((a, src))
        return tuple(tuple(x) for x in out)

    def live_states(self) -> frozenset:
        return reachable(self, self.initial)


# --- SOS ---------------------------------------------------------------------


def _successors(term: Term, defs: dict, unfolding: frozenset = frozenset()) -> list:
    if isinstance(term, Nil):
        return []
    if isinstance(term, Prefix):
        return [(term.action, term.cont)]
    if isinstance(term, Choice):
        return _successors(term.left, defs, unfolding) + _successors(term.right, defs, unfolding)
    if isinstance(term, Parallel):
        sync = term.sync
        left = _successors(term.left, defs, unfolding)
        right = _successors(term.right, defs, unfolding)
        out = [(a, Parallel(p, term.right, sync)) for a, p in left if a not in sync]
        out += [(a, Parallel(term.left, q, sync)) for a, q in right if a not in sync]
        out += [(a, Parallel(p, q, sync))
                for a, p in left if a in sync
                for b, q in right if b == a]
        return out
    if isinstance(term, Restrict):
        return [(a, Restrict(p, term.actions))
                for a, p in _successors(term.body, defs, unfolding) if a not in term.actions]
    if isinstance(term, Hide):
        return [(TAU if a in term.actions else a, Hide(p, term.actions))
                for a, p in _successors(term.body, defs, unfolding)]
    if isinstance(term, Const):
        if term.name in unfolding:
            raise UnguardedRecursion(f"unfolding {term.name} does not reach an action prefix")
        if term.name not in defs:
            raise KeyError(f"undefined constant {term.name}")
        return _successors(defs[term.name], defs, unfolding | {term.name})
    raise TypeError(f"not a process term: {term!r}")


def _occurrence_key(term: Term):
    # Sequential subterms are told apart by where they occur in the source;
    # constants are identified by name so recursion closes back on itself.
    if isinstance(term, Const):
        return ("C", term.name)
    if isinstance(term, Parallel):
        return ("|", term.sync, _occurrence_key(term.left), _occurrence_key(term.right))
    if isinstance(term, Restrict):
        return ("\\", term.actions, _occurrence_key(term.body))
    if isinstance(term, Hide):
        return ("/", term.actions, _occurrence_key(term.body))
    return ("@", term.tag)


def resolve_root(model: SpecModel, root) -> Term:
    if isinstance(root, str):
        if root in model.defs:
            return Const(root)
        return parse_term(root, model)
    return root


def build_lts(model: SpecModel, root, limits: BuildLimits | None = None,
              identity: Literal["occurrence", "syntactic"] = "occurrence") -> Lts:
    """Explore every term reachable from ``root`` under the SOS rules.

    ``root`` is a constant name, a term in ``.ni`` syntax, or a term object.
    With ``identity="occurrence"`` (the default) two copies of the same
    sequential subterm written at different places in the source are
    distinct states, which reproduces the usual hand-drawn LTS of a
    specification; ``"syntactic"`` merges structurally equal terms.
    """
    limits = limits or BuildLimits()
    defs, start = number_occurrences(model, resolve_root(model, root))
    key = _occurrence_key if identity == "occurrence" else (lambda t: t)

    index = {key(start): 0}
    labels = [start]
    transitions: list = []
    seen_edges: set = set()
    succ_cache: dict = {}
    queue = deque([start])
    while queue:
        term = queue.popleft()
        k = key(term)
        src = index[k]
        moves = succ_cache.get(k)
        if moves is None:
            moves = succ_cache[k] = _successors(term, defs)
        for a, nxt in moves:
            nk = key(nxt)
            dst = index.get(nk)
            if dst is None:
                dst = index[nk] = len(labels)
                labels.append(nxt)
                queue.append(nxt)
                if len(labels) > limits.max_states:
                    raise StateSpaceExceeded(len(labels), len(transitions), limits)
            edge = (src, a, dst)
            if edge not in seen_edges:
                seen_edges.add(edge)
                transitions.append(edge)
                if len(transitions) > limits.max_transitions:
                    raise StateSpaceExceeded(len(labels), len(transitions), limits)
    return Lts(tuple(to_text(t) for t in labels), 0, tuple(transitions))


# --- transforms ----------------------------------------------------------------


def restrict_high(lts: Lts, high: Iterable[str]) -> Lts:
    """Delete transitions labeled in ``high``; the state table is unchanged.

    States that become unreachable stay in the table; use :func:`trim` or
    :meth:`Lts.live_states` to drop or detect them.
    """
    high = frozenset(high)
    if TAU in high:
        raise ValueError("tau cannot be restricted")
    kept = tuple(t for t in lts.transitions if t[1] not in high)
    return Lts(lts.states, lts.initial, kept)


def hide_high(lts: Lts, high: Iterable[str]) -> Lts:
    """Relabel transitions in ``high`` as tau.

    A relabeled edge that coincides with an existing tau edge is merged
    with it, so the count only shrinks in that degenerate case.
    """
    high = frozenset(high)
    if TAU in high:
        raise ValueError("tau cannot be hidden")
    out, seen = [], set()
    for src, a, dst in lts.transitions:
        edge = (src, TAU if a in high else a, dst)
        if edge not in seen:
            seen.add(edge)
            out.append(edge)
    return Lts(lts.states, lts.initial, tuple(out))


def reachable(lts: Lts, state: int) -> frozenset:
    seen = {state}
    stack = [state]
    succ = lts.succ
    while stack:
        s = stack.pop()
        for _, t in succ[s]:
            if t not in seen:
                seen.add(t)
                stack.append(t)
    return frozenset(seen)


def sub_lts(lts: Lts, keep: Iterable[int], initial: int | None = None) -> Lts:
    """The LTS induced by ``keep``; states are renumbered in ascending order."""
    order = sorted(set(keep))
    new = {s: i for i, s in enumerate(order)}
    init = lts.initial if initial is None else initial
    trans = tuple((new[s], a, new[t]) for s, a, t in lts.transitions if s in new and t in new)
    return Lts(tuple(lts.states[s] for s in order), new[init], trans)


def trim(lts: Lts) -> Lts:
    """Drop every state unreachable from the initial state."""
    return sub_lts(lts, lts.live_states())


def disjoint_union(a: Lts, b: Lts) -> tuple:
    """Return ``(union, left_map, right_map)``; the union's initial state is ``a``'s."""
    off = a.num_states
    trans = a.transitions + tuple((s + off, x, t + off) for s, x, t in b.transitions)
    union = Lts(a.states + b.states, a.initial, trans)
    return union, tuple(range(off)), tuple(range(off, off + b.num_states))


def is_isomorphic(a: Lts, b: Lts) -> bool:
    """Label-preserving graph isomorphism that maps initial state to initial state."""
    import networkx as nx
    from networkx.algorithms import isomorphism as iso

    def graph(l: Lts):
        g = nx.DiGraph()
        for s in range(l.num_states):
            g.add_node(s, init=(s == l.initial))
        labels: dict = {}
        for s, x, t in l.transitions:
            labels.setdefault((s, t), set()).add(x)
        for (s, t), xs in labels.items():
            g.add_edge(s, t, labels=frozenset(xs))
        return g

    if (a.num_states, a.num_transitions) != (b.num_states, b.num_transitions):
        return False
    return nx.is_isomorphic(
        graph(a), graph(b),
        node_match=iso.categorical_node_match("init", False),
        edge_match=iso.categorical_edge_match("labels", frozenset()))


# --- formats ---------------------------------------------------------------------


def export_aut(lts: Lts) -> str:
    """Aldebaran text: ``des (init,#transitions,#states)`` then sorted edges."""
    lines = [f"des ({lts.initial},{lts.num_transitions},{lts.num_states})"]
    for src, a, dst in sorted(lts.transitions):
        lines.append(f'({src},"{a}",{dst})')
    return "\n".join(lines) + "\n"


_AUT_HEADER = re.compile(r"^\s*des\s*\(\s*(\d+)\s*,\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_AUT_EDGE = re.compile(r'^\s*\(\s*(\d+)\s*,\s*(?:"([^"]*)"|([^,"]+?))\s*,\s*(\d+)\s*\)\s*$')


class AutFormatError(ValueError):
    pass


def parse_aut(text: str) -> Lts:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise AutFormatError("empty AUT input")
    m = _AUT_HEADER.match(lines[0])
    if m is None:
        raise AutFormatError(f"bad AUT header: {lines[0]!r}")
    init, count, n = map(int, m.groups())
    trans = []
    for ln in lines[1:]:
        e = _AUT_EDGE.match(ln)
        if e is None:
            raise AutFormatError(f"bad AUT transition: {ln!r}")
        label = e.group(2) if e.group(2) is not None else e.group(3)
        trans.append((int(e.group(1)), label, int(e.group(4))))
    if len(trans) != count:
        raise AutFormatError(f"header announces {count} transitions, found {len(trans)}")
    try:
        return Lts(tuple(str(i) for i in range(n)), init, tuple(trans))
    except ValueError as exc:
        raise AutFormatError(str(exc)) from exc


_PALETTE = ("#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
            "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f")


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def export_dot(lts: Lts, highlight=None, name: str = "lts") -> str:
    """Graphviz source; tau edges are dashed, blocks of ``highlight`` share a color."""
    out = [f"digraph {name} {{", "  node [shape=circle];"]
    for s, label in enumerate(lts.states):
        attrs = [f'label="{_dot_escape(label)}"']
        if s == lts.initial:
            attrs.append("penwidth=2")
        if highlight is not None:
            color = _PALETTE[highlight.block_of[s] % len(_PALETTE)]
            attrs.append(f'style=filled, fillcolor="{color}"')
        out.append(f"  s{s} [{', '.join(attrs)}];")
    for src, a, dst in sorted(lts.transitions):
        style = ", style=dashed" if a == TAU else ""
        out.append(f'  s{src} -> s{dst} [label="{_dot_escape(a)}"{style}];')
    out.append("}")
    return "\n".join(out) + "\n"
