"""Seeded random models and LTSs for property-based checks."""
from __future__ import annotations

import random

from .lts import Lts
from .syntax import TAU, Choice, Const, Hide, Nil, Parallel, Prefix, Restrict, SpecModel, Term

LOW = ("l1", "l2")
HIGH = ("h1", "h2")


def _subset(rng: random.Random, pool) -> frozenset:
    return frozenset(a for a in pool if rng.random() < 0.3)


class _TermGen:
    def __init__(self, rng: random.Random, low, high, const_name):
        self.rng = rng
        self.low = tuple(low)
        self.high = tuple(high)
        self.visible = self.low + self.high
        self.const_name = const_name

    def action(self) -> str:
        # bias towards tau and high actions, where the properties differ
        r = self.rng.random()
        if r < 0.3:
            return TAU
        if r < 0.6 and self.high:
            return self.rng.choice(self.high)
        return self.rng.choice(self.low)

    def term(self, budget: int, guarded: bool, recursive: bool) -> tuple:
        """Return ``(term, operators used)`` using at most ``budget`` operators.

        ``0`` only appears once the budget is spent (or as a recursion
        alternative), so small budgets still give non-trivial behaviour.
        """
        rng = self.rng
        kinds, weights = [], []
        if guarded and recursive and self.const_name:
            kinds.append("const")
            weights.append(1)
        if budget >= 1:
            kinds.append("prefix")
            weights.append(6)
        if budget >= 3:
            kinds += ["choice", "parallel"]
            weights += [5, 1]
        if budget >= 2:
            # constants never sit under static operators, which keeps the
            # state space finite
            kinds += ["restrict", "hide"]
            weights += [1, 1]
        if not kinds:
            return Nil(), 0
        kind = rng.choices(kinds, weights)[0]
        if kind == "const":
            return Const(self.const_name), 0
        if kind == "prefix":
            cont, used = self.term(rng.randint(0, budget - 1), True, recursive)
            return Prefix(self.action(), cont), used + 1
        rest = budget - 1
        if kind in ("choice", "parallel"):
            static = kind == "parallel"
            share = rng.randint(1, rest - 1)
            left, u1 = self.term(share, guarded and not static, recursive and not static)
            right, u2 = self.term(rest - u1, guarded and not static, recursive and not static)
            if static:
                return Parallel(left, right, _subset(rng, self.visible)), 1 + u1 + u2
            return Choice(left, right), 1 + u1 + u2
        body, used = self.term(rest, False, False)
        cls = Restrict if kind == "restrict" else Hide
        return cls(body, _subset(rng, self.visible)), used + 1


def random_term(rng: random.Random, max_ops: int = 6, low=LOW, high=HIGH) -> Term:
    """A closed random term (no constants) with at most ``max_ops`` operators."""
    return _TermGen(rng, low, high, None).term(max_ops, False, False)[0]


def random_model(rng: random.Random, max_ops: int = 6, name: str = "P",
                 low=LOW, high=None) -> tuple:
    """A guarded model with one definition ``name`` and root ``Const(name)``.

    ``high`` defaults to a random subset of two high actions.
    """
    if high is None:
        high = tuple(h for h in HIGH if rng.random() < 0.7)
    gen = _TermGen(rng, low, high, name)
    body, _ = gen.term(max_ops, False, rng.random() < 0.4)
    return SpecModel({name: body}, frozenset(high)), Const(name)


def random_acyclic_lts(rng: random.Random, max_states: int = 8, max_transitions: int = 12,
                       actions=("a", "b", TAU)) -> Lts:
    """Random DAG-shaped LTS: every edge goes from a lower to a higher index."""
    n = rng.randint(1, max_states)
    edges = set()
    if n > 1:
        for _ in range(rng.randint(0, max_transitions)):
            s = rng.randrange(n - 1)
            t = rng.randrange(s + 1, n)
            edges.add((s, rng.choice(actions), t))
    return Lts(tuple(str(i) for i in range(n)), 0, tuple(sorted(edges)))


def random_lts(rng: random.Random, max_states: int = 8, max_transitions: int = 14,
               actions=("a", "b", TAU)) -> Lts:
    """Random LTS that may contain cycles and self-loops."""
    n = rng.randint(1, max_states)
    edges = {(rng.randrange(n), rng.choice(actions), rng.randrange(n))
             for _ in range(rng.randint(0, max_transitions))}
    return Lts(tuple(str(i) for i in range(n)), 0, tuple(sorted(edges)))


def branching_variant(rng: random.Random, term: Term) -> Term:
    """Rewrite ``term`` with laws that preserve branching bisimilarity.

    Used laws: ``a . tau . x = a . x``, commutativity of ``+``,
    ``x + 0 = x`` and ``x + x = x``; all are congruences.
    """
    def walk(t: Term) -> Term:
        if isinstance(t, Prefix):
            cont = walk(t.cont)
            if rng.random() < 0.3:
                cont = Prefix(TAU, cont)
            return Prefix(t.action, cont)
        if isinstance(t, Choice):
            left, right = walk(t.left), walk(t.right)
            out = Choice(right, left) if rng.random() < 0.5 else Choice(left, right)
        elif isinstance(t, Parallel):
            out = Parallel(walk(t.left), walk(t.right), t.sync)
        elif isinstance(t, Restrict):
            out = Restrict(walk(t.body), t.actions)
        elif isinstance(t, Hide):
            out = Hide(walk(t.body), t.actions)
        else:
            out = t
        r = rng.random()
        if r < 0.1:
            return Choice(out, Nil())
        if r < 0.2:
            return Choice(out, out)
        return out

    return walk(term)


def weak_variant(rng: random.Random, term: Term) -> Term:
    """Rewrite ``term`` with tau laws sound for weak but not branching bisimilarity.

    Used laws: ``tau . x = tau . x + x`` and
    ``a . (tau . x + y) = a . (tau . x + y) + a . x``.
    """
    def walk(t: Term) -> Term:
        if isinstance(t, Prefix):
            cont = walk(t.cont)
            out = Prefix(t.action, cont)
            if t.action == TAU and rng.random() < 0.8:
                return Choice(out, cont)
            if isinstance(cont, Choice) and rng.random() < 0.8:
                for side, other in ((cont.left, cont.right), (cont.right, cont.left)):
                    if isinstance(side, Prefix) and side.action == TAU:
                        return Choice(out, Prefix(t.action, side.cont))
            return out
        if isinstance(t, Choice):
            return Choice(walk(t.left), walk(t.right))
        if isinstance(t, Parallel):
            return Parallel(walk(t.left), walk(t.right), t.sync)
        if isinstance(t, Restrict):
            return Restrict(walk(t.body), t.actions)
        if isinstance(t, Hide):
            return Hide(walk(t.body), t.actions)
        return t

    return walk(term)


def gap_model(rng: random.Random, max_ops: int = 6, name: str = "Q") -> tuple:
    """A model ``Q := P1 + h . P2`` (or with ``P1``, ``P2`` swapped) where ``P2``
    is a weak-law rewrite of the random low-level term ``P1``."""
    # a sum at the top gives the rewritten tau summands something to lose
    left = rng.randint(0, max(0, max_ops - 3))
    p1 = Choice(Prefix(TAU, random_term(rng, left, high=())),
                random_term(rng, max(1, max_ops - 2 - left), high=()))
    p2 = weak_variant(rng, p1)
    if rng.random() < 0.5:
        p1, p2 = p2, p1
    h = rng.choice(HIGH)
    return SpecModel({name: Choice(p1, Prefix(h, p2))}, frozenset(HIGH)), Const(name)
