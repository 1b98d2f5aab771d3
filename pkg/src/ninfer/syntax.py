"""Process terms, the ``.ni`` specification language, and its static checks.

Grammar (EBNF)::

    spec     = { decl } ;
    decl     = "high" ident { "," ident } ";"
             | ident ":=" sum ";" ;
    sum      = par { "+" par } ;
    par      = prefix { "|[" [ actions ] "]|" prefix } ;
    prefix   = action "." prefix | postfix ;
    postfix  = atom { ( "\\" | "/" ) "{" [ actions ] "}" } ;
    atom     = "0" | ident | "(" sum ")" ;
    action   = "tau" | ident ;
    actions  = ident { "," ident } ;

``//`` starts a comment that runs to the end of the line.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

TAU = "tau"
IDENT_RE = re.compile(r"[a-zA-Z_][a-zA-Z0-9_']*")


class SpecError(Exception):
    """Base class for every error raised while reading a specification."""


class ParseError(SpecError):
    def __init__(self, message: str, line: int, col: int, expected: Iterable[str] = ()):
        self.line = line
        self.col = col
        self.expected = tuple(expected)
        text = f"{line}:{col}: {message}"
        if self.expected:
            text += f" (expected {', '.join(self.expected)})"
        super().__init__(text)


class DuplicateDefinition(SpecError):
    pass


class UndefinedConstant(SpecError):
    pass


class InvalidAction(SpecError):
    pass


# --- abstract syntax -------------------------------------------------------
#
# ``tag`` numbers a node's occurrence in the source.  It never takes part in
# equality, so two terms compare equal iff they are structurally identical.


@dataclass(frozen=True)
class Nil:
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Prefix:
    action: str
    cont: "Term"
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Choice:
    left: "Term"
    right: "Term"
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Parallel:
    left: "Term"
    right: "Term"
    sync: frozenset = frozenset()
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Restrict:
    body: "Term"
    actions: frozenset = frozenset()
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Hide:
    body: "Term"
    actions: frozenset = frozenset()
    tag: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True)
class Const:
    name: str
    tag: int = field(default=-1, compare=False, repr=False)


Term = Union[Nil, Prefix, Choice, Parallel, Restrict, Hide, Const]


def is_visible(action: str) -> bool:
    return action != TAU


def check_action_name(name: str) -> None:
    if not IDENT_RE.fullmatch(name):
        raise InvalidAction(f"{name!r} is not a valid action name")


def subterms(term: Term) -> Iterator[Term]:
    """Pre-order walk over ``term`` (constants are not unfolded)."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        if isinstance(t, Prefix):
            stack.append(t.cont)
        elif isinstance(t, (Choice, Parallel)):
            stack.append(t.right)
            stack.append(t.left)
        elif isinstance(t, (Restrict, Hide)):
            stack.append(t.body)


def actions_of(term: Term) -> set[str]:
    """Every visible action written in ``term``, including operator sets."""
    out: set[str] = set()
    for t in subterms(term):
        if isinstance(t, Prefix) and t.action != TAU:
            out.add(t.action)
        elif isinstance(t, Parallel):
            out |= t.sync
        elif isinstance(t, (Restrict, Hide)):
            out |= t.actions
    return out


def constants_of(term: Term) -> set[str]:
    return {t.name for t in subterms(term) if isinstance(t, Const)}


# --- specification model ---------------------------------------------------


class Level(enum.Enum):
    HIGH = "high"
    LOW = "low"
    INTERNAL = "internal"


@dataclass(frozen=True)
class SpecModel:
    defs: dict = field(default_factory=dict)
    high: frozenset = frozenset()

    @property
    def low(self) -> frozenset:
        mentioned: set[str] = set()
        for body in self.defs.values():
            mentioned |= actions_of(body)
        return frozenset(mentioned - self.high)

    def merged(self, other: "SpecModel") -> "SpecModel":
        """Union of two models; shared constant names must agree."""
        defs = dict(self.defs)
        for name, body in other.defs.items():
            if name in defs and defs[name] != body:
                raise DuplicateDefinition(f"constant {name} defined differently")
            defs[name] = body
        return SpecModel(defs, self.high | other.high)

    def with_high(self, high: Iterable[str]) -> "SpecModel":
        return SpecModel(dict(self.defs), frozenset(high))


def classify_action(action: str, model: SpecModel) -> Level:
    if action == TAU:
        return Level.INTERNAL
    if action in model.high:
        return Level.HIGH
    return Level.LOW


# --- lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<sym>:=|\|\[|\]\||[.+;,(){}\\/0])
  | (?P<ident>[a-zA-Z_][a-zA-Z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str  # "sym", "ident" or "eof"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, *expected: str):
        tok = self.cur
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"unexpected {found}", tok.line, tok.col, expected)

    def accept(self, text: str) -> bool:
        if self.cur.kind == "sym" and self.cur.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> None:
        if not self.accept(text):
            self.fail(repr(text))

    def ident(self) -> _Tok:
        tok = self.cur
        if tok.kind != "ident":
            self.fail("identifier")
        self.i += 1
        return tok

    def visible(self) -> str:
        tok = self.ident()
        if tok.text == TAU:
            raise ParseError("'tau' cannot appear in an action set", tok.line, tok.col)
        return tok.text

    def action_set(self, closing: str) -> frozenset:
        names = set()
        if not self.accept(closing):
            names.add(self.visible())
            while self.accept(","):
                names.add(self.visible())
            self.expect(closing)
        return frozenset(names)

    # sum := par { "+" par }
    def sum(self) -> Term:
        t = self.par()
        while self.accept("+"):
            t = Choice(t, self.par())
        return t

    def par(self) -> Term:
        t = self.prefix()
        while self.accept("|["):
            sync = self.action_set("]|")
            t = Parallel(t, self.prefix(), sync)
        return t

    def prefix(self) -> Term:
        tok = self.cur
        if tok.kind == "ident" and self.peek().kind == "sym" and self.peek().text == ".":
            self.i += 2
            return Prefix(tok.text, self.prefix())
        return self.postfix()

    def postfix(self) -> Term:
        t = self.atom()
        while True:
            if self.accept("\\"):
                self.expect("{")
                t = Restrict(t, self.action_set("}"))
            elif self.accept("/"):
                self.expect("{")
                t = Hide(t, self.action_set("}"))
            else:
                return t

    def atom(self) -> Term:
        if self.accept("0"):
            return Nil()
        if self.accept("("):
            t = self.sum()
            self.expect(")")
            return t
        tok = self.cur
        if tok.kind == "ident":
            if tok.text == TAU:
                self.i += 1
                self.fail("'.'")
            self.i += 1
            return Const(tok.text)
        self.fail("'0'", "'('", "identifier")

    def spec(self) -> tuple[dict, set, dict]:
        defs: dict[str, Term] = {}
        where: dict[str, _Tok] = {}
        high: set[str] = set()
        while self.cur.kind != "eof":
            tok = self.ident()
            if tok.text == "high" and not (self.cur.kind == "sym" and self.cur.text == ":="):
                high.add(self.visible())
                while self.accept(","):
                    high.add(self.visible())
                self.expect(";")
                continue
            if tok.text == TAU:
                raise ParseError("'tau' cannot name a constant", tok.line, tok.col)
            self.expect(":=")
            body = self.sum()
            self.expect(";")
            if tok.text in defs:
                raise DuplicateDefinition(
                    f"{tok.line}:{tok.col}: constant {tok.text} is already defined")
            defs[tok.text] = body
            where[tok.text] = tok
        return defs, high, where

    def whole_term(self) -> Term:
        t = self.sum()
        if self.cur.kind != "eof":
            self.fail("end of input")
        return t


def parse_spec(text: str) -> SpecModel:
    """Parse ``.ni`` source into a :class:`SpecModel`.

    Raises :class:`ParseError`, :class:`DuplicateDefinition` or
    :class:`UndefinedConstant`.
    """
    defs, high, where = _Parser(text).spec()
    for name, body in defs.items():
        for c in sorted(constants_of(body)):
            if c not in defs:
                tok = where[name]
                raise UndefinedConstant(
                    f"{tok.line}:{tok.col}: {name} refers to undefined constant {c}")
    return SpecModel(defs, frozenset(high))


def parse_term(text: str, model: SpecModel | None = None) -> Term:
    """Parse a single process term, checking constants against ``model``."""
    term = _Parser(text).whole_term()
    known = model.defs if model is not None else {}
    for c in sorted(constants_of(term)):
        if c not in known:
            raise UndefinedConstant(f"undefined constant {c}")
    return term


# --- pretty printing -------------------------------------------------------

_SUM, _PAR, _PRE, _POST = range(4)


def _set_text(actions) -> str:
    return ", ".join(sorted(actions))


def to_text(term: Term, level: int = _SUM) -> str:
    """Render ``term`` in ``.ni`` syntax with the minimum of parentheses."""
    if isinstance(term, Nil):
        return "0"
    if isinstance(term, Const):
        return term.name
    if isinstance(term, Choice):
        s, own = f"{to_text(term.left, _SUM)} + {to_text(term.right, _PAR)}", _SUM
    elif isinstance(term, Parallel):
        s = f"{to_text(term.left, _PAR)} |[{_set_text(term.sync)}]| {to_text(term.right, _PRE)}"
        own = _PAR
    elif isinstance(term, Prefix):
        s, own = f"{term.action} . {to_text(term.cont, _PRE)}", _PRE
    elif isinstance(term, Restrict):
        s, own = f"{to_text(term.body, _POST)} \\ {{{_set_text(term.actions)}}}", _POST
    elif isinstance(term, Hide):
        s, own = f"{to_text(term.body, _POST)} / {{{_set_text(term.actions)}}}", _POST
    else:
        raise TypeError(f"not a process term: {term!r}")
    return f"({s})" if own < level else s


def model_to_text(model: SpecModel) -> str:
    lines = []
    if model.high:
        lines.append(f"high {_set_text(model.high)};")
    for name, body in model.defs.items():
        lines.append(f"{name} := {to_text(body)};")
    return "\n".join(lines) + "\n"


# --- static checks ---------------------------------------------------------


@dataclass(frozen=True)
class GuardDiagnostic:
    definition: str
    constant: str
    chain: tuple

    def __str__(self):
        return (f"unguarded occurrence of {self.constant} in the definition of "
                f"{self.definition} (chain: {' -> '.join(self.chain)})")


def unguarded_constants(term: Term) -> list[str]:
    """Constants occurring in ``term`` outside the scope of any prefix."""
    out = []
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Const):
            out.append(t.name)
        elif isinstance(t, (Choice, Parallel)):
            stack.extend((t.right, t.left))
        elif isinstance(t, (Restrict, Hide)):
            stack.append(t.body)
    return out


def check_guardedness(model: SpecModel) -> list[GuardDiagnostic]:
    """Return one diagnostic per unguarded constant occurrence; empty means ok."""
    direct = {name: unguarded_constants(body) for name, body in model.defs.items()}
    diags = []
    for name, occs in direct.items():
        for c in occs:
            chain = [name, c]
            while c in direct and direct[c] and c not in chain[:-1]:
                c = direct[c][0]
                chain.append(c)
            diags.append(GuardDiagnostic(name, chain[1], tuple(chain)))
    return diags


# --- occurrence numbering --------------------------------------------------


class _Numberer:
    def __init__(self):
        self.next = 0

    def __call__(self, t: Term) -> Term:
        tag = self.next
        self.next += 1
        if isinstance(t, Nil):
            return Nil(tag)
        if isinstance(t, Const):
            return Const(t.name, tag)
        if isinstance(t, Prefix):
            return Prefix(t.action, self(t.cont), tag)
        if isinstance(t, Choice):
            return Choice(self(t.left), self(t.right), tag)
        if isinstance(t, Parallel):
            return Parallel(self(t.left), self(t.right), t.sync, tag)
        if isinstance(t, Restrict):
            return Restrict(self(t.body), t.actions, tag)
        if isinstance(t, Hide):
            return Hide(self(t.body), t.actions, tag)
        raise TypeError(f"not a process term: {t!r}")


def number_occurrences(model: SpecModel, root: Term) -> tuple[dict, Term]:
    """Copy every definition and ``root`` giving each node a unique tag."""
    number = _Numberer()
    defs = {name: number(body) for name, body in model.defs.items()}
    return defs, number(root)
