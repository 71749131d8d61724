"""Formula language: AST, parser, renderer, desugaring.

Connectives, loosest to tightest binding:

    iff     :=  imp ('<->' imp)*          left associative
    imp     :=  or ('->' imp)?            right associative
    or      :=  and ('|' and)*
    and     :=  unary ('&' unary)*
    unary   :=  '~' unary | modal unary | primary
    modal   :=  'D' group | 'C' group | 'K' group | 'CD' '[' group (';' group)* ']'
    primary :=  ident | '(' iff ')' | '[' group cmpop group ']'
    group   :=  '{' ident (',' ident)* '}'
    cmpop   :=  '<=' | '<' | '==' | '#'

Identifiers are [A-Za-z][A-Za-z0-9_]*.  `D`, `C`, `K`, `CD` act as keywords
only when immediately followed by `{` (or `[` for CD), so `Kp` and `Dog`
parse as atoms.  `K{a}` requires exactly one agent.  Modal prefixes bind
like `~`: `D{a} p & q` is `(D{a} p) & q`.

Comparison atoms relate the joint (pooled-information) relations of two
agent groups:  `[{a} <= {b}]` holds at a world when every world jointly
possible for {a} is also jointly possible for {b} -- {a}'s pooled view is
at least as sharp, so whatever {b} jointly knows there, {a} does too.
`<` is the strict form, `==` mutual, `#` neither direction; all three
desugar to `<=` via expand_sugar, and `K{a}` desugars to `D{a}`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator

MAX_GROUP_AGENTS = 8

__all__ = [
    "Formula", "Atom", "Not", "And", "Or", "Imp", "Iff",
    "DK", "CK", "CDK", "IndK", "Cmp", "CmpOp", "Group", "Supergroup",
    "FormulaError", "LexError", "ParseError", "EmptyGroupError",
    "parse", "render", "expand_sugar", "atom_names", "agent_names",
]


class FormulaError(ValueError):
    """Base class for formula syntax/structure errors."""


class LexError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (column {pos + 1})")
        self.pos = pos


class ParseError(FormulaError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (column {pos + 1})")
        self.pos = pos


class EmptyGroupError(FormulaError):
    """A group or group list with no members."""


@dataclass(frozen=True, order=True)
class Group:
    """Non-empty set of agent names, stored sorted for canonical identity."""

    agents: tuple[str, ...]

    def __init__(self, agents: Iterable[str]):
        names = tuple(sorted(set(agents)))
        if not names:
            raise EmptyGroupError("group must name at least one agent")
        if len(names) > MAX_GROUP_AGENTS:
            raise FormulaError(
                f"group has {len(names)} agents (limit {MAX_GROUP_AGENTS})")
        object.__setattr__(self, "agents", names)

    def __str__(self) -> str:
        return "{" + ",".join(self.agents) + "}"


@dataclass(frozen=True, order=True)
class Supergroup:
    """Non-empty set of groups, stored sorted for canonical identity."""

    groups: tuple[Group, ...]

    def __init__(self, groups: Iterable[Group]):
        gs = tuple(sorted(set(groups)))
        if not gs:
            raise EmptyGroupError("group list must contain at least one group")
        object.__setattr__(self, "groups", gs)

    def __str__(self) -> str:
        return ";".join(str(g) for g in self.groups)

    def union(self) -> Group:
        return Group(a for g in self.groups for a in g.agents)


class Formula:
    """Base class; all nodes are immutable and hashable."""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class DK(Formula):
    """What the group would know pooling everything its members know."""

    group: Group
    sub: Formula


@dataclass(frozen=True)
class CK(Formula):
    """Common knowledge among the group's members."""

    group: Group
    sub: Formula


@dataclass(frozen=True)
class CDK(Formula):
    """Common knowledge among groups-as-agents (each group pools first)."""

    groups: Supergroup
    sub: Formula


@dataclass(frozen=True)
class IndK(Formula):
    """Individual knowledge; sugar for a one-agent DK."""

    agent: str
    sub: Formula


class CmpOp(Enum):
    LEQ = "<="
    LT = "<"
    EQV = "=="
    INCOMP = "#"


@dataclass(frozen=True)
class Cmp(Formula):
    """Comparison of the epistemic strength of two groups."""

    op: CmpOp
    left: Group
    right: Group


# --- lexer ---------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str  # "ident" or the operator text itself
    text: str
    pos: int


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
      | (?P<op><->|->|<=|==|[~&|(){}\[\],;<\#])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LexError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup == "ident":
            tokens.append(_Token("ident", m.group(), pos))
        elif m.lastgroup == "op":
            tokens.append(_Token(m.group(), m.group(), pos))
        pos = m.end()
    return tokens


# --- parser --------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def _peek(self, ahead: int = 0) -> _Token | None:
        j = self.i + ahead
        return self.tokens[j] if j < len(self.tokens) else None

    def _next(self) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        self.i += 1
        return tok

    def _expect(self, kind: str) -> _Token:
        tok = self._peek()
        if tok is None:
            raise ParseError(f"expected {kind!r}, got end of input",
                             len(self.text))
        if tok.kind != kind:
            raise ParseError(f"expected {kind!r}, got {tok.text!r}", tok.pos)
        self.i += 1
        return tok

    def _at(self, kind: str) -> bool:
        tok = self._peek()
        return tok is not None and tok.kind == kind

    def parse(self) -> Formula:
        f = self._iff()
        tok = self._peek()
        if tok is not None:
            raise ParseError(f"unexpected {tok.text!r} after formula", tok.pos)
        return f

    def _iff(self) -> Formula:
        left = self._imp()
        while self._at("<->"):
            self._next()
            left = Iff(left, self._imp())
        return left

    def _imp(self) -> Formula:
        left = self._or()
        if self._at("->"):
            self._next()
            return Imp(left, self._imp())
        return left

    def _or(self) -> Formula:
        left = self._and()
        while self._at("|"):
            self._next()
            left = Or(left, self._and())
        return left

    def _and(self) -> Formula:
        left = self._unary()
        while self._at("&"):
            self._next()
            left = And(left, self._unary())
        return left

    def _unary(self) -> Formula:
        tok = self._peek()
        if tok is None:
            raise ParseError("unexpected end of input", len(self.text))
        if tok.kind == "~":
            self._next()
            return Not(self._unary())
        if tok.kind == "ident":
            nxt = self._peek(1)
            if tok.text in ("D", "C", "K") and nxt is not None \
                    and nxt.kind == "{":
                self._next()
                group = self._group()
                sub = self._unary()
                if tok.text == "D":
                    return DK(group, sub)
                if tok.text == "C":
                    return CK(group, sub)
                if len(group.agents) != 1:
                    raise ParseError(
                        f"K takes a single agent, got {group}", tok.pos)
                return IndK(group.agents[0], sub)
            if tok.text == "CD" and nxt is not None and nxt.kind == "[":
                self._next()
                self._expect("[")
                groups = [self._group()]
                while self._at(";"):
                    self._next()
                    groups.append(self._group())
                self._expect("]")
                return CDK(Supergroup(groups), self._unary())
        return self._primary()

    def _primary(self) -> Formula:
        tok = self._next()
        if tok.kind == "ident":
            return Atom(tok.text)
        if tok.kind == "(":
            f = self._iff()
            self._expect(")")
            return f
        if tok.kind == "[":
            left = self._group()
            op_tok = self._next()
            try:
                op = CmpOp(op_tok.kind)
            except ValueError:
                raise ParseError(
                    f"expected comparison operator, got {op_tok.text!r}",
                    op_tok.pos) from None
            right = self._group()
            self._expect("]")
            return Cmp(op, left, right)
        raise ParseError(f"unexpected {tok.text!r}", tok.pos)

    def _group(self) -> Group:
        open_tok = self._expect("{")
        if self._at("}"):
            raise EmptyGroupError(
                f"empty group at column {open_tok.pos + 1}")
        names = [self._expect("ident").text]
        while self._at(","):
            self._next()
            tok = self._expect("ident")
            if tok.text in names:
                raise ParseError(f"duplicate agent {tok.text!r} in group",
                                 tok.pos)
            names.append(tok.text)
        self._expect("}")
        return Group(names)


def parse(text: str) -> Formula:
    """Parse formula text; raises LexError/ParseError/EmptyGroupError."""
    return _Parser(text).parse()


# --- rendering -----------------------------------------------------------

# precedence levels; a node is parenthesized when its level is below the
# minimum its context demands
_L_IFF, _L_IMP, _L_OR, _L_AND, _L_UNARY, _L_PRIMARY = range(1, 7)


def _render(f: Formula, min_level: int) -> str:
    if isinstance(f, Atom):
        s, level = f.name, _L_PRIMARY
    elif isinstance(f, Cmp):
        s, level = f"[{f.left} {f.op.value} {f.right}]", _L_PRIMARY
    elif isinstance(f, Not):
        s, level = "~" + _render(f.sub, _L_UNARY), _L_UNARY
    elif isinstance(f, DK):
        s, level = f"D{f.group} " + _render(f.sub, _L_UNARY), _L_UNARY
    elif isinstance(f, CK):
        s, level = f"C{f.group} " + _render(f.sub, _L_UNARY), _L_UNARY
    elif isinstance(f, IndK):
        s, level = "K{" + f.agent + "} " + _render(f.sub, _L_UNARY), _L_UNARY
    elif isinstance(f, CDK):
        s, level = f"CD[{f.groups}] " + _render(f.sub, _L_UNARY), _L_UNARY
    elif isinstance(f, And):
        s = _render(f.left, _L_AND) + " & " + _render(f.right, _L_AND + 1)
        level = _L_AND
    elif isinstance(f, Or):
        s = _render(f.left, _L_OR) + " | " + _render(f.right, _L_OR + 1)
        level = _L_OR
    elif isinstance(f, Imp):
        # right associative: the right child may be another Imp bare
        s = _render(f.left, _L_IMP + 1) + " -> " + _render(f.right, _L_IMP)
        level = _L_IMP
    elif isinstance(f, Iff):
        s = _render(f.left, _L_IFF) + " <-> " + _render(f.right, _L_IFF + 1)
        level = _L_IFF
    else:
        raise TypeError(f"not a formula node: {f!r}")
    if level < min_level:
        return "(" + s + ")"
    return s


def render(f: Formula) -> str:
    """Render with minimal parentheses; parse(render(f)) == f."""
    return _render(f, 0)


# --- desugaring and traversal --------------------------------------------

def expand_sugar(f: Formula) -> Formula:
    """Rewrite to the core fragment: atoms, ~, &, D, C, CD, [<=].

    K{a} becomes D{a};  [A < B] becomes [A <= B] & ~[B <= A];
    [A == B] both directions;  [A # B] neither;  |, ->, <-> become ~/&.
    """
    if isinstance(f, Atom):
        return f
    if isinstance(f, Not):
        return Not(expand_sugar(f.sub))
    if isinstance(f, And):
        return And(expand_sugar(f.left), expand_sugar(f.right))
    if isinstance(f, Or):
        return Not(And(Not(expand_sugar(f.left)), Not(expand_sugar(f.right))))
    if isinstance(f, Imp):
        return Not(And(expand_sugar(f.left), Not(expand_sugar(f.right))))
    if isinstance(f, Iff):
        left, right = expand_sugar(f.left), expand_sugar(f.right)
        return And(Not(And(left, Not(right))), Not(And(right, Not(left))))
    if isinstance(f, DK):
        return DK(f.group, expand_sugar(f.sub))
    if isinstance(f, CK):
        return CK(f.group, expand_sugar(f.sub))
    if isinstance(f, CDK):
        return CDK(f.groups, expand_sugar(f.sub))
    if isinstance(f, IndK):
        return DK(Group([f.agent]), expand_sugar(f.sub))
    if isinstance(f, Cmp):
        leq = Cmp(CmpOp.LEQ, f.left, f.right)
        geq = Cmp(CmpOp.LEQ, f.right, f.left)
        if f.op is CmpOp.LEQ:
            return leq
        if f.op is CmpOp.LT:
            return And(leq, Not(geq))
        if f.op is CmpOp.EQV:
            return And(leq, geq)
        return And(Not(leq), Not(geq))
    raise TypeError(f"not a formula node: {f!r}")


def _walk(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Not):
        yield from _walk(f.sub)
    elif isinstance(f, (And, Or, Imp, Iff)):
        yield from _walk(f.left)
        yield from _walk(f.right)
    elif isinstance(f, (DK, CK, CDK, IndK)):
        yield from _walk(f.sub)


def atom_names(f: Formula) -> frozenset[str]:
    return frozenset(n.name for n in _walk(f) if isinstance(n, Atom))


def agent_names(f: Formula) -> frozenset[str]:
    """Every agent mentioned in any modality or comparison."""
    agents: set[str] = set()
    for n in _walk(f):
        if isinstance(n, (DK, CK)):
            agents.update(n.group.agents)
        elif isinstance(n, CDK):
            agents.update(n.groups.union().agents)
        elif isinstance(n, IndK):
            agents.add(n.agent)
        elif isinstance(n, Cmp):
            agents.update(n.left.agents)
            agents.update(n.right.agents)
    return frozenset(agents)
