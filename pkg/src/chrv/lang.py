"""CHR source language: terms, constraints, rules, parsing and printing.

The concrete syntax follows the usual Prolog-flavoured CHR notation:

    reflexivity   r1@ leq(X,Y) <=> X=Y | true.
    antisymmetry  r2@ leq(X,Y), leq(Y,X) <=> X=Y.
    idempotence   r3@ leq(X,Y) \\ leq(X,Y) <=> true.
    transitivity  r4@ leq(X,Y), leq(Y,Z) ==> leq(X,Z).

A rule header is optional; when present, the last identifier before ``@`` is
the rule name and anything before it is a free-form label that is accepted
and ignored.  ``<=>`` removes all heads, ``==>`` keeps all heads, and a
backslash splits kept heads from removed heads.  A guard is a ``|``-separated
prefix of the body and may contain only built-in constraints.  The built-in
theory is exactly syntactic equality, ``true`` and ``false``; everything else
is a user-defined constraint.  ``%`` starts a line comment.

Variables are identifiers starting with an uppercase letter or underscore.
Variable scope is one rule or one query; renaming apart happens in the engine
at match time, not here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class ChrSyntaxError(Exception):
    """Malformed CHR source; carries a 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ChrSemanticError(Exception):
    """Well-formed source that violates a CHR well-formedness rule."""


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class Constant:
    name: Union[str, int]


@dataclass(frozen=True)
class Functional:
    symbol: str
    args: tuple["Term", ...]


Term = Union[Variable, Constant, Functional]


def term_variables(t: Term) -> set[str]:
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, Functional):
        out: set[str] = set()
        for a in t.args:
            out |= term_variables(a)
        return out
    return set()


# ---------------------------------------------------------------------------
# Constraints
# ---------------------------------------------------------------------------

#: The built-in theory: syntactic equality, true and false.
BUILTIN_SYMBOLS = {("=", 2), ("true", 0), ("false", 0)}


@dataclass(frozen=True)
class Constraint:
    symbol: str
    args: tuple[Term, ...] = ()

    @property
    def is_builtin(self) -> bool:
        return (self.symbol, len(self.args)) in BUILTIN_SYMBOLS

    @property
    def is_true(self) -> bool:
        return self.symbol == "true" and not self.args

    @property
    def is_false(self) -> bool:
        return self.symbol == "false" and not self.args

    @property
    def is_eq(self) -> bool:
        return self.symbol == "=" and len(self.args) == 2

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.args:
            out |= term_variables(a)
        return out


TRUE = Constraint("true")
FALSE = Constraint("false")


# ---------------------------------------------------------------------------
# Rules, programs, queries
# ---------------------------------------------------------------------------

SIMPLIFICATION = "simplification"
PROPAGATION = "propagation"
SIMPAGATION = "simpagation"


@dataclass(frozen=True)
class Rule:
    name: str
    kept: tuple[Constraint, ...]
    removed: tuple[Constraint, ...]
    guard: tuple[Constraint, ...]
    body: tuple[Constraint, ...]

    @property
    def kind(self) -> str:
        if not self.kept:
            return SIMPLIFICATION
        if not self.removed:
            return PROPAGATION
        return SIMPAGATION

    @property
    def heads(self) -> tuple[Constraint, ...]:
        return self.kept + self.removed


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]


@dataclass(frozen=True)
class Query:
    constraints: tuple[Constraint, ...]


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

_PUNCT = ("<=>", "==>", "@", "\\", "|", ",", ".", "(", ")", "=")


@dataclass(frozen=True)
class _Token:
    kind: str  # 'ident' | 'var' | 'int' | punctuation literal | 'eof'
    text: str
    line: int
    column: int


def _tokenize(source: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and source[i] != "\n":
                i += 1
            continue
        matched = None
        for p in _PUNCT:
            if source.startswith(p, i):
                matched = p
                break
        if matched:
            tokens.append(_Token(matched, matched, line, col))
            i += len(matched)
            col += len(matched)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(_Token("int", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "var" if (text[0].isupper() or text[0] == "_") else "ident"
            tokens.append(_Token(kind, text, line, col))
            col += j - i
            i = j
            continue
        raise ChrSyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, source: str):
        self.tokens = _tokenize(source)
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            raise ChrSyntaxError(f"expected {kind!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def fail(self, message: str) -> ChrSyntaxError:
        tok = self.peek()
        return ChrSyntaxError(message, tok.line, tok.column)

    # -- terms and constraints ------------------------------------------------

    def term(self) -> Term:
        tok = self.next()
        if tok.kind == "var":
            return Variable(tok.text)
        if tok.kind == "int":
            return Constant(int(tok.text))
        if tok.kind == "ident":
            if self.peek().kind == "(":
                self.next()
                args = [self.term()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.term())
                self.expect(")")
                return Functional(tok.text, tuple(args))
            return Constant(tok.text)
        raise ChrSyntaxError(f"expected a term, found {tok.text!r}", tok.line, tok.column)

    def constraint(self) -> Constraint:
        tok = self.peek()
        t = self.term()
        if self.peek().kind == "=":
            self.next()
            rhs = self.term()
            return Constraint("=", (t, rhs))
        if isinstance(t, Constant) and isinstance(t.name, str):
            return Constraint(t.name, ())
        if isinstance(t, Functional):
            return Constraint(t.symbol, t.args)
        raise ChrSyntaxError(f"{tok.text!r} is not a constraint", tok.line, tok.column)

    def constraints(self, stop_kinds: tuple[str, ...]) -> list[Constraint]:
        out = [self.constraint()]
        while self.peek().kind == ",":
            self.next()
            out.append(self.constraint())
        if self.peek().kind not in stop_kinds:
            raise self.fail(f"unexpected {self.peek().text!r} in constraint sequence")
        return out

    # -- rules ----------------------------------------------------------------

    def rule(self, index: int) -> Rule:
        name = None
        # An optional header: [label] [name] '@'.  The last identifier-like
        # token before '@' is the name; a preceding one is a free label.
        if self.peek(1).kind == "@" and self.peek().kind in ("ident", "var"):
            name = self.next().text
            self.next()
        elif (
            self.peek(2).kind == "@"
            and self.peek().kind in ("ident", "var")
            and self.peek(1).kind in ("ident", "var")
        ):
            self.next()  # label, ignored
            name = self.next().text
            self.next()
        heads = self.constraints(("\\", "<=>", "==>"))
        removed_heads: list[Constraint] | None = None
        if self.peek().kind == "\\":
            self.next()
            removed_heads = self.constraints(("<=>", "==>"))
        arrow = self.next()
        if arrow.kind not in ("<=>", "==>"):
            raise ChrSyntaxError(f"expected '<=>' or '==>', found {arrow.text!r}", arrow.line, arrow.column)
        first = self.constraints(("|", "."))
        guard: list[Constraint] = []
        if self.peek().kind == "|":
            self.next()
            guard = first
            body = self.constraints((".",))
        else:
            body = first
        self.expect(".")

        if removed_heads is not None:
            kept, removed = heads, removed_heads
        elif arrow.kind == "==>":
            kept, removed = heads, []
        else:
            kept, removed = [], heads
        for h in kept + removed:
            if h.is_builtin:
                raise ChrSemanticError(f"rule {name or index}: built-in constraint {render(h)!r} in head")
        for g in guard:
            if not g.is_builtin:
                raise ChrSemanticError(f"rule {name or index}: user-defined constraint {render(g)!r} in guard")
        body = [c for c in body if not c.is_true]
        return Rule(
            name=name or f"r{index}",
            kept=tuple(kept),
            removed=tuple(removed),
            guard=tuple(guard),
            body=tuple(body),
        )

    def program(self) -> Program:
        rules: list[Rule] = []
        while self.peek().kind != "eof":
            rules.append(self.rule(len(rules) + 1))
        names = [r.name for r in rules]
        for name in names:
            if names.count(name) > 1:
                raise ChrSemanticError(f"duplicate rule name {name!r}")
        return Program(tuple(rules))

    def query(self) -> Query:
        if self.peek().kind == "eof":
            return Query(())
        cs = self.constraints((".", "eof"))
        if self.peek().kind == ".":
            self.next()
        self.expect("eof")
        return Query(tuple(cs))


def parse_program(source: str) -> Program:
    """Parse CHR source text into a program with uniquely named rules."""
    return _Parser(source).program()


def parse_query(source: str) -> Query:
    """Parse a comma-separated constraint list, with optional trailing dot."""
    return _Parser(source).query()


def parse_constraints(source: str) -> list[Constraint]:
    """Parse a constraint sequence as it appears in trace attributes.

    The empty string denotes the empty sequence.
    """
    if not source.strip():
        return []
    return list(parse_query(source).constraints)


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def render_term(t: Term) -> str:
    if isinstance(t, Variable):
        return t.name
    if isinstance(t, Constant):
        return str(t.name)
    return f"{t.symbol}({','.join(render_term(a) for a in t.args)})"


def render_constraint(c: Constraint) -> str:
    if c.is_eq:
        return f"{render_term(c.args[0])}={render_term(c.args[1])}"
    if not c.args:
        return c.symbol
    return f"{c.symbol}({','.join(render_term(a) for a in c.args)})"


def render_constraints(cs: Iterator[Constraint] | list[Constraint] | tuple[Constraint, ...]) -> str:
    return ", ".join(render_constraint(c) for c in cs)


def render_body(cs: tuple[Constraint, ...] | list[Constraint]) -> str:
    return render_constraints(cs) if cs else "true"


def render_rule(r: Rule) -> str:
    body = render_body(r.body)
    if r.guard:
        body = f"{render_constraints(r.guard)} | {body}"
    if r.kind == SIMPAGATION:
        return f"{r.name}@ {render_constraints(r.kept)} \\ {render_constraints(r.removed)} <=> {body}"
    if r.kind == PROPAGATION:
        return f"{r.name}@ {render_constraints(r.kept)} ==> {body}"
    return f"{r.name}@ {render_constraints(r.removed)} <=> {body}"


def render(x: Term | Constraint | Rule | Program | Query) -> str:
    """Canonical text for any syntax object; parses back to an equal value."""
    if isinstance(x, (Variable, Constant, Functional)):
        return render_term(x)
    if isinstance(x, Constraint):
        return render_constraint(x)
    if isinstance(x, Rule):
        return render_rule(x)
    if isinstance(x, Program):
        return "\n".join(render_rule(r) + "." for r in x.rules) + ("\n" if x.rules else "")
    if isinstance(x, Query):
        return render_constraints(x.constraints)
    raise TypeError(f"cannot render {type(x).__name__}")
