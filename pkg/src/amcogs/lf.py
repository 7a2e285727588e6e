"""COGS logical forms: AST, parser, printers and canonical conjunct order.

Two surface forms are accepted and produced:

* compact:   ``*boy(x_1); want.agent(x_2,x_1) AND go.agent(x_4,x_1)``
* tokenized: ``* boy ( x _ 1 ) ; want . agent ( x _ 2 , x _ 1 ) AND ...``

Both lex to the same token stream, so one parser handles them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum

LAMBDA_TOKEN = "LAMBDA"
LAMBDA_VARS = ("a", "b", "e")


class LfError(ValueError):
    """Base class for logical-form errors."""


class LfSyntaxError(LfError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ArityError(LfError):
    pass


class UnalignedName(LfError):
    pass


class ArgKind(str, Enum):
    VAR = "var"
    NAME = "name"
    LAMBDA = "lambda"


@dataclass(frozen=True)
class Arg:
    """A term argument.

    ``value`` is the token index for variables and the surface string for
    proper names and lambda variables.  ``position`` caches the token index
    of a proper name; it does not take part in equality.
    """

    kind: ArgKind
    value: int | str
    position: int | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind is ArgKind.VAR:
            if not isinstance(self.value, int) or self.value < 0:
                raise LfError(f"variable index must be a non-negative int, got {self.value!r}")
            object.__setattr__(self, "position", self.value)
        elif self.kind is ArgKind.LAMBDA and self.value not in LAMBDA_VARS:
            raise LfError(f"lambda variable must be one of {LAMBDA_VARS}, got {self.value!r}")

    @classmethod
    def var(cls, index: int) -> "Arg":
        return cls(ArgKind.VAR, index)

    @classmethod
    def name(cls, name: str, position: int | None = None) -> "Arg":
        return cls(ArgKind.NAME, name, position)

    @classmethod
    def lam(cls, name: str) -> "Arg":
        return cls(ArgKind.LAMBDA, name)

    @property
    def is_var(self) -> bool:
        return self.kind is ArgKind.VAR

    @property
    def is_name(self) -> bool:
        return self.kind is ArgKind.NAME

    @property
    def is_lambda(self) -> bool:
        return self.kind is ArgKind.LAMBDA

    def with_position(self, position: int) -> "Arg":
        return replace(self, position=position)

    def render(self, tokenized: bool) -> str:
        if self.kind is ArgKind.VAR:
            return f"x _ {self.value}" if tokenized else f"x_{self.value}"
        return str(self.value)


@dataclass(frozen=True)
class Term:
    predicate: tuple[str, ...]
    args: tuple[Arg, ...]

    def __post_init__(self):
        object.__setattr__(self, "predicate", tuple(self.predicate))
        object.__setattr__(self, "args", tuple(self.args))
        if not 1 <= len(self.predicate) <= 3:
            raise LfError(f"predicate must have 1-3 parts: {self.predicate}")
        if len(self.args) > 2:
            raise ArityError(f"{'.'.join(self.predicate)} has {len(self.args)} arguments")
        if not self.args:
            raise ArityError(f"{'.'.join(self.predicate)} has no arguments")
        if len(self.args) == 1 and len(self.predicate) != 1:
            raise LfError(f"unary term must have a single predicate part: {self.predicate}")
        if len(self.args) == 2:
            if len(self.predicate) < 2:
                raise LfError(f"binary term needs a role in its predicate: {self.predicate}")
            if self.args[0].is_name:
                raise LfError(f"first argument of {'.'.join(self.predicate)} is a proper name")

    @property
    def is_unary(self) -> bool:
        return len(self.args) == 1

    @property
    def lemma(self) -> str:
        return self.predicate[0]

    @property
    def is_nmod(self) -> bool:
        return len(self.predicate) == 3 and self.predicate[1] == "nmod"

    def render(self, tokenized: bool) -> str:
        if tokenized:
            return f"{' . '.join(self.predicate)} ( {' , '.join(a.render(True) for a in self.args)} )"
        return f"{'.'.join(self.predicate)}({','.join(a.render(False) for a in self.args)})"

    def __str__(self):
        return self.render(False)


@dataclass(frozen=True)
class LogicalForm:
    """Iota prefix plus an ordered conjunction.

    Primitives carry ``lambdas`` (a possibly empty tuple of lambda variable
    names); a bare proper-name primitive such as ``Paula`` is stored in
    ``constant`` with no conjuncts.
    """

    iota: tuple[Term, ...] = ()
    conjuncts: tuple[Term, ...] = ()
    lambdas: tuple[str, ...] | None = None
    constant: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "iota", tuple(self.iota))
        object.__setattr__(self, "conjuncts", tuple(self.conjuncts))
        if self.lambdas is not None:
            object.__setattr__(self, "lambdas", tuple(self.lambdas))
        if self.constant is not None:
            if self.iota or self.conjuncts:
                raise LfError("a constant primitive has no terms")
            return
        if not self.conjuncts:
            raise LfError("empty conjunction")
        for t in self.iota:
            if not t.is_unary or not t.args[0].is_var:
                raise LfError(f"iota term must be unary over a variable: {t}")
        if self.lambdas is not None:
            if self.iota:
                raise LfError("primitives cannot have iota terms")
            if len(set(self.lambdas)) != len(self.lambdas):
                raise LfError(f"repeated lambda variable in {self.lambdas}")
            for t in self.conjuncts:
                for a in t.args:
                    if not a.is_lambda or a.value not in self.lambdas:
                        raise LfError(f"primitive term {t} uses a non-lambda argument")
        else:
            for t in self.conjuncts:
                if any(a.is_lambda for a in t.args):
                    raise LfError(f"lambda variable outside a primitive: {t}")

    @property
    def is_primitive(self) -> bool:
        return self.lambdas is not None or self.constant is not None

    @property
    def terms(self) -> tuple[Term, ...]:
        return self.iota + self.conjuncts


# --- lexer / parser -------------------------------------------------------

_TOKEN_RE = re.compile(r"\s+|(?P<word>[A-Za-z0-9]+)|(?P<punct>[*();,._])|(?P<and>∧)|(?P<lam>λ)")


def _lex(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise LfSyntaxError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        if m.lastgroup is not None:
            tok = m.group()
            if m.lastgroup == "and":
                tok = "AND"
            elif m.lastgroup == "lam":
                tok = LAMBDA_TOKEN
            tokens.append((tok, len(text[:pos].encode())))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _lex(text)
        self.end_offset = len(text.encode())
        self.i = 0
        self.lambdas: list[str] = []

    def peek(self, ahead: int = 0) -> str | None:
        j = self.i + ahead
        return self.tokens[j][0] if j < len(self.tokens) else None

    def offset(self) -> int:
        return self.tokens[self.i][1] if self.i < len(self.tokens) else self.end_offset

    def next(self) -> str:
        if self.i >= len(self.tokens):
            raise LfSyntaxError("unexpected end of input", self.end_offset)
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        off = self.offset()
        got = self.next()
        if got != tok:
            raise LfSyntaxError(f"expected {tok!r}, got {got!r}", off)

    def word(self) -> str:
        off = self.offset()
        tok = self.next()
        if not tok[0].isalnum():
            raise LfSyntaxError(f"expected a word, got {tok!r}", off)
        return tok

    def parse(self) -> LogicalForm:
        if not self.tokens:
            raise LfSyntaxError("empty logical form", 0)
        while self.peek() == LAMBDA_TOKEN:
            self.next()
            off = self.offset()
            var = self.word()
            if var not in LAMBDA_VARS:
                raise LfSyntaxError(f"lambda variable must be one of {LAMBDA_VARS}", off)
            self.expect(".")
            self.lambdas.append(var)
        if not self.lambdas and len(self.tokens) == 1 and self.peek()[0].isalnum():
            return LogicalForm(lambdas=None, constant=self.next())
        iota = []
        while self.peek() == "*":
            self.next()
            off = self.offset()
            term = self.term()
            if not term.is_unary:
                raise LfSyntaxError("iota term must be unary", off)
            self.expect(";")
            iota.append(term)
        conjuncts = [self.term()]
        while self.peek() == "AND":
            self.next()
            conjuncts.append(self.term())
        if self.i != len(self.tokens):
            raise LfSyntaxError(f"trailing input {self.peek()!r}", self.offset())
        try:
            return LogicalForm(iota, conjuncts, tuple(self.lambdas) if self.lambdas else None)
        except ArityError:
            raise
        except LfError as exc:
            raise LfSyntaxError(str(exc), 0) from exc

    def term(self) -> Term:
        off = self.offset()
        parts = [self.word()]
        while self.peek() == ".":
            self.next()
            parts.append(self.word())
        self.expect("(")
        args = [self.arg()]
        while self.peek() == ",":
            self.next()
            args.append(self.arg())
        self.expect(")")
        if len(args) > 2:
            raise ArityError(f"{'.'.join(parts)} has {len(args)} arguments (at byte {off})")
        try:
            return Term(tuple(parts), tuple(args))
        except ArityError:
            raise
        except LfError as exc:
            raise LfSyntaxError(str(exc), off) from exc

    def arg(self) -> Arg:
        off = self.offset()
        tok = self.word()
        if tok == "x" and self.peek() == "_":
            self.next()
            off = self.offset()
            num = self.word()
            if not num.isdigit():
                raise LfSyntaxError(f"bad variable index {num!r}", off)
            return Arg.var(int(num))
        if tok in self.lambdas:
            return Arg.lam(tok)
        if not tok[0].isalpha():
            raise LfSyntaxError(f"bad argument {tok!r}", off)
        return Arg.name(tok)


def parse_lf(text: str) -> LogicalForm:
    """Parse a COGS logical form in compact or tokenized surface form."""
    return _Parser(text).parse()


def print_lf(lf: LogicalForm, fmt: str = "tokenized") -> str:
    if fmt not in ("tokenized", "compact"):
        raise ValueError(f"unknown format {fmt!r}")
    tok = fmt == "tokenized"
    if lf.constant is not None:
        return lf.constant
    parts = []
    if lf.lambdas:
        parts.extend(f"{LAMBDA_TOKEN} {v} ." if tok else f"{LAMBDA_TOKEN} {v}." for v in lf.lambdas)
    parts.extend(f"* {t.render(True)} ;" if tok else f"*{t.render(False)};" for t in lf.iota)
    parts.append(" AND ".join(t.render(tok) for t in lf.conjuncts))
    return " ".join(parts)


# --- canonical order ------------------------------------------------------

def name_positions(sentence: list[str]) -> dict[str, int]:
    """First occurrence of every token, used to align proper names."""
    positions: dict[str, int] = {}
    for i, tok in enumerate(sentence):
        positions.setdefault(tok, i)
    return positions


def _arg_index(arg: Arg, names: dict[str, int] | None) -> int:
    if arg.position is not None:
        return arg.position
    if names is not None and arg.value in names:
        return names[arg.value]
    raise UnalignedName(f"proper name {arg.value!r} has no token alignment")


def align_names(lf: LogicalForm, names: dict[str, int]) -> LogicalForm:
    """Return ``lf`` with every proper-name argument carrying its position."""

    def fix(t: Term) -> Term:
        if not any(a.is_name and a.position is None for a in t.args):
            return t
        return Term(t.predicate, tuple(a.with_position(_arg_index(a, names)) if a.is_name else a
                                       for a in t.args))

    return replace(lf, iota=tuple(fix(t) for t in lf.iota),
                   conjuncts=tuple(fix(t) for t in lf.conjuncts))


def term_sort_key(term: Term, names: dict[str, int] | None = None) -> tuple[int, int]:
    first = _arg_index(term.args[0], names)
    second = _arg_index(term.args[1], names) if len(term.args) > 1 else -1
    return first, second


def canonical_order(lf: LogicalForm, names: dict[str, int] | None = None) -> LogicalForm:
    """Sort iota terms and conjuncts by the token positions of their arguments.

    The sort is stable, so terms with equal keys keep their relative order.
    Primitives are returned unchanged.
    """
    if lf.is_primitive:
        return lf
    lf = align_names(lf, names or {})
    iota = sorted(lf.iota, key=lambda t: t.args[0].value)
    conjuncts = sorted(lf.conjuncts, key=term_sort_key)
    return replace(lf, iota=tuple(iota), conjuncts=tuple(conjuncts))
