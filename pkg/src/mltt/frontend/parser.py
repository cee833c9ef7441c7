"""Surface syntax.

Grammar, loosest first::

    decl   ::= 'assume' NAME ':' sort
             | 'def' NAME [':' sort] [':=' term]
             | 'type' NAME ('(' NAME+ ':' sort ')')* ':=' term
    sort   ::= satom ['->' sort]
    satom  ::= 'Type' | 'El' arg | '(' NAME+ ':' sort ')' sort | '(' sort ')'
    term   ::= '[' NAME+ [':' sort] ']' term          framework abstraction
             | ('λ' | '\\') NAME+ '.' term             object abstraction
             | ('Pi' | 'Sigma') '(' NAME ':' term ')' term
             | CONST arg^arity arg*                    constants take their arity
             | arg arg*                                framework application
    arg    ::= atom ('·' atom)*                        object application, left-assoc
    atom   ::= NAME | '(' term ')' | nullary constant

Binder forms may also close an argument list (``lam [x] x``).  Names are
resolved to de Bruijn indices while parsing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .. import syntax as S
from ..syntax import (
    SIGNATURE,
    TYPE,
    App,
    Const,
    ElSort,
    Entry,
    FunSort,
    Lam,
    Sort,
    Term,
    Var,
)

# Surface spelling -> constant of the signature.
CONSTANTS: dict[str, str] = {h: h for h in SIGNATURE}
CONSTANTS.update({"c0": "code0", "c1": "code1", "Π": "Pi", "Σ": "Sigma"})
SURFACE: dict[str, str] = {h: h for h in SIGNATURE}
SURFACE.update({"code0": "c0", "code1": "c1"})

RESERVED = {"assume", "def", "type", "Type", "El"}
KEYWORDS = RESERVED | set(CONSTANTS)
IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
# Scope entry for the binder of ``S -> T``; no identifier can refer to it.
ARROW_BINDER = " "


# -- diagnostics and declarations ---------------------------------------------


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int = 0
    column: int = 0
    file: str = "<input>"
    severity: str = "error"
    expected: Optional[str] = None
    actual: Optional[str] = None

    def __str__(self):
        out = f"{self.file}:{self.line}:{self.column}: {self.severity}: {self.message}"
        if self.expected is not None:
            out += f"\n  expected: {self.expected}"
        if self.actual is not None:
            out += f"\n  actual:   {self.actual}"
        return out

    def to_json(self) -> dict:
        d = {
            "severity": self.severity,
            "file": self.file,
            "line": self.line,
            "column": self.column,
            "message": self.message,
        }
        if self.expected is not None:
            d["expected"] = self.expected
        if self.actual is not None:
            d["actual"] = self.actual
        return d


class ParseError(Exception):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(str(diagnostic))
        self.diagnostic = diagnostic


@dataclass(frozen=True)
class AssumeDecl:
    name: str
    sort: Sort
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class DefDecl:
    name: str
    ascription: Optional[Sort]
    body: Optional[Term]
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)


@dataclass(frozen=True)
class TypeDecl:
    name: str
    params: tuple[tuple[str, Sort], ...]
    body: Term
    line: int = field(default=0, compare=False)
    column: int = field(default=0, compare=False)

    @property
    def sort(self) -> Sort:
        out: Sort = TYPE
        for name, s in reversed(self.params):
            out = FunSort(s, out, name)
        return out

    @property
    def value(self) -> Term:
        out = self.body
        for name, _ in reversed(self.params):
            out = Lam(out, name)
        return out


SurfaceDecl = Union[AssumeDecl, DefDecl, TypeDecl]


# -- lexer --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>--[^\n]*)
  | (?P<assign>:=)
  | (?P<arrow>->|→)
  | (?P<colon>:)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<lbrack>\[)
  | (?P<rbrack>\])
  | (?P<dot_app>·|@)
  | (?P<period>\.)
  | (?P<lambda>λ|\\)
  | (?P<ident>[A-Za-z_ΠΣ][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(
                Diagnostic(f"unexpected character {source[pos]!r}", line, pos - line_start + 1, file)
            )
        kind = m.lastgroup
        if kind == "nl":
            line, line_start = line + 1, m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# -- parser -------------------------------------------------------------------


class Parser:
    def __init__(self, source: str, file: str = "<input>", names: tuple[str, ...] = ()):
        self.file = file
        self.toks = tokenize(source, file)
        self.i = 0
        self.scope: list[str] = list(names)
        self.spans: dict[int, tuple[int, int]] = {}

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(Diagnostic(message, tok.line, tok.column, self.file))

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        t = self.tok
        if t.kind != kind or (text is not None and t.text != text):
            want = text or kind
            got = t.text or "end of input"
            raise self.error(f"expected {want!r}, found {got!r}")
        return self.advance()

    def at_keyword(self, *words: str) -> bool:
        return self.tok.kind == "ident" and self.tok.text in words

    def mark(self, node, tok: Token):
        self.spans.setdefault(id(node), (tok.line, tok.column))
        return node

    # -- names

    def binder_name(self) -> str:
        t = self.expect("ident")
        if t.text in KEYWORDS:
            raise self.error(f"{t.text!r} is a keyword and cannot be bound", t)
        return t.text

    def resolve(self, tok: Token) -> Term:
        for depth, name in enumerate(reversed(self.scope)):
            if name == tok.text:
                return self.mark(Var(depth), tok)
        raise self.error(f"unbound name {tok.text!r}", tok)

    def bind(self, names: list[str], fn):
        self.scope.extend(names)
        try:
            return fn()
        finally:
            del self.scope[len(self.scope) - len(names):]

    # -- sorts

    def sort(self) -> Sort:
        start = self.tok
        left = self.sort_atom()
        if self.tok.kind == "arrow":
            self.advance()
            right = self.bind([ARROW_BINDER], self.sort)
            return self.mark(FunSort(left, right, "_"), start)
        return left

    def _is_binder_group(self) -> bool:
        if self.tok.kind != "lparen":
            return False
        k = 1
        while self.peek(k).kind == "ident" and self.peek(k).text not in KEYWORDS:
            k += 1
        return k > 1 and self.peek(k).kind == "colon"

    def sort_atom(self) -> Sort:
        start = self.tok
        if self.at_keyword("Type"):
            self.advance()
            return self.mark(S.TypeSort(), start)
        if self.at_keyword("El"):
            self.advance()
            return self.mark(ElSort(self.arg()), start)
        if self._is_binder_group():
            self.advance()
            names = [self.binder_name()]
            while self.tok.kind == "ident":
                names.append(self.binder_name())
            self.expect("colon")
            dom = self.sort()
            self.expect("rparen")
            return self._fun_sort(names, dom, start)
        if self.tok.kind == "lparen":
            self.advance()
            s = self.sort()
            self.expect("rparen")
            return s
        raise self.error(f"expected a sort, found {self.tok.text or 'end of input'!r}")

    def _fun_sort(self, names: list[str], dom: Sort, start: Token) -> Sort:
        # (x y : S) T binds x then y; y's domain is S shifted past x
        if not names:
            return self.sort()
        name, rest = names[0], names[1:]

        def body():
            return self._fun_sort(rest, S.shift_sort(dom, 1), start)

        return self.mark(FunSort(dom, self.bind([name], body), name), start)

    # -- terms

    def _starts_binder(self) -> bool:
        t = self.tok
        if t.kind in ("lbrack", "lambda"):
            return True
        if t.kind == "ident" and CONSTANTS.get(t.text) in ("Pi", "Sigma"):
            nxt, after = self.peek(1), self.peek(3)
            return nxt.kind == "lparen" and self.peek(2).kind == "ident" and after.kind == "colon"
        return False

    def _starts_atom(self) -> bool:
        t = self.tok
        if t.kind == "lparen":
            return True
        if t.kind != "ident" or t.text in RESERVED:
            return False
        return True

    def term(self) -> Term:
        if self._starts_binder():
            return self.binder()
        start = self.tok
        if start.kind == "ident" and start.text in CONSTANTS and SIGNATURE[CONSTANTS[start.text]] > 0:
            self.advance()
            head = CONSTANTS[start.text]
            args = []
            for k in range(SIGNATURE[head]):
                if self._starts_binder():
                    if k != SIGNATURE[head] - 1:
                        raise self.error("a binder argument must be parenthesized unless it comes last")
                    args.append(self.binder())
                elif self._starts_atom():
                    args.append(self.arg())
                else:
                    raise self.error(
                        f"{head} takes {SIGNATURE[head]} argument(s), found {self.tok.text or 'end of input'!r}"
                    )
            fn: Term = self.mark(Const(head, tuple(args)), start)
        else:
            fn = self.arg()
        while True:
            if self._starts_binder():
                fn = self.mark(App(fn, self.binder()), start)
                break
            if not self._starts_atom():
                break
            fn = self.mark(App(fn, self.arg()), start)
        return fn

    def binder(self) -> Term:
        start = self.tok
        if start.kind == "lbrack":
            self.advance()
            names = [self.binder_name()]
            while self.tok.kind == "ident":
                names.append(self.binder_name())
            dom = None
            if self.tok.kind == "colon":
                self.advance()
                dom = self.sort()
            self.expect("rbrack")
            return self._lams(names, dom, start, obj=False)
        if start.kind == "lambda":
            self.advance()
            names = [self.binder_name()]
            while self.tok.kind == "ident":
                names.append(self.binder_name())
            self.expect("period")
            return self._lams(names, None, start, obj=True)
        head = CONSTANTS[self.advance().text]
        self.expect("lparen")
        name = self.binder_name()
        self.expect("colon")
        dom = self.term()
        self.expect("rparen")
        body = self.bind([name], self.term)
        return self.mark(Const(head, (dom, self.mark(Lam(body, name), start))), start)

    def _lams(self, names, dom, start, obj: bool) -> Term:
        if not names:
            return self.term()
        name, rest = names[0], names[1:]
        body = self.bind(
            [name],
            lambda: self._lams(rest, None if dom is None else S.shift_sort(dom, 1), start, obj),
        )
        lam = self.mark(Lam(body, name, dom), start)
        return self.mark(Const("lam", (lam,)), start) if obj else lam

    def arg(self) -> Term:
        start = self.tok
        left = self.atom()
        while self.tok.kind == "dot_app":
            self.advance()
            left = self.mark(Const("app", (left, self.atom())), start)
        return left

    def atom(self) -> Term:
        t = self.tok
        if t.kind == "lparen":
            self.advance()
            inner = self.term()
            self.expect("rparen")
            return inner
        if t.kind == "ident":
            if t.text in RESERVED:
                raise self.error(f"unexpected keyword {t.text!r}")
            if t.text in CONSTANTS:
                head = CONSTANTS[t.text]
                if SIGNATURE[head] > 0:
                    raise self.error(f"{head} takes {SIGNATURE[head]} argument(s); parenthesize it here")
                self.advance()
                return self.mark(Const(head), t)
            self.advance()
            return self.resolve(t)
        raise self.error(f"expected a term, found {t.text or 'end of input'!r}")

    # -- declarations

    def decls(self) -> list[SurfaceDecl]:
        out = []
        seen: set[str] = set(self.scope)
        while self.tok.kind != "eof":
            d = self.decl()
            if d.name in seen:
                raise ParseError(Diagnostic(f"duplicate declaration of {d.name!r}", d.line, d.column, self.file))
            seen.add(d.name)
            out.append(d)
            self.scope.append(d.name)
        return out

    def decl(self) -> SurfaceDecl:
        start = self.tok
        if self.at_keyword("assume"):
            self.advance()
            name = self.binder_name()
            self.expect("colon")
            return AssumeDecl(name, self.sort(), start.line, start.column)
        if self.at_keyword("def"):
            self.advance()
            name = self.binder_name()
            ascription = body = None
            if self.tok.kind == "colon":
                self.advance()
                ascription = self.sort()
            if self.tok.kind == "assign":
                self.advance()
                body = self.term()
            if ascription is None and body is None:
                raise self.error("a definition needs a sort or a body")
            return DefDecl(name, ascription, body, start.line, start.column)
        if self.at_keyword("type"):
            self.advance()
            name = self.binder_name()
            params: list[tuple[str, Sort]] = []
            pushed = 0
            try:
                while self.tok.kind == "lparen":
                    self.advance()
                    names = [self.binder_name()]
                    while self.tok.kind == "ident":
                        names.append(self.binder_name())
                    self.expect("colon")
                    s = self.sort()
                    self.expect("rparen")
                    for k, n in enumerate(names):
                        params.append((n, S.shift_sort(s, k)))
                        self.scope.append(n)
                        pushed += 1
                self.expect("assign")
                body = self.term()
            finally:
                del self.scope[len(self.scope) - pushed:]
            return TypeDecl(name, tuple(params), body, start.line, start.column)
        raise self.error(f"expected a declaration, found {self.tok.text or 'end of input'!r}")


def parse(source: str, file: str = "<input>") -> list[SurfaceDecl] | Diagnostic:
    """Parse a whole file; a syntax error is returned as a Diagnostic."""
    try:
        return Parser(source, file).decls()
    except ParseError as e:
        return e.diagnostic


def parse_with_spans(source: str, file: str = "<input>") -> tuple[list[SurfaceDecl], dict]:
    """Like ``parse`` but raising ParseError, and also returning source positions by node id."""
    p = Parser(source, file)
    return p.decls(), p.spans


def parse_term(source: str, names: tuple[str, ...] = (), file: str = "<expr>") -> Term:
    p = Parser(source, file, names)
    t = p.term()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after term")
    return t


def parse_sort(source: str, names: tuple[str, ...] = (), file: str = "<expr>") -> Sort:
    p = Parser(source, file, names)
    s = p.sort()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after sort")
    return s


def decl_entry(d: SurfaceDecl) -> Entry:
    match d:
        case AssumeDecl(name, sort):
            return Entry(name, sort)
        case DefDecl(name, ascription, body):
            return Entry(name, ascription, body)
        case TypeDecl():
            return Entry(d.name, d.sort, d.value)
    raise TypeError(d)
