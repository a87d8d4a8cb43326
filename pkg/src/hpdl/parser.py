"""Recursive-descent parser for the ASCII ABox syntax.

Grammar::

    abox    := stmt (";" stmt)* [";"]
    stmt    := nominal ":" formula | ident "(" nominal "," nominal ")"
    nominal := "'" ident
    formula := impl
    impl    := disj ["->" impl]
    disj    := conj ("|" conj)*
    conj    := unary ("&" unary)*
    unary   := "~" unary | "<" program ">" unary | "[" program "]" unary | atom
    atom    := "true" | "false" | nominal | ident | "(" formula ")"
    program := choice
    choice  := seq ("+" seq)*
    seq     := star (";" star)*
    star    := prim "*"*
    prim    := ident | "(" program ")" | "?" "(" formula ")"

``#`` starts a comment running to the end of the line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    BOT, TOP, And, Atomic, At, Box, Choice, Dia, Edge, Implies, Nom, Not, Or,
    Prop, Seq, Star, Test,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<sym>[;:(),'~<>\[\]|&+*?])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("ident", "arrow", "sym"):
            tokens.append(Token(chunk if kind != "ident" else "ident", chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self.props = {}     # name -> first token using it as a proposition
        self.programs = {}  # name -> first token using it as a program

    # token helpers ----------------------------------------------------
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token = None):
        tok = tok or self.tok
        raise ParseError(message, tok.line, tok.column)

    def accept(self, kind: str):
        if self.tok.kind == kind:
            tok = self.tok
            self.i += 1
            return tok
        return None

    def expect(self, kind: str, what: str = None) -> Token:
        tok = self.accept(kind)
        if tok is None:
            found = "end of input" if self.tok.kind == "eof" else repr(self.tok.text)
            self.error(f"expected {what or repr(kind)}, found {found}")
        return tok

    def dangling(self, what: str):
        """Report a missing operand, pointing at the operator left hanging."""
        tok = self.tok
        if tok.kind == "eof" and self.i > 0:
            prev = self.tokens[self.i - 1]
            self.error(f"expected {what} after {prev.text!r}, found end of input", prev)
        self.error(f"expected {what}, found {tok.text!r}")

    # namespaces -------------------------------------------------------
    def use_prop(self, tok: Token):
        if tok.text in self.programs:
            self.error(f"{tok.text!r} is used both as a proposition and as a program", tok)
        self.props.setdefault(tok.text, tok)

    def use_program(self, tok: Token):
        if tok.text in self.props:
            self.error(f"{tok.text!r} is used both as a proposition and as a program", tok)
        self.programs.setdefault(tok.text, tok)

    # grammar ----------------------------------------------------------
    def abox(self) -> frozenset:
        items = []
        if self.tok.kind == "eof":
            return frozenset()
        items.append(self.stmt())
        while self.accept(";"):
            if self.tok.kind == "eof":
                break
            items.append(self.stmt())
        if self.tok.kind != "eof":
            self.error(f"expected ';' or end of input, found {self.tok.text!r}")
        return frozenset(items)

    def nominal(self) -> str:
        quote = self.tok
        if not self.accept("'"):
            if self.tok.kind == "ident" and self.tokens[self.i + 1].kind == "(":
                self.error("program assertion arguments must be nominals such as 'a")
            self.error("expected a nominal such as 'a")
        tok = self.accept("ident")
        if tok is None:
            self.error("expected an identifier after \"'\"")
        if (tok.line, tok.column) != (quote.line, quote.column + 1):
            self.error("no space is allowed between \"'\" and the nominal name", tok)
        return tok.text

    def stmt(self):
        if self.tok.kind == "'":
            name = self.nominal()
            self.expect(":", "':'")
            return At(name, self.formula())
        tok = self.accept("ident")
        if tok is None:
            self.error("expected an assertion ('a:formula or s('a,'b))")
        if self.tok.kind != "(":
            self.error("expected '(' after program name in a program assertion")
        self.i += 1
        self.use_program(tok)
        args = [self.nominal()]
        while self.accept(","):
            args.append(self.nominal())
        close = self.expect(")", "')'")
        if len(args) != 2:
            self.error(f"program assertion {tok.text}(...) takes exactly 2 nominals, got {len(args)}", close)
        return Edge(tok.text, args[0], args[1])

    def formula(self):
        return self.impl()

    def impl(self):
        left = self.disj()
        if self.accept("->"):
            return Implies(left, self.impl())
        return left

    def disj(self):
        out = self.conj()
        while self.accept("|"):
            out = Or(out, self.conj())
        return out

    def conj(self):
        out = self.unary()
        while self.accept("&"):
            out = And(out, self.unary())
        return out

    def unary(self):
        if self.accept("~"):
            return Not(self.unary())
        if self.accept("<"):
            prog = self.program()
            self.expect(">", "'>'")
            return Dia(prog, self.unary())
        if self.accept("["):
            prog = self.program()
            self.expect("]", "']'")
            return Box(prog, self.unary())
        return self.atom()

    def atom(self):
        tok = self.tok
        if tok.kind == "ident":
            self.i += 1
            if tok.text == "true":
                return TOP
            if tok.text == "false":
                return BOT
            self.use_prop(tok)
            return Prop(tok.text)
        if tok.kind == "'":
            return Nom(self.nominal())
        if self.accept("("):
            out = self.formula()
            self.expect(")", "')'")
            return out
        self.dangling("a formula")

    def program(self):
        return self.choice()

    def choice(self):
        out = self.seq()
        while self.accept("+"):
            out = Choice(out, self.seq())
        return out

    def seq(self):
        out = self.star()
        while self.accept(";"):
            out = Seq(out, self.star())
        return out

    def star(self):
        out = self.prim()
        while self.accept("*"):
            out = Star(out)
        return out

    def prim(self):
        tok = self.tok
        if tok.kind == "ident":
            if tok.text in ("true", "false"):
                self.error(f"{tok.text!r} cannot be used as a program")
            self.i += 1
            self.use_program(tok)
            return Atomic(tok.text)
        if tok.kind == "'":
            self.error("a nominal cannot be used as an atomic program")
        if self.accept("?"):
            self.expect("(", "'(' after '?'")
            f = self.formula()
            self.expect(")", "')'")
            return Test(f)
        if self.accept("("):
            out = self.program()
            self.expect(")", "')'")
            return out
        self.dangling("a program")


def parse_abox(text: str) -> frozenset:
    """Parse ABox text into a frozenset of assertions."""
    return _Parser(text).abox()


def parse_formula(text: str):
    p = _Parser(text)
    out = p.formula()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after formula")
    return out


def parse_program(text: str):
    p = _Parser(text)
    out = p.program()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after program")
    return out
