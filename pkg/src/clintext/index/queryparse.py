"""Boolean/phrase/field query language: lexer, recursive-descent parser,
and a pretty-printer whose output re-parses to the same AST.

Grammar:
    query     := or
    or        := and ("OR" and)*
    and       := unary (("AND")? unary)*
    unary     := "NOT" unary | primary
    primary   := "(" query ")" | phrase | fieldterm | prefix | term
    phrase    := '"' term+ '"'
    fieldterm := ident ":" (term | range)
    range     := "[" value "TO" value "]"
    prefix    := term "*"

AND binds tighter than OR; bare adjacency means AND; NOT is prefix.
Queries that match only by complement (pure negation) are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import List, Tuple

from ..errors import QuerySyntaxError


@dataclass(frozen=True)
class Term:
    text: str


@dataclass(frozen=True)
class Phrase:
    terms: Tuple[str, ...]


@dataclass(frozen=True)
class Prefix:
    text: str


@dataclass(frozen=True)
class Not:
    child: object


@dataclass(frozen=True)
class And:
    children: Tuple[object, ...]


@dataclass(frozen=True)
class Or:
    children: Tuple[object, ...]


@dataclass(frozen=True)
class FieldFilter:
    field: str
    value: str


@dataclass(frozen=True)
class DateRange:
    field: str
    lo: str
    hi: str


_KEYWORDS = {"AND", "OR", "NOT", "TO"}
_WORD_RE = re.compile(r"[0-9A-Za-z_][0-9A-Za-z_.\-]*")


@dataclass(frozen=True)
class _Tok:
    kind: str  # WORD | KW | LPAREN | RPAREN | QUOTE | COLON | STAR | LBRACKET | RBRACKET | EOF
    value: str
    pos: int


def _lex(text: str) -> List[_Tok]:
    toks: List[_Tok] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "(":
            toks.append(_Tok("LPAREN", ch, i)); i += 1
        elif ch == ")":
            toks.append(_Tok("RPAREN", ch, i)); i += 1
        elif ch == '"':
            toks.append(_Tok("QUOTE", ch, i)); i += 1
        elif ch == ":":
            toks.append(_Tok("COLON", ch, i)); i += 1
        elif ch == "*":
            toks.append(_Tok("STAR", ch, i)); i += 1
        elif ch == "[":
            toks.append(_Tok("LBRACKET", ch, i)); i += 1
        elif ch == "]":
            toks.append(_Tok("RBRACKET", ch, i)); i += 1
        else:
            m = _WORD_RE.match(text, i)
            if not m:
                raise QuerySyntaxError(f"unexpected character {ch!r}", i)
            word = m.group(0)
            kind = "KW" if word in _KEYWORDS else "WORD"
            toks.append(_Tok(kind, word, i))
            i = m.end()
    toks.append(_Tok("EOF", "", n))
    return toks


class _Parser:
    def __init__(self, toks: List[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> _Tok:
        tok = self.peek()
        if tok.kind != kind:
            raise QuerySyntaxError(f"expected {kind}, found {tok.kind}", tok.pos)
        return self.advance()

    def parse_query(self):
        node = self.parse_or()
        tok = self.peek()
        if tok.kind != "EOF":
            raise QuerySyntaxError(f"unexpected {tok.value!r}", tok.pos)
        return node

    def parse_or(self):
        children = [self.parse_and()]
        while self.peek().kind == "KW" and self.peek().value == "OR":
            self.advance()
            children.append(self.parse_and())
        return children[0] if len(children) == 1 else Or(tuple(children))

    def _starts_unary(self, tok: _Tok) -> bool:
        if tok.kind in ("WORD", "QUOTE", "LPAREN"):
            return True
        return tok.kind == "KW" and tok.value == "NOT"

    def parse_and(self):
        children = [self.parse_unary()]
        while True:
            tok = self.peek()
            if tok.kind == "KW" and tok.value == "AND":
                self.advance()
                nxt = self.peek()
                if not self._starts_unary(nxt):
                    raise QuerySyntaxError("dangling AND", nxt.pos)
                children.append(self.parse_unary())
            elif self._starts_unary(tok):
                children.append(self.parse_unary())
            else:
                break
        return children[0] if len(children) == 1 else And(tuple(children))

    def parse_unary(self):
        tok = self.peek()
        if tok.kind == "KW" and tok.value == "NOT":
            self.advance()
            nxt = self.peek()
            if not self._starts_unary(nxt):
                raise QuerySyntaxError("dangling NOT", nxt.pos)
            return Not(self.parse_unary())
        return self.parse_primary()

    def parse_primary(self):
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.advance()
            node = self.parse_or()
            if self.peek().kind != "RPAREN":
                raise QuerySyntaxError("unbalanced parenthesis", self.peek().pos)
            self.advance()
            return node
        if tok.kind == "QUOTE":
            return self.parse_phrase()
        if tok.kind == "WORD":
            word = self.advance()
            nxt = self.peek()
            if nxt.kind == "COLON":
                self.advance()
                return self.parse_field_value(word.value)
            if nxt.kind == "STAR":
                self.advance()
                return Prefix(word.value.lower())
            return Term(word.value.lower())
        if tok.kind == "KW":
            raise QuerySyntaxError(f"dangling operator {tok.value}", tok.pos)
        raise QuerySyntaxError(f"unexpected {tok.kind}", tok.pos)

    def parse_phrase(self):
        open_tok = self.expect("QUOTE")
        terms = []
        while self.peek().kind in ("WORD", "KW"):
            terms.append(self.advance().value.lower())
        if self.peek().kind != "QUOTE":
            raise QuerySyntaxError("unbalanced quote", open_tok.pos)
        self.advance()
        if len(terms) < 2:
            raise QuerySyntaxError("phrase needs at least two terms", open_tok.pos)
        return Phrase(tuple(terms))

    def parse_field_value(self, fieldname: str):
        tok = self.peek()
        if tok.kind == "LBRACKET":
            self.advance()
            lo = self.expect("WORD").value
            to = self.peek()
            if not (to.kind == "KW" and to.value == "TO"):
                raise QuerySyntaxError("range requires TO", to.pos)
            self.advance()
            hi = self.expect("WORD").value
            self.expect("RBRACKET")
            return DateRange(fieldname, lo, hi)
        if tok.kind == "WORD":
            return FieldFilter(fieldname, self.advance().value)
        raise QuerySyntaxError("field filter requires a value", tok.pos)


def _is_positive(node) -> bool:
    """A node is positive when its matching set does not require a complement."""
    if isinstance(node, (Term, Phrase, Prefix, FieldFilter, DateRange)):
        return True
    if isinstance(node, Not):
        return False
    if isinstance(node, And):
        return any(_is_positive(c) for c in node.children)
    if isinstance(node, Or):
        return all(_is_positive(c) for c in node.children)
    raise TypeError(f"unknown node {node!r}")


def parse_query(text: str):
    toks = _lex(text)
    if toks[0].kind == "EOF":
        raise QuerySyntaxError("empty query", 0)
    ast = _Parser(toks).parse_query()
    if not _is_positive(ast):
        raise QuerySyntaxError("pure negation is not allowed", 0)
    return ast


def print_query(node) -> str:
    """Render an AST back into query syntax; parsing the result yields the
    same AST (fixpoint)."""
    if isinstance(node, Term):
        return node.text
    if isinstance(node, Prefix):
        return f"{node.text}*"
    if isinstance(node, Phrase):
        return '"' + " ".join(node.terms) + '"'
    if isinstance(node, FieldFilter):
        return f"{node.field}:{node.value}"
    if isinstance(node, DateRange):
        return f"{node.field}:[{node.lo} TO {node.hi}]"
    if isinstance(node, Not):
        return f"NOT {_wrap(node.child)}"
    if isinstance(node, And):
        return "(" + " AND ".join(_wrap(c) for c in node.children) + ")"
    if isinstance(node, Or):
        return "(" + " OR ".join(_wrap(c) for c in node.children) + ")"
    raise TypeError(f"unknown node {node!r}")


def _wrap(node) -> str:
    text = print_query(node)
    return text
