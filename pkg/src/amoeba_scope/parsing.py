"""Text literals for Laurent polynomials and rational curves.

Grammar (whitespace and newlines are insignificant)::

    expr    := ['+'|'-'] term (('+'|'-') term)*
    term    := factor (('*'|'/') factor)*
    factor  := atom [('^'|'**') exponent]
    exponent:= ['+'|'-'] INT | '(' ['+'|'-'] INT ')'
    atom    := NUMBER | IMAG | NAME | '(' expr ')' | ('+'|'-') atom
    NUMBER  := 12 | 1.5 | 2e-3          (decimal literals; write rationals as 1/6)
    IMAG    := NUMBER immediately followed by 'i' or 'j', e.g. 2i
    NAME    := 'i' | 'I' (imaginary unit) | variable

Polynomial variables are ``z1 .. zn`` or, for plane curves, ``z`` and ``w``
(a lone ``z`` also works in dimension 1).
Division is only allowed by a single monomial, and negative powers only of
monomials. Curves are written ``n; rho_1; ...; rho_n`` where each component
is a rational expression in ``t``, e.g. ``2; t; -(t+1/6)/(t+1)``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .algebra import LaurentPolynomial, RationalCurve, trim_poly
from .errors import ParseError

_TOKEN = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>[ij](?![A-Za-z0-9_]))?"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^();])"
)


@dataclass
class _Tok:
    kind: str  # num, name, op, end
    text: str
    value: complex
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        if m.group("ws"):
            chunk = m.group("ws")
            nl = chunk.count("\n")
            if nl:
                line += nl
                line_start = pos + chunk.rfind("\n") + 1
        elif m.group("num"):
            v = float(m.group("num"))
            toks.append(_Tok("num", m.group(0), complex(0, v) if m.group("imag") else complex(v), line, col))
        elif m.group("name"):
            toks.append(_Tok("name", m.group("name"), 0j, line, col))
        else:
            toks.append(_Tok("op", m.group("op"), 0j, line, col))
        pos = m.end()
    toks.append(_Tok("end", "", 0j, line, pos - line_start + 1))
    return toks


class _Parser:
    """Recursive descent over an algebra supplied by ``ops``."""

    def __init__(self, toks: list[_Tok], ops):
        self.toks = toks
        self.i = 0
        self.ops = ops

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text or 'end of input'!r}", tok.line, tok.col)
        return tok

    def expr(self):
        tok = self.peek()
        sign = 1
        if tok.kind == "op" and tok.text in "+-":
            self.take()
            sign = -1 if tok.text == "-" else 1
        acc = self.term()
        if sign < 0:
            acc = self.ops.neg(acc)
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "+-":
                self.take()
                rhs = self.term()
                acc = self.ops.add(acc, rhs) if tok.text == "+" else self.ops.add(acc, self.ops.neg(rhs))
            else:
                return acc

    def term(self):
        acc = self.factor()
        while True:
            tok = self.peek()
            if tok.kind == "op" and tok.text in "*/":
                self.take()
                rhs = self.factor()
                if tok.text == "*":
                    acc = self.ops.mul(acc, rhs)
                else:
                    acc = self.ops.div(acc, rhs, tok)
            else:
                return acc

    def exponent(self) -> int:
        paren = self.peek().text == "("
        if paren:
            self.take()
        sign = 1
        if self.peek().text in ("+", "-"):
            sign = -1 if self.take().text == "-" else 1
        tok = self.take()
        if tok.kind != "num" or tok.value.imag != 0 or not tok.text.isdigit():
            raise ParseError("exponent must be an integer", tok.line, tok.col)
        if paren:
            self.expect(")")
        return sign * int(tok.text)

    def factor(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("^", "**"):
            self.take()
            k = self.exponent()
            return self.ops.pow(base, k, tok)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return self.ops.const(tok.value)
        if tok.kind == "name":
            if tok.text in ("i", "I"):
                return self.ops.const(1j)
            return self.ops.var(tok)
        if tok.text == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if tok.text in ("+", "-"):
            inner = self.atom()
            return self.ops.neg(inner) if tok.text == "-" else inner
        raise ParseError(f"unexpected {tok.text or 'end of input'!r}", tok.line, tok.col)


class _LaurentOps:
    """Values are dicts {exponent tuple: coefficient} over ``n`` variables."""

    def __init__(self, names: dict[str, int], n: int):
        self.names = names
        self.n = n

    def const(self, c):
        return {(0,) * self.n: complex(c)}

    def var(self, tok):
        if tok.text not in self.names:
            raise ParseError(f"unknown variable {tok.text!r}", tok.line, tok.col)
        e = [0] * self.n
        e[self.names[tok.text]] = 1
        return {tuple(e): 1 + 0j}

    @staticmethod
    def neg(a):
        return {e: -c for e, c in a.items()}

    @staticmethod
    def add(a, b):
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, 0j) + c
        return out

    @staticmethod
    def mul(a, b):
        out: dict = {}
        for ea, ca in a.items():
            for eb, cb in b.items():
                e = tuple(x + y for x, y in zip(ea, eb))
                out[e] = out.get(e, 0j) + ca * cb
        return out

    def _inverse(self, a, tok):
        live = {e: c for e, c in a.items() if c != 0}
        if len(live) != 1:
            raise ParseError("can only divide by or invert a single monomial", tok.line, tok.col)
        (e, c), = live.items()
        return {tuple(-x for x in e): 1 / c}

    def div(self, a, b, tok):
        return self.mul(a, self._inverse(b, tok))

    def pow(self, a, k, tok):
        if k < 0:
            a = self._inverse(a, tok)
            k = -k
        out = self.const(1)
        for _ in range(k):
            out = self.mul(out, a)
        return out


class _RationalOps:
    """Values are (numerator, denominator) pairs of ascending coefficient arrays in ``t``."""

    def __init__(self, var: str = "t"):
        self.var_name = var

    @staticmethod
    def _norm(num, den):
        num = trim_poly(num, 0.0)
        den = trim_poly(den, 0.0)
        if den.size == 1:
            return num / den[0], np.ones(1, dtype=np.complex128)
        return num, den

    def const(self, c):
        return np.array([c], dtype=np.complex128), np.ones(1, dtype=np.complex128)

    def var(self, tok):
        if tok.text != self.var_name:
            raise ParseError(f"unknown variable {tok.text!r} (curves use {self.var_name!r})", tok.line, tok.col)
        return np.array([0, 1], dtype=np.complex128), np.ones(1, dtype=np.complex128)

    @staticmethod
    def neg(a):
        return -a[0], a[1]

    def add(self, a, b):
        if a[1].size == b[1].size and np.array_equal(a[1], b[1]):
            return self._norm(np.polynomial.polynomial.polyadd(a[0], b[0]), a[1])
        P = np.polynomial.polynomial
        return self._norm(P.polyadd(P.polymul(a[0], b[1]), P.polymul(b[0], a[1])), P.polymul(a[1], b[1]))

    def mul(self, a, b):
        P = np.polynomial.polynomial
        return self._norm(P.polymul(a[0], b[0]), P.polymul(a[1], b[1]))

    def div(self, a, b, tok):
        if not np.any(b[0] != 0):
            raise ParseError("division by zero", tok.line, tok.col)
        return self.mul(a, (b[1], b[0]))

    def pow(self, a, k, tok):
        if k < 0:
            a = self.div(self.const(1), a, tok)
            k = -k
        out = self.const(1)
        for _ in range(k):
            out = self.mul(out, a)
        return out


def _variable_names(toks: list[_Tok], ambient_dim: int | None) -> tuple[dict[str, int], int]:
    used = {t.text for t in toks if t.kind == "name" and t.text not in ("i", "I")}
    indexed = {}
    for name in used:
        m = re.fullmatch(r"z(\d+)", name)
        if m and int(m.group(1)) >= 1:
            indexed[name] = int(m.group(1)) - 1
    if used & {"z", "w"}:
        if indexed:
            tok = next(t for t in toks if t.text in indexed)
            raise ParseError("cannot mix z/w with indexed variables", tok.line, tok.col)
        n = ambient_dim or 2
        if n == 1 and used == {"z"}:
            return {"z": 0}, 1
        if n != 2:
            raise ParseError("z/w aliases require ambient dimension 2", 1, 1)
        return {"z": 0, "w": 1}, 2
    n = max(indexed.values(), default=-1) + 1
    if ambient_dim is not None:
        if n > ambient_dim:
            tok = next(t for t in toks if t.text in indexed and indexed[t.text] >= ambient_dim)
            raise ParseError(f"variable {tok.text} exceeds ambient dimension {ambient_dim}", tok.line, tok.col)
        n = ambient_dim
    if n == 0:
        n = 1
    return {f"z{i + 1}": i for i in range(n)}, n


def parse_polynomial(text: str, ambient_dim: int | None = None) -> LaurentPolynomial:
    toks = _tokenize(text)
    names, n = _variable_names(toks, ambient_dim)
    parser = _Parser(toks, _LaurentOps(names, n))
    value = parser.expr()
    end = parser.peek()
    if end.kind != "end":
        raise ParseError(f"unexpected {end.text!r}", end.line, end.col)
    live = {e: c for e, c in value.items() if c != 0}
    if not live:
        raise ParseError("polynomial is identically zero", 1, 1)
    return LaurentPolynomial(n, live.items())


def parse_rational(text: str, var: str = "t") -> tuple[np.ndarray, np.ndarray]:
    toks = _tokenize(text)
    parser = _Parser(toks, _RationalOps(var))
    value = parser.expr()
    end = parser.peek()
    if end.kind != "end":
        raise ParseError(f"unexpected {end.text!r}", end.line, end.col)
    return value


def parse_curve(text: str) -> RationalCurve:
    toks = _tokenize(text)
    # split at top-level ';'
    groups: list[list[_Tok]] = [[]]
    for tok in toks[:-1]:
        if tok.text == ";":
            groups[-1].append(_Tok("end", "", 0j, tok.line, tok.col))
            groups.append([])
        else:
            groups[-1].append(tok)
    groups[-1].append(toks[-1])
    head = groups[0]
    if len(head) != 2 or head[0].kind != "num" or not head[0].text.isdigit():
        tok = head[0]
        raise ParseError("curve literal must start with the dimension, e.g. '3; ...'", tok.line, tok.col)
    n = int(head[0].text)
    comps = groups[1:]
    if n < 1 or len(comps) != n:
        tok = head[0]
        raise ParseError(f"curve declares {n} components but has {len(comps)}", tok.line, tok.col)
    pairs = []
    for group in comps:
        if len(group) == 1:
            raise ParseError("empty curve component", group[0].line, group[0].col)
        parser = _Parser(group, _RationalOps("t"))
        num, den = parser.expr()
        end = parser.peek()
        if end.kind != "end":
            raise ParseError(f"unexpected {end.text!r}", end.line, end.col)
        if not np.any(num != 0):
            raise ParseError("curve component is identically zero", group[0].line, group[0].col)
        pairs.append((num, den))
    return RationalCurve(tuple(pairs))
