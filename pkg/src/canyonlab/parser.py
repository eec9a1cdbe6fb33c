"""Germ expressions: a small precedence-climbing parser and its inverse."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError, UnboundParameter
from .numerics import GaussRat
from .puiseux import BivarPoly

__all__ = ["GermExpr", "parse_germ", "parse_poly", "render"]


@dataclass(frozen=True)
class GermExpr:
    source: str
    poly: BivarPoly
    bindings: tuple[tuple[str, GaussRat], ...] = ()


_PUNCT = "+-*/^()"


def _tokenize(text: str):
    toks = []
    pos, n = 0, len(text)
    while pos < n:
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif ch.isdigit():
            start = pos
            while pos < n and text[pos].isdigit():
                pos += 1
            toks.append(("num", int(text[start:pos]), start))
        elif ch.isalpha() or ch == "_":
            start = pos
            while pos < n and (text[pos].isalnum() or text[pos] == "_"):
                pos += 1
            toks.append(("name", text[start:pos], start))
        elif ch in _PUNCT:
            toks.append((ch, ch, pos))
            pos += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", pos)
    toks.append(("end", None, n))
    return toks


class _Parser:
    def __init__(self, text: str, bindings: dict):
        self.toks = _tokenize(text)
        self.k = 0
        self.bindings = bindings

    def peek(self):
        return self.toks[self.k]

    def take(self, kind=None):
        tok = self.toks[self.k]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}", tok[2])
        self.k += 1
        return tok

    def parse(self) -> BivarPoly:
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return out

    def expr(self) -> BivarPoly:
        out = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "end":
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> BivarPoly:
        out = self.unary()
        while self.peek()[0] in ("*", "/"):
            op, _, pos = self.take()
            rhs = self.unary()
            if op == "*":
                out = out * rhs
            else:
                c = rhs.monomials.get((0, 0)) if set(rhs.monomials) <= {(0, 0)} else None
                if not c:
                    raise ParseError("divisor must be a nonzero constant", pos)
                out = out * BivarPoly.const(GaussRat(1) / c)
        return out

    def unary(self) -> BivarPoly:
        if self.peek()[0] == "-":
            self.take()
            return -self.unary()
        return self.power()

    def power(self) -> BivarPoly:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "num":
                raise ParseError("exponent must be a nonnegative integer", tok[2])
            self.take()
            return base ** tok[1]
        return base

    def atom(self) -> BivarPoly:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return BivarPoly.const(val)
        if kind == "name":
            self.take()
            if val == "x":
                return BivarPoly.x()
            if val == "y":
                return BivarPoly.y()
            if val == "i":
                return BivarPoly.const(GaussRat(0, 1))
            if val not in self.bindings:
                raise UnboundParameter(f"unbound parameter {val!r}", pos)
            return BivarPoly.const(self.bindings[val])
        if kind == "(":
            self.take()
            out = self.expr()
            self.take(")")
            return out
        what = "end of input" if kind == "end" else repr(val)
        raise ParseError(f"unexpected {what}", pos)


def _binding_value(v) -> GaussRat:
    if isinstance(v, GaussRat):
        return v
    if isinstance(v, str):
        return GaussRat.of(Fraction(v))
    return GaussRat.of(Fraction(v))


def parse_poly(text: str, bindings: dict | None = None) -> BivarPoly:
    binds = {k: _binding_value(v) for k, v in (bindings or {}).items()}
    return _Parser(text, binds).parse()


def parse_germ(text: str, bindings: dict | None = None) -> GermExpr:
    binds = {k: _binding_value(v) for k, v in (bindings or {}).items()}
    poly = _Parser(text, binds).parse()
    return GermExpr(text, poly, tuple(sorted(binds.items())))


def _render_coeff(c: GaussRat) -> str:
    if not c.im:
        return str(c.re)
    if not c.re:
        return f"{c.im}*i"
    sign = "+" if c.im > 0 else "-"
    return f"({c.re}{sign}{abs(c.im)}*i)"


def render(f: BivarPoly) -> str:
    """Canonical text of ``f``; ``parse_poly(render(f)) == f`` for exact ``f``."""
    parts = []
    for (i, j), c in sorted(f.monomials.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0])):
        if not isinstance(c, GaussRat):
            raise ValueError("render needs exact coefficients")
        mono = "*".join(([f"x^{i}" if i > 1 else "x"] if i else []) + ([f"y^{j}" if j > 1 else "y"] if j else []))
        neg = c.im == 0 and c.re < 0
        mag = -c if neg else c
        if mono and mag == GaussRat(1):
            body = mono
        elif mono:
            body = f"{_render_coeff(mag)}*{mono}"
        else:
            body = _render_coeff(mag)
        if parts:
            parts.append(("- " if neg else "+ ") + body)
        else:
            parts.append(("-" if neg else "") + body)
    return " ".join(parts) if parts else "0"
