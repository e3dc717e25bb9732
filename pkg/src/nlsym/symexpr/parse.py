"""Recursive-descent parser for nonlinearity expressions.

Grammar::

    expr  := sum
    sum   := prod (('+'|'-') prod)*
    prod  := unary (('*'|'/') unary)*
    unary := ('-'|'+') unary | pow
    pow   := atom ('^' unary)?
    atom  := number | 'i' | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
"""
from __future__ import annotations

import re
from fractions import Fraction

from . import core as C
from .calculus import conjugate

DEFAULT_PARAMS = frozenset({
    "sigma", "gamma", "gamma1", "gamma2", "delta", "delta1", "delta2", "delta3", "delta4",
    "Omega", "k", "nu", "mu", "lambda1", "lambda2", "Delta", "kappa", "alpha", "beta",
    "eps", "A", "c", "s",
})
FUNCTION_SYMBOLS = frozenset({"f", "g", "h", "theta", "eta0"})
_BUILTINS = {
    "exp": C.exp_, "ln": C.ln, "log": C.ln, "abs": C.abs_, "re": C.re_, "im": C.im_,
    "conj": conjugate, "sin": C.sin, "cos": C.cos, "sqrt": C.sqrt,
}
_JET_RE = re.compile(r"^c?psi_[t0-9]+$")
_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\*\*|[-+*/^(),])
""", re.VERBOSE)


class ParseError(ValueError):
    """Syntax or vocabulary error at byte `offset` of the input."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownSymbolError(ParseError):
    pass


class IndexOutOfRangeError(ParseError):
    pass


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()))
        kind = m.lastgroup
        if kind != "ws":
            val = m.group(kind)
            if val == "**":
                val = "^"
            toks.append((kind, val, len(text[:pos].encode())))
        pos = m.end()
    toks.append(("end", None, len(text.encode())))
    return toks


class _Parser:
    def __init__(self, text, n, params):
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n
        self.params = params

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, val):
        t = self.take()
        if t[1] != val:
            found = "end of input" if t[0] == "end" else repr(t[1])
            raise ParseError(f"expected {val!r}, found {found}", t[2])
        return t

    def parse(self):
        e = self.sum()
        t = self.peek()
        if t[0] != "end":
            raise ParseError(f"unexpected token {t[1]!r}", t[2])
        return e

    def sum(self):
        e = self.prod()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            r = self.prod()
            e = C.add(e, r) if op == "+" else C.sub(e, r)
        return e

    def prod(self):
        e = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            r = self.unary()
            e = C.mul(e, r) if op == "*" else C.mul(e, C.power(r, C.MINUS_ONE))
        return e

    def unary(self):
        if self.peek()[1] == "-":
            self.take()
            return C.neg(self.unary())
        if self.peek()[1] == "+":
            self.take()
            return self.unary()
        return self.pow()

    def pow(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            return C.power(base, self.unary())
        return base

    def args(self):
        self.expect("(")
        out = [self.sum()]
        while self.peek()[1] == ",":
            self.take()
            out.append(self.sum())
        self.expect(")")
        return out

    def atom(self):
        kind, val, off = self.take()
        if kind == "num":
            return C.const(Fraction(val))
        if val == "(":
            e = self.sum()
            self.expect(")")
            return e
        if kind != "ident":
            found = "end of input" if kind == "end" else repr(val)
            raise ParseError(f"unexpected {found}", off)
        return self.ident(val, off)

    def ident(self, name, off):
        if name in _BUILTINS:
            a = self.args()
            if len(a) != 1:
                raise ParseError(f"{name} takes one argument", off)
            return _BUILTINS[name](a[0])
        base = name.split("__")[0]
        if base in FUNCTION_SYMBOLS:
            if self.peek()[1] != "(":
                raise ParseError(f"function symbol {name} needs arguments", off)
            a = self.args()
            derivs = (0,) * len(a)
            if "__" in name:
                try:
                    derivs = tuple(int(d) for d in name.split("__", 1)[1].split("_"))
                except ValueError:
                    raise ParseError(f"bad derivative suffix in {name}", off) from None
                if len(derivs) != len(a):
                    raise ParseError(f"derivative suffix of {name} does not match arity", off)
            return C.func(base, *a, derivs=derivs)
        if name == "i":
            return C.I
        if name in ("psi", "cpsi", "t"):
            return C.sym(name)
        if name == "rho":
            return C.RHO_E
        if name == "phi":
            return C.PHI_E
        if name == "pi":
            return C.const(Fraction(3.141592653589793))
        if name == "n":
            return C.const(self.n)
        m = re.fullmatch(r"x(\d+)", name)
        if m:
            a = int(m.group(1))
            if not 1 <= a <= self.n:
                raise IndexOutOfRangeError(f"index {a} out of range 1..{self.n}", off)
            return C.sym(name)
        if _JET_RE.match(name):
            return C.sym(name)
        if self.params is None or name in self.params:
            return C.sym(name)
        raise UnknownSymbolError(f"unknown symbol {name!r}", off)


def parse(text: str, n: int = 1, params=DEFAULT_PARAMS) -> C.Expr:
    """Parse `text` into an Expr for spatial dimension `n`.

    `params` is the set of admissible parameter names; pass None to accept any name.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    allowed = None if params is None else frozenset(params) | DEFAULT_PARAMS
    return _Parser(text, n, allowed).parse()
