"""Text rendering.  `to_text` is exact and re-parseable; `pretty` rounds constants."""
from __future__ import annotations

from fractions import Fraction

from . import core as C

_PREC = {C.ADD: 1, C.MUL: 2, C.POW: 3}


def _frac_text(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def _num_text(q: Fraction, digits) -> str:
    if digits is None:
        return _frac_text(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{float(q):.{digits}g}"


def _const_text(c: C.CRational, digits=None) -> tuple[str, int]:
    """Text of a constant and its precedence (4 = atom)."""
    if c.im == 0:
        s = _num_text(c.re, digits)
        if c.re < 0:
            return s, 1
        return s, (4 if ("/" not in s) else 2)
    if c.re == 0:
        if c.im == 1:
            return "i", 4
        if c.im == -1:
            return "-i", 1
        return f"{_num_text(c.im, digits)}*i", (1 if c.im < 0 else 2)
    im = c.im
    sign = "+" if im > 0 else "-"
    ims = "i" if abs(im) == 1 else f"{_num_text(abs(im), digits)}*i"
    return f"{_num_text(c.re, digits)}{sign}{ims}", 1


def _wrap(s: str, prec: int, need: int) -> str:
    return f"({s})" if prec < need else s


def _render(e: C.Expr, digits) -> tuple[str, int]:
    k = e.kind
    if k == C.CONST:
        return _const_text(e.value, digits)
    if k == C.SYM:
        return e.value, 4
    if k == C.RHO:
        return "rho", 4
    if k == C.PHI:
        return "phi", 4
    if k == C.ADD:
        parts = []
        for i, a in enumerate(e.args):
            s, _ = _render(a, digits)
            if i and digits is not None and s.startswith("-"):
                parts.append(f"- {s[1:]}")
            elif i:
                parts.append(f"+ {s}")
            else:
                parts.append(s)
        return " ".join(parts), 1
    if k == C.MUL:
        parts = []
        args = e.args
        lead = ""
        if args[0].kind == C.CONST:
            c = args[0].value
            if c == C.CRational(-1):
                lead = "-"
                args = args[1:]
            elif c.im == 0 and c.re < 0:
                s, _ = _const_text(c, digits)
                lead = s + "*"
                args = args[1:]
        for a in args:
            s, p = _render(a, digits)
            need = 3 if a.kind == C.CONST and p < 4 else 2
            parts.append(_wrap(s, p, need))
        body = "*".join(parts)
        return lead + body, (1 if lead else 2)
    if k == C.POW:
        b, ex = e.args
        bs, bp = _render(b, digits)
        es, ep = _render(ex, digits)
        if ex.kind == C.CONST and ep == 4 and not es.startswith("-"):
            pass
        elif ex.kind == C.SYM:
            pass
        else:
            es = f"({es})"
        return f"{_wrap(bs, bp, 4)}^{es}", 3
    if k == C.FUNC:
        name, derivs, conjugated = e.value
        fname = name
        if any(derivs):
            fname = f"{name}__{'_'.join(str(d) for d in derivs)}"
        if conjugated:
            inner = ", ".join(f"conj({_render(a, digits)[0]})" for a in e.args)
            return f"conj({fname}({inner}))", 4
        inner = ", ".join(_render(a, digits)[0] for a in e.args)
        return f"{fname}({inner})", 4
    # unary function kinds
    return f"{k}({_render(e.args[0], digits)[0]})", 4


def to_text(e: C.Expr) -> str:
    return _render(e, None)[0]


def pretty(e: C.Expr, digits: int = 6) -> str:
    return _render(e, digits)[0]
