"""Conjugation, Wirtinger differentiation, substitution and desugaring."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

from . import core as C
from .core import Expr


@lru_cache(maxsize=200_000)
def conjugate(e: Expr) -> Expr:
    """Structural complex conjugate: psi <-> cpsi, constants conjugated, reals fixed."""
    k = e.kind
    if k == C.CONST:
        return C._node(C.CONST, (), e.value.conjugate())
    if k == C.SYM:
        partner = C.conj_partner(e.value)
        if partner is not None:
            return C.sym(partner)
        if C.is_real_symbol(e.value):
            return e
        return C._node(C.CONJ, (e,))
    if k == C.CONJ:
        return e.args[0]
    if k in (C.RHO, C.PHI, C.ABS, C.RE, C.IM):
        return e
    if k == C.FUNC:
        name, derivs, flag = e.value
        return C._node(C.FUNC, tuple(conjugate(a) for a in e.args), (name, derivs, not flag))
    return C.rebuild(e, tuple(conjugate(a) for a in e.args))


@lru_cache(maxsize=400_000)
def differentiate(e: Expr, v: str) -> Expr:
    """Partial derivative with psi and cpsi treated as independent (Wirtinger) variables."""
    if v not in C._free_symbols(e):
        return C.ZERO
    k = e.kind
    if k == C.SYM:
        return C.ONE if e.value == v else C.ZERO
    if k == C.RHO:
        other = C.CPSI if v == "psi" else C.PSI
        return C.mul(C.HALF, other, C.power(C.RHO_E, C.MINUS_ONE))
    if k == C.PHI:
        if v == "psi":
            return C.mul(C.const(-0.5j), C.power(C.PSI, C.MINUS_ONE))
        return C.mul(C.const(0.5j), C.power(C.CPSI, C.MINUS_ONE))
    if k == C.ADD:
        return C.add(*(differentiate(a, v) for a in e.args))
    if k == C.MUL:
        terms = []
        args = e.args
        for i, a in enumerate(args):
            da = differentiate(a, v)
            if da.is_zero:
                continue
            terms.append(C.mul(*args[:i], da, *args[i + 1:]))
        return C.add(*terms)
    if k == C.POW:
        b, ex = e.args
        db = differentiate(b, v)
        dex = differentiate(ex, v)
        out = C.ZERO
        if not db.is_zero:
            out = C.mul(ex, C.power(b, C.add(ex, C.MINUS_ONE)), db)
        if not dex.is_zero:
            out = C.add(out, C.mul(e, C.ln(b), dex))
        return out
    u = e.args[0] if e.args else None
    if k == C.EXP:
        return C.mul(e, differentiate(u, v))
    if k == C.LN:
        return C.mul(differentiate(u, v), C.power(u, C.MINUS_ONE))
    if k == C.SIN:
        return C.mul(C.cos(u), differentiate(u, v))
    if k == C.COS:
        return C.mul(C.MINUS_ONE, C.sin(u), differentiate(u, v))
    if k == C.ABS:
        ub = conjugate(u)
        num = C.add(C.mul(differentiate(u, v), ub), C.mul(u, differentiate(ub, v)))
        return C.mul(C.HALF, num, C.power(e, C.MINUS_ONE))
    if k == C.RE:
        return C.mul(C.HALF, C.add(differentiate(u, v), differentiate(conjugate(u), v)))
    if k == C.IM:
        return C.mul(C.const(-0.5j), C.sub(differentiate(u, v), differentiate(conjugate(u), v)))
    if k == C.CONJ:
        return C.ZERO
    if k == C.FUNC:
        name, derivs, flag = e.value
        terms = []
        for i, a in enumerate(e.args):
            da = differentiate(a, v)
            if da.is_zero:
                continue
            nd = list(derivs)
            nd[i] += 1
            terms.append(C.mul(C._node(C.FUNC, e.args, (name, tuple(nd), flag)), da))
        return C.add(*terms)
    raise ValueError(f"cannot differentiate node kind {k}")


def diff(e: Expr, *vs: str) -> Expr:
    for v in vs:
        e = differentiate(e, v)
    return e


@dataclass(frozen=True)
class Lambda:
    """Function template: body in terms of the dummy symbols `params`."""

    params: tuple
    body: Expr

    def __post_init__(self):
        if isinstance(self.params, str):
            object.__setattr__(self, "params", (self.params,))

    @property
    def arity(self) -> int:
        return len(self.params)


class ArityError(ValueError):
    pass


def substitute(e: Expr, mapping: Mapping) -> Expr:
    """Simultaneous, capture-free replacement of symbols (by Expr) and function symbols
    (by `Lambda`).  Replacing psi also rewrites rho and phi through their definitions."""
    sym_map = {}
    fn_map = {}
    for key, val in mapping.items():
        if isinstance(val, Lambda):
            fn_map[key] = val
        else:
            sym_map[key] = C.as_expr(val)
    if "psi" in sym_map and "cpsi" not in sym_map:
        sym_map["cpsi"] = conjugate(sym_map["psi"])
    if "cpsi" in sym_map and "psi" not in sym_map:
        sym_map["psi"] = conjugate(sym_map["cpsi"])
    memo: dict = {}
    return _subst(e, sym_map, fn_map, memo)


def _subst(e: Expr, sym_map, fn_map, memo) -> Expr:
    hit = memo.get(e)
    if hit is not None:
        return hit
    k = e.kind
    if k == C.SYM:
        out = sym_map.get(e.value, e)
    elif k == C.RHO:
        if "psi" in sym_map:
            out = C.power(C.mul(sym_map["psi"], sym_map["cpsi"]), C.HALF)
        else:
            out = e
    elif k == C.PHI:
        if "psi" in sym_map:
            out = C.mul(C.const(0.5j), C.sub(C.ln(sym_map["cpsi"]), C.ln(sym_map["psi"])))
        else:
            out = e
    elif k == C.CONST:
        out = e
    elif k == C.FUNC and e.value[0] in fn_map:
        out = _instantiate(e, fn_map[e.value[0]], sym_map, fn_map, memo)
    elif k == C.CONJ:
        inner = _subst(e.args[0], sym_map, fn_map, memo)
        out = conjugate(inner)
    elif e.args:
        out = C.rebuild(e, tuple(_subst(a, sym_map, fn_map, memo) for a in e.args))
    else:
        out = e
    memo[e] = out
    return out


def _instantiate(e: Expr, lam: Lambda, sym_map, fn_map, memo) -> Expr:
    name, derivs, flag = e.value
    if lam.arity != len(e.args):
        raise ArityError(f"{name} takes {lam.arity} argument(s), got {len(e.args)}")
    body = lam.body
    for p, d in zip(lam.params, derivs):
        for _ in range(d):
            body = differentiate(body, p)
    args = [_subst(a, sym_map, fn_map, memo) for a in e.args]
    if flag:
        # conj(f)(w) = conj(f(conj w))
        inner = substitute(body, {p: conjugate(a) for p, a in zip(lam.params, args)})
        return conjugate(inner)
    return substitute(body, {p: a for p, a in zip(lam.params, args)})


def desugar(e: Expr) -> Expr:
    """Replace rho and phi by their psi/cpsi definitions (uncanonicalised nodes)."""
    rho_def = C.raw(C.POW, (C.raw(C.MUL, (C.PSI, C.CPSI)), C.HALF))
    phi_def = C.raw(C.MUL, (C.const(0.5j), C.raw(C.ADD, (
        C.raw(C.LN, (C.CPSI,)), C.raw(C.MUL, (C.MINUS_ONE, C.raw(C.LN, (C.PSI,))))))))
    memo: dict = {}

    def go(node):
        if node in memo:
            return memo[node]
        if node.kind == C.RHO:
            out = rho_def
        elif node.kind == C.PHI:
            out = phi_def
        elif node.args:
            out = C.raw(node.kind, tuple(go(a) for a in node.args), node.value)
        else:
            out = node
        memo[node] = out
        return out

    return go(e)
