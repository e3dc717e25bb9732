"""Expression DAG with canonicalising constructors.

Every node is hash-consed, so structural equality is identity and
expressions are safe to share between threads.  The smart constructors
(`add`, `mul`, `power`, ...) keep nodes in a light normal form; `simplify`
additionally expands products over sums so that identities made of
polynomial-like pieces collapse to a literal zero.
"""
from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import isqrt
from typing import Iterable


class CRational:
    """Exact complex rational ``re + i*im``."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = _frac(re)
        self.im = _frac(im)

    @classmethod
    def of(cls, value) -> "CRational":
        if isinstance(value, CRational):
            return value
        if isinstance(value, complex):
            return cls(value.real, value.imag)
        return cls(value, 0)

    def __add__(self, o):
        return CRational(self.re + o.re, self.im + o.im)

    def __sub__(self, o):
        return CRational(self.re - o.re, self.im - o.im)

    def __mul__(self, o):
        return CRational(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def inverse(self) -> "CRational":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("inverse of zero constant")
        return CRational(self.re / d, -self.im / d)

    def __truediv__(self, o):
        return self * o.inverse()

    def ipow(self, k: int) -> "CRational":
        base = self if k >= 0 else self.inverse()
        out = CRational(1)
        for _ in range(abs(k)):
            out = out * base
        return out

    def conjugate(self) -> "CRational":
        return CRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def is_integer(self) -> bool:
        return self.im == 0 and self.re.denominator == 1

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __eq__(self, o):
        if not isinstance(o, CRational):
            try:
                o = CRational.of(o)
            except TypeError:
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"CRational({self.re}, {self.im})"


def _frac(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, float):
        return Fraction(v)
    return Fraction(v)


# node kinds
CONST = "const"
SYM = "sym"
ADD = "add"
MUL = "mul"
POW = "pow"
EXP = "exp"
LN = "ln"
SIN = "sin"
COS = "cos"
ABS = "abs"
CONJ = "conj"
RE = "re"
IM = "im"
RHO = "rho"
PHI = "phi"
FUNC = "func"

UNARY_KINDS = (EXP, LN, SIN, COS, ABS, CONJ, RE, IM)

_KIND_ORDER = {k: i for i, k in enumerate(
    [CONST, SYM, RHO, PHI, POW, MUL, ADD, EXP, LN, SIN, COS, ABS, RE, IM, CONJ, FUNC])}


class Expr:
    """Immutable expression node.  Build through the module constructors."""

    __slots__ = ("kind", "args", "value", "_hash", "_str", "__weakref__")

    def __init__(self, kind, args, value):
        self.kind = kind
        self.args = args
        self.value = value
        self._hash = hash((kind, args, value))
        self._str = None

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, float, complex, Fraction)):
                return self.kind == CONST and self.value == CRational.of(other)
            return NotImplemented
        return (self._hash == other._hash and self.kind == other.kind
                and self.value == other.value and self.args == other.args)

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    # arithmetic sugar -------------------------------------------------
    def __add__(self, o):
        return add(self, as_expr(o))

    def __radd__(self, o):
        return add(as_expr(o), self)

    def __sub__(self, o):
        return add(self, neg(as_expr(o)))

    def __rsub__(self, o):
        return add(as_expr(o), neg(self))

    def __mul__(self, o):
        return mul(self, as_expr(o))

    def __rmul__(self, o):
        return mul(as_expr(o), self)

    def __truediv__(self, o):
        return mul(self, power(as_expr(o), MINUS_ONE))

    def __rtruediv__(self, o):
        return mul(as_expr(o), power(self, MINUS_ONE))

    def __pow__(self, o):
        return power(self, as_expr(o))

    def __rpow__(self, o):
        return power(as_expr(o), self)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        if self._str is None:
            from .printing import to_text
            self._str = to_text(self)
        return self._str

    def __repr__(self):
        return f"Expr({self})"

    @property
    def is_const(self) -> bool:
        return self.kind == CONST

    @property
    def is_zero(self) -> bool:
        return self.kind == CONST and self.value.is_zero

    @property
    def is_one(self) -> bool:
        return self.kind == CONST and self.value == ONE_C

    def free_symbols(self) -> frozenset:
        return _free_symbols(self)


_INTERN: dict = {}


def _node(kind, args=(), value=None) -> Expr:
    key = (kind, args, value)
    e = _INTERN.get(key)
    if e is None:
        e = Expr(kind, args, value)
        _INTERN[key] = e
    return e


ONE_C = CRational(1)
ZERO_C = CRational(0)


def const(v) -> Expr:
    return _node(CONST, (), CRational.of(v))


def sym(name: str) -> Expr:
    return _node(SYM, (), name)


ZERO = const(0)
ONE = const(1)
MINUS_ONE = const(-1)
HALF = const(Fraction(1, 2))
I = const(1j)
RHO_E = _node(RHO)
PHI_E = _node(PHI)
PSI = sym("psi")
CPSI = sym("cpsi")
T = sym("t")


def x(a: int) -> Expr:
    return sym(f"x{a}")


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, float, complex, Fraction, CRational)):
        return const(v)
    raise TypeError(f"cannot convert {type(v).__name__} to Expr")


# ---------------------------------------------------------------- symbols
_COORD_RE = re.compile(r"^(t|x\d+)$")
_REAL_PARAM_RE = re.compile(
    r"^(gamma|delta|kappa|chi|lambda|mu|nu|k|eps|s|A|Omega|theta_r|c|r|w|n)\d*$")


def is_coordinate(name: str) -> bool:
    return bool(_COORD_RE.match(name))


def conj_partner(name: str) -> str | None:
    """Name of the conjugate symbol for the psi family, else None."""
    if name == "psi" or name.startswith("psi_"):
        return "c" + name
    if name == "cpsi" or name.startswith("cpsi_"):
        return name[1:]
    if name == "F":
        return "cF"
    if name == "cF":
        return "F"
    return None


def is_real_symbol(name: str) -> bool:
    if conj_partner(name) is not None:
        return False
    return is_coordinate(name) or bool(_REAL_PARAM_RE.match(name))


# ---------------------------------------------------------------- ordering
@lru_cache(maxsize=None)
def sort_key(e: Expr):
    return (_KIND_ORDER[e.kind], str(e))


def _split_coeff(e: Expr):
    """Return (coefficient, rest) with e == coefficient * rest."""
    if e.kind == CONST:
        return e.value, ONE
    if e.kind == MUL and e.args[0].kind == CONST:
        rest = e.args[1:]
        return e.args[0].value, rest[0] if len(rest) == 1 else _node(MUL, rest)
    return ONE_C, e


# ---------------------------------------------------------------- add
def add(*terms: Expr) -> Expr:
    return _add(terms, False)


def _add(terms: Iterable[Expr], expand: bool) -> Expr:
    flat = []
    for t in terms:
        if t.kind == ADD:
            flat.extend(t.args)
        else:
            flat.append(t)
    coeffs: dict = {}
    order = []
    cst = ZERO_C
    for t in flat:
        c, rest = _split_coeff(t)
        if rest is ONE:
            cst = cst + c
            continue
        if rest in coeffs:
            coeffs[rest] = coeffs[rest] + c
        else:
            coeffs[rest] = c
            order.append(rest)
    out = []
    for rest in order:
        c = coeffs[rest]
        if c.is_zero:
            continue
        out.append(rest if c == ONE_C else _mul_coeff(c, rest))
    out.sort(key=sort_key)
    if not cst.is_zero:
        out.insert(0, _node(CONST, (), cst))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    return _node(ADD, tuple(out))


def _mul_coeff(c: CRational, rest: Expr) -> Expr:
    if rest.kind == MUL:
        return _node(MUL, (_node(CONST, (), c),) + rest.args)
    return _node(MUL, (_node(CONST, (), c), rest))


def neg(e: Expr) -> Expr:
    return mul(MINUS_ONE, e)


def sub(a: Expr, b: Expr) -> Expr:
    return add(a, neg(b))


# ---------------------------------------------------------------- mul
def mul(*factors: Expr) -> Expr:
    return _mul(factors, False)


def _is_positive_base(b: Expr) -> bool:
    return b.kind in (RHO, ABS)


def _mul(factors: Iterable[Expr], expand: bool) -> Expr:
    flat = []
    for f in factors:
        if f.kind == MUL:
            flat.extend(f.args)
        else:
            flat.append(f)
    coeff = ONE_C
    powers: dict = {}
    order = []
    exp_args = []
    sums = []
    for f in flat:
        if f.kind == CONST:
            coeff = coeff * f.value
            continue
        if f.kind == EXP:
            exp_args.append(f.args[0])
            continue
        if f.kind == POW:
            base, ex = f.args
        else:
            base, ex = f, ONE
        if expand and base.kind == ADD and ex is ONE:
            sums.append(base)
            continue
        if base in powers:
            powers[base].append(ex)
        else:
            powers[base] = [ex]
            order.append(base)
    if coeff.is_zero:
        return ZERO
    if sums:
        rest = [power(b, add(*powers[b])) for b in order]
        if exp_args:
            rest.append(exp_(add(*exp_args)))
        products = [[]]
        for s in sums:
            products = [p + [term] for p in products for term in s.args]
        cterm = _node(CONST, (), coeff)
        return _add([_mul([cterm] + rest + p, True) for p in products], True)

    # psi^a * cpsi^b -> rho^(2m) * psi^(a-m) * cpsi^(b-m) for same-sign numeric a, b
    if PSI in powers and CPSI in powers:
        a = add(*powers[PSI])
        b = add(*powers[CPSI])
        if a.kind == CONST and b.kind == CONST and a.value.is_real and b.value.is_real:
            av, bv = a.value.re, b.value.re
            if av * bv > 0:
                m = min(av, bv) if av > 0 else max(av, bv)
                powers[PSI] = [const(av - m)]
                powers[CPSI] = [const(bv - m)]
                if RHO_E in powers:
                    powers[RHO_E].append(const(2 * m))
                else:
                    powers[RHO_E] = [const(2 * m)]
                    order.append(RHO_E)

    out = []
    for b in order:
        ex = add(*powers[b])
        p = power(b, ex)
        if p.kind == CONST:
            coeff = coeff * p.value
        elif p.kind == MUL:
            for q in p.args:
                if q.kind == CONST:
                    coeff = coeff * q.value
                else:
                    out.append(q)
        else:
            out.append(p)
    if exp_args:
        ea = add(*exp_args)
        ex = exp_(ea)
        if ex.kind == CONST:
            coeff = coeff * ex.value
        elif ex.kind == MUL:
            # exp(ln(u)) collapse can hand back a product
            return _mul([_node(CONST, (), coeff)] + out + [ex], expand)
        else:
            out.append(ex)
    if coeff.is_zero:
        return ZERO
    # merging can produce duplicates (e.g. rho from two sources); recurse once if so
    seen = set()
    dup = False
    for o in out:
        b = o.args[0] if o.kind == POW else o
        if b in seen:
            dup = True
            break
        seen.add(b)
    if dup:
        return _mul([_node(CONST, (), coeff)] + out, expand)
    out.sort(key=sort_key)
    if not out:
        return _node(CONST, (), coeff)
    if coeff == ONE_C and len(out) == 1:
        return out[0]
    if coeff != ONE_C:
        out.insert(0, _node(CONST, (), coeff))
    return _node(MUL, tuple(out))


# ---------------------------------------------------------------- power
def _exact_root(q: Fraction, k: int):
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn = round(num ** (1.0 / k)) if num else 0
    rd = round(den ** (1.0 / k))
    for cn in (rn - 1, rn, rn + 1):
        for cd in (rd - 1, rd, rd + 1):
            if cn >= 0 and cd > 0 and cn ** k == num and cd ** k == den:
                return Fraction(cn, cd)
    return None


def power(b: Expr, e: Expr) -> Expr:
    return _power(b, e, False)


def _power(b: Expr, e: Expr, expand: bool) -> Expr:
    if e.is_zero:
        return ONE
    if e.is_one:
        return b
    if b.is_one:
        return ONE
    if b.kind == CONST and e.kind == CONST:
        bv, ev = b.value, e.value
        if ev.is_integer():
            k = int(ev.re)
            if bv.is_zero:
                if k > 0:
                    return ZERO
                raise ZeroDivisionError("0 raised to a negative power")
            return _node(CONST, (), bv.ipow(k))
        if bv.is_real and bv.re > 0 and ev.is_real and ev.re.denominator <= 8:
            root = _exact_root(bv.re, ev.re.denominator)
            if root is not None:
                return _node(CONST, (), CRational(root).ipow(ev.re.numerator))
        return _node(POW, (b, e))
    if b.is_zero and e.kind == CONST and e.value.is_real and e.value.re > 0:
        return ZERO
    e_int = e.kind == CONST and e.value.is_integer()
    if b.kind == POW and (e_int or _is_positive_base(b.args[0])):
        return _power(b.args[0], mul(b.args[1], e), expand)
    if b.kind == MUL and e_int:
        return _mul([_power(f, e, expand) for f in b.args], expand)
    if b.kind == MUL and all(_is_positive_base(f.args[0] if f.kind == POW else f)
                            or (f.kind == CONST and f.value.is_real and f.value.re > 0)
                            for f in b.args):
        return _mul([_power(f, e, expand) for f in b.args], expand)
    if b.kind == EXP and e_int:
        return exp_(mul(e, b.args[0]))
    if expand and b.kind == ADD and e_int and 1 < int(e.value.re) <= 4:
        return _mul([b] * int(e.value.re), True)
    if b.kind == ABS and b.args[0].kind == CONST:
        pass
    return _node(POW, (b, e))


def sqrt(b: Expr) -> Expr:
    return power(b, HALF)


# ---------------------------------------------------------------- unary functions
def exp_(u: Expr) -> Expr:
    if u.is_zero:
        return ONE
    if u.kind == LN:
        return u.args[0]
    if u.kind == MUL and len(u.args) == 2 and u.args[0].kind == CONST and u.args[1].kind == LN \
            and u.args[0].value.is_real:
        # exp(c*ln w) = w^c on the principal branch
        return power(u.args[1].args[0], u.args[0])
    return _node(EXP, (u,))


def ln(u: Expr) -> Expr:
    if u.is_one:
        return ZERO
    if u.kind == EXP and _is_real(u.args[0]):
        return u.args[0]
    if u.kind == POW and _is_positive_base(u.args[0]) and _is_real(u.args[1]):
        return mul(u.args[1], ln(u.args[0]))
    return _node(LN, (u,))


def sin(u: Expr) -> Expr:
    if u.is_zero:
        return ZERO
    return _node(SIN, (u,))


def cos(u: Expr) -> Expr:
    if u.is_zero:
        return ONE
    return _node(COS, (u,))


def _const_times_real(u: Expr):
    """Split u = c*r with c a constant and r structurally real, else None."""
    if u.kind == MUL and u.args[0].kind == CONST:
        rest = mul(*u.args[1:])
        if _is_real(rest):
            return u.args[0].value, rest
    return None


def re_(u: Expr) -> Expr:
    if u.kind == CONST:
        return _node(CONST, (), CRational(u.value.re))
    if _is_real(u):
        return u
    if u.kind == ADD:
        return add(*(re_(a) for a in u.args))
    split = _const_times_real(u)
    if split is not None:
        return mul(_node(CONST, (), CRational(split[0].re)), split[1])
    return _node(RE, (u,))


def im_(u: Expr) -> Expr:
    if u.kind == CONST:
        return _node(CONST, (), CRational(u.value.im))
    if _is_real(u):
        return ZERO
    if u.kind == ADD:
        return add(*(im_(a) for a in u.args))
    split = _const_times_real(u)
    if split is not None:
        return mul(_node(CONST, (), CRational(split[0].im)), split[1])
    return _node(IM, (u,))


def abs_(u: Expr) -> Expr:
    if u is PSI or u is CPSI:
        return RHO_E
    if u.kind == CONST:
        a2 = u.value.abs2()
        root = _exact_root(a2, 2)
        if root is not None:
            return _node(CONST, (), CRational(root))
        return _node(POW, (_node(CONST, (), CRational(a2)), HALF))
    if u.kind in (RHO, ABS):
        return u
    return _node(ABS, (u,))


def conj(u: Expr) -> Expr:
    from .calculus import conjugate
    return conjugate(u)


def func(name: str, *args: Expr, derivs: tuple = None, conjugated: bool = False) -> Expr:
    if derivs is None:
        derivs = (0,) * len(args)
    return _node(FUNC, tuple(args), (name, tuple(derivs), conjugated))


# ---------------------------------------------------------------- predicates
@lru_cache(maxsize=None)
def _is_real(e: Expr) -> bool:
    """Conservative structural reality test (True means certainly real)."""
    k = e.kind
    if k == CONST:
        return e.value.is_real
    if k == SYM:
        return is_real_symbol(e.value)
    if k in (RHO, PHI, ABS, RE, IM):
        return True
    if k in (ADD, MUL):
        return all(_is_real(a) for a in e.args)
    if k in (EXP, SIN, COS):
        return _is_real(e.args[0])
    if k == POW:
        b, ex = e.args
        if _is_real(ex) and _is_positive_base(b):
            return True
        return _is_real(b) and ex.kind == CONST and ex.value.is_integer()
    if k == LN:
        return e.args[0].kind in (RHO, ABS)
    return False


is_real = _is_real


@lru_cache(maxsize=None)
def _free_symbols(e: Expr) -> frozenset:
    if e.kind == SYM:
        return frozenset([e.value])
    if e.kind in (RHO, PHI):
        return frozenset(["psi", "cpsi"])
    out = frozenset()
    for a in e.args:
        out = out | _free_symbols(a)
    if e.kind in (RE, IM, ABS):
        # these nodes hide the conjugate of their argument
        out = out | frozenset(p for p in map(conj_partner, out) if p is not None)
    return out


@lru_cache(maxsize=None)
def func_names(e: Expr) -> frozenset:
    out = frozenset([e.value[0]]) if e.kind == FUNC else frozenset()
    for a in e.args:
        out = out | func_names(a)
    return out


def depends_on(e: Expr, name: str) -> bool:
    return name in _free_symbols(e)


# ---------------------------------------------------------------- rebuild / simplify
_BUILDERS = {
    EXP: exp_, LN: ln, SIN: sin, COS: cos, RE: re_, IM: im_, ABS: abs_,
}


def rebuild(e: Expr, args: tuple, expand: bool = False) -> Expr:
    """Reconstruct a node of e's kind from new children through the constructors."""
    k = e.kind
    if k == ADD:
        return _add(args, expand)
    if k == MUL:
        return _mul(args, expand)
    if k == POW:
        return _power(args[0], args[1], expand)
    if k == CONJ:
        return conj(args[0])
    if k == FUNC:
        return _node(FUNC, tuple(args), e.value)
    if k in _BUILDERS:
        return _BUILDERS[k](args[0])
    return e


@lru_cache(maxsize=200_000)
def simplify(e: Expr) -> Expr:
    """Canonical form: flattened, sorted, constants folded, products expanded over sums,
    like terms collected with exact complex-rational coefficients."""
    if not e.args:
        return e
    args = tuple(simplify(a) for a in e.args)
    out = rebuild(e, args, expand=True)
    if out is not e and out.args and out != e:
        # constructors may expose new structure (e.g. exp(ln u) -> u^c); settle it
        again = rebuild(out, tuple(simplify(a) for a in out.args), expand=True)
        return again
    return out


def raw(kind, args=(), value=None) -> Expr:
    """Node built without canonicalisation (used for desugared forms)."""
    return _node(kind, tuple(args), value)
