"""Equivalence transformations of the class and their conditional extensions.

Pure transforms: t~ = delta^2 t, x~ = delta x, psi~ = alpha psi + beta, F~ = alpha F / delta^2.
Gauges (applicable only for special F): additive shift by nu0 + nu1 t + nu2 x.x, and
multiplicative time gauges psi~ = psi exp(P(t)).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .liefield import VectorField, named_generator
from .symexpr import core as C
from .symexpr import Expr, Sampler, as_expr, conjugate, differentiate, is_zero, simplify, substitute


class GaugeNotApplicable(ValueError):
    """The transformed nonlinearity still depends on t or x."""


class NotNormalizable(ValueError):
    pass


def _xx(n: int) -> Expr:
    return C.add(*(C.power(C.x(a), C.const(2)) for a in range(1, n + 1)))


def _c(v) -> Expr:
    """Constant Expr from a python number, keeping exact values exact."""
    if isinstance(v, Expr):
        return v
    v = complex(v)
    if v.imag == 0:
        r = v.real
        return C.const(int(r)) if r.is_integer() else C.const(r)
    return C.const(v)


def scale_psi(e: Expr, k: Expr, abs_k: Expr, arg_k: Expr) -> Expr:
    """e with psi -> k psi, taking rho -> |k| rho and phi -> phi + arg k.

    The phase is continued from the identity map instead of re-reduced to the principal
    branch; the two differ by 2 pi multiples only, which no local identity can see."""
    kc = conjugate(k)
    memo: dict = {}

    def go(node):
        hit = memo.get(node)
        if hit is not None:
            return hit
        kind = node.kind
        if kind == C.RHO:
            out = C.mul(abs_k, node)
        elif kind == C.PHI:
            out = C.add(node, arg_k)
        elif kind == C.SYM and node.value == "psi":
            out = C.mul(k, node)
        elif kind == C.SYM and node.value == "cpsi":
            out = C.mul(kc, node)
        elif node.args:
            out = C.rebuild(node, tuple(go(a) for a in node.args))
        else:
            out = node
        memo[node] = out
        return out

    return go(e)


def _depends_on_tx(F: Expr, n: int, sampler: Sampler | None) -> bool:
    sampler = sampler or Sampler(n=n, samples=60)
    for v in ["t"] + [f"x{a}" for a in range(1, n + 1)]:
        if C.depends_on(F, v) and not is_zero(differentiate(F, v), sampler, 1e-9).is_zero:
            return True
    return False


# ------------------------------------------------------------------ pure transforms
@dataclass(frozen=True)
class EquivTransform:
    """(delta, alpha, beta) element of the unconditional equivalence group."""

    delta: float = 1.0
    alpha: complex = 1.0
    beta: complex = 0.0

    def __post_init__(self):
        if not np.isreal(self.delta) or self.delta == 0:
            raise ValueError("delta must be real and nonzero")
        if self.alpha == 0:
            raise ValueError("alpha must be nonzero")

    kind = "pure"

    @property
    def is_identity(self) -> bool:
        return self.delta == 1 and self.alpha == 1 and self.beta == 0

    def compose(self, first: "EquivTransform") -> "EquivTransform":
        """self o first (apply `first`, then self)."""
        return EquivTransform(first.delta * self.delta, self.alpha * first.alpha,
                              self.alpha * first.beta + self.beta)

    def inverse(self) -> "EquivTransform":
        return EquivTransform(1 / self.delta, 1 / self.alpha, -self.beta / self.alpha)

    def old_psi(self) -> Expr:
        """Old psi in terms of the new one."""
        return (C.PSI - _c(self.beta)) * _c(1 / self.alpha)

    def apply_to_F(self, F: Expr, n: int = 1, sampler=None) -> Expr:
        pref = _c(self.alpha / self.delta ** 2)
        if self.beta == 0:
            k = 1 / complex(self.alpha)
            G = scale_psi(F, _c(k), _c(abs(k)), _c(cmath.phase(k)))
        else:
            G = substitute(F, {"psi": self.old_psi()})
        return simplify(pref * G)

    def pushforward(self, Q: VectorField) -> VectorField:
        d, a = self.delta, self.alpha
        mapping = {"t": C.T * _c(1 / d ** 2), "psi": self.old_psi()}
        for i in range(1, Q.n + 1):
            mapping[f"x{i}"] = C.x(i) * _c(1 / d)
        sub = lambda e: simplify(substitute(e, mapping))  # noqa: E731
        return VectorField(Q.n, sub(_c(d ** 2) * Q.xi0), tuple(sub(_c(d) * v) for v in Q.xi),
                           sub(_c(a) * Q.eta), Q.label)

    def transform_quintuple(self, q: Sequence[complex]) -> tuple:
        """Image of a classifying equation (a, b, c, d, e) under the transform."""
        a, b, c, d, e = q
        al, be, de2 = self.alpha, self.beta, self.delta ** 2
        return (a, al * b - a * be, c, d / de2, (al * e - d * be) / de2)

    def map_point(self, t, x, psi, F):
        return (self.delta ** 2 * t, self.delta * np.asarray(x), self.alpha * psi + self.beta,
                self.alpha * F / self.delta ** 2)

    def as_dict(self) -> dict:
        return {"step": "pure", "delta": float(self.delta), "alpha": _cj(self.alpha),
                "beta": _cj(self.beta)}


def _cj(v):
    v = complex(v)
    return float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]


# ------------------------------------------------------------------ gauges
@dataclass(frozen=True)
class ShiftGauge:
    """psi~ = psi + nu0 + nu1 t + nu2 x.x."""

    nu0: complex = 0
    nu1: complex = 0
    nu2: complex = 0
    kind = "shift"

    @property
    def is_identity(self):
        return self.nu0 == 0 and self.nu1 == 0 and self.nu2 == 0

    def s(self, n: int) -> Expr:
        return _c(self.nu0) + _c(self.nu1) * C.T + _c(self.nu2) * _xx(n)

    def compose(self, first: "ShiftGauge") -> "ShiftGauge":
        return ShiftGauge(self.nu0 + first.nu0, self.nu1 + first.nu1, self.nu2 + first.nu2)

    def inverse(self) -> "ShiftGauge":
        return ShiftGauge(-self.nu0, -self.nu1, -self.nu2)

    def apply_to_F(self, F: Expr, n: int = 1, sampler=None) -> Expr:
        s = self.s(n)
        out = _c(-1j * complex(self.nu1) - 2 * n * complex(self.nu2)) \
            + substitute(F, {"psi": C.PSI - s})
        out = simplify(out)
        if _depends_on_tx(out, n, sampler):
            raise GaugeNotApplicable(f"shift {self.as_dict()} leaves t/x dependence")
        return out

    def pushforward(self, Q: VectorField) -> VectorField:
        s = self.s(Q.n)
        eta = Q.eta + Q.xi0 * differentiate(s, "t")
        for a in range(1, Q.n + 1):
            eta = eta + Q.xi[a - 1] * differentiate(s, f"x{a}")
        eta = simplify(substitute(eta, {"psi": C.PSI - s}))
        return VectorField(Q.n, Q.xi0, Q.xi, eta, Q.label)

    def as_dict(self) -> dict:
        return {"step": "shift", "nu0": _cj(self.nu0), "nu1": _cj(self.nu1),
                "nu2": _cj(self.nu2)}


@dataclass(frozen=True)
class TimeGauge:
    """psi~ = psi exp(P(t)) with P(t) = sum_k coeffs[k-1] t^k."""

    coeffs: tuple = ()
    label: str = field(default="time", compare=False)
    kind = "time"

    @property
    def is_identity(self):
        return all(c == 0 for c in self.coeffs)

    def P(self) -> Expr:
        return C.add(*(_c(c) * C.power(C.T, C.const(k)) for k, c in enumerate(self.coeffs, 1)))

    def compose(self, first: "TimeGauge") -> "TimeGauge":
        m = max(len(self.coeffs), len(first.coeffs))
        a = list(self.coeffs) + [0] * (m - len(self.coeffs))
        b = list(first.coeffs) + [0] * (m - len(first.coeffs))
        return TimeGauge(tuple(x + y for x, y in zip(a, b)))

    def inverse(self) -> "TimeGauge":
        return TimeGauge(tuple(-c for c in self.coeffs), self.label)

    def apply_to_F(self, F: Expr, n: int = 1, sampler=None) -> Expr:
        P = self.P()
        reP = C.add(*(_c(complex(c).real) * C.power(C.T, C.const(k))
                      for k, c in enumerate(self.coeffs, 1)))
        imP = C.add(*(_c(complex(c).imag) * C.power(C.T, C.const(k))
                      for k, c in enumerate(self.coeffs, 1)))
        G = scale_psi(F, C.exp_(-P), C.exp_(-reP), -imP)
        out = simplify(-C.I * differentiate(P, "t") * C.PSI + C.exp_(P) * G)
        if _depends_on_tx(out, n, sampler):
            raise GaugeNotApplicable(f"time gauge {self.as_dict()} leaves t dependence")
        return out

    def pushforward(self, Q: VectorField) -> VectorField:
        P = self.P()
        reP = simplify(C.re_(P))
        imP = simplify(C.im_(P))
        eta = scale_psi(Q.eta, C.exp_(-P), C.exp_(-reP), -imP)
        eta = simplify(Q.xi0 * differentiate(P, "t") * C.PSI + C.exp_(P) * eta)
        return VectorField(Q.n, Q.xi0, Q.xi, eta, Q.label)

    def as_dict(self) -> dict:
        return {"step": "time_gauge", "label": self.label,
                "coeffs": [_cj(c) for c in self.coeffs]}


def phase_gauge(sigma1: complex) -> TimeGauge:
    """psi~ = psi exp(i sigma1 t)."""
    return TimeGauge((1j * sigma1,), "phase")


def amp_gauge(s: float) -> TimeGauge:
    """psi~ = psi exp(-s t)."""
    return TimeGauge((-s,), "amplitude")


# ------------------------------------------------------------------ chains
@dataclass
class Chain:
    steps: list = field(default_factory=list)

    def then(self, step) -> "Chain":
        if step is None or step.is_identity:
            return self
        return Chain(self.steps + [step])

    def __add__(self, other: "Chain") -> "Chain":
        return Chain(self.steps + other.steps)

    def inverse(self) -> "Chain":
        return Chain([s.inverse() for s in reversed(self.steps)])

    def apply_to_F(self, F: Expr, n: int = 1, sampler=None) -> Expr:
        for s in self.steps:
            F = s.apply_to_F(F, n, sampler)
        return F

    def pushforward(self, Q: VectorField) -> VectorField:
        for s in self.steps:
            Q = s.pushforward(Q)
        return Q

    def as_list(self) -> list:
        return [s.as_dict() for s in self.steps]

    def __len__(self):
        return len(self.steps)


def apply_to_F(T, F: Expr, n: int = 1, sampler=None) -> Expr:
    """F~ for a pure transform, a gauge or a chain."""
    return T.apply_to_F(F, n, sampler)


def pushforward(T, Q: VectorField) -> VectorField:
    return T.pushforward(Q)


def compose(second, first):
    """second o first.  Pure/pure and same-family gauges stay in their family."""
    if type(second) is type(first) and not isinstance(second, Chain):
        return second.compose(first)
    a = first if isinstance(first, Chain) else Chain([first])
    b = second if isinstance(second, Chain) else Chain([second])
    return a + b


def inverse(T):
    return T.inverse()


def random_transform(rng: np.random.Generator, scale: float = 1.0) -> EquivTransform:
    d = float(rng.uniform(0.5, 2.0)) * (1 if rng.random() < 0.5 else -1)
    r, th = rng.uniform(0.5, 2.0), rng.uniform(-np.pi, np.pi)
    beta = complex(*rng.normal(scale=scale, size=2))
    return EquivTransform(d, complex(r * np.exp(1j * th)), beta)


# ------------------------------------------------------------------ algebra
@dataclass
class EquivGenerator:
    """Generator of the equivalence algebra: a vector field plus its d_F coefficient
    (an Expr in the symbol F)."""

    label: str
    field: VectorField
    F_coef: Expr
    kind: str  # "kernel" or a flow family

    def flow(self, s: float):
        """The one-parameter flow at parameter s as a transform (None for kernel fields)."""
        if self.kind == "dilation":
            return EquivTransform(math.exp(s / 2), 1.0, 0.0)
        if self.kind == "shift_re":
            return EquivTransform(1.0, 1.0, s)
        if self.kind == "shift_im":
            return EquivTransform(1.0, 1.0, 1j * s)
        if self.kind == "scale":
            return EquivTransform(1.0, math.exp(s), 0.0)
        if self.kind == "rotate":
            return EquivTransform(1.0, cmath.exp(1j * s), 0.0)
        return None

    def velocity(self, t, x, psi, F):
        """Right-hand side of the flow ODE at a numeric point."""
        env = {"t": t, "psi": psi, "cpsi": np.conj(psi), "F": F, "cF": np.conj(F)}
        for a, v in enumerate(x, start=1):
            env[f"x{a}"] = v
        from .symexpr import eval_numeric
        ev = lambda e: eval_numeric(e, env)  # noqa: E731
        return (ev(self.field.xi0).real, np.array([ev(v).real for v in self.field.xi]),
                ev(self.field.eta), ev(self.F_coef))


def equivalence_algebra(n: int) -> list:
    F = C.sym("F")
    out = [EquivGenerator("d_t", named_generator("Pt", n=n), C.ZERO, "kernel")]
    out += [EquivGenerator(f"d_{a}", named_generator("Pa", {"a": a}, n), C.ZERO, "kernel")
            for a in range(1, n + 1)]
    out += [EquivGenerator(f"J_{a}{b}", named_generator("Jab", {"a": a, "b": b}, n), C.ZERO,
                           "kernel")
            for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    out += [
        EquivGenerator("D-F d_F", named_generator("D", n=n), -F, "dilation"),
        EquivGenerator("d_psi+d_psi*", named_generator("Sre", n=n), C.ZERO, "shift_re"),
        EquivGenerator("i(d_psi-d_psi*)", named_generator("Sim", n=n), C.ZERO, "shift_im"),
        EquivGenerator("I+F d_F", named_generator("I", n=n), F, "scale"),
        EquivGenerator("M+iF d_F", named_generator("M", n=n), C.I * F, "rotate"),
    ]
    return out


# ------------------------------------------------------------------ normalization
@dataclass
class Normalized:
    F: Expr
    chain: Chain
    case_id: str | None

    def as_dict(self) -> dict:
        from .symexpr import pretty
        return {"F": pretty(self.F), "chain": self.chain.as_list(), "case_id": self.case_id}


def normalize(F: Expr, n: int = 1, sampler: Sampler | None = None) -> Normalized:
    """Canonical representative and the transform chain reaching it.

    Order: shift, then phase/amplitude gauges, then (delta, alpha, beta) rescaling."""
    from .classify.engine import canonical_form
    return canonical_form(F, n, sampler)
