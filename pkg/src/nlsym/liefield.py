"""Point-symmetry vector fields Q = xi0 d_t + xi^a d_a + eta d_psi + eta* d_psi*.

Only the psi-component eta is stored; the psi*-component is its structural conjugate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .symexpr import core as C
from .symexpr import (Expr, Sampler, as_expr, conjugate, differentiate, eval_batch,
                      is_zero, simplify)
from .symexpr.numeric import ZeroTest, finite_env


@dataclass(frozen=True)
class VectorField:
    n: int
    xi0: Expr
    xi: tuple
    eta: Expr
    label: str = field(default="", compare=False)

    def __post_init__(self):
        if len(self.xi) != self.n:
            raise ValueError(f"need {self.n} spatial components, got {len(self.xi)}")

    @classmethod
    def make(cls, n, xi0=0, xi=None, eta=0, label=""):
        xi = tuple(as_expr(v) for v in (xi if xi is not None else [0] * n))
        return cls(n, as_expr(xi0), xi, as_expr(eta), label)

    @property
    def eta_conj(self) -> Expr:
        return conjugate(self.eta)

    def coordinates(self) -> list:
        return ["t"] + [f"x{a}" for a in range(1, self.n + 1)] + ["psi", "cpsi"]

    def components(self) -> list:
        return [self.xi0, *self.xi, self.eta, self.eta_conj]

    def apply(self, f: Expr) -> Expr:
        """Q(f) = sum_i Q^i df/dz_i."""
        terms = []
        for name, c in zip(self.coordinates(), self.components()):
            if c.is_zero:
                continue
            d = differentiate(f, name)
            if not d.is_zero:
                terms.append(C.mul(c, d))
        return C.add(*terms)

    def simplify(self) -> "VectorField":
        return VectorField(self.n, simplify(self.xi0), tuple(simplify(v) for v in self.xi),
                           simplify(self.eta), self.label)

    def __add__(self, o: "VectorField") -> "VectorField":
        _same_n(self, o)
        return VectorField(self.n, self.xi0 + o.xi0, tuple(a + b for a, b in zip(self.xi, o.xi)),
                           self.eta + o.eta)

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, o):
        return self + (-o)

    def scale(self, c) -> "VectorField":
        """Multiply all components by a real function c (constant or of t, x)."""
        c = as_expr(c)
        return VectorField(self.n, c * self.xi0, tuple(c * v for v in self.xi), c * self.eta)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def with_label(self, label: str) -> "VectorField":
        return VectorField(self.n, self.xi0, self.xi, self.eta, label)

    @property
    def is_structurally_zero(self) -> bool:
        s = self.simplify()
        return s.xi0.is_zero and all(v.is_zero for v in s.xi) and s.eta.is_zero

    def __str__(self):
        from .symexpr import pretty
        parts = []
        if not self.xi0.is_zero:
            parts.append(f"({pretty(self.xi0)})*d_t")
        for a, v in enumerate(self.xi, start=1):
            if not v.is_zero:
                parts.append(f"({pretty(v)})*d_x{a}")
        if not self.eta.is_zero:
            parts.append(f"({pretty(self.eta)})*d_psi + c.c.")
        return " + ".join(parts) or "0"


def _same_n(a, b):
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: n={a.n} vs n={b.n}")


# ------------------------------------------------------------------ catalog
def _xx(n) -> Expr:
    return C.add(*(C.power(C.x(a), C.const(2)) for a in range(1, n + 1)))


class UnknownGenerator(KeyError):
    pass


def _param(params, key, name):
    try:
        return as_expr(params[key])
    except KeyError:
        raise KeyError(f"generator {name} needs parameter {key!r}") from None


def _index(params, key, n, name):
    a = int(params[key]) if key in params else None
    if a is None:
        raise KeyError(f"generator {name} needs index {key!r}")
    if not 1 <= a <= n:
        raise IndexError(f"index {a} out of range 1..{n} for {name}")
    return a


def named_generator(name: str, params: dict | None = None, n: int = 1) -> VectorField:
    """Named operators in the tables' notation.

    Basic: Pt, Pa(a), Jab(a, b), I, M, D, Ga(a), Pi, Sre (d_psi + d_psi*),
    Sim (i(d_psi - d_psi*)).  Families: expI_M(delta, gamma) = e^{delta t}(I + gamma M),
    expM(delta) = e^{delta t} M, expPaM(delta, a) = e^{delta t}(d_a + delta x_a M / 2),
    theta_gen(theta, delta1) = i e^{-delta1 t} theta(x)(d_psi - d_psi*),
    sol_gen(eta0) = eta0 d_psi + c.c., IM(fI, fM) = fI I + fM M.
    """
    p = params or {}
    z = [0] * n
    psi = C.PSI
    if name == "Pt":
        return VectorField.make(n, xi0=1, label="d_t")
    if name == "Pa":
        a = _index(p, "a", n, name)
        xi = list(z)
        xi[a - 1] = 1
        return VectorField.make(n, xi=xi, label=f"d_{a}")
    if name == "Jab":
        a, b = _index(p, "a", n, name), _index(p, "b", n, name)
        if a == b:
            raise ValueError("Jab needs a != b")
        xi = list(z)
        xi[b - 1] = C.x(a)
        xi[a - 1] = -C.x(b)
        return VectorField.make(n, xi=xi, label=f"J_{a}{b}")
    if name == "I":
        return VectorField.make(n, eta=psi, label="I")
    if name == "M":
        return VectorField.make(n, eta=C.I * psi, label="M")
    if name == "D":
        return VectorField.make(n, xi0=C.T, xi=[C.HALF * C.x(a) for a in range(1, n + 1)],
                                label="D")
    if name == "Ga":
        a = _index(p, "a", n, name)
        xi = list(z)
        xi[a - 1] = C.T
        return VectorField.make(n, xi=xi, eta=C.HALF * C.x(a) * C.I * psi, label=f"G_{a}")
    if name == "Pi":
        t = C.T
        eta = C.const(Fraction(-n, 2)) * t * psi + C.const(Fraction(1, 4)) * _xx(n) * C.I * psi
        return VectorField.make(n, xi0=t * t, xi=[t * C.x(a) for a in range(1, n + 1)],
                                eta=eta, label="Pi")
    if name == "Sre":
        return VectorField.make(n, eta=1, label="d_psi+d_psi*")
    if name == "Sim":
        return VectorField.make(n, eta=C.I, label="i(d_psi-d_psi*)")
    if name == "expI_M":
        d, g = _param(p, "delta", name), _param(p, "gamma", name)
        return VectorField.make(n, eta=C.exp_(d * C.T) * (1 + g * C.I) * psi,
                                label="e^{delta t}(I+gamma M)")
    if name == "expM":
        d = _param(p, "delta", name)
        return VectorField.make(n, eta=C.exp_(d * C.T) * C.I * psi, label="e^{delta t}M")
    if name == "expPaM":
        d = _param(p, "delta", name)
        a = _index(p, "a", n, name)
        e = C.exp_(d * C.T)
        xi = list(z)
        xi[a - 1] = e
        return VectorField.make(n, xi=xi, eta=e * C.HALF * d * C.x(a) * C.I * psi,
                                label=f"e^{{delta t}}(d_{a}+delta x_{a} M/2)")
    if name == "theta_gen":
        th = _param(p, "theta", name)
        d1 = as_expr(p.get("delta1", 0))
        return VectorField.make(n, eta=C.I * C.exp_(-d1 * C.T) * th,
                                label="i e^{-delta1 t} theta(x)(d_psi-d_psi*)")
    if name == "sol_gen":
        e0 = _param(p, "eta0", name)
        return VectorField.make(n, eta=e0, label="eta0 d_psi + c.c.")
    if name == "IM":
        fI, fM = as_expr(p.get("fI", 0)), as_expr(p.get("fM", 0))
        return VectorField.make(n, eta=(fI + C.I * fM) * psi, label="fI I + fM M")
    raise UnknownGenerator(f"unknown generator {name!r}")


def kernel_generators(n: int) -> list:
    """Basis of e(1) + e(n): d_t, d_a, J_ab (a < b)."""
    out = [named_generator("Pt", n=n)]
    out += [named_generator("Pa", {"a": a}, n) for a in range(1, n + 1)]
    out += [named_generator("Jab", {"a": a, "b": b}, n)
            for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    return out


def galilei_kernel(n: int) -> list:
    """Extended Galilei algebra <d_t, d_a, J_ab, G_a, M>."""
    return (kernel_generators(n) + [named_generator("Ga", {"a": a}, n) for a in range(1, n + 1)]
            + [named_generator("M", n=n)])


# ------------------------------------------------------------------ ansatz
@dataclass
class AnsatzParams:
    xi0: Expr = C.ZERO
    kappa: Sequence = None
    chi: Sequence = None
    zeta: Expr = C.ZERO
    eta0: Expr = C.ZERO


class NotAntisymmetric(ValueError):
    pass


def from_ansatz(p: AnsatzParams, n: int) -> VectorField:
    """General solution of the determining system:
    xi^a = xi0_t x_a / 2 + kappa_ab x_b + chi^a(t),
    eta = (i/8 xi0_tt x.x + i/2 chi^a_t x_a + zeta(t)) psi + eta0(t, x)."""
    kappa = np.zeros((n, n)) if p.kappa is None else np.asarray(p.kappa, dtype=object)
    for a in range(n):
        for b in range(n):
            if kappa[a][b] != -kappa[b][a]:
                raise NotAntisymmetric(f"kappa[{a + 1}][{b + 1}] != -kappa[{b + 1}][{a + 1}]")
    chi = [as_expr(c) for c in (p.chi if p.chi is not None else [0] * n)]
    xi0 = as_expr(p.xi0)
    xi0_t = differentiate(xi0, "t")
    xi0_tt = differentiate(xi0_t, "t")
    xs = [C.x(a) for a in range(1, n + 1)]
    xi = []
    for a in range(n):
        terms = [C.HALF * xi0_t * xs[a], chi[a]]
        terms += [C.as_expr(_num(kappa[a][b])) * xs[b] for b in range(n)]
        xi.append(C.add(*terms))
    eta1 = C.const(Fraction(1, 8)) * C.I * xi0_tt * _xx(n)
    eta1 = eta1 + C.add(*(C.HALF * C.I * differentiate(chi[a], "t") * xs[a] for a in range(n)))
    eta1 = eta1 + as_expr(p.zeta)
    return VectorField.make(n, xi0=xi0, xi=xi, eta=eta1 * C.PSI + as_expr(p.eta0))


def _num(v):
    if isinstance(v, Expr):
        return v
    v = float(v) if not isinstance(v, (int, Fraction)) else v
    return v


# ------------------------------------------------------------------ determining system
@dataclass
class DefiningReport:
    results: dict

    @property
    def ok(self) -> bool:
        return all(r.is_zero for r in self.results.values())

    def failures(self) -> list:
        return [k for k, r in self.results.items() if not r.is_zero]

    def as_dict(self) -> dict:
        return {k: r.verdict for k, r in self.results.items()}


def defining_equations(Q: VectorField) -> dict:
    """Left-hand sides of the determining system (each must vanish)."""
    n = Q.n
    d = differentiate
    eqs = {
        "xi0_psi": d(Q.xi0, "psi"), "xi0_cpsi": d(Q.xi0, "cpsi"),
        "eta_cpsi": d(Q.eta, "cpsi"), "eta_psipsi": d(d(Q.eta, "psi"), "psi"),
    }
    for a in range(1, n + 1):
        xa = f"x{a}"
        xia = Q.xi[a - 1]
        eqs[f"xi0_{a}"] = d(Q.xi0, xa)
        eqs[f"xi{a}_psi"] = d(xia, "psi")
        eqs[f"xi{a}_cpsi"] = d(xia, "cpsi")
        eqs[f"2eta_{a}psi-i*xi{a}_t"] = 2 * d(d(Q.eta, xa), "psi") - C.I * d(xia, "t")
        eqs[f"2xi{a}_{a}-xi0_t"] = 2 * d(xia, xa) - d(Q.xi0, "t")
        for b in range(a + 1, n + 1):
            eqs[f"xi{a}_{b}+xi{b}_{a}"] = d(xia, f"x{b}") + d(Q.xi[b - 1], xa)
    return eqs


def check_defining_equations(Q: VectorField, sampler: Sampler | None = None,
                             tol: float = 1e-9) -> DefiningReport:
    sampler = sampler or Sampler(n=Q.n)
    return DefiningReport({k: is_zero(v, sampler, tol) for k, v in defining_equations(Q).items()})


# ------------------------------------------------------------------ brackets
def lie_bracket(Q1: VectorField, Q2: VectorField) -> VectorField:
    """[Q1, Q2]^i = Q1(Q2^i) - Q2(Q1^i) over (t, x, psi, psi*)."""
    _same_n(Q1, Q2)
    xi0 = Q1.apply(Q2.xi0) - Q2.apply(Q1.xi0)
    xi = tuple(Q1.apply(b) - Q2.apply(a) for a, b in zip(Q1.xi, Q2.xi))
    eta = Q1.apply(Q2.eta) - Q2.apply(Q1.eta)
    return VectorField(Q1.n, simplify(xi0), tuple(simplify(v) for v in xi), simplify(eta))


# ------------------------------------------------------------------ span
@dataclass
class SpanResult:
    contains: bool
    coefficients: np.ndarray
    max_rel: float
    remainder: VectorField | None = None
    remainder_check: ZeroTest | None = None


def _component_matrix(fields, env, m):
    cols = []
    for Fd in fields:
        comps = [Fd.xi0, *Fd.xi, Fd.eta]
        vals = [np.broadcast_to(eval_batch(c, env), (m,)) for c in comps]
        v = np.concatenate(vals)
        cols.append(np.concatenate([v.real, v.imag]))
    return np.array(cols).T


def _eta_linear_part(Q: VectorField) -> VectorField:
    return VectorField(Q.n, Q.xi0, Q.xi, simplify(differentiate(Q.eta, "psi") * C.PSI))


def span_contains(basis: Sequence[VectorField], Q: VectorField, modulo_solutions: bool = False,
                  F: Expr | None = None, sampler: Sampler | None = None,
                  tol: float = 1e-8) -> SpanResult:
    """Find real constants c with Q - sum c_k B_k = 0 (sampled least squares, then a
    residual test on fresh points).  With modulo_solutions, a remainder eta0 d_psi + c.c.
    whose eta0 solves the equation with nonlinearity F is accepted."""
    sampler = sampler or Sampler(n=Q.n, samples=40)
    use = [_eta_linear_part(B) for B in basis] if modulo_solutions else list(basis)
    target = _eta_linear_part(Q) if modulo_solutions else Q
    rng = sampler.rng(17)
    m = max(sampler.samples, 4 * (len(basis) + 1))
    probe = target
    for B in use:
        probe = probe + B
    env, _ = finite_env(probe.eta + probe.xi0, sampler, rng, m)
    A = _component_matrix(use, env, m) if use else np.zeros((2 * m * (Q.n + 2), 0))
    b = _component_matrix([target], env, m)[:, 0]
    if A.shape[1]:
        coef, *_ = np.linalg.lstsq(A, b, rcond=None)
    else:
        coef = np.zeros(0)
    coef = np.where(np.abs(coef) < 1e-11, 0.0, coef)
    # residual on fresh points
    env2, _ = finite_env(probe.eta + probe.xi0, sampler, sampler.rng(18), m)
    A2 = _component_matrix(use, env2, m) if use else np.zeros((2 * m * (Q.n + 2), 0))
    b2 = _component_matrix([target], env2, m)[:, 0]
    r = b2 - A2 @ coef
    scale = np.abs(b2) + (np.abs(A2) @ np.abs(coef) if use else 0)
    rel = np.abs(r) / (1.0 + scale)
    max_rel = float(rel.max()) if rel.size else 0.0
    contains = max_rel <= tol
    result = SpanResult(contains, coef, max_rel)
    if modulo_solutions and contains:
        rem = Q
        for c, B in zip(coef, basis):
            if c != 0.0:
                rem = rem - B.scale(C.const(float(c)))
        rem = rem.simplify()
        result.remainder = rem
        from .invariance import classifying_residual, classifying_terms
        Fx = as_expr(F if F is not None else 0)
        check = is_zero(classifying_residual(Fx, rem, check=False), sampler, 1e-9,
                        scale=classifying_terms(Fx, rem))
        lin = is_zero(differentiate(rem.eta, "psi"), sampler, 1e-9)
        xi_ok = all(is_zero(v, sampler, 1e-9).is_zero for v in [rem.xi0, *rem.xi])
        result.remainder_check = check
        result.contains = bool(check.is_zero and lin.is_zero and xi_ok)
    return result
