"""Classifying equations (a psi + b) F_psi + (a* psi* + b*) F_psi* + c F + d psi + e = 0.

Detection is numeric: the equation is linear in the ten real unknowns (real and imaginary
parts of a..e), so sampling it at points psi gives a real matrix whose null space is the
set of equations F satisfies.  Every basis element is then re-checked as an identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ..equivalence import EquivTransform
from ..liefield import VectorField
from ..symexpr import core as C
from ..symexpr import Expr, Sampler, conjugate, differentiate, eval_batch, is_zero, simplify
from ..symexpr.numeric import finite_env

RANK_TOL = 1e-10
NULL_TOL = 1e-8


class Unstable(RuntimeError):
    """Null-space dimension changed under resampling."""


class NotReducible(ValueError):
    """A rank-2 pair could not be brought to any canonical Lemma 1 shape."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


def snap(v, tol: float = 1e-9, max_den: int = 64):
    """Round a float (or complex) to a nearby small-denominator rational when within tol."""
    if isinstance(v, complex) or np.iscomplexobj(v):
        v = complex(v)
        return complex(snap(v.real, tol, max_den), snap(v.imag, tol, max_den))
    v = float(v)
    q = Fraction(v).limit_denominator(max_den)
    return float(q) if abs(float(q) - v) <= tol * max(1.0, abs(v)) else v


@dataclass(frozen=True)
class ClassifyingEq:
    a: complex = 0j
    b: complex = 0j
    c: complex = 0j
    d: complex = 0j
    e: complex = 0j

    @classmethod
    def of(cls, q) -> "ClassifyingEq":
        if isinstance(q, ClassifyingEq):
            return q
        return cls(*(complex(v) for v in q))

    @classmethod
    def from_real(cls, v: Sequence[float]) -> "ClassifyingEq":
        v = [float(x) for x in v]
        return cls(*(complex(v[2 * k], v[2 * k + 1]) for k in range(5)))

    def as_tuple(self) -> tuple:
        return (self.a, self.b, self.c, self.d, self.e)

    def as_real(self) -> np.ndarray:
        return np.array([p for z in self.as_tuple() for p in (z.real, z.imag)])

    def __add__(self, o):
        return ClassifyingEq(*(x + y for x, y in zip(self.as_tuple(), o.as_tuple())))

    def scale(self, s: float) -> "ClassifyingEq":
        return ClassifyingEq(*(s * x for x in self.as_tuple()))

    def snapped(self) -> "ClassifyingEq":
        return ClassifyingEq(*(snap(z) for z in self.as_tuple()))

    def transformed(self, T: EquivTransform) -> "ClassifyingEq":
        return ClassifyingEq(*T.transform_quintuple(self.as_tuple()))

    def residual(self, F: Expr) -> Expr:
        """Left-hand side of the equation applied to F."""
        k = lambda z: C.const(complex(z))  # noqa: E731
        a, b, c, d, e = self.as_tuple()
        return simplify(
            (k(a) * C.PSI + k(b)) * differentiate(F, "psi")
            + (k(a.conjugate()) * C.CPSI + k(b.conjugate())) * differentiate(F, "cpsi")
            + k(c) * F + k(d) * C.PSI + k(e))

    def as_dict(self) -> dict:
        return {k: [v.real, v.imag] for k, v in zip("abcde", self.as_tuple())}

    def __str__(self):
        return "(" + ", ".join(_ctext(z) for z in self.as_tuple()) + ")"


def _ctext(z: complex) -> str:
    if z.imag == 0:
        return f"{z.real:.6g}"
    if z.real == 0:
        return f"{z.imag:.6g}i"
    return f"{z.real:.6g}{z.imag:+.6g}i"


# ------------------------------------------------------------------ detection
def _columns(F: Expr, env: dict) -> np.ndarray:
    m = env["psi"].shape[0]
    ev = lambda e: np.broadcast_to(eval_batch(e, env), (m,))  # noqa: E731
    Fv, Fp, Fc = ev(F), ev(differentiate(F, "psi")), ev(differentiate(F, "cpsi"))
    psi, cpsi = env["psi"], env["cpsi"]
    one = np.ones(m, dtype=complex)
    cols = [psi * Fp + cpsi * Fc, 1j * (psi * Fp - cpsi * Fc), Fp + Fc, 1j * (Fp - Fc),
            Fv, 1j * Fv, psi, 1j * psi, one, 1j * one]
    Z = np.stack(cols, axis=1)
    return np.concatenate([Z.real, Z.imag], axis=0)


@dataclass
class QuintupleBasis:
    eqs: list
    singular_values: np.ndarray
    samples: int
    linear: bool
    status: str = "OK"  # OK | DEGENERATE | UNSTABLE
    checks: list = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.eqs)

    def as_dict(self) -> dict:
        return {"k": self.k, "status": self.status, "linear": self.linear,
                "equations": [q.as_dict() for q in self.eqs],
                "singular_values": [float(s) for s in self.singular_values]}


def _null_space(A: np.ndarray, tol: float):
    col = np.linalg.norm(A, axis=0)
    col[col == 0] = 1.0
    rows = np.linalg.norm(A, axis=1)
    rows[rows == 0] = 1.0
    B = (A / rows[:, None]) / col[None, :]
    _, s, Vt = np.linalg.svd(B)
    smax = s[0] if s.size else 1.0
    null = np.sum(s <= tol * smax) + (A.shape[1] - s.size)
    N = Vt[A.shape[1] - null:].T / col[:, None]
    return N, s / smax


def _reduce(N: np.ndarray) -> np.ndarray:
    """Column basis of span(N) with an identity block at pivot rows (reduced echelon)."""
    if N.shape[1] == 0:
        return N
    _, _, piv = _qr_pivots(N.T)
    P = N[piv, :]
    R = N @ np.linalg.inv(P)
    R[np.abs(R) < 1e-12] = 0.0
    return R


def _qr_pivots(M: np.ndarray):
    # greedy column pivoting: pick the largest remaining column each round
    M = M.copy()
    k = M.shape[0]
    piv = []
    for _ in range(k):
        norms = np.linalg.norm(M, axis=0)
        norms[piv] = -1
        j = int(np.argmax(norms))
        piv.append(j)
        v = M[:, j] / np.linalg.norm(M[:, j])
        M = M - np.outer(v, v @ M)
    return None, None, sorted(piv)


def is_linear(F: Expr, sampler: Sampler | None = None, tol: float = 1e-9) -> bool:
    sampler = sampler or Sampler(samples=60)
    p, c = "psi", "cpsi"
    d = differentiate
    return all(is_zero(d(d(F, u), v), sampler, tol, salt=31).is_zero
               for u, v in ((p, p), (p, c), (c, c)))


def satisfied_classifying_eqs(F: Expr, sampler: Sampler | None = None, samples: int = 40,
                              tol: float = NULL_TOL, reseed: int = 1) -> QuintupleBasis:
    """Maximal independent set of classifying equations satisfied by F.

    `reseed` extra independent samplings must reproduce the dimension, else UNSTABLE."""
    base = sampler or Sampler(samples=samples)
    base = Sampler(**{**base.__dict__, "samples": max(samples, 20), "jets": False})
    dims, first = [], None
    for r in range(reseed + 1):
        env, _ = finite_env(F, base, base.rng(101 + r))
        A = _columns(F, env)
        good = np.all(np.isfinite(A), axis=1)
        N, s = _null_space(A[good], tol)
        dims.append(N.shape[1])
        if first is None:
            first = (N, s, int(good.sum()) // 2)
    N, s, m = first
    status = "OK" if len(set(dims)) == 1 else "UNSTABLE"
    R = _reduce(N)
    eqs = [ClassifyingEq.from_real(R[:, j]).snapped() for j in range(R.shape[1])]
    checks = []
    for q in eqs:
        z = is_zero(q.residual(F), base, max(tol, 1e-9), salt=107)
        checks.append(z)
        if not z.is_zero:
            status = "UNSTABLE"
    linear = is_linear(F, base)
    if linear and status == "OK":
        status = "DEGENERATE"
    return QuintupleBasis(eqs, s, m, linear, status, checks)


# ------------------------------------------------------------------ rank and brackets
def pair_matrix(q1: ClassifyingEq, q2: ClassifyingEq) -> np.ndarray:
    return np.array([[q1.a, q1.b, np.conj(q1.a), np.conj(q1.b)],
                     [q2.a, q2.b, np.conj(q2.a), np.conj(q2.b)]], dtype=complex)


def matrix_rank(q1, q2, tol: float = RANK_TOL) -> int:
    """Rank of the 2x4 complex matrix of (a_j, b_j, a_j*, b_j*)."""
    M = pair_matrix(ClassifyingEq.of(q1), ClassifyingEq.of(q2))
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] <= tol:
        return 0
    return int(np.sum(s > tol * max(1.0, s[0])))


def commutator(q1, q2) -> ClassifyingEq:
    """The classifying equation obtained from the commutator of the two first-order
    operators (a_j psi + b_j) d_psi + c.c. acting on F."""
    q1, q2 = ClassifyingEq.of(q1), ClassifyingEq.of(q2)
    a1, b1, c1, d1, e1 = q1.as_tuple()
    a2, b2, c2, d2, e2 = q2.as_tuple()
    return ClassifyingEq(0, a2 * b1 - a1 * b2, 0,
                         -c2 * d1 + c1 * d2 + a1 * d2 - a2 * d1,
                         -c2 * e1 + c1 * e2 + b1 * d2 - b2 * d1)


# ------------------------------------------------------------------ Lemma 1
@dataclass
class Lemma1Result:
    case: int
    R: np.ndarray            # real 2x2 recombination applied first
    transform: EquivTransform
    pair: tuple              # canonical (eq1, eq2)
    constraints: dict

    def apply(self, q1, q2) -> tuple:
        return apply_pair(self.R, self.transform, q1, q2)

    @property
    def tilde(self) -> dict:
        """c~, d~, e~ combinations used in cases 2 and 3."""
        p, q = self.pair
        out = {}
        for k in "cde":
            x1, x2 = getattr(p, k), getattr(q, k)
            out[k + "1"] = (x1 - 1j * x2) / 2
            out[k + "2"] = (x1 + 1j * x2) / 2
        return out

    def as_dict(self) -> dict:
        return {"case": self.case, "R": self.R.tolist(), "transform": self.transform.as_dict(),
                "pair": [q.as_dict() for q in self.pair],
                "constraints": {k: float(v) for k, v in self.constraints.items()}}


def recombine(R, q1, q2) -> tuple:
    v = np.array([ClassifyingEq.of(q1).as_real(), ClassifyingEq.of(q2).as_real()])
    w = np.asarray(R, dtype=float) @ v
    return ClassifyingEq.from_real(w[0]), ClassifyingEq.from_real(w[1])


def apply_pair(R, T: EquivTransform, q1, q2) -> tuple:
    p1, p2 = recombine(R, q1, q2)
    return p1.transformed(T), p2.transformed(T)


def _r2(z: complex) -> np.ndarray:
    return np.array([z.real, z.imag])


def lemma1_canonicalize(q1, q2, tol: float = 1e-8) -> Lemma1Result:
    """Bring a rank-2 pair to one of the three canonical shapes of Lemma 1."""
    q1, q2 = ClassifyingEq.of(q1), ClassifyingEq.of(q2)
    if matrix_rank(q1, q2) != 2:
        raise NotReducible("pair does not have rank 2")
    scale = max(1.0, *(abs(z) for z in q1.as_tuple() + q2.as_tuple()))
    V = np.column_stack([_r2(q1.a), _r2(q2.a)])
    sv = np.linalg.svd(V, compute_uv=False)
    dim_a = int(np.sum(sv > tol * scale))
    if dim_a == 2:
        R = np.linalg.inv(V).T
        p1, p2 = recombine(R, q1, q2)
        beta = p1.b
        if abs(p2.b - 1j * beta) > tol * scale:
            raise NotReducible("b2 != i b1 after normalising a", {"b1": p1.b, "b2": p2.b})
        T = EquivTransform(1.0, 1.0, beta)
        case = 2
    elif dim_a == 1:
        _, _, vt = np.linalg.svd(V)
        mu = vt[-1]
        nu = np.array([-mu[1], mu[0]])
        a1 = nu[0] * q1.a + nu[1] * q2.a
        if abs(a1.imag) > tol * scale * max(1.0, abs(a1)):
            raise NotReducible("the a-coefficients span a non-real line", {"a": a1})
        nu = nu / a1.real
        R = np.array([nu, mu])
        p1, p2 = recombine(R, q1, q2)
        alpha = 1j / p2.b
        T = EquivTransform(1.0, alpha, alpha * p1.b)
        case = 1
    else:
        W = np.column_stack([_r2(q1.b), _r2(q2.b)])
        R = np.linalg.inv(W).T
        T = EquivTransform()
        case = 3
    c1, c2 = apply_pair(R, T, q1, q2)
    c1, c2 = _clean(c1), _clean(c2)
    cons = _constraints(case, c1, c2)
    worst = max((abs(v) for k, v in cons.items() if not k.startswith("nonzero")), default=0.0)
    if worst > 1e-6 * scale:
        raise NotReducible(f"case {case} constraints fail (max residual {worst:.3g})",
                           {"case": case, **{k: complex(v) for k, v in cons.items()}})
    if case == 1 and abs(cons["nonzero(c1,e1)"]) <= tol:
        raise NotReducible("case 1 requires (c1, e1) != (0, 0)")
    return Lemma1Result(case, R, T, (c1, c2), cons)


def _clean(q: ClassifyingEq) -> ClassifyingEq:
    return ClassifyingEq(*(complex(0 if abs(z.real) < 1e-13 else z.real,
                                   0 if abs(z.imag) < 1e-13 else z.imag)
                           for z in q.as_tuple()))


def _constraints(case: int, p: ClassifyingEq, q: ClassifyingEq) -> dict:
    a1, b1, c1, d1, e1 = p.as_tuple()
    a2, b2, c2, d2, e2 = q.as_tuple()
    if case == 1:
        return {"a1-1": a1 - 1, "a2": a2, "b1": b1, "b2-i": b2 - 1j, "c2": c2,
                "i d1 - e2(c1+1)": 1j * d1 - e2 * (c1 + 1), "d2(c1+2)": d2 * (c1 + 2),
                "nonzero(c1,e1)": abs(c1) + abs(e1)}
    if case == 2:
        return {"a1-1": a1 - 1, "a2-i": a2 - 1j, "b1": b1, "b2": b2,
                "d1(c2+a2)-d2(c1+a1)": d1 * (c2 + a2) - d2 * (c1 + a1),
                "c1 e2-c2 e1": c1 * e2 - c2 * e1}
    return {"a1": a1, "a2": a2, "b1-1": b1 - 1, "b2-i": b2 - 1j,
            "d1 c2-d2 c1": d1 * c2 - d2 * c1,
            "b1 d2+c1 e2-b2 d1-c2 e1": b1 * d2 + c1 * e2 - b2 * d1 - c2 * e1}


def canonical_pair(case: int, rng: np.random.Generator) -> tuple:
    """A random pair already in canonical shape `case` (satisfying its constraints)."""
    z = lambda: complex(*rng.normal(size=2))  # noqa: E731
    r = lambda: float(rng.normal())  # noqa: E731
    if case == 1:
        c1, e1, e2 = r(), z(), z()
        d1 = -1j * e2 * (c1 + 1)
        return ClassifyingEq(1, 0, c1, d1, e1), ClassifyingEq(0, 1j, 0, 0, e2)
    if case == 2:
        c1, c2, d1, e1 = z(), z(), z(), z()
        d2 = d1 * (c2 + 1j) / (c1 + 1)
        e2 = c2 * e1 / c1
        return ClassifyingEq(1, 0, c1, d1, e1), ClassifyingEq(1j, 0, c2, d2, e2)
    c1, c2, d1, e1 = z(), z(), z(), z()
    d2 = d1 * c2 / c1
    e2 = (1j * d1 + c2 * e1 - d2) / c1
    return ClassifyingEq(0, 1, c1, d1, e1), ClassifyingEq(0, 1j, c2, d2, e2)


# ------------------------------------------------------------------ minors (8)
def _det3(m) -> Expr:
    return simplify(
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))


def minor_conditions(q1, q2, Q: VectorField) -> tuple:
    """The two third-order minors of the extended matrix, with Q's coefficients inserted."""
    q1, q2 = ClassifyingEq.of(q1), ClassifyingEq.of(q2)
    k = lambda z: C.const(complex(z))  # noqa: E731
    psi, cpsi = C.PSI, C.CPSI
    eta1 = simplify(differentiate(Q.eta, "psi"))
    eta0 = simplify(Q.eta - eta1 * psi)
    xi0_t = differentiate(Q.xi0, "t")

    def rows(q):
        return [k(q.a) * psi + k(q.b), k(np.conj(q.a)) * cpsi + k(np.conj(q.b))]

    r1, r2 = rows(q1), rows(q2)
    r3 = [eta1 * psi + eta0, conjugate(eta1) * cpsi + conjugate(eta0)]

    def lap(f):
        return C.add(*(differentiate(differentiate(f, f"x{a}"), f"x{a}")
                       for a in range(1, Q.n + 1)))

    m1 = [r1 + [k(q1.c)], r2 + [k(q2.c)], r3 + [xi0_t - eta1]]
    last = (C.I * differentiate(eta1, "t") + lap(eta1)) * psi \
        + C.I * differentiate(eta0, "t") + lap(eta0)
    m2 = [r1 + [k(q1.d) * psi + k(q1.e)], r2 + [k(q2.d) * psi + k(q2.e)], r3 + [last]]
    return _det3(m1), _det3(m2)


# ------------------------------------------------------------------ Lemma 2
@dataclass
class Lemma2Verdict:
    k: int
    linear: bool
    holds: bool
    status: str
    note: str = ""

    def as_dict(self) -> dict:
        return {"k": self.k, "linear": self.linear, "holds": self.holds,
                "status": self.status, "note": self.note}


def lemma2_check(F: Expr, sampler: Sampler | None = None) -> Lemma2Verdict:
    """k >= 3 must force linearity; a nonlinear F must report k <= 2."""
    basis = satisfied_classifying_eqs(F, sampler)
    k, lin = basis.k, basis.linear
    holds = lin or k <= 2
    note = ""
    if not holds:
        note = ("nonlinear F satisfies more than two independent equations; the extra ones "
                "cannot all come from symmetry operators (e.g. holomorphic F)")
    return Lemma2Verdict(k, lin, holds, basis.status, note)
