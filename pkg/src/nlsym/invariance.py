"""Invariance certificates for i psi_t + Lap psi + F(psi, psi*) = 0.

Two independent routes: the classifying residual (valid on the ansatz manifold) and
the full second prolongation with psi_t eliminated through the equation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .liefield import DefiningReport, VectorField, check_defining_equations
from .symexpr import core as C
from .symexpr import Expr, Sampler, conjugate, differentiate, is_zero, simplify, substitute
from .symexpr.numeric import ZeroTest


class DefiningViolated(ValueError):
    """The field is off the ansatz manifold; the classifying residual is meaningless there."""

    def __init__(self, failures):
        super().__init__(f"defining equations violated: {', '.join(failures)}")
        self.failures = failures


def classifying_residual(F: Expr, Q: VectorField, check: bool = True,
                         sampler: Sampler | None = None) -> Expr:
    """eta F_psi + eta* F_psi* + (xi0_t - eta_psi) F + i eta_t + sum_a eta_aa."""
    if check:
        rep = check_defining_equations(Q, sampler)
        if not rep.ok:
            raise DefiningViolated(rep.failures())
    return simplify(C.add(*classifying_terms(F, Q)))


def classifying_terms(F: Expr, Q: VectorField) -> list:
    """The unsimplified summands of the classifying residual (magnitude scale for tests)."""
    eta = Q.eta
    terms = [
        eta * differentiate(F, "psi"),
        conjugate(eta) * differentiate(F, "cpsi"),
        (differentiate(Q.xi0, "t") - differentiate(eta, "psi")) * F,
        C.I * differentiate(eta, "t"),
    ]
    for a in range(1, Q.n + 1):
        xa = f"x{a}"
        terms.append(differentiate(differentiate(eta, xa), xa))
    return terms


# ------------------------------------------------------------------ prolongation
def _jet(prefix: str, idx: tuple) -> str:
    """Jet symbol for a multi-index over 't' and 1..n (t first, then sorted digits)."""
    ts = "t" * sum(1 for i in idx if i == "t")
    xs = "".join(str(i) for i in sorted(i for i in idx if i != "t"))
    return f"{prefix}_{ts}{xs}"


def _parse_jet(name: str):
    prefix, tail = name.split("_", 1)
    return prefix, tuple(["t"] * tail.count("t") + [int(c) for c in tail if c != "t"])


def _dependent_vars(e: Expr) -> list:
    out = []
    for s in C._free_symbols(e):
        if s in ("psi", "cpsi") or s.startswith("psi_") or s.startswith("cpsi_"):
            out.append(s)
    return sorted(out)


def total_derivative(f: Expr, i) -> Expr:
    """D_i f with i = 't' or a spatial index 1..n."""
    coord = "t" if i == "t" else f"x{i}"
    terms = [differentiate(f, coord)]
    for u in _dependent_vars(f):
        if u in ("psi", "cpsi"):
            ui = _jet(u, (i,))
        else:
            prefix, idx = _parse_jet(u)
            ui = _jet(prefix, idx + (i,))
        terms.append(C.sym(ui) * differentiate(f, u))
    return C.add(*terms)


def prolongation_residual(F: Expr, Q: VectorField, raw: bool = False) -> Expr:
    """pr^(2) Q applied to i psi_t + Lap psi + F, restricted to the equation manifold.

    psi_t and cpsi_t are replaced via the equation and its conjugate; the result lives
    in (t, x, psi, psi*, psi_a, psi_ab, psi_ta, ...).  Works for arbitrary coefficients."""
    return C.add(*prolongation_terms(F, Q, raw))


def prolongation_terms(F: Expr, Q: VectorField, raw: bool = False) -> list:
    """Summands of the prolonged residual, each restricted to the equation manifold."""
    n = Q.n
    psi_t, cpsi_t = C.sym("psi_t"), C.sym("cpsi_t")
    xi = {"t": Q.xi0, **{a: Q.xi[a - 1] for a in range(1, n + 1)}}

    def first(i):
        out = total_derivative(Q.eta, i)
        out = out - psi_t * total_derivative(Q.xi0, i)
        for b in range(1, n + 1):
            out = out - C.sym(_jet("psi", (b,))) * total_derivative(xi[b], i)
        return out

    eta_t = first("t")
    lap = []
    for a in range(1, n + 1):
        ea = first(a)
        s = total_derivative(ea, a) - C.sym(_jet("psi", ("t", a))) * total_derivative(Q.xi0, a)
        for b in range(1, n + 1):
            s = s - C.sym(_jet("psi", (a, b))) * total_derivative(xi[b], a)
        lap.append(s)
    res = [C.I * eta_t, *lap, Q.eta * differentiate(F, "psi"),
           conjugate(Q.eta) * differentiate(F, "cpsi")]
    if raw:
        return res
    lap_psi = C.add(*(C.sym(_jet("psi", (a, a))) for a in range(1, n + 1)))
    lap_cpsi = C.add(*(C.sym(_jet("cpsi", (a, a))) for a in range(1, n + 1)))
    on_shell = {
        "psi_t": C.I * (lap_psi + F),
        "cpsi_t": -C.I * (lap_cpsi + conjugate(F)),
    }
    return [_subst_jets(r, on_shell) for r in res]


def _subst_jets(e: Expr, mapping: dict) -> Expr:
    # psi/cpsi are untouched, so substitute() must not auto-pair them; jets are plain symbols
    return substitute(e, mapping)


# ------------------------------------------------------------------ reports
@dataclass
class VerificationReport:
    defining: dict
    classifying: ZeroTest | None
    prolongation: ZeroTest | None
    samples: int
    tol: float
    notes: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        parts = list(self.defining.values())
        parts += [p for p in (self.classifying, self.prolongation) if p is not None]
        if any(p.verdict == "INDETERMINATE" for p in parts):
            return "INDETERMINATE"
        if self.classifying is None or self.prolongation is None:
            return "FAIL"
        return "PASS" if all(p.is_zero for p in parts) else "FAIL"

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def witnesses(self) -> dict:
        out = {}
        for k, z in [*self.defining.items(), ("classifying", self.classifying),
                     ("prolongation", self.prolongation)]:
            if z is not None and z.witness is not None:
                out[k] = z.as_dict()
        return out

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "samples": self.samples,
            "tol": self.tol,
            "defining": {k: v.verdict for k, v in self.defining.items()},
            "classifying": None if self.classifying is None else self.classifying.as_dict(),
            "prolongation": None if self.prolongation is None else self.prolongation.as_dict(),
            "notes": list(self.notes),
        }


def verify_symmetry(F: Expr, Q: VectorField, sampler: Sampler | None = None,
                    tol: float = 1e-9, prolongation: bool = True) -> VerificationReport:
    """Defining system, classifying residual and prolongation oracle; PASS iff all ZERO."""
    sampler = sampler or Sampler(n=Q.n)
    dr: DefiningReport = check_defining_equations(Q, sampler, tol)
    notes = []
    cls = None
    if dr.ok:
        cls = is_zero(classifying_residual(F, Q, check=False), sampler, tol, salt=1,
                      scale=classifying_terms(F, Q))
    else:
        notes.append("classifying residual skipped: defining equations violated")
    pro = None
    if prolongation:
        jet_sampler = Sampler(**{**sampler.__dict__, "jets": True})
        pieces = prolongation_terms(F, Q)
        pro = is_zero(C.add(*pieces), jet_sampler, tol, salt=2, scale=pieces)
    elif cls is not None:
        pro = cls
    return VerificationReport(dr.results, cls, pro, sampler.samples, tol, notes)
