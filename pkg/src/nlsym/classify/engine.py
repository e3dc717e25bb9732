"""End-to-end classification: F -> canonical form -> casebook record -> verified generators."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from ..equivalence import (Chain, EquivTransform, GaugeNotApplicable, Normalized,
                           NotNormalizable, ShiftGauge, TimeGauge, amp_gauge, phase_gauge)
from ..invariance import VerificationReport, verify_symmetry
from ..liefield import VectorField
from ..symexpr import core as C
from ..symexpr import (Expr, Sampler, differentiate, eval_batch, is_zero, parse, pretty,
                       simplify)
from ..symexpr.numeric import finite_env
from .casebook import CaseRecord, record
from .quintuples import (ClassifyingEq, Lemma1Result, NotReducible, QuintupleBasis,
                         lemma1_canonicalize, satisfied_classifying_eqs, snap)

ZERO_TOL = 1e-9       # |x| <= ZERO_TOL counts as zero
BOUNDARY_TOL = 1e-6   # ZERO_TOL < |x| <= BOUNDARY_TOL is flagged as BOUNDARY
FIT_TOL = 1e-8
PATCHES = (0.9 + 0.4j, 1.1 - 0.5j, 0.6 + 0.8j, -0.8 + 0.5j, 1.4 + 0.1j, -0.7 - 0.9j)

THEOREM_MAP = {"T2.7": "Thm.1", "T2.8": "Thm.2", "T2.11": "Thm.3", "T2.12": "Thm.4",
               "T2.1": "Thm.5"}


class UnverifiedMatch(RuntimeError):
    """A casebook pattern matched but a generator failed verification."""

    def __init__(self, case_id, failures):
        super().__init__(f"{case_id}: generators failed verification: {', '.join(failures)}")
        self.case_id = case_id
        self.failures = failures


class NotInClass(ValueError):
    """F depends on t or x, so it is outside the class."""


@dataclass
class ClassifyConfig:
    n: int = 1
    samples: int = 200
    tol: float = 1e-9
    seed: int = 0
    prolongation: bool = True
    verify: bool = True
    theta: tuple = ()   # user witnesses for theta(x), as expression texts

    def sampler(self, **kw) -> Sampler:
        return Sampler(n=self.n, samples=self.samples, seed=self.seed, **kw)


@dataclass
class CanonicalForm:
    case_id: str | None
    params: dict
    chain: Chain
    F: Expr
    k: int
    basis: QuintupleBasis | None = None
    lemma1: Lemma1Result | None = None
    route: str = ""
    notes: list = field(default_factory=list)
    boundary: list = field(default_factory=list)

    def __post_init__(self):
        self.params = {k: v.real if isinstance(v, complex) and v.imag == 0 else v
                       for k, v in self.params.items()}


@dataclass
class GeneratorCheck:
    label: str
    canonical: VectorField
    original: VectorField
    report_canonical: VerificationReport | None
    report_original: VerificationReport | None

    @property
    def verdict(self) -> str:
        reps = [r for r in (self.report_canonical, self.report_original) if r is not None]
        if not reps:
            return "SKIPPED"
        if any(r.verdict == "FAIL" for r in reps):
            return "FAIL"
        if any(r.verdict == "INDETERMINATE" for r in reps):
            return "INDETERMINATE"
        return "PASS"

    def as_dict(self) -> dict:
        out = {"label": self.label, "verdict": self.verdict,
               "canonical_field": str(self.canonical), "original_field": str(self.original)}
        for key, rep in (("canonical", self.report_canonical),
                         ("original", self.report_original)):
            if rep is not None:
                out[key] = _residual_stats(rep)
        return out


def _residual_stats(rep: VerificationReport) -> dict:
    out = {"verdict": rep.verdict, "samples": rep.samples, "tol": rep.tol}
    for name, z in (("classifying", rep.classifying), ("prolongation", rep.prolongation)):
        if z is not None:
            out[name] = {"verdict": z.verdict, "max_abs": z.max_abs, "max_rel": z.max_rel,
                         "structural": z.structural}
            if z.witness is not None:
                out[name]["witness"] = z.as_dict().get("witness")
    return out


@dataclass
class ClassificationResult:
    case_id: str
    status: str                       # VERIFIED | KERNEL_ONLY
    n: int
    F: Expr
    canonical: CanonicalForm
    extension: list
    kernel: list
    infinite: bool = False
    table_case: str | None = None
    notes: list = field(default_factory=list)

    @property
    def params(self) -> dict:
        return self.canonical.params

    @property
    def chain(self) -> Chain:
        return self.canonical.chain

    @property
    def extension_fields(self) -> list:
        return [g.canonical for g in self.extension]

    @property
    def passed(self) -> bool:
        return all(g.verdict in ("PASS", "SKIPPED") for g in self.extension + self.kernel)

    def as_dict(self) -> dict:
        return {
            "case_id": self.case_id,
            "status": self.status,
            "table_case": self.table_case,
            "n": self.n,
            "F": pretty(self.F),
            "canonical_F": pretty(self.canonical.F),
            "params": {k: _jsonable(v) for k, v in self.canonical.params.items()},
            "k": self.canonical.k,
            "lemma1_case": None if self.canonical.lemma1 is None else self.canonical.lemma1.case,
            "route": self.canonical.route,
            "kernel_ops": [g.label for g in self.kernel],
            "extension_ops": [g.label for g in self.extension],
            "infinite_dimensional": self.infinite,
            "normalization_chain": self.canonical.chain.as_list(),
            "verification": {"kernel": [g.as_dict() for g in self.kernel],
                             "extension": [g.as_dict() for g in self.extension]},
            "boundary": list(self.canonical.boundary),
            "notes": list(self.notes) + list(self.canonical.notes),
        }


def _jsonable(v):
    if isinstance(v, C.CRational):
        v = complex(v)
    if isinstance(v, complex):
        return float(v.real) if v.imag == 0 else [float(v.real), float(v.imag)]
    return float(v)


# ------------------------------------------------------------------ small numerics
class _Zero:
    """Zero tests with a BOUNDARY band, collecting diagnostics."""

    def __init__(self):
        self.boundary = []

    def __call__(self, name: str, v) -> bool:
        a = abs(complex(v))
        if a <= ZERO_TOL:
            return True
        if a <= BOUNDARY_TOL:
            self.boundary.append(f"{name}={a:.3g} is within the boundary band; treated as nonzero")
        return False


def _snap_frac(q, tol=1e-12):
    from fractions import Fraction
    r = q.limit_denominator(64)
    return r if abs(r - q) <= tol * max(1, abs(q)) else q


def tidy(F: Expr) -> Expr:
    """Snap float round-off in constants (e.g. 0.9999999999999998) to small rationals."""
    if F.kind == C.CONST:
        v = F.value
        return C.const(C.CRational(_snap_frac(v.re), _snap_frac(v.im)))
    if not F.args:
        return F
    return simplify(C.rebuild(F, tuple(tidy(a) for a in F.args)))


def _patch_sampler(n: int, center: complex, seed: int, samples: int = 60) -> Sampler:
    return Sampler(n=n, samples=samples, seed=seed, psi_center=center, psi_radius=0.2)


def fit(F: Expr, basis: list, n: int, seed: int = 0):
    """Complex least squares F ~ sum c_j basis_j on a local patch of psi.

    Tries several patches (branch cuts of F may cross some of them); returns
    (coefficients, relative residual, patch centre)."""
    best = None
    for center in PATCHES:
        s = _patch_sampler(n, center, seed)
        probe = C.add(F, *basis)
        env, _ = finite_env(probe, s, s.rng(3))
        m = env["psi"].shape[0]
        y = np.broadcast_to(eval_batch(F, env), (m,))
        A = np.stack([np.broadcast_to(eval_batch(b, env), (m,)) for b in basis], axis=1)
        ok = np.isfinite(y) & np.all(np.isfinite(A), axis=1)
        if ok.sum() < len(basis) + 5:
            continue
        coef, *_ = np.linalg.lstsq(A[ok], y[ok], rcond=None)
        r = y[ok] - A[ok] @ coef
        rel = float(np.max(np.abs(r)) / (1 + np.max(np.abs(y[ok]))))
        if best is None or rel < best[1]:
            best = (coef, rel, center)
        if rel <= FIT_TOL:
            break
    if best is None:
        raise NotReducible("no patch where F is finite")
    return best


def agree_on_patch(F1: Expr, F2: Expr, n: int, seed: int = 0) -> bool:
    for center in PATCHES:
        z = is_zero(F1 - F2, _patch_sampler(n, center, seed), 1e-8, salt=5)
        if z.is_zero:
            return True
    return False


def _check_in_class(F: Expr, n: int):
    bad = [v for v in ["t"] + [f"x{a}" for a in range(1, n + 1)] if C.depends_on(F, v)]
    if bad:
        s = Sampler(n=n, samples=40)
        if any(not is_zero(differentiate(F, v), s).is_zero for v in bad):
            raise NotInClass(f"F depends on {', '.join(bad)}")
    if C.func_names(F):
        raise NotInClass("F contains uninstantiated function symbols; supply a witness")


# ------------------------------------------------------------------ linear case
def _linear(F: Expr, n: int, zero: _Zero, seed: int) -> CanonicalForm:
    s = Sampler(n=n, samples=20, seed=seed)
    env = s.draw(s.rng(9))
    s1 = complex(np.mean(eval_batch(differentiate(F, "psi"), env)))
    s2 = complex(np.mean(eval_batch(differentiate(F, "cpsi"), env)))
    s0 = complex(np.mean(eval_batch(F - C.const(s1) * C.PSI - C.const(s2) * C.CPSI, env)))
    s0, s1, s2 = snap(s0), snap(s1), snap(s2)
    chain = Chain()
    notes = []
    if not zero("sigma0", s0):
        L = np.array([[s1.real + s2.real, -s1.imag + s2.imag],
                      [s1.imag + s2.imag, s1.real - s2.real]])
        J = np.array([[0.0, -1.0], [1.0, 0.0]])
        Z = np.zeros((2, 2))
        A = np.block([[Z, L, Z], [Z, Z, L], [L, J, 2 * n * np.eye(2)]])
        rhs = np.array([0, 0, 0, 0, s0.real, s0.imag])
        nu, *_ = np.linalg.lstsq(A, rhs, rcond=None)
        if np.max(np.abs(A @ nu - rhs)) > 1e-10:
            raise NotReducible("constant term of linear F cannot be removed")
        nu = [snap(complex(nu[2 * k], nu[2 * k + 1])) for k in range(3)]
        chain = chain.then(ShiftGauge(*nu))
    if zero("sigma2", s2):
        chain = chain.then(phase_gauge(-s1))
        case, params = "T2.1", {}
    else:
        chain = chain.then(amp_gauge(-s1.imag))
        alpha = cmath.exp(-0.5j * cmath.phase(s2))
        chain = chain.then(EquivTransform(math.sqrt(abs(s2)), snap(alpha), 0))
        case, params = "T2.2", {"gamma": snap(s1.real / abs(s2))}
    return CanonicalForm(case, params, chain, tidy(chain.apply_to_F(F, n)), 3, route="linear",
                         notes=notes)


# ------------------------------------------------------------------ k = 1 families
_T1_ORDER = ("T1.1", "T1.2", "T1.3/4", "T1.5", "T1.6")


def _lin_rows(case: str, eqs: list) -> list:
    """Real linear constraints on the combination weights mu for one Table 1 branch."""
    get = lambda k: np.array([getattr(q, k) for q in eqs])  # noqa: E731
    a, b, c, d, e = (get(k) for k in "abcde")
    rows = []

    def cz(v):  # complex quantity must vanish
        rows.extend([v.real, v.imag])

    if case == "T1.1":
        cz(d), cz(e), rows.append((c + a).imag)
    elif case == "T1.2":
        cz(c + a)
    elif case == "T1.3/4":
        cz(c + a), rows.append(a.real), rows.append(d.imag)
    elif case == "T1.5":
        cz(a), cz(d), cz(e), rows.append(c.imag)
    elif case == "T1.6":
        cz(a), cz(d), cz(c)
    return rows


def _quad_forms(case: str, eqs: list) -> list:
    if case not in ("T1.2", "T1.3/4"):
        return []
    k = len(eqs)
    forms = [np.zeros((k, k)) for _ in range(3)]
    for i, p in enumerate(eqs):
        for j, q in enumerate(eqs):
            forms[0][i, j] = (p.d * np.conj(q.a)).real
            w = p.e * q.a - p.d * q.b
            forms[1][i, j], forms[2][i, j] = w.real, w.imag
    forms = [(A + A.T) / 2 for A in forms]
    if case == "T1.3/4":
        forms = forms[1:]
    return forms


def _nonzero_ok(case: str, q: ClassifyingEq, zero: _Zero) -> bool:
    if case in ("T1.1", "T1.2", "T1.3/4") and zero("a", q.a):
        return False
    if case == "T1.1" and zero("c+a", q.c + q.a):
        return False
    if case == "T1.2" and zero("Re a", q.a.real):
        return False
    if case in ("T1.5", "T1.6") and zero("b", q.b):
        return False
    if case == "T1.5" and zero("c", q.c):
        return False
    return True


def _null(rows: list, k: int) -> np.ndarray:
    if not rows:
        return np.eye(k)
    A = np.array(rows, dtype=float)
    scale = max(1.0, np.abs(A).max())
    _, s, vt = np.linalg.svd(A / scale)
    rank = int(np.sum(s > 1e-9))
    return vt[rank:].T


def _angles(A: np.ndarray) -> list | None:
    """Directions (cos t, sin t) with [cos sin] A [cos sin]^T = 0; None means all."""
    p, q, r = A[0, 0], 2 * A[0, 1], A[1, 1]
    if max(abs(p), abs(q), abs(r)) <= 1e-12:
        return None
    out = []
    if abs(r) <= 1e-12:
        out.append(math.pi / 2)  # sin^2 coefficient vanishes: cos t = 0 is a root
        if abs(q) > 1e-12:
            out.append(math.atan2(-p, q))
        return out
    disc = q * q - 4 * p * r
    if disc < -1e-12:
        return []
    for sgn in (1, -1):
        u = (-q + sgn * math.sqrt(max(disc, 0.0))) / (2 * r)  # u = cot? no: tan t
        out.append(math.atan(u))
    return out


def _solve_quadratic(S: np.ndarray, forms: list) -> list:
    """Candidate weight vectors in span(S) annihilating all quadratic forms."""
    k = S.shape[1]
    if k == 0:
        return []
    cands = []
    subspaces = [S[:, [i]] for i in range(k)]
    subspaces += [S[:, [i, j]] for i in range(k) for j in range(i + 1, k)]
    for B in subspaces:
        if B.shape[1] == 1:
            v = B[:, 0]
            if all(abs(v @ A @ v) <= 1e-9 * (1 + np.abs(A).max()) for A in forms):
                cands.append(v)
            continue
        thetas = None
        for A in forms:
            Ar = B.T @ A @ B
            # roots of p c^2 + q c s + r s^2 with t = tan(theta): r t^2 + q t + p = 0
            roots = _angles(Ar)
            if roots is None:
                continue
            thetas = roots if thetas is None else [t for t in thetas
                                                   if any(_same_dir(t, u) for u in roots)]
        if thetas is None:
            thetas = [0.3]  # every direction works; pick a generic one
        for t in thetas:
            v = B @ np.array([math.cos(t), math.sin(t)])
            if all(abs(v @ A @ v) <= 1e-9 * (1 + np.abs(A).max()) for A in forms):
                cands.append(v)
    return cands


def _same_dir(t: float, u: float) -> bool:
    d = (t - u) % math.pi
    return min(d, math.pi - d) < 1e-7


def t1_candidates(eqs: list, zero: _Zero | None = None) -> list:
    """Realizable single equations in span(eqs), as (branch, ClassifyingEq) in table order."""
    zero = zero or _Zero()
    k = len(eqs)
    out = []
    for case in _T1_ORDER:
        S = _null(_lin_rows(case, eqs), k)
        if S.shape[1] == 0:
            continue
        forms = _quad_forms(case, eqs)
        if forms:
            cands = _solve_quadratic(S, forms)
        else:
            w = np.array([1.0, 0.618, 0.414, 0.302, 0.236, 0.191][:S.shape[1]])
            cands = [S[:, 0]] if S.shape[1] == 1 else [S @ w, S[:, 0]]
        for mu in cands:
            q = ClassifyingEq(*(sum(m * getattr(p, kk) for m, p in zip(mu, eqs))
                                for kk in "abcde"))
            q = _normalise_eq(q)
            if _nonzero_ok(case, q, zero):
                out.append((case, q))
                break
    return out


def _normalise_eq(q: ClassifyingEq) -> ClassifyingEq:
    s = max(abs(z) for z in q.as_tuple())
    return q.scale(1.0 / s) if s > 0 else q


def _t1_build(case: str, q: ClassifyingEq, F: Expr, n: int, zero: _Zero) -> CanonicalForm:
    a, b, c, d, e = q.as_tuple()
    chain = Chain()
    if case in ("T1.1", "T1.2", "T1.3/4"):
        beta = snap(b / a)
        chain = chain.then(EquivTransform(1.0, 1.0, beta))
        if case == "T1.1":
            lam = -(c + a).real / abs(a) ** 2
            g = snap(lam * a)
            params = {"gamma1": g.real, "gamma2": g.imag}
        elif case == "T1.2":
            params = {"gamma": snap(a.imag / a.real), "delta": snap((d / a).imag)}
        else:
            dd = snap((d / a.imag).real)
            if zero("delta", dd):
                case, params = "T1.4", {}
            else:
                case, params = "T1.3", {"delta": -dd}
    else:
        if case == "T1.5":
            q = q.scale(1.0 / c.real)
            b = q.b
        if case == "T1.6":
            # real rescalings of Re psi stay inside the row; |b| = 1, Im b > 0 picks one
            s = 1.0 / abs(b)
            if (b * s).imag < -1e-12 or (abs((b * s).imag) <= 1e-12 and b.real < 0):
                s = -s
            q = q.scale(s)
            b = q.b
        alpha = snap(1j / b)
        chain = chain.then(EquivTransform(1.0, alpha, 0.0))
        if case == "T1.6":
            e1 = snap(alpha * q.e)
            params = {"delta1": e1.real, "delta2": e1.imag}
        else:
            params = {}
    return CanonicalForm(case, params, chain, tidy(chain.apply_to_F(F, n)), 1, route="k1:" + case)


# ------------------------------------------------------------------ k = 2 families
def _kill_constant_re(kappa: complex, n: int) -> ShiftGauge:
    """Imaginary shift psi~ = psi + nu1 t + nu2 x.x removing a constant from F(Re psi)."""
    return ShiftGauge(0, snap(-1j * kappa.real), snap(1j * kappa.imag / (2 * n)))


def _case1(r: Lemma1Result, F: Expr, n: int, zero: _Zero, seed: int):
    p, q = r.pair
    if not (zero("d1", p.d) and zero("d2", q.d) and zero("e2", q.e) and zero("Im c1", p.c.imag)):
        return None, "case 1 without extension (needs d1=d2=e2=0, c1 real)"
    c1 = snap(p.c.real)
    if zero("c1+1", c1 + 1):
        return None, "case 1 with c1 = -1"
    chain = Chain().then(r.transform)
    F1 = chain.apply_to_F(F, n)
    u = C.re_(C.PSI)
    if zero("c1", c1):
        base, gamma = C.ln(C.abs_(u)), None
    else:
        gamma = snap(-c1)
        base = C.power(C.abs_(u), C.const(gamma))
    (sigma, kappa), rel, _ = fit(F1, [base, C.ONE], n, seed)
    if rel > FIT_TOL:
        return None, f"case 1 fit failed (residual {rel:.2g})"
    sigma, kappa = snap(complex(sigma)), snap(complex(kappa))
    if not zero("kappa", kappa):
        chain = chain.then(_kill_constant_re(kappa, n))
    # alpha = -1 flips the sign of sigma here; pick Re sigma > 0 (or Im sigma > 0)
    flip = sigma.real < -ZERO_TOL or (abs(sigma.real) <= ZERO_TOL and sigma.imag < 0)
    chain = chain.then(EquivTransform(math.sqrt(abs(sigma)), -1.0 if flip else 1.0, 0.0))
    unit = snap((-sigma if flip else sigma) / abs(sigma))
    if gamma is None:
        return ("T2.4", {"sigma": unit}, chain), ""
    return ("T2.3", {"sigma": unit, "gamma": gamma}, chain), ""


def _log_gauge(A: complex, B: complex, kappa: complex):
    """Polynomial P(t) = x0 + x1 t + x2 t^2 (as (p, q) pairs) with
    -i P' - A Re P - B Im P + kappa = 0."""
    M = np.array([[-A.imag, -B.imag], [A.real, B.real]])
    cvec = np.array([kappa.imag, -kappa.real])
    Z, I2 = np.zeros((2, 2)), np.eye(2)
    # unknowns (x0, x1, x2): M x2 = 0, M x1 - 2 x2 = 0, M x0 - x1 = -c
    K = np.block([[Z, Z, M], [Z, M, -2 * I2], [M, -I2, Z]])
    rhs = np.concatenate([np.zeros(4), -cvec])
    x, *_ = np.linalg.lstsq(K, rhs, rcond=None)
    if np.max(np.abs(K @ x - rhs)) > 1e-9:
        raise NotReducible("no polynomial gauge removes the constant")
    return [complex(snap(x[2 * j]), snap(x[2 * j + 1])) for j in range(3)]


def _case2(r: Lemma1Result, F: Expr, n: int, zero: _Zero, seed: int):
    p, q = r.pair
    tl = r.tilde
    chain = Chain().then(r.transform)
    if not (zero("e1~", tl["e1"]) and zero("e2~", tl["e2"])):
        return None, "case 2 with e~ != 0 has no extension"
    F1 = chain.apply_to_F(F, n)
    if zero("c1~+1", tl["c1"] + 1) and zero("c2~", tl["c2"]):
        A, B = snap(-p.d), snap(-q.d)
        psi = C.PSI
        rest = simplify(F1 - (C.const(A) * C.ln(C.RHO_E) + C.const(B) * C.PHI_E) * psi)
        (kappa,), rel, _ = fit(rest, [psi], n, seed)
        if rel > FIT_TOL:
            return None, f"log family fit failed (residual {rel:.2g})"
        kappa = snap(complex(kappa))
        if not zero("kappa", kappa):
            x0, x1, x2 = _log_gauge(A, B, kappa)
            if not zero("x0", x0):
                chain = chain.then(EquivTransform(1.0, snap(cmath.exp(x0)), 0.0))
            chain = chain.then(TimeGauge((x1, x2), "log-constant"))
        d = {"delta1": snap(p.d.real), "delta2": snap(p.d.imag),
             "delta3": snap(-q.d.real), "delta4": snap(q.d.imag)}
        s = max(abs(v) for v in d.values())
        if s == 0:
            return None, "log family with all delta zero is linear"
        if abs(s - 1) > 1e-15:
            chain = chain.then(EquivTransform(math.sqrt(s), 1.0, 0.0))
            d = {k: snap(v / s) for k, v in d.items()}
        d1, d2, d3, d4 = (d[f"delta{j}"] for j in range(1, 5))
        if zero("delta4", d4):
            d["delta4"] = 0.0
            if not zero("delta3", d3):
                case = "T2.10" if zero("delta2-delta3", d2 - d3) else "T2.9"
                if case == "T2.10":
                    d["delta2"] = d3
            else:
                d["delta3"] = 0.0
                case = "T2.12" if zero("delta2", d2) else "T2.11"
                if case == "T2.12":
                    d["delta2"] = 0.0
        else:
            Delta = (d2 - d3) ** 2 - 4 * d1 * d4
            if zero("Delta", Delta):
                case = "T2.15"
                d["delta1"] = (d2 - d3) ** 2 / (4 * d4)
            else:
                case = "T2.13" if Delta > 0 else "T2.14"
        return (case, d, chain), ""
    if zero("c1~+1-conj(c2~)", tl["c1"] + 1 - np.conj(tl["c2"])) and not zero("c2~", tl["c2"]):
        g1, g2 = snap(-2 * tl["c2"].real), snap(-2 * tl["c2"].imag)
        g2 = 0.0 if zero("gamma2", g2) else g2
        base = C.power(C.RHO_E, C.const(g1)) * C.exp_(C.const(g2) * C.PHI_E) * C.PSI
        (sigma, m), rel, _ = fit(F1, [base, C.PSI], n, seed)
        if rel > FIT_TOL:
            return None, f"power family fit failed (residual {rel:.2g})"
        sigma, m = snap(complex(sigma)), snap(complex(m))
        if not zero("m", m):
            if not zero("gamma1 Im m - gamma2 Re m", g1 * m.imag - g2 * m.real):
                return None, "linear term m psi is not removable by a time gauge"
            chain = chain.then(TimeGauge((snap(-1j * m),), "linear-term"))
        chain = chain.then(EquivTransform(math.sqrt(abs(sigma)), 1.0, 0.0))
        unit = snap(sigma / abs(sigma))
        if g2 != 0.0:
            return ("T2.6", {"sigma": unit, "gamma1": g1, "gamma2": g2}, chain), ""
        if zero("gamma-4/n", g1 - 4 / n):
            return ("T2.8", {"sigma": unit}, chain), ""
        return ("T2.7", {"sigma": unit, "gamma": g1}, chain), ""
    return None, "case 2 outside both the logarithmic and the power branch"


def _case3(r: Lemma1Result, F: Expr, n: int, zero: _Zero, seed: int):
    p, q = r.pair
    if not (zero("d1", p.d) and zero("d2", q.d) and zero("Im c1", p.c.imag)
            and zero("Im c2", q.c.imag)):
        return None, "case 3 without extension (needs d=0, c1, c2 real)"
    tc1 = r.tilde["c1"]
    if zero("c~", tc1):
        return None, "case 3 with c~ = 0"
    chain = Chain().then(r.transform).then(EquivTransform(1.0, snap(-2 * tc1), 0.0))
    F1 = chain.apply_to_F(F, n)
    (sigma, kappa), rel, _ = fit(F1, [C.exp_(C.re_(C.PSI)), C.ONE], n, seed)
    if rel > FIT_TOL:
        return None, f"exponential fit failed (residual {rel:.2g})"
    sigma, kappa = snap(complex(sigma)), snap(complex(kappa))
    if not zero("kappa", kappa):
        chain = chain.then(_kill_constant_re(kappa, n))
    chain = chain.then(EquivTransform(math.sqrt(abs(sigma)), 1.0, 0.0))
    return ("T2.5", {"sigma": snap(sigma / abs(sigma))}, chain), ""


# ------------------------------------------------------------------ canonical form
def _pattern_ok(cf: CanonicalForm, n: int, seed: int) -> bool:
    """Does the transformed F agree with the record pattern?  On success the pattern
    instance replaces cf.F, so the report shows sigma |Re psi|^gamma rather than the
    literal image with scale factors left inside re() and abs()."""
    rec = record(cf.case_id, n)
    if rec.has_f:
        return True
    pat = rec.instantiate_F(rec_values(rec, cf.params))
    if not agree_on_patch(cf.F, pat, n, seed):
        return False
    cf.F = tidy(pat)
    return True


def rec_values(rec: CaseRecord, params: dict) -> dict:
    """Full parameter dict for a record: fixed values filled in, exact where possible."""
    from fractions import Fraction
    vals = {}
    for name, spec in rec.params:
        if "value" in spec:
            vals[name] = Fraction(spec["value"])
    for k, v in params.items():
        vals[k] = _exact(v)
    from .casebook import evaluate
    for name, spec in rec.params:
        if "expr" in spec and name not in vals:
            vals[name] = evaluate(spec["expr"], vals, rec.n)
    return vals


def _exact(v):
    from fractions import Fraction
    if isinstance(v, complex):
        if v.imag == 0:
            v = v.real
        else:
            return C.CRational(Fraction(v.real), Fraction(v.imag))
    return Fraction(v)


def _canonical(F: Expr, n: int, seed: int = 0, sampler: Sampler | None = None) -> CanonicalForm:
    _check_in_class(F, n)
    zero = _Zero()
    sampler = sampler or Sampler(n=n, seed=seed)
    basis = satisfied_classifying_eqs(F, Sampler(n=n, samples=40, seed=seed))
    if basis.status == "UNSTABLE":
        basis = satisfied_classifying_eqs(F, Sampler(n=n, samples=160, seed=seed + 1), reseed=2)
    if basis.linear:
        cf = _linear(F, n, zero, seed)
        cf.basis, cf.k, cf.boundary = basis, basis.k, zero.boundary
        return cf
    notes = []
    if basis.status == "UNSTABLE":
        notes.append("classifying-equation count unstable under resampling")
    k = basis.k
    if k >= 3:
        notes.append(f"nonlinear F satisfies {k} independent classifying equations; "
                     "searching for operator-realizable ones")
    lem = None
    if k == 2:
        try:
            lem = lemma1_canonicalize(*basis.eqs)
        except NotReducible as exc:
            notes.append(f"Lemma 1: {exc}")
        if lem is not None:
            handler = {1: _case1, 2: _case2, 3: _case3}[lem.case]
            try:
                got, why = handler(lem, F, n, zero, seed)
            except (NotReducible, GaugeNotApplicable) as exc:
                got, why = None, str(exc)
            if got is not None:
                case, params, chain = got
                cf = CanonicalForm(case, params, chain, tidy(chain.apply_to_F(F, n)), k, basis, lem,
                                   route=f"k2:lemma1-case{lem.case}", notes=notes,
                                   boundary=zero.boundary)
                if _pattern_ok(cf, n, seed):
                    return cf
                notes.append(f"{case}: canonical F does not match the pattern")
            else:
                notes.append(why)
    for case, q in t1_candidates(basis.eqs, zero) if k >= 1 else []:
        try:
            cf = _t1_build(case, q, F, n, zero)
        except (NotReducible, GaugeNotApplicable) as exc:
            notes.append(str(exc))
            continue
        cf.k, cf.basis, cf.lemma1 = k, basis, lem
        cf.notes, cf.boundary = notes, zero.boundary
        return cf
    return CanonicalForm(None, {}, Chain(), F, k, basis, lem, route="kernel", notes=notes,
                         boundary=zero.boundary)


def canonical_form(F: Expr, n: int = 1, sampler: Sampler | None = None) -> Normalized:
    """Canonical representative of F (see `equivalence.normalize`)."""
    seed = sampler.seed if sampler is not None else 0
    cf = _canonical(F, n, seed)
    if cf.case_id is None:
        raise NotNormalizable("no normalization rule applies; F has the kernel only")
    return Normalized(cf.F, cf.chain, cf.case_id)


# ------------------------------------------------------------------ verification
def _generators(rec: CaseRecord, params: dict, theta: tuple = ()) -> list:
    vals = rec_values(rec, params)
    combos = rec.slot_witnesses(vals)
    if theta and "theta" in rec.slots:
        combos = [({"theta": s}, None, {"theta": parse(s, rec.n)}) for s in theta]
    out = []
    multi = len(combos) > 1
    for desc, _, slots in combos:
        for Q in rec.build_generators(vals, slots):
            if multi and any(s in Q.label for s in ("theta", "eta0")):
                tag = ", ".join(f"{k}={v}" for k, v in desc.items() if k != "f")
                Q = Q.with_label(f"{Q.label} [{tag}]")
            if all(Q.label != g.label for g in out):
                out.append(Q)
    return out


def _check(label, Qc, chain: Chain, Fc, F, cfg: ClassifyConfig, sampler) -> GeneratorCheck:
    Qo = chain.inverse().pushforward(Qc) if len(chain) else Qc
    if not cfg.verify:
        return GeneratorCheck(label, Qc, Qo, None, None)
    rc = verify_symmetry(Fc, Qc, sampler, cfg.tol, cfg.prolongation)
    ro = verify_symmetry(F, Qo, sampler, cfg.tol, cfg.prolongation) if len(chain) else rc
    return GeneratorCheck(label, Qc, Qo, rc, ro)


def _kernel_checks(kernel: list, F: Expr, cfg: ClassifyConfig, sampler) -> list:
    out = []
    for Q in kernel:
        rep = verify_symmetry(F, Q, sampler, cfg.tol, cfg.prolongation) if cfg.verify else None
        out.append(GeneratorCheck(Q.label, Q, Q, rep, None))
    return out


def _finish(F: Expr, cf: CanonicalForm, rec: CaseRecord | None, case_id: str, kernel: list,
            cfg: ClassifyConfig, table_case=None) -> ClassificationResult:
    sampler = cfg.sampler()
    kern = _kernel_checks(kernel, F, cfg, sampler)
    if rec is None:
        return ClassificationResult("KERNEL_ONLY", "KERNEL_ONLY", cfg.n, F, cf, [], kern,
                                    table_case=table_case)
    ext = [_check(Q.label, Q, cf.chain, cf.F, F, cfg, sampler)
           for Q in _generators(rec, cf.params, tuple(cfg.theta))]
    failures = [g.label for g in ext + kern if g.verdict == "FAIL"]
    if failures:
        raise UnverifiedMatch(case_id, failures)
    return ClassificationResult(case_id, "VERIFIED", cfg.n, F, cf, ext, kern, rec.infinite,
                                table_case=table_case)


def _as_F(F, n: int, params: dict | None) -> Expr:
    if isinstance(F, str):
        F = parse(F, n)
    if params:
        from ..symexpr import substitute
        F = simplify(substitute(F, {k: C.const(v) if not isinstance(v, Expr) else v
                                    for k, v in params.items()}))
    return F


def classify(F, n: int = 1, params: dict | None = None,
             config: ClassifyConfig | None = None) -> ClassificationResult:
    """Maximal Lie invariance algebra of i psi_t + Lap psi + F = 0, verified."""
    cfg = config or ClassifyConfig(n=n)
    if cfg.n != n:
        cfg = ClassifyConfig(**{**cfg.__dict__, "n": n})
    F = _as_F(F, n, params)
    cf = _canonical(F, n, cfg.seed)
    if cf.case_id is None:
        from ..liefield import kernel_generators
        return _finish(F, cf, None, "KERNEL_ONLY", kernel_generators(n), cfg)
    rec = record(cf.case_id, n)
    return _finish(F, cf, rec, cf.case_id, rec.kernel(), cfg)


def subclass_classify(f, n: int = 1, params: dict | None = None,
                      config: ClassifyConfig | None = None) -> ClassificationResult:
    """Classification within F = f(|psi|) psi, reported in the Theorem's case numbering."""
    cfg = config or ClassifyConfig(n=n)
    if cfg.n != n:
        cfg = ClassifyConfig(**{**cfg.__dict__, "n": n})
    f = _as_F(f, n, params)
    M = C.I * (C.PSI * differentiate(f, "psi") - C.CPSI * differentiate(f, "cpsi"))
    if not is_zero(M, Sampler(n=n, samples=60)).is_zero:
        raise NotInClass("f must depend on psi only through |psi|")
    F = simplify(f * C.PSI)
    cf = _canonical(F, n, cfg.seed)
    from ..liefield import galilei_kernel
    table = cf.case_id
    if table in THEOREM_MAP:
        thm = record(THEOREM_MAP[table], n)
        names = {k for k, _ in thm.params}
        cf.params = {k: v for k, v in cf.params.items() if k in names}
        return _finish(F, cf, thm, thm.id, galilei_kernel(n), cfg, table_case=table)
    if table in (None, "T1.4"):
        cf.notes.append("extended Galilei algebra only")
        res = _finish(F, cf, None, "KERNEL_ONLY", galilei_kernel(n), cfg, table_case=table)
        return res
    raise UnverifiedMatch(table, [f"{table} is not reachable inside the subclass"])
