"""Machine-readable classification casebook: loading, parameter draws, instantiation."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np
import yaml

from ..liefield import VectorField, galilei_kernel, kernel_generators, named_generator
from ..symexpr import core as C
from ..symexpr import Expr, Lambda, Sampler, eval_numeric, parse, simplify, substitute
from .witnesses import eta0_witnesses, f_witnesses, theta_witnesses

GRID = 64  # drawn parameters are multiples of 1/GRID so constraint checks stay exact


class ConstraintError(ValueError):
    pass


def _xx(n: int) -> Expr:
    return C.add(*(C.x(a) * C.x(a) for a in range(1, n + 1)))


def _value(v):
    """Exact Fraction/complex-rational where possible, else float/complex."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, C.CRational):
        return v.re if v.im == 0 else complex(v)
    return v


def evaluate(text: str, values: dict, n: int):
    """Evaluate an expression in the record parameters; exact when folding allows."""
    e = parse(str(text), n, params=None)
    e = simplify(substitute(e, {k: _as_const(v) for k, v in values.items()}))
    if e.kind == C.CONST:
        return _value(e.value)
    z = eval_numeric(e, {})
    return z.real if abs(z.imag) <= 1e-14 * (1 + abs(z)) else z


def _as_const(v) -> Expr:
    if isinstance(v, Expr):
        return v
    return C.const(v)


def _compare(lhs, op: str, rhs) -> bool:
    lhs = lhs.real if isinstance(lhs, complex) else lhs
    return {">": lhs > rhs, "<": lhs < rhs, ">=": lhs >= rhs, "<=": lhs <= rhs,
            "!=": lhs != rhs, "==": lhs == rhs}[op]


@dataclass(frozen=True)
class GeneratorSpec:
    terms: tuple
    label: str
    each_a: bool = False


@dataclass
class CaseInstance:
    """One concrete (F, generators) pair drawn from a record."""

    record: "CaseRecord"
    params: dict
    F: Expr
    generators: list
    witnesses: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.record.n

    @property
    def id(self) -> str:
        return self.record.id

    def kernel(self) -> list:
        return self.record.kernel()

    def sampler(self, **kw) -> Sampler:
        return self.record.sampler(**kw)

    def describe(self) -> str:
        ps = ", ".join(f"{k}={_fmt(v)}" for k, v in self.params.items())
        ws = ", ".join(f"{k}={v}" for k, v in self.witnesses.items())
        return f"{self.id}[{ps}{'; ' if ws else ''}{ws}]"


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    if isinstance(v, C.CRational):
        v = complex(v)
    if isinstance(v, complex):
        return f"{v.real:.4g}{v.imag:+.4g}i"
    return f"{v:.6g}"


@dataclass(frozen=True)
class CaseRecord:
    id: str
    table: str
    F_text: str
    n: int = 1
    Omega_text: str | None = None
    params: tuple = ()
    branches: tuple = ({},)
    constraints: tuple = ()
    derived: tuple = ()
    slots: tuple = ()
    theta_eigen: str | None = None
    eta0_kind: str | None = None
    infinite: bool = False
    twin: dict | None = None
    generator_specs: tuple = ()
    sampler_hints: tuple = ()

    # ---------------------------------------------------------------- patterns
    @property
    def param_names(self) -> list:
        names = [k for k, _ in self.params]
        for br in self.branches:
            names += [k for k in br if k not in names]
        return names

    @property
    def has_f(self) -> bool:
        return "f" in self.slots

    def pattern(self) -> Expr:
        """F with symbolic parameters and the function symbol f applied to Omega."""
        F = parse(self.F_text, self.n, params=None)
        if self.Omega_text:
            F = substitute(F, {"Omega": self.omega()})
        return F

    def omega(self) -> Expr | None:
        return parse(self.Omega_text, self.n, params=None) if self.Omega_text else None

    def kernel(self) -> list:
        return galilei_kernel(self.n) if self.table == "theorem" else kernel_generators(self.n)

    def sampler(self, **kw) -> Sampler:
        base = dict(self.sampler_hints)
        if "max_phase" in base:
            base["max_phase"] = float(base["max_phase"])
        base.update(kw)
        return Sampler(n=self.n, **base)

    # ---------------------------------------------------------------- parameters
    def _specs(self, branch: dict) -> list:
        specs = list(self.params)
        for k, v in branch.items():
            specs = [(a, b) for a, b in specs if a != k] + [(k, v)]
        # derived-by-expression params must come after their inputs
        return [s for s in specs if "expr" not in s[1]] + [s for s in specs if "expr" in s[1]]

    def draw(self, rng: np.random.Generator, branch: int = 0, tries: int = 500) -> dict:
        """Admissible random parameters (rejection sampling on the constraints)."""
        specs = self._specs(self.branches[branch])
        for _ in range(tries):
            vals = {}
            for name, spec in specs:
                vals[name] = self._draw_one(spec, vals, rng)
            if self.admissible(vals):
                return self.ordered(vals)
        raise ConstraintError(f"{self.id}: no admissible draw in {tries} tries")

    def ordered(self, vals: dict) -> dict:
        return {k: vals[k] for k in self.param_names if k in vals}

    def _draw_one(self, spec: dict, vals: dict, rng):
        if "value" in spec:
            return Fraction(spec["value"])
        if "expr" in spec:
            return evaluate(spec["expr"], vals, self.n)
        if "range" in spec:
            lo, hi = spec["range"]
            return Fraction(round(rng.uniform(lo, hi) * GRID), GRID)
        if "modulus" in spec:
            lo, hi = spec["modulus"]
            r, th = rng.uniform(lo, hi), rng.uniform(-math.pi, math.pi)
            z = r * complex(math.cos(th), math.sin(th))
            return C.CRational(Fraction(round(z.real * GRID), GRID),
                               Fraction(round(z.imag * GRID), GRID))
        raise ValueError(f"{self.id}: bad parameter spec {spec}")

    def derived_values(self, vals: dict) -> dict:
        out = dict(vals)
        for name, text in self.derived:
            out[name] = evaluate(text, out, self.n)
        return out

    def violations(self, vals: dict) -> list:
        full = self.derived_values(vals)
        bad = []
        for text, op, bound in self.constraints:
            v = evaluate(text, full, self.n)
            if isinstance(v, complex) and abs(v.imag) > 1e-12:
                bad.append(f"{text} is complex")
            elif not _compare(v, op, Fraction(bound) if isinstance(bound, int) else bound):
                bad.append(f"{text} {op} {bound} fails ({_fmt(v)})")
        return bad

    def admissible(self, vals: dict) -> bool:
        return not self.violations(vals)

    # ---------------------------------------------------------------- instantiation
    def substitution(self, vals: dict) -> dict:
        return {k: _as_const(v) for k, v in self.derived_values(vals).items()}

    def instantiate_F(self, vals: dict, f: Lambda | None = None) -> Expr:
        F = substitute(self.pattern(), self.substitution(vals))
        if f is not None:
            F = substitute(F, {"f": f})
        return F

    def theta_eigenvalue(self, vals: dict) -> float:
        return float(evaluate(self.theta_eigen, vals, self.n))

    def build_generators(self, vals: dict, slots: dict | None = None) -> list:
        """Extension generators for parameter values `vals` and slot instances."""
        slots = slots or {}
        sub = self.substitution(vals)
        sub["xx"] = _xx(self.n)
        out = []
        for spec in self.generator_specs:
            indices = range(1, self.n + 1) if spec.each_a else [None]
            for a in indices:
                Q = None
                for coef, name, opts in spec.terms:
                    c = simplify(substitute(parse(str(coef), self.n, params=None), sub))
                    kw = {}
                    for k, v in opts.items():
                        kw[k] = self._resolve(v, a, sub, slots)
                    term = named_generator(name, kw, self.n).scale(c)
                    Q = term if Q is None else Q + term
                label = spec.label if a is None else spec.label.replace("_a", f"_{a}") \
                    .replace("x_a", f"x_{a}").replace("d_a", f"d_{a}")
                out.append(Q.simplify().with_label(label))
        return out

    def _resolve(self, v, a, sub, slots):
        if v == "a":
            return a
        if isinstance(v, str) and v.startswith("slot:"):
            return slots[v[5:]]
        if isinstance(v, (int, float)):
            return C.const(v)
        return simplify(substitute(parse(str(v), self.n, params=None), sub))

    def slot_witnesses(self, vals: dict, custom_f: list | None = None) -> list:
        """All combinations of slot witnesses, as (description, f Lambda, slot dict)."""
        axes = []
        if "f" in self.slots:
            fs = f_witnesses(custom_f)
            names = custom_f or None
            axes.append([("f", (names[i] if names else _lam_text(L)), L)
                         for i, L in enumerate(fs)])
        if "theta" in self.slots:
            th = theta_witnesses(self.theta_eigenvalue(vals), self.n)
            axes.append([("theta", str(e), e) for e in th])
        if "eta0" in self.slots:
            ws = eta0_witnesses(self.eta0_kind, {k: float(_real(v)) for k, v in vals.items()},
                                self.n)
            axes.append([("eta0", f"solution#{i + 1}", e) for i, e in enumerate(ws)])
        out = []
        for combo in itertools.product(*axes) if axes else [()]:
            desc = {k: d for k, d, _ in combo}
            f = next((L for k, _, L in combo if k == "f"), None)
            slots = {k: e for k, _, e in combo if k != "f"}
            out.append((desc, f, slots))
        return out

    def instantiate(self, vals: dict, custom_f: list | None = None) -> list:
        insts = []
        for desc, f, slots in self.slot_witnesses(vals, custom_f):
            insts.append(CaseInstance(self, self.ordered(vals), self.instantiate_F(vals, f),
                                      self.build_generators(vals, slots), desc))
        return insts

    def instances(self, rng: np.random.Generator, draws: int = 3,
                  custom_f: list | None = None) -> list:
        """`draws` admissible parameter draws per branch, times all slot witnesses."""
        out = []
        fixed = all("value" in s or "expr" in s for _, s in self._specs({}))
        for b in range(len(self.branches)):
            nb = 1 if fixed and len(self.branches) == 1 else draws
            for _ in range(nb):
                out += self.instantiate(self.draw(rng, b), custom_f)
        return out


def _real(v):
    if isinstance(v, C.CRational):
        return complex(v).real
    return v.real if isinstance(v, complex) else v


def _lam_text(L: Lambda) -> str:
    from ..symexpr import to_text
    return f"{to_text(L.body)}"


# ------------------------------------------------------------------ loading
@lru_cache(maxsize=1)
def _raw() -> dict:
    text = resources.files(__package__).joinpath("casebook.yaml").read_text()
    return yaml.safe_load(text)


def _record(d: dict) -> CaseRecord:
    gens = []
    for g in d.get("generators", []):
        terms = tuple((t[0], t[1], dict(t[2]) if len(t) > 2 else {}) for t in g["terms"])
        gens.append(GeneratorSpec(terms, g["label"], bool(g.get("each_a", False))))
    return CaseRecord(
        id=d["id"],
        table=str(d["table"]),
        F_text=str(d["F"]),
        Omega_text=d.get("Omega"),
        params=tuple((k, dict(v)) for k, v in (d.get("params") or {}).items()),
        branches=tuple(dict(b) for b in d.get("branches", [{}])),
        constraints=tuple(tuple(c) for c in d.get("constraints", [])),
        derived=tuple((d2, str(v)) for d2, v in (d.get("derived") or {}).items()),
        slots=tuple(d.get("slots", [])),
        theta_eigen=None if d.get("theta_eigen") is None else str(d["theta_eigen"]),
        eta0_kind=d.get("eta0_kind"),
        infinite=bool(d.get("infinite", False)),
        twin=d.get("twin"),
        generator_specs=tuple(gens),
        sampler_hints=tuple((d.get("sampler") or {}).items()),
    )


@lru_cache(maxsize=1)
def _records() -> tuple:
    return tuple(_record(d) for d in _raw()["cases"])


def casebook(n: int = 1) -> list:
    """All 26 records (Table 1, Table 2, Theorem) bound to spatial dimension n."""
    if not 1 <= n <= 4:
        raise ValueError("supported dimensions are n = 1..4")
    return [replace(r, n=n) for r in _records()]


def record(case_id: str, n: int = 1) -> CaseRecord:
    for r in casebook(n):
        if r.id == case_id:
            return r
    raise KeyError(f"no casebook record {case_id!r}")


def table_ids(table: str) -> list:
    return [r.id for r in _records() if r.table == table]
