"""Vectorised numeric evaluation and the randomized zero test."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import core as C
from .calculus import conjugate
from .core import Expr


class SingularEvaluation(ArithmeticError):
    """Evaluation hit a singularity (log of zero, division by zero, ...)."""


@dataclass
class SamplePoint:
    t: float
    x: tuple
    psi: complex
    params: dict = field(default_factory=dict)
    jets: dict = field(default_factory=dict)
    psi_min: float = 1e-3

    def env(self) -> dict:
        if abs(self.psi) < self.psi_min:
            raise SingularEvaluation(f"|psi|={abs(self.psi):.3g} below floor {self.psi_min}")
        out = {"t": self.t, "psi": complex(self.psi), "cpsi": complex(self.psi).conjugate()}
        for a, xa in enumerate(self.x, start=1):
            out[f"x{a}"] = xa
        out.update(self.params)
        for name, v in self.jets.items():
            out[name] = complex(v)
            partner = C.conj_partner(name)
            if partner is not None and partner not in self.jets:
                out[partner] = complex(v).conjugate()
        return out


def _eval(e: Expr, env: Mapping, memo: dict):
    key = id(e)
    if key in memo:
        return memo[key]
    k = e.kind
    if k == C.CONST:
        out = complex(e.value)
    elif k == C.SYM:
        try:
            out = env[e.value]
        except KeyError:
            raise KeyError(f"no value for symbol {e.value!r}") from None
    elif k == C.RHO:
        out = np.sqrt(env["psi"] * env["cpsi"])
    elif k == C.PHI:
        out = 0.5j * (np.log(env["cpsi"]) - np.log(env["psi"]))
    elif k == C.ADD:
        out = 0
        for a in e.args:
            out = out + _eval(a, env, memo)
    elif k == C.MUL:
        out = 1
        for a in e.args:
            out = out * _eval(a, env, memo)
    elif k == C.POW:
        b = _eval(e.args[0], env, memo)
        ex = e.args[1]
        if ex.kind == C.CONST and ex.value.is_integer():
            kk = int(ex.value.re)
            bb = np.asarray(b, dtype=complex)
            out = bb ** kk if kk >= 0 else 1.0 / bb ** (-kk)
        else:
            out = np.power(np.asarray(b, dtype=complex), _eval(ex, env, memo))
    elif k == C.EXP:
        out = np.exp(_eval(e.args[0], env, memo))
    elif k == C.LN:
        out = np.log(np.asarray(_eval(e.args[0], env, memo), dtype=complex))
    elif k == C.SIN:
        out = np.sin(_eval(e.args[0], env, memo))
    elif k == C.COS:
        out = np.cos(_eval(e.args[0], env, memo))
    elif k == C.ABS:
        u = _eval(e.args[0], env, memo)
        ub = _eval(conjugate(e.args[0]), env, memo)
        out = np.sqrt(np.asarray(u * ub, dtype=complex))
    elif k == C.RE:
        u = _eval(e.args[0], env, memo)
        ub = _eval(conjugate(e.args[0]), env, memo)
        out = 0.5 * (u + ub)
    elif k == C.IM:
        u = _eval(e.args[0], env, memo)
        ub = _eval(conjugate(e.args[0]), env, memo)
        out = -0.5j * (u - ub)
    elif k == C.CONJ:
        out = np.conj(_eval(e.args[0], env, memo))
    elif k == C.FUNC:
        fn = env.get(e.value[0])
        if fn is None or not callable(fn):
            raise KeyError(f"function symbol {e.value[0]!r} is not instantiated")
        out = fn(e.value, *[_eval(a, env, memo) for a in e.args])
    else:
        raise ValueError(f"cannot evaluate node kind {k}")
    memo[key] = out
    return out


def eval_batch(e: Expr, env: Mapping) -> np.ndarray:
    """Evaluate e on arrays of sample values (broadcasting).  Non-finite entries are kept."""
    with np.errstate(all="ignore"):
        out = _eval(e, env, {})
    return np.asarray(out, dtype=complex)


def eval_numeric(e: Expr, p) -> complex:
    """Evaluate at one point (a SamplePoint or a plain mapping of symbol values)."""
    env = p.env() if isinstance(p, SamplePoint) else dict(p)
    v = complex(eval_batch(e, env))
    if not np.isfinite(v):
        raise SingularEvaluation(f"non-finite value {v} for {e}")
    return v


def term_scale(e: Expr, env: Mapping) -> np.ndarray:
    """Sum of absolute values of top-level terms; the magnitude scale for zero tests."""
    with np.errstate(all="ignore"):
        if e.kind == C.ADD:
            memo: dict = {}
            s = 0
            for a in e.args:
                s = s + np.abs(_eval(a, env, memo))
            return np.asarray(s, dtype=float)
        return np.abs(np.asarray(_eval(e, env, {}), dtype=complex))


@dataclass
class Sampler:
    """Random sample points in (t, x, psi[, jets]).

    psi is drawn with modulus in `psi_range` and argument in (-max_phase, max_phase),
    keeping clear of the negative real axis where ln and phi have their cut.
    """

    n: int = 1
    samples: int = 200
    seed: int = 0
    psi_min: float = 1e-3
    psi_range: tuple = (0.25, 2.0)
    t_range: tuple = (-1.0, 1.0)
    x_range: tuple = (-1.0, 1.0)
    max_phase: float = 0.9 * np.pi
    jets: bool = False
    retries: int = 10
    params: dict = field(default_factory=dict)
    psi_center: complex | None = None  # if set, psi is drawn from a disc (a local patch)
    psi_radius: float = 0.2

    def rng(self, salt: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    def draw(self, rng: np.random.Generator, count: int | None = None) -> dict:
        m = self.samples if count is None else count
        env = {"t": rng.uniform(*self.t_range, m)}
        for a in range(1, self.n + 1):
            env[f"x{a}"] = rng.uniform(*self.x_range, m)
        if self.psi_center is None:
            lo = max(self.psi_range[0], self.psi_min)
            mod = rng.uniform(lo, self.psi_range[1], m)
            arg = rng.uniform(-self.max_phase, self.max_phase, m)
            psi = mod * np.exp(1j * arg)
        else:
            r = self.psi_radius * np.sqrt(rng.uniform(0, 1, m))
            psi = complex(self.psi_center) + r * np.exp(1j * rng.uniform(-np.pi, np.pi, m))
        env["psi"] = psi
        env["cpsi"] = psi.conjugate()
        if self.jets:
            for name in jet_names(self.n):
                z = rng.normal(size=m) + 1j * rng.normal(size=m)
                env[name] = z
                env["c" + name] = z.conjugate()
        for name, v in self.params.items():
            env[name] = v
        return env


def jet_names(n: int) -> list:
    """Names of the psi jet coordinates up to second order (t-derivatives included)."""
    names = ["psi_t", "psi_tt"]
    for a in range(1, n + 1):
        names.append(f"psi_{a}")
        names.append(f"psi_t{a}")
        for b in range(a, n + 1):
            names.append(f"psi_{a}{b}")
    return names


def take(env: dict, idx) -> dict:
    return {k: (v[idx] if isinstance(v, np.ndarray) and v.ndim else v) for k, v in env.items()}


def put(env: dict, idx, new: dict) -> None:
    for k, v in new.items():
        if isinstance(env.get(k), np.ndarray) and env[k].ndim:
            env[k][idx] = v


def finite_env(e: Expr, sampler: Sampler, rng: np.random.Generator, count: int | None = None):
    """Draw points, resampling those where e is not finite (up to sampler.retries times)."""
    env = sampler.draw(rng, count)
    vals = eval_batch(e, env)
    vals = np.broadcast_to(vals, env["t"].shape).copy()
    for _ in range(sampler.retries):
        bad = ~np.isfinite(vals)
        if not bad.any():
            break
        fresh = sampler.draw(rng, int(bad.sum()))
        put(env, bad, fresh)
        vals[bad] = np.broadcast_to(eval_batch(e, take(env, bad)), (int(bad.sum()),))
    return env, vals


@dataclass
class ZeroTest:
    verdict: str  # ZERO | NONZERO | INDETERMINATE
    structural: bool
    samples: int
    tol: float
    max_abs: float = 0.0
    max_rel: float = 0.0
    witness: dict | None = None
    value: complex | None = None

    @property
    def is_zero(self) -> bool:
        return self.verdict == "ZERO"

    def __bool__(self):
        return self.is_zero

    def as_dict(self) -> dict:
        out = {"verdict": self.verdict, "structural": self.structural, "samples": self.samples,
               "tol": self.tol, "max_abs": self.max_abs, "max_rel": self.max_rel}
        if self.witness is not None:
            out["witness"] = {k: _jsonable(v) for k, v in self.witness.items()}
            out["value"] = _jsonable(self.value)
        return out


def _jsonable(v):
    v = complex(v)
    if v.imag == 0:
        return float(v.real)
    return [float(v.real), float(v.imag)]


def is_zero(e: Expr, sampler: Sampler | None = None, tol: float = 1e-9, salt: int = 0,
            simplified: bool = False, scale: Sequence[Expr] | None = None) -> ZeroTest:
    """Randomized identity test: ZERO iff |e| <= tol*(1 + sum|terms|) at every sample.

    By default the terms are the top-level summands of simplify(e).  Simplification can
    merge large summands into one small coefficient, hiding their size; callers that
    know the original summands pass them as `scale` and the larger sum is used."""
    sampler = sampler or Sampler()
    s = e if simplified else C.simplify(e)
    if s.is_zero:
        return ZeroTest("ZERO", True, 0, tol)
    rng = sampler.rng(salt)
    env, vals = finite_env(s, sampler, rng)
    finite = np.isfinite(vals)
    if not finite.all():
        idx = int(np.argmin(finite))
        return ZeroTest("INDETERMINATE", False, len(vals), tol,
                        witness=take(env, idx), value=complex(vals[idx]))
    mag = np.broadcast_to(term_scale(s, env), vals.shape)
    if scale:
        with np.errstate(all="ignore"):
            given = sum(np.abs(np.broadcast_to(eval_batch(t, env), vals.shape)) for t in scale)
        mag = np.where(np.isfinite(given), np.maximum(mag, given), mag)
    absv = np.abs(vals)
    rel = absv / (1.0 + mag)
    worst = int(np.argmax(rel))
    test = ZeroTest("ZERO", False, len(vals), tol, float(absv.max()), float(rel[worst]))
    if rel[worst] > tol:
        test.verdict = "NONZERO"
        test.witness = take(env, worst)
        test.value = complex(vals[worst])
    return test
