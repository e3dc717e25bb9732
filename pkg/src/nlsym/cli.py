"""Command-line front end: classify | verify | bracket | casebook-selftest | flow-demo.

Exit codes: 0 success (verified classification, PASS), 2 KERNEL_ONLY, 3 UNVERIFIED_MATCH,
4 verification FAIL or INDETERMINATE, 1 any other error.  JSON goes to stdout,
diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, flow
from .classify import (ClassifyConfig, NotInClass, UnverifiedMatch, classify, record,
                       subclass_classify)
from .classify.engine import rec_values, _generators
from .classify.selftest import run_selftest
from .invariance import verify_symmetry
from .liefield import VectorField, kernel_generators, lie_bracket, named_generator, span_contains
from .symexpr import ParseError, Sampler, eval_batch, parse, pretty, simplify

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ERROR, EXIT_KERNEL, EXIT_UNVERIFIED, EXIT_FAIL = 0, 1, 2, 3, 4


@dataclass
class RunConfig:
    command: str
    n: int = 1
    F: str | None = None
    params: dict = field(default_factory=dict)
    samples: int = 200
    tol: float = 1e-9
    seed: int = 0
    format: str = "text"
    witnesses: dict = field(default_factory=dict)


def _number(text: str) -> complex | float:
    v = complex(np.asarray(eval_batch(simplify(parse(text, 1, params=())), {})).reshape(-1)[0])
    return v.real if v.imag == 0 else v


def _pairs(items, name) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise SystemExit(f"{name} expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out.setdefault(k.strip(), []).append(v.strip())
    return out


def _seed(arg) -> int:
    if arg is not None:
        return arg
    return int(os.environ.get("NLS_SYM_SEED", "0"))


def run_config(ns: argparse.Namespace) -> RunConfig:
    params = {k: _number(v[-1]) for k, v in _pairs(getattr(ns, "param", None), "--param").items()}
    return RunConfig(ns.command, getattr(ns, "n", 1), getattr(ns, "F", None), params,
                     getattr(ns, "samples", 200), getattr(ns, "tol", 1e-9), _seed(ns.seed),
                     ns.format, _pairs(getattr(ns, "witness", None), "--witness"))


def _emit(cfg: RunConfig, report: dict, text: str):
    report = {"schema_version": SCHEMA_VERSION, "command": cfg.command, "seed": cfg.seed,
              **report}
    if cfg.format == "json":
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=False, default=str) + "\n")
    else:
        sys.stdout.write(text.rstrip() + "\n")


# ------------------------------------------------------------------ classify
def _result_text(d: dict) -> str:
    lines = [f"case      {d['case_id']}  ({d['status']})"]
    if d.get("table_case"):
        lines.append(f"table     {d['table_case']}")
    lines.append(f"F         {d['F']}")
    lines.append(f"canonical {d['canonical_F']}")
    if d["params"]:
        lines.append("params    " + ", ".join(f"{k}={v}" for k, v in d["params"].items()))
    lines.append(f"k         {d['k']}   lemma1 case {d['lemma1_case']}")
    lines.append("kernel    " + ", ".join(d["kernel_ops"]))
    lines.append("extension " + (", ".join(d["extension_ops"]) or "-"))
    if d["infinite_dimensional"]:
        lines.append("note      the maximal invariance algebra is infinite-dimensional")
    for step in d["normalization_chain"]:
        lines.append(f"chain     {step}")
    for g in d["verification"]["kernel"] + d["verification"]["extension"]:
        stats = g.get("original") or g.get("canonical") or {}
        cls = stats.get("classifying") or {}
        lines.append(f"  {g['verdict']:<5} {g['label']:<40} max|r|={cls.get('max_abs', 0):.2e}"
                     f" samples={stats.get('samples', 0)}")
    for b in d["boundary"]:
        lines.append(f"BOUNDARY  {b}")
    for note in d["notes"]:
        lines.append(f"note      {note}")
    return "\n".join(lines)


def cmd_classify(cfg: RunConfig, subclass: bool = False) -> int:
    cc = ClassifyConfig(n=cfg.n, samples=cfg.samples, tol=cfg.tol, seed=cfg.seed,
                        theta=tuple(cfg.witnesses.get("theta", ())))
    fn = subclass_classify if subclass else classify
    try:
        res = fn(cfg.F, cfg.n, cfg.params or None, cc)
    except UnverifiedMatch as exc:
        print(f"UNVERIFIED_MATCH: {exc}", file=sys.stderr)
        _emit(cfg, {"status": "UNVERIFIED_MATCH", "case_id": exc.case_id,
                    "failures": exc.failures}, f"UNVERIFIED_MATCH {exc}")
        return EXIT_UNVERIFIED
    d = res.as_dict()
    _emit(cfg, d, _result_text(d))
    return EXIT_OK if res.status == "VERIFIED" else EXIT_KERNEL


# ------------------------------------------------------------------ verify / bracket
def _field(name: str | None, gparams: dict, raw: dict, n: int) -> VectorField:
    if name:
        kw = {}
        for k, v in gparams.items():
            kw[k] = int(v[-1]) if k in ("a", "b") else simplify(parse(v[-1], n, params=None))
        return named_generator(name, kw, n)
    xi = raw.get("xi") or ["0"] * n
    if len(xi) != n:
        raise SystemExit(f"--xi must be given {n} times")
    return VectorField.make(n, xi0=parse(raw.get("xi0", "0"), n, params=None),
                            xi=[parse(s, n, params=None) for s in xi],
                            eta=parse(raw.get("eta", "0"), n, params=None), label="Q")


def cmd_verify(cfg: RunConfig, ns) -> int:
    F = simplify(parse(cfg.F, cfg.n))
    if cfg.params:
        from .symexpr import const, substitute
        F = simplify(substitute(F, {k: const(v) for k, v in cfg.params.items()}))
    raw = {"xi0": ns.xi0, "eta": ns.eta, "xi": ns.xi}
    raw = {k: v for k, v in raw.items() if v}
    Q = _field(ns.gen, _pairs(ns.gen_param, "--gen-param"), raw, cfg.n)
    rep = verify_symmetry(F, Q, Sampler(n=cfg.n, samples=cfg.samples, seed=cfg.seed), cfg.tol)
    d = {"F": pretty(F), "generator": str(Q), **rep.as_dict()}
    lines = [f"{rep.verdict}  {Q.label}: {Q}", f"F = {pretty(F)}"]
    for k, z in (("classifying", rep.classifying), ("prolongation", rep.prolongation)):
        if z is not None:
            lines.append(f"  {k:<12} {z.verdict:<13} max|r|={z.max_abs:.3e} samples={z.samples}")
            if z.witness is not None:
                lines.append(f"  witness      {z.as_dict()['witness']}")
    _emit(cfg, d, "\n".join(lines))
    return EXIT_OK if rep.verdict == "PASS" else EXIT_FAIL


def cmd_bracket(cfg: RunConfig, ns) -> int:
    Q1 = _field(ns.q1, _pairs(ns.q1_param, "--q1-param"), {}, cfg.n)
    Q2 = _field(ns.q2, _pairs(ns.q2_param, "--q2-param"), {}, cfg.n)
    B = lie_bracket(Q1, Q2)
    d = {"Q1": str(Q1), "Q2": str(Q2), "bracket": str(B)}
    lines = [f"[{Q1.label}, {Q2.label}] = {B}"]
    code = EXIT_OK
    if ns.case:
        rec = record(ns.case, cfg.n)
        vals = rec_values(rec, cfg.params)
        basis = rec.kernel() + _generators(rec, cfg.params)
        F = rec.instantiate_F(vals) if not rec.has_f else None
        sp = span_contains(basis, B, modulo_solutions=F is not None and rec.eta0_kind is not None,
                           F=F, sampler=Sampler(n=cfg.n, samples=40, seed=cfg.seed))
        d["span"] = {"case": ns.case, "contains": bool(sp.contains), "max_rel": sp.max_rel}
        lines.append(f"in span of {ns.case}: {sp.contains} (max rel {sp.max_rel:.2e})")
        code = EXIT_OK if sp.contains else EXIT_FAIL
    _emit(cfg, d, "\n".join(lines))
    return code


# ------------------------------------------------------------------ selftest / flow
def cmd_selftest(cfg: RunConfig, ns) -> int:
    ns_list = ns.dims or [cfg.n]
    reports = run_selftest(ns_list, jobs=ns.jobs, seed=cfg.seed, draws=ns.draws,
                           samples=cfg.samples, tol=cfg.tol,
                           custom_f=cfg.witnesses.get("f"), prolongation=ns.prolongation)
    ok = all(r.passed for r in reports)
    lines = []
    for r in reports:
        lines.append(f"{'PASS' if r.passed else 'FAIL'}  n={r.n} {r.id:<6} "
                     f"{len(r.checks):>4} checks  {r.seconds:.2f}s")
        for c in r.failures:
            lines.append(f"      {c.instance} {c.label}: {c.verdict} max|r|={c.max_abs:.2e}")
    lines.append(f"{'ALL PASS' if ok else 'FAILURES'}: {len(reports)} records")
    _emit(cfg, {"passed": ok, "records": [r.as_dict() for r in reports]}, "\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_flow(cfg: RunConfig, ns) -> int:
    fc = flow.FlowConfig(A=ns.A, sigma=ns.sigma, gamma=ns.gamma, eps=ns.eps, nx=ns.grid,
                         nt=ns.grid)
    rep = flow.run(fc)
    lines = [f"{name:<22} {val:.3e}" for name, val in rep.rows()]
    _emit(cfg, rep.as_dict(), "\n".join(lines))
    ok = rep.residual_boosted < 1e-4 and rep.max_change_eps0 == 0.0
    return EXIT_OK if ok else EXIT_FAIL


# ------------------------------------------------------------------ argument parsing
class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors, which would read as KERNEL_ONLY
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=1, help="spatial dimension")
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=None,
                        help="sampling seed (default: $NLS_SYM_SEED or 0)")
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--param", action="append", metavar="K=V")
    common.add_argument("--witness", action="append", metavar="SLOT=EXPR",
                        help="f=... (selftest) or theta=... (classify)")

    p = _Parser(prog="nls-sym", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", parents=[common], help="maximal invariance algebra of F")
    c.add_argument("--F", required=True)
    c.add_argument("--subclass", action="store_true",
                   help="treat --F as f(|psi|) in F = f psi and report the Theorem case")

    v = sub.add_parser("verify", parents=[common], help="check one generator against F")
    v.add_argument("--F", required=True)
    v.add_argument("--gen", help="named generator (Pt, Pa, Jab, I, M, D, Ga, Pi, ...)")
    v.add_argument("--gen-param", action="append", metavar="K=V")
    v.add_argument("--xi0")
    v.add_argument("--xi", action="append")
    v.add_argument("--eta")

    b = sub.add_parser("bracket", parents=[common], help="Lie bracket of two named generators")
    b.add_argument("--q1", required=True)
    b.add_argument("--q2", required=True)
    b.add_argument("--q1-param", action="append", metavar="K=V")
    b.add_argument("--q2-param", action="append", metavar="K=V")
    b.add_argument("--case", help="also test membership in this case's algebra")

    s = sub.add_parser("casebook-selftest", parents=[common], help="verify every casebook row")
    s.add_argument("--dims", type=int, nargs="*", help="dimensions to test (default: --n)")
    s.add_argument("--draws", type=int, default=3)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--prolongation", action="store_true")

    f = sub.add_parser("flow-demo", parents=[common], help="finite Galilei boost on a grid")
    f.add_argument("--A", type=float, default=1.0)
    f.add_argument("--sigma", type=float, default=1.0)
    f.add_argument("--gamma", type=float, default=2.0)
    f.add_argument("--eps", type=float, default=0.3)
    f.add_argument("--grid", type=int, default=256)
    return p


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        cfg = run_config(ns)
        if ns.command == "classify":
            return cmd_classify(cfg, ns.subclass)
        if ns.command == "verify":
            return cmd_verify(cfg, ns)
        if ns.command == "bracket":
            return cmd_bracket(cfg, ns)
        if ns.command == "casebook-selftest":
            return cmd_selftest(cfg, ns)
        return cmd_flow(cfg, ns)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (NotInClass, flow.GridError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
