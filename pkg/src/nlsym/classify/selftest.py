"""Casebook integrity: every tabulated generator annihilates the classifying residual."""
from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..invariance import (classifying_residual, classifying_terms, prolongation_residual,
                          prolongation_terms)
from ..symexpr import Sampler, is_zero
from .casebook import CaseRecord, casebook, record


@dataclass
class Check:
    instance: str
    label: str
    verdict: str
    max_abs: float
    max_rel: float
    samples: int
    prolongation: str | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class RecordReport:
    id: str
    n: int
    checks: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.verdict == "ZERO" and c.prolongation in (None, "ZERO") for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if c.verdict != "ZERO" or c.prolongation not in (None, "ZERO")]

    def as_dict(self) -> dict:
        return {"id": self.id, "n": self.n, "passed": self.passed, "seconds": self.seconds,
                "checks": [c.as_dict() for c in self.checks]}


def verify_record(rec: CaseRecord, seed: int = 0, draws: int = 3, samples: int = 200,
                  tol: float = 1e-9, custom_f: list | None = None,
                  prolongation: bool = False) -> RecordReport:
    """Instantiate `draws` parameter sets (per branch) times all slot witnesses and test
    kernel + extension generators on `samples` seeded points."""
    t0 = time.perf_counter()
    rng = np.random.default_rng([seed, rec.n, sum(map(ord, rec.id))])
    out = RecordReport(rec.id, rec.n)
    kernel = rec.kernel()
    for inst in rec.instances(rng, draws, custom_f):
        sampler = rec.sampler(samples=samples, seed=seed)
        for Q in kernel + inst.generators:
            z = is_zero(classifying_residual(inst.F, Q, check=False), sampler, tol, salt=1,
                        scale=classifying_terms(inst.F, Q))
            pro = None
            if prolongation:
                js = rec.sampler(samples=samples, seed=seed, jets=True)
                pro = is_zero(prolongation_residual(inst.F, Q), js, tol, salt=2,
                              scale=prolongation_terms(inst.F, Q)).verdict
            out.checks.append(Check(inst.describe(), Q.label, z.verdict, z.max_abs, z.max_rel,
                                    z.samples, pro))
    out.seconds = time.perf_counter() - t0
    return out


def _job(args):
    case_id, n, kw = args
    return verify_record(record(case_id, n), **kw)


def run_selftest(ns=(1, 2, 3), tables=("1", "2", "theorem"), jobs: int = 1, **kw) -> list:
    """Verify every record for every n; records are independent, so `jobs > 1` fans out."""
    work = [(r.id, n, kw) for n in ns for r in casebook(n) if str(r.table) in tables]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            return list(ex.map(_job, work))
    return [_job(w) for w in work]
