"""Verify every casebook row in dimensions 1..3 and print a per-row summary."""
import argparse
import time
from dataclasses import dataclass

from nlsym.classify.selftest import run_selftest


@dataclass
class Config:
    dims: tuple = (1, 2, 3)
    tables: tuple = ("1", "2", "theorem")
    draws: int = 3
    samples: int = 200
    tol: float = 1e-9
    jobs: int = 1
    prolongation: bool = False


def main(cfg: Config) -> int:
    t0 = time.perf_counter()
    reps = run_selftest(ns=cfg.dims, tables=cfg.tables, jobs=cfg.jobs, draws=cfg.draws,
                        samples=cfg.samples, tol=cfg.tol, prolongation=cfg.prolongation)
    for r in reps:
        worst = max((c.max_rel for c in r.checks), default=0.0)
        print(f"{'PASS' if r.passed else 'FAIL'}  n={r.n} {r.id:<6} {len(r.checks):>4} checks"
              f"  worst rel {worst:.1e}")
        for c in r.failures if not r.passed else []:
            print(f"      {c.instance}: {c.label} -> {c.verdict} ({c.max_rel:.2e})")
    total = sum(len(r.checks) for r in reps)
    bad = sum(not r.passed for r in reps)
    print(f"{len(reps)} rows, {total} checks, {bad} failing rows, "
          f"{time.perf_counter() - t0:.1f}s")
    return int(bad > 0)


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dims", type=int, nargs="+", default=[1, 2, 3])
    p.add_argument("--draws", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--prolongation", action="store_true")
    a = p.parse_args()
    raise SystemExit(main(Config(dims=tuple(a.dims), draws=a.draws, jobs=a.jobs,
                                 prolongation=a.prolongation)))
