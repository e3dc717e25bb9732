"""Classify a handful of nonlinearities, including disguised ones, and tabulate the result."""
import argparse
from dataclasses import dataclass, field

import numpy as np

from nlsym.classify import classify
from nlsym.equivalence import random_transform
from nlsym.symexpr import parse, pretty

EXAMPLES = [
    ("abs(psi)^2*psi", 1),
    ("abs(psi)^2*psi", 2),
    ("abs(psi)^2*psi", 3),
    ("(1+i)*abs(psi)^(4/n)*psi", 2),
    ("-ln(rho)*psi", 1),
    ("(ln(rho) + 2*i*phi)*psi", 1),
    ("abs(re(psi))^(3/2)", 1),
    ("exp(re(psi))", 2),
    ("psi^2", 1),
    ("exp(psi)", 1),
    ("3*psi + 2", 1),
    ("abs(psi)^2*psi + 1", 1),
]


@dataclass
class Config:
    examples: list = field(default_factory=lambda: list(EXAMPLES))
    disguise: bool = False
    seed: int = 0


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    print(f"{'F':<44} {'n':>1}  {'case':<12} {'extension'}")
    for text, n in cfg.examples:
        F = parse(text, n)
        if cfg.disguise:
            F = random_transform(rng).apply_to_F(F)
        r = classify(F, n)
        ext = ", ".join(g.label for g in r.extension) or "-"
        shown = pretty(F, 3) if cfg.disguise else text
        print(f"{shown[:44]:<44} {n}  {r.case_id:<12} {ext}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--disguise", action="store_true",
                   help="apply a random equivalence transformation first")
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    main(Config(disguise=a.disguise, seed=a.seed))
