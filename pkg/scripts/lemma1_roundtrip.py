"""Mix canonical quintuple pairs by random recombinations and equivalence transforms,
then check that canonicalization recovers the case and reproduces the pair."""
import argparse
from collections import Counter
from dataclasses import dataclass

import numpy as np

from nlsym.classify import ClassifyingEq, canonical_pair, lemma1_canonicalize
from nlsym.equivalence import random_transform


@dataclass
class Config:
    trials: int = 300
    seed: int = 0


def main(cfg: Config):
    rng = np.random.default_rng(cfg.seed)
    hits, errs = Counter(), []
    for j in range(cfg.trials):
        case = 1 + j % 3
        p = canonical_pair(case, rng)
        R, T = rng.normal(size=(2, 2)), random_transform(rng)
        q = [ClassifyingEq.from_real(v).transformed(T)
             for v in R @ np.array([x.as_real() for x in p])]
        res = lemma1_canonicalize(*q)
        hits[(case, res.case)] += 1
        got = res.apply(*q)
        errs.append(max(abs(a - b) for g, w in zip(got, res.pair)
                        for a, b in zip(g.as_tuple(), w.as_tuple())))
    for (want, got), c in sorted(hits.items()):
        print(f"case {want} -> {got}: {c}")
    e = np.array(errs)
    print(f"chain error: median {np.median(e):.1e}, max {e.max():.1e}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--trials", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    a = p.parse_args()
    main(Config(a.trials, a.seed))
