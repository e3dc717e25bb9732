"""Finite Galilei boost of a plane wave: residuals against grid size and boost speed."""
import argparse
from dataclasses import dataclass

from nlsym.flow import FlowConfig, run


@dataclass
class Sweep:
    grids: tuple = (32, 64, 128, 256, 512)
    speeds: tuple = (0.0, 0.3, 0.8)
    gamma: float = 2.0


def main(s: Sweep):
    print(f"{'grid':>5} {'eps':>5} {'boosted':>10} {'corrupted':>10}")
    for eps in s.speeds:
        prev = None
        for m in s.grids:
            rep = run(FlowConfig(nx=m, nt=m, eps=eps, gamma=s.gamma))
            rate = "" if prev is None else f"  ratio {prev / rep.residual_boosted:.2f}"
            print(f"{m:>5} {eps:>5} {rep.residual_boosted:>10.2e} "
                  f"{rep.residual_corrupted:>10.2e}{rate}")
            prev = rep.residual_boosted


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--gamma", type=float, default=2.0)
    main(Sweep(gamma=p.parse_args().gamma))
