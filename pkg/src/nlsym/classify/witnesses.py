"""Concrete instances for the arbitrary-function slots f, theta and eta0."""
from __future__ import annotations

import math

from ..symexpr import core as C
from ..symexpr import Lambda, parse

F_FAMILIES = ("w", "exp(i*w)")
F_FALLBACK = "w^2"


def f_witnesses(custom: list | None = None) -> list:
    """Witnesses for a complex-valued f of one real variable, as Lambdas in w."""
    texts = list(custom) if custom else list(F_FAMILIES)
    return [Lambda(("w",), parse(s, params=None)) for s in texts]


def theta_witnesses(lam: float, n: int) -> list:
    """Two independent real solutions of Lap theta = lam * theta."""
    x1, xn = C.x(1), C.x(n)
    if lam > 0:
        k = C.const(math.sqrt(lam))
        return [C.exp_(k * x1), C.HALF * (C.exp_(k * xn) + C.exp_(-k * xn))]
    if lam < 0:
        k = C.const(math.sqrt(-lam))
        return [C.cos(k * x1), C.sin(k * xn)]
    if n == 1:
        return [x1, C.ONE + C.const(3) * x1]
    x2 = C.x(2)
    return [x1, x1 * x1 - x2 * x2]


def _kvec(n: int) -> list:
    return [0.7, -0.4, 0.3, 0.5][:n]


def free_solutions(n: int) -> list:
    """Solutions of i psi_t + Lap psi = 0: a plane wave and a complex-shifted Gaussian."""
    k = _kvec(n)
    kx = C.add(*(C.const(ka) * C.x(a) for a, ka in enumerate(k, start=1)))
    k2 = sum(ka * ka for ka in k)
    wave = C.exp_(C.I * (kx - C.const(k2) * C.T))
    tau = C.T + C.const(3 + 1j)
    xx = C.add(*(C.x(a) * C.x(a) for a in range(1, n + 1)))
    gauss = C.power(tau, C.const(-n / 2)) * C.exp_(C.I * xx * C.power(C.const(4) * tau, C.MINUS_ONE))
    return [wave, gauss]


def linear_solutions(gamma: float, n: int) -> list:
    """Solutions of i psi_t + Lap psi + gamma psi + psi* = 0 of the form
    cos(k x_1)(A(t) + i B(t)), with A' = q B, B' = p A, p = gamma+1-k^2, q = k^2-gamma+1."""
    out = []
    for k in (0.6, 1.3):
        p, q = gamma + 1 - k * k, k * k - gamma + 1
        t = C.T
        if abs(p) < 1e-12 and abs(q) < 1e-12:
            A, B = C.ONE, C.ONE
        elif abs(q) < 1e-12:
            A, B = C.ONE, C.const(p) * t
        elif abs(p) < 1e-12:
            A, B = C.const(q) * t, C.ONE
        elif p * q < 0:
            w = math.sqrt(-p * q)
            A = C.cos(C.const(w) * t)
            B = C.const(-w / q) * C.sin(C.const(w) * t)
        else:
            w = math.sqrt(p * q)
            ep, em = C.exp_(C.const(w) * t), C.exp_(C.const(-w) * t)
            A = C.HALF * (ep + em)
            B = C.const(w / q) * C.HALF * (ep - em)
        out.append(C.cos(C.const(k) * C.x(1)) * (A + C.I * B))
    return out


def eta0_witnesses(kind: str, params: dict, n: int) -> list:
    if kind == "free":
        return free_solutions(n)
    if kind == "linear":
        return linear_solutions(float(params["gamma"]), n)
    raise ValueError(f"unknown eta0 witness kind {kind!r}")
