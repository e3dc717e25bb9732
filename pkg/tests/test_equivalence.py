import cmath
import math

import numpy as np
import pytest

from nlsym.classify import casebook
from nlsym.equivalence import (Chain, EquivTransform, GaugeNotApplicable, NotNormalizable,
                               ShiftGauge, TimeGauge, amp_gauge, compose, equivalence_algebra,
                               normalize, phase_gauge, random_transform)
from nlsym.invariance import verify_symmetry
from nlsym.symexpr import Sampler, eval_batch, is_zero, parse
from nlsym.symexpr import core as C

F_SAMPLES = ["abs(psi)^2*psi", "exp(re(psi)) + i*psi", "(ln(rho) + 2*i*phi)*psi + 3*psi",
             "abs(re(psi))^(3/2) - conj(psi)^2"]


def env_at(psi, t=0.4, x=(0.3,)):
    e = {"t": np.asarray(t), "psi": np.asarray(psi), "cpsi": np.conj(np.asarray(psi))}
    for a, v in enumerate(x, 1):
        e[f"x{a}"] = np.asarray(v)
    return e


def F_at(F, psi, **kw):
    return eval_batch(F, env_at(psi, **kw))


# ------------------------------------------------------------------ algebra flows
def rk4(gen, y0, s_end, steps=400):
    """Integrate the flow of an equivalence generator on (t, x, psi, F)."""
    t, x, psi, F = y0
    h = s_end / steps

    def f(y):
        v = gen.velocity(*y)
        return v

    def add(y, k, c):
        return (y[0] + c * k[0], y[1] + c * k[1], y[2] + c * k[2], y[3] + c * k[3])

    y = (t, np.asarray(x, float), psi, F)
    for _ in range(steps):
        k1 = f(y)
        k2 = f(add(y, k1, h / 2))
        k3 = f(add(y, k2, h / 2))
        k4 = f(add(y, k3, h))
        y = tuple(y[i] + h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]) for i in range(4))
    return y


@pytest.mark.parametrize("kind", ["dilation", "shift_re", "shift_im", "scale", "rotate"])
def test_flows_match_group_shape(kind):
    gen = next(g for g in equivalence_algebra(1) if g.kind == kind)
    s = 0.37
    y0 = (0.6, [0.8], 0.9 - 0.2j, 1.1 + 0.5j)
    got = rk4(gen, y0, s)
    want = gen.flow(s).map_point(0.6, [0.8], 0.9 - 0.2j, 1.1 + 0.5j)
    for g, w in zip(got, want):
        assert np.allclose(g, w, rtol=1e-9, atol=1e-10), kind


def test_scale_flow_is_pure_alpha():
    gen = next(g for g in equivalence_algebra(2) if g.kind == "scale")
    T = gen.flow(0.5)
    assert (T.delta, T.alpha, T.beta) == (1.0, math.exp(0.5), 0.0)


def test_dilation_flow_delta():
    T = next(g for g in equivalence_algebra(1) if g.kind == "dilation").flow(0.8)
    assert T.delta == pytest.approx(math.exp(0.4))


# ------------------------------------------------------------------ apply_to_F
def test_identity_transform():
    F = parse("abs(psi)^2*psi")
    assert EquivTransform().apply_to_F(F) == F


def test_modulus_rescaling_of_sigma():
    F = parse("(3+4*i)*abs(psi)^(3/2)*psi")
    r = 5 ** (1 / 1.5)
    G = EquivTransform(1.0, r, 0).apply_to_F(F)
    assert is_zero(G - parse("(3/5+4/5*i)*abs(psi)^(3/2)*psi")).is_zero


def test_phase_gauge_kills_linear_term():
    F = parse("(2-3*i)*psi")
    assert is_zero(phase_gauge(-(2 - 3j)).apply_to_F(F)).is_zero


def test_time_gauge_refuses_incompatible_polynomial():
    with pytest.raises(GaugeNotApplicable):
        TimeGauge((0.3 - 0.5j, 0.2)).apply_to_F(parse("(ln(rho) + 2*phi)*psi"))


@pytest.mark.parametrize("text", F_SAMPLES)
def test_pure_transform_preserves_equation_shape(text, rng):
    """i psi~_t~ + Lap~ psi~ + F~(psi~) = (alpha/delta^2)(i psi_t + Lap psi + F(psi))."""
    F = parse(text)
    for _ in range(5):
        T = random_transform(rng)
        Ft = T.apply_to_F(F)
        psi = 0.9 * cmath.exp(0.3j) + 0.1 * complex(*rng.normal(size=2))
        psi_t, lap = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        a, d2 = T.alpha, T.delta ** 2
        old = 1j * psi_t + lap + F_at(F, psi)
        new = 1j * a * psi_t / d2 + a * lap / d2 + F_at(Ft, a * psi + T.beta)
        assert abs(new - a / d2 * old) < 1e-10 * (1 + abs(old))


def test_shift_gauge_against_direct_substitution():
    F = parse("exp(re(psi)) + 2 + 3*i")
    g = ShiftGauge(0, -2j, 1.5j)  # -i Re(kappa) t + i Im(kappa) x.x / 2
    Ft = g.apply_to_F(F)
    psi, t, x = 0.7 + 0.2j, 0.4, 0.3
    s = g.nu1 * t + g.nu2 * x * x
    s_t, lap_s = g.nu1, 2 * g.nu2
    want = F_at(F, psi - s, t=t, x=(x,)) - 1j * s_t - lap_s
    assert abs(F_at(Ft, psi, t=t, x=(x,)) - want) < 1e-12


def test_shift_gauge_refuses_when_t_dependence_remains():
    with pytest.raises(GaugeNotApplicable):
        ShiftGauge(0, 1.0, 0).apply_to_F(parse("abs(psi)^2*psi"))


def test_time_gauge_against_direct_substitution():
    # F = (A ln rho + B phi) psi absorbs P = c t when A Re c + B Im c = 0
    F = parse("(ln(rho) + 2*phi)*psi + (1-i)*psi")
    g = TimeGauge((0.3 * (2 - 1j),))
    Ft = g.apply_to_F(F)
    t = 0.4
    P = g.coeffs[0] * t
    dP = g.coeffs[0]
    psi = 0.8 + 0.3j
    want = cmath.exp(P) * F_at(F, psi * cmath.exp(-P), t=t) - 1j * dP * psi
    assert abs(F_at(Ft, psi, t=t) - want) < 1e-9


# ------------------------------------------------------------------ group laws
def test_round_trip_50_transforms(rng):
    F = parse("(1+2*i)*abs(psi)^(3/2)*psi + exp(im(psi))")
    s = Sampler(samples=60, seed=2)
    for _ in range(50):
        T = random_transform(rng)
        back = T.inverse().apply_to_F(T.apply_to_F(F))
        assert is_zero(back - F, s, 1e-10).is_zero


def test_composition_closure(rng):
    F = parse("abs(psi)^2*psi + re(psi)")
    for _ in range(10):
        T1, T2 = random_transform(rng), random_transform(rng)
        both = compose(T2, T1)
        assert isinstance(both, EquivTransform)
        assert is_zero(both.apply_to_F(F) - T2.apply_to_F(T1.apply_to_F(F)), Sampler(),
                       1e-10).is_zero


def test_gauge_families_compose_in_family():
    assert isinstance(compose(ShiftGauge(1, 2, 3), ShiftGauge(0, 1, 0)), ShiftGauge)
    assert isinstance(compose(amp_gauge(1.0), phase_gauge(2.0)), TimeGauge)
    assert isinstance(compose(amp_gauge(1.0), EquivTransform(2.0)), Chain)


@pytest.mark.parametrize("case_id", ["T2.5", "T2.7", "T2.11", "T1.3", "T2.3"])
def test_symmetry_transport(case_id, rng):
    rec = next(r for r in casebook(1) if r.id == case_id)
    inst = rec.instantiate(rec.draw(rng))[-1]
    for _ in range(2):
        T = random_transform(rng)
        Ft = T.apply_to_F(inst.F)
        for Q in inst.generators:
            rep = verify_symmetry(Ft, T.pushforward(Q), Sampler(samples=60), prolongation=False)
            assert rep.passed, (case_id, Q.label)


# ------------------------------------------------------------------ normalize
def test_normalize_affine():
    r = normalize(parse("3*psi + 2"))
    assert r.case_id == "T2.1" and r.F.is_zero
    assert is_zero(r.chain.apply_to_F(parse("3*psi + 2"))).is_zero


def test_normalize_unit_sigma():
    r = normalize(parse("(2+0*i)*abs(psi)^2*psi"))
    assert is_zero(r.F - parse("abs(psi)^2*psi")).is_zero


def test_normalize_exponential():
    F = parse("(1-2*i)*exp(re(psi)) + 4 - i")
    r = normalize(F)
    assert r.case_id == "T2.5"
    # no constant survives; sigma has modulus one
    s = Sampler(samples=30)
    env = s.draw(s.rng())
    v = eval_batch(r.F, env) / np.exp(env["psi"].real)
    assert np.allclose(np.abs(v), 1.0)


@pytest.mark.parametrize("text", F_SAMPLES[:3] + ["psi^2", "ln(abs(re(psi)))"])
def test_normalize_idempotent(text):
    once = normalize(parse(text))
    twice = normalize(once.F)
    assert twice.case_id == once.case_id
    assert is_zero(twice.F - once.F, Sampler(samples=40), 1e-9).is_zero


def test_normalize_reports_failure():
    with pytest.raises(NotNormalizable):
        normalize(parse("abs(psi)^2*psi + 1"))
