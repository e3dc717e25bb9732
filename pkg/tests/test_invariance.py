import numpy as np
import pytest

from nlsym.classify import casebook
from nlsym.invariance import (DefiningViolated, classifying_residual, prolongation_residual,
                              verify_symmetry)
from nlsym.liefield import VectorField, kernel_generators, lie_bracket, named_generator
from nlsym.symexpr import PSI, Sampler, const, eval_batch, is_zero, parse, substitute
from nlsym.symexpr import core as C


def power_F(sigma, gamma, n=1):
    return substitute(parse("sigma*abs(psi)^gamma*psi", n),
                      {"sigma": const(sigma), "gamma": const(gamma)})


def I_minus_gamma_D(gamma, n):
    return named_generator("I", n=n) + named_generator("D", n=n).scale(-gamma)


def test_free_pi_structural_zero():
    assert classifying_residual(C.ZERO, named_generator("Pi", n=1)).is_zero


@pytest.mark.parametrize("n", [1, 2, 3])
def test_power_law_dilation(n, rng):
    for _ in range(3):
        s = complex(*rng.normal(size=2))
        g = float(rng.uniform(-1.5, 3))
        r = classifying_residual(power_F(s, g, n), I_minus_gamma_D(g, n))
        assert is_zero(r, Sampler(n=n)).is_zero


def test_cubic_pi_fails_in_one_dimension():
    z = is_zero(classifying_residual(power_F(1, 2), named_generator("Pi")), Sampler())
    assert z.verdict == "NONZERO" and z.witness is not None


def test_defining_violation_raises():
    with pytest.raises(DefiningViolated):
        classifying_residual(C.ZERO, VectorField.make(1, eta=PSI * PSI))


def test_time_translation_prolongation_vanishes():
    F = parse("exp(re(psi)) + abs(psi)^3*psi*phi")
    assert is_zero(prolongation_residual(F, named_generator("Pt")),
                   Sampler(jets=True)).is_zero


def test_broken_field_shows_up_in_jet_monomials():
    Q = VectorField.make(1, eta=PSI * PSI)
    raw = prolongation_residual(C.ZERO, Q, raw=True)
    # the psi_1^2 coefficient is 2 eta_psipsi = 4 -> nonzero
    assert not is_zero(raw, Sampler(jets=True)).is_zero
    assert C.depends_on(raw, "psi_1")


def test_verify_examples():
    s = Sampler(n=1, samples=80)
    rng = np.random.default_rng(0)
    for rec in casebook(1):
        inst = rec.instantiate(rec.draw(rng))[0]
        for Q in kernel_generators(1):
            assert verify_symmetry(inst.F, Q, rec.sampler(samples=80)).passed, rec.id
    # table 1.6 with a trigonometric theta
    d1, d2 = 0.5, -0.81
    F = parse(f"re(psi)^3 + i*({d1} + {d2}*i)*psi")
    theta = parse("cos(0.9*x1)")
    Q = named_generator("theta_gen", {"theta": theta, "delta1": const(d1)}, 1)
    assert verify_symmetry(F, Q, s).passed
    rep = verify_symmetry(parse("exp(re(psi))"), named_generator("M"), s)
    assert rep.verdict == "FAIL" and rep.witnesses()


def test_conjugate_residual_pairs():
    F = power_F(1 + 1j, 1.3)
    Q = named_generator("Pi")
    env = Sampler(samples=50).draw(np.random.default_rng(1))
    r = eval_batch(classifying_residual(F, Q), env)
    rc = eval_batch(C.conj(classifying_residual(F, Q)), env)
    assert np.allclose(np.abs(r), np.abs(rc))


def test_residual_is_real_linear_in_Q():
    F = power_F(0.7, 1.1)
    Q1, Q2 = named_generator("Pi"), named_generator("Ga", {"a": 1})
    env = Sampler(samples=100).draw(np.random.default_rng(2))
    lhs = eval_batch(classifying_residual(F, Q1.scale(2.5) + Q2.scale(-1.5)), env)
    rhs = 2.5 * eval_batch(classifying_residual(F, Q1), env) \
        - 1.5 * eval_batch(classifying_residual(F, Q2), env)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-12)


def test_brackets_of_symmetries_are_symmetries():
    rec = [r for r in casebook(2) if r.id == "T2.8"][0]
    inst = rec.instantiate(rec.draw(np.random.default_rng(4)))[0]
    ops = rec.kernel() + inst.generators
    for i, Q1 in enumerate(ops):
        for Q2 in ops[i + 1:]:
            assert verify_symmetry(inst.F, lie_bracket(Q1, Q2), Sampler(n=2, samples=40),
                                   prolongation=False).passed


def test_oracles_agree_on_casebook_sample():
    rng = np.random.default_rng(5)
    for rec in casebook(1):
        inst = rec.instantiate(rec.draw(rng))[-1]
        for Q in rec.kernel() + inst.generators:
            d = classifying_residual(inst.F, Q, check=False) - prolongation_residual(inst.F, Q)
            assert is_zero(d, rec.sampler(samples=40, jets=True), 1e-8).is_zero, (rec.id, Q.label)
