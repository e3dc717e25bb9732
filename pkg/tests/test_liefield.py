import itertools

import numpy as np
import pytest

from nlsym.liefield import (AnsatzParams, NotAntisymmetric, UnknownGenerator, VectorField,
                            check_defining_equations, from_ansatz, galilei_kernel,
                            kernel_generators, lie_bracket, named_generator, span_contains)
from nlsym.symexpr import PSI, SamplePoint, Sampler, eval_numeric, is_zero, parse
from nlsym.symexpr import core as C


def G(name, n=1, **p):
    return named_generator(name, p, n)


def same(Q1, Q2):
    s = Sampler(n=Q1.n, samples=40, seed=1)
    return all(is_zero(a - b, s).is_zero for a, b in zip(Q1.components(), Q2.components()))


def combo(*pairs):
    out = None
    for c, Q in pairs:
        out = Q.scale(c) if out is None else out + Q.scale(c)
    return out


# ------------------------------------------------------------------ catalogue
def test_galilei_boost_components():
    Q = G("Ga", 2, a=1)
    assert Q.xi0.is_zero
    assert Q.xi[0] == C.T and Q.xi[1].is_zero
    assert is_zero(Q.eta - C.HALF * C.x(1) * C.I * PSI).is_zero


def test_I_is_pure_amplitude():
    Q = G("I")
    assert Q.xi0.is_zero and all(v.is_zero for v in Q.xi) and Q.eta == PSI


def test_pi_eta_hand_value():
    Q = G("Pi", 2)
    v = eval_numeric(Q.eta, SamplePoint(1.0, (1.0, 0.0), 1.0))
    assert v == pytest.approx(-1 + 0.25j)


@pytest.mark.parametrize("name, params, err", [
    ("Bogus", {}, UnknownGenerator),
    ("Pa", {"a": 3}, IndexError),
    ("expM", {}, KeyError),
])
def test_named_generator_errors(name, params, err):
    with pytest.raises(err):
        named_generator(name, params, 2)


# ------------------------------------------------------------------ ansatz
def test_ansatz_dilation():
    assert same(from_ansatz(AnsatzParams(xi0=C.T), 2), G("D", 2))


def test_ansatz_projective():
    n = 2
    p = AnsatzParams(xi0=C.T * C.T, zeta=C.const(-n / 2) * C.T)
    assert same(from_ansatz(p, n), G("Pi", n))


def test_ansatz_boost():
    assert same(from_ansatz(AnsatzParams(chi=[C.T, 0]), 2), G("Ga", 2, a=1))


def test_ansatz_rejects_symmetric_kappa():
    with pytest.raises(NotAntisymmetric):
        from_ansatz(AnsatzParams(kappa=[[0, 1], [1, 0]]), 2)


def test_ansatz_output_satisfies_defining_system(rng):
    for _ in range(5):
        k = rng.normal()
        p = AnsatzParams(xi0=parse(f"{abs(k):.3f}*t^2 + t", 3),
                         kappa=[[0, k, 0], [-k, 0, 1], [0, -1, 0]],
                         chi=[parse("t^3", 3), C.ZERO, parse("exp(t)", 3)],
                         zeta=parse("(1+2*i)*t", 3), eta0=parse("x1*x2 + i*t", 3))
        assert check_defining_equations(from_ansatz(p, 3)).ok


# ------------------------------------------------------------------ defining equations
@pytest.mark.parametrize("name", ["Ga", "Pt", "Pi", "D", "M"])
def test_defining_equations_hold(name):
    Q = G(name, 2, a=1) if name == "Ga" else G(name, 2)
    assert check_defining_equations(Q).ok


def test_symmetric_xi_violates_rotation_equation():
    Q = VectorField.make(2, xi=[C.x(2), C.x(1)])
    rep = check_defining_equations(Q)
    assert not rep.ok
    assert any("xi" in f for f in rep.failures())


def test_eta_quadratic_in_psi_is_caught():
    rep = check_defining_equations(VectorField.make(1, eta=PSI * PSI))
    assert not rep.ok


# ------------------------------------------------------------------ brackets
def test_bracket_translations_commute():
    assert lie_bracket(G("Pt", 2), G("Pa", 2, a=1)).is_structurally_zero


def test_bracket_D_G():
    assert same(lie_bracket(G("D", 2), G("Ga", 2, a=1)), G("Ga", 2, a=1).scale(C.HALF))


@pytest.mark.parametrize("n", [1, 2, 3])
def test_bracket_Pt_Pi(n):
    want = combo((2, G("D", n)), (-n / 2, G("I", n)))
    assert same(lie_bracket(G("Pt", n), G("Pi", n)), want)


def test_heisenberg_relations():
    n = 2
    for a, b in itertools.product((1, 2), repeat=2):
        B = lie_bracket(G("Pa", n, a=a), G("Ga", n, a=b))
        want = G("M", n).scale(C.HALF) if a == b else VectorField.make(n)
        assert same(B, want)
    assert same(lie_bracket(G("Pt", n), G("Ga", n, a=2)), G("Pa", n, a=2))


def test_euclidean_structure_constants():
    n = 3
    for a, b, c in itertools.product((1, 2, 3), repeat=3):
        if b == c:
            continue
        B = lie_bracket(G("Pa", n, a=a), G("Jab", n, a=b, b=c))
        want = VectorField.make(n)
        if a == b:
            want = want + G("Pa", n, a=c)
        if a == c:
            want = want - G("Pa", n, a=b)
        assert same(B, want), (a, b, c)
        assert lie_bracket(G("Pt", n), G("Jab", n, a=b, b=c)).is_structurally_zero


def _catalogue(n):
    out = [G("Pt", n), G("I", n), G("M", n), G("D", n), G("Pi", n)]
    out += [G("Pa", n, a=a) for a in range(1, n + 1)] + [G("Ga", n, a=a) for a in range(1, n + 1)]
    out += [G("Jab", n, a=a, b=b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    return out


def test_antisymmetry_and_jacobi():
    ops = _catalogue(2)
    s = Sampler(n=2, samples=20, seed=3)
    for Q1, Q2 in itertools.combinations(ops, 2):
        assert same(lie_bracket(Q1, Q2), -lie_bracket(Q2, Q1))
    for Q1, Q2, Q3 in itertools.combinations(ops[:7], 3):
        J = (lie_bracket(Q1, lie_bracket(Q2, Q3)) + lie_bracket(Q2, lie_bracket(Q3, Q1))
             + lie_bracket(Q3, lie_bracket(Q1, Q2)))
        assert all(is_zero(c, s).is_zero for c in J.components())


# ------------------------------------------------------------------ span
def test_span_coefficients():
    basis = [G("D"), G("I"), G("M")]
    r = span_contains(basis, combo((2, G("D")), (3, G("I"))))
    assert r.contains
    assert np.allclose(r.coefficients, [2, 3, 0])


def test_span_rejects_outsider():
    assert not span_contains([G("D"), G("I")], G("Pi")).contains


def test_boosts_commute_in_span():
    B = lie_bracket(G("Ga", 2, a=1), G("Ga", 2, a=2))
    assert span_contains(galilei_kernel(2), B).contains


def test_pi_sol_gen_modulo_solutions():
    from nlsym.classify.witnesses import free_solutions
    eta0 = free_solutions(1)[1]
    B = lie_bracket(G("Pi"), named_generator("sol_gen", {"eta0": eta0}, 1))
    basis = kernel_generators(1) + [G("I"), G("M"), G("D"), G("Pi"), G("Ga", a=1)]
    assert not span_contains(basis, B).contains
    r = span_contains(basis, B, modulo_solutions=True, F=C.ZERO)
    assert r.contains and r.remainder_check.is_zero
