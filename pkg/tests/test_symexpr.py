import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nlsym.classify import casebook
from nlsym.symexpr import (CPSI, PSI, I, Lambda, ParseError, Sampler, SamplePoint,
                           SingularEvaluation, UnknownSymbolError, IndexOutOfRangeError,
                           conjugate, const, desugar, differentiate, eval_batch, eval_numeric,
                           is_zero, parse, pretty, simplify, substitute, to_text)
from nlsym.symexpr import core as C

PSI0 = 0.8 + 0.45j


def at(e, psi=PSI0, t=0.3, x=(0.2, -0.4, 0.1), n=3, **params):
    return eval_numeric(e, SamplePoint(t, x[:n], psi, params))


def wirtinger_fd(e, psi, h=1e-6):
    """Central differences in Re/Im psi: d/dpsi = (d_x - i d_y)/2, d/dpsi* = (d_x + i d_y)/2."""
    f = lambda z: at(e, z)  # noqa: E731
    dx = (f(psi + h) - f(psi - h)) / (2 * h)
    dy = (f(psi + 1j * h) - f(psi - 1j * h)) / (2 * h)
    return (dx - 1j * dy) / 2, (dx + 1j * dy) / 2


# ------------------------------------------------------------------ parse
def test_parse_atom():
    assert parse("psi") is PSI


def test_parse_table_pattern_has_parameters():
    e = parse("sigma*abs(psi)^gamma*psi")
    assert {"sigma", "gamma", "psi", "cpsi"} <= set(e.free_symbols())


def test_parse_function_symbol_and_phase():
    e = parse("(f(Omega)+delta*phi)*psi")
    assert "f" in C.func_names(e)
    assert C.depends_on(e, "delta")


@pytest.mark.parametrize("text, err", [
    ("psi*(", ParseError),
    ("psi +* 2", ParseError),
    ("foo*psi", UnknownSymbolError),
    ("x3*psi", IndexOutOfRangeError),
])
def test_parse_errors(text, err):
    with pytest.raises(err) as info:
        parse(text, 2)
    assert info.value.offset >= 0


def test_parse_error_offset_points_at_token():
    with pytest.raises(UnknownSymbolError) as info:
        parse("psi + zeta", 1)
    assert info.value.offset == 6


def test_complex_literal_and_n():
    assert at(parse("1.5+2*i")) == 1.5 + 2j
    assert at(parse("4/n", 2), n=2) == 2


@pytest.mark.parametrize("text", [
    "sigma*abs(psi)^gamma*psi", "(f(Omega)+delta*phi)*psi", "exp(re(psi)) - ln(rho)/3",
    "i*conj(psi)*x1*t^2", "abs(re(psi))^(-1/2) + im(psi)",
])
def test_print_parse_round_trip(text):
    e = simplify(parse(text, 1, params=None))
    again = simplify(parse(to_text(e), 1, params=None))
    assert again == e


# ------------------------------------------------------------------ differentiate
def test_product_rule_trivial():
    assert simplify(differentiate(PSI * CPSI, "psi")) == CPSI


def test_power_derivative_against_finite_differences():
    e = parse("abs(psi)^gamma*psi", params=None)
    e = substitute(e, {"gamma": const(1.7)})
    d_psi, d_cpsi = wirtinger_fd(e, PSI0)
    assert abs(at(differentiate(e, "psi")) - d_psi) <= 1e-6 * abs(d_psi)
    assert abs(at(differentiate(e, "cpsi")) - d_cpsi) <= 1e-6 * abs(d_cpsi)
    # (gamma/2 + 1)|psi|^gamma
    assert abs(at(differentiate(e, "psi")) - 1.85 * abs(PSI0) ** 1.7) < 1e-12


def test_phase_derivative_by_hand():
    got = at(differentiate(C.PHI_E, "psi"))
    assert abs(got - (-0.5j / PSI0)) < 1e-14


def test_derivatives_in_coordinates():
    e = parse("t^2*x2*psi", 2)
    assert at(differentiate(e, "t"), n=2) == pytest.approx(2 * 0.3 * -0.4 * PSI0)
    assert at(differentiate(e, "x2"), n=2) == pytest.approx(0.09 * PSI0)
    assert differentiate(e, "x1").is_zero


def test_wirtinger_consistency_casebook():
    rng = np.random.default_rng(3)
    for rec in casebook(1):
        inst = rec.instantiate(rec.draw(rng))[-1]
        for k in range(10):
            z = (0.5 + rng.uniform(0, 1)) * cmath.exp(1j * rng.uniform(-1, 1))
            d_psi, d_cpsi = wirtinger_fd(inst.F, z)
            for v, ref in (("psi", d_psi), ("cpsi", d_cpsi)):
                got = at(differentiate(inst.F, v), z)
                assert abs(got - ref) <= 1e-6 * (1 + abs(ref)), (rec.id, v)


# ------------------------------------------------------------------ conjugate
def test_conjugate_basics():
    assert conjugate(PSI) is CPSI
    assert simplify(conjugate(I)) == const(-1j)
    e = parse("(2+i)*psi*rho + exp(i*t)*x1")
    assert simplify(conjugate(conjugate(e))) == simplify(e)


def test_conjugate_matches_numeric(sampler):
    e = parse("(2+i)*psi^2*cpsi + ln(rho)*phi + exp(i*t*x1) + abs(re(psi))^(1/3)")
    env = sampler.draw(sampler.rng())
    assert np.allclose(eval_batch(conjugate(e), env), np.conj(eval_batch(e, env)), rtol=1e-12)


# ------------------------------------------------------------------ substitute
def test_substitute_identity_lambda():
    e = parse("f(Omega)")
    assert substitute(e, {"f": Lambda(("w",), C.sym("w"))}) == C.sym("Omega")


def test_substitute_critical_exponent():
    e = substitute(parse("abs(psi)^gamma*psi"), {"gamma": parse("4/n", 2)})
    assert is_zero(e - parse("abs(psi)^2*psi"), Sampler(n=2)).is_zero


def test_substitute_omega_pattern_matches_direct():
    omega = parse("abs(psi)^gamma2*exp(-gamma1*phi)", params=None)
    pat = parse("f(Omega)*abs(psi)^gamma1*psi", params=None)
    vals = {"gamma1": const(0.75), "gamma2": const(-1.25)}
    inst = substitute(substitute(pat, {"Omega": omega, "f": Lambda(("w",), C.sym("w") ** 2)}),
                      vals)
    r, ph = abs(PSI0), cmath.phase(PSI0)
    direct = (r ** -1.25 * math.exp(-0.75 * ph)) ** 2 * r ** 0.75 * PSI0
    assert abs(at(inst) - direct) < 1e-12


def test_substitute_arity_mismatch():
    with pytest.raises(ValueError):
        substitute(parse("f(Omega)"), {"f": Lambda(("u", "v"), C.sym("u"))})


# ------------------------------------------------------------------ simplify
def test_simplify_cancellation():
    assert simplify(PSI + const(-1) * PSI).is_zero


def test_simplify_free_pi_residual_is_structural():
    from nlsym.invariance import classifying_residual
    from nlsym.liefield import named_generator
    assert classifying_residual(C.ZERO, named_generator("Pi", n=2)).is_zero


# ------------------------------------------------------------------ eval
def test_eval_examples():
    assert at(PSI * CPSI, 1 + 1j) == pytest.approx(2)
    assert at(C.PHI_E, 1j) == pytest.approx(math.pi / 2)


def test_eval_singular_is_reported():
    with pytest.raises(SingularEvaluation):
        at(parse("ln(rho)"), 1e-5)


def test_rho_phi_desugar_agree(sampler):
    e = parse("abs(psi)^(3/2)*exp(-(2/3)*phi) + ln(rho)*phi*psi")
    env = sampler.draw(sampler.rng(1))
    a, b = eval_batch(e, env), eval_batch(desugar(e), env)
    assert np.max(np.abs(a - b) / (1 + np.abs(a))) < 1e-12


# ------------------------------------------------------------------ is_zero
def test_is_zero_trivial():
    assert is_zero(PSI - PSI).is_zero


def test_is_zero_nonzero_carries_witness():
    z = is_zero(parse("abs(psi)^2*psi - psi"), Sampler(samples=50))
    assert z.verdict == "NONZERO" and z.witness is not None


# ------------------------------------------------------------------ properties
coef = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
pieces = st.sampled_from([
    "psi^2*cpsi", "abs(psi)^(3/2)*psi", "ln(rho)*psi", "exp(re(psi))", "phi*cpsi",
    "t*x1*psi", "sin(im(psi))", "conj(psi)^3",
])
SAMPLER = Sampler(n=1, samples=60, seed=11)
ENV = SAMPLER.draw(SAMPLER.rng())


def _val(e):
    return eval_batch(e, ENV)


@given(a=coef, b=coef, p=pieces, q=pieces, v=st.sampled_from(["psi", "cpsi", "t", "x1"]))
def test_differentiation_is_linear(a, b, p, q, v):
    e1, e2 = parse(p), parse(q)
    lhs = _val(differentiate(const(a) * e1 + const(b) * e2, v))
    rhs = a * _val(differentiate(e1, v)) + b * _val(differentiate(e2, v))
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


@given(a=coef, p=pieces, q=pieces)
def test_simplify_preserves_value_and_is_idempotent(a, p, q):
    e = C.mul(const(a), parse(p), C.add(parse(q), C.ONE))
    s = simplify(e)
    assert simplify(s) == s
    assert np.allclose(_val(s), _val(e), rtol=1e-10, atol=1e-12)


@given(a=coef, p=pieces)
def test_conjugation_is_a_homomorphism(a, p):
    e = const(a) * parse(p)
    assert np.allclose(_val(conjugate(e)), np.conj(_val(e)), rtol=1e-12, atol=1e-12)


@given(p=pieces)
def test_printing_is_stable(p):
    e = simplify(parse(p))
    assert simplify(parse(to_text(e), 1, params=None)) == e
