import itertools

import numpy as np
import pytest

from nlsym.classify import (ClassifyingEq, NotReducible, canonical_pair, casebook, commutator,
                            lemma1_canonicalize, lemma2_check, matrix_rank, minor_conditions,
                            satisfied_classifying_eqs)
from nlsym.equivalence import random_transform
from nlsym.liefield import named_generator
from nlsym.symexpr import Sampler, eval_batch, is_zero, parse


def brute_rank(q1, q2, tol=1e-9):
    """Rank from the 2x2 minors of the 2x4 matrix, no SVD."""
    rows = [[q.a, q.b, np.conj(q.a), np.conj(q.b)] for q in (q1, q2)]
    if all(abs(v) <= tol for r in rows for v in r):
        return 0
    for i, j in itertools.combinations(range(4), 2):
        if abs(rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]) > tol:
            return 2
    return 1


def rand_eq(rng):
    return ClassifyingEq(*(complex(*rng.normal(size=2)) for _ in range(5)))


# ------------------------------------------------------------------ satisfied equations
def test_cubic_has_two_equations():
    b = satisfied_classifying_eqs(parse("abs(psi)^2*psi"))
    assert b.k == 2 and b.status == "OK"


def test_each_equation_is_satisfied():
    F = parse("exp(re(psi))")
    b = satisfied_classifying_eqs(F)
    assert b.k == 2
    for q in b.eqs:
        assert is_zero(q.residual(F), Sampler(samples=80)).is_zero


def test_zero_is_degenerate():
    b = satisfied_classifying_eqs(parse("0*psi"))
    assert b.status == "DEGENERATE" and b.linear


def test_generic_F_satisfies_nothing():
    assert satisfied_classifying_eqs(parse("abs(psi)^2*psi + exp(im(psi))")).k == 0


def test_residual_by_hand():
    # (a psi + b) F_psi + c.c. + c F + d psi + e for F = psi
    q = ClassifyingEq(1, 2, 3, 4, 5)
    r = q.residual(parse("psi"))
    env = Sampler(samples=5).draw(np.random.default_rng(0))
    psi = env["psi"]
    want = (psi + 2) + 3 * psi + 4 * psi + 5
    assert np.allclose(eval_batch(r, env), want)


# ------------------------------------------------------------------ rank
def test_rank_examples():
    assert matrix_rank(ClassifyingEq(), ClassifyingEq()) == 0
    assert matrix_rank(ClassifyingEq(1), ClassifyingEq(2)) == 1
    # a and i a give independent rows once conjugates are appended
    assert matrix_rank(ClassifyingEq(1), ClassifyingEq(1j)) == 2
    assert matrix_rank(ClassifyingEq(0, 1), ClassifyingEq(1)) == 2


def test_rank_matches_minor_oracle(rng):
    for _ in range(60):
        q1 = rand_eq(rng)
        kind = rng.integers(3)
        if kind == 0:
            q2 = rand_eq(rng)
        elif kind == 1:
            q2 = q1.scale(float(rng.normal()))
        else:
            q2 = ClassifyingEq(0, 0, 1, 2, 3)
        assert matrix_rank(q1, q2) == brute_rank(q1, q2)


# ------------------------------------------------------------------ Lemma 1
@pytest.mark.parametrize("case", [1, 2, 3])
def test_canonical_pairs_are_fixed_points(case, rng):
    for _ in range(5):
        p = canonical_pair(case, rng)
        r = lemma1_canonicalize(*p)
        assert r.case == case
        for got, want in zip(r.pair, p):
            assert np.allclose(got.as_tuple(), want.as_tuple(), atol=1e-10)


@pytest.mark.parametrize("case", [1, 2, 3])
def test_lemma1_undoes_random_mixing(case, rng):
    for _ in range(10):
        p = canonical_pair(case, rng)
        R = rng.normal(size=(2, 2))
        T = random_transform(rng)
        q1, q2 = (ClassifyingEq.from_real(v) for v in R @ np.array([x.as_real() for x in p]))
        r = lemma1_canonicalize(q1.transformed(T), q2.transformed(T))
        assert r.case == case
        back = r.apply(q1.transformed(T), q2.transformed(T))
        for got, want in zip(back, r.pair):
            assert np.allclose(got.as_tuple(), want.as_tuple(), atol=1e-10)


def test_lemma1_rejects_rank_one():
    with pytest.raises(NotReducible):
        lemma1_canonicalize(ClassifyingEq(1), ClassifyingEq(2, 0, 1))


def test_lemma1_on_cubic_is_case_two():
    b = satisfied_classifying_eqs(parse("abs(psi)^2*psi"))
    assert lemma1_canonicalize(*b.eqs).case == 2


def test_lemma1_on_exponential_is_case_three():
    b = satisfied_classifying_eqs(parse("exp(re(psi))"))
    assert lemma1_canonicalize(*b.eqs).case == 3


# ------------------------------------------------------------------ minors
def test_minor_for_power_dilation_vanishes():
    g = 2.0
    b = satisfied_classifying_eqs(parse("abs(psi)^2*psi"))
    Q = named_generator("I") + named_generator("D").scale(-g)
    m1, m2 = minor_conditions(*b.eqs, Q)
    s = Sampler(samples=40)
    assert is_zero(m1, s).is_zero and is_zero(m2, s).is_zero


def test_minor_for_cubic_projective_in_1d_is_nonzero():
    b = satisfied_classifying_eqs(parse("abs(psi)^2*psi"))
    m1, m2 = minor_conditions(*b.eqs, named_generator("Pi"))
    s = Sampler(samples=40)
    assert not (is_zero(m1, s).is_zero and is_zero(m2, s).is_zero)


def test_minor_case_three_shift():
    # F = exp(Re psi): the shift eta = i (pure imaginary constant) is a symmetry
    b = satisfied_classifying_eqs(parse("exp(re(psi))"))
    Q = named_generator("sol_gen", {"eta0": parse("i")}, 1)
    m1, m2 = minor_conditions(*b.eqs, Q)
    s = Sampler(samples=40)
    assert is_zero(m1, s).is_zero and is_zero(m2, s).is_zero


# ------------------------------------------------------------------ Lemma 2 and brackets
def test_lemma2_nonlinear_casebook():
    rng = np.random.default_rng(8)
    for rec in casebook(1):
        inst = rec.instantiate(rec.draw(rng))[-1]
        v = lemma2_check(inst.F, rec.sampler())
        assert v.holds, rec.id


def test_lemma2_linear_ok():
    v = lemma2_check(parse("2*psi + conj(psi)"))
    assert v.linear and v.holds and v.k >= 3


def test_lemma2_holomorphic_counterexample():
    v = lemma2_check(parse("psi^2"))
    assert v.k == 4 and not v.holds and v.note


def test_commutator_is_satisfied(rng):
    F = parse("abs(psi)^2*psi")
    q1, q2 = satisfied_classifying_eqs(F).eqs
    assert is_zero(commutator(q1, q2).residual(F), Sampler(samples=40)).is_zero


def test_commutator_antisymmetric(rng):
    for _ in range(10):
        q1, q2 = rand_eq(rng), rand_eq(rng)
        s = commutator(q1, q2) + commutator(q2, q1)
        assert np.allclose(s.as_tuple(), 0)
