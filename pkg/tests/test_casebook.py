import numpy as np
import pytest

from nlsym.classify import ConstraintError, casebook, record, table_ids
from nlsym.classify.casebook import evaluate
from nlsym.invariance import verify_symmetry
from nlsym.symexpr import Sampler


def test_record_counts():
    assert [len(table_ids(t)) for t in ("1", "2", "theorem")] == [6, 15, 5]
    assert len(casebook(2)) == 26


def test_unknown_dimension_and_id():
    with pytest.raises(ValueError):
        casebook(7)
    with pytest.raises(KeyError):
        record("T3.1")


def test_critical_power_operators():
    rec = record("T2.8", 2)
    inst = rec.instantiate(rec.draw(np.random.default_rng(0)))[0]
    assert [Q.label for Q in inst.generators] == ["G_1", "G_2", "M", "I - (4/n)D", "Pi"]


def test_arbitrary_modulus_function():
    rec = record("T1.4")
    assert rec.has_f and rec.Omega_text == "rho" and rec.param_names == []
    assert rec.F_text == "f(Omega)*psi"


def test_theorem_twin_points_at_table():
    rec = record("Thm.4")
    assert rec.table == "theorem" and rec.twin["id"] == "T2.12"
    # the theorem works modulo the extended Galilei algebra, the table modulo translations
    assert len(rec.kernel()) > len(record("T2.12").kernel())


def test_all_draws_admissible(rng):
    for rec in casebook(1):
        for b in range(len(rec.branches)):
            vals = rec.draw(rng, b)
            assert rec.admissible(vals), rec.id


def test_violation_reported():
    rec = record("T2.13")
    bad = rec.violations({"delta1": 1, "delta2": 0, "delta3": 0, "delta4": 1})
    assert bad and "Delta" in bad[0]


def test_impossible_constraints_raise(rng):
    rec = record("T2.13")
    # Delta > 0 cannot hold when every delta is pinned to zero
    pinned = rec.__class__(**{**rec.__dict__,
                              "params": tuple((k, {"value": 0}) for k, _ in rec.params)})
    with pytest.raises(ConstraintError):
        pinned.draw(rng, tries=5)


@pytest.mark.parametrize("case_id", ["T2.13", "T2.14", "T2.15"])
def test_derived_rates_are_eigenvalues(case_id, rng):
    """The log-phase cases reduce to A' = d2 A + d4 B, B' = -d1 A + d3 B."""
    rec = record(case_id)
    for _ in range(5):
        vals = rec.draw(rng)
        d1, d2, d3, d4 = (float(vals[k]) for k in ("delta1", "delta2", "delta3", "delta4"))
        full = rec.derived_values(vals)
        ev = np.linalg.eigvals(np.array([[d2, d4], [-d1, d3]]))
        disc = (ev[0] - ev[1]) ** 2
        assert float(full["Delta"]) == pytest.approx(disc.real, abs=1e-12)
        if case_id == "T2.13":
            got = sorted([float(full["lambda1"]), float(full["lambda2"])])
            assert np.allclose(got, sorted(ev.real), atol=1e-12)
        elif case_id == "T2.14":
            assert float(full["mu"]) == pytest.approx(ev[0].real)
            assert float(full["nu"]) == pytest.approx(abs(ev[0].imag))
        else:
            assert np.allclose(ev, float(full["mu"]), atol=1e-6)


def test_evaluate_helper():
    assert evaluate("4/n", {}, 2) == 2
    assert abs(complex(evaluate("sqrt(x)", {"x": -4}, 1)) - 2j) < 1e-12


@pytest.mark.parametrize("case_id", table_ids("2"))
def test_table2_generators_verify(case_id):
    rec = record(case_id)
    inst = rec.instantiate(rec.draw(np.random.default_rng(3)))[0]
    for Q in rec.kernel() + inst.generators:
        assert verify_symmetry(inst.F, Q, rec.sampler(samples=60), prolongation=False).passed, \
            (case_id, Q.label)
