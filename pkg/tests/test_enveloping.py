import random
from fractions import Fraction

from defcalc.enveloping import (GradedOperator, Rho, augmentation_words, criterion_from_contraction,
                                derivation_defect, graded_trace, interior_criterion, pbw, random_operator,
                                rho_report, symmetric_power_dim, traceless_image_check)
from defcalc.lie import sl2, sl_gl_of


def test_pbw_dimensions():
    g, _ = sl2()
    for m in range(4):
        assert pbw(g, m).dim == sum(symmetric_power_dim(3, i) for i in range(m + 1))


def test_straightening_reproduces_the_bracket():
    g, _ = sl2()
    U = pbw(g, 2)
    e, h, f = 0, 1, 2
    # e f - f e = h inside U
    ef = U.mul({(e,): Fraction(1)}, {(f,): Fraction(1)})
    fe = U.mul({(f,): Fraction(1)}, {(e,): Fraction(1)})
    diff = {k: ef.get(k, 0) - fe.get(k, 0) for k in set(ef) | set(fe)}
    assert {k: v for k, v in diff.items() if v} == {(h,): 1}


def test_rho_on_sl2_standard():
    g, rep = sl2()
    for m in range(4):
        assert rho_report(g, rep, m).ok


def test_rho_bracket_and_pbw_on_gl2():
    g, rep = sl_gl_of(2, "gl")
    for m in range(4):
        r = rho_report(g, rep, m)
        assert r.status("rho bracket") == "pass"
        assert r.status("PBW dimension") == "pass"


def test_rho_injective_on_gl2():
    # the identity matrix acts as the Euler operator, whose powers become
    # dependent on other words in low order; see the decision ledger
    g, rep = sl_gl_of(2, "gl")
    for m in range(4):
        assert rho_report(g, rep, m).status("rho injective") == "pass", f"m = {m}"


def test_trace_is_a_derivation():
    rng = random.Random(11)
    for _ in range(100):
        phi, psi = random_operator(2, 3, rng), random_operator(2, 3, rng)
        assert derivation_defect(phi, psi).is_zero()


def test_trace_kills_rho_of_augmentation_ideal():
    g, rep = sl2()
    U = pbw(g, 3)
    R = Rho(U, rep, 3)
    for w in augmentation_words(U):
        assert graded_trace(R.of_word(w)).is_zero(), w


def test_trace_lowers_degree_by_one():
    phi = GradedOperator.identity(2, 3)
    t = graded_trace(phi)
    assert t.N == 2
    # tr(id) on S^i is (n + i) id
    for i in range(3):
        assert t.comps[i] == GradedOperator.identity(2, 3).comps[i].scale(2 + i)


def test_contraction_equals_interior_criterion():
    rng = random.Random(4)
    for _ in range(100):
        phi = random_operator(2, 3, rng)
        tr = graded_trace(phi)
        for i in range(3):
            assert interior_criterion(phi, i) == criterion_from_contraction(tr, i)


def test_traceless_image_readings_are_reported():
    out = traceless_image_check(2, 1)
    assert out["sl_aug_image_dim"] == 3
    assert {"augmentation_reading_equal", "unital_reading_equal", "window"} <= set(out)
