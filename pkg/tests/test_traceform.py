import random
from math import isqrt
from fractions import Fraction

import pytest

from defcalc.lie import abelian_fixture, random_basis_change, symplectic_fixture, validate_geometric_model
from defcalc.traceform import (dtau, eta_scalar_form, module_map_check, nondegeneracy, pfaffian, random_model, tau,
                               trace_form_report)


def test_pfaffian_of_standard_blocks():
    J = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 3], [0, 0, -3, 0]]
    J = [[Fraction(v) for v in row] for row in J]
    assert pfaffian(J) == 3
    assert nondegeneracy(J)["determinant"] == "9"
    assert pfaffian([[Fraction(0)] * 3] * 3) == 0


def test_symplectic_fixture_trace_form():
    gm = symplectic_fixture()
    tf = tau(gm)
    assert (tf.h1, tf.h2A) == (6, 1)
    S = eta_scalar_form(tf, [1])
    nd = nondegeneracy(S)
    assert nd["alternating"] and nd["nondegenerate"]
    assert nd["determinant"] == "4" and nd["pfaffian"] == "-2"


def test_scaling_eta_scales_the_determinant():
    tf = tau(symplectic_fixture())
    d1 = Fraction(nondegeneracy(eta_scalar_form(tf, [1]))["determinant"])
    d2 = Fraction(nondegeneracy(eta_scalar_form(tf, [Fraction(1, 2)]))["determinant"])
    assert d2 == d1 / 2 ** 6


def test_eta_length_is_checked():
    with pytest.raises(ValueError):
        eta_scalar_form(tau(symplectic_fixture()), [1, 1])


def test_dtau_vanishes_both_ways_on_the_symplectic_model():
    dt = dtau(symplectic_fixture())
    assert dt.report.ok and dt.zero


def test_module_map_check_on_fixtures():
    assert module_map_check(symplectic_fixture()).ok
    assert module_map_check(abelian_fixture(2)).ok


@pytest.mark.parametrize("seed", range(5))
def test_fuzzed_models(seed):
    rng = random.Random(seed)
    gm, mats = random_model(rng)
    assert validate_geometric_model(gm).ok
    rep, data = trace_form_report(gm, None, mats)
    assert rep.ok, [c.name for c in rep.failures]
    assert all(not any(v != "0" for v in row) for row in data["dtau"]["composite"])


def test_tau_is_basis_independent_up_to_congruence():
    gm = symplectic_fixture()
    moved = random_basis_change(gm, random.Random(3))
    a = nondegeneracy(eta_scalar_form(tau(gm), [1]))
    b = nondegeneracy(eta_scalar_form(tau(moved), [1]))
    # determinants of congruent forms differ by a nonzero square
    ratio = Fraction(b["determinant"]) / Fraction(a["determinant"])
    assert ratio > 0
    assert isqrt(ratio.numerator) ** 2 == ratio.numerator and isqrt(ratio.denominator) ** 2 == ratio.denominator
    assert a["alternating"] and b["alternating"]
