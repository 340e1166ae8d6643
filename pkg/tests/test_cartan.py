import random
from fractions import Fraction

import pytest

from defcalc.cartan import (cartan_report, cartan_value, coordinate_field, evaluate_form, exterior_derivative,
                            field_spanning_set, form_spanning_set, kernel_characterization, monomial, phi,
                            truncated_lr, validate_lr, worked_value)


def test_exterior_derivative_sign():
    # d(y dx) = dy ^ dx = -dx ^ dy
    assert exterior_derivative({(0,): monomial((0, 1))}, 2) == {(0, 1): {(0, 0): Fraction(-1)}}


@pytest.mark.parametrize("nvars", [1, 2, 3])
def test_d_squared_is_zero(nvars):
    for i in range(nvars):
        for w in form_spanning_set(nvars, i, 2):
            assert exterior_derivative(exterior_derivative(w, nvars), nvars) == {}


@pytest.mark.parametrize("nvars", [1, 2])
def test_cartan_formula_reproduces_d(nvars):
    rng = random.Random(nvars)
    fields = field_spanning_set(nvars, 1)
    for i in range(min(nvars, 2)):
        for w in form_spanning_set(nvars, i, 2):
            dw = exterior_derivative(w, nvars)
            for _ in range(5):
                vs = [rng.choice(fields) for _ in range(i + 1)]
                assert cartan_value(vs, w) == evaluate_form(dw, vs)


def test_phi_is_linear_over_functions():
    x = coordinate_field(2, 0)
    yd = coordinate_field(2, 1, monomial((1, 1)))
    a = monomial((0, 1), 3)
    lhs = phi([coordinate_field(2, 0, a), yd], 2)
    assert lhs == phi([x, yd], 2).scaled(a)


def test_worked_value_vanishes():
    assert worked_value(1) == {}
    assert worked_value(2) == {}


def test_reports_pass():
    for nvars in (1, 2):
        assert cartan_report(nvars, 2).ok


def test_kernel_characterization_in_two_variables():
    k = kernel_characterization(2, 1)
    assert k["equal"] and k["equal_first_factor"] and k["exact_sequence"]


def test_coordinate_fields_are_not_derivations_of_the_truncated_ring():
    # d/dx(x * x^2) = 3x^2 in the polynomial ring, but x^3 = 0 in Q[x]/(x^3)
    rep = validate_lr(truncated_lr(1, 3))
    assert rep.status("Leibniz") == "fail"


def test_vanishing_fields_form_a_lie_rinehart_algebra():
    for nvars in (1, 2):
        assert validate_lr(truncated_lr(nvars, 3, min_degree=1)).ok
