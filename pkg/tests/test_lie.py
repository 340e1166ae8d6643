import random

import pytest

from defcalc.jacobi import lie_cohomology
from defcalc.lie import (abelian_fixture, adjoint, change_basis, random_basis_change, sl2, sl_gl_of,
                         symplectic_fixture, trivial_rep, validate_geometric_model, validate_lie, validate_rep)
from defcalc.linalg import SparseMatrix, betti
from defcalc.multilinear import (EXTERIOR, SYMMETRIC, coproduct, graded_power_dim, normalize, parities,
                                 power_basis)


@pytest.mark.parametrize("kind", ["sl", "gl"])
def test_matrix_algebras_validate(kind):
    g, rep = sl_gl_of(2, kind)
    assert validate_lie(g).ok and validate_rep(g, rep).ok
    assert validate_rep(g, adjoint(g)).ok


def test_broken_jacobi_is_caught():
    g, _ = sl2()
    table = dict(g.brackets)
    table[(0, 2)] = {1: 1, 0: 1}    # [e, f] = h + e
    table[(2, 0)] = {1: -1, 0: -1}
    bad = type(g)(g.labels, table)
    assert validate_lie(bad).status("jacobi") == "fail"


def test_sl2_cohomology():
    g, rep = sl2()
    assert lie_cohomology(g, trivial_rep(g)) == {0: 1, 1: 0, 2: 0, 3: 1}
    assert set(lie_cohomology(g, adjoint(g)).values()) == {0}
    assert set(lie_cohomology(g, rep).values()) == {0}


def test_abelian_cohomology_is_exterior_algebra():
    g, _ = sl_gl_of(2, "gl")
    ab = type(g)(("a", "b"), {})
    assert lie_cohomology(ab, trivial_rep(ab)) == {0: 1, 1: 2, 2: 1}


def test_fixture_models_validate():
    for gm in (symplectic_fixture(), abelian_fixture(2), abelian_fixture(1, with_module=False)):
        assert validate_geometric_model(gm).ok, gm.name


def test_basis_change_keeps_models_valid_and_cohomology():
    rng = random.Random(0)
    gm = symplectic_fixture()
    for _ in range(3):
        moved = random_basis_change(gm, rng)
        assert validate_geometric_model(moved).ok
        assert betti(moved.L_complex()[0]) == betti(gm.L_complex()[0])
        assert betti(moved.A_complex()[0]) == betti(gm.A_complex()[0])


def test_basis_change_refuses_mixing_degrees():
    gm = symplectic_fixture()
    n = gm.L.dim
    P = SparseMatrix(n, n, {i: {i: 1} for i in range(n)} | {0: {0: 1, 1: 1}})
    with pytest.raises(ValueError):
        change_basis(gm, P, SparseMatrix.identity(gm.A.dim))


def test_sign_rules():
    par = parities(EXTERIOR, [0, 0, 1])     # shifted: two odd letters, one even
    assert normalize((1, 0), par) == (-1, (0, 1))
    assert normalize((0, 0), par) == (0, None)
    assert normalize((2, 2), par) == (1, (2, 2))
    assert parities(SYMMETRIC, [0, 1]) == (0, 1)


@pytest.mark.parametrize("ne, no", [(3, 0), (0, 3), (2, 2)])
def test_power_dimensions(ne, no):
    degrees = [1] * ne + [0] * no          # exterior shift: degree-1 letters are even
    for i in range(5):
        assert power_basis(EXTERIOR, degrees, i).dim == graded_power_dim(ne, no, i)


def test_coproduct_is_coassociative_on_a_word():
    par = (1, 1, 0)
    x = {(0, 1, 2): 1}
    full = coproduct(x, par, reduced=False)
    left, right = {}, {}
    for (a, b), c in full.items():
        for (aa, ab), cc in coproduct({a: 1}, par, reduced=False).items():
            left[(aa, ab, b)] = left.get((aa, ab, b), 0) + c * cc
        for (ba, bb), cc in coproduct({b: 1}, par, reduced=False).items():
            right[(a, ba, bb)] = right.get((a, ba, bb), 0) + c * cc
    assert {k: v for k, v in left.items() if v} == {k: v for k, v in right.items() if v}
