from fractions import Fraction

import pytest

from defcalc.jacobi import (deformation_ring, is_ring_hom, jacobi, jacobi_module, obstruction, poincare_module,
                            truncated_polynomial_match, truncation_map)
from defcalc.lie import abelian_fixture, adjoint, sl2, symplectic_fixture
from defcalc.linalg import cohomology


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_total_differential_squares_to_zero(m):
    for gm in (symplectic_fixture(), abelian_fixture(2)):
        assert not jacobi(gm, m).double.violations()
        assert not jacobi_module(gm, m).double.violations()
        cohomology(jacobi(gm, m).complex)   # raises if D^2 != 0 after totalization


@pytest.mark.parametrize("h1, m, dim", [(1, 1, 2), (1, 3, 4), (2, 1, 3), (2, 2, 6), (2, 3, 10)])
def test_zero_bracket_gives_truncated_polynomials(h1, m, dim):
    R = deformation_ring(abelian_fixture(h1), m)
    assert R.report.ok
    assert R.ring.dim == dim
    assert truncated_polynomial_match(R.ring, h1, m + 1)["match"]


def test_rigid_algebra_has_trivial_ring():
    g, _ = sl2()
    gm = g.as_geometric(adjoint(g))
    for m in range(1, 5):
        assert deformation_ring(gm, m).ring.dim == 1


def test_truncation_maps_are_ring_homs():
    gm = abelian_fixture(2)
    rings = [deformation_ring(gm, m) for m in (1, 2, 3)]
    for big, small in zip(rings[1:], rings):
        f = truncation_map(big, small)
        assert is_ring_hom(f, big.ring, small.ring)


def test_obstruction_of_the_symplectic_model_is_nonzero():
    ob = obstruction(symplectic_fixture())
    assert (ob["h1"], ob["h2"]) == (6, 3)
    assert not ob["zero"]
    assert obstruction(abelian_fixture(2))["zero"]


def test_poincare_module_is_free_of_fiber_rank():
    for m in (1, 2, 3):
        P = poincare_module(abelian_fixture(2), m)
        assert P.report.ok
        assert P.info["rank"] == 2 and P.info["P_dim"] == 2 * P.info["R_dim"]


def test_fiber_check_not_applicable_with_nontrivial_action():
    g, rep = sl2()
    P = poincare_module(g.as_geometric(rep), 2)
    assert P.report.status("P (x) residue = degree-0 fiber") == "n/a"
    assert P.info["trivial_action"] is False


def test_ring_is_local_with_nilpotent_maximal_ideal():
    R = deformation_ring(symplectic_fixture(), 2)
    assert R.report.ok
    one = {0: Fraction(1)}
    assert R.ring.mul(one, one) == one


def test_symplectic_ring_at_order_four():
    # about a minute; kept out of the timed acceptance suite
    R = deformation_ring(symplectic_fixture(), 4)
    assert R.report.ok
    assert R.ring.dim == 259
