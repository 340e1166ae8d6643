import pytest

from defcalc import artin as art
from defcalc.linalg import SparseMatrix


def test_truncated_polynomial_rings():
    for nvars, dim in ((1, 3), (2, 6), (3, 10)):
        S = art.truncated_polynomial(nvars, 3)
        rep = art.artin_validate(S)
        assert rep.ok and S.dim == dim
        assert rep.info["nilpotency_index"] == 3


def test_non_local_algebra_is_rejected():
    # Q x Q with idempotents
    S = art.ArtinAlgebra(("1", "p"), {(0, 0): {0: 1}, (0, 1): {1: 1}, (1, 0): {1: 1}, (1, 1): {1: 1}}, 0)
    assert not art.artin_validate(S).ok


def test_free_module_shapes():
    S = art.truncated_polynomial(2, 3)
    acts = art.free_actions(S, 2)
    assert art.validate_module(S, acts).ok
    assert art.freeness(S, acts, adapted_actions=False) == {"dim": 12, "rank": 2, "free": True}


def test_residue_field_is_not_free():
    S = art.truncated_polynomial(1, 3)
    acts = [SparseMatrix.identity(1)] + [SparseMatrix.zeros(1, 1)] * 2
    assert art.validate_module(S, acts).ok
    assert not art.freeness(S, acts, adapted_actions=False)["free"]


@pytest.mark.parametrize("nvars", [1, 2])
@pytest.mark.parametrize("rank", [1, 2])
def test_duality_round_trips(nvars, rank):
    S = art.truncated_polynomial(nvars, 3)
    acts = art.free_actions(S, rank)
    for m in range(4):
        dd, C, G = art.double_dual_map(S, acts, m)
        assert art.validate_mos(G).ok
        assert dd.iso and dd.inverse is not None
        assert dd.inverse @ dd.matrix == SparseMatrix.identity(dd.matrix.cols)
        ev, _ = art.evaluation_map(S, G, m)
        assert ev.iso and ev.inverse is not None


def test_dual_tower_dims():
    S = art.truncated_polynomial(1, 3)
    T = art.dual_tower(S, 2)
    assert T.dims0 == (1, 2, 3)


def test_standard_tower_is_mos():
    S = art.truncated_polynomial(2, 3)
    assert art.validate_mos(art.standard_tower(S, 2, copies=2)).ok


def test_non_associative_action_is_caught():
    S = art.truncated_polynomial(1, 3)
    x = SparseMatrix.from_dense([[0, 0], [1, 0]])
    acts = [SparseMatrix.identity(2), x, x]      # x^2 should act as x @ x = 0
    assert not art.validate_module(S, acts).ok
    acts = [SparseMatrix.identity(2), x, SparseMatrix.zeros(2, 2)]
    assert art.validate_module(S, acts).ok


def test_residue_module_transpose_dims():
    # B^i(k) = B_0^i (x)_S k counts minimal generators of B_0^i
    for nvars, dims in ((1, [1, 1, 1]), (2, [1, 2, 3])):
        S = art.truncated_polynomial(nvars, 3)
        k = [SparseMatrix.identity(1)] + [SparseMatrix.zeros(1, 1)] * (S.dim - 1)
        assert art.transpose_module(S, k, 2).dims == dims
