import random
from fractions import Fraction

import pytest

from defcalc.linalg import (ChainComplex, ComplexError, SparseMatrix, betti, determinant, inverse, kernel_basis,
                            parse_scalar, format_scalar, rank_kernel_image, solve)


def rand_matrix(rng, r, c, lo=-3, hi=3):
    return SparseMatrix.from_dense([[Fraction(rng.randint(lo, hi), rng.choice([1, 1, 2, 3])) for _ in range(c)]
                                    for _ in range(r)])


def test_scalars_round_trip():
    for text in ("0", "-7", "3/4", "+5/10"):
        assert parse_scalar(format_scalar(parse_scalar(text))) == parse_scalar(text)
    assert format_scalar(Fraction(6, -4)) == "-3/2"
    with pytest.raises(ValueError):
        parse_scalar("1/0")
    with pytest.raises(ValueError):
        parse_scalar("0.5")


def test_rank_nullity_and_kernel():
    rng = random.Random(3)
    for _ in range(30):
        r, c = rng.randint(1, 6), rng.randint(1, 6)
        M = rand_matrix(rng, r, c)
        rki = rank_kernel_image(M)
        assert rki.rank + rki.nullity == c
        for v in kernel_basis(M):
            assert M.apply(v) == {}


def test_solve_and_inverse():
    rng = random.Random(5)
    for _ in range(20):
        M = rand_matrix(rng, 4, 4)
        if M.rank() < 4:
            continue
        Mi = inverse(M)
        assert M @ Mi == SparseMatrix.identity(4)
        b = {0: Fraction(1), 3: Fraction(-2, 3)}
        x = solve(M, b)
        assert M.apply(x) == b


def test_determinant_matches_cofactor_sign():
    M = SparseMatrix.from_dense([[0, 1], [1, 0]])
    assert determinant(M) == -1
    M = SparseMatrix.from_dense([[Fraction(1, 2), 2, 0], [1, 3, 1], [0, 1, 4]])
    # 1/2 (12 - 1) - 2 (4 - 0)
    assert determinant(M) == Fraction(11, 2) - 8
    assert determinant(SparseMatrix.from_dense([[1, 2], [2, 4]])) == 0


def test_singular_inverse_raises():
    with pytest.raises(ZeroDivisionError):
        inverse(SparseMatrix.from_dense([[1, 2], [2, 4]]))


def test_cohomology_of_a_circle():
    # two vertices, two edges joining them
    d0 = SparseMatrix.from_dense([[-1, 1], [-1, 1]])
    C = ChainComplex({0: 2, 1: 2}, {0: d0})
    assert betti(C) == {0: 1, 1: 1}


def test_nonzero_square_is_refused():
    d = SparseMatrix.from_dense([[1]])
    C = ChainComplex({0: 1, 1: 1, 2: 1}, {0: d, 1: d})
    with pytest.raises(ComplexError):
        betti(C)


def test_text_round_trip():
    M = SparseMatrix.from_dense([[1, Fraction(-2, 3)], [0, 5]])
    assert SparseMatrix.from_text(M.to_text()) == M
