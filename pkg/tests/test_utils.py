"""Tests for the matrix and integration helpers."""

import numpy as np
import pytest
from sympy import QQ

from essential_cr.algebra import ONE, ZERO, CoeffElem, I, gaussian, parse_expr
from essential_cr.utils import (
    NonUnitPivotError,
    SingularMatrixError,
    evaluate_at_origin,
    hermitian_signature,
    identity_matrix,
    is_zero_matrix,
    matmul,
    ring_inverse,
    rk4_step,
    transpose,
)


def _matrix(rows: list[list[str]]) -> list[list[CoeffElem]]:
    return [[parse_expr(entry, 2) for entry in row] for row in rows]


def test_ring_inverse_upper_triangular() -> None:
    """Unit pivots keep the inverse polynomial."""
    matrix = _matrix([["1", "z1"], ["0", "s"]])
    inverse = ring_inverse(matrix)
    assert inverse == _matrix([["1", "-z1*s^-1"], ["0", "s^-1"]])
    assert matmul(matrix, inverse) == identity_matrix(2, 2)


def test_ring_inverse_with_zero_diagonal() -> None:
    """A zero on the diagonal does not matter for adjugate over determinant."""
    matrix = _matrix([["0", "i"], ["2", "t"]])
    inverse = ring_inverse(matrix)
    assert matmul(inverse, matrix) == identity_matrix(2, 2)


def test_ring_inverse_singular() -> None:
    """A vanishing determinant is singular."""
    with pytest.raises(SingularMatrixError, match="determinant vanishes"):
        ring_inverse(_matrix([["1", "1"], ["1", "1"]]))


def test_ring_inverse_non_unit_pivot() -> None:
    """A nonzero determinant that is not a unit has no inverse in the ring."""
    with pytest.raises(NonUnitPivotError, match="not a unit"):
        ring_inverse(_matrix([["z1", "0"], ["0", "1"]]))


def test_ring_inverse_laurent_entries() -> None:
    """Negative unit exponents are factored out before the determinant and restored after."""
    matrix = _matrix([["s^-1", "a*z1"], ["0", "E^-1*a"]])
    inverse = ring_inverse(matrix)
    assert inverse == _matrix([["s", "-s*z1*E"], ["0", "a^-1*E"]])
    assert matmul(matrix, inverse) == identity_matrix(2, 2)


def test_ring_inverse_non_unit_determinant_off_diagonal() -> None:
    """1 - z1^2 is nonzero but has no inverse among polynomials."""
    with pytest.raises(NonUnitPivotError, match="not a unit"):
        ring_inverse(_matrix([["1", "z1"], ["z1", "1"]]))


def test_ring_inverse_requires_square() -> None:
    """Non-square input is rejected."""
    with pytest.raises(ValueError, match="square"):
        ring_inverse(_matrix([["1", "0"]]))


def test_transpose_and_zero() -> None:
    """transpose swaps indices; is_zero_matrix checks every entry."""
    matrix = _matrix([["z1", "t"], ["0", "zb2"]])
    assert transpose(matrix) == _matrix([["z1", "0"], ["t", "zb2"]])
    assert is_zero_matrix(_matrix([["0", "0"], ["0", "0"]]))
    assert not is_zero_matrix(matrix)


def test_evaluate_at_origin() -> None:
    """Entries evaluate at t = z = 0."""
    matrix = _matrix([["4*z1*zb1", "1"], ["1", "i + z2"]])
    assert evaluate_at_origin(matrix) == [[ZERO, ONE], [ONE, I]]


@pytest.mark.parametrize(
    "matrix,expected",
    [
        ([[1, 0], [0, 1]], (2, 0, 0)),
        ([[1, 0, 0], [0, -1, 0], [0, 0, 0]], (1, 1, 1)),
        ([[0, 1], [1, 0]], (1, 1, 0)),
        ([[0, I], [-I, 0]], (1, 1, 0)),
        ([[4, 1], [1, 0]], (1, 1, 0)),
        ([[0, I, 0], [-I, 0, 0], [0, 0, 5]], (2, 1, 0)),
        ([[gaussian(QQ(1, 2)), 0], [0, gaussian(QQ(-1, 3))]], (1, 1, 0)),
        ([[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]], (2, 2, 0)),
        ([[0, 0], [0, 0]], (0, 0, 2)),
    ],
)
def test_hermitian_signature(matrix: list, expected: tuple[int, int, int]) -> None:
    """Exact inertia from the characteristic polynomial."""
    assert hermitian_signature(matrix) == expected


def test_hermitian_signature_rejects_non_hermitian() -> None:
    """The matrix must equal its conjugate transpose."""
    with pytest.raises(ValueError, match="not hermitian"):
        hermitian_signature([[0, 1], [2, 0]])
    with pytest.raises(ValueError):
        hermitian_signature([[I]])


def test_hermitian_signature_accepts_gaussian_rationals() -> None:
    """Entries may be Gaussian rationals."""
    matrix = [[gaussian(2), gaussian(1, 1)], [gaussian(1, -1), 3]]
    assert hermitian_signature(matrix) == (2, 0, 0)


def test_rk4_step_matches_taylor_polynomial() -> None:
    """For y' = y one step is the degree-4 Taylor polynomial of exp."""
    h = 0.1
    y = rk4_step(lambda x, y: y, 0.0, np.array([1.0]), h)
    assert y[0] == pytest.approx(1 + h + h**2 / 2 + h**3 / 6 + h**4 / 24, rel=1e-14)


def test_rk4_step_complex_direction() -> None:
    """Complex steps integrate holomorphic ODEs along a ray."""
    y = np.array([1.0 + 0j])
    h = 0.01j
    x = 0j
    for _ in range(100):
        y = rk4_step(lambda x, y: y, x, y, h)
        x += h
    assert y[0] == pytest.approx(np.exp(1j), abs=1e-9)
