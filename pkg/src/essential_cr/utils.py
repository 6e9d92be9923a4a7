"""Exact linear algebra over the coefficient ring, plus the shared RK4 step."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
from sympy import QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.matrices import DomainMatrix

from .algebra import ZERO, CoeffElem, as_scalar, coefficient_ring, conjugate

Matrix = list[list[CoeffElem]]


class MatrixInversionError(Exception):
    """Raised when a matrix has no inverse over the coefficient ring."""

    pass


class SingularMatrixError(MatrixInversionError):
    """The determinant vanishes."""

    pass


class NonUnitPivotError(MatrixInversionError):
    """The determinant is nonzero but not a unit, so no elimination with unit pivots exists."""

    pass


def identity_matrix(n: int, size: int) -> Matrix:
    return [
        [CoeffElem.one(n) if i == j else CoeffElem.zero(n) for j in range(size)]
        for i in range(size)
    ]


def transpose(matrix: Sequence[Sequence[CoeffElem]]) -> Matrix:
    return [list(row) for row in zip(*matrix)]


def matmul(left: Sequence[Sequence[CoeffElem]], right: Sequence[Sequence[CoeffElem]]) -> Matrix:
    n = left[0][0].n
    inner = len(right)
    columns = len(right[0])
    result = []
    for row in left:
        out_row = []
        for j in range(columns):
            total = CoeffElem.zero(n)
            for k in range(inner):
                if row[k] and right[k][j]:
                    total = total + row[k] * right[k][j]
            out_row.append(total)
        result.append(out_row)
    return result


def ring_inverse(matrix: Sequence[Sequence[CoeffElem]]) -> Matrix:
    """Inverse over the coefficient ring as adjugate over determinant.

    The common Laurent monomial of the entries is factored out first, so
    the adjugate and the determinant are computed by sympy's ``DomainMatrix``
    over the honest polynomial ring ``QQ_I[t, z, zb, s, a, E]``.  The inverse
    is polynomial exactly when the determinant is a unit (a nonzero constant
    times a Laurent monomial in s, a, E).

    Raises:
        SingularMatrixError: if the determinant vanishes.
        NonUnitPivotError: if the determinant is nonzero but not a unit.
    """
    size = len(matrix)
    if any(len(row) != size for row in matrix):
        raise ValueError("ring_inverse needs a square matrix")
    n = matrix[0][0].n
    entries = [entry for row in matrix for entry in row if entry]
    if not entries:
        raise SingularMatrixError("determinant vanishes: the matrix is zero")
    low = tuple(min(entry.shift[p] for entry in entries) for p in range(3))
    domain = coefficient_ring(n).to_domain()
    lifted = DomainMatrix(
        [[entry.lifted(low) for entry in row] for row in matrix], (size, size), domain
    )
    adjugate, det = lifted.adj_det()
    determinant = CoeffElem.from_poly(n, det)
    if not determinant:
        raise SingularMatrixError("determinant vanishes")
    if not determinant.is_unit():
        raise NonUnitPivotError(f"determinant {determinant} is not a unit")
    factor = determinant.inv()
    back = tuple(-e for e in low)
    return [
        [CoeffElem.from_poly(n, entry, back) * factor for entry in row]
        for row in adjugate.to_list()
    ]


def _sign_changes(coefficients: Sequence[Any]) -> int:
    signs = [c > 0 for c in coefficients if c]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def hermitian_signature(matrix: Sequence[Sequence[Any]]) -> tuple[int, int, int]:
    """Exact (positive, negative, zero) counts of a hermitian matrix over Q(i).

    The characteristic polynomial is computed exactly over ``QQ_I``.  All its
    roots are real, so Descartes' rule of signs counts the positive and the
    negative eigenvalues exactly; zero is the multiplicity of the root 0.
    """
    size = len(matrix)
    entries = [[as_scalar(x) for x in row] for row in matrix]
    dm = DomainMatrix(entries, (size, size), QQ_I)
    if dm != dm.transpose().applyfunc(conjugate):
        raise ValueError("matrix is not hermitian")
    coefficients = [c.x for c in dm.charpoly()]
    zero = 0
    while len(coefficients) > 1 and not coefficients[-1]:
        coefficients.pop()
        zero += 1
    degree = len(coefficients) - 1
    positive = _sign_changes(coefficients)
    negative = _sign_changes(
        [c if (degree - k) % 2 == 0 else -c for k, c in enumerate(coefficients)]
    )
    return positive, negative, zero


def evaluate_at_origin(matrix: Sequence[Sequence[CoeffElem]]) -> list[list[GaussianRational]]:
    return [[entry.at_origin() if entry else ZERO for entry in row] for row in matrix]


def is_zero_matrix(matrix: Sequence[Sequence[CoeffElem]]) -> bool:
    return not any(entry for row in matrix for entry in row)


def rk4_step(rhs: Callable[[Any, np.ndarray], np.ndarray], x: Any, y: np.ndarray, h: Any) -> np.ndarray:
    """One classical Runge-Kutta step of ``y' = rhs(x, y)``; x and h may be complex."""
    k1 = rhs(x, y)
    k2 = rhs(x + h / 2, y + k1 * (h / 2))
    k3 = rhs(x + h / 2, y + k2 * (h / 2))
    k4 = rhs(x + h, y + k3 * h)
    return y + (k1 + 2 * k2 + 2 * k3 + k4) * (h / 6)
