"""Pseudohermitian structures and the Tanaka-Webster connection.

Conventions (fixed once and recorded in every verification report):

* Levi form: ``d theta = i h_{a b~} theta^a ^ theta^b~``, so
  ``h_{a b~} = -i d theta(Z_a, Zb_b)``.
* ``levi[a][b]`` is ``h_{a b~}``; ``levi_inv[a][b]`` is ``h^{a b~}``, i.e.
  ``sum_b levi_inv[a][b] * levi[c][b] = delta_ac``.
* Structure equation: ``d theta^b = theta^a ^ omega_a^b + A^b_{s~} theta ^ theta^s~``
  with ``A^b_{s~} = h^{b c~} conj(A_{c s})``.
* Metric compatibility: ``d h_{a b~} = omega_a^c h_{c b~} + conj(omega_b^c) h_{a c~}``.

All indices are 0-based in code (``Z_1`` is ``frame[0]``).
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

from sympy import QQ

from .algebra import (
    I,
    CoeffElem,
    DimensionMismatchError,
    ExpContext,
    NotRealError,
    gaussian,
    parse_expr,
)
from .exterior import DifferentialForm, VectorField
from .utils import (
    NonUnitPivotError,
    SingularMatrixError,
    evaluate_at_origin,
    hermitian_signature,
    identity_matrix,
    matmul,
    ring_inverse,
    transpose,
)

## The connection solve accepts solutions up to this total degree.
DEGREE_CAP = 16


class StructureError(Exception):
    """Base class for pseudohermitian structure errors."""

    pass


class NonPolynomialDualFrameError(StructureError):
    """The coframe matrix has no inverse over the coefficient ring."""

    pass


class DegenerateCoframeError(NonPolynomialDualFrameError):
    """The coframe forms are linearly dependent."""

    pass


class InadmissibleCoframeError(StructureError):
    """d theta is not of the form i h theta^a ^ theta^b~."""

    pass


class DegenerateLeviFormError(StructureError):
    """The Levi form is singular (or has no polynomial inverse)."""

    pass


class DegreeBoundExceededError(StructureError):
    """The connection solve produced coefficients beyond the degree bound."""

    def __init__(self, message: str, bound: int) -> None:
        super().__init__(f"{message} (degree bound {bound})")
        self.bound = bound


class ConventionViolationError(StructureError):
    """The structure equations have no solution under the fixed conventions."""

    pass


Matrix = tuple[tuple[CoeffElem, ...], ...]


def _freeze(matrix: Sequence[Sequence[CoeffElem]]) -> Matrix:
    return tuple(tuple(row) for row in matrix)


@dataclass(frozen=True)
class PHStructure:
    """A contact form with an admissible coframe and everything derived from it.

    Build instances with :func:`complete_structure`, which verifies the
    invariants before returning.
    """

    theta: DifferentialForm
    coframe: tuple[DifferentialForm, ...]
    reeb: VectorField
    frame: tuple[VectorField, ...]
    conj_frame: tuple[VectorField, ...]
    levi: Matrix
    levi_inv: Matrix
    signature: tuple[int, int]
    context: ExpContext

    @property
    def n(self) -> int:
        return self.theta.n

    @cached_property
    def conj_coframe(self) -> tuple[DifferentialForm, ...]:
        return tuple(form.conj() for form in self.coframe)

    @cached_property
    def dtheta(self) -> DifferentialForm:
        return self.theta.d(self.context)

    @cached_property
    def dcoframe(self) -> tuple[DifferentialForm, ...]:
        return tuple(form.d(self.context) for form in self.coframe)

    @cached_property
    def lowered_coframe(self) -> tuple[DifferentialForm, ...]:
        """``theta_a = h_{a s~} theta^s~``."""
        return tuple(
            _combine(self.n, 1, zip(self.levi[a], self.conj_coframe)) for a in range(self.n)
        )

    def pair(self, form: DifferentialForm, field: VectorField) -> CoeffElem:
        """``form(field)`` for a 1-form."""
        return form.contract(field).scalar()

    def apply(self, field: VectorField, function: CoeffElem) -> CoeffElem:
        return field.apply(function, self.context)

    def levi_pairing(self, u: Sequence[CoeffElem], v: Sequence[CoeffElem]) -> CoeffElem:
        """``h(U, V~) = h_{a b~} U^a conj(V^b)`` for frame components U, V."""
        total = CoeffElem.zero(self.n)
        for a in range(self.n):
            for b in range(self.n):
                if u[a] and v[b] and self.levi[a][b]:
                    total = total + u[a] * v[b].conj() * self.levi[a][b]
        return total

    def frame_components(self, field: VectorField) -> tuple[CoeffElem, ...]:
        """``(theta^1(X), ..., theta^n(X))``."""
        return tuple(self.pair(form, field) for form in self.coframe)

    def coframe_expansion(self, form: DifferentialForm) -> list[tuple[str, CoeffElem]]:
        """A 1-form written in the coframe (theta, theta^a, theta^a~)."""
        n = self.n
        labels = (
            ["theta"]
            + [f"theta{a}" for a in range(1, n + 1)]
            + [f"thetab{a}" for a in range(1, n + 1)]
        )
        fields = (self.reeb, *self.frame, *self.conj_frame)
        return [(label, self.pair(form, field)) for label, field in zip(labels, fields)]

    def format_in_coframe(self, form: DifferentialForm) -> str:
        parts = []
        for label, coeff in self.coframe_expansion(form):
            if not coeff:
                continue
            text = str(coeff)
            if len(coeff) > 1:
                parts.append(f"({text})*{label}")
            elif text == "1":
                parts.append(label)
            elif text == "-1":
                parts.append(f"-{label}")
            else:
                parts.append(f"{text}*{label}")
        if not parts:
            return "0"
        text = parts[0]
        for part in parts[1:]:
            text += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
        return text

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "theta": self.theta.to_json(),
            "coframe": [form.to_json() for form in self.coframe],
            "reeb": {str(k): str(v) for k, v in sorted(self.reeb.components.items())},
            "levi": [[str(entry) for entry in row] for row in self.levi],
            "signature": list(self.signature),
        }


def _combine(n: int, degree: int, pairs: object) -> DifferentialForm:
    total = DifferentialForm.zero(n, degree)
    for coeff, form in pairs:  # type: ignore[attr-defined]
        if coeff:
            total = total + form * coeff
    return total


def contact_from_defining(defining: CoeffElem | str, n: int | None = None) -> DifferentialForm:
    """The contact form Re(i d'r) of ``r = (w - wb)/(2i) + defining``.

    ``defining`` is the part of r free of w; on M, ``Im w = -defining`` and
    t = Re w, which gives

        theta = 1/2 dt + i/2 sum_j (d_{z_j}r dz_j - d_{zb_j}r dzb_j)

    Args:
        defining: a real CoeffElem (or expression text) without t or E
        n: arity, used when ``defining`` is text

    Raises:
        NotRealError: if the defining function is not real.
        StructureError: if it depends on t or carries E.
    """
    if isinstance(defining, str):
        defining = parse_expr(defining, n)
    n = defining.n
    if defining.exp_grades() - {0}:
        raise StructureError("defining function must not carry E")
    if defining.partial("t"):
        raise StructureError("defining function must not depend on t")
    if not defining.is_real():
        raise NotRealError(f"defining function {defining} is not real")
    half = gaussian(QQ(1, 2))
    half_i = half * I
    components: dict[tuple[int, ...], Any] = {(0,): half}
    for j in range(1, n + 1):
        components[(j,)] = defining.partial(j) * half_i
        components[(n + j,)] = defining.partial(n + j) * (-half_i)
    return DifferentialForm(n, 1, components)


def complete_structure(
    theta: DifferentialForm,
    coframe: Sequence[DifferentialForm],
    context: ExpContext | None = None,
) -> PHStructure:
    """Derive the Reeb field, dual frame, Levi form and signature.

    Args:
        theta: a real contact 1-form
        coframe: theta^1..theta^n
        context: binds E when theta carries the exponential grade

    Raises:
        DegenerateCoframeError: the coframe matrix is singular.
        NonPolynomialDualFrameError: its inverse is not polynomial.
        InadmissibleCoframeError: d theta is not i h theta^a ^ theta^b~.
        DegenerateLeviFormError: h is singular at the origin or not unimodular.
    """
    n = theta.n
    context = context or ExpContext.inactive(n)
    coframe = tuple(coframe)
    if theta.degree != 1 or any(form.degree != 1 for form in coframe):
        raise StructureError("theta and the coframe must be 1-forms")
    if len(coframe) != n:
        raise StructureError(f"{len(coframe)} coframe forms for arity {n}")
    if not theta.is_real():
        raise NotRealError("the contact form must be real")

    rows = [theta, *coframe, *(form.conj() for form in coframe)]
    matrix = [[row[(k,)] for k in range(2 * n + 1)] for row in rows]
    try:
        inverse = ring_inverse(matrix)
    except SingularMatrixError as exc:
        raise DegenerateCoframeError(f"degenerate coframe: {exc}") from exc
    except NonUnitPivotError as exc:
        raise NonPolynomialDualFrameError(f"non-polynomial dual frame: {exc}") from exc
    fields = [
        VectorField(n, {k: inverse[k][column] for k in range(2 * n + 1)})
        for column in range(2 * n + 1)
    ]
    reeb = fields[0]
    frame = tuple(fields[1 : n + 1])
    conj_frame = tuple(fields[n + 1 :])

    ## duality
    for i, row in enumerate(rows):
        for j, field in enumerate(fields):
            if row.contract(field).scalar() != (1 if i == j else 0):
                raise NonPolynomialDualFrameError(f"dual frame check failed at ({i}, {j})")

    dtheta = theta.d(context)
    if dtheta.contract(reeb):
        raise InadmissibleCoframeError("the dual field to theta does not annihilate d theta")
    minus_i = -I
    levi = [
        [dtheta.evaluate(frame[a], conj_frame[b]) * minus_i for b in range(n)] for a in range(n)
    ]
    expected = DifferentialForm.zero(n, 2)
    for a in range(n):
        for b in range(n):
            if levi[a][b]:
                expected = expected + coframe[a].wedge(rows[n + 1 + b]) * (levi[a][b] * I)
    if dtheta != expected:
        raise InadmissibleCoframeError(
            f"inadmissible coframe: d theta - i h theta^a ^ theta^b~ = {dtheta - expected}"
        )
    for a in range(n):
        for b in range(n):
            if levi[a][b].conj() != levi[b][a]:
                raise InadmissibleCoframeError(f"Levi form is not hermitian at ({a}, {b})")

    positive, negative, null = hermitian_signature(evaluate_at_origin(levi))
    if null:
        raise DegenerateLeviFormError(
            f"degenerate Levi form: {null} null direction(s) at the origin"
        )
    try:
        levi_inv = ring_inverse(transpose(levi))
    except SingularMatrixError as exc:
        raise DegenerateLeviFormError(f"degenerate Levi form: {exc}") from exc
    except NonUnitPivotError as exc:
        raise DegenerateLeviFormError(f"Levi form has no polynomial inverse: {exc}") from exc
    if matmul(levi, transpose(levi_inv)) != identity_matrix(n, n):
        raise DegenerateLeviFormError("h h^-1 is not the identity")

    return PHStructure(
        theta=theta,
        coframe=coframe,
        reeb=reeb,
        frame=frame,
        conj_frame=conj_frame,
        levi=_freeze(levi),
        levi_inv=_freeze(levi_inv),
        signature=(positive, negative),
        context=context,
    )


@dataclass(frozen=True)
class Connection:
    """Tanaka-Webster connection forms ``omega[a][b] = omega_a^b`` and the
    lowered torsion ``torsion[a][b] = A_{ab}``."""

    omega: tuple[tuple[DifferentialForm, ...], ...]
    torsion: Matrix

    @property
    def n(self) -> int:
        return len(self.omega)

    @classmethod
    def zero(cls, n: int) -> Connection:
        return cls(
            omega=tuple(tuple(DifferentialForm.zero(n, 1) for _ in range(n)) for _ in range(n)),
            torsion=tuple(tuple(CoeffElem.zero(n) for _ in range(n)) for _ in range(n)),
        )

    def is_torsion_free(self) -> bool:
        return not any(entry for row in self.torsion for entry in row)

    def nonzero_forms(self) -> list[tuple[int, int, DifferentialForm]]:
        return [
            (a, b, form)
            for a, row in enumerate(self.omega)
            for b, form in enumerate(row)
            if form
        ]

    def raised_torsion(self, structure: PHStructure) -> list[list[CoeffElem]]:
        """``A^b_{s~} = h^{b c~} conj(A_{c s})``."""
        n = self.n
        return [
            [
                _dot(n, ((structure.levi_inv[b][c], self.torsion[c][s].conj()) for c in range(n)))
                for s in range(n)
            ]
            for b in range(n)
        ]

    def to_json(self, structure: PHStructure) -> dict:
        n = self.n
        return {
            "omega": {
                f"{a + 1},{b + 1}": structure.format_in_coframe(self.omega[a][b])
                for a in range(n)
                for b in range(n)
            },
            "torsion": [[str(entry) for entry in row] for row in self.torsion],
        }


def _dot(n: int, pairs: object) -> CoeffElem:
    total = CoeffElem.zero(n)
    for left, right in pairs:  # type: ignore[attr-defined]
        if left and right:
            total = total + left * right
    return total


@dataclass(frozen=True)
class ConnectionResidual:
    """Exact residuals of the connection's defining equations."""

    structure: tuple[DifferentialForm, ...]
    metric: tuple[tuple[DifferentialForm, ...], ...]
    torsion_symmetry: Matrix

    @property
    def is_zero(self) -> bool:
        return not self.failures()

    def failures(self) -> list[str]:
        failed = [f"structure equation for theta^{b + 1}" for b, r in enumerate(self.structure) if r]
        failed += [
            f"metric compatibility for h_{a + 1}{b + 1}"
            for a, row in enumerate(self.metric)
            for b, r in enumerate(row)
            if r
        ]
        failed += [
            f"torsion symmetry A_{a + 1}{b + 1}"
            for a, row in enumerate(self.torsion_symmetry)
            for b, r in enumerate(row)
            if a < b and r
        ]
        return failed

    def to_json(self) -> dict:
        return {
            "structure": [form.to_json() for form in self.structure],
            "metric": [[form.to_json() for form in row] for row in self.metric],
            "torsion_symmetry": [[str(entry) for entry in row] for row in self.torsion_symmetry],
        }


def verify_connection(structure: PHStructure, connection: Connection) -> ConnectionResidual:
    """Residuals of both structure equations and of the torsion symmetry."""
    n = structure.n
    if connection.n != n:
        raise DimensionMismatchError(f"connection of size {connection.n} for arity {n}")
    context = structure.context
    raised = connection.raised_torsion(structure)
    structure_residuals = []
    for b in range(n):
        residual = structure.dcoframe[b]
        for a in range(n):
            residual = residual - structure.coframe[a].wedge(connection.omega[a][b])
        for s in range(n):
            if raised[b][s]:
                residual = residual - structure.theta.wedge(structure.conj_coframe[s]) * raised[b][s]
        structure_residuals.append(residual)

    metric = []
    for a in range(n):
        row = []
        for b in range(n):
            residual = DifferentialForm.function(structure.levi[a][b]).d(context)
            for c in range(n):
                if structure.levi[c][b]:
                    residual = residual - connection.omega[a][c] * structure.levi[c][b]
                if structure.levi[a][c]:
                    residual = residual - connection.omega[b][c].conj() * structure.levi[a][c]
            row.append(residual)
        metric.append(tuple(row))

    symmetry = tuple(
        tuple(connection.torsion[a][b] - connection.torsion[b][a] for b in range(n))
        for a in range(n)
    )
    return ConnectionResidual(tuple(structure_residuals), tuple(metric), symmetry)


def solve_connection(structure: PHStructure) -> Connection:
    """The unique connection satisfying the structure equations.

    The equations are resolved in the frame: the (0,1) and T components of
    omega and the torsion are read off d theta^b directly, the (1,0)
    components follow from metric compatibility, and the remaining
    components of d theta^b are consistency conditions.  No monomial ansatz
    is made, so nothing limits the degree while solving.  The degree bound
    ``min(D + 4, DEGREE_CAP)``, with D the largest coefficient degree of
    theta and the coframe, is checked only on the finished solution.

    Raises:
        ConventionViolationError: if a consistency condition fails.
        DegreeBoundExceededError: if a coefficient exceeds the degree bound.
    """
    n = structure.n
    frame, conj_frame, reeb = structure.frame, structure.conj_frame, structure.reeb
    levi, levi_inv = structure.levi, structure.levi_inv
    dcoframe = structure.dcoframe

    input_degree = max(
        [structure.theta.max_coefficient_degree()]
        + [form.max_coefficient_degree() for form in structure.coframe]
    )
    bound = min(input_degree + 4, DEGREE_CAP)
    logging.debug("solving the connection for n=%d with degree bound %d", n, bound)

    for b in range(n):
        for s in range(n):
            for u in range(s + 1, n):
                if dcoframe[b].evaluate(conj_frame[s], conj_frame[u]):
                    raise ConventionViolationError(
                        f"convention violation: d theta^{b + 1} has a (0,2) part"
                    )

    ## mixed[a][b][s] = omega_a^b(Zb_s), along_reeb[a][b] = omega_a^b(T)
    mixed = [
        [[dcoframe[b].evaluate(frame[a], conj_frame[s]) for s in range(n)] for b in range(n)]
        for a in range(n)
    ]
    along_reeb = [[-dcoframe[b].evaluate(reeb, frame[a]) for b in range(n)] for a in range(n)]
    torsion_up = [[dcoframe[b].evaluate(reeb, conj_frame[s]) for s in range(n)] for b in range(n)]

    ## holo[a][c][r] = omega_a^c(Z_r) from Z_r h_{ab~} = omega_a^c(Z_r) h_{cb~} + conj(omega_b^d(Zb_r)) h_{ad~}
    holo = [[[CoeffElem.zero(n) for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for r in range(n):
        rhs = [
            [
                structure.apply(frame[r], levi[a][b])
                - _dot(n, ((mixed[b][d][r].conj(), levi[a][d]) for d in range(n)))
                for b in range(n)
            ]
            for a in range(n)
        ]
        for a in range(n):
            for c in range(n):
                holo[a][c][r] = _dot(n, ((rhs[a][b], levi_inv[c][b]) for b in range(n)))

    for b in range(n):
        for a in range(n):
            for r in range(a + 1, n):
                torsion_part = dcoframe[b].evaluate(frame[a], frame[r])
                if holo[a][b][r] - holo[r][b][a] != torsion_part:
                    raise ConventionViolationError(
                        f"convention violation: (2,0) part of d theta^{b + 1} is inconsistent"
                    )

    torsion = [
        [_dot(n, ((levi[b][d], torsion_up[b][s]) for b in range(n))).conj() for s in range(n)]
        for d in range(n)
    ]
    for a in range(n):
        for b in range(a + 1, n):
            if torsion[a][b] != torsion[b][a]:
                raise ConventionViolationError("convention violation: torsion is not symmetric")

    coefficients = [
        entry
        for block in (holo, mixed)
        for plane in block
        for row in plane
        for entry in row
    ]
    coefficients += [entry for row in along_reeb for entry in row]
    coefficients += [entry for row in torsion for entry in row]
    worst = max((entry.degree() for entry in coefficients), default=0)
    if worst > bound:
        raise DegreeBoundExceededError(f"connection coefficient of degree {worst}", bound)

    omega = []
    for a in range(n):
        row = []
        for b in range(n):
            form = structure.theta * along_reeb[a][b]
            for r in range(n):
                if holo[a][b][r]:
                    form = form + structure.coframe[r] * holo[a][b][r]
                if mixed[a][b][r]:
                    form = form + structure.conj_coframe[r] * mixed[a][b][r]
            row.append(form)
        omega.append(tuple(row))
    connection = Connection(omega=tuple(omega), torsion=_freeze(torsion))

    residual = verify_connection(structure, connection)
    if not residual.is_zero:
        raise ConventionViolationError(
            "convention violation: " + ", ".join(residual.failures())
        )
    return connection


@dataclass(frozen=True)
class Hessian:
    """``first[a] = u_a``, ``holomorphic[a][b] = u_{ab}``, ``mixed[a][b] = u_{a b~}``."""

    first: tuple[CoeffElem, ...]
    holomorphic: Matrix
    mixed: Matrix

    def is_pluriharmonic_type(self, structure: PHStructure) -> bool:
        """True when ``u_{a b~}`` is a multiple of ``h_{a b~}``."""
        n = len(self.first)
        entries = [(a, b) for a in range(n) for b in range(n)]
        return all(
            self.mixed[a][b] * structure.levi[c][d] == self.mixed[c][d] * structure.levi[a][b]
            for a, b in entries
            for c, d in entries
        )


def covariant_hessian(
    structure: PHStructure, connection: Connection, function: CoeffElem
) -> Hessian:
    """First and second covariant derivatives of a function.

    ``u_a = Z_a u``, ``u_{ab} = Z_b u_a - omega_a^c(Z_b) u_c`` and
    ``u_{a b~} = Zb_b u_a - omega_a^c(Zb_b) u_c``.
    """
    n = structure.n
    if function.n != n or connection.n != n:
        raise DimensionMismatchError(f"Hessian of an arity-{function.n} function on arity {n}")
    first = tuple(structure.apply(field, function) for field in structure.frame)

    def second(fields: Sequence[VectorField]) -> Matrix:
        return tuple(
            tuple(
                structure.apply(fields[b], first[a])
                - _dot(
                    n,
                    (
                        (structure.pair(connection.omega[a][c], fields[b]), first[c])
                        for c in range(n)
                    ),
                )
                for b in range(n)
            )
            for a in range(n)
        )

    return Hessian(first=first, holomorphic=second(structure.frame), mixed=second(structure.conj_frame))
