"""Contact-form rescaling ``theta -> e^Upsilon theta`` and Lee's transformation laws."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any

from sympy import QQ

from .algebra import I, ONE, ZERO, CoeffElem, ExpContext, GaussianRational, gaussian
from .curvature import chern_image, curvature
from .exterior import DifferentialForm
from .pseudohermitian import (
    Connection,
    PHStructure,
    StructureError,
    complete_structure,
    covariant_hessian,
    solve_connection,
)


class CoframeAdaptationFailedError(StructureError):
    """No constant c makes theta^a + c Upsilon^a theta admissible."""

    pass


@dataclass(frozen=True)
class RescaleReport:
    """What changed, and which transformation laws were confirmed exactly."""

    adaptation_constant: GaussianRational
    lee_connection: Connection | None
    connection_residual: tuple[tuple[DifferentialForm, ...], ...] = ()
    torsion_residual: tuple[tuple[CoeffElem, ...], ...] = ()
    holomorphic_law_residual: tuple[tuple[tuple[CoeffElem, ...], ...], ...] = ()
    antiholomorphic_law_residual: tuple[tuple[tuple[CoeffElem, ...], ...], ...] = ()
    levi_scaled: bool = True
    frame_unchanged: bool = True
    chern_image: tuple[int, ...] = ()
    original_chern_image: tuple[int, ...] = ()
    identity: bool = False

    @property
    def lee_matches_direct(self) -> bool:
        return not any(form for row in self.connection_residual for form in row)

    @property
    def torsion_law_holds(self) -> bool:
        return not any(entry for row in self.torsion_residual for entry in row)

    @property
    def covariant_laws_hold(self) -> bool:
        return not any(
            entry
            for block in (self.holomorphic_law_residual, self.antiholomorphic_law_residual)
            for plane in block
            for row in plane
            for entry in row
        )

    @property
    def chern_image_unchanged(self) -> bool:
        return self.chern_image == self.original_chern_image

    @property
    def passed(self) -> bool:
        return (
            self.lee_matches_direct
            and self.torsion_law_holds
            and self.covariant_laws_hold
            and self.levi_scaled
            and self.frame_unchanged
            and self.chern_image_unchanged
        )

    def to_json(self) -> dict:
        return {
            "adaptation_constant": str(self.adaptation_constant),
            "identity": self.identity,
            "lee_matches_direct": self.lee_matches_direct,
            "torsion_law_holds": self.torsion_law_holds,
            "covariant_laws_hold": self.covariant_laws_hold,
            "levi_scaled": self.levi_scaled,
            "frame_unchanged": self.frame_unchanged,
            "chern_image_unchanged": self.chern_image_unchanged,
            "chern_image": list(self.chern_image),
        }


def _upsilon_data(
    structure: PHStructure, upsilon: CoeffElem
) -> tuple[list[CoeffElem], list[CoeffElem], list[CoeffElem]]:
    """``(Upsilon_a, Upsilon_a~, Upsilon^a)`` with ``Upsilon^a = h^{a b~} Upsilon_b~``."""
    n = structure.n
    lower = [structure.apply(z, upsilon) for z in structure.frame]
    lower_bar = [structure.apply(zb, upsilon) for zb in structure.conj_frame]
    upper = [
        _dot(n, ((structure.levi_inv[a][b], lower_bar[b]) for b in range(n))) for a in range(n)
    ]
    return lower, lower_bar, upper


def _dot(n: int, pairs: object) -> CoeffElem:
    total = CoeffElem.zero(n)
    for left, right in pairs:  # type: ignore[attr-defined]
        if left and right:
            total = total + left * right
    return total


def _admissibility_residual(
    theta: DifferentialForm,
    coframe: list[DifferentialForm],
    levi: list[list[CoeffElem]],
    context: ExpContext,
) -> DifferentialForm:
    n = theta.n
    residual = theta.d(context)
    for a in range(n):
        for b in range(n):
            if levi[a][b]:
                residual = residual - coframe[a].wedge(coframe[b].conj()) * (levi[a][b] * I)
    return residual


def _solve_constant(
    base: DifferentialForm, along_real: DifferentialForm, along_imag: DifferentialForm
) -> GaussianRational:
    """Rationals x, y with ``base + x*along_real + y*along_imag = 0``, as ``x + i y``."""
    equations: list[tuple[Any, Any, Any]] = []
    keys = set(base.components) | set(along_real.components) | set(along_imag.components)
    for key in keys:
        b0, b1, b2 = base[key], along_real[key], along_imag[key]
        monomials = set(b0.terms) | set(b1.terms) | set(b2.terms)
        for monomial in monomials:
            c0 = b0.terms.get(monomial, ZERO)
            c1 = b1.terms.get(monomial, ZERO)
            c2 = b2.terms.get(monomial, ZERO)
            equations.append((c1.x, c2.x, -c0.x))
            equations.append((c1.y, c2.y, -c0.y))
    equations = [eq for eq in equations if any(eq)]
    if not equations:
        return ZERO

    x = y = QQ(0)
    solved = False
    for i, (a1, b1, r1) in enumerate(equations):
        for a2, b2, r2 in equations[i + 1 :]:
            det = a1 * b2 - a2 * b1
            if det:
                x = (r1 * b2 - r2 * b1) / det
                y = (a1 * r2 - a2 * r1) / det
                solved = True
                break
        if solved:
            break
    if not solved:
        ## rank one: any solution will do
        a1, b1, r1 = next(eq for eq in equations if eq[0] or eq[1])
        if a1:
            x = r1 / a1
        else:
            y = r1 / b1
    if any(a * x + b * y != r for a, b, r in equations):
        raise CoframeAdaptationFailedError("coframe adaptation failed for every constant c")
    return gaussian(x, y)


def lee_connection(
    structure: PHStructure, connection: Connection, upsilon: CoeffElem
) -> Connection:
    """The connection of ``e^Upsilon theta`` from Lee's transformation formulas.

    In the old coframe, with ``theta_a = h_{a s~} theta^s~``:

        omega^_a^b = omega_a^b + delta_a^b Upsilon_r theta^r + Upsilon_a theta^b
                     - Upsilon^b theta_a
                     + i (Upsilon^b_{,a} + Upsilon^b Upsilon_a + delta_a^b Upsilon^c Upsilon_c) theta
        A^_{ab} = A_{ab} + i Upsilon_{ab} - i Upsilon_a Upsilon_b

    where ``Upsilon^b_{,a} = Z_a Upsilon^b + Upsilon^c omega_c^b(Z_a)``.
    """
    n = structure.n
    lower, _, upper = _upsilon_data(structure, upsilon)
    hessian = covariant_hessian(structure, connection, upsilon)
    trace = _dot(n, ((upper[c], lower[c]) for c in range(n)))
    d_upsilon_holo = DifferentialForm.zero(n, 1)
    for r in range(n):
        if lower[r]:
            d_upsilon_holo = d_upsilon_holo + structure.coframe[r] * lower[r]

    omega = []
    for a in range(n):
        row = []
        for b in range(n):
            derivative = structure.apply(structure.frame[a], upper[b]) + _dot(
                n,
                (
                    (upper[c], structure.pair(connection.omega[c][b], structure.frame[a]))
                    for c in range(n)
                ),
            )
            reeb_coeff = derivative + upper[b] * lower[a]
            form = connection.omega[a][b]
            if a == b:
                form = form + d_upsilon_holo
                reeb_coeff = reeb_coeff + trace
            form = form + structure.coframe[b] * lower[a]
            form = form - structure.lowered_coframe[a] * upper[b]
            form = form + structure.theta * (reeb_coeff * I)
            row.append(form)
        omega.append(tuple(row))
    torsion = tuple(
        tuple(
            connection.torsion[a][b] + hessian.holomorphic[a][b] * I - lower[a] * lower[b] * I
            for b in range(n)
        )
        for a in range(n)
    )
    return Connection(omega=tuple(omega), torsion=torsion)


def lee_covariant_residuals(
    structure: PHStructure,
    connection: Connection,
    rescaled: PHStructure,
    rescaled_connection: Connection,
    upsilon: CoeffElem,
) -> tuple[tuple, tuple]:
    """Residuals of Lee's laws for covariant derivatives of the frame.

    ``omega^_a^b(Z_r) = omega_a^b(Z_r) + delta_a^b Upsilon_r + Upsilon_a delta_r^b`` and
    ``omega^_a^b(Zb_s) = omega_a^b(Zb_s) - Upsilon^b h_{a s~}``, indexed ``[a][b][r]``.
    """
    n = structure.n
    lower, _, upper = _upsilon_data(structure, upsilon)
    holomorphic = []
    antiholomorphic = []
    for a in range(n):
        holo_rows = []
        anti_rows = []
        for b in range(n):
            holo_row = []
            anti_row = []
            for r in range(n):
                new = rescaled.pair(rescaled_connection.omega[a][b], rescaled.frame[r])
                old = structure.pair(connection.omega[a][b], structure.frame[r])
                expected = old
                if a == b:
                    expected = expected + lower[r]
                if r == b:
                    expected = expected + lower[a]
                holo_row.append(new - expected)
                new = rescaled.pair(rescaled_connection.omega[a][b], rescaled.conj_frame[r])
                old = structure.pair(connection.omega[a][b], structure.conj_frame[r])
                anti_row.append(new - (old - upper[b] * structure.levi[a][r]))
            holo_rows.append(tuple(holo_row))
            anti_rows.append(tuple(anti_row))
        holomorphic.append(tuple(holo_rows))
        antiholomorphic.append(tuple(anti_rows))
    return tuple(holomorphic), tuple(antiholomorphic)


def rescale(
    structure: PHStructure, connection: Connection, upsilon: CoeffElem
) -> tuple[PHStructure, Connection, RescaleReport]:
    """Pass to ``theta^ = E theta`` with ``E = e^Upsilon``.

    The adapted coframe is ``theta^a + c Upsilon^a theta`` with the constant c
    solved from admissibility of the new structure; the new connection is
    computed by :func:`solve_connection` and compared with
    :func:`lee_connection`.  The Chern image is recomputed from the rescaled
    connection and compared with the original one.

    Raises:
        NotRealError: if Upsilon is not real.
        CoframeAdaptationFailedError: if no constant c works.
    """
    n = structure.n
    if structure.context.active:
        raise StructureError("rescaling an already rescaled structure is not supported")
    context = ExpContext(upsilon)
    original_image = _chern_image(structure, connection)
    if not upsilon:
        report = RescaleReport(
            adaptation_constant=ZERO,
            lee_connection=connection,
            identity=True,
            chern_image=original_image,
            original_chern_image=original_image,
        )
        return structure, connection, report

    exp_upsilon = CoeffElem.monomial(n, 1, E=1)
    theta = structure.theta * exp_upsilon
    _, _, upper = _upsilon_data(structure, upsilon)
    levi = [[exp_upsilon * entry for entry in row] for row in structure.levi]

    def coframe_for(constant: GaussianRational) -> list[DifferentialForm]:
        return [
            structure.coframe[a] + structure.theta * (upper[a] * constant) for a in range(n)
        ]

    base = _admissibility_residual(theta, coframe_for(ZERO), levi, context)
    along_real = _admissibility_residual(theta, coframe_for(ONE), levi, context) - base
    along_imag = _admissibility_residual(theta, coframe_for(I), levi, context) - base
    constant = _solve_constant(base, along_real, along_imag)
    logging.debug("adapted coframe constant c = %s", constant)

    rescaled = complete_structure(theta, coframe_for(constant), context)
    rescaled_connection = solve_connection(rescaled)
    expected = lee_connection(structure, connection, upsilon)
    connection_residual = tuple(
        tuple(rescaled_connection.omega[a][b] - expected.omega[a][b] for b in range(n))
        for a in range(n)
    )
    torsion_residual = tuple(
        tuple(rescaled_connection.torsion[a][b] - expected.torsion[a][b] for b in range(n))
        for a in range(n)
    )
    holomorphic, antiholomorphic = lee_covariant_residuals(
        structure, connection, rescaled, rescaled_connection, upsilon
    )
    report = RescaleReport(
        adaptation_constant=constant,
        lee_connection=expected,
        connection_residual=connection_residual,
        torsion_residual=torsion_residual,
        holomorphic_law_residual=holomorphic,
        antiholomorphic_law_residual=antiholomorphic,
        levi_scaled=[list(row) for row in rescaled.levi] == levi,
        frame_unchanged=rescaled.frame == structure.frame,
        chern_image=_chern_image(rescaled, rescaled_connection),
        original_chern_image=original_image,
    )
    if not report.passed:
        logging.warning("rescale by %s: transformation laws not confirmed", upsilon)
    return rescaled, rescaled_connection, report


def _chern_image(structure: PHStructure, connection: Connection) -> tuple[int, ...]:
    return chern_image(curvature(structure, connection, allow_torsion=True), structure)
