"""Complex null curves, null geodesics and projective parameters.

A complex curve ``zeta -> gamma(zeta)`` in M is integrated in the ambient
coordinates ``(w, z)`` with ``t = Re w``; its (1,0) tangent is stored by
frame components ``v`` (``gamma' = v^a Z_a``).  Along the real axis the real
tangent is ``gamma' + conj(gamma')``, along the imaginary axis it is
``i (gamma' - conj(gamma'))``.  Affine parameterization means
``dv^b + v^a omega_a^b = 0``.

Projective parameters p of a null geodesic solve ``{p, z} = Q`` with
``Q = 2i v^a v^b A_{ab}``; they are computed through the linearization
``u'' + (Q/2) u = 0``, ``p = u1/u2``.
"""

from __future__ import annotations

import csv
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from typing import IO, Any

import numpy as np
import sympy as sp

from .algebra import I, CoeffElem
from .examples import Parameter
from .exterior import VectorField
from .pseudohermitian import Connection, PHStructure, covariant_hessian
from .schwarzian import numeric_schwarzian, taylor_coefficients
from .schwarzian import z as z_symbol
from .utils import rk4_step

NULL_TOLERANCE = 1e-12
ABORT_TOLERANCE = 1e-6


class GeodesicError(Exception):
    """Base class for geodesic and projective-parameter errors."""

    pass


class PoleCrossedError(GeodesicError):
    """The denominator solution u2 vanished on the path."""

    def __init__(self, message: str, location: complex) -> None:
        super().__init__(f"{message} near z = {location:.6g}")
        self.location = location


class StepTooLargeError(GeodesicError):
    """The step is too large for the potential on this path."""

    pass


class NotNullError(GeodesicError, ValueError):
    """A tangent fails the type-(1,0) or null condition."""

    def __init__(self, invariant: str, detail: str = "") -> None:
        super().__init__(f"{invariant} fails" + (f": {detail}" if detail else ""))
        self.invariant = invariant


class GeodesicResidualError(GeodesicError):
    """The numeric curve left M (or the null cone) beyond the abort tolerance."""

    def __init__(self, message: str, diagnostics: dict) -> None:
        super().__init__(message)
        self.diagnostics = diagnostics


class QuotientParameterError(GeodesicError, ValueError):
    """Quotient parameters must be negative."""

    pass


class _FrameTables:
    """Numeric evaluation of the frame and connection coefficients."""

    def __init__(self, structure: PHStructure, connection: Connection) -> None:
        n = structure.n
        self.n = n
        self.structure = structure
        for field_ in structure.frame:
            if not field_.is_type_10():
                raise GeodesicError("numeric integration needs a type-(1,0) frame")
        self.frame_t = [field_[0] for field_ in structure.frame]
        self.frame_z = [[field_[j + 1] for j in range(n)] for field_ in structure.frame]
        self.holo = [
            [[structure.pair(connection.omega[a][b], structure.frame[r]) for r in range(n)] for b in range(n)]
            for a in range(n)
        ]
        self.anti = [
            [[structure.pair(connection.omega[a][b], structure.conj_frame[s]) for s in range(n)] for b in range(n)]
            for a in range(n)
        ]
        self.levi = structure.levi

    def _eval(self, value: CoeffElem, t: np.ndarray, z: np.ndarray, e: Any) -> np.ndarray | complex:
        if not value:
            return 0.0
        return value.evaluate(t, z, e=e)

    def rhs(self, direction: complex) -> Callable[[Any, np.ndarray], np.ndarray]:
        n = self.n
        context = self.structure.context

        def f(_: Any, y: np.ndarray) -> np.ndarray:
            w = y[:, 0]
            z = y[:, 1 : n + 1]
            v = y[:, n + 1 :]
            t = w.real
            e = context.exponential(t, z)
            out = np.zeros_like(y)
            for a in range(n):
                out[:, 0] += 2 * v[:, a] * self._eval(self.frame_t[a], t, z, e)
                for j in range(n):
                    if self.frame_z[a][j]:
                        out[:, 1 + j] += v[:, a] * self._eval(self.frame_z[a][j], t, z, e)
            out[:, : n + 1] *= direction
            for a in range(n):
                for b in range(n):
                    along = np.zeros(len(y), dtype=complex)
                    for r in range(n):
                        if self.holo[a][b][r]:
                            along += direction * v[:, r] * self._eval(self.holo[a][b][r], t, z, e)
                        if self.anti[a][b][r]:
                            along += (
                                np.conj(direction)
                                * np.conj(v[:, r])
                                * self._eval(self.anti[a][b][r], t, z, e)
                            )
                    out[:, n + 1 + b] -= v[:, a] * along
            return out

        return f

    def null_defect(self, t: np.ndarray, z: np.ndarray, v: np.ndarray) -> np.ndarray:
        e = self.structure.context.exponential(t, z)
        total = np.zeros(len(t), dtype=complex)
        for a in range(self.n):
            for b in range(self.n):
                if self.levi[a][b]:
                    total += v[:, a] * np.conj(v[:, b]) * self._eval(self.levi[a][b], t, z, e)
        return np.abs(total)


@dataclass
class NullCurve:
    """Samples of a complex null curve over a parameter grid.

    ``z`` and ``tangent`` have shape (N, n); the other arrays shape (N,).
    ``residual`` is ``|Im w - F(z)|`` when the defining function is known.
    """

    zeta: np.ndarray
    t: np.ndarray
    im_w: np.ndarray
    z: np.ndarray
    tangent: np.ndarray
    residual: np.ndarray
    null_defect: np.ndarray
    commutativity_defect: float = 0.0

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residual, initial=0.0))

    @property
    def max_null_defect(self) -> float:
        return float(np.max(self.null_defect, initial=0.0))

    def leaf_deviation(self, leaf_index: int, origin: Sequence[complex], t0: float = 0.0) -> float:
        """Largest distance from the closed leaf ``{t = t0, z_j = 0 for j != leaf}``
        parameterized by ``z_leaf = origin[leaf] + zeta``."""
        deviation = np.abs(self.t - t0)
        for j in range(self.z.shape[1]):
            if j == leaf_index:
                expected = origin[j] + self.zeta
            else:
                expected = np.zeros_like(self.zeta)
            deviation = np.maximum(deviation, np.abs(self.z[:, j] - expected))
        return float(np.max(deviation, initial=0.0))

    def to_csv(self, stream: IO[str]) -> None:
        """Columns zeta_re, zeta_im, t, z1_re, z1_im, ..., residual_r, null_defect."""
        n = self.z.shape[1]
        writer = csv.writer(stream, lineterminator="\n")
        header = ["zeta_re", "zeta_im", "t"]
        for j in range(1, n + 1):
            header += [f"z{j}_re", f"z{j}_im"]
        writer.writerow(header + ["residual_r", "null_defect"])
        for k in range(len(self.zeta)):
            row = [self.zeta[k].real, self.zeta[k].imag, self.t[k]]
            for j in range(n):
                row += [self.z[k, j].real, self.z[k, j].imag]
            row += [self.residual[k], self.null_defect[k]]
            writer.writerow([f"{value:.17g}" for value in row])


def integrate_null_geodesic(
    structure: PHStructure,
    connection: Connection,
    start: tuple[float, Sequence[complex]],
    tangent: Sequence[complex],
    steps: int = 20,
    extent: float = 1.0,
    defining: CoeffElem | None = None,
) -> NullCurve:
    """Integrate an affinely parameterized null geodesic over the square
    ``|Re zeta|, |Im zeta| <= extent``.

    The real axis is integrated first, then every real-axis sample is
    continued along the imaginary direction (batched).  The commutativity
    defect compares both orders at the corner ``extent*(1+i)``.

    Args:
        start: ``(t0, z0)``
        tangent: frame components v0 of gamma'(0); must be null
        steps: RK4 steps per unit of extent on each half-axis
        defining: w-free part of the defining function, for the residual

    Raises:
        NotNullError: if v0 is not null at the start (tolerance 1e-12).
        GeodesicResidualError: if the residual exceeds 1e-6.
    """
    n = structure.n
    tables = _FrameTables(structure, connection)
    t0, z0 = start
    z0 = np.asarray(z0, dtype=complex)
    v0 = np.asarray(tangent, dtype=complex)
    if z0.shape != (n,) or v0.shape != (n,):
        raise GeodesicError(f"start point and tangent need {n} components")
    if not np.any(v0):
        raise NotNullError("nonzero tangent")
    defect = tables.null_defect(np.array([t0]), z0[None, :], v0[None, :])[0]
    if defect > NULL_TOLERANCE * max(1.0, float(np.sum(np.abs(v0) ** 2))):
        raise NotNullError("null condition h(v, conj v) = 0", f"defect {defect:.3g}")

    graph = (lambda t, z: -np.real(defining.evaluate(t, z))) if defining is not None else None
    im_w0 = graph(t0, z0) if graph is not None else 0.0
    y0 = np.concatenate([[t0 + 1j * im_w0], z0, v0])[None, :]

    count = max(1, int(math.ceil(steps * extent)))
    h = extent / count

    def march(y: np.ndarray, direction: complex, sign: int) -> list[np.ndarray]:
        rhs = tables.rhs(direction)
        out = []
        for _ in range(count):
            y = rk4_step(rhs, 0.0, y, sign * h)
            out.append(y)
        return out

    ## real axis: indices -count..count
    forward = march(y0, 1.0, 1)
    backward = march(y0, 1.0, -1)
    axis = [b for b in reversed(backward)] + [y0] + forward
    axis_states = np.concatenate(axis, axis=0)
    xi = np.arange(-count, count + 1) * h

    columns = [axis_states]
    zetas = [xi.astype(complex)]
    for sign in (1, -1):
        for k, y in enumerate(march(axis_states, 1j, sign), start=1):
            columns.append(y)
            zetas.append(xi + 1j * sign * k * h)
    states = np.concatenate(columns, axis=0)
    zeta = np.concatenate(zetas)

    ## other order at the corner
    up = march(y0, 1j, 1)[-1]
    corner = march(up, 1.0, 1)[-1]
    corner_index = int(np.argmin(np.abs(zeta - extent * (1 + 1j))))
    commutativity = float(np.max(np.abs(corner[0] - states[corner_index])))
    if commutativity > ABORT_TOLERANCE:
        logging.warning("geodesic integration: commutativity defect %.3g", commutativity)

    w = states[:, 0]
    z = states[:, 1 : n + 1]
    v = states[:, n + 1 :]
    t = w.real
    residual = np.abs(w.imag - graph(t, z)) if graph is not None else np.zeros(len(w))
    null = tables.null_defect(t, z, v)
    logging.debug("null geodesic: %d samples, %d steps per half-axis", len(zeta), count)
    curve = NullCurve(
        zeta=zeta,
        t=t,
        im_w=w.imag,
        z=z,
        tangent=v,
        residual=residual,
        null_defect=null,
        commutativity_defect=commutativity,
    )
    if curve.max_residual > ABORT_TOLERANCE or curve.max_null_defect > ABORT_TOLERANCE:
        raise GeodesicResidualError(
            "null geodesic left M",
            {
                "max_residual": curve.max_residual,
                "max_null_defect": curve.max_null_defect,
                "commutativity_defect": commutativity,
            },
        )
    return curve


@dataclass
class LeafCheck:
    name: str
    passed: bool
    residual: str = "0"


@dataclass
class LeafReport:
    """Outcome of :func:`verify_leaf_geodesic`; ``u`` is the factor in
    ``nabla_Z Z = u Z`` when it could be extracted."""

    checks: list[LeafCheck] = field(default_factory=list)
    u: CoeffElem | None = None

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failed(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]

    def add(self, name: str, residual: object) -> None:
        self.checks.append(LeafCheck(name, not residual, str(residual) if residual else "0"))


def leaf_curve(structure: PHStructure, leaf_index: int = 1) -> VectorField:
    """The frame field generating the closed leaf (``Z2`` by default)."""
    return structure.frame[leaf_index]


def _covariant_derivative(
    structure: PHStructure, connection: Connection, along: VectorField, components: Sequence[CoeffElem]
) -> list[CoeffElem]:
    n = structure.n
    return [
        structure.apply(along, components[b])
        + _dot(
            n,
            ((components[a], structure.pair(connection.omega[a][b], along)) for a in range(n)),
        )
        for b in range(n)
    ]


def _dot(n: int, pairs: object) -> CoeffElem:
    total = CoeffElem.zero(n)
    for left, right in pairs:  # type: ignore[attr-defined]
        if left and right:
            total = total + left * right
    return total


def verify_leaf_geodesic(
    structure: PHStructure, connection: Connection, field_: VectorField
) -> LeafReport:
    """Check symbolically that the integral curves of Z are complex null geodesics.

    Checks: Z is of type (1,0) and tangent to ker theta; ``h(Z, Zb) = 0``;
    ``[Z, Zb] = 0``; ``nabla_Zb Z = 0``; ``nabla_Z Z = u Z``; ``Zb(u) = 0``.
    """
    report = LeafReport()
    n = structure.n
    context = structure.context
    if not field_.is_type_10():
        report.checks.append(LeafCheck("type (1,0)", False, str(field_)))
        return report
    report.add("theta(Z) = 0", structure.pair(structure.theta, field_))
    components = structure.frame_components(field_)
    rebuilt = VectorField.zero(n)
    for a in range(n):
        if components[a]:
            rebuilt = rebuilt + structure.frame[a] * components[a]
    report.add("Z in span of the frame", rebuilt - field_)
    report.add("null: h(Z, Zb) = 0", structure.levi_pairing(components, components))
    conj_field = field_.conj()
    report.add("[Z, Zb] = 0", field_.bracket(conj_field, context))
    report.add(
        "nabla_Zb Z = 0",
        _first_nonzero(_covariant_derivative(structure, connection, conj_field, components)),
    )

    along = _covariant_derivative(structure, connection, field_, components)
    pivot = next((b for b in range(n) if components[b] and components[b].is_unit()), None)
    if pivot is None:
        report.checks.append(LeafCheck("nabla_Z Z = u Z", False, "no unit component to read u from"))
        return report
    u = along[pivot] * components[pivot].inv()
    report.add(
        "nabla_Z Z = u Z", _first_nonzero([along[b] - u * components[b] for b in range(n)])
    )
    report.add("Zb(u) = 0", structure.apply(conj_field, u))
    report.u = u
    return report


def _first_nonzero(values: Sequence[CoeffElem]) -> CoeffElem:
    return next((value for value in values if value), values[0] * 0 if values else 0)


@dataclass(frozen=True)
class HolomorphyReport:
    """``Upsilon' = gamma'(Upsilon)``, ``conj(gamma')(Upsilon')`` and the Hessian
    contraction ``v^a conj(v^b) Upsilon_{a b~}`` it must equal."""

    derivative: CoeffElem
    antiholomorphic_derivative: CoeffElem
    hessian_contraction: CoeffElem

    @property
    def holomorphic(self) -> bool:
        return not self.antiholomorphic_derivative

    @property
    def residual(self) -> CoeffElem:
        return self.antiholomorphic_derivative - self.hessian_contraction


def holomorphic_derivative_check(
    structure: PHStructure, connection: Connection, upsilon: CoeffElem, field_: VectorField
) -> HolomorphyReport:
    """For a null geodesic field and a pluriharmonic-type Upsilon the derivative
    ``Upsilon'`` along the curve is holomorphic."""
    n = structure.n
    components = structure.frame_components(field_)
    derivative = structure.apply(field_, upsilon)
    anti = structure.apply(field_.conj(), derivative)
    hessian = covariant_hessian(structure, connection, upsilon)
    contraction = _dot(
        n,
        (
            (components[a] * components[b].conj(), hessian.mixed[a][b])
            for a in range(n)
            for b in range(n)
        ),
    )
    return HolomorphyReport(derivative, anti, contraction)


def projective_parameter_rhs(
    structure: PHStructure, connection: Connection, field_: VectorField
) -> CoeffElem:
    """``Q = 2i v^a v^b A_{ab}`` for the null tangent ``field_ = v^a Z_a``.

    Raises:
        NotNullError: for a zero or non-null tangent.
    """
    n = structure.n
    if not field_:
        raise NotNullError("nonzero tangent")
    if not field_.is_type_10():
        raise NotNullError("type (1,0)", str(field_))
    components = structure.frame_components(field_)
    if not any(components):
        raise NotNullError("nonzero tangent")
    pairing = structure.levi_pairing(components, components)
    if pairing:
        raise NotNullError("null condition h(v, conj v) = 0", str(pairing))
    total = _dot(
        n,
        (
            (components[a] * components[b], connection.torsion[a][b])
            for a in range(n)
            for b in range(n)
        ),
    )
    return total * (I * 2)


def leaf_function(value: CoeffElem, leaf_index: int) -> Callable[[np.ndarray], np.ndarray]:
    """Restrict a coefficient to the leaf ``{t = 0, z_j = 0 (j != leaf)}`` as a
    holomorphic function of ``z_leaf``.

    Raises:
        GeodesicError: if the restriction depends on ``zb_leaf`` or carries E.
    """
    n = value.n
    vanishing: list[str] = ["t"]
    for j in range(1, n + 1):
        if j != leaf_index + 1:
            vanishing += [f"z{j}", f"zb{j}"]
    restricted = value.restrict(vanishing)
    if restricted.partial(f"zb{leaf_index + 1}"):
        raise GeodesicError(f"{restricted} is not holomorphic along the leaf")
    if restricted.exp_grades() - {0}:
        raise GeodesicError(f"{restricted} carries E along the leaf")

    def f(zeta: np.ndarray) -> np.ndarray:
        zeta = np.atleast_1d(np.asarray(zeta, dtype=complex))
        points = np.zeros((len(zeta), n), dtype=complex)
        points[:, leaf_index] = zeta
        if not restricted:
            return np.zeros(len(zeta), dtype=complex)
        return restricted.evaluate(0.0, points)

    return f


@dataclass
class SchwarzianODE:
    """``{p, z} = Q`` with ``p(z0) = p0``, ``p'(z0) = p1``, ``p''(z0) = p2``.

    ``potential`` is a numpy-vectorized callable of z or a sympy expression
    in ``z``.
    """

    potential: Callable[[np.ndarray], np.ndarray] | sp.Expr
    z0: complex = 0j
    p0: complex = 0j
    p1: complex = 1 + 0j
    p2: complex = 0j

    def __post_init__(self) -> None:
        if self.p1 == 0:
            raise GeodesicError("p'(z0) must be nonzero")
        if isinstance(self.potential, sp.Basic):
            expr = self.potential
            numeric = sp.lambdify(z_symbol, expr, modules="numpy")
            self.potential = lambda x: np.broadcast_to(numeric(x), np.shape(x)).astype(complex)

    def q(self, x: Any) -> np.ndarray:
        return np.asarray(self.potential(x), dtype=complex)  # type: ignore[operator]

    def initial_state(self) -> np.ndarray:
        """``(u1, u1', u2, u2')`` with ``u2 = 1`` and ``p = u1/u2`` matching the data."""
        u2_prime = -self.p2 / (2 * self.p1)
        return np.array([self.p0, self.p1 + self.p0 * u2_prime, 1.0, u2_prime], dtype=complex)

    def rhs(self, x: Any, y: np.ndarray) -> np.ndarray:
        half_q = self.q(x) / 2
        return np.stack([y[..., 1], -half_q * y[..., 0], y[..., 3], -half_q * y[..., 2]], axis=-1)


@dataclass
class SchwarzianSolution:
    """Samples of ``p = u1/u2`` along the integration path."""

    ode: SchwarzianODE
    z: np.ndarray
    states: np.ndarray
    step: float

    @property
    def p(self) -> np.ndarray:
        return self.states[:, 0] / self.states[:, 2]

    def evaluate(self, points: Any) -> np.ndarray:
        """``p`` at arbitrary points, integrated from the nearest sample."""
        points = np.atleast_1d(np.asarray(points, dtype=complex))
        nearest = np.argmin(np.abs(points[:, None] - self.z[None, :]), axis=1)
        start = self.z[nearest]
        y = self.states[nearest].copy()
        distance = float(np.max(np.abs(points - start), initial=0.0))
        count = max(1, int(math.ceil(distance / self.step)))
        h = (points - start) / count
        x = start.copy()
        for _ in range(count):
            y = _batched_step(self.ode.rhs, x, y, h)
            x = x + h
        return y[:, 0] / y[:, 2]


def _batched_step(
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray], x: np.ndarray, y: np.ndarray, h: np.ndarray
) -> np.ndarray:
    column = h[:, None]
    k1 = rhs(x, y)
    k2 = rhs(x + h / 2, y + k1 * (column / 2))
    k3 = rhs(x + h / 2, y + k2 * (column / 2))
    k4 = rhs(x + h, y + k3 * column)
    return y + (k1 + 2 * k2 + 2 * k3 + k4) * (column / 6)


def solve_schwarzian_ode(
    ode: SchwarzianODE, path: Sequence[complex], step: float = 1e-2
) -> SchwarzianSolution:
    """Integrate ``u'' + (Q/2) u = 0`` along a polyline starting at ``ode.z0``.

    Raises:
        StepTooLargeError: when ``|h|^2 |Q| / 2 > 1`` somewhere on the path.
        PoleCrossedError: when u2 (the denominator of p) vanishes.
    """
    if step <= 0:
        raise GeodesicError("step must be positive")
    vertices = [complex(ode.z0)] + [complex(v) for v in path]
    if len(vertices) > 1 and vertices[1] == vertices[0]:
        vertices.pop(0)
    y = ode.initial_state()
    x = complex(ode.z0)
    zs = [x]
    states = [y]
    for begin, end in zip(vertices, vertices[1:]):
        count = max(1, int(math.ceil(abs(end - begin) / step)))
        h = (end - begin) / count
        for _ in range(count):
            if abs(h) ** 2 * abs(complex(ode.q(x))) / 2 > 1:
                raise StepTooLargeError(f"step {abs(h):.3g} too large for |Q| = {abs(complex(ode.q(x))):.3g}")
            y = rk4_step(ode.rhs, x, y, h)
            x = x + h
            if abs(y[2]) < 1e-12 * max(1.0, abs(y[0])):
                raise PoleCrossedError("pole crossed", x)
            zs.append(x)
            states.append(y)
    logging.debug("Schwarzian ODE: %d steps", len(zs) - 1)
    return SchwarzianSolution(ode=ode, z=np.array(zs), states=np.array(states), step=step)


@dataclass(frozen=True)
class ProjectiveConsistency:
    """Cross-Schwarzian ``{p^, p}`` at the sample points."""

    points: tuple[complex, ...]
    cross: tuple[complex, ...]

    @property
    def max_abs(self) -> float:
        return max((abs(c) for c in self.cross), default=0.0)


def projective_consistency(
    structure: PHStructure,
    connection: Connection,
    rescaled: PHStructure,
    rescaled_connection: Connection,
    upsilon: CoeffElem,
    leaf_index: int = 1,
    points: Sequence[complex] = (0.0, 0.3, 0.3j),
    step: float = 1e-3,
) -> ProjectiveConsistency:
    """Compare the projective parameters of the leaf before and after rescaling.

    With z the affine parameter of the original structure, the rescaled affine
    parameter solves ``z^''/z^' = 2 Upsilon'``; the rescaled projective
    parameter solves ``{p^, z^} = 2i A^_{ll} / z^'^2``.  Both are integrated
    from z = 0 and compared through ``{p^, p} = ({p^, z} - {p, z}) / p'^2``.
    """
    tangent = leaf_curve(structure, leaf_index)
    q = leaf_function(projective_parameter_rhs(structure, connection, tangent), leaf_index)
    q_hat = leaf_function(projective_parameter_rhs(rescaled, rescaled_connection, tangent), leaf_index)
    slope = leaf_function(structure.apply(tangent, upsilon), leaf_index)

    def original(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        half = q(x) / 2
        return np.stack([y[:, 1], -half * y[:, 0], y[:, 3], -half * y[:, 2]], axis=1)

    def combined(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        ## y = (z^, z^', u1, du1/dz^, u2, du2/dz^)
        z_prime = y[:, 1]
        half = q_hat(x) / (2 * z_prime**2)
        return np.stack(
            [
                z_prime,
                2 * slope(x) * z_prime,
                y[:, 3] * z_prime,
                -half * y[:, 2] * z_prime,
                y[:, 5] * z_prime,
                -half * y[:, 4] * z_prime,
            ],
            axis=1,
        )

    def integrate(rhs: Callable, initial: Sequence[complex], numerator: int, denominator: int) -> Callable:
        def f(targets: np.ndarray) -> np.ndarray:
            targets = np.atleast_1d(np.asarray(targets, dtype=complex))
            y = np.tile(np.asarray(initial, dtype=complex), (len(targets), 1))
            count = max(1, int(math.ceil(float(np.max(np.abs(targets))) / step)))
            h = targets / count
            x = np.zeros(len(targets), dtype=complex)
            for _ in range(count):
                y = _batched_step(rhs, x, y, h)
                x = x + h
            return y[:, numerator] / y[:, denominator]

        return f

    p = integrate(original, (0, 1, 1, 0), 0, 2)
    p_hat = integrate(combined, (0, 1, 0, 1, 1, 0), 2, 4)
    cross = []
    for point in points:
        point = complex(point)
        derivative = taylor_coefficients(p, point, 1)[1]
        value = (numeric_schwarzian(p_hat, point) - numeric_schwarzian(p, point)) / derivative**2
        cross.append(complex(value))
    return ProjectiveConsistency(points=tuple(complex(p_) for p_ in points), cross=tuple(cross))


class Verdict(str, Enum):
    """Outcome of :func:`equivalence_test`."""

    EQUIVALENT = "equivalent"
    """The leaf quotients have the same multiplier."""

    INEQUIVALENT = "inequivalent"
    """Different multipliers, so the quotients are not projectively equivalent."""


@dataclass(frozen=True)
class QuotientInvariant:
    """The deck transformation ``z -> e^{exponent} z`` on the leaf quotient."""

    beta: sp.Rational
    weight: int
    exponent: sp.Rational

    @property
    def multiplier(self) -> float:
        return math.exp(float(self.exponent))

    def to_json(self) -> dict:
        return {
            "beta": str(self.beta),
            "weight": self.weight,
            "exponent": str(self.exponent),
            "multiplier": self.multiplier,
        }


def quotient_projective_invariant(beta: Parameter, weight: int = 3) -> QuotientInvariant:
    """Multiplier exponent ``weight * beta`` (the z2-weight is 3).

    Raises:
        QuotientParameterError: if beta >= 0.
    """
    beta = sp.Rational(beta)
    if beta >= 0:
        raise QuotientParameterError(f"beta must be negative, got {beta}")
    return QuotientInvariant(beta=beta, weight=weight, exponent=weight * beta)


def equivalence_test(beta: Parameter, beta_tilde: Parameter) -> Verdict:
    """Exact comparison of the multiplier exponents."""
    first = quotient_projective_invariant(beta)
    second = quotient_projective_invariant(beta_tilde)
    if first.exponent == second.exponent:
        return Verdict.EQUIVALENT
    return Verdict.INEQUIVALENT
