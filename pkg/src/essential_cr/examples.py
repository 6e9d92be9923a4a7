"""Builders for the essential-flow hypersurfaces.

Two families are provided:

* ``pq(p, q)`` on R x C^(p+q): ``Im w = h(z, zb) + |z1|^4`` with

      h = z1 zb2 + z2 zb1 + z3 zb4 + z4 zb3 + sum_{5 <= j <= p+2} |zj|^2
          - sum_{p+3 <= k <= p+q} |zk|^2

  of signature (p, q), and the linear action t -> s^4 t, z1 -> s z1,
  z2 -> s^3 z2, z3 -> s^4 a^-1 z3, z4 -> a z4, zj -> s^2 zj (j >= 5).
* ``lorentzian(n)`` on R x C^n: the same without z3, z4, extended for
  n > 2 by negative squares of weight s^2.  The extension is an inference
  and is flagged as such.

``s = e^beta`` and ``a = e^alpha``; quotient parameters must satisfy
``4 beta < alpha < 0``.
"""

from __future__ import annotations

import logging
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from enum import Enum

import sympy as sp

from .algebra import CoeffElem, Scalar, as_coeff
from .curvature import CurvatureData, chern_image, curvature
from .exterior import DiagonalAction, DifferentialForm, VectorField
from .pseudohermitian import (
    Connection,
    PHStructure,
    complete_structure,
    contact_from_defining,
    solve_connection,
)
from .utils import ring_inverse, transpose

## desk-scale caps
MAX_PQ_DIMENSION = 6
MAX_LORENTZIAN_DIMENSION = 5

DEFAULT_ALPHA = sp.Rational(-1)
DEFAULT_BETA = sp.Rational(-5, 4)

## exact real quotient parameters: ints, "p/q" strings or sympy rationals
Parameter = int | str | sp.Rational


class ExampleError(ValueError):
    """Invalid example request."""

    pass


class InvalidQuotientParametersError(ExampleError):
    """Quotient parameters violate 4 beta < alpha < 0."""

    pass


class ExampleSelfCheckError(Exception):
    """A built example failed its Ricci-flat / non-flat self-check."""

    pass


class ExampleKind(str, Enum):
    """The example families."""

    PQ = "pq"
    """Signature (p, q) with p, q >= 2."""

    LORENTZIAN = "lorentzian"
    """Signature (1, n - 1), without the z3, z4 block."""


def check_quotient_parameters(alpha: Parameter | float, beta: Parameter | float) -> None:
    """Raises :class:`InvalidQuotientParametersError` unless 4 beta < alpha < 0."""
    if not 4 * beta < alpha < 0:
        raise InvalidQuotientParametersError(
            f"quotient parameters need 4*beta < alpha < 0, got alpha={alpha}, beta={beta}"
        )


def _abs_square(n: int, j: int) -> CoeffElem:
    return CoeffElem.monomial(n, 1, **{f"z{j}": 1, f"zb{j}": 1})


def _hyperbolic(n: int, j: int, k: int) -> CoeffElem:
    return CoeffElem.monomial(n, 1, **{f"z{j}": 1, f"zb{k}": 1}) + CoeffElem.monomial(
        n, 1, **{f"z{k}": 1, f"zb{j}": 1}
    )


@dataclass(frozen=True)
class ExampleSpec:
    """Everything that defines one example.

    ``defining`` is the w-free part of the defining function, so that
    ``M = {Im w = -defining}`` and ``defining = -(hermitian + quartic)``.
    ``levi_matrix[a][b]`` is the coefficient of ``z_a zb_b`` in ``hermitian``.
    """

    kind: ExampleKind
    p: int
    q: int
    hermitian: CoeffElem
    quartic: CoeffElem
    levi_matrix: tuple[tuple[int, ...], ...]
    action: DiagonalAction
    alpha: sp.Rational = DEFAULT_ALPHA
    beta: sp.Rational = DEFAULT_BETA
    inferred: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", sp.Rational(self.alpha))
        object.__setattr__(self, "beta", sp.Rational(self.beta))
        check_quotient_parameters(self.alpha, self.beta)

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def label(self) -> str:
        if self.kind == ExampleKind.PQ:
            return f"pq:{self.p},{self.q}"
        return f"lorentzian:{self.n}"

    @property
    def defining(self) -> CoeffElem:
        return -(self.hermitian + self.quartic)

    @property
    def homothety_weight(self) -> int:
        """The s-weight of t, which is the factor in Gamma^* theta = s^w theta."""
        return self.action.weights[0][0]

    @property
    def generator(self) -> VectorField:
        """The essential field X generating phi_tau = Gamma_{0,-tau}."""
        return self.action.generator("beta")

    def theta(self) -> DifferentialForm:
        return contact_from_defining(self.defining)

    def coframe(self) -> list[DifferentialForm]:
        return [DifferentialForm.dz(self.n, j) for j in range(1, self.n + 1)]

    def leaf_coordinates(self) -> tuple[int, ...]:
        """0-based z-indices that vanish on the closed leaf (all but z2)."""
        return tuple(j for j in range(self.n) if j != 1)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "kind": self.kind.value,
            "signature": [self.p, self.q],
            "n": self.n,
            "defining": f"(w - wb)/(2*i) + {self.defining}",
            "hermitian": str(self.hermitian),
            "quartic": str(self.quartic),
            "weights": self.action.to_json(),
            "alpha": str(self.alpha),
            "beta": str(self.beta),
            "inferred": self.inferred,
        }


@dataclass(frozen=True)
class BuiltExample:
    """An example with its structure and invariants."""

    spec: ExampleSpec
    structure: PHStructure
    connection: Connection
    curvature: CurvatureData

    @property
    def chern_image(self) -> tuple[int, ...]:
        return chern_image(self.curvature, self.structure)


def _levi_matrix(n: int, hermitian: CoeffElem) -> tuple[tuple[int, ...], ...]:
    rows = []
    for a in range(1, n + 1):
        row = []
        for b in range(1, n + 1):
            coeff = hermitian.partial(f"z{a}").partial(f"zb{b}").at_origin()
            row.append(int(coeff.x))
        rows.append(tuple(row))
    return tuple(rows)


def pq_spec(
    p: int, q: int, alpha: Parameter = DEFAULT_ALPHA, beta: Parameter = DEFAULT_BETA
) -> ExampleSpec:
    """The signature-(p, q) example, without building its invariants."""
    if p < 2 or q < 2:
        raise ExampleError(f"the pq family needs p >= 2 and q >= 2, got ({p},{q})")
    if q < p:
        raise ExampleError(f"the pq family needs q >= p, got ({p},{q})")
    if p + q > MAX_PQ_DIMENSION:
        raise ExampleError(f"p + q = {p + q} exceeds the cap {MAX_PQ_DIMENSION}")
    n = p + q
    hermitian = _hyperbolic(n, 1, 2) + _hyperbolic(n, 3, 4)
    for j in range(5, p + 3):
        hermitian = hermitian + _abs_square(n, j)
    for k in range(p + 3, p + q + 1):
        hermitian = hermitian - _abs_square(n, k)
    weights = [(4, 0), (1, 0), (3, 0), (4, -1), (0, 1)] + [(2, 0)] * (n - 4)
    return ExampleSpec(
        kind=ExampleKind.PQ,
        p=p,
        q=q,
        hermitian=hermitian,
        quartic=_abs_square(n, 1) ** 2,
        levi_matrix=_levi_matrix(n, hermitian),
        action=DiagonalAction(n, tuple(weights)),
        alpha=sp.Rational(alpha),
        beta=sp.Rational(beta),
    )


def lorentzian_spec(
    n: int, alpha: Parameter = DEFAULT_ALPHA, beta: Parameter = DEFAULT_BETA
) -> ExampleSpec:
    """The noncompact signature-(1, n-1) example on R x C^n."""
    if not 2 <= n <= MAX_LORENTZIAN_DIMENSION:
        raise ExampleError(f"lorentzian examples need 2 <= n <= {MAX_LORENTZIAN_DIMENSION}, got {n}")
    hermitian = _hyperbolic(n, 1, 2)
    for k in range(3, n + 1):
        hermitian = hermitian - _abs_square(n, k)
    if n > 2:
        logging.warning(
            "lorentzian:%d uses the inferred Levi extension with %d negative square(s)",
            n,
            n - 2,
        )
    weights = [(4, 0), (1, 0), (3, 0)] + [(2, 0)] * (n - 2)
    return ExampleSpec(
        kind=ExampleKind.LORENTZIAN,
        p=1,
        q=n - 1,
        hermitian=hermitian,
        quartic=_abs_square(n, 1) ** 2,
        levi_matrix=_levi_matrix(n, hermitian),
        action=DiagonalAction(n, tuple(weights)),
        alpha=sp.Rational(alpha),
        beta=sp.Rational(beta),
        inferred=n > 2,
    )


def build_spec(spec: ExampleSpec) -> BuiltExample:
    """Run the pipeline: contact form, structure, connection, curvature.

    Raises:
        ExampleSelfCheckError: if the example is not Ricci-flat or is CR flat,
            or if the signature differs from the requested one.
    """
    structure = complete_structure(spec.theta(), spec.coframe())
    if structure.signature != (spec.p, spec.q):
        raise ExampleSelfCheckError(
            f"{spec.label}: signature {structure.signature} at the origin, "
            f"expected ({spec.p}, {spec.q})"
        )
    connection = solve_connection(structure)
    curv = curvature(structure, connection)
    if not curv.is_ricci_flat():
        raise ExampleSelfCheckError(f"{spec.label}: Ricci tensor does not vanish")
    if curv.is_flat():
        raise ExampleSelfCheckError(f"{spec.label}: Chern tensor vanishes")
    return BuiltExample(spec=spec, structure=structure, connection=connection, curvature=curv)


def build_example(
    p: int, q: int, alpha: Parameter = DEFAULT_ALPHA, beta: Parameter = DEFAULT_BETA
) -> BuiltExample:
    """Build the signature-(p, q) example and its invariants.

    Examples:
        >>> built = build_example(2, 2)
        >>> built.structure.format_in_coframe(built.connection.omega[0][1])
        '4*zb1*theta1'
    """
    return build_spec(pq_spec(p, q, alpha, beta))


def build_lorentzian(
    n: int, alpha: Parameter = DEFAULT_ALPHA, beta: Parameter = DEFAULT_BETA
) -> BuiltExample:
    return build_spec(lorentzian_spec(n, alpha, beta))


_LABEL = re.compile(r"(?:(pq):)?(\d+),(\d+)|(lorentzian):(\d+)")


def parse_example_label(label: str) -> tuple[ExampleKind, tuple[int, ...]]:
    """``"2,2"``, ``"pq:2,2"`` or ``"lorentzian:3"``.

    Raises:
        ExampleError: for anything else.
    """
    match = _LABEL.fullmatch(label.strip())
    if not match:
        raise ExampleError(f"unknown example {label!r} (use 'p,q', 'pq:p,q' or 'lorentzian:n')")
    if match.group(4):
        return ExampleKind.LORENTZIAN, (int(match.group(5)),)
    return ExampleKind.PQ, (int(match.group(2)), int(match.group(3)))


def spec_from_label(
    label: str, alpha: Parameter = DEFAULT_ALPHA, beta: Parameter = DEFAULT_BETA
) -> ExampleSpec:
    kind, args = parse_example_label(label)
    if kind == ExampleKind.LORENTZIAN:
        return lorentzian_spec(*args, alpha=alpha, beta=beta)
    return pq_spec(*args, alpha=alpha, beta=beta)


def build_from_label(label: str) -> BuiltExample:
    return build_spec(spec_from_label(label))


def build_family(labels: Iterable[str]) -> list[BuiltExample]:
    """Build several examples, in the given order."""
    return [build_from_label(label) for label in labels]


def normal_form_tracefree_check(
    quartic: CoeffElem, hermitian: Sequence[Sequence[CoeffElem | Scalar]]
) -> CoeffElem:
    """``h^{a b~} d_{z_a} d_{zb_b}`` applied to the quartic term.

    Zero means the quartic is trace-free with respect to h.

    Examples:
        >>> quartic = CoeffElem.monomial(2, 1, z1=2, zb1=2)
        >>> str(normal_form_tracefree_check(quartic, [[1, 0], [0, 1]]))
        '4*z1*zb1'
    """
    n = quartic.n
    if quartic.partial("t") or quartic.exp_grades() - {0}:
        raise ExampleError("the quartic term must depend on z and zb only")
    matrix = [[as_coeff(n, entry) for entry in row] for row in hermitian]
    if len(matrix) != n:
        raise ExampleError(f"{len(matrix)}x{len(matrix)} form for arity {n}")
    inverse = ring_inverse(transpose(matrix))
    total = CoeffElem.zero(n)
    for a in range(n):
        for b in range(n):
            if inverse[a][b]:
                total = total + inverse[a][b] * quartic.partial(f"z{a + 1}").partial(f"zb{b + 1}")
    return total
