"""Tests for null geodesics, leaf checks and projective parameters."""

import io

import numpy as np
import pytest
import sympy as sp

from essential_cr.algebra import CoeffElem, parse_expr
from essential_cr.examples import BuiltExample
from essential_cr.exterior import VectorField
from essential_cr.geodesics import (
    GeodesicError,
    GeodesicResidualError,
    NotNullError,
    PoleCrossedError,
    QuotientParameterError,
    SchwarzianODE,
    StepTooLargeError,
    Verdict,
    equivalence_test,
    holomorphic_derivative_check,
    integrate_null_geodesic,
    leaf_curve,
    leaf_function,
    projective_consistency,
    projective_parameter_rhs,
    quotient_projective_invariant,
    solve_schwarzian_ode,
    verify_leaf_geodesic,
)
from essential_cr.pseudohermitian import Connection, PHStructure
from essential_cr.rescale import RescaleReport

Rescaled = tuple[PHStructure, Connection, RescaleReport]
ORIGIN = [0, 0, 0, 0]
LEAF_TANGENT = [0, 1, 0, 0]


def test_leaf_is_null_geodesic(pq22: BuiltExample) -> None:
    """Z2 passes every symbolic check with nabla_Z Z = 0."""
    structure = pq22.structure
    report = verify_leaf_geodesic(structure, pq22.connection, leaf_curve(structure))
    assert report.failed() == []
    assert report.passed
    assert report.u == 0
    assert [check.name for check in report.checks] == [
        "theta(Z) = 0",
        "Z in span of the frame",
        "null: h(Z, Zb) = 0",
        "[Z, Zb] = 0",
        "nabla_Zb Z = 0",
        "nabla_Z Z = u Z",
        "Zb(u) = 0",
    ]


def test_rescaled_leaf_is_geodesic_with_u_2(rescaled22: Rescaled) -> None:
    """After rescaling, nabla^_Z Z = 2 Z: still a geodesic, no longer affine."""
    structure, connection, _ = rescaled22
    report = verify_leaf_geodesic(structure, connection, leaf_curve(structure))
    assert report.passed, report.failed()
    assert report.u == 2


def test_non_null_field_fails(pq22: BuiltExample) -> None:
    """Z1 has h(Z1, Zb1) = 4 |z1|^2."""
    structure = pq22.structure
    report = verify_leaf_geodesic(structure, pq22.connection, structure.frame[0])
    assert "null: h(Z, Zb) = 0" in report.failed()
    assert not report.passed


def test_type_01_field_fails(pq22: BuiltExample) -> None:
    """A d/dzb field is rejected immediately."""
    report = verify_leaf_geodesic(pq22.structure, pq22.connection, VectorField.coordinate(4, 6))
    assert report.failed() == ["type (1,0)"]


def test_upsilon_derivative_is_holomorphic(pq22: BuiltExample, upsilon22: CoeffElem) -> None:
    """Upsilon' = 1 along the leaf and Zb(Upsilon') = 0."""
    structure = pq22.structure
    report = holomorphic_derivative_check(
        structure, pq22.connection, upsilon22, leaf_curve(structure)
    )
    assert report.derivative == 1
    assert report.holomorphic
    assert report.residual == 0


def test_projective_rhs_vanishes_without_torsion(pq22: BuiltExample) -> None:
    """Q = 2i A(v, v) is zero for a torsion-free connection."""
    structure = pq22.structure
    assert projective_parameter_rhs(structure, pq22.connection, leaf_curve(structure)) == 0


def test_projective_rhs_after_rescaling(rescaled22: Rescaled) -> None:
    """Q^ = 2i A^_{22} = 2 on the leaf."""
    structure, connection, _ = rescaled22
    assert projective_parameter_rhs(structure, connection, leaf_curve(structure)) == 2


def test_projective_rhs_rejects_non_null(pq22: BuiltExample) -> None:
    """Zero, non-null and type-(0,1) tangents raise NotNullError."""
    structure, connection = pq22.structure, pq22.connection
    with pytest.raises(NotNullError, match="nonzero tangent"):
        projective_parameter_rhs(structure, connection, VectorField.zero(4))
    with pytest.raises(NotNullError, match="null condition") as excinfo:
        projective_parameter_rhs(structure, connection, structure.frame[0])
    assert excinfo.value.invariant == "null condition h(v, conj v) = 0"
    with pytest.raises(NotNullError, match="type"):
        projective_parameter_rhs(structure, connection, VectorField.coordinate(4, 5))


def test_leaf_function() -> None:
    """Restriction to the z2 leaf."""
    f = leaf_function(parse_expr("z2^2 + t + z1*zb1 + 3", 4), 1)
    values = f(np.array([0.5, 1j]))
    np.testing.assert_allclose(values, [3.25, 2])
    assert leaf_function(CoeffElem.zero(4), 1)(0.3)[0] == 0
    with pytest.raises(GeodesicError, match="not holomorphic"):
        leaf_function(parse_expr("zb2", 4), 1)
    with pytest.raises(GeodesicError, match="carries E"):
        leaf_function(parse_expr("E*z2", 4), 1)


def test_schwarzian_ode_exponential() -> None:
    """p = e^{2cz} solves {p, z} = -2c^2."""
    c = 0.5
    ode = SchwarzianODE(
        potential=sp.Float(-2 * c**2), p0=1, p1=2 * c, p2=4 * c**2
    )
    solution = solve_schwarzian_ode(ode, [1.0], step=0.01)
    assert solution.z[-1] == pytest.approx(1.0)
    assert solution.p[-1] == pytest.approx(np.exp(1.0), abs=1e-8)
    values = solution.evaluate([0.5 + 0.5j, 0.25])
    np.testing.assert_allclose(values, np.exp([0.5 + 0.5j, 0.25]), atol=1e-8)


def test_schwarzian_ode_callable_potential() -> None:
    """A numpy callable works as the potential; Q = 0 gives Mobius maps."""
    ode = SchwarzianODE(potential=lambda x: np.zeros(np.shape(x), dtype=complex), p1=1, p2=2)
    solution = solve_schwarzian_ode(ode, [0.5j], step=0.05)
    assert solution.p[-1] == pytest.approx(0.5j / (1 - 0.5j), abs=1e-12)


def test_schwarzian_ode_initial_state() -> None:
    """u2 = 1, u2' = -p2/(2 p1), u1 = p0, u1' = p1 + p0 u2'."""
    ode = SchwarzianODE(potential=sp.Integer(0), p0=2, p1=4, p2=8)
    np.testing.assert_allclose(ode.initial_state(), [2, 2, 1, -1])


def test_schwarzian_ode_detects_pole() -> None:
    """p = 1/(1 - z) has a pole at z = 1."""
    ode = SchwarzianODE(potential=sp.Integer(0), p0=1, p1=1, p2=2)
    with pytest.raises(PoleCrossedError) as excinfo:
        solve_schwarzian_ode(ode, [2.0], step=0.1)
    assert abs(excinfo.value.location - 1) < 1e-9


def test_schwarzian_ode_step_too_large() -> None:
    """Large |Q| needs a smaller step."""
    ode = SchwarzianODE(potential=sp.Integer(1000))
    with pytest.raises(StepTooLargeError, match="too large"):
        solve_schwarzian_ode(ode, [1.0], step=0.1)


def test_schwarzian_ode_validation() -> None:
    """p'(z0) must be nonzero and the step positive."""
    with pytest.raises(GeodesicError, match="nonzero"):
        SchwarzianODE(potential=sp.Integer(0), p1=0)
    with pytest.raises(GeodesicError, match="positive"):
        solve_schwarzian_ode(SchwarzianODE(potential=sp.Integer(0)), [1.0], step=0)


def test_projective_consistency(
    pq22: BuiltExample, rescaled22: Rescaled, upsilon22: CoeffElem
) -> None:
    """The projective parameters before and after rescaling agree up to Mobius maps."""
    structure, connection, _ = rescaled22
    result = projective_consistency(
        pq22.structure, pq22.connection, structure, connection, upsilon22
    )
    assert result.points == (0j, 0.3 + 0j, 0.3j)
    assert result.max_abs < 1e-6


def test_null_geodesic_along_leaf(pq22: BuiltExample) -> None:
    """The numeric geodesic through the origin with tangent Z2 is the leaf."""
    curve = integrate_null_geodesic(
        pq22.structure,
        pq22.connection,
        start=(0.0, ORIGIN),
        tangent=LEAF_TANGENT,
        steps=20,
        extent=0.5,
        defining=pq22.spec.defining,
    )
    assert len(curve.zeta) == 21 * 21
    assert curve.max_residual < 1e-12
    assert curve.max_null_defect < 1e-12
    assert curve.commutativity_defect < 1e-12
    assert curve.leaf_deviation(1, ORIGIN) < 1e-8


def test_null_geodesic_csv(pq22: BuiltExample) -> None:
    """CSV output has one header row and one row per sample."""
    curve = integrate_null_geodesic(
        pq22.structure, pq22.connection, (0.0, ORIGIN), LEAF_TANGENT, steps=4, extent=0.5
    )
    stream = io.StringIO()
    curve.to_csv(stream)
    lines = stream.getvalue().splitlines()
    assert lines[0] == (
        "zeta_re,zeta_im,t,z1_re,z1_im,z2_re,z2_im,z3_re,z3_im,z4_re,z4_im,residual_r,null_defect"
    )
    assert len(lines) == 1 + len(curve.zeta)


def test_null_geodesic_rejects_non_null_tangent(pq22: BuiltExample) -> None:
    """h(v, conj v) must vanish at the start point."""
    with pytest.raises(NotNullError, match="null condition"):
        integrate_null_geodesic(
            pq22.structure, pq22.connection, (0.0, [0.1, 0, 0, 0]), [1, 0, 0, 0]
        )
    with pytest.raises(NotNullError, match="nonzero tangent"):
        integrate_null_geodesic(pq22.structure, pq22.connection, (0.0, ORIGIN), ORIGIN)
    with pytest.raises(GeodesicError, match="4 components"):
        integrate_null_geodesic(pq22.structure, pq22.connection, (0.0, [0, 0]), LEAF_TANGENT)


def test_null_geodesic_residual_abort(pq22: BuiltExample) -> None:
    """A defining function the curve does not satisfy aborts the run."""
    wrong = pq22.spec.defining - parse_expr("z2*zb2", 4)
    with pytest.raises(GeodesicResidualError, match="left M") as excinfo:
        integrate_null_geodesic(
            pq22.structure,
            pq22.connection,
            (0.0, ORIGIN),
            LEAF_TANGENT,
            steps=4,
            extent=0.5,
            defining=wrong,
        )
    assert excinfo.value.diagnostics["max_residual"] > 1e-6


def test_quotient_invariant() -> None:
    """The deck multiplier on the leaf quotient is e^{3 beta}."""
    invariant = quotient_projective_invariant(sp.Rational(-5, 4))
    assert invariant.exponent == sp.Rational(-15, 4)
    assert invariant.multiplier == pytest.approx(np.exp(-3.75))
    assert invariant.to_json()["exponent"] == "-15/4"
    with pytest.raises(QuotientParameterError, match="negative"):
        quotient_projective_invariant(0)


def test_equivalence_test() -> None:
    """Different beta give inequivalent quotients."""
    assert equivalence_test("-5/4", sp.Rational(-5, 4)) == Verdict.EQUIVALENT
    assert equivalence_test(-1, "-5/4") == Verdict.INEQUIVALENT
    assert Verdict.EQUIVALENT.value == "equivalent"
