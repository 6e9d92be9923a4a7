"""Tests for pseudohermitian structures, the connection solve and Hessians."""

import pytest

from essential_cr import pseudohermitian
from essential_cr.algebra import CoeffElem, DimensionMismatchError, NotRealError, parse_expr
from essential_cr.examples import BuiltExample
from essential_cr.exterior import DifferentialForm, VectorField
from essential_cr.pseudohermitian import (
    Connection,
    DegenerateCoframeError,
    DegenerateLeviFormError,
    DegreeBoundExceededError,
    InadmissibleCoframeError,
    NonPolynomialDualFrameError,
    StructureError,
    complete_structure,
    contact_from_defining,
    covariant_hessian,
    solve_connection,
    verify_connection,
)


def _heisenberg(sign: str = "-") -> tuple:
    theta = contact_from_defining(f"{sign}z1*zb1", 1)
    structure = complete_structure(theta, [DifferentialForm.dz(1, 1)])
    return theta, structure


def test_contact_form_of_heisenberg() -> None:
    """theta = 1/2 dt - i/2 zb dz + i/2 z dzb, with d theta = i dz ^ dzb."""
    theta, _ = _heisenberg()
    assert theta[(0,)] == parse_expr("1/2")
    assert theta[(1,)] == parse_expr("-1/2*i*zb1")
    assert theta[(2,)] == parse_expr("1/2*i*z1")
    assert theta.is_real()
    assert theta.d() == (DifferentialForm.dz(1, 1) ^ DifferentialForm.dzb(1, 1)) * parse_expr("i")


def test_contact_form_validation() -> None:
    """The defining function must be real and free of t and E."""
    with pytest.raises(StructureError, match="depend on t"):
        contact_from_defining("t*z1*zb1", 1)
    with pytest.raises(NotRealError, match="not real"):
        contact_from_defining("i*z1*zb1", 1)
    with pytest.raises(StructureError, match="carry E"):
        contact_from_defining("E", 1)


def test_heisenberg_structure() -> None:
    """h = 1, T = 2 d/dt and Z = d/dz + i zb d/dt."""
    _, structure = _heisenberg()
    assert structure.levi == ((parse_expr("1"),),)
    assert structure.levi_inv == ((parse_expr("1"),),)
    assert structure.signature == (1, 0)
    assert structure.reeb == VectorField(1, {0: 2})
    assert structure.frame[0] == VectorField(1, {0: parse_expr("i*zb1"), 1: 1})
    assert structure.conj_frame[0] == structure.frame[0].conj()


def test_heisenberg_negative_signature() -> None:
    """Flipping the defining function flips the Levi form."""
    _, structure = _heisenberg("")
    assert structure.levi[0][0] == -1
    assert structure.signature == (0, 1)


def test_frame_duality_and_expansion() -> None:
    """The coframe expansion of dt reads off theta(.) on the dual frame."""
    theta, structure = _heisenberg()
    assert structure.format_in_coframe(theta) == "theta"
    assert structure.format_in_coframe(DifferentialForm.dz(1, 1)) == "theta1"
    assert (
        structure.format_in_coframe(DifferentialForm.dt(1))
        == "2*theta + i*zb1*theta1 - i*z1*thetab1"
    )
    assert structure.format_in_coframe(DifferentialForm.zero(1, 1)) == "0"
    assert structure.frame_components(structure.frame[0]) == (parse_expr("1"),)
    assert structure.pair(theta, structure.reeb) == 1


def test_levi_pairing() -> None:
    """h(U, V~) = h_{ab~} U^a conj(V^b)."""
    _, structure = _heisenberg()
    u = (parse_expr("i"),)
    assert structure.levi_pairing(u, u) == 1
    assert structure.levi_pairing(u, (parse_expr("z1"),)) == parse_expr("i*zb1")


def test_degenerate_coframe() -> None:
    """Linearly dependent coframe forms are rejected."""
    dt = DifferentialForm.dt(1)
    with pytest.raises(DegenerateCoframeError, match="degenerate coframe"):
        complete_structure(dt, [dt])
    assert issubclass(DegenerateCoframeError, NonPolynomialDualFrameError)


def test_non_polynomial_dual_frame() -> None:
    """A coframe whose inverse needs division by a polynomial is rejected."""
    theta, _ = _heisenberg()
    with pytest.raises(NonPolynomialDualFrameError):
        complete_structure(theta, [DifferentialForm.dt(1)])


def test_degenerate_levi_form() -> None:
    """A closed theta has a null Levi form."""
    with pytest.raises(DegenerateLeviFormError, match="null direction"):
        complete_structure(DifferentialForm.dt(1), [DifferentialForm.dz(1, 1)])


def test_inadmissible_coframe() -> None:
    """The Reeb candidate must annihilate d theta."""
    spatial = DifferentialForm.dzb(1, 1) * parse_expr("i*z1") - DifferentialForm.dz(
        1, 1
    ) * parse_expr("i*zb1")
    theta = DifferentialForm.dt(1) + spatial * parse_expr("t")
    with pytest.raises(InadmissibleCoframeError, match="does not annihilate"):
        complete_structure(theta, [DifferentialForm.dz(1, 1)])


def test_structure_input_validation() -> None:
    """theta must be real and the coframe must have n forms."""
    dz = DifferentialForm.dz(1, 1)
    with pytest.raises(NotRealError):
        complete_structure(dz, [dz])
    with pytest.raises(StructureError, match="0 coframe forms"):
        complete_structure(DifferentialForm.dt(1), [])


def test_heisenberg_connection_vanishes() -> None:
    """The flat model has zero connection forms and no torsion."""
    _, structure = _heisenberg()
    connection = solve_connection(structure)
    assert connection.nonzero_forms() == []
    assert connection.is_torsion_free()
    assert verify_connection(structure, connection).is_zero


def test_pq22_structure(pq22: BuiltExample) -> None:
    """Levi form entries and signature of the (2,2) example."""
    structure = pq22.structure
    assert structure.signature == (2, 2)
    assert structure.levi[0][0] == parse_expr("4*z1*zb1", 4)
    assert structure.levi[0][1] == 1
    assert structure.levi[2][3] == 1
    assert structure.levi[1][1] == 0
    assert structure.to_json()["signature"] == [2, 2]


def test_pq22_connection(pq22: BuiltExample) -> None:
    """The only nonzero connection form is omega_1^2 = 4 zb1 theta^1."""
    structure, connection = pq22.structure, pq22.connection
    nonzero = connection.nonzero_forms()
    assert [(a, b) for a, b, _ in nonzero] == [(0, 1)]
    assert structure.format_in_coframe(connection.omega[0][1]) == "4*zb1*theta1"
    assert connection.is_torsion_free()
    assert connection.to_json(structure)["omega"]["1,2"] == "4*zb1*theta1"
    assert verify_connection(structure, connection).is_zero


def test_degree_bound_is_checked_on_the_solution(
    pq22: BuiltExample, monkeypatch: pytest.MonkeyPatch
) -> None:
    """The cap applies to the finished connection, whose 4 zb1 has degree 1."""
    monkeypatch.setattr(pseudohermitian, "DEGREE_CAP", 0)
    with pytest.raises(DegreeBoundExceededError, match=r"degree bound 0\)") as excinfo:
        solve_connection(pq22.structure)
    assert excinfo.value.bound == 0


def test_verify_connection_reports_failures(pq22: BuiltExample) -> None:
    """The zero connection fails metric compatibility for h_{11~} = 4 z1 zb1."""
    residual = verify_connection(pq22.structure, Connection.zero(4))
    assert not residual.is_zero
    assert "metric compatibility for h_11" in residual.failures()
    with pytest.raises(DimensionMismatchError):
        verify_connection(pq22.structure, Connection.zero(2))


def test_covariant_hessian_of_upsilon(pq22: BuiltExample, upsilon22: CoeffElem) -> None:
    """For u = z2 + zb2: u_{11} = -4 zb1, u_{ab~} = 0."""
    hessian = covariant_hessian(pq22.structure, pq22.connection, upsilon22)
    assert hessian.first == (0, 1, 0, 0)
    assert hessian.holomorphic[0][0] == parse_expr("-4*zb1", 4)
    assert sum(1 for row in hessian.holomorphic for entry in row if entry) == 1
    assert not any(entry for row in hessian.mixed for entry in row)
    assert hessian.is_pluriharmonic_type(pq22.structure)


def test_covariant_hessian_arity_mismatch(pq22: BuiltExample) -> None:
    """The function must live on the same space."""
    with pytest.raises(DimensionMismatchError):
        covariant_hessian(pq22.structure, pq22.connection, parse_expr("z1 + zb1", 2))
