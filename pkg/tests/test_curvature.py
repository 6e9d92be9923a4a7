"""Tests for the curvature, Ricci and Chern tensors."""

import pytest

from essential_cr.algebra import parse_expr
from essential_cr.curvature import TorsionUnsupportedError, chern_image, curvature, image_labels
from essential_cr.dynamics import verify_action_invariants
from essential_cr.examples import BuiltExample, build_from_label
from essential_cr.exterior import DifferentialForm
from essential_cr.pseudohermitian import (
    Connection,
    StructureError,
    complete_structure,
    contact_from_defining,
    solve_connection,
)
from essential_cr.report import CheckStatus


def test_pq22_single_curvature_component(pq22: BuiltExample) -> None:
    """R_1^2_{1 1~} = -4 is the only nonzero component."""
    curv = pq22.curvature
    assert curv.components[0][1][0][0] == -4
    assert [index for index, _ in curv.nonzero_components()] == [(0, 1, 0, 0)]


def test_pq22_ricci_flat_not_flat(pq22: BuiltExample) -> None:
    """Ricci and scalar vanish; the Chern tensor equals the curvature."""
    curv = pq22.curvature
    assert curv.is_ricci_flat()
    assert curv.scalar == 0
    assert curv.chern == curv.components
    assert not curv.is_flat()
    assert curv.is_pseudo_einstein(pq22.structure)


def test_pq22_lowered_tensor(pq22: BuiltExample) -> None:
    """Lowering with h_{2 1~} = 1 moves the -4 into slot (1, 1, 1, 1)."""
    curv = pq22.curvature
    assert curv.lowered[0][0][0][0] == -4
    assert [index for index, _ in curv.nonzero_components(curv.lowered)] == [(0, 0, 0, 0)]


def test_pq22_chern_traces_vanish(pq22: BuiltExample) -> None:
    """All four h-traces of the Chern tensor are zero."""
    traces = pq22.curvature.chern_traces(pq22.structure)
    assert set(traces) == {"a,b", "r,s", "a,s", "r,b"}
    for matrix in traces.values():
        assert not any(entry for row in matrix for entry in row)


def test_pq22_chern_image(pq22: BuiltExample) -> None:
    """The Chern map has image span{Z2}."""
    assert chern_image(pq22.curvature, pq22.structure) == (1,)
    assert pq22.chern_image == (1,)
    assert image_labels((1,)) == ["Z2"]


def test_curvature_json(pq22: BuiltExample) -> None:
    """Only nonzero components are listed, 1-based."""
    data = pq22.curvature.to_json()
    assert data["curvature"] == {"1,2,1,1": "-4"}
    assert data["chern"] == {"1,2,1,1": "-4"}
    assert data["scalar"] == "0"
    assert data["ricci"][0] == ["0", "0", "0", "0"]


def test_lorentzian_curvature(lorentzian2: BuiltExample) -> None:
    """The signature (1,1) example has the same curvature profile."""
    curv = lorentzian2.curvature
    assert lorentzian2.structure.signature == (1, 1)
    assert curv.components[0][1][0][0] == -4
    assert curv.is_ricci_flat()
    assert lorentzian2.chern_image == (1,)


def test_heisenberg_is_flat() -> None:
    """The flat model has vanishing curvature."""
    theta = contact_from_defining("-z1*zb1 - z2*zb2", 2)
    structure = complete_structure(theta, [DifferentialForm.dz(2, 1), DifferentialForm.dz(2, 2)])
    curv = curvature(structure, solve_connection(structure))
    assert curv.nonzero_components() == []
    assert curv.is_flat()
    assert chern_image(curv) == ()


def test_torsion_is_rejected(pq22: BuiltExample) -> None:
    """Curvature extraction needs a torsion-free connection."""
    zero = Connection.zero(4)
    torsion = tuple(
        tuple(parse_expr("1", 4) if a == b == 0 else entry for b, entry in enumerate(row))
        for a, row in enumerate(zero.torsion)
    )
    connection = Connection(omega=pq22.connection.omega, torsion=torsion)
    with pytest.raises(TorsionUnsupportedError, match="torsion-full curvature unsupported"):
        curvature(pq22.structure, connection)


def test_chern_image_size_mismatch(pq22: BuiltExample) -> None:
    """The structure must match the curvature's size."""
    theta = contact_from_defining("-z1*zb1", 1)
    structure = complete_structure(theta, [DifferentialForm.dz(1, 1)])
    with pytest.raises(StructureError, match="curvature of size 4"):
        chern_image(pq22.curvature, structure)


@pytest.mark.parametrize(
    "label,signature",
    [("pq:2,3", (2, 3)), ("pq:3,3", (3, 3)), ("lorentzian:3", (1, 2))],
)
def test_family_invariants(label: str, signature: tuple[int, int]) -> None:
    """Each member has the single component R_1^2_{1 1~} = -4 and exact homotheties."""
    built = build_from_label(label)
    curv = built.curvature
    assert built.structure.signature == signature
    assert curv.components[0][1][0][0] == -4
    assert [index for index, _ in curv.nonzero_components()] == [(0, 1, 0, 0)]
    assert curv.is_ricci_flat()
    assert curv.chern == curv.components
    for matrix in curv.chern_traces(built.structure).values():
        assert not any(entry for row in matrix for entry in row)
    assert built.chern_image == (1,)
    report = verify_action_invariants(built.spec)
    assert report.passed, [check.name for check in report.failures()]
    assert all(check.status == CheckStatus.EXACT_PASS for check in report.checks)
