"""Shared example builds; the connection solves are the slow part of the suite."""

import pytest

from essential_cr.algebra import CoeffElem, parse_expr
from essential_cr.examples import BuiltExample, build_example, build_lorentzian
from essential_cr.pseudohermitian import Connection, PHStructure
from essential_cr.rescale import RescaleReport, rescale


@pytest.fixture(scope="session")
def pq22() -> BuiltExample:
    return build_example(2, 2)


@pytest.fixture(scope="session")
def lorentzian2() -> BuiltExample:
    return build_lorentzian(2)


@pytest.fixture(scope="session")
def upsilon22() -> CoeffElem:
    return parse_expr("z2 + zb2", 4)


@pytest.fixture(scope="session")
def rescaled22(
    pq22: BuiltExample, upsilon22: CoeffElem
) -> tuple[PHStructure, Connection, RescaleReport]:
    return rescale(pq22.structure, pq22.connection, upsilon22)
