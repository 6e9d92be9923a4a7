"""Tests for exact and numeric Schwarzian derivatives."""

import numpy as np
import pytest
import sympy as sp

from essential_cr.schwarzian import (
    ConstantMapError,
    MapParseError,
    NotRationalMapError,
    mobius,
    numeric_schwarzian,
    parse_map,
    schwarzian_chain_rule_check,
    schwarzian_exact,
    schwarzian_wrt,
    taylor_coefficients,
    to_numeric,
    z,
)


def test_mobius_maps_have_zero_schwarzian() -> None:
    """{(az+b)/(cz+d), z} = 0."""
    assert schwarzian_exact("(2*z+1)/(z-3)") == 0
    assert schwarzian_exact("i*z + 5") == 0
    assert schwarzian_exact("1/z") == 0


def test_power_map() -> None:
    """{z^2, z} = -3/(2 z^2)."""
    result = schwarzian_exact("z^2")
    assert sp.simplify(result + sp.Rational(3, 2) / z**2) == 0


def test_mobius_post_composition_invariance() -> None:
    """{M o p, z} = {p, z}."""
    p = parse_map("z^3 + z")
    transformed = mobius(1, 2, 3, 4)(p)
    assert sp.cancel(schwarzian_exact(transformed) - schwarzian_exact(p)) == 0
    with pytest.raises(ValueError, match="degenerate"):
        mobius(1, 2, 2, 4)


def test_chain_rule() -> None:
    """{p, z} = {p, w} w'^2 + {w, z}."""
    assert schwarzian_chain_rule_check("z^3", "z^2 + 1") == 0
    assert schwarzian_chain_rule_check("1/(z^2 + 1)", "z^3 - 2*z") == 0


def test_schwarzian_with_respect_to_itself() -> None:
    """{p, p} = 0."""
    assert schwarzian_wrt("z^3", "z^3") == 0


def test_parse_map_errors() -> None:
    """Unknown symbols, syntax errors and non-rational maps are rejected."""
    with pytest.raises(MapParseError, match="unknown symbol"):
        parse_map("z + y")
    with pytest.raises(MapParseError):
        parse_map("z +")
    with pytest.raises(NotRationalMapError):
        parse_map("exp(z)")


def test_constant_map() -> None:
    """Constants have no Schwarzian."""
    with pytest.raises(ConstantMapError):
        schwarzian_exact("3")
    with pytest.raises(ConstantMapError):
        schwarzian_wrt("z", "2")


def test_taylor_coefficients_of_exp() -> None:
    """All derivatives of exp at 0 are 1."""
    np.testing.assert_allclose(taylor_coefficients(np.exp, 0.0, 3), [1, 1, 1, 1], atol=1e-12)


def test_numeric_schwarzian_matches_exact() -> None:
    """The Cauchy-integral Schwarzian agrees with the exact one."""
    assert numeric_schwarzian(np.exp, 0.1) == pytest.approx(-0.5, abs=1e-9)
    value = numeric_schwarzian(to_numeric("z^2"), 1.0 + 0.5j)
    exact = complex(schwarzian_exact("z^2").subs(z, 1.0 + 0.5j))
    assert value == pytest.approx(exact, abs=1e-9)
    assert numeric_schwarzian(to_numeric("(2*z+1)/(z-3)"), 0.0) == pytest.approx(0, abs=1e-9)


def test_numeric_schwarzian_constant() -> None:
    """A vanishing first derivative raises ConstantMapError."""
    with pytest.raises(ConstantMapError):
        numeric_schwarzian(lambda x: np.ones_like(x), 0.0)
