"""Property-based tests for the algebraic identities the engine relies on."""

import numpy as np
import sympy as sp
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from sympy import QQ

from essential_cr.algebra import CoeffElem, gaussian, parse_expr
from essential_cr.exterior import DifferentialForm, VectorField
from essential_cr.schwarzian import mobius, schwarzian_chain_rule_check, schwarzian_exact, z

N = 2

rationals = st.builds(QQ, st.integers(-20, 20), st.integers(1, 4))
gaussians = st.builds(gaussian, rationals, rationals)


def _keys(max_power: int, units: bool, exp_grade: bool) -> st.SearchStrategy:
    polynomial = st.tuples(*[st.integers(0, max_power)] * (2 * N + 1))
    unit = st.integers(-1, 1) if units else st.just(0)
    grade = st.integers(-1, 1) if exp_grade else st.just(0)
    return st.builds(lambda p, s, a, e: p + (s, a, e), polynomial, unit, unit, grade)


def elements(max_power: int = 2, units: bool = True, exp_grade: bool = True) -> st.SearchStrategy:
    return st.dictionaries(_keys(max_power, units, exp_grade), gaussians, max_size=4).map(
        lambda terms: CoeffElem(N, terms)
    )


polynomials = elements(units=False, exp_grade=False)


@settings(max_examples=1000, deadline=None)
@given(elements(), elements(), elements())
def test_ring_axioms(x: CoeffElem, y: CoeffElem, w: CoeffElem) -> None:
    assert (x + y) + w == x + (y + w)
    assert (x * y) * w == x * (y * w)
    assert x * y == y * x
    assert x * (y + w) == x * y + x * w
    assert x - x == CoeffElem.zero(N)


@settings(max_examples=300, deadline=None)
@given(elements(), elements())
def test_conjugation(x: CoeffElem, y: CoeffElem) -> None:
    assert x.conj().conj() == x
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x * x.conj()).is_real()


@settings(max_examples=1000, deadline=None)
@given(elements())
def test_print_parse(x: CoeffElem) -> None:
    assert parse_expr(str(x), N) == x


@settings(max_examples=200, deadline=None)
@given(polynomials, polynomials, st.sampled_from(["t", "z1", "zb2"]))
def test_leibniz_rule(x: CoeffElem, y: CoeffElem, name: str) -> None:
    assert (x * y).partial(name) == x.partial(name) * y + x * y.partial(name)


@settings(max_examples=100, deadline=None)
@given(elements(units=False, exp_grade=False), st.tuples(*[st.floats(-1, 1)] * 3))
def test_evaluation_is_a_ring_map(x: CoeffElem, point: tuple[float, float, float]) -> None:
    t, re, im = point
    zs = np.array([re + 1j * im, im - 0.5j * re])
    square = (x * x).evaluate(t, zs)
    assert np.isclose(square, x.evaluate(t, zs) ** 2, rtol=1e-9, atol=1e-9)


def _one_forms(n: int) -> st.SearchStrategy:
    indices = st.integers(0, 2 * n).map(lambda i: (i,))
    return st.dictionaries(indices, polynomials_of(n), max_size=3).map(
        lambda components: DifferentialForm(n, 1, components)
    )


def polynomials_of(n: int) -> st.SearchStrategy:
    keys = st.tuples(*[st.integers(0, 2)] * (2 * n + 1)).map(lambda p: p + (0, 0, 0))
    return st.dictionaries(keys, gaussians, max_size=3).map(lambda terms: CoeffElem(n, terms))


@settings(max_examples=1000, deadline=None)
@given(_one_forms(2))
def test_d_squared_vanishes(form: DifferentialForm) -> None:
    assert form.d().d() == DifferentialForm.zero(2, 3)


def _fields(n: int) -> st.SearchStrategy:
    return st.dictionaries(st.integers(0, 2 * n), polynomials_of(n), max_size=2).map(
        lambda components: VectorField(n, components)
    )


@settings(max_examples=1000, deadline=None)
@given(_fields(1), _fields(1), _fields(1))
def test_jacobi_identity(x: VectorField, y: VectorField, w: VectorField) -> None:
    total = x.bracket(y.bracket(w)) + y.bracket(w.bracket(x)) + w.bracket(x.bracket(y))
    assert total == VectorField.zero(1)
    assert x.bracket(y) == -y.bracket(x)


z_polynomials = st.lists(st.integers(-3, 3), min_size=1, max_size=3).map(
    lambda coeffs: sum(c * z**k for k, c in enumerate(coeffs))
)
maps = (
    st.tuples(z_polynomials, z_polynomials)
    .filter(lambda pair: pair[1] != 0)
    .map(lambda pair: sp.cancel(pair[0] / pair[1]))
    .filter(lambda p: sp.diff(p, z) != 0)
)


@settings(max_examples=50, deadline=None)
@given(maps, st.tuples(*[st.integers(-3, 3)] * 4))
def test_schwarzian_mobius_invariance(p: sp.Expr, abcd: tuple[int, int, int, int]) -> None:
    a, b, c, d = abcd
    assume(a * d - b * c != 0)
    assert sp.cancel(schwarzian_exact(mobius(a, b, c, d)(p)) - schwarzian_exact(p)) == 0


## inner maps keep a denominator of degree at most 1
low_degree_maps = (
    st.tuples(z_polynomials, st.lists(st.integers(-3, 3), min_size=1, max_size=2))
    .map(lambda pair: (pair[0], sum(c * z**k for k, c in enumerate(pair[1]))))
    .filter(lambda pair: pair[1] != 0)
    .map(lambda pair: sp.cancel(pair[0] / pair[1]))
    .filter(lambda p: sp.diff(p, z) != 0)
)


@settings(max_examples=30, deadline=None)
@given(maps, low_degree_maps)
def test_schwarzian_chain_rule(p: sp.Expr, w: sp.Expr) -> None:
    assert schwarzian_chain_rule_check(p, w) == 0
