"""Schwarzian derivatives, exact and numeric.

Exact work is done on rational maps of one complex variable ``z`` with
sympy; the numeric Schwarzian of an analytic function uses Cauchy's
integral formula on a small circle (trapezoid rule), which converges
geometrically for analytic data.
"""

from __future__ import annotations

from collections.abc import Callable

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

z = sp.Symbol("z")

_TRANSFORMATIONS = standard_transformations + (convert_xor,)


class SchwarzianError(Exception):
    """Base class for Schwarzian errors."""

    pass


class ConstantMapError(SchwarzianError, ValueError):
    """The map has vanishing derivative."""

    pass


class NotRationalMapError(SchwarzianError, ValueError):
    """Only rational maps of z are accepted by the exact routines."""

    pass


class MapParseError(SchwarzianError, ValueError):
    """The map text could not be parsed."""

    pass


def parse_map(text: str) -> sp.Expr:
    """Parse a rational map of ``z`` such as ``"(2*z+1)/(z-3)"``.

    ``i`` is the imaginary unit and ``^`` means power.

    Raises:
        MapParseError: on syntax errors or foreign symbols.
        NotRationalMapError: if the result is not rational in z.
    """
    try:
        expr = parse_expr(
            text, local_dict={"z": z, "i": sp.I, "I": sp.I}, transformations=_TRANSFORMATIONS
        )
    except Exception as exc:
        ## tokenize.TokenError, SyntaxError and SympifyError all end up here
        raise MapParseError(f"cannot parse map {text!r}: {exc}") from exc
    if not isinstance(expr, sp.Expr):
        raise MapParseError(f"{text!r} is not an expression")
    extra = expr.free_symbols - {z}
    if extra:
        names = ", ".join(sorted(str(s) for s in extra))
        raise MapParseError(f"unknown symbol(s) {names} in {text!r}")
    _require_rational(expr)
    return expr


def _require_rational(expr: sp.Expr) -> None:
    if not expr.is_rational_function(z):
        raise NotRationalMapError(f"{expr} is not a rational map of z")


def _as_map(p: sp.Expr | str) -> sp.Expr:
    if isinstance(p, str):
        return parse_map(p)
    p = sp.sympify(p)
    _require_rational(p)
    return p


def schwarzian_exact(p: sp.Expr | str) -> sp.Expr:
    """``{p, z} = p'''/p' - 3/2 (p''/p')^2`` as a reduced rational function.

    Raises:
        ConstantMapError: if p' vanishes identically.
        NotRationalMapError: for non-rational input.

    Examples:
        >>> schwarzian_exact("(2*z+1)/(z-3)")
        0
        >>> schwarzian_exact("z^2")
        -3/(2*z**2)
    """
    p = _as_map(p)
    d1 = sp.cancel(sp.diff(p, z))
    if d1 == 0:
        raise ConstantMapError(f"{p} is constant")
    d2 = sp.diff(d1, z)
    d3 = sp.diff(d2, z)
    return sp.cancel(d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2)


def schwarzian_wrt(p: sp.Expr | str, w: sp.Expr | str) -> sp.Expr:
    """``{p, w}`` for p and w both given as maps of z, using ``d/dw = (1/w') d/dz``."""
    p, w = _as_map(p), _as_map(w)
    dw = sp.diff(w, z)
    if sp.cancel(dw) == 0:
        raise ConstantMapError(f"{w} is constant")

    def along_w(expr: sp.Expr) -> sp.Expr:
        return sp.cancel(sp.diff(expr, z) / dw)

    d1 = along_w(p)
    if d1 == 0:
        raise ConstantMapError(f"{p} is constant")
    d2 = along_w(d1)
    d3 = along_w(d2)
    return sp.cancel(d3 / d1 - sp.Rational(3, 2) * (d2 / d1) ** 2)


def schwarzian_chain_rule_check(p: sp.Expr | str, w: sp.Expr | str) -> sp.Expr:
    """Residual of the chain rule ``{p, z} = {p, w} (w')^2 + {w, z}``.

    Returns ``({p, z} - {w, z}) (dz/dw)^2 - {p, w}``, which must cancel to 0.
    """
    p, w = _as_map(p), _as_map(w)
    dw = sp.diff(w, z)
    lhs = (schwarzian_exact(p) - schwarzian_exact(w)) / dw**2
    return sp.cancel(lhs - schwarzian_wrt(p, w))


def mobius(a: complex, b: complex, c: complex, d: complex) -> Callable[[sp.Expr], sp.Expr]:
    """Post-composition with ``(a p + b)/(c p + d)``, ad - bc != 0."""
    if sp.simplify(a * d - b * c) == 0:
        raise ValueError("degenerate Mobius transformation (ad - bc = 0)")
    return lambda p: (a * p + b) / (c * p + d)


def to_numeric(p: sp.Expr | str) -> Callable[[np.ndarray], np.ndarray]:
    """A numpy-vectorized callable for a map of z."""
    return sp.lambdify(z, _as_map(p), modules="numpy")


def taylor_coefficients(
    f: Callable[[np.ndarray], np.ndarray],
    z0: complex,
    orders: int = 3,
    radius: float = 0.25,
    nodes: int = 32,
) -> np.ndarray:
    """Derivatives ``f^(k)(z0)`` for k = 0..orders by the trapezoid rule on a circle."""
    angles = 2 * np.pi * np.arange(nodes) / nodes
    samples = np.asarray(f(z0 + radius * np.exp(1j * angles)), dtype=complex)
    derivatives = np.empty(orders + 1, dtype=complex)
    factorial = 1.0
    for k in range(orders + 1):
        if k:
            factorial *= k
        derivatives[k] = factorial * np.mean(samples * np.exp(-1j * k * angles)) / radius**k
    return derivatives


def numeric_schwarzian(
    f: Callable[[np.ndarray], np.ndarray],
    z0: complex,
    radius: float = 0.25,
    nodes: int = 32,
) -> complex:
    """``{f, z}`` at z0 for an analytic f defined on a disc around z0.

    Raises:
        ConstantMapError: if f'(z0) vanishes numerically.
    """
    d0, d1, d2, d3 = taylor_coefficients(f, z0, 3, radius, nodes)
    if abs(d1) < 1e-12 * max(1.0, abs(d0)):
        raise ConstantMapError(f"derivative vanishes at {z0}")
    return complex(d3 / d1 - 1.5 * (d2 / d1) ** 2)
