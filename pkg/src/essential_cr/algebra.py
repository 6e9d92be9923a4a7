"""Exact coefficient arithmetic for CR computations.

This module provides the scalars and coefficient ring everything else is
built on:

* Scalars are sympy's Gaussian rationals, the elements of ``QQ_I``.
  :func:`gaussian`, :func:`conjugate` and :func:`to_complex` are the small
  helpers the rest of the package needs on top of them.
* :class:`CoeffElem` - finite sums of monomials in ``t``, ``z_j``, ``zb_j``
  (the conjugates, treated as independent generators), the formal scale
  units ``s = e^beta`` and ``a = e^alpha``, and the formal exponential grade
  ``E = e^Upsilon``.  The last three are Laurent.  Each element wraps a
  ``sympy.polys.rings`` polynomial over ``QQ_I`` together with the monomial
  in ``s, a, E`` it has been divided by.
* :class:`ExpContext` - binds ``E`` to a real exponent function so that
  derivatives of ``E^e`` can be taken by the chain rule.
* :func:`parse_expr` / :func:`print_expr` - the text grammar.

No floating point is used anywhere except in :meth:`CoeffElem.evaluate`,
which is the bridge to the numeric modules.
"""

from __future__ import annotations

import re
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from functools import cache, cached_property
from types import MappingProxyType
from typing import Any

import numpy as np
import sympy as sp
from sympy import QQ, QQ_I
from sympy.polys.domains.gaussiandomains import GaussianRational
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyElement, PolyRing, ring


class AlgebraError(Exception):
    """Base class for errors raised by the coefficient algebra."""

    pass


class DivisionByZeroError(AlgebraError, ZeroDivisionError):
    """Raised when inverting zero (or a coefficient with no inverse)."""

    pass


class DimensionMismatchError(AlgebraError, ValueError):
    """Raised when mixing coefficients built over different arities n."""

    pass


class ExpGradeError(AlgebraError):
    """Raised when the exponential grade E is used without an active context."""

    pass


class NotRealError(AlgebraError, ValueError):
    """Raised when a value required to be real (conj-invariant) is not."""

    pass


class ParseError(AlgebraError, ValueError):
    """Raised on lexical or syntax errors; ``offset`` is the 0-based position."""

    def __init__(self, message: str, offset: int) -> None:
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


Scalar = int | GaussianRational

ZERO = QQ_I.zero
ONE = QQ_I.one
I = QQ_I(0, 1)  # noqa: E741


def rational(value: Any) -> Any:
    """Coerce an int or an exact rational (``QQ`` element, sympy ``Rational``) into ``QQ``."""
    if QQ.of_type(value):
        return value
    if isinstance(value, int):
        return QQ(value)
    if isinstance(value, sp.Rational):
        return QQ(int(value.p), int(value.q))
    raise TypeError(f"exact rational expected, got {type(value).__name__}")


def gaussian(re: Any = 0, im: Any = 0) -> GaussianRational:
    """The Gaussian rational ``re + i*im``.

    Examples:
        >>> gaussian(1, 1) * gaussian(1, -1) == gaussian(2)
        True
    """
    return QQ_I(rational(re), rational(im))


def _as_scalar(value: Any) -> GaussianRational | None:
    if isinstance(value, GaussianRational):
        return value
    if isinstance(value, float | complex):
        return None
    try:
        return gaussian(value)
    except TypeError:
        return None


def as_scalar(value: Any) -> GaussianRational:
    """Coerce an int, an exact rational or a Gaussian rational into ``QQ_I``."""
    scalar = _as_scalar(value)
    if scalar is None:
        raise TypeError(f"exact scalar expected, got {type(value).__name__}")
    return scalar


def conjugate(value: GaussianRational) -> GaussianRational:
    return GaussianRational.new(value.x, -value.y)


def is_real_scalar(value: GaussianRational) -> bool:
    return not value.y


def to_complex(value: GaussianRational) -> complex:
    return complex(float(value.x), float(value.y))


def scalar_inverse(value: GaussianRational) -> GaussianRational:
    """Multiplicative inverse in ``QQ_I``.

    Raises:
        DivisionByZeroError: for zero.
    """
    if not value:
        raise DivisionByZeroError("inverse of 0")
    return ONE / value


## Exponent vectors are laid out as
##   (t, z_1..z_n, zb_1..zb_n, s, a, E)
## so the positional part [0, 2n] lines up with the covector basis
## (dt, dz_1..dz_n, dzb_1..dzb_n) of the exterior module.
Key = tuple[int, ...]
Shift = tuple[int, int, int]

_NO_SHIFT: Shift = (0, 0, 0)


def variable_names(n: int) -> list[str]:
    """Generator names in exponent-vector order."""
    return (
        ["t"]
        + [f"z{j}" for j in range(1, n + 1)]
        + [f"zb{j}" for j in range(1, n + 1)]
        + ["s", "a", "E"]
    )


def variable_position(n: int, name: str | int) -> int:
    """Position of a generator in the exponent vector."""
    if isinstance(name, int):
        if not 0 <= name < 2 * n + 4:
            raise AlgebraError(f"generator position {name} out of range for n={n}")
        return name
    try:
        return variable_names(n).index(name)
    except ValueError:
        raise AlgebraError(f"unknown generator {name!r} for n={n}") from None


@cache
def coefficient_ring(n: int) -> PolyRing:
    """``QQ_I[t, z_1..z_n, zb_1..zb_n, s, a, E]`` with the lex order."""
    return ring(",".join(variable_names(n)), QQ_I, lex)[0]


def _unit_shifted(poly: PolyElement, delta: Shift) -> PolyElement:
    if delta == _NO_SHIFT:
        return poly
    return poly.mul_monom((0,) * (poly.ring.ngens - 3) + delta)


def _normalized(poly: PolyElement, shift: Shift) -> tuple[PolyElement, Shift]:
    ## pull the largest common monomial in s, a, E out of poly and into shift
    if not poly:
        return poly, _NO_SHIFT
    monoms = list(poly.keys())
    low = tuple(min(m[p] for m in monoms) for p in (-3, -2, -1))
    if low == _NO_SHIFT:
        return poly, shift
    reduced = poly.ring.dtype(
        {m[:-3] + tuple(e - d for e, d in zip(m[-3:], low)): c for m, c in poly.items()}
    )
    return reduced, tuple(s + d for s, d in zip(shift, low))


class CoeffElem:
    """An exact coefficient: a Gaussian-rational combination of monomials.

    Instances are immutable and always canonical: the wrapped polynomial has
    no common factor in ``s``, ``a`` or ``E`` (that factor lives in
    ``shift``), so ``==`` is structural.  Arithmetic accepts ints, exact
    rationals and Gaussian rationals on either side.

    The ``t``, ``z`` and ``zb`` exponents are non-negative, the ``s``, ``a``
    and ``E`` exponents are arbitrary integers.

    Examples:
        >>> z1 = CoeffElem.variable(2, "z1")
        >>> str((z1 * z1.conj()) ** 2)
        'z1^2*zb1^2'
    """

    __slots__ = ("n", "poly", "shift", "_terms", "_compiled")

    n: int
    poly: PolyElement
    shift: Shift

    def __init__(self, n: int, terms: Mapping[Key, Any] | None = None) -> None:
        if n < 1:
            raise ValueError(f"arity must be positive, got {n}")
        width = 2 * n + 4
        summed: dict[Key, GaussianRational] = {}
        for key, coeff in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != width:
                raise DimensionMismatchError(
                    f"exponent vector of length {len(key)} for arity {n} (expected {width})"
                )
            if any(e < 0 for e in key[: 2 * n + 1]):
                raise AlgebraError(f"negative exponent on a polynomial generator in {key}")
            summed[key] = summed.get(key, ZERO) + as_scalar(coeff)
        nonzero = {key: coeff for key, coeff in summed.items() if coeff}
        shift = _NO_SHIFT
        if nonzero:
            shift = tuple(min(key[p] for key in nonzero) for p in (-3, -2, -1))
        poly = coefficient_ring(n).dtype(
            {
                key[:-3] + tuple(e - s for e, s in zip(key[-3:], shift)): coeff
                for key, coeff in nonzero.items()
            }
        )
        self._set(n, poly, shift)

    def _set(self, n: int, poly: PolyElement, shift: Shift) -> None:
        self.n = n
        self.poly = poly
        self.shift = shift
        self._terms = None
        self._compiled = None

    @classmethod
    def from_poly(cls, n: int, poly: PolyElement, shift: Shift = _NO_SHIFT) -> CoeffElem:
        """Wrap ``s^k a^l E^e * poly`` for a polynomial of :func:`coefficient_ring`."""
        if poly.ring != coefficient_ring(n):
            raise DimensionMismatchError(f"polynomial over {poly.ring} for arity {n}")
        obj = object.__new__(cls)
        obj._set(n, *_normalized(poly, tuple(shift)))
        return obj

    @classmethod
    def zero(cls, n: int) -> CoeffElem:
        return cls.from_poly(n, coefficient_ring(n).zero)

    @classmethod
    def constant(cls, n: int, value: Any) -> CoeffElem:
        return cls.from_poly(n, coefficient_ring(n).ground_new(as_scalar(value)))

    @classmethod
    def one(cls, n: int) -> CoeffElem:
        return cls.constant(n, 1)

    @classmethod
    def variable(cls, n: int, name: str | int) -> CoeffElem:
        """The generator ``name`` (``"t"``, ``"z3"``, ``"zb1"``, ``"s"``, ``"a"``, ``"E"``)."""
        return cls.from_poly(n, coefficient_ring(n).gens[variable_position(n, name)])

    @classmethod
    def monomial(cls, n: int, coeff: Any = 1, **exponents: int) -> CoeffElem:
        """A single term, e.g. ``CoeffElem.monomial(4, 4, zb1=1)`` for ``4*zb1``."""
        key = [0] * (2 * n + 4)
        for name, exponent in exponents.items():
            key[variable_position(n, name)] = exponent
        return cls(n, {tuple(key): coeff})

    def lifted(self, shift: Shift) -> PolyElement:
        """The polynomial ``p`` with ``self = s^k a^l E^e * p`` for ``shift = (k, l, e)``.

        Raises:
            AlgebraError: if ``shift`` exceeds the element's own shift somewhere.
        """
        if not self.poly:
            return self.poly
        delta = tuple(a - b for a, b in zip(self.shift, shift))
        if any(d < 0 for d in delta):
            raise AlgebraError(f"{self} has no polynomial part over the shift {shift}")
        return _unit_shifted(self.poly, delta)

    @property
    def terms(self) -> Mapping[Key, GaussianRational]:
        """Exponent vector (units included) to coefficient."""
        if self._terms is None:
            shift = self.shift
            self._terms = {
                m[:-3] + (m[-3] + shift[0], m[-2] + shift[1], m[-1] + shift[2]): c
                for m, c in self.poly.items()
            }
        return MappingProxyType(self._terms)

    def sorted_terms(self) -> list[tuple[Key, GaussianRational]]:
        """Terms in the fixed total order: higher polynomial degree first, then
        lexicographically by exponent vector (``t`` before ``z1`` before ``z2``...)."""
        npos = 2 * self.n + 1
        return sorted(
            self.terms.items(),
            key=lambda item: (-sum(item[0][:npos]), tuple(-e for e in item[0])),
        )

    def __iter__(self) -> Iterator[tuple[Key, GaussianRational]]:
        return iter(self.sorted_terms())

    def __len__(self) -> int:
        return len(self.poly)

    def __bool__(self) -> bool:
        return bool(self.poly)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, CoeffElem):
            return self.n == other.n and self.shift == other.shift and self.poly == other.poly
        scalar = _as_scalar(other)
        if scalar is None:
            return NotImplemented
        return self == CoeffElem.constant(self.n, scalar)

    def __hash__(self) -> int:
        return hash((self.n, self.shift, frozenset(self.poly.items())))

    def __repr__(self) -> str:
        return f"CoeffElem({self.n}, {print_expr(self)!r})"

    def __str__(self) -> str:
        return print_expr(self)

    def _coerce(self, other: Any) -> CoeffElem | None:
        if isinstance(other, CoeffElem):
            if other.n != self.n:
                raise DimensionMismatchError(f"arity {self.n} mixed with arity {other.n}")
            return other
        scalar = _as_scalar(other)
        if scalar is None:
            return None
        return CoeffElem.constant(self.n, scalar)

    def __add__(self, other: Any) -> CoeffElem:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if self.shift == other.shift:
            return CoeffElem.from_poly(self.n, self.poly + other.poly, self.shift)
        low = tuple(min(a, b) for a, b in zip(self.shift, other.shift))
        left = _unit_shifted(self.poly, tuple(a - b for a, b in zip(self.shift, low)))
        right = _unit_shifted(other.poly, tuple(a - b for a, b in zip(other.shift, low)))
        return CoeffElem.from_poly(self.n, left + right, low)

    __radd__ = __add__

    def __neg__(self) -> CoeffElem:
        return CoeffElem.from_poly(self.n, -self.poly, self.shift)

    def __sub__(self, other: Any) -> CoeffElem:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other: Any) -> CoeffElem:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other: Any) -> CoeffElem:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        shift = tuple(a + b for a, b in zip(self.shift, other.shift))
        return CoeffElem.from_poly(self.n, self.poly * other.poly, shift)

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> CoeffElem:
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self * other.inv()

    def __pow__(self, exponent: int) -> CoeffElem:
        if exponent < 0:
            return self.inv() ** (-exponent)
        if exponent == 0:
            return CoeffElem.one(self.n)
        shift = tuple(exponent * e for e in self.shift)
        return CoeffElem.from_poly(self.n, self.poly**exponent, shift)

    def is_unit(self) -> bool:
        """True for a single term free of ``t``, ``z`` and ``zb``, e.g. ``1/2*s^-1*E``."""
        ## canonical form moves the unit monomial of a single term into shift
        return bool(self.poly) and self.poly.is_ground

    def inv(self) -> CoeffElem:
        """Inverse of a unit.

        Raises:
            DivisionByZeroError: if the element is zero or not a unit.
        """
        if not self.is_unit():
            raise DivisionByZeroError(f"{self} is not invertible in the coefficient ring")
        poly = self.poly.ring.ground_new(scalar_inverse(self.poly.LC))
        return CoeffElem.from_poly(self.n, poly, tuple(-e for e in self.shift))

    def conj(self) -> CoeffElem:
        """Complex conjugate: swaps z_j and zb_j, conjugates the coefficients
        and fixes t, s, a and E (E is only ever attached to a real exponent)."""
        n = self.n
        poly = self.poly.ring.dtype(
            {
                m[:1] + m[n + 1 : 2 * n + 1] + m[1 : n + 1] + m[2 * n + 1 :]: conjugate(c)
                for m, c in self.poly.items()
            }
        )
        return CoeffElem.from_poly(n, poly, self.shift)

    def is_real(self) -> bool:
        return self.conj() == self

    def degree(self) -> int:
        """Total degree in the polynomial generators t, z, zb (0 for zero)."""
        npos = 2 * self.n + 1
        return max((sum(m[:npos]) for m in self.poly.itermonoms()), default=0)

    def exp_grades(self) -> set[int]:
        return {m[-1] + self.shift[2] for m in self.poly.itermonoms()}

    def is_constant(self) -> bool:
        return self.poly.is_ground and (not self.poly or self.shift == _NO_SHIFT)

    def constant_value(self) -> GaussianRational:
        """The value of a constant element.

        Raises:
            AlgebraError: if the element is not constant.
        """
        if not self.is_constant():
            raise AlgebraError(f"{self} is not constant")
        return self.poly.const()

    def partial(self, var: str | int) -> CoeffElem:
        """Positional partial derivative by t, z_j or zb_j; s, a and E are constants."""
        pos = variable_position(self.n, var)
        if pos > 2 * self.n:
            raise AlgebraError("partial derivatives are only taken by t, z_j and zb_j")
        return CoeffElem.from_poly(self.n, self.poly.diff(pos), self.shift)

    def derivative(self, var: str | int, context: ExpContext | None = None) -> CoeffElem:
        """Total derivative, applying d(E^e f) = E^e (df + e f dUpsilon).

        Raises:
            ExpGradeError: if the element carries E and no active context is given.
        """
        pos = variable_position(self.n, var)
        result = self.partial(pos)
        grade = self.shift[2]
        graded = {m: c * (m[-1] + grade) for m, c in self.poly.items() if m[-1] + grade}
        if graded:
            if context is None or not context.active:
                raise ExpGradeError(f"{self} carries E but no active exponential context")
            graded_elem = CoeffElem.from_poly(self.n, self.poly.ring.dtype(graded), self.shift)
            result = result + graded_elem * context.gradient(pos)
        return result

    def scale(self, weights: Sequence[tuple[int, int]]) -> CoeffElem:
        """Substitute x -> s^k a^l x for every coordinate.

        ``weights`` holds one ``(k, l)`` pair for t, z_1, ..., z_n; zb_j gets the
        weight of z_j (s and a are real).

        Raises:
            ExpGradeError: for elements carrying E.
        """
        n = self.n
        if len(weights) != n + 1:
            raise DimensionMismatchError(f"{len(weights)} weights for arity {n}")
        if self.exp_grades() - {0}:
            raise ExpGradeError("cannot scale an element carrying E")
        per_position = list(weights) + list(weights[1:])
        terms = {}
        for key, coeff in self.terms.items():
            ks = sum(e * w[0] for e, w in zip(key, per_position))
            ka = sum(e * w[1] for e, w in zip(key, per_position))
            terms[key[:-3] + (key[-3] + ks, key[-2] + ka, key[-1])] = coeff
        return CoeffElem(n, terms)

    def restrict(self, vanishing: Sequence[str | int]) -> CoeffElem:
        """Set the named generators to zero."""
        positions = [variable_position(self.n, v) for v in vanishing]
        kept = {m: c for m, c in self.poly.items() if not any(m[p] for p in positions)}
        return CoeffElem.from_poly(self.n, self.poly.ring.dtype(kept), self.shift)

    def at_origin(self) -> GaussianRational:
        """Value at t = z = 0 with s = a = E = 1."""
        npos = 2 * self.n + 1
        total = ZERO
        for m, c in self.poly.items():
            if not any(m[:npos]):
                total = total + c
        return total

    def evaluate(
        self,
        t: Any,
        z: Any,
        *,
        s: Any = 1.0,
        a: Any = 1.0,
        e: Any = 1.0,
    ) -> Any:
        """Numeric value at a point or a batch of points.

        Args:
            t: real coordinate, scalar or shape (N,)
            z: complex coordinates, shape (n,) or (N, n)
            s, a, e: values for the formal units (scalars or shape (N,))

        Returns:
            A complex number for a single point, else an array of shape (N,).
        """
        n = self.n
        z = np.asarray(z, dtype=complex)
        single = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[1] != n:
            raise DimensionMismatchError(f"point of dimension {z.shape[1]} for arity {n}")
        count = z.shape[0]
        values = np.empty((count, 2 * n + 4), dtype=complex)
        values[:, 0] = np.broadcast_to(np.asarray(t, dtype=float).reshape(-1), (count,))
        values[:, 1 : n + 1] = z
        values[:, n + 1 : 2 * n + 1] = z.conj()
        for offset, unit in enumerate((s, a, e)):
            values[:, 2 * n + 1 + offset] = np.broadcast_to(
                np.asarray(unit, dtype=complex).reshape(-1), (count,)
            )
        if self._compiled is None:
            terms = self.terms
            keys = np.array(list(terms), dtype=int).reshape(-1, 2 * n + 4)
            coeffs = np.array([to_complex(c) for c in terms.values()], dtype=complex)
            self._compiled = (keys, coeffs)
        keys, coeffs = self._compiled
        if not len(coeffs):
            out = np.zeros(count, dtype=complex)
        else:
            out = np.prod(values[:, None, :] ** keys[None, :, :], axis=2) @ coeffs
        return complex(out[0]) if single else out


def as_coeff(n: int, value: Any) -> CoeffElem:
    """Coerce a scalar to a constant CoeffElem of arity n (CoeffElems pass through)."""
    if isinstance(value, CoeffElem):
        if value.n != n:
            raise DimensionMismatchError(f"arity {value.n} where {n} was expected")
        return value
    return CoeffElem.constant(n, value)


@dataclass(frozen=True)
class ExpContext:
    """Binds the formal grade E to ``exp(upsilon)``.

    When inactive, every coefficient must carry exp-grade 0 and derivatives
    of E raise :class:`ExpGradeError`.
    """

    upsilon: CoeffElem
    active: bool = True

    def __post_init__(self) -> None:
        if self.upsilon.exp_grades() - {0}:
            raise ExpGradeError("the exponent Upsilon must carry exp-grade 0")
        if self.active and not self.upsilon.is_real():
            raise NotRealError(f"Upsilon = {self.upsilon} is not real")

    @classmethod
    def inactive(cls, n: int) -> ExpContext:
        return cls(CoeffElem.zero(n), active=False)

    @property
    def n(self) -> int:
        return self.upsilon.n

    @cached_property
    def _gradient(self) -> tuple[CoeffElem, ...]:
        return tuple(self.upsilon.partial(p) for p in range(2 * self.n + 1))

    def gradient(self, pos: int) -> CoeffElem:
        return self._gradient[pos]

    def check(self, value: CoeffElem) -> None:
        if not self.active and value.exp_grades() - {0}:
            raise ExpGradeError(f"{value} carries E but the exponential context is inactive")

    def exponential(self, t: Any, z: Any) -> Any:
        """Numeric value of E = exp(Upsilon) at a point (1 when inactive)."""
        if not self.active:
            return 1.0
        return np.exp(np.real(self.upsilon.evaluate(t, z)))


## Grammar
##   expr   := term (('+'|'-') term)*
##   term   := factor ('*' factor)*
##   factor := ('-'|'+') factor | base ('^' '-'? integer)?
##   base   := rational | 'i' | ident | '(' expr ')'
## The unary sign is an extension so that printed output parses back.

_NAME = re.compile(r"[A-Za-z]+\d*")
_NUMBER = re.compile(r"\d+")
_Z_NAME = re.compile(r"(zb|z)([1-9])")


@dataclass(frozen=True, slots=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        char = text[pos]
        if char.isspace():
            pos += 1
            continue
        if char in "+-*/^()":
            tokens.append(_Token("op", char, pos))
            pos += 1
            continue
        match = _NUMBER.match(text, pos) or _NAME.match(text, pos)
        if match is None:
            raise ParseError(f"unexpected character {char!r}", pos)
        kind = "number" if match.re is _NUMBER else "name"
        tokens.append(_Token(kind, match.group(), pos))
        pos = match.end()
    tokens.append(_Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], n: int) -> None:
        self.tokens = tokens
        self.index = 0
        self.n = n

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        token = self.tokens[self.index]
        self.index += 1
        return token

    def at_op(self, *ops: str) -> bool:
        token = self.peek()
        return token.kind == "op" and token.text in ops

    def parse(self) -> CoeffElem:
        value = self.expr()
        token = self.peek()
        if token.kind != "end":
            raise ParseError(f"unexpected {token.text!r}", token.offset)
        return value

    def expr(self) -> CoeffElem:
        value = self.term()
        while self.at_op("+", "-"):
            op = self.advance().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> CoeffElem:
        value = self.factor()
        while self.at_op("*"):
            self.advance()
            value = value * self.factor()
        return value

    def factor(self) -> CoeffElem:
        if self.at_op("-", "+"):
            op = self.advance().text
            operand = self.factor()
            return -operand if op == "-" else operand
        start = self.peek()
        value = self.base()
        if not self.at_op("^"):
            return value
        self.advance()
        negative = False
        if self.at_op("-"):
            self.advance()
            negative = True
        token = self.peek()
        if token.kind != "number":
            raise ParseError("expected an integer exponent", token.offset)
        self.advance()
        exponent = -int(token.text) if negative else int(token.text)
        if exponent < 0 and not value.is_unit():
            raise ParseError("negative exponent on a non-unit", start.offset)
        return value**exponent

    def base(self) -> CoeffElem:
        token = self.peek()
        if token.kind == "number":
            self.advance()
            value = QQ(int(token.text))
            if self.at_op("/"):
                self.advance()
                denominator = self.peek()
                if denominator.kind != "number" or int(denominator.text) == 0:
                    raise ParseError("expected a positive integer denominator", denominator.offset)
                self.advance()
                value = QQ(int(token.text), int(denominator.text))
            return CoeffElem.constant(self.n, gaussian(value))
        if token.kind == "name":
            self.advance()
            return self.name(token)
        if self.at_op("("):
            self.advance()
            value = self.expr()
            closing = self.peek()
            if not self.at_op(")"):
                raise ParseError("expected ')'", closing.offset)
            self.advance()
            return value
        what = "end of input" if token.kind == "end" else repr(token.text)
        raise ParseError(f"unexpected {what}", token.offset)

    def name(self, token: _Token) -> CoeffElem:
        if token.text == "i":
            return CoeffElem.constant(self.n, I)
        if token.text in ("t", "s", "a", "E"):
            return CoeffElem.variable(self.n, token.text)
        match = _Z_NAME.fullmatch(token.text)
        if match is None or int(match.group(2)) > self.n:
            raise ParseError(f"unknown variable {token.text!r}", token.offset)
        return CoeffElem.variable(self.n, token.text)


def parse_expr(text: str, n: int | None = None) -> CoeffElem:
    """Parse an expression in the coefficient grammar.

    Args:
        text: e.g. ``"1/2*i*(z1*zb2 - zb1*z2)"``
        n: arity; inferred from the largest z/zb index when omitted (minimum 1)

    Raises:
        ParseError: with the 0-based offset of the offending character/token.

    Examples:
        >>> str(parse_expr("4*zb1"))
        '4*zb1'
    """
    tokens = _tokenize(text)
    if n is None:
        indices = [
            int(m.group(2))
            for tok in tokens
            if tok.kind == "name" and (m := _Z_NAME.fullmatch(tok.text))
        ]
        n = max(indices, default=1)
    return _Parser(tokens, n).parse()


def format_scalar(value: GaussianRational) -> str:
    """Canonical text of a Gaussian rational: ``-5/3``, ``-i``, ``(1/2-3/2*i)``."""
    re_part, im_part = value.x, value.y
    if not im_part:
        return str(re_part)
    imaginary = "i" if abs(im_part) == 1 else f"{abs(im_part)}*i"
    if not re_part:
        return imaginary if im_part > 0 else f"-{imaginary}"
    sign = "+" if im_part > 0 else "-"
    return f"({re_part}{sign}{imaginary})"


def _format_monomial(key: Key, n: int) -> str:
    factors = []
    for name, exponent in zip(variable_names(n), key):
        if exponent == 1:
            factors.append(name)
        elif exponent:
            factors.append(f"{name}^{exponent}")
    return "*".join(factors)


def print_expr(value: CoeffElem) -> str:
    """Canonical text for a coefficient; ``parse_expr`` reads it back exactly."""
    if not value:
        return "0"
    parts = []
    for key, coeff in value.sorted_terms():
        monomial = _format_monomial(key, value.n)
        if not monomial:
            parts.append(format_scalar(coeff))
        elif coeff == ONE:
            parts.append(monomial)
        elif coeff == -ONE:
            parts.append(f"-{monomial}")
        else:
            parts.append(f"{format_scalar(coeff)}*{monomial}")
    text = parts[0]
    for part in parts[1:]:
        text += f" - {part[1:]}" if part.startswith("-") else f" + {part}"
    return text
