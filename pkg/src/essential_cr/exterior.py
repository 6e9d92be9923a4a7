"""Exterior calculus on R x C^n with exact coefficients.

The ordered covector basis is ``(dt, dz_1..dz_n, dzb_1..dzb_n)`` with
basis index 0 for ``dt``, ``j`` for ``dz_j`` and ``n + j`` for ``dzb_j``.
Vector fields use the dual basis ``(d/dt, d/dz_j, d/dzb_j)`` with the same
indices, which are also the positions of the polynomial generators in a
:class:`~essential_cr.algebra.CoeffElem` exponent vector.

Forms store only strictly increasing multi-indices; evaluation follows the
determinant convention, ``(dx ^ dy)(X, Y) = X^x Y^y - X^y Y^x``.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any

from .algebra import CoeffElem, DimensionMismatchError, ExpContext, as_coeff, parse_expr

Index = tuple[int, ...]


class ExteriorError(ValueError):
    """Raised on degree or arity mismatches in the exterior algebra."""

    pass


def basis_names(n: int) -> list[str]:
    """JSON names of the covector basis: ``dt``, ``dz1``.., ``dzb1``.."""
    return ["dt"] + [f"dz{j}" for j in range(1, n + 1)] + [f"dzb{j}" for j in range(1, n + 1)]


def _sort_with_sign(indices: Sequence[int]) -> tuple[int, Index | None]:
    """Sort a multi-index; the sign is that of the sorting permutation.

    Returns ``(0, None)`` when an index repeats."""
    if len(set(indices)) != len(indices):
        return 0, None
    inversions = sum(
        1 for i in range(len(indices)) for j in range(i + 1, len(indices)) if indices[i] > indices[j]
    )
    return (-1 if inversions % 2 else 1), tuple(sorted(indices))


def _conj_index(n: int, index: int) -> int:
    if index == 0:
        return 0
    return index + n if index <= n else index - n


def _accumulate(target: dict[Index, CoeffElem], key: Index, value: CoeffElem) -> None:
    current = target.get(key)
    total = value if current is None else current + value
    if total:
        target[key] = total
    else:
        target.pop(key, None)


class DifferentialForm:
    """A homogeneous k-form ``sum f_I dx^I`` with CoeffElem coefficients.

    Immutable; ``+``, ``-`` and multiplication by scalars/CoeffElems are
    supported, the wedge product is :meth:`wedge` (also spelled ``^``).
    """

    __slots__ = ("n", "degree", "_components")

    def __init__(
        self,
        n: int,
        degree: int,
        components: Mapping[Sequence[int], CoeffElem | Any] | None = None,
    ) -> None:
        if degree < 0:
            raise ExteriorError(f"negative degree {degree}")
        self.n = n
        self.degree = degree
        clean: dict[Index, CoeffElem] = {}
        for index, coeff in (components or {}).items():
            index = tuple(index)
            if len(index) != degree:
                raise ExteriorError(f"index {index} in a {degree}-form")
            if any(not 0 <= i <= 2 * n for i in index):
                raise ExteriorError(f"basis index out of range in {index} for n={n}")
            sign, key = _sort_with_sign(index)
            if key is not None:
                _accumulate(clean, key, as_coeff(n, coeff) * sign)
        self._components = clean

    @classmethod
    def _trusted(cls, n: int, degree: int, components: dict[Index, CoeffElem]) -> DifferentialForm:
        obj = object.__new__(cls)
        obj.n = n
        obj.degree = degree
        obj._components = components
        return obj

    @classmethod
    def zero(cls, n: int, degree: int) -> DifferentialForm:
        return cls._trusted(n, degree, {})

    @classmethod
    def function(cls, value: CoeffElem) -> DifferentialForm:
        """The 0-form ``value``."""
        return cls._trusted(value.n, 0, {(): value} if value else {})

    @classmethod
    def basis(cls, n: int, index: int) -> DifferentialForm:
        return cls(n, 1, {(index,): 1})

    @classmethod
    def dt(cls, n: int) -> DifferentialForm:
        return cls.basis(n, 0)

    @classmethod
    def dz(cls, n: int, j: int) -> DifferentialForm:
        """``dz_j`` for 1-based j."""
        return cls.basis(n, j)

    @classmethod
    def dzb(cls, n: int, j: int) -> DifferentialForm:
        return cls.basis(n, n + j)

    @property
    def components(self) -> Mapping[Index, CoeffElem]:
        return dict(self._components)

    def __getitem__(self, index: Sequence[int]) -> CoeffElem:
        sign, key = _sort_with_sign(tuple(index))
        if key is None:
            return CoeffElem.zero(self.n)
        return self._components.get(key, CoeffElem.zero(self.n)) * sign

    def __bool__(self) -> bool:
        return bool(self._components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return (
            self.n == other.n
            and (self.degree == other.degree or not (self or other))
            and self._components == other._components
        )

    def __hash__(self) -> int:
        return hash((self.n, self.degree, frozenset(self._components.items())))

    def __repr__(self) -> str:
        return f"DifferentialForm({self.n}, {self.degree}, {self})"

    def __str__(self) -> str:
        if not self._components:
            return "0"
        names = basis_names(self.n)
        parts = []
        for index in sorted(self._components):
            wedge = "^".join(names[i] for i in index)
            coeff = str(self._components[index])
            parts.append(f"({coeff})*{wedge}" if wedge else f"({coeff})")
        return " + ".join(parts)

    def _check(self, other: DifferentialForm) -> None:
        if other.n != self.n:
            raise DimensionMismatchError(f"forms over arity {self.n} and {other.n}")

    def __add__(self, other: Any) -> DifferentialForm:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        self._check(other)
        if not other:
            return self
        if not self:
            return other
        if other.degree != self.degree:
            raise ExteriorError(f"adding a {self.degree}-form and a {other.degree}-form")
        components = dict(self._components)
        for key, coeff in other._components.items():
            _accumulate(components, key, coeff)
        return DifferentialForm._trusted(self.n, self.degree, components)

    def __neg__(self) -> DifferentialForm:
        return DifferentialForm._trusted(
            self.n, self.degree, {k: -c for k, c in self._components.items()}
        )

    def __sub__(self, other: Any) -> DifferentialForm:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor: Any) -> DifferentialForm:
        if isinstance(factor, DifferentialForm):
            return NotImplemented
        factor = as_coeff(self.n, factor)
        if not factor:
            return DifferentialForm.zero(self.n, self.degree)
        components = {}
        for key, coeff in self._components.items():
            product = coeff * factor
            if product:
                components[key] = product
        return DifferentialForm._trusted(self.n, self.degree, components)

    __rmul__ = __mul__

    def __xor__(self, other: Any) -> DifferentialForm:
        if not isinstance(other, DifferentialForm):
            return NotImplemented
        return self.wedge(other)

    def terms(self) -> list[tuple[Index, CoeffElem]]:
        return sorted(self._components.items())

    def max_coefficient_degree(self) -> int:
        return max((c.degree() for c in self._components.values()), default=0)

    def wedge(self, other: DifferentialForm) -> DifferentialForm:
        """Exterior product, graded-commutative and associative."""
        self._check(other)
        components: dict[Index, CoeffElem] = {}
        for i1, c1 in self._components.items():
            for i2, c2 in other._components.items():
                sign, key = _sort_with_sign(i1 + i2)
                if key is not None:
                    _accumulate(components, key, c1 * c2 * sign)
        return DifferentialForm._trusted(self.n, self.degree + other.degree, components)

    def d(self, context: ExpContext | None = None) -> DifferentialForm:
        """Exterior derivative.

        ``context`` supplies dUpsilon for coefficients carrying the grade E.
        """
        components: dict[Index, CoeffElem] = {}
        for index, coeff in self._components.items():
            for var in range(2 * self.n + 1):
                if var in index:
                    continue
                partial = coeff.derivative(var, context)
                if not partial:
                    continue
                ## dx_var ^ dx_I: move dx_var past the smaller indices of I
                position = sum(1 for i in index if i < var)
                sign = -1 if position % 2 else 1
                key = index[:position] + (var,) + index[position:]
                _accumulate(components, key, partial * sign)
        return DifferentialForm._trusted(self.n, self.degree + 1, components)

    def contract(self, field: VectorField) -> DifferentialForm:
        """Interior product ``i_X`` (contracts the first slot).

        Raises:
            ExteriorError: for 0-forms.
        """
        if field.n != self.n:
            raise DimensionMismatchError(f"field over arity {field.n}, form over {self.n}")
        if self.degree == 0:
            raise ExteriorError("cannot contract a 0-form")
        components: dict[Index, CoeffElem] = {}
        for index, coeff in self._components.items():
            for position, basis_index in enumerate(index):
                value = field[basis_index]
                if not value:
                    continue
                sign = -1 if position % 2 else 1
                key = index[:position] + index[position + 1 :]
                _accumulate(components, key, coeff * value * sign)
        return DifferentialForm._trusted(self.n, self.degree - 1, components)

    def evaluate(self, *fields: VectorField) -> CoeffElem:
        """``omega(X_1, ..., X_k)`` for a k-form.

        Raises:
            ExteriorError: when the number of fields differs from the degree.
        """
        if len(fields) != self.degree:
            raise ExteriorError(f"evaluating a {self.degree}-form on {len(fields)} fields")
        form = self
        for field in fields:
            form = form.contract(field)
        return form.scalar()

    def scalar(self) -> CoeffElem:
        """The coefficient of a 0-form."""
        if self.degree != 0 and self._components:
            raise ExteriorError(f"{self.degree}-form is not a function")
        return self._components.get((), CoeffElem.zero(self.n))

    def conj(self) -> DifferentialForm:
        components: dict[Index, CoeffElem] = {}
        for index, coeff in self._components.items():
            sign, key = _sort_with_sign([_conj_index(self.n, i) for i in index])
            _accumulate(components, key, coeff.conj() * sign)
        return DifferentialForm._trusted(self.n, self.degree, components)

    def is_real(self) -> bool:
        return self.conj() == self

    def pullback(self, action: DiagonalAction) -> DifferentialForm:
        """Pullback along a weighted diagonal map; dx_k picks up its weight."""
        if action.n != self.n:
            raise DimensionMismatchError(f"action over arity {action.n}, form over {self.n}")
        components: dict[Index, CoeffElem] = {}
        for index, coeff in self._components.items():
            factor = coeff.scale(action.weights)
            for basis_index in index:
                factor = factor * action.unit(basis_index)
            components[index] = factor
        return DifferentialForm._trusted(self.n, self.degree, components)

    def lie_derivative(
        self, field: VectorField, context: ExpContext | None = None
    ) -> DifferentialForm:
        """Cartan's formula ``L_X = d i_X + i_X d``."""
        if self.degree == 0:
            return DifferentialForm.function(field.apply(self.scalar(), context))
        return self.contract(field).d(context) + self.d(context).contract(field)

    def to_json(self) -> dict:
        names = basis_names(self.n)
        return {
            "degree": self.degree,
            "terms": [
                {"index": [names[i] for i in index], "coeff": str(coeff)}
                for index, coeff in self.terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping, n: int) -> DifferentialForm:
        names = basis_names(n)
        components = {
            tuple(names.index(name) for name in term["index"]): parse_expr(term["coeff"], n)
            for term in data["terms"]
        }
        return cls(n, int(data["degree"]), components)


class VectorField:
    """A derivation ``sum X^k d/dx_k`` with CoeffElem components."""

    __slots__ = ("n", "_components")

    def __init__(self, n: int, components: Mapping[int, CoeffElem | Any] | None = None) -> None:
        self.n = n
        clean: dict[int, CoeffElem] = {}
        for index, coeff in (components or {}).items():
            if not 0 <= index <= 2 * n:
                raise ExteriorError(f"derivation index {index} out of range for n={n}")
            coeff = as_coeff(n, coeff)
            if coeff:
                clean[index] = coeff
        self._components = clean

    @classmethod
    def zero(cls, n: int) -> VectorField:
        return cls(n)

    @classmethod
    def coordinate(cls, n: int, index: int) -> VectorField:
        return cls(n, {index: 1})

    def __getitem__(self, index: int) -> CoeffElem:
        return self._components.get(index, CoeffElem.zero(self.n))

    @property
    def components(self) -> Mapping[int, CoeffElem]:
        return dict(self._components)

    def __bool__(self) -> bool:
        return bool(self._components)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self.n == other.n and self._components == other._components

    def __hash__(self) -> int:
        return hash((self.n, frozenset(self._components.items())))

    def __repr__(self) -> str:
        return f"VectorField({self.n}, {self})"

    def __str__(self) -> str:
        if not self._components:
            return "0"
        names = (
            ["d/dt"]
            + [f"d/dz{j}" for j in range(1, self.n + 1)]
            + [f"d/dzb{j}" for j in range(1, self.n + 1)]
        )
        return " + ".join(f"({self._components[k]})*{names[k]}" for k in sorted(self._components))

    def __add__(self, other: Any) -> VectorField:
        if not isinstance(other, VectorField):
            return NotImplemented
        if other.n != self.n:
            raise DimensionMismatchError(f"fields over arity {self.n} and {other.n}")
        keys = set(self._components) | set(other._components)
        return VectorField(self.n, {k: self[k] + other[k] for k in keys})

    def __neg__(self) -> VectorField:
        return VectorField(self.n, {k: -c for k, c in self._components.items()})

    def __sub__(self, other: Any) -> VectorField:
        if not isinstance(other, VectorField):
            return NotImplemented
        return self + (-other)

    def __mul__(self, factor: Any) -> VectorField:
        if isinstance(factor, VectorField):
            return NotImplemented
        factor = as_coeff(self.n, factor)
        return VectorField(self.n, {k: c * factor for k, c in self._components.items()})

    __rmul__ = __mul__

    def apply(self, function: CoeffElem, context: ExpContext | None = None) -> CoeffElem:
        """``X(f)``."""
        if function.n != self.n:
            raise DimensionMismatchError(f"field over arity {self.n}, function over {function.n}")
        result = CoeffElem.zero(self.n)
        for index, coeff in self._components.items():
            partial = function.derivative(index, context)
            if partial:
                result = result + coeff * partial
        return result

    def bracket(self, other: VectorField, context: ExpContext | None = None) -> VectorField:
        """Lie bracket ``[X, Y]^k = X(Y^k) - Y(X^k)``."""
        if other.n != self.n:
            raise DimensionMismatchError(f"fields over arity {self.n} and {other.n}")
        keys = set(self._components) | set(other._components)
        return VectorField(
            self.n,
            {k: self.apply(other[k], context) - other.apply(self[k], context) for k in keys},
        )

    def conj(self) -> VectorField:
        return VectorField(
            self.n, {_conj_index(self.n, k): c.conj() for k, c in self._components.items()}
        )

    def is_type_10(self) -> bool:
        """True when every d/dzb component vanishes (the d/dt part is free)."""
        return all(k <= self.n for k in self._components)


@dataclass(frozen=True)
class DiagonalAction:
    """A weighted diagonal scaling ``x -> s^k a^l x`` of R x C^n.

    ``weights`` holds one ``(k, l)`` pair for t, z_1, ..., z_n; conjugate
    coordinates share the weight of z_j.  With ``s = e^beta`` and
    ``a = e^alpha`` this is the linear action Gamma_{alpha,beta}.
    """

    n: int
    weights: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        weights = tuple((int(ks), int(ka)) for ks, ka in self.weights)
        if len(weights) != self.n + 1:
            raise DimensionMismatchError(f"{len(weights)} weights for arity {self.n}")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def identity(cls, n: int) -> DiagonalAction:
        return cls(n, ((0, 0),) * (n + 1))

    def weight(self, basis_index: int) -> tuple[int, int]:
        """Weight of the coordinate behind a basis index (dzb_j shares dz_j's)."""
        return self.weights[basis_index if basis_index <= self.n else basis_index - self.n]

    def unit(self, basis_index: int) -> CoeffElem:
        ks, ka = self.weight(basis_index)
        return CoeffElem.monomial(self.n, 1, s=ks, a=ka)

    def compose(self, other: DiagonalAction) -> DiagonalAction:
        """``self o other``; diagonal actions commute, weights add."""
        if other.n != self.n:
            raise DimensionMismatchError(f"actions over arity {self.n} and {other.n}")
        return DiagonalAction(
            self.n, tuple(
                (s1 + s2, a1 + a2) for (s1, a1), (s2, a2) in zip(self.weights, other.weights)
            )
        )

    def pullback(self, form: DifferentialForm) -> DifferentialForm:
        return form.pullback(self)

    def apply_coeff(self, value: CoeffElem) -> CoeffElem:
        return value.scale(self.weights)

    def generator(self, direction: str = "beta") -> VectorField:
        """Generator of ``tau -> Gamma`` with s = e^{-tau} (``"beta"``) or a = e^{-tau}
        (``"alpha"``): ``X = -sum k x d/dx`` over t, z_j and zb_j."""
        slot = {"beta": 0, "alpha": 1}[direction]
        components: dict[int, CoeffElem] = {}
        for index in range(2 * self.n + 1):
            k = self.weight(index)[slot]
            if k:
                components[index] = CoeffElem.variable(self.n, index) * (-k)
        return VectorField(self.n, components)

    def scale_factors(self, alpha: float, beta: float) -> list[float]:
        """Numeric factors ``e^{k beta + l alpha}`` for t, z_1, ..., z_n."""
        return [math.exp(ks * beta + ka * alpha) for ks, ka in self.weights]

    def to_json(self) -> dict:
        names = ["t"] + [f"z{j}" for j in range(1, self.n + 1)]
        return {name: {"s": ks, "a": ka} for name, (ks, ka) in zip(names, self.weights)}


def wedge(left: DifferentialForm, right: DifferentialForm) -> DifferentialForm:
    return left.wedge(right)


def exterior_derivative(
    form: DifferentialForm, context: ExpContext | None = None
) -> DifferentialForm:
    return form.d(context)


def contract(field: VectorField, form: DifferentialForm) -> DifferentialForm:
    return form.contract(field)


def evaluate(form: DifferentialForm, *fields: VectorField) -> CoeffElem:
    return form.evaluate(*fields)


def lie_bracket(
    left: VectorField, right: VectorField, context: ExpContext | None = None
) -> VectorField:
    return left.bracket(right, context)


def lie_derivative(
    field: VectorField, form: DifferentialForm, context: ExpContext | None = None
) -> DifferentialForm:
    return form.lie_derivative(field, context)


def pullback(action: DiagonalAction, form: DifferentialForm) -> DifferentialForm:
    return form.pullback(action)


def sum_forms(forms: Iterable[DifferentialForm], n: int, degree: int) -> DifferentialForm:
    total = DifferentialForm.zero(n, degree)
    for form in forms:
        total = total + form
    return total
