"""Pseudohermitian curvature, Ricci and Chern tensors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from sympy import QQ

from .algebra import CoeffElem, gaussian
from .exterior import DifferentialForm
from .pseudohermitian import Connection, PHStructure, StructureError

Tensor = tuple[tuple[tuple[tuple[CoeffElem, ...], ...], ...], ...]
Matrix = tuple[tuple[CoeffElem, ...], ...]


class TorsionUnsupportedError(StructureError):
    """Curvature extraction is only supported for torsion-free connections."""

    pass


class UnexpectedCurvatureTermsError(StructureError):
    """The curvature forms have parts outside theta^r ^ theta^s~."""

    pass


def _tensor(n: int, entry: object) -> Tensor:
    return tuple(
        tuple(
            tuple(tuple(entry(a, b, r, s) for s in range(n)) for r in range(n))  # type: ignore[operator]
            for b in range(n)
        )
        for a in range(n)
    )


@dataclass(frozen=True)
class CurvatureData:
    """Curvature of a Tanaka-Webster connection.

    ``components[a][b][r][s]`` is ``R_a^b_{r s~}``; ``ricci[r][s]`` is
    ``R_{r s~} = R_c^c_{r s~}``; ``scalar`` is ``h^{r s~} R_{r s~}`` (no 1/n
    factor); ``chern`` has the index layout of ``components``.
    """

    forms: tuple[tuple[DifferentialForm, ...], ...]
    components: Tensor
    lowered: Tensor
    ricci: Matrix
    scalar: CoeffElem
    chern: Tensor
    chern_lowered: Tensor

    @property
    def n(self) -> int:
        return len(self.components)

    def nonzero_components(self, tensor: Tensor | None = None) -> list[tuple[tuple[int, int, int, int], CoeffElem]]:
        tensor = self.components if tensor is None else tensor
        n = self.n
        return [
            ((a, b, r, s), tensor[a][b][r][s])
            for a, b, r, s in product(range(n), repeat=4)
            if tensor[a][b][r][s]
        ]

    def is_flat(self) -> bool:
        return not self.nonzero_components(self.chern)

    def is_ricci_flat(self) -> bool:
        return not any(entry for row in self.ricci for entry in row)

    def is_pseudo_einstein(self, structure: PHStructure) -> bool:
        """True when the Ricci tensor is a multiple of the Levi form."""
        n = self.n
        pairs = list(product(range(n), repeat=2))
        return all(
            self.ricci[a][b] * structure.levi[c][d] == self.ricci[c][d] * structure.levi[a][b]
            for a, b in pairs
            for c, d in pairs
        )

    def chern_traces(self, structure: PHStructure) -> dict[str, Matrix]:
        """The four h-traces of the lowered Chern tensor ``S_{a b~ r s~}``.

        Keys name the contracted slot pair.
        """
        n = self.n
        inv = structure.levi_inv
        low = self.chern_lowered

        def trace(pick: object) -> Matrix:
            return tuple(
                tuple(
                    _sum(
                        n,
                        (inv[x][y] * pick(x, y, i, j) for x in range(n) for y in range(n)),  # type: ignore[operator]
                    )
                    for j in range(n)
                )
                for i in range(n)
            )

        return {
            "a,b": trace(lambda x, y, i, j: low[x][y][i][j]),
            "r,s": trace(lambda x, y, i, j: low[i][j][x][y]),
            "a,s": trace(lambda x, y, i, j: low[x][j][i][y]),
            "r,b": trace(lambda x, y, i, j: low[i][y][x][j]),
        }

    def to_json(self) -> dict:
        def entries(tensor: Tensor) -> dict[str, str]:
            return {
                f"{a + 1},{b + 1},{r + 1},{s + 1}": str(value)
                for (a, b, r, s), value in self.nonzero_components(tensor)
            }

        return {
            "curvature": entries(self.components),
            "ricci": [[str(entry) for entry in row] for row in self.ricci],
            "scalar": str(self.scalar),
            "chern": entries(self.chern),
        }


def _sum(n: int, values: object) -> CoeffElem:
    total = CoeffElem.zero(n)
    for value in values:  # type: ignore[attr-defined]
        if value:
            total = total + value
    return total


def curvature(
    structure: PHStructure, connection: Connection, *, allow_torsion: bool = False
) -> CurvatureData:
    """Curvature, Ricci, scalar and Chern tensors of a Tanaka-Webster connection.

    For a torsion-free connection ``Omega_a^b = d omega_a^b - omega_a^c ^ omega_c^b``
    must equal ``R_a^b_{r s~} theta^r ^ theta^s~`` exactly.  With
    ``allow_torsion`` the components are still read off as
    ``Omega_a^b(Z_r, Zb_s)``, since the torsion terms of Omega have no
    ``theta^r ^ theta^s~`` part, but the rest of Omega is not checked.

    Raises:
        TorsionUnsupportedError: if the torsion is nonzero and not allowed.
        UnexpectedCurvatureTermsError: if a torsion-free Omega has other components.
    """
    torsion_free = connection.is_torsion_free()
    if not torsion_free and not allow_torsion:
        raise TorsionUnsupportedError("torsion-full curvature unsupported")
    n = structure.n
    omega = connection.omega
    context = structure.context
    forms = tuple(
        tuple(
            omega[a][b].d(context)
            - _sum_forms(n, (omega[a][c].wedge(omega[c][b]) for c in range(n)))
            for b in range(n)
        )
        for a in range(n)
    )
    frame, conj_frame = structure.frame, structure.conj_frame
    components = _tensor(n, lambda a, b, r, s: forms[a][b].evaluate(frame[r], conj_frame[s]))

    checked = product(range(n), repeat=2) if torsion_free else ()
    for a, b in checked:
        rebuilt = _sum_forms(
            n,
            (
                structure.coframe[r].wedge(structure.conj_coframe[s]) * components[a][b][r][s]
                for r in range(n)
                for s in range(n)
                if components[a][b][r][s]
            ),
            degree=2,
        )
        if forms[a][b] != rebuilt:
            raise UnexpectedCurvatureTermsError(
                f"unexpected curvature terms in Omega_{a + 1}^{b + 1}: {forms[a][b] - rebuilt}"
            )

    levi, levi_inv = structure.levi, structure.levi_inv
    lowered = _tensor(
        n, lambda a, b, r, s: _sum(n, (components[a][c][r][s] * levi[c][b] for c in range(n)))
    )
    ricci = tuple(
        tuple(_sum(n, (components[c][c][r][s] for c in range(n))) for s in range(n))
        for r in range(n)
    )
    scalar = _sum(n, (levi_inv[r][s] * ricci[r][s] for r in range(n) for s in range(n)))

    first = gaussian(QQ(1, n + 2))
    second = gaussian(QQ(1, (n + 1) * (n + 2)))

    def chern_low(a: int, b: int, r: int, s: int) -> CoeffElem:
        ricci_part = (
            ricci[a][b] * levi[r][s]
            + ricci[r][b] * levi[a][s]
            + ricci[a][s] * levi[r][b]
            + ricci[r][s] * levi[a][b]
        )
        scalar_part = scalar * (levi[a][b] * levi[r][s] + levi[a][s] * levi[r][b])
        return lowered[a][b][r][s] - ricci_part * first + scalar_part * second

    chern_lowered = _tensor(n, chern_low)
    chern = _tensor(
        n,
        lambda a, b, r, s: _sum(
            n, (chern_lowered[a][c][r][s] * levi_inv[b][c] for c in range(n))
        ),
    )
    return CurvatureData(
        forms=forms,
        components=components,
        lowered=lowered,
        ricci=ricci,
        scalar=scalar,
        chern=chern,
        chern_lowered=chern_lowered,
    )


def _sum_forms(n: int, forms: object, degree: int = 2) -> DifferentialForm:
    total = DifferentialForm.zero(n, degree)
    for form in forms:  # type: ignore[attr-defined]
        total = total + form
    return total


def chern_image(curv: CurvatureData, structure: PHStructure | None = None) -> tuple[int, ...]:
    """Frame directions spanning the image of the Chern map.

    ``(U, V, W) -> S_a^b_{r s~} U^a V^r W^s~ Z_b`` ranges over the span of the
    ``Z_b`` whose row has a nonzero component.  Returns 0-based indices.
    """
    n = curv.n
    if structure is not None and structure.n != n:
        raise StructureError(f"curvature of size {n} for arity {structure.n}")
    return tuple(
        b
        for b in range(n)
        if any(curv.chern[a][b][r][s] for a, r, s in product(range(n), repeat=3))
    )


def image_labels(indices: tuple[int, ...]) -> list[str]:
    """``(1,)`` -> ``["Z2"]``."""
    return [f"Z{b + 1}" for b in indices]
