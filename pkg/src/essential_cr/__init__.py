"""essential-cr: exact computations on mixed-signature CR manifolds.

This package builds the pseudohermitian invariants of the essential-flow
hypersurfaces (Tanaka-Webster connection, curvature, Chern tensor), checks
the homothety and rescaling identities exactly, and runs the numeric side:
complex null geodesics, projective parameters and the attractor of the flow.
"""

from __future__ import annotations

from .algebra import CoeffElem, ExpContext, gaussian, parse_expr, print_expr
from .curvature import CurvatureData, chern_image, curvature
from .examples import BuiltExample, ExampleSpec, build_example, build_lorentzian
from .exterior import DiagonalAction, DifferentialForm, VectorField
from .pseudohermitian import (
    Connection,
    PHStructure,
    complete_structure,
    contact_from_defining,
    solve_connection,
)
from .report import CheckStatus, VerificationReport
from .rescale import rescale

__all__ = [
    "BuiltExample",
    "CheckStatus",
    "CoeffElem",
    "Connection",
    "CurvatureData",
    "DiagonalAction",
    "DifferentialForm",
    "ExampleSpec",
    "ExpContext",
    "PHStructure",
    "VectorField",
    "VerificationReport",
    "build_example",
    "build_lorentzian",
    "chern_image",
    "complete_structure",
    "contact_from_defining",
    "curvature",
    "gaussian",
    "parse_expr",
    "print_expr",
    "rescale",
    "solve_connection",
]

# Version is set by hatch-vcs at build time (written to _version.py)
try:
    from importlib.metadata import version

    __version__ = version("essential-cr")
except Exception:
    __version__ = "unknown"
