"""Command-line surface: ``essential-cr verify|invariants|flow|geodesic|schwarzian``.

Exit codes: 0 pass, 2 failed check, 64 usage, 65 parse/data, 70 internal.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from typing import Any

import numpy as np
import sympy as sp

from . import __version__
from .algebra import CoeffElem, ParseError, parse_expr
from .curvature import image_labels
from .dynamics import (
    EmptyRunError,
    QuotientSpec,
    attractor_report,
    commutation_defect,
    contact_volume_rate,
    sample_seeds,
    verify_action_invariants,
)
from .examples import (
    DEFAULT_ALPHA,
    DEFAULT_BETA,
    BuiltExample,
    ExampleError,
    build_spec,
    spec_from_label,
)
from .geodesics import (
    GeodesicError,
    QuotientParameterError,
    SchwarzianODE,
    Verdict,
    equivalence_test,
    holomorphic_derivative_check,
    integrate_null_geodesic,
    leaf_curve,
    projective_consistency,
    projective_parameter_rhs,
    quotient_projective_invariant,
    solve_schwarzian_ode,
    verify_leaf_geodesic,
)
from .report import SCHEMA_VERSION, Check, Tolerances, VerificationReport
from .rescale import rescale
from .schwarzian import (
    ConstantMapError,
    MapParseError,
    NotRationalMapError,
    parse_map,
    schwarzian_chain_rule_check,
    schwarzian_exact,
    schwarzian_wrt,
)

EXIT_OK = 0
EXIT_FAILED = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_INTERNAL = 70

FAMILY = ("2,2", "2,3", "3,3", "lorentzian:2", "lorentzian:3")
LEAF_INDEX = 1
INVARIANT_TARGETS = ("connection", "curvature", "ricci", "chern", "levi")


class UsageError(Exception):
    """Bad command-line usage."""

    pass


class DataError(Exception):
    """Malformed data in an argument (points, vectors)."""

    pass


class _Parser(argparse.ArgumentParser):
    """An ArgumentParser that raises instead of exiting with status 2."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _complex_list(text: str) -> list[complex]:
    try:
        return [complex(item.strip().replace("i", "j")) for item in text.split(",")]
    except ValueError as exc:
        raise DataError(f"cannot parse {text!r} as a list of complex numbers") from exc


def _rational(text: str) -> sp.Rational:
    try:
        value = sp.Rational(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    return value


@contextmanager
def _timed(report: VerificationReport) -> Iterator[list[Check]]:
    """Collect checks; each gets the runtime of the whole block."""
    checks: list[Check] = []
    start = time.perf_counter()
    yield checks
    elapsed = (time.perf_counter() - start) * 1000
    for check in checks:
        check.runtime_ms = elapsed
    report.extend(checks)


def _leaf_restriction(value: CoeffElem, n: int) -> CoeffElem:
    vanishing = ["t"] + [
        name for j in range(1, n + 1) if j != LEAF_INDEX + 1 for name in (f"z{j}", f"zb{j}")
    ]
    return value.restrict(vanishing)


def _structure_checks(built: BuiltExample) -> list[Check]:
    structure, connection = built.structure, built.connection
    n = structure.n
    zb1 = CoeffElem.variable(n, "zb1")
    expected = structure.coframe[0] * (zb1 * 4)
    others = [form for a, b, form in connection.nonzero_forms() if (a, b) != (0, 1)]
    return [
        Check.exact(
            "omega_1^2 = 4*zb1*theta1",
            connection.omega[0][1] - expected,
            "only nonvanishing connection form",
        ),
        Check.exact("other connection forms vanish", others[0] if others else 0),
        Check.condition(
            "torsion vanishes", connection.is_torsion_free(), anchor="torsion-free contact form"
        ),
    ]


def _curvature_checks(built: BuiltExample) -> list[Check]:
    curv = built.curvature
    leading = curv.components[0][1][0][0]
    others = [value for index, value in curv.nonzero_components() if index != (0, 1, 0, 0)]
    image = built.chern_image
    return [
        Check.exact("R_1^2_{11bar} == -4", leading + 4, "curvature"),
        Check.exact("other curvature components vanish", others[0] if others else 0),
        Check.condition("Ricci vanishes", curv.is_ricci_flat(), anchor="pseudo-Einstein"),
        Check.condition("Chern tensor equals curvature", curv.chern == curv.components),
        Check.condition("Chern tensor is nonzero", not curv.is_flat(), anchor="not locally flat"),
        Check.condition(
            "Chern image = span{Z2}",
            image == (LEAF_INDEX,),
            f"span{{{', '.join(image_labels(image))}}}",
        ),
    ]


def _action_checks(built: BuiltExample) -> list[Check]:
    spec = built.spec
    checks = list(verify_action_invariants(spec).checks)
    rate = contact_volume_rate(spec)
    checks.append(
        Check.condition(
            f"contact volume rate = {-spec.homothety_weight * (spec.n + 1)}",
            rate == -spec.homothety_weight * (spec.n + 1),
            str(rate),
            "L_X vol = c vol",
        )
    )
    return checks


def _leaf_checks(built: BuiltExample, tolerances: Tolerances) -> list[Check]:
    structure, connection = built.structure, built.connection
    n = structure.n
    tangent = leaf_curve(structure, LEAF_INDEX)
    leaf = verify_leaf_geodesic(structure, connection, tangent)
    checks = [
        Check.condition(
            "Z2 generates complex null geodesics", leaf.passed, ", ".join(leaf.failed()), "leaf"
        ),
        Check.exact("nabla_Z2 Z2 = 0 (u = 0)", leaf.u if leaf.u is not None else "unknown"),
    ]
    q = _leaf_restriction(projective_parameter_rhs(structure, connection, tangent), n)
    checks.append(Check.exact("{p, z2} = 0 along the leaf", q, "projective parameter"))

    ode = SchwarzianODE(potential=lambda x: np.zeros_like(np.asarray(x, dtype=complex)))
    solution = solve_schwarzian_ode(ode, [1.0, 1.0 + 1.0j], step=1e-2)
    mobius_error = float(np.max(np.abs(solution.p - solution.z)))
    checks.append(
        Check.numeric(
            "projective parameter is Mobius in z2", mobius_error, tolerances.schwarzian_ode
        )
    )

    origin = np.zeros(n, dtype=complex)
    origin[LEAF_INDEX] = 1.0
    direction = np.zeros(n, dtype=complex)
    direction[LEAF_INDEX] = 1.0
    try:
        curve = integrate_null_geodesic(
            structure,
            connection,
            (0.0, origin),
            direction,
            steps=20,
            defining=built.spec.defining,
        )
    except GeodesicError as exc:
        checks.append(Check.condition("numeric geodesic stays on the leaf", False, str(exc)))
        return checks
    checks.append(
        Check.numeric(
            "numeric geodesic stays on the leaf",
            curve.leaf_deviation(LEAF_INDEX, origin),
            tolerances.leaf_deviation,
        )
    )
    return checks


def _quotient_checks(built: BuiltExample, seed: int) -> list[Check]:
    spec = built.spec
    invariant = quotient_projective_invariant(spec.beta, spec.action.weights[LEAF_INDEX + 1][0])
    checks = [
        Check.condition(
            f"leaf quotient multiplier exponent = {invariant.exponent}",
            equivalence_test(spec.beta, spec.beta) == Verdict.EQUIVALENT,
            anchor="projective invariant of the closed leaf",
        )
    ]
    quotient = QuotientSpec.from_example(spec)
    if quotient.window_index is None:
        return checks
    rng = np.random.default_rng(seed)
    defect = max(commutation_defect(state, quotient, 3.0) for state in sample_seeds(quotient, 8, rng))
    checks.append(Check.numeric("normalize o phi = phi o normalize", defect, 1e-12))
    return checks


def _rescale_checks(built: BuiltExample, upsilon: CoeffElem, tolerances: Tolerances) -> list[Check]:
    structure, connection = built.structure, built.connection
    rescaled, rescaled_connection, report = rescale(structure, connection, upsilon)
    tangent = leaf_curve(structure, LEAF_INDEX)
    checks = [
        Check.condition("direct solve = Lee transform", report.lee_matches_direct, anchor="Lee"),
        Check.condition("torsion transformation law", report.torsion_law_holds),
        Check.condition("covariant derivative laws", report.covariant_laws_hold),
        Check.condition("Levi form scales by e^Upsilon", report.levi_scaled),
        Check.condition("frame unchanged", report.frame_unchanged),
        Check.condition(
            "Chern image unchanged", report.chern_image == built.chern_image, str(report.chern_image)
        ),
    ]
    leaf = verify_leaf_geodesic(rescaled, rescaled_connection, tangent)
    slope = structure.apply(tangent, upsilon)
    checks.append(
        Check.condition("rescaled leaf is a null geodesic", leaf.passed, ", ".join(leaf.failed()))
    )
    checks.append(
        Check.exact(
            "rescaled leaf: u = 2 Upsilon'",
            (leaf.u - slope * 2) if leaf.u is not None else "unknown",
        )
    )
    holomorphy = holomorphic_derivative_check(structure, connection, upsilon, tangent)
    checks.append(
        Check.exact("Upsilon' holomorphic along the leaf", holomorphy.antiholomorphic_derivative)
    )
    try:
        consistency = projective_consistency(
            structure, connection, rescaled, rescaled_connection, upsilon, LEAF_INDEX
        )
        checks.append(
            Check.numeric(
                "{p^, p} = 0 on the leaf", consistency.max_abs, tolerances.cross_schwarzian,
                "projective parameterizations agree",
            )
        )
    except GeodesicError as exc:
        checks.append(Check.condition("{p^, p} = 0 on the leaf", False, str(exc)))
    return checks


def verify_example(
    label: str,
    upsilon: CoeffElem | str | None = None,
    seed: int = 0,
    tolerances: Tolerances | None = None,
) -> VerificationReport:
    """Build an example and run every check on it.

    With ``upsilon`` the rescaling checks for ``e^Upsilon theta`` are added.
    """
    tolerances = tolerances or Tolerances()
    spec = spec_from_label(label)
    if isinstance(upsilon, str):
        upsilon = parse_expr(upsilon, spec.n)
    report = VerificationReport(subject=spec.label, params=spec.to_json())
    with _timed(report) as checks:
        built = build_spec(spec)
        checks.append(Check.condition("build and self-check", True))
    with _timed(report) as checks:
        checks.extend(_structure_checks(built))
    with _timed(report) as checks:
        checks.extend(_curvature_checks(built))
    with _timed(report) as checks:
        checks.extend(_action_checks(built))
    with _timed(report) as checks:
        checks.extend(_leaf_checks(built, tolerances))
    with _timed(report) as checks:
        checks.extend(_quotient_checks(built, seed))
    if upsilon is not None:
        report.params["upsilon"] = str(upsilon)
        with _timed(report) as checks:
            checks.extend(_rescale_checks(built, upsilon, tolerances))
    return report


def _emit(args: argparse.Namespace, payload: Any, text: str) -> None:
    if args.emit == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def cmd_verify(args: argparse.Namespace) -> int:
    labels = list(FAMILY) if args.all else [args.signature]
    upsilon = args.upsilon if args.rescale else None
    reports = [verify_example(label, upsilon, args.seed) for label in labels]
    passed = all(report.passed for report in reports)
    if args.emit == "json":
        if len(reports) == 1:
            print(reports[0].dumps(args.timings))
        else:
            payload = {
                "schema": SCHEMA_VERSION,
                "overall": "pass" if passed else "fail",
                "reports": [report.to_json(args.timings) for report in reports],
            }
            print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n\n".join(report.to_text(args.timings) for report in reports))
    return EXIT_OK if passed else EXIT_FAILED


def _invariant_lines(built: BuiltExample, target: str) -> tuple[list[str], Any]:
    structure, connection, curv = built.structure, built.connection, built.curvature
    n = structure.n
    if target == "connection":
        lines = [
            f"omega[{a + 1}][{b + 1}] = {structure.format_in_coframe(form)}"
            for a, b, form in connection.nonzero_forms()
        ]
        lines += [
            f"A[{a + 1}][{b + 1}] = {connection.torsion[a][b]}"
            for a in range(n)
            for b in range(n)
            if connection.torsion[a][b]
        ]
        return lines or ["omega = 0"], connection.to_json(structure)
    if target == "levi":
        lines = [
            f"h[{a + 1}][{b + 1}] = {structure.levi[a][b]}"
            for a in range(n)
            for b in range(n)
            if structure.levi[a][b]
        ]
        return lines, [[str(entry) for entry in row] for row in structure.levi]
    if target == "ricci":
        lines = [" ".join(str(entry) for entry in row) for row in curv.ricci]
        return lines, [[str(entry) for entry in row] for row in curv.ricci]
    tensor = curv.components if target == "curvature" else curv.chern
    lines = [
        f"{'R' if target == 'curvature' else 'S'}[{a + 1}][{b + 1}][{r + 1}][{s + 1}] = {value}"
        for (a, b, r, s), value in curv.nonzero_components(tensor)
    ]
    payload = {
        f"{a + 1},{b + 1},{r + 1},{s + 1}": str(value)
        for (a, b, r, s), value in curv.nonzero_components(tensor)
    }
    if target == "chern":
        labels = image_labels(built.chern_image)
        lines.append(f"image = span{{{', '.join(labels)}}}")
        payload = {"components": payload, "image": labels}
    return lines, payload


def cmd_invariants(args: argparse.Namespace) -> int:
    built = build_spec(spec_from_label(args.example))
    payload: dict[str, Any] = {"schema": SCHEMA_VERSION, "example": built.spec.label}
    lines: list[str] = []
    for target in args.targets:
        target_lines, target_payload = _invariant_lines(built, target)
        payload[target] = target_payload
        lines.append(f"# {target}")
        lines.extend(target_lines)
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK


def cmd_flow(args: argparse.Namespace) -> int:
    spec = spec_from_label(args.example, alpha=args.alpha, beta=args.beta)
    quotient = QuotientSpec.from_example(spec)
    result = attractor_report(
        quotient,
        seeds=args.seeds,
        tau_end=args.tau,
        sample_dt=args.dt,
        seed=args.seed,
        contact_rate=contact_volume_rate(spec),
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as stream:
            result.write_csv(stream)
    passed = result.passed()
    payload = {"schema": SCHEMA_VERSION, "example": spec.label, **result.to_json()}
    payload["overall"] = "pass" if passed else "fail"
    lines = [f"{spec.label}: {payload['overall']}"]
    for name, rate in result.rates.items():
        lines.append(
            f"  {name:>4}: rate {rate:.4f} (expected {result.expected[name]:.0f}, "
            f"R^2 {result.r_squared[name]:.6f})"
        )
    lines.append(f"  residual max {result.residual_max:.3e}")
    lines.append(
        f"  contact volume rate {result.fitted_contact_volume_rate:.4f} "
        f"(exact {result.contact_rate})"
    )
    _emit(args, payload, "\n".join(lines))
    return EXIT_OK if passed else EXIT_FAILED


def cmd_geodesic(args: argparse.Namespace) -> int:
    built = build_spec(spec_from_label(args.example))
    structure, connection = built.structure, built.connection
    n = structure.n
    tolerances = Tolerances()
    if args.upsilon:
        structure, connection, _ = rescale(structure, connection, parse_expr(args.upsilon, n))
    if args.start:
        values = _complex_list(args.start)
        if len(values) != n + 1:
            raise DataError(f"--start needs t and {n} complex coordinates")
        t0, origin = values[0].real, np.array(values[1:])
    else:
        t0, origin = 0.0, np.zeros(n, dtype=complex)
        origin[LEAF_INDEX] = 1.0
    if args.tangent:
        direction = np.array(_complex_list(args.tangent))
        if len(direction) != n:
            raise DataError(f"--tangent needs {n} complex components")
    else:
        direction = np.zeros(n, dtype=complex)
        direction[LEAF_INDEX] = 1.0
    curve = integrate_null_geodesic(
        structure,
        connection,
        (t0, origin),
        direction,
        steps=args.steps,
        extent=args.extent,
        defining=built.spec.defining,
    )
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as stream:
            curve.to_csv(stream)
    payload: dict[str, Any] = {
        "schema": SCHEMA_VERSION,
        "example": built.spec.label,
        "samples": len(curve.zeta),
        "max_residual": curve.max_residual,
        "max_null_defect": curve.max_null_defect,
        "commutativity_defect": curve.commutativity_defect,
    }
    passed = True
    if args.leaf:
        deviation = curve.leaf_deviation(LEAF_INDEX, origin, t0)
        payload["max_leaf_deviation"] = deviation
        passed = deviation <= tolerances.leaf_deviation
    payload["overall"] = "pass" if passed else "fail"
    text = "\n".join(f"{key}: {payload[key]}" for key in sorted(payload) if key != "schema")
    _emit(args, payload, text)
    return EXIT_OK if passed else EXIT_FAILED


def cmd_schwarzian(args: argparse.Namespace) -> int:
    payload: dict[str, Any] = {"schema": SCHEMA_VERSION, "map": str(parse_map(args.map))}
    payload["schwarzian"] = str(schwarzian_exact(args.map))
    if args.wrt:
        payload["wrt"] = str(parse_map(args.wrt))
        payload["schwarzian_wrt"] = str(schwarzian_wrt(args.map, args.wrt))
        payload["chain_rule_residual"] = str(schwarzian_chain_rule_check(args.map, args.wrt))
    if args.emit == "json":
        _emit(args, payload, "")
    elif args.wrt:
        print(f"{{p, z}} = {payload['schwarzian']}")
        print(f"{{p, w}} = {payload['schwarzian_wrt']}")
        print(f"chain rule residual = {payload['chain_rule_residual']}")
    else:
        print(payload["schwarzian"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="essential-cr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="seed for every random draw")
    parser.add_argument("--emit", choices=("text", "json"), default="text")
    parser.add_argument("--timings", action="store_true", help="include runtimes in reports")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    verify = commands.add_parser("verify", help="run the verification suite on an example")
    verify.add_argument("--signature", default="2,2", help="'p,q', 'pq:p,q' or 'lorentzian:n'")
    verify.add_argument("--all", action="store_true", help="run the whole example family")
    verify.add_argument("--rescale", action="store_true", help="add the rescaling checks")
    verify.add_argument("--upsilon", default="z2 + zb2", help="exponent for --rescale")
    verify.set_defaults(handler=cmd_verify)

    invariants = commands.add_parser("invariants", help="print connection, curvature, ...")
    invariants.add_argument("--example", default="2,2")
    invariants.add_argument("targets", nargs="+", choices=INVARIANT_TARGETS)
    invariants.set_defaults(handler=cmd_invariants)

    flow_parser = commands.add_parser("flow", help="attractor run of the essential flow")
    flow_parser.add_argument("--example", default="2,2")
    flow_parser.add_argument("--alpha", type=_rational, default=DEFAULT_ALPHA)
    flow_parser.add_argument("--beta", type=_rational, default=DEFAULT_BETA)
    flow_parser.add_argument("--seeds", type=int, default=100)
    flow_parser.add_argument("--tau", type=float, default=10.0)
    flow_parser.add_argument("--dt", type=float, default=0.1)
    flow_parser.add_argument("--out", help="trajectory CSV path")
    flow_parser.set_defaults(handler=cmd_flow)

    geodesic = commands.add_parser("geodesic", help="integrate a complex null geodesic")
    geodesic.add_argument("--example", default="2,2")
    geodesic.add_argument("--leaf", action="store_true", help="report the deviation from the leaf")
    geodesic.add_argument("--start", help="t,z1,...,zn (default: the leaf point z2 = 1)")
    geodesic.add_argument("--tangent", help="v1,...,vn (default: Z2)")
    geodesic.add_argument("--upsilon", help="integrate for e^Upsilon theta instead")
    geodesic.add_argument("--steps", type=int, default=20)
    geodesic.add_argument("--extent", type=float, default=1.0)
    geodesic.add_argument("--out", help="CSV path for the samples")
    geodesic.set_defaults(handler=cmd_geodesic)

    schwarzian = commands.add_parser("schwarzian", help="exact Schwarzian of a rational map")
    schwarzian.add_argument("--map", required=True, help="rational map of z, e.g. '(2*z+1)/(z-3)'")
    schwarzian.add_argument("--wrt", help="second map w(z): also print {p, w} and the chain rule")
    schwarzian.set_defaults(handler=cmd_schwarzian)
    return parser


USAGE_ERRORS = (UsageError, ExampleError, EmptyRunError, QuotientParameterError)
DATA_ERRORS = (DataError, ParseError, MapParseError, NotRationalMapError, ConstantMapError)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except USAGE_ERRORS as exc:
        print(f"essential-cr: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"essential-cr: parse error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        print(f"essential-cr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
