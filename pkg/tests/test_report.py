"""Tests for checks and verification reports."""

import json

from essential_cr.algebra import CoeffElem
from essential_cr.report import (
    CONVENTIONS,
    SCHEMA_VERSION,
    Check,
    CheckStatus,
    Tolerances,
    VerificationReport,
)


def test_exact_check() -> None:
    """Falsy residuals pass; anything else fails with its printed form."""
    assert Check.exact("zero", 0).status == CheckStatus.EXACT_PASS
    assert Check.exact("zero element", CoeffElem.zero(2)).passed
    failed = Check.exact("nonzero", CoeffElem.variable(2, "z1"))
    assert failed.status == CheckStatus.FAIL
    assert failed.residual == "z1"


def test_condition_check() -> None:
    assert Check.condition("holds", True).residual == "0"
    assert Check.condition("broken", False).residual == "false"
    assert Check.condition("broken", False, "span{Z1}").residual == "span{Z1}"


def test_numeric_check() -> None:
    check = Check.numeric("small", 1e-10, 1e-9)
    assert check.status == CheckStatus.NUMERIC_PASS
    assert check.residual == "1.000e-10 (tol 1e-09)"
    assert not Check.numeric("large", 1e-3, 1e-9).passed


def test_report_json_is_stable() -> None:
    """Runtimes appear only with timings; keys are sorted."""
    report = VerificationReport(subject="pq:2,2", params={"beta": "-5/4"})
    check = report.add(Check.exact("r o Gamma = s^4 r", 0, "homothety"))
    check.runtime_ms = 12.5
    data = json.loads(report.dumps())
    assert data["schema"] == SCHEMA_VERSION
    assert data["overall"] == "pass"
    assert data["conventions"] == CONVENTIONS
    assert data["checks"] == [
        {
            "name": "r o Gamma = s^4 r",
            "anchor": "homothety",
            "status": "exact-pass",
            "residual": "0",
        }
    ]
    assert json.loads(report.dumps(timings=True))["checks"][0]["runtime_ms"] == 12.5
    assert report.dumps() == report.dumps()


def test_report_text() -> None:
    report = VerificationReport(subject="pq:2,2")
    report.extend(
        [
            Check.exact("ok", 0),
            Check.numeric("drift", 2e-10, 1e-9),
            Check.condition("ricci", False, "nonzero"),
        ]
    )
    assert not report.passed
    assert report.overall == "fail"
    assert [check.name for check in report.failures()] == ["ricci"]
    assert report.to_text().splitlines() == [
        "pq:2,2: fail",
        "  [  exact-pass] ok",
        "  [numeric-pass] drift  2.000e-10 (tol 1e-09)",
        "  [        fail] ricci  nonzero",
    ]


def test_empty_report_passes() -> None:
    report = VerificationReport(subject="empty")
    assert report.passed
    assert report.to_text() == "empty: pass"


def test_default_tolerances() -> None:
    tolerances = Tolerances()
    assert tolerances.flow_residual == 1e-9
    assert tolerances.rate == 0.01
