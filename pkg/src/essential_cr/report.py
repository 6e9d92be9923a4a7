"""Verification reports with a stable JSON schema."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

SCHEMA_VERSION = 1

## fixed normalizations every report records
CONVENTIONS = {
    "levi": "dtheta = i h_{a b~} theta^a ^ theta^b~",
    "reeb": "T = 2 d/dt on the graph coordinates (t, z)",
    "connection": "dtheta^b = theta^a ^ omega_a^b + theta ^ tau^b, tau^b = A^b_s~ theta^s~",
    "curvature": "Omega_a^b = d omega_a^b - omega_a^c ^ omega_c^b = R_a^b_{r s~} theta^r ^ theta^s~",
    "scalar": "R = h^{r s~} R_{r s~} (no 1/n factor)",
    "chern": "totally trace-free part of R_{a b~ r s~}",
    "rescale": "theta^ = e^Upsilon theta, theta^a^ = theta^a + i Upsilon^a theta",
    "flow": "phi_tau = Gamma_{0,-tau}, s = e^beta, a = e^alpha",
}


class CheckStatus(str, Enum):
    """Outcome of one check."""

    EXACT_PASS = "exact-pass"
    """The residual is identically zero."""

    NUMERIC_PASS = "numeric-pass"
    """The residual is within the numeric tolerance."""

    FAIL = "fail"


@dataclass(frozen=True)
class Tolerances:
    """Numeric thresholds used by the verification suites."""

    flow_residual: float = 1e-9
    leaf_deviation: float = 1e-8
    geodesic_abort: float = 1e-6
    null: float = 1e-12
    schwarzian_ode: float = 1e-8
    cross_schwarzian: float = 1e-6
    rate: float = 0.01


@dataclass
class Check:
    name: str
    status: CheckStatus
    residual: str = "0"
    anchor: str = ""
    runtime_ms: float | None = None

    @property
    def passed(self) -> bool:
        return self.status != CheckStatus.FAIL

    @classmethod
    def exact(cls, name: str, residual: Any, anchor: str = "") -> Check:
        """An exact check; anything falsy (0, empty form, empty list) passes."""
        if residual:
            return cls(name, CheckStatus.FAIL, str(residual), anchor)
        return cls(name, CheckStatus.EXACT_PASS, "0", anchor)

    @classmethod
    def condition(cls, name: str, holds: bool, detail: str = "", anchor: str = "") -> Check:
        status = CheckStatus.EXACT_PASS if holds else CheckStatus.FAIL
        return cls(name, status, "0" if holds else detail or "false", anchor)

    @classmethod
    def numeric(cls, name: str, value: float, tolerance: float, anchor: str = "") -> Check:
        """Passes when ``value <= tolerance``; the residual records both."""
        status = CheckStatus.NUMERIC_PASS if value <= tolerance else CheckStatus.FAIL
        return cls(name, status, f"{value:.3e} (tol {tolerance:.0e})", anchor)

    def to_json(self, timings: bool = False) -> dict:
        data: dict[str, Any] = {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status.value,
            "residual": self.residual,
        }
        if timings and self.runtime_ms is not None:
            data["runtime_ms"] = round(self.runtime_ms, 3)
        return data


@dataclass
class VerificationReport:
    """A list of checks about one subject (usually an example label).

    Runtimes are kept out of the output unless ``timings`` is requested, so
    that reports are byte-stable for a fixed seed.
    """

    subject: str
    checks: list[Check] = field(default_factory=list)
    params: dict[str, Any] = field(default_factory=dict)
    conventions: dict[str, str] = field(default_factory=lambda: dict(CONVENTIONS))

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def overall(self) -> str:
        return "pass" if self.passed else "fail"

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, checks: list[Check]) -> None:
        self.checks.extend(checks)

    def failures(self) -> list[Check]:
        return [check for check in self.checks if not check.passed]

    def to_json(self, timings: bool = False) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "subject": self.subject,
            "overall": self.overall,
            "params": self.params,
            "conventions": self.conventions,
            "checks": [check.to_json(timings) for check in self.checks],
        }

    def dumps(self, timings: bool = False) -> str:
        return json.dumps(self.to_json(timings), indent=2, sort_keys=True)

    def to_text(self, timings: bool = False) -> str:
        width = max((len(check.name) for check in self.checks), default=0)
        lines = [f"{self.subject}: {self.overall}"]
        for check in self.checks:
            line = f"  [{check.status.value:>12}] {check.name:<{width}}"
            if check.status == CheckStatus.NUMERIC_PASS or not check.passed:
                line += f"  {check.residual}"
            if timings and check.runtime_ms is not None:
                line += f"  ({check.runtime_ms:.1f} ms)"
            lines.append(line.rstrip())
        return "\n".join(lines)
