"""Tests for the essential-cr command line."""

import json
from pathlib import Path

import pytest

from essential_cr.cli import (
    EXIT_DATA,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    main,
    verify_example,
)


def _json(capsys: pytest.CaptureFixture[str]) -> dict:
    return json.loads(capsys.readouterr().out)


def test_verify_pq22(capsys: pytest.CaptureFixture[str]) -> None:
    """The default example passes every check."""
    assert main(["verify", "--signature", "2,2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "pq:2,2: pass"
    assert "R_1^2_{11bar} == -4" in out
    assert "Chern image = span{Z2}" in out


def test_verify_with_rescale_json(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--emit", "json", "verify", "--signature", "lorentzian:2", "--rescale"]) == EXIT_OK
    data = _json(capsys)
    assert data["schema"] == 1
    assert data["subject"] == "lorentzian:2"
    assert data["overall"] == "pass"
    assert data["params"]["upsilon"] == "z2 + zb2"
    names = [check["name"] for check in data["checks"]]
    assert "direct solve = Lee transform" in names
    assert "rescaled leaf: u = 2 Upsilon'" in names
    assert all("runtime_ms" not in check for check in data["checks"])


def test_verify_example_timings() -> None:
    report = verify_example("lorentzian:2")
    assert report.passed
    assert all(check.runtime_ms is not None for check in report.checks)
    assert "runtime_ms" in report.to_json(timings=True)["checks"][0]


def test_invariants_connection_and_levi(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["invariants", "--example", "2,2", "connection", "levi"]) == EXIT_OK
    assert capsys.readouterr().out.splitlines() == [
        "# connection",
        "omega[1][2] = 4*zb1*theta1",
        "# levi",
        "h[1][1] = 4*z1*zb1",
        "h[1][2] = 1",
        "h[2][1] = 1",
        "h[3][4] = 1",
        "h[4][3] = 1",
    ]


def test_invariants_ricci(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["invariants", "--example", "2,2", "ricci", "chern"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[1:5] == ["0 0 0 0"] * 4
    assert lines[5:] == ["# chern", "S[1][2][1][1] = -4", "image = span{Z2}"]


def test_invariants_json(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["--emit", "json", "invariants", "--example", "lorentzian:2", "curvature"]) == 0
    data = _json(capsys)
    assert data["example"] == "lorentzian:2"
    assert data["curvature"] == {"1,2,1,1": "-4"}


def test_flow(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    out = tmp_path / "flow.csv"
    code = main(
        ["--emit", "json", "flow", "--seeds", "3", "--tau", "4", "--dt", "0.5", "--out", str(out)]
    )
    assert code == EXIT_OK
    data = _json(capsys)
    assert data["overall"] == "pass"
    assert data["contact_volume_rate"] == "-20"
    assert data["rates"]["z2"] == pytest.approx(3.0, abs=0.03)
    assert len(out.read_text().splitlines()) == 1 + 3 * 9


def test_geodesic_along_leaf(capsys: pytest.CaptureFixture[str], tmp_path: Path) -> None:
    out = tmp_path / "geodesic.csv"
    code = main(
        ["geodesic", "--leaf", "--steps", "4", "--extent", "0.5", "--out", str(out)]
    )
    assert code == EXIT_OK
    text = capsys.readouterr().out
    assert "overall: pass" in text
    assert "samples: 25" in text
    assert out.read_text().startswith("zeta_re,zeta_im,t,")


def test_schwarzian(capsys: pytest.CaptureFixture[str]) -> None:
    assert main(["schwarzian", "--map", "(2*z+1)/(z-3)"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "0"
    assert main(["--emit", "json", "schwarzian", "--map", "z^3", "--wrt", "z^3"]) == EXIT_OK
    data = _json(capsys)
    assert data["schwarzian_wrt"] == "0"
    assert data["chain_rule_residual"] == "0"


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["invariants"],
        ["invariants", "torsion"],
        ["verify", "--signature", "4,1"],
        ["invariants", "--example", "lorentzian:9", "ricci"],
        ["flow", "--seeds", "0"],
        ["flow", "--beta", "x"],
        ["flow", "--beta", "0"],
        ["--emit", "yaml", "verify"],
    ],
)
def test_usage_errors(argv: list[str], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [
        ["schwarzian", "--map", "z +"],
        ["schwarzian", "--map", "exp(z)"],
        ["schwarzian", "--map", "5"],
        ["verify", "--rescale", "--upsilon", "z2 +"],
        ["geodesic", "--example", "lorentzian:2", "--tangent", "1,2,3"],
        ["geodesic", "--example", "lorentzian:2", "--start", "a,b"],
    ],
)
def test_data_errors(argv: list[str], capsys: pytest.CaptureFixture[str]) -> None:
    assert main(argv) == EXIT_DATA
    assert "parse error" in capsys.readouterr().err


def test_version(capsys: pytest.CaptureFixture[str]) -> None:
    with pytest.raises(SystemExit) as excinfo:
        build_parser().parse_args(["--version"])
    assert excinfo.value.code == 0
    assert capsys.readouterr().out.startswith("essential-cr ")
