# CLI tests
# Subcommands end to end: files written, exit codes, byte-stable reports

import csv
import json

import pytest

from workbench.config import get_settings
from workbench.errors import InvariantBreach
from workbench.main import build_parser, main, overrides_from_args
from workbench.schemas.reducibility import ClaimRow, ClaimStatus
from workbench.services.report_writer import ReportWriter
from workbench.utils.constants import HEURISTIC_LABEL
from workbench.utils.report_guard import ensure_report_language, find_forbidden_claims

SMALL_SCAN = ["--N", "2000", "--starts", "8"]


@pytest.fixture
def out(tmp_path, monkeypatch):
    """Output directory, with a clean environment and a fresh settings cache."""
    for key in ("WORKBENCH_LOG_LEVEL", "WORKBENCH_RETURN_CAP", "WORKBENCH_PRODUCT_CAP", "WORKBENCH_IOTA_ANNULUS"):
        monkeypatch.delenv(key, raising=False)
    monkeypatch.chdir(tmp_path)
    get_settings.cache_clear()
    yield tmp_path / "out"
    get_settings.cache_clear()


def _load(path):
    return json.loads(path.read_text(encoding="utf-8"))


# =============================================================================
# ARGUMENTS
# =============================================================================

def test_overrides_follow_the_flags():
    args = build_parser().parse_args(
        ["--seed", "5", "diagnose", "--cocycle", "cex1", "--N", "100", "--grid", "20", "--ulam"]
    )
    overrides = overrides_from_args(args)
    assert overrides == {
        "experiment": "diagnose",
        "seed": 5,
        "cocycle": {"kind": "cex1"},
        "numerics": {"n": 100},
        "ulam": {"enabled": True, "grid": (20, 20)},
    }


def test_samples_flag_depends_on_the_command():
    parser = build_parser()
    assert overrides_from_args(parser.parse_args(["lyapunov", "--samples", "3"]))["numerics"] == {"lyapunov_samples": 3}
    assert overrides_from_args(parser.parse_args(["induce", "--samples", "3"]))["inducing"] == {"samples": 3}


def test_usage_errors_exit_with_two():
    with pytest.raises(SystemExit) as exc:
        main(["diagnose", "--system", "Q"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["--seed", "-1", "orbit"])
    assert exc.value.code == 2


# =============================================================================
# SUBCOMMANDS
# =============================================================================

def test_orbit_writes_csv_and_report(out):
    assert main(["orbit", "--length", "10", "--out", str(out)]) == 0
    with open(out / "orbit.csv", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["n", "base_repr", "fibre_repr"]
    assert len(rows) == 12
    report = _load(out / "orbit.json")
    assert report["experiment"] == "orbit"
    assert report["payload"]["csv"] == "orbit.csv"
    assert (out / "orbit.schema.json").is_file()
    assert (out / "orbit.timing.json").is_file()


def test_lyapunov_exponents_vanish(out):
    assert main(["lyapunov", "--cocycle", "example2", "--N", "1000", "--samples", "4", "--out", str(out)]) == 0
    report = _load(out / "lyapunov.json")
    assert len(report["payload"]["samples"]) == 4
    assert report["payload"]["max_abs_exponent"] <= 1e-6


def test_diagnose_reports_the_witness(out):
    assert main(["diagnose", "--cocycle", "cex1", *SMALL_SCAN, "--out", str(out)]) == 0
    scan = _load(out / "diagnose.json")["payload"]["scan"]
    assert scan["verdict"] == "non-ergodic-detected"
    assert scan["witness"] == "torus-character(j=0,k=3)"
    assert scan["label"] == HEURISTIC_LABEL
    assert (out / "diagnose.schema.json").is_file()
    assert (out / "averages.csv").is_file()


def test_reports_are_byte_identical_for_a_fixed_seed(out):
    argv = ["--seed", "11", "diagnose", "--cocycle", "cex2", "--system", "Z3", *SMALL_SCAN, "--out", str(out)]
    assert main(argv) == 0
    first = (out / "diagnose.json").read_bytes()
    averages = (out / "averages.csv").read_bytes()
    assert main(argv) == 0
    assert (out / "diagnose.json").read_bytes() == first
    assert (out / "averages.csv").read_bytes() == averages


def test_search_reducibility_finds_the_pole_sections(out):
    assert main(["search-reducibility", "--cocycle", "example1", *SMALL_SCAN, "--out", str(out)]) == 0
    payload = _load(out / "search-reducibility.json")["payload"]
    assert payload["verdict"]["complex_bundle"] == "reducible-witnessed"
    assert len(payload["sections"]) == 4
    assert payload["diagonalization"]["diagonal"] is True


def test_too_few_starts_is_a_domain_error(out):
    assert main(["diagnose", "--starts", "0", "--out", str(out)]) == 2
    assert main(["diagnose", "--starts", "4", "--N", "100", "--out", str(out)]) == 2


def test_config_file_errors_exit_with_two(out, tmp_path):
    assert main(["--config", str(tmp_path / "absent.toml"), "orbit", "--out", str(out)]) == 2
    bad = tmp_path / "bad.toml"
    bad.write_text("[numerics]\nsteps = 3\n", encoding="utf-8")
    assert main(["--config", str(bad), "orbit", "--out", str(out)]) == 2


def test_return_cap_exits_with_three(out, monkeypatch):
    monkeypatch.setenv("WORKBENCH_RETURN_CAP", "1")
    get_settings.cache_clear()
    argv = ["induce", "--cocycle", "example2", "--formula", "returns", "--samples", "10", "--out", str(out)]
    assert main(argv) == 3


# =============================================================================
# REPORT LANGUAGE
# =============================================================================

def test_heuristic_label_passes_the_guard():
    assert ensure_report_language(HEURISTIC_LABEL) == HEURISTIC_LABEL
    assert find_forbidden_claims('{"verdict": "ergodic-consistent"}') == []


def test_overclaiming_is_a_breach(tmp_path):
    with pytest.raises(InvariantBreach):
        ensure_report_language('{"verdict": "ergodic"}')
    writer = ReportWriter(str(tmp_path), record_wall_time=False)
    with pytest.raises(InvariantBreach):
        writer.write_report("claims", ClaimRow(subject="S", claim="S is ergodic", status=ClaimStatus.CONFIRMED))
    assert not (tmp_path / "claims.json").exists()
