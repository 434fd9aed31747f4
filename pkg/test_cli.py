"""Tests for the command-line interface."""

import math

import pytest
from click.testing import CliRunner

from cli import cli
from config import __version__
from formatters.report import read_report

SMALL_CW = """
kind = cw_coincidence
seed = 1
duration_ns = 5e5
source.efficiency = 2e-6
source.pump_power_uw = 1
source.pump_wavelength_nm = 657
detector1.efficiency = 0.5
detector2.efficiency = 0.5
window.width_ns = 3
"""


@pytest.fixture
def runner():
    return CliRunner()


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_version(runner):
    result = runner.invoke(cli, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_models(runner):
    result = runner.invoke(cli, ["models"])
    assert result.exit_code == 0
    assert "lithium_niobate" in result.output
    assert "toy" in result.output


class TestQpm:
    def test_design(self, runner, tmp_path):
        result = runner.invoke(cli, [
            "qpm", "--pump-nm", "657", "--temperature", "100", "--length-mm", "32",
            "--grid-start-nm", "1200", "--grid-stop-nm", "1430", "--out", str(tmp_path),
        ])
        assert result.exit_code == 0, result.output
        assert "Poling period:" in result.output
        assert (tmp_path / "spectrum.csv").exists()
        report = read_report(tmp_path / "report.txt")
        assert float(report["period_um"]) == pytest.approx(12.41, rel=0.01)
        assert (tmp_path / "manifest.json").exists()

    def test_unknown_model(self, runner, tmp_path):
        result = runner.invoke(cli, ["qpm", "--model", "quartz", "--pump-nm", "657", "--length-mm", "10",
                                     "--out", str(tmp_path)])
        assert result.exit_code == 2
        assert "unknown dispersion model" in result.output

    def test_no_finite_period(self, runner, tmp_path):
        result = runner.invoke(cli, ["qpm", "--model", "constant", "--pump-nm", "657", "--length-mm", "10",
                                     "--out", str(tmp_path)])
        assert result.exit_code == 4
        assert result.output.startswith("Error:")

    def test_bad_temperatures(self, runner, tmp_path):
        result = runner.invoke(cli, ["qpm", "--pump-nm", "657", "--length-mm", "10",
                                     "--temperatures", "90,hot", "--out", str(tmp_path)])
        assert result.exit_code == 2


class TestRun:
    def test_qpm_scenario(self, runner, tmp_path):
        cfg = write(tmp_path / "qpm.cfg", "kind = qpm_design\nqpm.pump_nm = 657\nqpm.temperature_c = 100\n"
                                          "qpm.length_mm = 32\n")
        result = runner.invoke(cli, ["run", str(cfg), "--out", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output
        assert "Running qpm_design" in result.output
        assert (tmp_path / "out" / "report.txt").exists()

    def test_cw_scenario_is_reproducible(self, runner, tmp_path):
        cfg = write(tmp_path / "cw.cfg", SMALL_CW)
        for name in ("a", "b"):
            result = runner.invoke(cli, ["run", str(cfg), str(tmp_path / name)])
            assert result.exit_code == 0, result.output
        assert (tmp_path / "a" / "report.txt").read_bytes() == (tmp_path / "b" / "report.txt").read_bytes()

    def test_seed_override(self, runner, tmp_path):
        cfg = write(tmp_path / "cw.cfg", SMALL_CW)
        result = runner.invoke(cli, ["run", str(cfg), "--seed", "42", "--out", str(tmp_path / "out")])
        assert result.exit_code == 0, result.output
        assert "(seed 42)" in result.output
        assert read_report(tmp_path / "out" / "report.txt")["seed"] == "42"

    def test_unknown_key(self, runner, tmp_path):
        cfg = write(tmp_path / "bad.cfg", SMALL_CW + "detector1.colour = red\n")
        result = runner.invoke(cli, ["run", str(cfg), "--out", str(tmp_path / "out")])
        assert result.exit_code == 2
        assert "unknown key 'detector1.colour'" in result.output
        assert not (tmp_path / "out" / "report.txt").exists()

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(cli, ["run", str(tmp_path / "nope.cfg")])
        assert result.exit_code == 2


class TestAnalyze:
    def test_scan(self, runner, tmp_path):
        rows = [f"{2 * math.pi * k / 8},{50 * (1 + 0.9 * math.cos(2 * math.pi * k / 8))}" for k in range(8)]
        scan = write(tmp_path / "scan.csv", "phase_rad,counts\n" + "\n".join(rows) + "\n")
        result = runner.invoke(cli, ["analyze", str(scan)])
        assert result.exit_code == 0, result.output
        report = read_report(tmp_path / "scan_report.txt")
        assert float(report["V_raw"]) == pytest.approx(0.9, abs=1e-6)

    def test_histogram(self, runner, tmp_path):
        counts = [0] * 300
        for index, value in ((0, 1000), (125, 500), (250, 480)):
            counts[index] = value
        lines = [f"{0.1 * i:.1f},{c}" for i, c in enumerate(counts)]
        hist = write(tmp_path / "hist.csv", "bin_start_ns,counts\n" + "\n".join(lines) + "\n")
        result = runner.invoke(cli, ["analyze", str(hist), "--no-pileup", "-o", str(tmp_path / "r.txt")])
        assert result.exit_code == 0, result.output
        report = read_report(tmp_path / "r.txt")
        assert report["peaks"] == "3"
        assert float(report["r"]) == pytest.approx(0.49)

    def test_bad_csv_reports_line(self, runner, tmp_path):
        scan = write(tmp_path / "scan.csv", "phase_rad,counts\n0,1\n1,x\n")
        result = runner.invoke(cli, ["analyze", str(scan)])
        assert result.exit_code == 2
        assert "line 3" in result.output

    def test_spacing_must_be_positive(self, runner, tmp_path):
        scan = write(tmp_path / "scan.csv", "phase_rad,counts\n0,1\n")
        result = runner.invoke(cli, ["analyze", str(scan), "--spacing-ns", "0"])
        assert result.exit_code == 2
