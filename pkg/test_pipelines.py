"""End-to-end pipeline tests on small Monte-Carlo runs."""

import json
import math

import pytest

from errors import FwhmUndefinedError
from formatters.report import read_report
from models.scenario import QpmSettings, parse_scenario
from pipelines import (
    analyze_file,
    cw_coincidence,
    franson,
    pulsed_coincidence,
    qpm_design,
    run_scenario,
    timebin,
    write_qpm_design,
)

NS = 1e-9

CW = """
kind = cw_coincidence
seed = 11
duration_ns = 2e6
source.efficiency = 2e-6
source.pump_power_uw = 1
source.pump_wavelength_nm = 657
detector1.efficiency = 0.5
detector2.efficiency = 0.5
detector1.dark_rate_hz = 1000
window.width_ns = 3
"""

PULSED = """
kind = pulsed_coincidence
seed = 3
n_pulses = 200000
source.efficiency = 5e-7
source.pump_power_uw = 24.2
source.pump_wavelength_nm = 657
source.mode = pulsed
source.repetition_rate_mhz = 80
source.pulse_duration_ns = 0.05
source.splitter = demux
detector1.efficiency = 0.1
detector2.efficiency = 0.1
tac.range_ns = 60
tac.bin_ns = 0.1
tac.stop_delay_ns = 5
"""

FRANSON = """
kind = franson
seed = 4
duration_ns = 5e6
v_dephase = 0.9
source.efficiency = 2e-7
source.pump_power_uw = 10
source.pump_wavelength_nm = 657
source.splitter = demux
detector1.jitter_ns = 0.05
detector2.jitter_ns = 0.05
interferometer_a.imbalance_ns = 1.2
interferometer_b.imbalance_ns = 1.2
window.width_ns = 1
tac.stop_delay_ns = 5
scan.points = 8
"""

TIMEBIN = """
kind = timebin
seed = 5
n_pulses = 200000
source.efficiency = 5e-8
source.pump_power_uw = 24.2
source.pump_wavelength_nm = 657
source.mode = pulsed
source.repetition_rate_mhz = 80
source.pulse_duration_ns = 0.4
source.splitter = demux
detector1.jitter_ns = 0.05
detector2.jitter_ns = 0.05
interferometer_pump.imbalance_ns = 1.2
interferometer_a.imbalance_ns = 1.2
interferometer_b.imbalance_ns = 1.2
window.width_ns = 1
tac.stop_delay_ns = 5
scan.points = 8
"""


def pulsed_at(power_uw, detector_efficiency=0.1, n_pulses=200000):
    text = PULSED.replace("source.pump_power_uw = 24.2", f"source.pump_power_uw = {power_uw}")
    text = text.replace("n_pulses = 200000", f"n_pulses = {n_pulses}")
    for name in ("detector1", "detector2"):
        text = text.replace(f"{name}.efficiency = 0.1", f"{name}.efficiency = {detector_efficiency}")
    return parse_scenario(text)


@pytest.fixture(scope="module")
def pulsed_run():
    return pulsed_coincidence(parse_scenario(PULSED))


@pytest.fixture(scope="module")
def franson_run():
    return franson(parse_scenario(FRANSON))


@pytest.fixture(scope="module")
def pulsed_outputs(tmp_path_factory):
    out = tmp_path_factory.mktemp("pulsed")
    run_scenario(parse_scenario(PULSED), out)
    return out


class TestCw:
    def test_efficiency_recovered(self):
        result = cw_coincidence(parse_scenario(CW))
        assert result.eta_true == 2e-6
        assert result.eta_estimate == pytest.approx(2e-6, rel=0.1)
        assert result.singles1 == pytest.approx(result.expected.singles1, rel=0.05)
        assert result.net_coincidences == pytest.approx(result.expected.coincidences, rel=0.1)
        assert result.net_singles1 == pytest.approx(result.singles1 - 1000.0)
        assert result.accidentals < 0.1 * result.coincidences
        assert result.histogram.total > 0

    @pytest.mark.parametrize("efficiency", [0.3, 0.8])
    def test_estimate_independent_of_detector_efficiency(self, efficiency):
        text = CW.replace("detector1.efficiency = 0.5", f"detector1.efficiency = {efficiency}")
        result = cw_coincidence(parse_scenario(text))
        assert result.eta_estimate == pytest.approx(2e-6, rel=0.1)

    def test_chunking_keeps_rates(self):
        scenario = parse_scenario(CW)
        whole = cw_coincidence(scenario)
        chunked = cw_coincidence(scenario, chunk_pairs=2000)
        assert chunked.record.duration == whole.record.duration
        assert chunked.singles1 == pytest.approx(whole.singles1, rel=0.05)


class TestPulsed:
    def test_satellite_peaks(self, pulsed_run):
        assert len(pulsed_run.peaks) >= 4
        assert pulsed_run.peak_spacing == pytest.approx(12.5 * NS, abs=0.1 * NS)
        assert min(abs(p) for p in pulsed_run.peaks.positions) < 0.1 * NS

    def test_mu_inferred(self, pulsed_run):
        assert pulsed_run.mu_configured == pytest.approx(0.5, rel=0.01)
        assert pulsed_run.mu is not None
        assert pulsed_run.mu.mu == pytest.approx(0.5, abs=0.2)
        assert pulsed_run.mu.sigma_mu > 0

    @pytest.mark.parametrize("power_uw, detector_efficiency, n_pulses, mu, tolerance", [
        (4.84, 0.1, 1_000_000, 0.1, 0.03),
        (96.8, 0.02, 2_000_000, 2.0, 0.5),
    ])
    def test_mu_recovered(self, power_uw, detector_efficiency, n_pulses, mu, tolerance):
        result = pulsed_coincidence(pulsed_at(power_uw, detector_efficiency, n_pulses))
        assert result.mu_configured == pytest.approx(mu, rel=0.01)
        assert result.mu is not None
        assert result.mu.mu == pytest.approx(mu, abs=tolerance)

    def test_ratio_grows_with_pump_power(self):
        ratios = [pulsed_coincidence(pulsed_at(power, n_pulses=1_000_000)).mu.r for power in (4.84, 24.2, 96.8)]
        assert ratios[0] < ratios[1] < ratios[2]


class TestFranson:
    def test_analytic_visibility(self, franson_run):
        assert franson_run.analytic_visibility == pytest.approx(0.9, abs=1e-9)

    def test_fitted_visibility(self, franson_run):
        assert franson_run.raw is not None and franson_run.net is not None
        assert franson_run.net.visibility == pytest.approx(0.9, abs=0.04)
        assert franson_run.raw.visibility <= franson_run.net.visibility
        assert len(franson_run.counts) == 8

    def test_side_peaks(self, franson_run):
        assert franson_run.side_central_side is not None
        left, central, right = franson_run.side_central_side
        assert central == 2.0
        assert left == pytest.approx(1.0, abs=0.15)
        assert right == pytest.approx(1.0, abs=0.15)

    def test_injected_accidentals(self):
        # 2.71e7 pairs/s with a 1 ns window: S_a S_b tau / R_sig = 2 R tau = 0.0543
        text = FRANSON.replace("source.efficiency = 2e-7", "source.efficiency = 8.2e-7")
        text = text.replace("duration_ns = 5e6", "duration_ns = 8e6").replace("v_dephase = 0.9", "v_dephase = 0.97")
        result = franson(parse_scenario(text))
        assert result.raw.visibility == pytest.approx(0.92, abs=0.01)
        assert result.net.visibility == pytest.approx(0.97, abs=0.01)


class TestTimebin:
    def test_visibilities(self):
        result = timebin(parse_scenario(TIMEBIN))
        assert result.analytic_twofold == pytest.approx(0.5, abs=1e-9)
        assert result.analytic_threefold == pytest.approx(1.0, abs=1e-9)
        assert result.twofold_fit.visibility == pytest.approx(0.5, abs=0.1)
        assert result.threefold_fit.visibility == pytest.approx(1.0, abs=0.1)
        assert result.bell is not None and result.bell.violates

    def test_dephased_threefold(self):
        # mu = 0.002 keeps multi-pair three-folds below 0.2%
        text = TIMEBIN.replace("source.efficiency = 5e-8", "source.efficiency = 2e-9")
        text = text.replace("n_pulses = 200000", "n_pulses = 200000000") + "v_dephase = 0.84\n"
        result = timebin(parse_scenario(text))
        assert result.analytic_threefold == pytest.approx(0.84, abs=1e-9)
        assert result.threefold_fit.visibility == pytest.approx(0.84, abs=0.01)
        assert result.bell is not None and result.bell.violates


class TestQpm:
    def settings(self, **overrides):
        values = dict(pump_wavelength=657 * NS, temperature=100.0, length=0.032,
                      grid_start=1200 * NS, grid_stop=1430 * NS)
        values.update(overrides)
        return QpmSettings(**values)

    def test_solved_design(self):
        result = qpm_design(self.settings(temperatures=(90.0, 100.0, 110.0)))
        assert result.solved
        assert result.period == pytest.approx(12.41e-6, rel=0.01)
        assert abs(result.residual) < 1e-6
        assert result.idler == pytest.approx(1314 * NS)
        assert len(result.tuning) == 3
        assert 25 * NS <= result.spectrum.fwhm <= 55 * NS

    def test_fixed_period(self):
        result = qpm_design(self.settings(period=12e-6))
        assert not result.solved
        assert result.period == 12e-6
        assert abs(result.residual) > 1.0
        assert result.tuning is None

    def test_partial_spectrum_written(self, tmp_path):
        settings = self.settings(grid_start=1305 * NS, grid_stop=1320 * NS, grid_step=0.5 * NS)
        with pytest.raises(FwhmUndefinedError):
            write_qpm_design(settings, tmp_path)
        assert (tmp_path / "spectrum.csv").exists()


class TestRunner:
    def test_cw_outputs(self, tmp_path):
        files = run_scenario(parse_scenario(CW), tmp_path)
        names = sorted(p.name for p in files)
        assert names == ["histogram.csv", "histogram.meta.json", "manifest.json", "report.txt"]
        report = read_report(tmp_path / "report.txt")
        assert report["kind"] == "cw_coincidence"
        assert report["seed"] == "11"
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert set(manifest["outputs"]) == {"histogram.csv", "histogram.meta.json", "report.txt"}
        assert manifest["config_digest"] == parse_scenario(CW).digest

    def test_events_written_on_request(self, tmp_path):
        run_scenario(parse_scenario(CW + "output.events = true\n"), tmp_path)
        header = (tmp_path / "events.csv").read_text().splitlines()[0]
        assert header == "time_ns,pulse_index,pair_id,arm"

    def test_deterministic(self, tmp_path):
        scenario = parse_scenario(CW)
        run_scenario(scenario, tmp_path / "one")
        run_scenario(scenario, tmp_path / "two")
        for name in ("histogram.csv", "report.txt", "manifest.json"):
            assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()

    def test_seed_changes_output(self, tmp_path):
        scenario = parse_scenario(CW)
        run_scenario(scenario, tmp_path / "one")
        run_scenario(scenario.with_seed(12), tmp_path / "two")
        assert (tmp_path / "one" / "histogram.csv").read_bytes() != (tmp_path / "two" / "histogram.csv").read_bytes()

    def test_qpm_report(self, tmp_path):
        text = "kind = qpm_design\nqpm.pump_nm = 657\nqpm.temperature_c = 100\nqpm.length_mm = 32\n"
        run_scenario(parse_scenario(text), tmp_path)
        report = read_report(tmp_path / "report.txt")
        assert report["period_solved"] == "true"
        assert float(report["period_um"]) == pytest.approx(12.41, rel=0.01)
        assert report["seed"] == "none"
        assert (tmp_path / "spectrum.csv").exists()


class TestAnalyzeFile:
    def test_histogram(self, pulsed_outputs, tmp_path):
        out = analyze_file(pulsed_outputs / "histogram.csv", tmp_path / "report.txt")
        report = read_report(out)
        assert report["input"] == "histogram"
        assert int(report["peaks"]) >= 4
        assert float(report["mu"]) == pytest.approx(0.5, abs=0.2)

    def test_histogram_matches_run(self, pulsed_outputs, tmp_path):
        run = read_report(pulsed_outputs / "report.txt")
        again = read_report(analyze_file(pulsed_outputs / "histogram.csv", tmp_path / "again.txt", pileup=True))
        assert float(again["mu"]) == pytest.approx(float(run["mu"]), rel=1e-6)

    def test_scan(self, tmp_path):
        scan = tmp_path / "scan.csv"
        rows = [f"{2 * math.pi * k / 8},{100 * (1 + 0.8 * math.cos(2 * math.pi * k / 8))}" for k in range(8)]
        scan.write_text("phase_rad,counts\n" + "\n".join(rows) + "\n")
        report = read_report(analyze_file(scan, tmp_path / "report.txt"))
        assert report["input"] == "scan"
        assert float(report["V_raw"]) == pytest.approx(0.8, abs=1e-6)
        assert "V_net" not in report
        report = read_report(analyze_file(scan, tmp_path / "net.txt", s1=1e4, s2=1e4, window=1e-9, duration=0.1))
        assert float(report["V_net"]) > 0.8
