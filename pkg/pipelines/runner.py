"""Scenario runner: dispatch a scenario to its pipeline and write the output files."""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np
import structlog

from analysis.peaks import find_peaks, infer_mu
from analysis.visibility import bell_significance, fit_visibility, subtract_accidentals
from errors import FwhmUndefinedError
from formatters.csv_io import (
    meta_path,
    read_histogram,
    read_scan,
    sniff,
    write_events,
    write_histogram,
    write_scan,
    write_spectrum,
)
from formatters.report import peak_fields, visibility_fields, write_manifest, write_report
from models.records import Spectrum
from models.scenario import QpmSettings, Scenario, ScenarioKind
from models.specs import PolingSpec, Splitter
from optics.dispersion import get_model
from optics.qpm import (
    conjugate_wavelength,
    pdc_spectrum,
    phase_mismatch,
    solve_poling_period,
    temperature_tuning,
)
from pipelines.coincidence import cw_coincidence, pulsed_coincidence
from pipelines.interference import franson, timebin
from sim.source import pair_rate, photons_per_pulse, pump_photon_rate

log = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class QpmResult:
    period: float
    solved: bool
    residual: float
    idler: float
    spectrum: Spectrum
    tuning: Optional[np.ndarray]


def qpm_design(settings: QpmSettings) -> QpmResult:
    """Poling period (solved unless fixed), residual mismatch and spectrum.

    A spectrum whose FWHM is undefined is still attached to the raised error.
    """
    model = get_model(settings.model, settings.index_offset)
    pump, signal = settings.pump_wavelength, settings.signal
    idler = conjugate_wavelength(pump, signal)
    solved = settings.period is None
    period = solve_poling_period(model, pump, signal, settings.temperature) if solved else settings.period
    spec = PolingSpec(period=period, length=settings.length, temperature=settings.temperature)
    residual = phase_mismatch(model, spec, pump, signal)
    tuning = None
    if settings.temperatures:
        tuning = temperature_tuning(model, spec, pump, signal, settings.temperatures)
    spectrum = pdc_spectrum(model, spec, pump, settings.grid())
    log.info("QPM design", model=model.name, period_um=period * 1e6, fwhm_nm=spectrum.fwhm * 1e9)
    return QpmResult(period, solved, residual, idler, spectrum, tuning)


def _qpm_fields(settings: QpmSettings, result: QpmResult) -> dict:
    fields = {
        "model": settings.model,
        "index_offset": get_model(settings.model, settings.index_offset).index_offset,
        "pump_nm": settings.pump_wavelength * 1e9,
        "signal_nm": settings.signal * 1e9,
        "idler_nm": result.idler * 1e9,
        "temperature_c": settings.temperature,
        "length_mm": settings.length * 1e3,
        "period_um": result.period * 1e6,
        "period_solved": result.solved,
        "residual_rad_per_m": result.residual,
        "fwhm_nm": result.spectrum.fwhm * 1e9,
        "peak_nm": result.spectrum.peak_wavelength * 1e9,
    }
    if result.tuning is not None:
        fields["tuning_temperatures_c"] = settings.temperatures
        fields["tuning_dk_rad_per_m"] = tuple(result.tuning)
    return fields


def _histogram_files(scenario: Scenario, hist, out: Path) -> list[Path]:
    path = write_histogram(hist, out / "histogram.csv", scenario.seed, scenario.digest)
    return [path, meta_path(path)]


def _run_cw(scenario: Scenario, out: Path) -> tuple[dict, list[Path]]:
    result = cw_coincidence(scenario)
    src = scenario.source
    files = _histogram_files(scenario, result.histogram, out)
    if scenario.write_events:
        files.append(write_events(result.record.arrivals1, result.record.arrivals2, out / "events.csv"))
    fields = {
        "singles1_hz": result.singles1,
        "singles2_hz": result.singles2,
        "coincidence_rate_hz": result.coincidences,
        "accidental_rate_hz": result.accidentals,
        "net_singles1_hz": result.net_singles1,
        "net_singles2_hz": result.net_singles2,
        "net_coincidence_rate_hz": result.net_coincidences,
        "eta_estimate": result.eta_estimate,
        "eta_true": result.eta_true,
        "expected_singles1_hz": result.expected.singles1,
        "expected_singles2_hz": result.expected.singles2,
        "expected_coincidence_rate_hz": result.expected.coincidences,
        "pump_photon_rate_hz": pump_photon_rate(src.pump_power, src.pump_wavelength),
        "pair_rate_hz": pair_rate(src),
        "duration_s": result.record.duration,
    }
    return fields, files


def _run_pulsed(scenario: Scenario, out: Path) -> tuple[dict, list[Path]]:
    result = pulsed_coincidence(scenario)
    src = scenario.source
    files = _histogram_files(scenario, result.histogram, out)
    if scenario.write_events:
        files.append(write_events(result.record.arrivals1, result.record.arrivals2, out / "events.csv"))
    fields = peak_fields(result.peaks, result.mu)
    fields.update(
        mu_configured=result.mu_configured,
        photons_per_pulse=photons_per_pulse(src.pump_power, src.repetition_rate, src.pump_wavelength),
        singles1_hz=result.singles1,
        singles2_hz=result.singles2,
        histogram_starts=result.histogram.starts,
        duration_s=result.record.duration,
    )
    return fields, files


def _run_franson(scenario: Scenario, out: Path) -> tuple[dict, list[Path]]:
    result = franson(scenario)
    files = [
        *_histogram_files(scenario, result.histogram, out),
        write_scan(result.phases, result.counts, out / "scan.csv"),
    ]
    fields = visibility_fields(result.raw, result.net, result.bell)
    fields.update(
        analytic_visibility=result.analytic_visibility,
        side_central_side=result.side_central_side,
        singles_a_hz=float(result.singles_a.mean()),
        singles_b_hz=float(result.singles_b.mean()),
        window_ns=scenario.window.width * 1e9,
        duration_per_point_s=result.duration,
        v_dephase=scenario.v_dephase,
    )
    return fields, files


def _run_timebin(scenario: Scenario, out: Path) -> tuple[dict, list[Path]]:
    result = timebin(scenario)
    files = [
        *_histogram_files(scenario, result.histogram, out),
        write_scan(result.phases, result.threefold, out / "scan.csv"),
        write_scan(result.phases, result.twofold, out / "scan_twofold.csv"),
    ]
    fields = visibility_fields(result.threefold_fit, None, result.bell)
    if result.twofold_fit is not None:
        fields.update(V_twofold=result.twofold_fit.visibility, sigma_twofold=result.twofold_fit.sigma)
    fields.update(
        analytic_V_twofold=result.analytic_twofold,
        analytic_V_threefold=result.analytic_threefold,
        duration_per_point_s=result.duration,
        v_dephase=scenario.v_dephase,
    )
    return fields, files


def write_qpm_design(settings: QpmSettings, out: Path) -> tuple[dict, list[Path]]:
    """Run a QPM design and write spectrum.csv (also when the FWHM is undefined)."""
    try:
        result = qpm_design(settings)
    except FwhmUndefinedError as e:
        if e.spectrum is not None:
            write_spectrum(e.spectrum, out / "spectrum.csv")
        raise
    files = [write_spectrum(result.spectrum, out / "spectrum.csv")]
    return _qpm_fields(settings, result), files


def _run_qpm(scenario: Scenario, out: Path) -> tuple[dict, list[Path]]:
    return write_qpm_design(scenario.qpm, out)


_HANDLERS: dict[ScenarioKind, Callable[[Scenario, Path], tuple[dict, list[Path]]]] = {
    ScenarioKind.CW_COINCIDENCE: _run_cw,
    ScenarioKind.PULSED_COINCIDENCE: _run_pulsed,
    ScenarioKind.FRANSON: _run_franson,
    ScenarioKind.TIMEBIN: _run_timebin,
    ScenarioKind.QPM_DESIGN: _run_qpm,
}


def run_scenario(scenario: Scenario, out_dir: Path) -> list[Path]:
    """Run one scenario and write its outputs; returns the written paths."""
    out = Path(out_dir)
    log.info("Running scenario", kind=scenario.kind.value, seed=scenario.seed, out=str(out))
    fields, files = _HANDLERS[scenario.kind](scenario, out)
    fields.update(kind=scenario.kind.value, seed=scenario.seed, config_digest=scenario.digest)
    files.append(write_report(fields, out / "report.txt"))
    files.append(write_manifest(out / "manifest.json", scenario.kind.value, scenario.seed, scenario.digest, files))
    return files


def analyze_histogram_file(path: Path, spacing: float, splitter: Splitter, pileup: bool) -> dict:
    hist = read_histogram(path)
    peaks = find_peaks(hist, spacing, pileup=pileup and hist.starts > 0)
    mu = infer_mu(peaks, splitter) if len(peaks) > 1 else None
    fields = peak_fields(peaks, mu)
    fields.update(source=Path(path).name, histogram_total=hist.total)
    return fields


def analyze_scan_file(
    path: Path,
    s1: Optional[float] = None,
    s2: Optional[float] = None,
    window: Optional[float] = None,
    duration: Optional[float] = None,
) -> dict:
    scan = read_scan(path)
    raw = fit_visibility(scan)
    net = None
    if None not in (s1, s2, window, duration):
        net = subtract_accidentals(scan, s1, s2, window, duration)
    bell = bell_significance(raw.visibility, raw.sigma) if raw.sigma > 0 else None
    fields = visibility_fields(raw, net, bell)
    fields.update(source=Path(path).name, points=raw.n_points)
    return fields


def analyze_file(path: Path, out_path: Path, **options) -> Path:
    """Analyze a histogram or scan CSV (detected by header) and write a report."""
    kind = sniff(path)
    if kind == "histogram":
        fields = analyze_histogram_file(
            path, options.get("spacing", 12.5e-9),
            options.get("splitter", Splitter.DEMUX), options.get("pileup", True),
        )
    else:
        fields = analyze_scan_file(
            path, options.get("s1"), options.get("s2"), options.get("window"), options.get("duration"),
        )
    fields["input"] = kind
    return write_report(fields, out_path)
