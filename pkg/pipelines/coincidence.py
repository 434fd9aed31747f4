"""Source -> splitter -> arms -> detectors -> TAC/SCA pipelines for CW and pulsed pumps."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from analysis.peaks import find_peaks, infer_mu
from analysis.visibility import accidental_rate
from errors import MuInversionError
from models.records import DetectionStream, Histogram, MuEstimate, PeakSet, PhotonStream
from models.scenario import Scenario
from models.specs import DetectorSpec, PumpMode, SourceConfig, Splitter
from sim.detect import apply_dead_time, detect, pair_deltas, sca, tac
from sim.source import (
    ExpectedRates,
    apply_transmission,
    estimate_efficiency,
    expected_rates,
    iter_emissions,
    mean_pairs_per_pulse,
    split_pairs,
)

log = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class ClickRecord:
    """Detector clicks of both arms for one run; arrivals only when requested."""

    clicks1: DetectionStream
    clicks2: DetectionStream
    duration: float
    arrivals1: Optional[PhotonStream] = None
    arrivals2: Optional[PhotonStream] = None


def concat_clicks(parts: list[DetectionStream]) -> DetectionStream:
    if not parts:
        e = np.empty(0, dtype=np.int64)
        return DetectionStream(np.empty(0), e, e.copy(), e.copy())
    merged = DetectionStream(
        np.concatenate([p.time for p in parts]),
        np.concatenate([p.pair_id for p in parts]),
        np.concatenate([p.photon for p in parts]),
        np.concatenate([p.tag for p in parts]),
    )
    return merged.select(np.argsort(merged.time, kind="stable"))


def concat_photons(parts: list[PhotonStream]) -> PhotonStream:
    if not parts:
        return PhotonStream.empty()
    return PhotonStream(
        np.concatenate([p.time for p in parts]),
        np.concatenate([p.pulse_index for p in parts]),
        np.concatenate([p.pair_id for p in parts]),
        np.concatenate([p.photon for p in parts]),
        np.concatenate([p.tag for p in parts]),
    )


def run_duration(source: SourceConfig, duration: Optional[float], n_pulses: Optional[int]) -> float:
    if source.mode is PumpMode.CW:
        return duration
    if n_pulses is None:
        n_pulses = int(math.floor(duration * source.repetition_rate))
    return n_pulses * source.pulse_period


def simulate_clicks(
    source: SourceConfig,
    detector1: DetectorSpec,
    detector2: DetectorSpec,
    seed: int,
    duration: Optional[float] = None,
    n_pulses: Optional[int] = None,
    splitter: Splitter = Splitter.BEAMSPLITTER,
    transmission1: float = 1.0,
    transmission2: float = 1.0,
    keep_arrivals: bool = False,
    chunk_pairs: Optional[int] = None,
) -> ClickRecord:
    """Chunked Monte-Carlo of emission, splitting, arm loss and detection.

    Each chunk is detected over its own time span (dark counts included);
    dead time is applied once to the merged stream.
    """
    root = np.random.SeedSequence(seed)
    emission_seed, channel_seed = root.spawn(2)
    no_dead1 = detector1.model_copy(update={"dead_time": 0.0})
    no_dead2 = detector2.model_copy(update={"dead_time": 0.0})

    clicks1, clicks2, arrivals1, arrivals2 = [], [], [], []
    chunks = 0
    for batch, t0, t1 in iter_emissions(source, duration, n_pulses, emission_seed, chunk_pairs):
        split_seed, loss1, loss2, det1, det2 = channel_seed.spawn(1)[0].spawn(5)
        arm1, arm2 = split_pairs(batch, split_seed, splitter)
        arm1 = apply_transmission(arm1, transmission1, loss1)
        arm2 = apply_transmission(arm2, transmission2, loss2)
        if keep_arrivals:
            arrivals1.append(arm1)
            arrivals2.append(arm2)
        clicks1.append(detect(arm1, no_dead1, t1 - t0, det1, start=t0))
        clicks2.append(detect(arm2, no_dead2, t1 - t0, det2, start=t0))
        chunks += 1

    record = ClickRecord(
        clicks1=apply_dead_time(concat_clicks(clicks1), detector1.dead_time),
        clicks2=apply_dead_time(concat_clicks(clicks2), detector2.dead_time),
        duration=run_duration(source, duration, n_pulses),
        arrivals1=concat_photons(arrivals1) if keep_arrivals else None,
        arrivals2=concat_photons(arrivals2) if keep_arrivals else None,
    )
    log.info("Simulated clicks", chunks=chunks, clicks1=len(record.clicks1),
             clicks2=len(record.clicks2), duration_s=record.duration)
    return record


@dataclass(frozen=True, eq=False)
class CwResult:
    """Singles, coincidences and the efficiency estimate of a CW run (rates in Hz)."""

    singles1: float
    singles2: float
    coincidences: float
    accidentals: float
    net_singles1: float
    net_singles2: float
    net_coincidences: float
    eta_estimate: float
    eta_true: float
    expected: ExpectedRates
    histogram: Histogram
    record: ClickRecord


def cw_coincidence(scenario: Scenario, chunk_pairs: Optional[int] = None) -> CwResult:
    """CW pump: S1, S2 and R_C from the simulated clicks, then eta from net rates."""
    src = scenario.source
    record = simulate_clicks(
        src, scenario.detector1, scenario.detector2, scenario.seed,
        duration=scenario.duration, splitter=scenario.splitter,
        transmission1=scenario.transmission1, transmission2=scenario.transmission2,
        keep_arrivals=scenario.write_events, chunk_pairs=chunk_pairs,
    )
    duration = record.duration
    s1 = len(record.clicks1) / duration
    s2 = len(record.clicks2) / duration
    lo, hi = scenario.window.bounds
    rc = sca(pair_deltas(record.clicks1, record.clicks2, lo, hi), scenario.window, duration, span=(lo, hi))
    acc = accidental_rate(s1, s2, scenario.window.width)

    net1 = max(s1 - scenario.detector1.dark_rate, 0.0)
    net2 = max(s2 - scenario.detector2.dark_rate, 0.0)
    net_rc = max(rc - acc, 0.0)
    eta = estimate_efficiency(net1, net2, net_rc, src.pump_power, src.pump_wavelength, scenario.splitter)

    hist = tac(record.clicks1, record.clicks2, scenario.tac.range, scenario.tac.bin_width,
               scenario.tac.stop_delay, duration)
    expected = expected_rates(
        src, scenario.transmission1, scenario.transmission2,
        scenario.detector1.efficiency, scenario.detector2.efficiency, scenario.splitter,
    )
    log.info("CW coincidence run", singles1=s1, singles2=s2, coincidences=rc, eta_estimate=eta)
    return CwResult(s1, s2, rc, acc, net1, net2, net_rc, eta, src.efficiency, expected, hist, record)


@dataclass(frozen=True, eq=False)
class PulsedResult:
    """Satellite-peak histogram of a pulsed run and the inferred pairs per pulse."""

    histogram: Histogram
    peaks: PeakSet
    mu: Optional[MuEstimate]
    mu_configured: float
    peak_spacing: Optional[float]
    singles1: float
    singles2: float
    record: ClickRecord


def pulsed_coincidence(scenario: Scenario, chunk_pairs: Optional[int] = None) -> PulsedResult:
    """Pulsed pump: TAC histogram, satellite peaks and mu."""
    src = scenario.source
    record = simulate_clicks(
        src, scenario.detector1, scenario.detector2, scenario.seed,
        duration=scenario.duration, n_pulses=scenario.n_pulses, splitter=scenario.splitter,
        transmission1=scenario.transmission1, transmission2=scenario.transmission2,
        keep_arrivals=scenario.write_events, chunk_pairs=chunk_pairs,
    )
    hist = tac(record.clicks1, record.clicks2, scenario.tac.range, scenario.tac.bin_width,
               scenario.tac.stop_delay, record.duration)
    spacing = scenario.analysis.spacing or src.pulse_period
    peaks = find_peaks(hist, spacing, pileup=scenario.analysis.pileup)

    mu = None
    try:
        mu = infer_mu(peaks, scenario.splitter)
    except MuInversionError as e:
        log.warning("Could not infer mu", error=str(e), peaks=len(peaks))

    measured_spacing = float(np.mean(np.diff(peaks.positions))) if len(peaks) > 1 else None
    log.info("Pulsed coincidence run", peaks=len(peaks), spacing_ns=(measured_spacing or 0) * 1e9,
             mu=mu.mu if mu else None)
    return PulsedResult(
        histogram=hist,
        peaks=peaks,
        mu=mu,
        mu_configured=mean_pairs_per_pulse(src),
        peak_spacing=measured_spacing,
        singles1=len(record.clicks1) / record.duration,
        singles2=len(record.clicks2) / record.duration,
        record=record,
    )
