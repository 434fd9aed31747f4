"""Franson and time-bin phase scans by Monte-Carlo over the path-amplitude engine.

Arm loss and detector efficiency are applied to the pair process before the
interference draw: a Poisson pair process thinned by photon survival splits
into independent Poisson processes (both photons survive, only A, only B),
so only pairs with at least one surviving photon are generated. The
detectors then add dark counts, jitter and dead time.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
import structlog

from analysis.peaks import find_peaks, fringe_ratio
from analysis.visibility import bell_significance, fit_visibility, subtract_accidentals
from errors import PairlabError
from models.records import BellReport, DetectionStream, Histogram, PhotonStream, VisibilityFit
from models.scenario import Scenario
from models.specs import CoincidenceWindow, PumpMode
from optics.pathcalc import (
    InterferenceSetup,
    Observables,
    fringe_visibility,
    sample_outcomes,
    visibility_scan,
)
from sim.detect import detect, merge_histograms, pair_deltas, tac, three_fold_counts
from sim.source import generate_emissions

log = structlog.get_logger()


@dataclass(frozen=True, eq=False)
class ScanPoint:
    """Clicks of both analyzers at one phase setting."""

    phase: float
    clicks_a: DetectionStream
    clicks_b: DetectionStream
    duration: float


def simulate_point(
    scenario: Scenario, setup: InterferenceSetup, phase: float, seed: np.random.SeedSequence
) -> ScanPoint:
    """Pairs through both analyzers at one phase; only monitored ports reach a detector.

    Click tags carry the index of the pair's observed outcome bin.
    """
    src = scenario.source
    d_a = scenario.transmission1 * scenario.detector1.efficiency
    d_b = scenario.transmission2 * scenario.detector2.efficiency
    p_classes = np.array([d_a * d_b, d_a * (1 - d_b), (1 - d_a) * d_b])
    p_any = float(p_classes.sum())
    emission_seed, draw_seed, det_a_seed, det_b_seed = seed.spawn(4)

    thinned = src.model_copy(update={"efficiency": src.efficiency * p_any})
    duration = scenario.duration
    n_pulses = scenario.n_pulses
    if src.mode is PumpMode.PULSED:
        if n_pulses is None:
            n_pulses = int(np.floor(duration * src.repetition_rate))
        duration = n_pulses * src.pulse_period
        batch = generate_emissions(thinned, n_pulses=n_pulses, seed=emission_seed)
    else:
        batch = generate_emissions(thinned, duration=duration, seed=emission_seed)

    rng = np.random.default_rng(draw_seed)
    n = len(batch)
    if p_any > 0 and n:
        survivor = rng.choice(3, size=n, p=p_classes / p_any)
    else:
        survivor = np.zeros(n, dtype=np.int64)
    sample = sample_outcomes(setup.at_phase(phase), n, rng)

    def arm(present: np.ndarray, delay: np.ndarray, photon: int) -> PhotonStream:
        times = batch.time[present] + sample.delay_pump[present] + delay[present]
        stream = PhotonStream(
            times,
            batch.pulse_index[present],
            batch.pair_id[present],
            np.full(int(present.sum()), photon, dtype=np.int64),
            sample.bin[present],
        )
        return stream.sorted()

    has_a = (survivor != 2) & (sample.port_a == setup.port_a)
    has_b = (survivor != 1) & (sample.port_b == setup.port_b)
    ideal_a = scenario.detector1.model_copy(update={"efficiency": 1.0})
    ideal_b = scenario.detector2.model_copy(update={"efficiency": 1.0})
    clicks_a = detect(arm(has_a, sample.delay_a, 0), ideal_a, duration, det_a_seed)
    clicks_b = detect(arm(has_b, sample.delay_b, 1), ideal_b, duration, det_b_seed)
    return ScanPoint(phase, clicks_a, clicks_b, duration)


def _setup(scenario: Scenario, observables: Observables) -> InterferenceSetup:
    return InterferenceSetup(
        a=scenario.interferometer_a,
        b=scenario.interferometer_b,
        pump=scenario.interferometer_pump if scenario.source.mode is PumpMode.PULSED else None,
        observables=observables,
        v_dephase=scenario.v_dephase,
        scanned=scenario.scan.scanned,
    )


def _scan_histogram(scenario: Scenario, points: list[ScanPoint]) -> Histogram:
    tac_settings = scenario.tac
    return merge_histograms([
        tac(p.clicks_a, p.clicks_b, tac_settings.range, tac_settings.bin_width,
            tac_settings.stop_delay, p.duration)
        for p in points
    ])


def _window_counts(point: ScanPoint, window: CoincidenceWindow) -> int:
    lo, hi = window.bounds
    return len(pair_deltas(point.clicks_a, point.clicks_b, lo, hi))


def _safe(fn, *args):
    try:
        return fn(*args)
    except PairlabError as e:
        log.warning("Analysis step failed", step=fn.__name__, error=str(e))
        return None


@dataclass(frozen=True, eq=False)
class FransonResult:
    """Central-bin coincidence scan versus the scanned analyzer phase."""

    phases: np.ndarray
    counts: np.ndarray
    singles_a: np.ndarray
    singles_b: np.ndarray
    duration: float
    raw: Optional[VisibilityFit]
    net: Optional[VisibilityFit]
    bell: Optional[BellReport]
    analytic_visibility: float
    side_central_side: Optional[tuple[float, float, float]]
    histogram: Histogram


def franson(scenario: Scenario) -> FransonResult:
    """Energy-time interference with a CW pump and two equally unbalanced analyzers."""
    setup = _setup(scenario, Observables.TWO_FOLD_DIFFERENCE)
    phases = np.asarray(scenario.scan.phases, dtype=float)
    seeds = np.random.SeedSequence(scenario.seed).spawn(len(phases))

    points = [simulate_point(scenario, setup, float(phi), s) for phi, s in zip(phases, seeds)]
    counts = np.array([_window_counts(p, scenario.window) for p in points], dtype=float)
    duration = points[0].duration
    singles_a = np.array([len(p.clicks_a) / p.duration for p in points])
    singles_b = np.array([len(p.clicks_b) / p.duration for p in points])

    scan = np.column_stack([phases, counts])
    raw = _safe(fit_visibility, scan)
    net = _safe(subtract_accidentals, scan, float(singles_a.mean()), float(singles_b.mean()),
                scenario.window.width, duration)
    bell = _safe(bell_significance, raw.visibility, raw.sigma) if raw else None

    analytic = visibility_scan(setup, phases, (0.0,))
    histogram = _scan_histogram(scenario, points)
    peaks = find_peaks(histogram, scenario.analysis.spacing or scenario.interferometer_a.imbalance)
    ratio = _safe(fringe_ratio, peaks)

    log.info("Franson scan", points=len(phases), v_raw=raw.visibility if raw else None,
             v_net=net.visibility if net else None)
    return FransonResult(
        phases=phases,
        counts=counts,
        singles_a=singles_a,
        singles_b=singles_b,
        duration=duration,
        raw=raw,
        net=net,
        bell=bell,
        analytic_visibility=fringe_visibility([p for _, p in analytic]),
        side_central_side=ratio,
        histogram=histogram,
    )


@dataclass(frozen=True, eq=False)
class TimebinResult:
    """Two-fold (SCA) and three-fold (pulse-referenced) scans of a time-bin experiment."""

    phases: np.ndarray
    twofold: np.ndarray
    threefold: np.ndarray
    duration: float
    twofold_fit: Optional[VisibilityFit]
    threefold_fit: Optional[VisibilityFit]
    bell: Optional[BellReport]
    analytic_twofold: float
    analytic_threefold: float
    histogram: Histogram


def threefold_windows(scenario: Scenario) -> tuple[CoincidenceWindow, CoincidenceWindow]:
    """Pulse-referenced windows around the middle time slot of each analyzer."""
    imbalance = scenario.interferometer_a.imbalance
    center = imbalance + scenario.source.pulse_duration / 2
    window = CoincidenceWindow(center=center, width=imbalance)
    return window, window


def timebin(scenario: Scenario) -> TimebinResult:
    """Time-bin interference with a pump interferometer and a pulsed source."""
    two = _setup(scenario, Observables.TWO_FOLD_DIFFERENCE)
    three = _setup(scenario, Observables.THREE_FOLD_REFERENCED)
    phases = np.asarray(scenario.scan.phases, dtype=float)
    seeds = np.random.SeedSequence(scenario.seed).spawn(len(phases))
    window_a, window_b = threefold_windows(scenario)
    period = scenario.source.pulse_period

    points = [simulate_point(scenario, two, float(phi), s) for phi, s in zip(phases, seeds)]
    twofold = np.array([_window_counts(p, scenario.window) for p in points], dtype=float)
    threefold = np.array(
        [three_fold_counts(p.clicks_a, p.clicks_b, period, window_a, window_b) for p in points],
        dtype=float,
    )

    twofold_fit = _safe(fit_visibility, np.column_stack([phases, twofold]))
    threefold_fit = _safe(fit_visibility, np.column_stack([phases, threefold]))
    bell = _safe(bell_significance, threefold_fit.visibility, threefold_fit.sigma) if threefold_fit else None

    imbalance = scenario.interferometer_a.imbalance
    analytic_two = visibility_scan(two, phases, (0.0,))
    analytic_three = visibility_scan(three, phases, (imbalance, imbalance))

    log.info("Time-bin scan", points=len(phases),
             v_twofold=twofold_fit.visibility if twofold_fit else None,
             v_threefold=threefold_fit.visibility if threefold_fit else None)
    return TimebinResult(
        phases=phases,
        twofold=twofold,
        threefold=threefold,
        duration=points[0].duration,
        twofold_fit=twofold_fit,
        threefold_fit=threefold_fit,
        bell=bell,
        analytic_twofold=fringe_visibility([p for _, p in analytic_two]),
        analytic_threefold=fringe_visibility([p for _, p in analytic_three]),
        histogram=_scan_histogram(scenario, points),
    )
