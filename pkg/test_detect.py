"""Tests for detectors, the TAC and the SCA."""

import math

import numpy as np
import pytest

from errors import ConfigError, TacConfigError, UnsortedInputError, WindowRangeError
from models.records import DetectionStream, Histogram, PhotonStream
from models.specs import CoincidenceWindow, DetectorSpec
from sim.detect import (
    apply_dead_time,
    coincidence_pairs,
    detect,
    merge_histograms,
    pair_deltas,
    sca,
    tac,
    three_fold_counts,
)

NS = 1e-9


def photons(times):
    times = np.asarray(times, dtype=float)
    n = len(times)
    return PhotonStream(times, np.full(n, -1, dtype=np.int64), np.arange(n, dtype=np.int64),
                        np.zeros(n, dtype=np.int64))


def clicks(times):
    times = np.asarray(times, dtype=float)
    n = len(times)
    return DetectionStream(times, np.arange(n, dtype=np.int64), np.zeros(n, dtype=np.int64),
                           np.full(n, -1, dtype=np.int64))


class TestDetector:
    def test_quantum_efficiency(self):
        n = 1_000_000
        out = detect(photons(np.arange(n) * 1e-6), DetectorSpec(efficiency=0.1), 1.0, seed=1)
        assert abs(len(out) - 100_000) < 3 * math.sqrt(90_000)

    def test_dark_counts(self):
        out = detect(photons([]), DetectorSpec(dark_rate=1000.0), 10.0, seed=2, start=5.0)
        assert abs(len(out) - 10_000) < 3 * 100
        assert np.all(out.dark)
        assert np.all((out.time >= 5.0) & (out.time < 15.0))
        assert np.all(np.diff(out.time) >= 0)

    def test_jitter(self):
        n = 20_000
        arrivals = np.arange(n) * 1e-6
        out = detect(photons(arrivals), DetectorSpec(jitter=0.3 * NS), 1.0, seed=3)
        offsets = out.time - arrivals[out.pair_id]
        assert np.std(offsets) == pytest.approx(0.3 * NS, rel=0.03)
        assert np.all(np.diff(out.time) >= 0)

    def test_ideal_detector_keeps_everything(self):
        out = detect(photons([1.0, 2.0, 3.0]), DetectorSpec(), 4.0, seed=4)
        assert out.time.tolist() == [1.0, 2.0, 3.0]
        assert [e.pair_id for e in out] == [0, 1, 2]

    def test_dead_time_is_non_paralyzable(self):
        out = apply_dead_time(clicks([0, 10 * NS, 20 * NS, 49 * NS, 60 * NS, 70 * NS]), 50 * NS)
        assert out.time == pytest.approx([0, 60 * NS])

    def test_dead_time_in_detect(self):
        out = detect(photons(np.arange(1000) * 10 * NS), DetectorSpec(dead_time=45 * NS), 1e-5, seed=5)
        assert np.all(np.diff(out.time) >= 45 * NS)
        assert len(out) == 200

    def test_dead_time_never_adds_clicks(self):
        arrivals = photons(np.sort(np.random.default_rng(7).random(100_000)) * 1e-3)
        counts = [
            len(detect(arrivals, DetectorSpec(efficiency=0.5, dead_time=d * NS), 1e-3, seed=9))
            for d in (0, 5, 20, 50, 200)
        ]
        assert all(later <= earlier for earlier, later in zip(counts, counts[1:]))
        assert counts[-1] < counts[0]

    def test_unsorted_arrivals(self):
        with pytest.raises(UnsortedInputError):
            detect(photons([2.0, 1.0]), DetectorSpec(), 3.0, seed=1)

    def test_negative_duration(self):
        with pytest.raises(ConfigError):
            detect(photons([]), DetectorSpec(), -1.0)


class TestTac:
    def test_single_delay(self):
        hist = tac([0.0], [5 * NS], 60 * NS, 0.1 * NS)
        assert hist.n_bins == 600
        assert hist.starts == 1
        assert int(np.argmax(hist.counts)) == 50
        assert hist.total == 1

    def test_stop_delay_sets_origin(self):
        hist = tac([10 * NS], [8 * NS], 60 * NS, 0.1 * NS, stop_delay=5 * NS)
        assert hist.origin == pytest.approx(-5 * NS)
        index = int(np.argmax(hist.counts))
        assert hist.bin_starts[index] == pytest.approx(-2 * NS, abs=1e-15)

    def test_bin_edge_goes_up(self):
        hist = tac([0.0], [0.2 * NS], 10 * NS, 0.1 * NS)
        assert hist.counts[2] == 1

    def test_busy_converter_ignores_starts(self):
        hist = tac([0.0, 1 * NS], [3 * NS], 10 * NS, 0.1 * NS)
        assert hist.starts == 1
        assert hist.total == 1
        assert hist.counts[30] == 1

    def test_timeout(self):
        hist = tac([0.0, 5 * NS, 20 * NS], [25 * NS], 10 * NS, 0.1 * NS)
        assert hist.starts == 2
        assert hist.counts[50] == 1

    def test_each_stop_used_once(self):
        hist = tac([0.0, 4 * NS], [2 * NS, 9 * NS], 10 * NS, 1 * NS)
        assert hist.starts == 2
        assert hist.counts[2] == 1 and hist.counts[5] == 1

    def test_bin_must_fit_range(self):
        with pytest.raises(TacConfigError):
            tac([0.0], [1.0], 1 * NS, 2 * NS)
        with pytest.raises(TacConfigError):
            tac([0.0], [1.0], 1 * NS, 0.0)

    def test_unsorted_stops(self):
        with pytest.raises(UnsortedInputError):
            tac([0.0], [2.0, 1.0], 10 * NS, 1 * NS)

    def test_dark_counts_give_flat_histogram(self):
        # 2 MHz stops over a 10 ns range: first-stop decay across the range is 2%
        starts = detect(photons([]), DetectorSpec(dark_rate=2e7), 0.3, seed=11)
        stops = detect(photons([]), DetectorSpec(dark_rate=2e6), 0.3, seed=12)
        hist = tac(starts, stops, 10 * NS, 1 * NS)
        assert hist.total > 80_000
        mean = hist.total / hist.n_bins
        assert int(hist.counts.max() - hist.counts.min()) < 5 * math.sqrt(2 * mean)

    def test_records_duration(self):
        assert tac([], [], 10 * NS, 1 * NS, duration=2.5).duration == 2.5


class TestCoincidences:
    def test_pair_deltas(self):
        deltas = pair_deltas([0.0, 10 * NS], [1 * NS, 11 * NS, 30 * NS], -5 * NS, 5 * NS)
        assert deltas == pytest.approx([1 * NS, 1 * NS])

    def test_coincidence_pairs_every_combination(self):
        i, j = coincidence_pairs([0.0, 1 * NS], [2 * NS, 3 * NS], 0.0, 10 * NS)
        assert list(zip(i.tolist(), j.tolist())) == [(0, 0), (0, 1), (1, 0), (1, 1)]

    def test_sca_on_deltas(self):
        window = CoincidenceWindow(center=0.0, width=2 * NS)
        deltas = np.array([-0.5, 0.2, 0.9, 1.5]) * NS
        assert sca(deltas, window, 2.0) == pytest.approx(1.5)

    def test_sca_on_histogram(self):
        hist = tac([0.0, 100 * NS], [1.2 * NS, 101.7 * NS], 20 * NS, 0.5 * NS, stop_delay=5 * NS)
        window = CoincidenceWindow(center=1.5 * NS, width=2 * NS)
        assert sca(hist, window, 1.0) == pytest.approx(2.0)

    def test_window_outside_range(self):
        hist = tac([0.0], [1 * NS], 10 * NS, 1 * NS)
        with pytest.raises(WindowRangeError):
            sca(hist, CoincidenceWindow(center=-3 * NS, width=2 * NS), 1.0)

    def test_empty_window_is_zero(self):
        assert sca(np.array([]), CoincidenceWindow(width=1 * NS), 1.0) == 0.0

    def test_sca_needs_duration(self):
        with pytest.raises(ConfigError):
            sca(np.array([0.0]), CoincidenceWindow(width=1 * NS), 0.0)

    def test_three_fold_counts(self):
        period = 12.5 * NS
        window = CoincidenceWindow(center=1.4 * NS, width=1.2 * NS)
        a = [k * period + 1.5 * NS for k in (0, 1, 2)]
        b = sorted([k * period + 1.5 * NS for k in (1, 2, 3)] + [period + 0.1 * NS])
        assert three_fold_counts(a, b, period, window, window) == 2

    def test_merge(self):
        one = Histogram(origin=0.0, bin_width=1.0, counts=np.array([1, 2]), starts=3, duration=1.0)
        two = Histogram(origin=0.0, bin_width=1.0, counts=np.array([4, 0]), starts=5, duration=2.0)
        merged = merge_histograms([one, two])
        assert merged.counts.tolist() == [5, 2]
        assert merged.starts == 8 and merged.duration == 3.0
        other = Histogram(origin=1.0, bin_width=1.0, counts=np.array([0, 0]))
        with pytest.raises(ConfigError):
            merge_histograms([one, other])


def test_histogram_validation():
    with pytest.raises(ValueError):
        Histogram(origin=0.0, bin_width=0.0, counts=np.array([1]))
    with pytest.raises(ValueError):
        Histogram(origin=0.0, bin_width=1.0, counts=np.array([-1]))
