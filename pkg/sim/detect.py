"""Detectors and counting electronics: Geiger-mode APDs, TAC and SCA.

All times in seconds. Streams must be time-sorted.
"""

import math
from typing import Optional, Sequence, Union

import numpy as np
import structlog

from errors import ConfigError, TacConfigError, UnsortedInputError, WindowRangeError
from models.records import DetectionStream, Histogram, PhotonStream
from models.specs import CoincidenceWindow, DetectorSpec
from sim.source import SeedLike, make_rng

log = structlog.get_logger()

# floor(delta / width + eps) keeps deltas on a bin edge in the upper bin
BIN_EPS = 1e-9

Timed = Union[DetectionStream, PhotonStream, np.ndarray, Sequence[float]]


def _times(events: Timed) -> np.ndarray:
    if hasattr(events, "time"):
        return np.asarray(events.time, dtype=float)
    return np.asarray(events, dtype=float)


def _check_sorted(times: np.ndarray, what: str):
    if len(times) > 1 and np.any(np.diff(times) < 0):
        raise UnsortedInputError(f"{what} must be time-sorted")


def apply_dead_time(stream: DetectionStream, dead_time: float) -> DetectionStream:
    """Non-paralyzable dead time: drop clicks within dead_time of the last accepted one."""
    if dead_time <= 0 or len(stream) < 2:
        return stream
    times = stream.time
    accepted = []
    i = 0
    n = len(times)
    while i < n:
        accepted.append(i)
        i = int(np.searchsorted(times, times[i] + dead_time, side="left"))
    return stream.select(np.asarray(accepted, dtype=np.int64))


def detect(
    arrivals: PhotonStream,
    spec: DetectorSpec,
    duration: float,
    seed: SeedLike = None,
    start: float = 0.0,
) -> DetectionStream:
    """APD response to time-sorted arrivals over [start, start + duration).

    Order: efficiency thinning, uniform dark counts, merge, Gaussian jitter,
    sort, dead time.
    """
    times = np.asarray(arrivals.time, dtype=float)
    _check_sorted(times, "arrivals")
    if duration < 0:
        raise ConfigError(f"duration must be nonnegative, got {duration}")
    rng = make_rng(seed)

    pair_id, photon, tag = arrivals.pair_id, arrivals.photon, arrivals.tag
    if spec.efficiency < 1.0:
        keep = rng.random(len(times)) < spec.efficiency
        times, pair_id, photon, tag = times[keep], pair_id[keep], photon[keep], tag[keep]

    n_dark = int(rng.poisson(spec.dark_rate * duration)) if spec.dark_rate > 0 else 0
    if n_dark:
        dark = start + rng.random(n_dark) * duration
        minus = np.full(n_dark, -1, dtype=np.int64)
        times = np.concatenate([times, dark])
        pair_id = np.concatenate([pair_id, minus])
        photon = np.concatenate([photon, minus])
        tag = np.concatenate([tag, minus])

    if spec.jitter > 0:
        times = times + rng.normal(0.0, spec.jitter, size=len(times))

    if n_dark or spec.jitter > 0:
        order = np.argsort(times, kind="stable")
        times, pair_id, photon, tag = times[order], pair_id[order], photon[order], tag[order]

    clicks = apply_dead_time(DetectionStream(times, pair_id, photon, tag), spec.dead_time)
    log.debug("Detected", arrivals=len(arrivals), dark=n_dark, clicks=len(clicks))
    return clicks


def _n_bins(range_: float, bin_width: float) -> int:
    if bin_width <= 0 or range_ <= 0:
        raise TacConfigError("TAC range and bin width must be positive")
    if bin_width >= range_:
        raise TacConfigError(
            f"TAC bin width {bin_width * 1e9:.4g} ns must be smaller than its range {range_ * 1e9:.4g} ns"
        )
    return math.ceil(range_ / bin_width - BIN_EPS)


def tac(
    starts: Timed,
    stops: Timed,
    range_: float,
    bin_width: float,
    stop_delay: float = 0.0,
    duration: float = 0.0,
) -> Histogram:
    """Single-stop, non-retriggering start-stop histogram.

    An idle converter accepts a start and records the first stop with
    0 <= t_stop + stop_delay - t_start < range_, then becomes idle at that
    stop; with no stop it times out at start + range_. Starts arriving while
    busy are ignored. Bin positions are physical delays, origin -stop_delay.
    """
    n_bins = _n_bins(range_, bin_width)
    s = _times(starts)
    e = _times(stops) + stop_delay
    _check_sorted(s, "starts")
    _check_sorted(e, "stops")

    counts = np.zeros(n_bins, dtype=np.int64)
    accepted = 0
    if len(s):
        j = np.searchsorted(e, s, side="left")
        has_stop = j < len(e)
        first_stop = np.where(has_stop, e[np.minimum(j, len(e) - 1)], np.inf)
        in_range = has_stop & (first_stop - s < range_)

        deltas = []
        busy_until = -math.inf
        for t, stop, ok in zip(s.tolist(), first_stop.tolist(), in_range.tolist()):
            if t <= busy_until:
                continue
            accepted += 1
            if ok:
                deltas.append(stop - t)
                busy_until = stop
            else:
                busy_until = t + range_

        if deltas:
            index = np.floor(np.asarray(deltas) / bin_width + BIN_EPS).astype(np.int64)
            index = np.minimum(index, n_bins - 1)
            counts = np.bincount(index, minlength=n_bins).astype(np.int64)

    hist = Histogram(origin=-stop_delay, bin_width=bin_width, counts=counts, starts=accepted, duration=duration)
    log.debug("Built TAC histogram", starts=accepted, recorded=hist.total, bins=n_bins)
    return hist


def coincidence_pairs(starts: Timed, stops: Timed, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    """Indices (i, j) of every start/stop pair with lo <= t_stop - t_start < hi."""
    s = _times(starts)
    e = _times(stops)
    _check_sorted(s, "starts")
    _check_sorted(e, "stops")
    j0 = np.searchsorted(e, s + lo, side="left")
    j1 = np.searchsorted(e, s + hi, side="left")
    per_start = j1 - j0
    total = int(per_start.sum())
    i = np.repeat(np.arange(len(s), dtype=np.int64), per_start)
    offsets = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(per_start) - per_start, per_start)
    j = np.repeat(j0, per_start) + offsets
    return i, j


def pair_deltas(starts: Timed, stops: Timed, lo: float, hi: float) -> np.ndarray:
    """Every start/stop time difference in [lo, hi), time-tagger style."""
    i, j = coincidence_pairs(starts, stops, lo, hi)
    return _times(stops)[j] - _times(starts)[i]


def sca(
    data: Union[Histogram, np.ndarray],
    window: CoincidenceWindow,
    duration: float,
    span: Optional[tuple[float, float]] = None,
) -> float:
    """Coincidence rate (Hz) inside the window.

    data is a Histogram (bins whose centers fall in the window) or an array of
    start/stop differences; span is the recorded range of those differences.
    """
    if duration <= 0:
        raise ConfigError(f"duration must be positive, got {duration}")
    lo, hi = window.bounds
    if isinstance(data, Histogram):
        span = (data.origin, data.end)
    if span is not None:
        tol = 1e-12 + 1e-9 * (span[1] - span[0])
        if lo < span[0] - tol or hi > span[1] + tol:
            raise WindowRangeError(
                f"window [{lo * 1e9:.4g}, {hi * 1e9:.4g}) ns lies outside the range "
                f"[{span[0] * 1e9:.4g}, {span[1] * 1e9:.4g}) ns"
            )
    if isinstance(data, Histogram):
        centers = data.centers
        count = int(data.counts[(centers >= lo) & (centers < hi)].sum())
    else:
        deltas = np.asarray(data, dtype=float)
        count = int(np.count_nonzero((deltas >= lo) & (deltas < hi)))
    if count == 0:
        log.warning("No coincidences in window", center_ns=window.center * 1e9, width_ns=window.width * 1e9)
    return count / duration


def three_fold_counts(
    a: Timed,
    b: Timed,
    period: float,
    window_a: CoincidenceWindow,
    window_b: CoincidenceWindow,
    offset: float = 0.0,
) -> int:
    """Pairs of clicks from the same pump pulse with both pulse-referenced times in their windows.

    The pulse reference of a click at t is k = floor((t - offset) / period).
    """
    if period <= 0:
        raise ConfigError("pulse period must be positive")

    def pulses_in_window(events: Timed, window: CoincidenceWindow) -> tuple[np.ndarray, np.ndarray]:
        t = _times(events) - offset
        k = np.floor(t / period).astype(np.int64)
        local = t - k * period
        lo, hi = window.bounds
        chosen = k[(local >= lo) & (local < hi)]
        return np.unique(chosen, return_counts=True)

    ka, na = pulses_in_window(a, window_a)
    kb, nb = pulses_in_window(b, window_b)
    _, ia, ib = np.intersect1d(ka, kb, assume_unique=True, return_indices=True)
    return int(np.sum(na[ia] * nb[ib]))


def merge_histograms(histograms: Sequence[Histogram]) -> Histogram:
    """Sum histograms with identical binning."""
    if not histograms:
        raise ConfigError("nothing to merge")
    first = histograms[0]
    for h in histograms[1:]:
        if (h.n_bins != first.n_bins
                or not math.isclose(h.bin_width, first.bin_width, rel_tol=1e-12)
                or not math.isclose(h.origin, first.origin, rel_tol=1e-12, abs_tol=1e-18)):
            raise ConfigError("histograms have different binning")
    return Histogram(
        origin=first.origin,
        bin_width=first.bin_width,
        counts=np.sum([h.counts for h in histograms], axis=0),
        starts=sum(h.starts for h in histograms),
        duration=sum(h.duration for h in histograms),
    )
