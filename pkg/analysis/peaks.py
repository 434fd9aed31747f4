"""Coincidence peaks in start-stop histograms and the pairs-per-pulse estimate."""

import math

import numpy as np
import structlog
from scipy import signal

from errors import ConfigError, MuInversionError, UnknownBinError
from models.records import Histogram, MuEstimate, PeakSet
from models.specs import Splitter

log = structlog.get_logger()


def coates_correct(hist: Histogram) -> np.ndarray:
    """Pile-up correction of a single-stop histogram.

    C_i * N / (N - sum_{j<i} C_j) with N the accepted starts. Returns the
    counts unchanged (as floats) when the start count is unknown.
    """
    counts = np.asarray(hist.counts, dtype=float)
    n = float(hist.starts)
    if n <= 0:
        return counts
    before = np.concatenate([[0.0], np.cumsum(counts)[:-1]])
    remaining = n - before
    return np.where(remaining > 0, counts * n / np.where(remaining > 0, remaining, 1.0), 0.0)


def noise_floor(counts: np.ndarray) -> float:
    median = float(np.median(counts))
    return median + 5 * math.sqrt(max(median, 0.0))


def find_peaks(hist: Histogram, spacing: float, pileup: bool = False) -> PeakSet:
    """Local maxima above the noise floor, areas integrated over +-spacing/4.

    Positions are count-weighted centroids (s). An empty PeakSet is returned
    when nothing rises above the floor.
    """
    if spacing <= 2 * hist.bin_width:
        raise ConfigError(
            f"peak spacing {spacing * 1e9:.4g} ns must exceed twice the bin width "
            f"{hist.bin_width * 1e9:.4g} ns"
        )
    counts = coates_correct(hist) if pileup else np.asarray(hist.counts, dtype=float)
    floor = noise_floor(counts)

    # zero padding lets maxima in the first or last bin qualify
    padded = np.concatenate([[0.0], counts, [0.0]])
    distance = max(1, int(spacing / 2 / hist.bin_width))
    found, _ = signal.find_peaks(padded, height=floor, distance=distance)
    indices = [int(i) - 1 for i in found if padded[i] > floor]

    half = int(round(spacing / 4 / hist.bin_width))
    centers = hist.centers
    peaks = {}
    for i in indices:
        lo, hi = max(0, i - half), min(hist.n_bins, i + half + 1)
        area = float(counts[lo:hi].sum())
        if area > 0:
            position = float(np.average(centers[lo:hi], weights=counts[lo:hi]))
        else:
            position = float(centers[i])
        peaks[position] = area

    positions = sorted(peaks)
    log.debug("Found peaks", count=len(positions), floor=floor, pileup=pileup)
    return PeakSet(tuple(positions), tuple(peaks[p] for p in positions), spacing)


def central_index(peaks: PeakSet) -> int:
    """Index of the peak nearest zero delay; it must lie within spacing/4 of zero."""
    if not len(peaks):
        raise UnknownBinError("no peaks")
    index = int(np.argmin(np.abs(peaks.positions)))
    if abs(peaks.positions[index]) > peaks.spacing / 4:
        raise UnknownBinError(
            f"no central peak: nearest peak at {peaks.positions[index] * 1e9:.4g} ns"
        )
    return index


def infer_mu(peaks: PeakSet, splitter: Splitter = Splitter.DEMUX) -> MuEstimate:
    """Mean pairs per pulse from r = mean satellite area / central area.

    Poisson pairs, small detection probability. Deterministic splitting
    (demux): mu = r / (1 - r). 50/50 beamsplitter: mu = r / (2 (1 - r)).
    """
    splitter = Splitter(splitter)
    try:
        c = central_index(peaks)
    except UnknownBinError as e:
        raise MuInversionError(f"cannot infer mu: {e}") from None
    if len(peaks) < 2:
        raise MuInversionError("cannot infer mu: no satellite peak")

    central = peaks.areas[c]
    satellites = [a for i, a in enumerate(peaks.areas) if i != c]
    if central <= 0:
        raise MuInversionError("cannot infer mu: central peak is empty")
    n_sat = len(satellites)
    total_sat = float(sum(satellites))
    r = total_sat / n_sat / central
    if r >= 1:
        raise MuInversionError(f"satellite/central ratio {r:.4f} >= 1; data not Poisson or saturated")

    # Poisson errors on the central area and on the summed satellite areas
    sigma_r = math.sqrt(r ** 2 / central + total_sat / (n_sat * central) ** 2)
    if splitter is Splitter.DEMUX:
        mu = r / (1 - r)
        sigma_mu = sigma_r / (1 - r) ** 2
    else:
        mu = r / (2 * (1 - r))
        sigma_mu = sigma_r / (2 * (1 - r) ** 2)
    log.info("Inferred mu", mu=mu, r=r, sigma_mu=sigma_mu, splitter=splitter.value)
    return MuEstimate(mu, r, sigma_mu, central, total_sat, n_sat, splitter.value)


def fringe_ratio(peaks: PeakSet) -> tuple[float, float, float]:
    """side:central:side areas scaled so the central peak is 2."""
    c = central_index(peaks)
    if c == 0 or c == len(peaks) - 1:
        raise UnknownBinError("central peak needs a side peak on both sides")
    central = peaks.areas[c]
    if central <= 0:
        raise UnknownBinError("central peak is empty")
    return (2 * peaks.areas[c - 1] / central, 2.0, 2 * peaks.areas[c + 1] / central)
