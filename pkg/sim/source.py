"""SPDC pair source: pump photon flux, pair emission statistics, pair splitting.

Random streams are numpy Generators seeded from a SeedSequence. Emission is
generated in chunks with spawned sub-seeds, so a run is reproducible from a
single integer seed and disjoint chunks could be generated independently.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Optional, Union

import numpy as np
import structlog
from scipy import constants

from config import get_config
from errors import ConfigError, UndefinedEstimateError
from models.records import EmissionBatch, PhotonStream
from models.specs import PairStatistics, PumpMode, SourceConfig, Splitter

log = structlog.get_logger()

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]


def make_rng(seed: SeedLike) -> np.random.Generator:
    return np.random.default_rng(seed)


def pump_photon_rate(power: float, wavelength: float) -> float:
    """N_P = P * lambda / (h c), photons per second."""
    if power < 0:
        raise ConfigError(f"pump power must be nonnegative, got {power}")
    return power * wavelength / (constants.h * constants.c)


def photons_per_pulse(mean_power: float, repetition_rate: float, wavelength: float) -> float:
    if repetition_rate <= 0:
        raise ConfigError(f"repetition rate must be positive, got {repetition_rate}")
    return pump_photon_rate(mean_power, wavelength) / repetition_rate


def pair_rate(config: SourceConfig) -> float:
    """Pairs created per second, N = eta * N_P."""
    return config.efficiency * pump_photon_rate(config.pump_power, config.pump_wavelength)


def mean_pairs_per_pulse(config: SourceConfig) -> float:
    """mu = eta * pump photons per pulse."""
    if config.mode is not PumpMode.PULSED:
        raise ConfigError("mean pairs per pulse needs a pulsed source")
    return config.efficiency * photons_per_pulse(
        config.pump_power, config.repetition_rate, config.pump_wavelength
    )


def estimate_efficiency(
    s1: float,
    s2: float,
    coincidences: float,
    power: float,
    wavelength: float,
    splitter: Splitter = Splitter.BEAMSPLITTER,
) -> float:
    """Conversion efficiency from net singles and coincidence rates.

    eta = S1 S2 / (2 R_C) * h c / (P lambda). The factor 2 accounts for the
    50/50 splitter separating only half of the pairs; a demultiplexer
    separates all of them and drops it.
    """
    if min(s1, s2, coincidences) < 0:
        raise ConfigError("count rates must be nonnegative")
    if coincidences == 0:
        raise UndefinedEstimateError("coincidence rate is zero; efficiency undefined")
    n_pump = pump_photon_rate(power, wavelength)
    if n_pump == 0:
        raise UndefinedEstimateError("pump photon rate is zero; efficiency undefined")
    split_factor = 2.0 if Splitter(splitter) is Splitter.BEAMSPLITTER else 1.0
    return s1 * s2 / (split_factor * coincidences) / n_pump


@dataclass(frozen=True)
class ExpectedRates:
    """Closed-form net rates (Hz) for given arm transmissions and detector efficiencies."""

    pairs: float
    singles1: float
    singles2: float
    coincidences: float


def expected_rates(
    config: SourceConfig,
    transmission1: float = 1.0,
    transmission2: float = 1.0,
    efficiency1: float = 1.0,
    efficiency2: float = 1.0,
    splitter: Splitter = Splitter.BEAMSPLITTER,
) -> ExpectedRates:
    n = pair_rate(config)
    d1 = transmission1 * efficiency1
    d2 = transmission2 * efficiency2
    split = 0.5 if Splitter(splitter) is Splitter.BEAMSPLITTER else 1.0
    return ExpectedRates(pairs=n, singles1=n * d1, singles2=n * d2, coincidences=n * d1 * d2 * split)


def _cw_spans(rate: float, duration: float, chunk_pairs: int) -> list[tuple[float, float]]:
    expected = rate * duration
    n_chunks = max(1, math.ceil(expected / chunk_pairs))
    edges = np.linspace(0.0, duration, n_chunks + 1)
    return list(zip(edges[:-1].tolist(), edges[1:].tolist()))


def _pulse_ranges(n_pulses: int, mu: float, chunk_pairs: int) -> list[tuple[int, int]]:
    per_chunk = max(1, int(chunk_pairs / max(mu, 1e-12)))
    starts = range(0, n_pulses, per_chunk)
    return [(k, min(k + per_chunk, n_pulses)) for k in starts]


def _pulsed_chunk(config: SourceConfig, mu: float, first: int, last: int, rng: np.random.Generator):
    n = last - first
    if config.statistics is PairStatistics.THERMAL:
        counts = rng.geometric(1.0 / (1.0 + mu), size=n) - 1
        pulses = np.repeat(np.arange(first, last, dtype=np.int64), counts)
    else:
        # Poisson per pulse == Poisson total with uniform pulse assignment
        total = rng.poisson(mu * n)
        pulses = rng.integers(first, last, size=total, dtype=np.int64)
    times = pulses * config.pulse_period + rng.random(len(pulses)) * config.pulse_duration
    order = np.argsort(times, kind="stable")
    return times[order], pulses[order]


def iter_emissions(
    config: SourceConfig,
    duration: Optional[float] = None,
    n_pulses: Optional[int] = None,
    seed: SeedLike = None,
    chunk_pairs: Optional[int] = None,
) -> Iterator[tuple[EmissionBatch, float, float]]:
    """Yield (batch, span_start, span_end) chunks covering the whole run in time order."""
    chunk_pairs = chunk_pairs or get_config().chunk_pairs
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)

    if config.mode is PumpMode.CW:
        if duration is None or n_pulses is not None:
            raise ConfigError("a CW source needs a duration and no pulse count")
        rate = pair_rate(config)
        spans = _cw_spans(rate, duration, chunk_pairs)
        next_id = 0
        for (t0, t1), child in zip(spans, root.spawn(len(spans))):
            rng = np.random.default_rng(child)
            count = rng.poisson(rate * (t1 - t0)) if rate > 0 else 0
            times = np.sort(t0 + rng.random(count) * (t1 - t0))
            ids = np.arange(next_id, next_id + count, dtype=np.int64)
            next_id += count
            yield EmissionBatch(times, np.full(count, -1, dtype=np.int64), ids), t0, t1
        return

    if n_pulses is None:
        if duration is None:
            raise ConfigError("a pulsed source needs a pulse count or a duration")
        n_pulses = int(math.floor(duration * config.repetition_rate))
    mu = mean_pairs_per_pulse(config)
    ranges = _pulse_ranges(n_pulses, mu, chunk_pairs)
    next_id = 0
    for (first, last), child in zip(ranges, root.spawn(len(ranges))):
        rng = np.random.default_rng(child)
        if mu > 0:
            times, pulses = _pulsed_chunk(config, mu, first, last, rng)
        else:
            times, pulses = np.empty(0), np.empty(0, dtype=np.int64)
        ids = np.arange(next_id, next_id + len(times), dtype=np.int64)
        next_id += len(times)
        yield EmissionBatch(times, pulses, ids), first * config.pulse_period, last * config.pulse_period


def concat_batches(batches) -> EmissionBatch:
    batches = list(batches)
    if not batches:
        return EmissionBatch.empty()
    return EmissionBatch(
        np.concatenate([b.time for b in batches]),
        np.concatenate([b.pulse_index for b in batches]),
        np.concatenate([b.pair_id for b in batches]),
    )


def generate_emissions(
    config: SourceConfig,
    duration: Optional[float] = None,
    n_pulses: Optional[int] = None,
    seed: SeedLike = None,
    chunk_pairs: Optional[int] = None,
) -> EmissionBatch:
    """All pair emissions of a run: Poisson process (CW) or per-pulse counts (pulsed)."""
    batch = concat_batches(b for b, _, _ in iter_emissions(config, duration, n_pulses, seed, chunk_pairs))
    log.info("Generated emissions", pairs=len(batch), mode=config.mode.value,
             statistics=config.statistics.value)
    return batch


def split_pairs(
    batch: EmissionBatch,
    seed: SeedLike = None,
    mode: Splitter = Splitter.BEAMSPLITTER,
) -> tuple[PhotonStream, PhotonStream]:
    """Route signal (photon 0) and idler (photon 1) of each pair to arm 1 or arm 2.

    beamsplitter: every photon independently to either arm with probability 1/2.
    demux: signal always to arm 1, idler always to arm 2.
    """
    n = len(batch)
    if n == 0:
        return PhotonStream.empty(), PhotonStream.empty()
    mode = Splitter(mode)
    if mode is Splitter.BEAMSPLITTER:
        arm = make_rng(seed).integers(0, 2, size=(n, 2))
    else:
        arm = np.tile(np.array([0, 1]), (n, 1))

    time = np.concatenate([batch.time, batch.time])
    pulse = np.concatenate([batch.pulse_index, batch.pulse_index])
    pair = np.concatenate([batch.pair_id, batch.pair_id])
    photon = np.concatenate([np.zeros(n, dtype=np.int64), np.ones(n, dtype=np.int64)])
    route = np.concatenate([arm[:, 0], arm[:, 1]])

    arms = []
    for which in (0, 1):
        mask = route == which
        arms.append(PhotonStream(time[mask], pulse[mask], pair[mask], photon[mask]).sorted())
    return arms[0], arms[1]


def apply_transmission(stream: PhotonStream, transmission: float, seed: SeedLike = None) -> PhotonStream:
    """Lumped arm loss: keep each photon with probability `transmission`."""
    if not 0.0 <= transmission <= 1.0:
        raise ConfigError(f"transmission must lie in [0, 1], got {transmission}")
    if transmission == 1.0 or len(stream) == 0:
        return stream
    keep = make_rng(seed).random(len(stream)) < transmission
    return stream.select(keep)
