"""Records produced by the simulation and analysis stages.

Event streams are columnar (numpy arrays); the row types PairEvent and
DetectionEvent are what iterating a stream yields.
"""

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np


@dataclass(frozen=True)
class PairEvent:
    """One emitted photon pair. pulse_index is -1 for a CW pump."""

    time: float
    pulse_index: int
    pair_id: int


@dataclass(frozen=True, eq=False)
class EmissionBatch:
    """Time-sorted pair emissions."""

    time: np.ndarray
    pulse_index: np.ndarray
    pair_id: np.ndarray

    def __len__(self) -> int:
        return len(self.time)

    def __iter__(self) -> Iterator[PairEvent]:
        for t, k, i in zip(self.time.tolist(), self.pulse_index.tolist(), self.pair_id.tolist()):
            yield PairEvent(t, k, i)

    @classmethod
    def empty(cls) -> "EmissionBatch":
        return cls(np.empty(0), np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64))


@dataclass(frozen=True, eq=False)
class PhotonStream:
    """Single photons travelling in one arm.

    photon is 0 for the signal and 1 for the idler of pair pair_id; tag is a
    free integer label (-1 when unused) carried through detection.
    """

    time: np.ndarray
    pulse_index: np.ndarray
    pair_id: np.ndarray
    photon: np.ndarray
    tag: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.tag is None:
            object.__setattr__(self, "tag", np.full(len(self.time), -1, dtype=np.int64))

    def __len__(self) -> int:
        return len(self.time)

    def select(self, mask: np.ndarray) -> "PhotonStream":
        return PhotonStream(
            self.time[mask], self.pulse_index[mask], self.pair_id[mask],
            self.photon[mask], self.tag[mask],
        )

    def sorted(self) -> "PhotonStream":
        order = np.argsort(self.time, kind="stable")
        return self.select(order)

    @classmethod
    def empty(cls) -> "PhotonStream":
        e = np.empty(0, dtype=np.int64)
        return cls(np.empty(0), e, e.copy(), e.copy(), e.copy())


@dataclass(frozen=True)
class DetectionEvent:
    """One detector click. pair_id and photon are -1 for dark counts."""

    time: float
    pair_id: int
    photon: int
    tag: int = -1


@dataclass(frozen=True, eq=False)
class DetectionStream:
    """Time-sorted detector clicks."""

    time: np.ndarray
    pair_id: np.ndarray
    photon: np.ndarray
    tag: np.ndarray

    def __len__(self) -> int:
        return len(self.time)

    def __iter__(self) -> Iterator[DetectionEvent]:
        for row in zip(self.time.tolist(), self.pair_id.tolist(),
                       self.photon.tolist(), self.tag.tolist()):
            yield DetectionEvent(*row)

    def select(self, mask: np.ndarray) -> "DetectionStream":
        return DetectionStream(self.time[mask], self.pair_id[mask], self.photon[mask], self.tag[mask])

    @property
    def dark(self) -> np.ndarray:
        return self.pair_id < 0


@dataclass(frozen=True)
class PhotonPath:
    """One route through an interferometer network.

    delay and phase are sums over the arms taken; label lists the arm choices.
    """

    delay: float
    phase: float
    amplitude: complex
    label: tuple[str, ...]

    @property
    def probability(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class CoherentGroup:
    """Triples sharing one full physical time signature; amplitudes add.

    labels, weights (|amplitude|^2) and delays (pump, A, B) are per member.
    """

    signature: tuple[float, ...]
    probability: float
    labels: tuple[tuple[str, ...], ...]
    weights: tuple[float, ...] = ()
    delays: tuple[tuple[float, float, float], ...] = ()


@dataclass(frozen=True)
class JointOutcome:
    """Observed coincidence bin: incoherent sum of coherent groups."""

    time_signature: tuple[float, ...]
    probability: float
    contributing_labels: tuple[tuple[str, ...], ...]
    groups: tuple[CoherentGroup, ...] = ()


@dataclass(frozen=True, eq=False)
class Histogram:
    """Start-stop time-difference histogram. Bin i covers
    [origin + i*bin_width, origin + (i+1)*bin_width)."""

    origin: float
    bin_width: float
    counts: np.ndarray
    starts: int = 0
    duration: float = 0.0

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")
        if len(self.counts) < 1:
            raise ValueError("histogram needs at least one bin")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("histogram counts must be nonnegative")

    @property
    def n_bins(self) -> int:
        return len(self.counts)

    @property
    def bin_starts(self) -> np.ndarray:
        return self.origin + self.bin_width * np.arange(self.n_bins)

    @property
    def centers(self) -> np.ndarray:
        return self.bin_starts + self.bin_width / 2

    @property
    def end(self) -> float:
        return self.origin + self.bin_width * self.n_bins

    @property
    def total(self) -> int:
        return int(np.sum(self.counts))


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Down-conversion spectrum on a signal-wavelength grid (m)."""

    wavelengths: np.ndarray
    intensity: np.ndarray
    fwhm: Optional[float] = None
    peak_wavelength: Optional[float] = None


@dataclass(frozen=True)
class PeakSet:
    """Coincidence peaks: positions (s) strictly increasing, areas (counts)."""

    positions: tuple[float, ...]
    areas: tuple[float, ...]
    spacing: float

    def __post_init__(self):
        if len(self.positions) != len(self.areas):
            raise ValueError("positions and areas differ in length")
        if any(b <= a for a, b in zip(self.positions, self.positions[1:])):
            raise ValueError("peak positions must be strictly increasing")
        if any(a < 0 for a in self.areas):
            raise ValueError("peak areas must be nonnegative")

    def __len__(self) -> int:
        return len(self.positions)


@dataclass(frozen=True)
class MuEstimate:
    """Mean pairs per pulse inferred from satellite/central peak areas."""

    mu: float
    r: float
    sigma_mu: float
    central_area: float
    satellite_area: float
    n_satellites: int
    splitter: str


@dataclass(frozen=True)
class VisibilityFit:
    """Fit of R(phi) = baseline * (1 + visibility * cos(phi + offset))."""

    visibility: float
    sigma: float
    offset: float
    baseline: float
    chi2_red: float = float("nan")
    n_points: int = 0
    clamped: bool = False
    capped: bool = False


@dataclass(frozen=True)
class BellReport:
    """Significance of a visibility above the 1/sqrt(2) local-realism bound."""

    sigma: float
    chsh: float
    violates: bool
    label: str = field(default="")
