"""Path-amplitude engine for photon pairs in unbalanced interferometers.

A pair is created by one pump path and each photon takes one path through
its analyzer. Triples (pump, A, B) whose full physical time signature is
identical are indistinguishable and add coherently; everything else adds in
probability. The post-selection mode only decides how those coherent groups
are binned into observed outcomes.

Physical signature: with a CW pump the emission time is unknown, so only
t_A - t_B is physical. With a pulsed pump (pump interferometer) detection
times (t_A, t_B) are measured from the pump pulse.
"""

import cmath
import enum
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import structlog

from errors import ConfigError, ImbalanceMismatchError, UnknownBinError
from models.records import CoherentGroup, JointOutcome, PhotonPath
from models.specs import InterferometerSpec

log = structlog.get_logger()

# delays are grouped as integer multiples of the common imbalance
DELAY_RTOL = 1e-9


class Observables(enum.Enum):
    TWO_FOLD_DIFFERENCE = "two_fold_difference"
    THREE_FOLD_REFERENCED = "three_fold_referenced"


def propagate(spec: InterferometerSpec, port: int = 0, name: str = "") -> list[PhotonPath]:
    """Short and long routes to one output port of an unbalanced Mach-Zehnder.

    Port 1 is the complementary output: same moduli, long arm shifted by pi.
    """
    if port not in (0, 1):
        raise ConfigError(f"interferometer port must be 0 or 1, got {port}")
    suffix = f"_{name}" if name else ""
    scale = 0.5 * math.sqrt(spec.loss)
    long_phase = spec.phase + (math.pi if port == 1 else 0.0)
    return [
        PhotonPath(0.0, 0.0, complex(scale * spec.transmission_short), (f"s{suffix}",)),
        PhotonPath(
            spec.imbalance,
            long_phase,
            scale * spec.transmission_long * cmath.exp(1j * long_phase),
            (f"l{suffix}",),
        ),
    ]


def pump_paths(spec: InterferometerSpec) -> list[PhotonPath]:
    """Pump-interferometer paths renormalized to unit total probability.

    Pairs are only created by light that reaches the waveguide, so the pump
    paths are conditioned on transmission.
    """
    paths = propagate(spec, 0, "P")
    total = sum(p.probability for p in paths)
    if total <= 0:
        raise ConfigError("pump interferometer transmits no light")
    norm = 1.0 / math.sqrt(total)
    return [PhotonPath(p.delay, p.phase, p.amplitude * norm, p.label) for p in paths]


def cw_pump_paths() -> list[PhotonPath]:
    """Single trivial path of a CW pump with coherence longer than the imbalance."""
    return [PhotonPath(0.0, 0.0, 1.0 + 0.0j, ())]


def _common_unit(*path_lists: Sequence[PhotonPath]) -> float:
    delays = [p.delay for paths in path_lists for p in paths if p.delay > 0]
    if not delays:
        return 1.0
    unit = min(delays)
    for paths in path_lists:
        own = [p.delay for p in paths if p.delay > 0]
        if not own:
            continue
        off_grid = [d for d in own if abs(d / unit - round(d / unit)) > DELAY_RTOL * max(1.0, d / unit)]
        if off_grid or abs(min(own) - unit) > DELAY_RTOL * unit:
            raise ImbalanceMismatchError(
                f"interferometer imbalances differ ({unit:.6g} s vs {min(own):.6g} s); "
                "all analyzers must be equally unbalanced"
            )
    return unit


def joint_outcomes(
    pump: Sequence[PhotonPath],
    paths_a: Sequence[PhotonPath],
    paths_b: Sequence[PhotonPath],
    observables: Observables = Observables.TWO_FOLD_DIFFERENCE,
    v_dephase: float = 1.0,
    pump_cw: Optional[bool] = None,
) -> list[JointOutcome]:
    """Coherent grouping of all (pump, A, B) triples, binned by `observables`.

    v_dephase scales every interference cross-term. Outcomes are sorted by
    time signature.
    """
    if not pump or not paths_a or not paths_b:
        raise ConfigError("path lists must be non-empty")
    if not 0.0 <= v_dephase <= 1.0:
        raise ConfigError(f"v_dephase must lie in [0, 1], got {v_dephase}")
    observables = Observables(observables)
    if pump_cw is None:
        pump_cw = len(pump) == 1 and pump[0].delay == 0
    if pump_cw and observables is Observables.THREE_FOLD_REFERENCED:
        raise ConfigError("three-fold referencing needs a pulsed pump; a CW pump has no time reference")

    unit = _common_unit(pump, paths_a, paths_b)

    def steps(p: PhotonPath) -> int:
        return round(p.delay / unit)

    groups = defaultdict(list)
    for p in pump:
        for a in paths_a:
            for b in paths_b:
                t_a = steps(p) + steps(a)
                t_b = steps(p) + steps(b)
                signature = (t_a - t_b,) if pump_cw else (t_a, t_b)
                groups[signature].append((
                    p.amplitude * a.amplitude * b.amplitude,
                    p.label + a.label + b.label,
                    (p.delay, a.delay, b.delay),
                ))

    binned = defaultdict(list)
    for signature, members in groups.items():
        amplitudes = [m[0] for m in members]
        incoherent = sum(abs(x) ** 2 for x in amplitudes)
        coherent = abs(sum(amplitudes)) ** 2
        probability = incoherent + v_dephase * (coherent - incoherent)
        group = CoherentGroup(
            signature=tuple(k * unit for k in signature),
            probability=max(probability, 0.0),
            labels=tuple(m[1] for m in members),
            weights=tuple(abs(x) ** 2 for x in amplitudes),
            delays=tuple(m[2] for m in members),
        )
        if observables is Observables.TWO_FOLD_DIFFERENCE:
            key = (signature[0],) if pump_cw else (signature[0] - signature[1],)
        else:
            key = signature
        binned[key].append(group)

    outcomes = []
    for key in sorted(binned):
        members = binned[key]
        outcomes.append(JointOutcome(
            time_signature=tuple(k * unit for k in key),
            probability=sum(g.probability for g in members),
            contributing_labels=tuple(label for g in members for label in g.labels),
            groups=tuple(sorted(members, key=lambda g: g.signature)),
        ))
    log.debug("Computed joint outcomes", bins=len(outcomes), groups=len(groups), observables=observables.value)
    return outcomes


def find_outcome(outcomes: Sequence[JointOutcome], key: Sequence[float]) -> JointOutcome:
    """Outcome whose time signature matches key (s)."""
    key = tuple(float(k) for k in key)
    scale = max([abs(k) for o in outcomes for k in o.time_signature] + [1e-15])
    for outcome in outcomes:
        if len(outcome.time_signature) == len(key) and all(
            abs(a - b) <= DELAY_RTOL * scale for a, b in zip(outcome.time_signature, key)
        ):
            return outcome
    raise UnknownBinError(f"no outcome bin with time signature {key}")


@dataclass(frozen=True)
class InterferenceSetup:
    """Pump, two analyzers, monitored ports and post-selection mode.

    pump=None is a CW pump. `scanned` names the phase varied by
    visibility_scan: "a", "b" or "pump".
    """

    a: InterferometerSpec
    b: InterferometerSpec
    pump: Optional[InterferometerSpec] = None
    observables: Observables = Observables.TWO_FOLD_DIFFERENCE
    port_a: int = 0
    port_b: int = 0
    v_dephase: float = 1.0
    scanned: str = "a"

    def __post_init__(self):
        if self.scanned not in ("a", "b", "pump"):
            raise ConfigError(f"scanned phase must be 'a', 'b' or 'pump', got '{self.scanned}'")
        if self.scanned == "pump" and self.pump is None:
            raise ConfigError("cannot scan the pump phase of a CW pump")

    def at_phase(self, phase: float) -> "InterferenceSetup":
        field = self.scanned
        spec = getattr(self, field)
        updated = {"a": self.a, "b": self.b, "pump": self.pump}
        updated[field] = spec.with_phase(phase)
        return InterferenceSetup(
            a=updated["a"], b=updated["b"], pump=updated["pump"],
            observables=self.observables, port_a=self.port_a, port_b=self.port_b,
            v_dephase=self.v_dephase, scanned=self.scanned,
        )

    def pump_path_list(self) -> list[PhotonPath]:
        return cw_pump_paths() if self.pump is None else pump_paths(self.pump)

    def outcomes(self, port_a: Optional[int] = None, port_b: Optional[int] = None) -> list[JointOutcome]:
        return joint_outcomes(
            self.pump_path_list(),
            propagate(self.a, self.port_a if port_a is None else port_a, "A"),
            propagate(self.b, self.port_b if port_b is None else port_b, "B"),
            self.observables,
            self.v_dephase,
            pump_cw=self.pump is None,
        )


def visibility_scan(
    setup: InterferenceSetup, phases: Sequence[float], bin_key: Sequence[float]
) -> list[tuple[float, float]]:
    """Exact probability of one outcome bin at each scanned phase."""
    scan = []
    for phase in phases:
        outcome = find_outcome(setup.at_phase(float(phase)).outcomes(), bin_key)
        scan.append((float(phase), outcome.probability))
    return scan


def fringe_visibility(values: Sequence[float]) -> float:
    """(max - min) / (max + min) of a fringe; 0 for an all-zero scan."""
    values = np.asarray(values, dtype=float)
    top, bottom = float(values.max()), float(values.min())
    if top + bottom == 0:
        return 0.0
    return (top - bottom) / (top + bottom)


@dataclass(frozen=True, eq=False)
class OutcomeSample:
    """Monte-Carlo draws from the analytic outcome distribution.

    port_a/port_b are -1 for pairs lost inside the devices. bin is the index
    into `keys` (observed time signatures of the monitored ports) or -1.
    """

    port_a: np.ndarray
    port_b: np.ndarray
    delay_pump: np.ndarray
    delay_a: np.ndarray
    delay_b: np.ndarray
    bin: np.ndarray
    keys: tuple[tuple[float, ...], ...]


def sample_outcomes(setup: InterferenceSetup, n: int, rng: np.random.Generator) -> OutcomeSample:
    """Draw n pair outcomes over all four port combinations.

    Within a coherent group the member (and so the absolute delays) is drawn
    in proportion to |amplitude|^2; members of a group share the observable
    signature, so this only fixes unobservable detail.
    """
    rows = []
    keys = []
    for port_a in (0, 1):
        for port_b in (0, 1):
            monitored = port_a == setup.port_a and port_b == setup.port_b
            for outcome in setup.outcomes(port_a, port_b):
                bin_index = -1
                if monitored:
                    bin_index = len(keys)
                    keys.append(outcome.time_signature)
                for group in outcome.groups:
                    total = sum(group.weights)
                    if total <= 0 or group.probability <= 0:
                        continue
                    for weight, delays in zip(group.weights, group.delays):
                        rows.append((group.probability * weight / total, port_a, port_b, *delays, bin_index))

    table = np.array(rows, dtype=float).reshape(-1, 7)
    probabilities = table[:, 0]
    lost = max(0.0, 1.0 - probabilities.sum())
    probabilities = np.append(probabilities, lost)
    probabilities /= probabilities.sum()
    table = np.vstack([table, [lost, -1, -1, 0.0, 0.0, 0.0, -1]])

    choice = rng.choice(len(probabilities), size=n, p=probabilities)
    picked = table[choice]
    return OutcomeSample(
        port_a=picked[:, 1].astype(np.int64),
        port_b=picked[:, 2].astype(np.int64),
        delay_pump=picked[:, 3],
        delay_a=picked[:, 4],
        delay_b=picked[:, 5],
        bin=picked[:, 6].astype(np.int64),
        keys=tuple(keys),
    )
