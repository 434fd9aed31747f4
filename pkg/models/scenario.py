"""Experiment scenarios and their `key = value` file format.

Keys are flat with dotted section prefixes (``source.pump_power_uw = 1``).
``#`` starts a comment, blank lines are ignored and lists are comma
separated. Times are given in ns, powers in uW, wavelengths in nm; the key
suffix names the unit. Every key is documented in docs/config.md.
"""

import enum
import hashlib
import math
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from config import get_config
from errors import ConfigError
from models.specs import (
    CoincidenceWindow,
    DetectorSpec,
    InterferometerSpec,
    PumpMode,
    SourceConfig,
    Splitter,
)

NS = 1e-9
NM = 1e-9
UW = 1e-6
UM = 1e-6
MM = 1e-3
MHZ = 1e6


class ScenarioKind(enum.Enum):
    CW_COINCIDENCE = "cw_coincidence"
    PULSED_COINCIDENCE = "pulsed_coincidence"
    FRANSON = "franson"
    TIMEBIN = "timebin"
    QPM_DESIGN = "qpm_design"

    @property
    def simulates(self) -> bool:
        return self is not ScenarioKind.QPM_DESIGN


class _Settings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class TacSettings(_Settings):
    range: float = Field(default_factory=lambda: get_config().tac_range_ns * NS, gt=0)
    bin_width: float = Field(default_factory=lambda: get_config().tac_bin_ns * NS, gt=0)
    stop_delay: float = Field(default=0.0, ge=0)


class ScanSettings(_Settings):
    phases: tuple[float, ...] = tuple(np.linspace(0, 2 * math.pi, 16, endpoint=False).tolist())
    scanned: str = Field(default="a", pattern="^(a|b|pump)$")


class AnalysisSettings(_Settings):
    spacing: Optional[float] = Field(default=None, gt=0)
    pileup: bool = True


class QpmSettings(_Settings):
    model: str = "lithium_niobate"
    pump_wavelength: float = Field(gt=0)
    signal_wavelength: Optional[float] = Field(default=None, gt=0)
    temperature: float = 25.0
    length: float = Field(gt=0)
    index_offset: Optional[float] = None
    grid_start: Optional[float] = Field(default=None, gt=0)
    grid_stop: Optional[float] = Field(default=None, gt=0)
    grid_step: float = Field(default=0.1 * NM, gt=0)
    period: Optional[float] = Field(default=None, gt=0)
    temperatures: tuple[float, ...] = ()

    @property
    def signal(self) -> float:
        return self.signal_wavelength if self.signal_wavelength is not None else 2 * self.pump_wavelength

    def grid(self) -> np.ndarray:
        start = self.grid_start if self.grid_start is not None else self.signal - 100 * NM
        stop = self.grid_stop if self.grid_stop is not None else self.signal + 100 * NM
        if stop <= start:
            raise ConfigError("qpm.grid_stop_nm must exceed qpm.grid_start_nm")
        n = int(math.floor((stop - start) / self.grid_step + 1e-9)) + 1
        return start + self.grid_step * np.arange(n)


class Scenario(_Settings):
    """One experiment: what to simulate (or design) and how to analyze it.

    duration is the integration time per run (per scan point for franson);
    n_pulses is the pulse count per run (per scan point for timebin).
    """

    kind: ScenarioKind
    seed: Optional[int] = None
    duration: Optional[float] = Field(default=None, gt=0)
    n_pulses: Optional[int] = Field(default=None, gt=0)
    v_dephase: float = Field(default=1.0, ge=0, le=1)
    source: Optional[SourceConfig] = None
    splitter: Splitter = Splitter.BEAMSPLITTER
    transmission1: float = Field(default=1.0, ge=0, le=1)
    transmission2: float = Field(default=1.0, ge=0, le=1)
    detector1: DetectorSpec = DetectorSpec()
    detector2: DetectorSpec = DetectorSpec()
    window: CoincidenceWindow = CoincidenceWindow(center=0.0, width=1 * NS)
    tac: TacSettings = Field(default_factory=TacSettings)
    interferometer_a: Optional[InterferometerSpec] = None
    interferometer_b: Optional[InterferometerSpec] = None
    interferometer_pump: Optional[InterferometerSpec] = None
    scan: ScanSettings = ScanSettings()
    analysis: AnalysisSettings = AnalysisSettings()
    qpm: Optional[QpmSettings] = None
    write_events: bool = False
    digest: str = ""

    @model_validator(mode="after")
    def _check_kind(self):
        kind = self.kind
        if kind is ScenarioKind.QPM_DESIGN:
            if self.qpm is None:
                raise ValueError("qpm_design needs a qpm section (qpm.pump_nm, qpm.length_mm)")
            return self
        if self.seed is None:
            raise ValueError(f"{kind.value} needs 'seed'")
        if self.source is None:
            raise ValueError(f"{kind.value} needs a source section")
        pulsed = kind in (ScenarioKind.PULSED_COINCIDENCE, ScenarioKind.TIMEBIN)
        if pulsed and self.source.mode is not PumpMode.PULSED:
            raise ValueError(f"{kind.value} needs 'source.mode = pulsed'")
        if not pulsed and self.source.mode is not PumpMode.CW:
            raise ValueError(f"{kind.value} needs 'source.mode = cw'")
        if pulsed and self.n_pulses is None and self.duration is None:
            raise ValueError(f"{kind.value} needs 'n_pulses' or 'duration_ns'")
        if pulsed and self.n_pulses is None and math.floor(self.duration * self.source.repetition_rate) < 1:
            raise ValueError(f"{kind.value}: duration_ns is shorter than one pulse period")
        if not pulsed and self.duration is None:
            raise ValueError(f"{kind.value} needs 'duration_ns'")
        if kind in (ScenarioKind.FRANSON, ScenarioKind.TIMEBIN):
            for name in ("a", "b"):
                if getattr(self, f"interferometer_{name}") is None:
                    raise ValueError(f"{kind.value} needs 'interferometer_{name}.imbalance_ns'")
            if self.splitter is not Splitter.DEMUX:
                raise ValueError(f"{kind.value} needs 'source.splitter = demux'")
        if kind is ScenarioKind.TIMEBIN and self.interferometer_pump is None:
            raise ValueError("timebin needs 'interferometer_pump.imbalance_ns'")
        return self

    def with_seed(self, seed: Optional[int]) -> "Scenario":
        if seed is None:
            return self
        return self.model_copy(update={"seed": seed})


# --- file format -----------------------------------------------------------

Parser = Callable[[str], object]


def _float(raw: str) -> float:
    return float(raw)


def _int(raw: str) -> int:
    value = float(raw)
    if not value.is_integer():
        raise ValueError(raw)
    return int(value)


def _bool(raw: str) -> bool:
    lowered = raw.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(raw)


def _str(raw: str) -> str:
    return raw


def _floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.split(",") if x.strip())


# file key -> (model field, parser, scale to SI)
_SOURCE = {
    "efficiency": ("efficiency", _float, 1.0),
    "pump_power_uw": ("pump_power", _float, UW),
    "pump_wavelength_nm": ("pump_wavelength", _float, NM),
    "mode": ("mode", _str, None),
    "repetition_rate_mhz": ("repetition_rate", _float, MHZ),
    "pulse_duration_ns": ("pulse_duration", _float, NS),
    "statistics": ("statistics", _str, None),
}
_DETECTOR = {
    "efficiency": ("efficiency", _float, 1.0),
    "dark_rate_hz": ("dark_rate", _float, 1.0),
    "dead_time_ns": ("dead_time", _float, NS),
    "jitter_ns": ("jitter", _float, NS),
}
_INTERFEROMETER = {
    "imbalance_ns": ("imbalance", _float, NS),
    "phase_rad": ("phase", _float, 1.0),
    "transmission_short": ("transmission_short", _float, 1.0),
    "transmission_long": ("transmission_long", _float, 1.0),
    "loss": ("loss", _float, 1.0),
}
_WINDOW = {
    "center_ns": ("center", _float, NS),
    "width_ns": ("width", _float, NS),
}
_TAC = {
    "range_ns": ("range", _float, NS),
    "bin_ns": ("bin_width", _float, NS),
    "stop_delay_ns": ("stop_delay", _float, NS),
}
_SCAN = {
    "phases_rad": ("phases", _floats, None),
    "scanned": ("scanned", _str, None),
}
_ANALYSIS = {
    "spacing_ns": ("spacing", _float, NS),
    "pileup": ("pileup", _bool, None),
}
_QPM = {
    "model": ("model", _str, None),
    "pump_nm": ("pump_wavelength", _float, NM),
    "signal_nm": ("signal_wavelength", _float, NM),
    "temperature_c": ("temperature", _float, 1.0),
    "length_mm": ("length", _float, MM),
    "index_offset": ("index_offset", _float, 1.0),
    "grid_start_nm": ("grid_start", _float, NM),
    "grid_stop_nm": ("grid_stop", _float, NM),
    "grid_step_nm": ("grid_step", _float, NM),
    "period_um": ("period", _float, UM),
    "temperatures_c": ("temperatures", _floats, None),
}
_RUN = {
    "kind": ("kind", _str, None),
    "seed": ("seed", _int, None),
    "duration_ns": ("duration", _float, NS),
    "n_pulses": ("n_pulses", _int, None),
    "v_dephase": ("v_dephase", _float, 1.0),
    "source.splitter": ("splitter", _str, None),
    "arm1.transmission": ("transmission1", _float, 1.0),
    "arm2.transmission": ("transmission2", _float, 1.0),
    "output.events": ("write_events", _bool, None),
}

_SECTIONS = {
    "source": (SourceConfig, _SOURCE),
    "detector1": (DetectorSpec, _DETECTOR),
    "detector2": (DetectorSpec, _DETECTOR),
    "interferometer_a": (InterferometerSpec, _INTERFEROMETER),
    "interferometer_b": (InterferometerSpec, _INTERFEROMETER),
    "interferometer_pump": (InterferometerSpec, _INTERFEROMETER),
    "window": (CoincidenceWindow, _WINDOW),
    "tac": (TacSettings, _TAC),
    "analysis": (AnalysisSettings, _ANALYSIS),
    "qpm": (QpmSettings, _QPM),
}


def parse_key_values(text: str) -> dict[str, tuple[str, int]]:
    """key -> (raw value, 1-based line number)."""
    entries: dict[str, tuple[str, int]] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ConfigError(f"line {number}: expected 'key = value', got '{content}'")
        key, value = (part.strip() for part in content.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {number}: expected 'key = value', got '{content}'")
        if key in entries:
            raise ConfigError(f"line {number}: duplicate key '{key}' (first set on line {entries[key][1]})")
        entries[key] = (value, number)
    return entries


def scenario_digest(entries: dict[str, tuple[str, int]]) -> str:
    """sha256 over the sorted key/value pairs; comments and ordering do not matter."""
    canonical = "".join(f"{k} = {entries[k][0]}\n" for k in sorted(entries))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _take(remaining: dict, key: str, parse: Parser, scale: Optional[float]):
    raw, line = remaining.pop(key)
    try:
        value = parse(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse '{raw}' (line {line})") from None
    if scale is None:
        return value
    if isinstance(value, tuple):
        return tuple(v * scale for v in value)
    return value * scale


def _describe(error: ValidationError, prefix: str, table: dict) -> str:
    field_keys = {field: name for name, (field, _, _) in table.items()}
    details = error.errors()[0]
    loc = details.get("loc") or ()
    msg = details.get("msg", "invalid value").removeprefix("Value error, ")
    if loc and loc[0] in field_keys:
        name = field_keys[loc[0]]
        key = name if "." in name else (f"{prefix}.{name}" if prefix else name)
        return f"{key}: {msg}"
    return f"{prefix}: {msg}" if prefix else msg


def _section(remaining: dict, prefix: str, model, table: dict):
    if not any(k.startswith(prefix + ".") for k in remaining):
        return None
    kwargs = {}
    for name, (field, parse, scale) in table.items():
        key = f"{prefix}.{name}"
        if key in remaining:
            kwargs[field] = _take(remaining, key, parse, scale)
    try:
        return model(**kwargs)
    except ValidationError as e:
        raise ConfigError(_describe(e, prefix, table)) from None


def parse_scenario(text: str) -> Scenario:
    """Build a validated Scenario from config-file text."""
    entries = parse_key_values(text)
    remaining = dict(entries)

    kwargs = {}
    for key, (field, parse, scale) in _RUN.items():
        if key in remaining:
            kwargs[field] = _take(remaining, key, parse, scale)

    points = None
    if "scan.points" in remaining:
        points = _take(remaining, "scan.points", _int, None)
    scan = {}
    for name, (field, parse, scale) in _SCAN.items():
        key = f"scan.{name}"
        if key in remaining:
            scan[field] = _take(remaining, key, parse, scale)
    if points is not None:
        if "phases" in scan:
            raise ConfigError("scan.points and scan.phases_rad are mutually exclusive")
        if points < 4:
            raise ConfigError("scan.points: need at least 4 phase points")
        scan["phases"] = tuple(np.linspace(0, 2 * math.pi, points, endpoint=False).tolist())
    if scan:
        try:
            kwargs["scan"] = ScanSettings(**scan)
        except ValidationError as e:
            raise ConfigError(_describe(e, "scan", _SCAN)) from None

    for prefix, (model, table) in _SECTIONS.items():
        section = _section(remaining, prefix, model, table)
        if section is not None:
            kwargs[prefix] = section

    if remaining:
        key = min(remaining, key=lambda k: remaining[k][1])
        raise ConfigError(f"unknown key '{key}' (line {remaining[key][1]})")

    kwargs["digest"] = scenario_digest(entries)
    try:
        return Scenario(**kwargs)
    except ValidationError as e:
        raise ConfigError(_describe(e, "", _RUN)) from None


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read scenario {path}: {e.strerror or e}") from None
    return parse_scenario(text)
